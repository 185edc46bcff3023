"""Row-projection solvers with pluggable quantile-based row selection.

One shared projection step drives five selection rules:

* ``RK``        - row i with probability ||a_i||^2 / ||A||_F^2.
* ``QRK(q)``    - restricted to rows whose normalized residual is at most
                  the q-quantile (robust to corrupted right-hand sides).
* ``RQRK(q)``   - restricted to rows whose normalized residual exceeds the
                  q-quantile (accelerates consistent systems).
* ``DQRK(q0,q1)`` - restricted to the band strictly above the q0-quantile
                  and at most the q1-quantile (fast and robust).
* ``Motzkin``   - deterministic largest-residual row, smallest index on ties.

Within the restricted set, rows are drawn with probability proportional to
||a_i||^2 (uniform for row-normalized matrices). The iterate update is
always the orthogonal projection x + ((b_i - <x, a_i>)/||a_i||^2) a_i.

Randomness comes from numpy's PCG64, one stream per solve, so a (system,
config) pair replays bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroWeightsError,
    DimensionMismatchError,
    EmptyAdmissibleSetError,
    InvalidQuantilesError,
    ZeroRowError,
)
from .linalg import ZERO_ROW_TOL, as_matrix, as_vector, row_norms
from .quantiles import partition_two_sided

# --------------------------------------------------------------------------
# selection strategies


@dataclass(frozen=True)
class RK:
    """Unrestricted row sampling proportional to squared row norms."""

    name = "rk"


@dataclass(frozen=True)
class QRK:
    """Sample among rows with normalized residual <= the q-quantile."""

    q: float
    name = "qrk"

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise InvalidQuantilesError(f"qrk needs q in (0, 1), got {self.q}")


@dataclass(frozen=True)
class RQRK:
    """Sample among rows with normalized residual > the q-quantile."""

    q: float
    name = "rqrk"

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise InvalidQuantilesError(f"rqrk needs q in (0, 1), got {self.q}")

    def validate_for(self, m: int) -> None:
        # The convergence guarantee needs 1/m <= q <= (m-1)/m; below 1/m the
        # scheme degrades to RK and above (m-1)/m the upper block is empty.
        if self.q * m < 1.0 - 1e-12 or self.q * m > m - 1.0 + 1e-12:
            raise InvalidQuantilesError(
                f"rqrk needs 1/m <= q <= (m-1)/m, got q={self.q} with m={m}"
            )


@dataclass(frozen=True)
class DQRK:
    """Sample among rows with normalized residual in (q0-quantile, q1-quantile]."""

    q0: float
    q1: float
    name = "dqrk"

    def __post_init__(self):
        if not 0.0 < self.q0 < self.q1 <= 1.0:
            raise InvalidQuantilesError(
                f"dqrk needs 0 < q0 < q1 <= 1, got q0={self.q0}, q1={self.q1}"
            )


@dataclass(frozen=True)
class Motzkin:
    """Deterministic choice of the largest normalized residual."""

    name = "motzkin"


SelectorKind = RK | QRK | RQRK | DQRK | Motzkin


def parse_selector(method: str, q: float | None = None,
                   q0: float | None = None, q1: float | None = None) -> SelectorKind:
    """Build a selector from CLI-style arguments."""
    method = method.lower()
    if method == "rk":
        return RK()
    if method == "motzkin":
        return Motzkin()
    if method == "qrk":
        if q is None:
            raise InvalidQuantilesError("qrk needs --q")
        return QRK(q=q)
    if method == "rqrk":
        if q is None:
            raise InvalidQuantilesError("rqrk needs --q")
        return RQRK(q=q)
    if method == "dqrk":
        if q0 is None or q1 is None:
            raise InvalidQuantilesError("dqrk needs --q0 and --q1")
        return DQRK(q0=q0, q1=q1)
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# sampling and selection


def weighted_sample(weights, rng: np.random.Generator) -> int:
    """Draw an index with probability proportional to its weight.

    Consumes exactly one uniform variate. Raises AllZeroWeightsError when no
    weight is positive.
    """
    w = np.asarray(weights, dtype=np.float64)
    cum = np.cumsum(w)
    total = cum[-1]
    if not total > 0.0:
        raise AllZeroWeightsError("all sampling weights are zero")
    i = int(np.searchsorted(cum, rng.random() * total, side="right"))
    if i >= w.size:  # can only happen on a floating-point boundary hit
        i = w.size - 1
    while w[i] == 0.0 and i > 0:
        i -= 1
    return i


def select_row(
    kind: SelectorKind,
    residuals: np.ndarray,
    row_sq_norms: np.ndarray,
    rng: np.random.Generator,
) -> tuple[int, float | None, float | None]:
    """Pick a row index under the given strategy.

    ``residuals`` are the normalized residuals of the current iterate.
    Returns (index, low_threshold, high_threshold) where the thresholds are
    the quantile values bounding the admissible set (None when unbounded on
    that side).
    """
    residuals = np.asarray(residuals, dtype=np.float64)
    if isinstance(kind, RK):
        return weighted_sample(row_sq_norms, rng), None, None
    if isinstance(kind, Motzkin):
        return int(np.argmax(residuals)), None, None
    if isinstance(kind, QRK):
        part = partition_two_sided(residuals, q1=kind.q)
        admissible, low, high = part.admissible, None, part.q1_value
    elif isinstance(kind, RQRK):
        part = partition_two_sided(residuals, q1=kind.q)
        admissible, low, high = part.upper, part.q1_value, None
        if admissible.size == 0:
            raise EmptyAdmissibleSetError(
                f"no residual exceeds the q={kind.q} quantile for m={residuals.size}"
            )
    elif isinstance(kind, DQRK):
        part = partition_two_sided(residuals, q1=kind.q1, q0=kind.q0)
        admissible, low, high = part.admissible, part.q0_value, part.q1_value
    else:
        raise TypeError(f"unknown selector {kind!r}")
    pick = weighted_sample(row_sq_norms[admissible], rng)
    return int(admissible[pick]), low, high


# --------------------------------------------------------------------------
# systems, configuration, traces


@dataclass(frozen=True)
class GroundTruth:
    """Planted solution and corruption metadata for a generated system."""

    x_star: np.ndarray
    b_true: np.ndarray
    corrupt_support: np.ndarray
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "x_star", as_vector(self.x_star))
        object.__setattr__(self, "b_true", as_vector(self.b_true))
        support = np.asarray(self.corrupt_support, dtype=np.int64)
        object.__setattr__(self, "corrupt_support", support)
        m = self.b_true.shape[0]
        if support.size > self.beta * m + 1e-9:
            raise ValueError("corrupt support larger than beta * m")


@dataclass(frozen=True)
class DenseSystem:
    """A linear system A x = b, optionally with its planted ground truth."""

    A: np.ndarray
    b: np.ndarray
    ground_truth: GroundTruth | None = None

    def __post_init__(self):
        a = as_matrix(self.A)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "b", as_vector(self.b, a.shape[0]))
        gt = self.ground_truth
        if gt is not None:
            if gt.x_star.shape[0] != a.shape[1]:
                raise DimensionMismatchError("x_star length must equal n")
            if gt.b_true.shape[0] != a.shape[0]:
                raise DimensionMismatchError("b_true length must equal m")
            # off-support entries of b - b_true must be exactly zero
            diff = self.b - gt.b_true
            mask = np.ones(a.shape[0], dtype=bool)
            mask[gt.corrupt_support] = False
            if np.any(diff[mask] != 0.0):
                raise ValueError("b differs from b_true outside the corrupt support")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def sq_error(self, x: np.ndarray) -> float:
        """Squared distance to the planted solution."""
        if self.ground_truth is None:
            raise ValueError("system has no ground truth")
        e = np.asarray(x, dtype=np.float64) - self.ground_truth.x_star
        return float(e @ e)


@dataclass(frozen=True)
class Origin:
    """Start from the zero vector."""


@dataclass(frozen=True)
class OnHyperplane:
    """Start from (b_i/||a_i||^2) a_i so the i-th equation holds exactly.

    ``row=None`` picks the row uniformly at random from the solver's stream.
    """

    row: int | None = None


X0Policy = Origin | OnHyperplane


@dataclass(frozen=True)
class StopRule:
    """Optional early-stopping thresholds checked every iteration.

    ``target_sq_error`` needs ground truth; ``residual_norm`` compares the
    Euclidean norm of the normalized-residual vector.
    """

    target_sq_error: float | None = None
    residual_norm: float | None = None


@dataclass(frozen=True)
class SolverConfig:
    selector: SelectorKind
    max_iters: int
    seed: int = 0
    x0: X0Policy = field(default_factory=Origin)
    stop: StopRule | None = None

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")


@dataclass(frozen=True)
class TraceRecord:
    """State captured at one recorded iteration.

    ``row`` and the thresholds are None for the initial-iterate record and
    for strategies that do not use them; ``sq_error`` is None without ground
    truth.
    """

    iteration: int
    row: int | None
    q0_value: float | None
    q1_value: float | None
    sq_error: float | None
    residual_norm: float | None


@dataclass(frozen=True)
class SolveTrace:
    records: tuple[TraceRecord, ...]
    final_x: np.ndarray
    iterations: int
    termination: str
    seed: int


def step(
    system: DenseSystem,
    x: np.ndarray,
    kind: SelectorKind,
    rng: np.random.Generator,
) -> tuple[np.ndarray, TraceRecord]:
    """One projection step from x. Stateless; recomputes row norms.

    ``solve`` is the optimized loop; use this for single steps and tests.
    """
    a, b = system.A, system.b
    x = as_vector(x, a.shape[1])
    norms, _ = row_norms(a)
    bad = np.nonzero(norms < ZERO_ROW_TOL)[0]
    if bad.size:
        raise ZeroRowError(index=int(bad[0]), norm=float(norms[bad[0]]))
    nres = np.abs(a @ x - b) / norms
    i, low, high = select_row(kind, nres, norms * norms, rng)
    x_next = x + ((b[i] - a[i] @ x) / (norms[i] * norms[i])) * a[i]
    record = TraceRecord(
        iteration=-1,
        row=i,
        q0_value=low,
        q1_value=high,
        sq_error=system.sq_error(x_next) if system.ground_truth is not None else None,
        residual_norm=float(np.linalg.norm(nres)),
    )
    return x_next, record


def solve(
    system: DenseSystem,
    config: SolverConfig,
    record_every: int = 1,
    record: bool = True,
) -> SolveTrace:
    """Run up to ``max_iters`` projection steps and collect a trace.

    Records iteration 0 (the initial iterate) and every ``record_every``-th
    iteration plus the final one. Deterministic given (system, config):
    every random selector consumes exactly one uniform per iteration, so the
    stream does not depend on what is recorded.

    Recoverable selection failures (an empty admissible set) terminate the
    solve and are reported in ``termination``; precondition violations such
    as zero rows raise.
    """
    a, b = system.A, system.b
    m, n = a.shape
    if record_every < 1:
        raise ValueError("record_every must be >= 1")

    norms, _ = row_norms(a)
    bad = np.nonzero(norms < ZERO_ROW_TOL)[0]
    if bad.size:
        raise ZeroRowError(index=int(bad[0]), norm=float(norms[bad[0]]))
    inv_norms = 1.0 / norms
    sq_norms = norms * norms

    kind = config.selector
    if isinstance(kind, RQRK):
        kind.validate_for(m)

    gt = system.ground_truth
    stop = config.stop
    if stop is not None and stop.target_sq_error is not None and gt is None:
        raise ValueError("target_sq_error stop rule needs ground truth")

    rng = np.random.Generator(np.random.PCG64(config.seed))

    if isinstance(config.x0, OnHyperplane):
        row0 = config.x0.row if config.x0.row is not None else int(rng.integers(m))
        if not 0 <= row0 < m:
            raise DimensionMismatchError(f"x0 row {row0} outside [0, {m})")
        x = (b[row0] / sq_norms[row0]) * a[row0]
    else:
        x = np.zeros(n)

    is_rk = isinstance(kind, RK)
    is_motzkin = isinstance(kind, Motzkin)
    # RK does not need residuals to pick a row; compute them only when a
    # trace record or a residual-based stop rule demands it.
    res_every_iter = (not is_rk) or (stop is not None and stop.residual_norm is not None)
    rk_cum = np.cumsum(sq_norms) if is_rk else None

    records: list[TraceRecord] = []
    sq_err = system.sq_error(x) if gt is not None else None

    def residual_norm_at(xv: np.ndarray) -> float:
        return float(np.linalg.norm(np.abs(a @ xv - b) * inv_norms))

    if record:
        records.append(TraceRecord(0, None, None, None, sq_err, residual_norm_at(x)))

    termination = "max_iters"
    iterations = 0

    if stop is not None and stop.target_sq_error is not None and sq_err is not None \
            and sq_err <= stop.target_sq_error:
        termination = "target_sq_error"
    else:
        for k in range(1, config.max_iters + 1):
            will_record = record and (k % record_every == 0 or k == config.max_iters)
            r = None
            nres = None
            res_norm = None
            if res_every_iter or will_record:
                r = a @ x - b
                nres = np.abs(r) * inv_norms
                res_norm = float(np.linalg.norm(nres))

            if stop is not None and stop.residual_norm is not None \
                    and res_norm is not None and res_norm <= stop.residual_norm:
                termination = "residual_norm"
                break

            low = high = None
            if is_rk:
                u = rng.random() * rk_cum[-1]
                i = min(int(np.searchsorted(rk_cum, u, side="right")), m - 1)
            elif is_motzkin:
                i = int(np.argmax(nres))
            else:
                try:
                    i, low, high = select_row(kind, nres, sq_norms, rng)
                except (EmptyAdmissibleSetError, InvalidQuantilesError) as exc:
                    termination = f"error: {exc}"
                    break

            if r is not None:
                x = x - (r[i] / sq_norms[i]) * a[i]
            else:
                x = x + ((b[i] - a[i] @ x) / sq_norms[i]) * a[i]
            iterations = k

            if gt is not None:
                sq_err = system.sq_error(x)

            reached_target = (
                stop is not None
                and stop.target_sq_error is not None
                and sq_err is not None
                and sq_err <= stop.target_sq_error
            )
            if record and (will_record or reached_target):
                records.append(TraceRecord(k, i, low, high, sq_err, residual_norm_at(x)))
            if reached_target:
                termination = "target_sq_error"
                break

    # terminations that break before stepping can leave the last iterate
    # unrecorded; close the trace so it always ends at final_x
    if record and records[-1].iteration != iterations:
        records.append(TraceRecord(iterations, None, None, None,
                                   system.sq_error(x) if gt is not None else None,
                                   residual_norm_at(x)))

    return SolveTrace(
        records=tuple(records),
        final_x=x,
        iterations=iterations,
        termination=termination,
        seed=config.seed,
    )

import os
from pathlib import Path

import pytest

# SuiteSparse matrices are user-supplied; tests needing them skip when absent.
DATA_DIR = Path(os.environ.get("QUANTILE_KACZMARZ_DATA",
                               Path(__file__).resolve().parent.parent / "data"))


def require_matrix(name: str) -> Path:
    path = DATA_DIR / name
    if not path.exists():
        pytest.skip(
            f"{name} not found under {DATA_DIR}; download it from the SuiteSparse "
            "collection (Matrix Market format) to run this golden-value test"
        )
    return path

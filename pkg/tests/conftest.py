import sys
from pathlib import Path

import pytest

# Allow `from oracles import ...` inside the test modules.
sys.path.insert(0, str(Path(__file__).resolve().parent))

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR

import json
from pathlib import Path

import pytest

from tetraopt import MIXER_BOUNDS
from tetraopt.optimizer import SearchGrid

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def mixer_grid() -> SearchGrid:
    """The default mixer grid: 5 points per dimension over the parameter box."""
    return SearchGrid([(lo, hi, 5) for lo, hi in MIXER_BOUNDS])


@pytest.fixture(scope="session")
def mixer_grid_min() -> dict:
    """Frozen exhaustive-sweep optimum of the mixer surrogate on the 5^4 grid."""
    with open(DATA_DIR / "mixer_grid_min.json") as fh:
        return json.load(fh)

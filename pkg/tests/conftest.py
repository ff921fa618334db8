import json
from pathlib import Path

import numpy as np
import pytest

from skeincat.cli_io import catalog

DATA = Path(__file__).parent / "data"
CATALOG = ("vec", "vec_z2", "rep_z2", "fib", "ising")
BRAIDED = ("rep_z2", "fib", "ising")


@pytest.fixture(scope="session")
def cat():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = catalog(name)
        return cache[name]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def z3_document():
    return json.loads((DATA / "z3_pivotal.json").read_text())

import json

import numpy as np
import pytest

from gaussrate.channel import canonical_form
from gaussrate.gaussian import GaussianUnitary
from gaussrate.symplectic import random_symplectic

# One representative (tau, nbar) per canonical class.
CLASS_POINTS = [
    ("A1", 0.0, 1.0),
    ("A2", 0.0, 0.5),
    ("B1", 1.0, 0.0),
    ("B2", 1.0, 2.0),
    ("B2Id", 1.0, 0.0),
    ("CAtt", 0.3, 1.0),
    ("CAmp", 1.7, 0.5),
    ("D", -0.5, 3.0),
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_unitary(rng):
    """Factory for random one-mode Gaussian unitaries up to a squeezing cap."""

    def make(max_squeeze_db=20.0):
        return GaussianUnitary(random_symplectic(rng, max_squeeze_db), rng.normal(size=2))

    return make


@pytest.fixture
def canonical_channel():
    def make(label, tau, nbar):
        return canonical_form(label, tau, nbar).to_channel()

    return make


@pytest.fixture
def write_doc(tmp_path):
    """Write a mapping to a JSON file under tmp_path and return its path."""

    def write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    return write


def close(actual, expected, rel=1e-8):
    """Max-entry difference relative to the size of ``expected``."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = max(1.0, float(np.max(np.abs(expected))))
    return float(np.max(np.abs(actual - expected))) <= rel * scale

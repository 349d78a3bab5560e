"""Pytest configuration and shared fixtures"""

import os
import tempfile

import numpy as np
import pytest
import yaml

from qdpulse.core.dynamics import SimConfig
from qdpulse.core.model import ModelParams, build_jw_operators
from qdpulse.pulses.base import PulseShape, PulseSpec


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long physics runs (deselect with -m 'not slow')")


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files"""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield tmpdir


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def params():
    """Default parameters: J' = 200, J = 400, gamma = 10 micro-eV"""
    return ModelParams.defaults()


@pytest.fixture
def ops():
    return build_jw_operators()


@pytest.fixture
def h_pulse(params):
    """Square pulse at the H point (9, 0.035)"""
    return PulseSpec.from_ratios(PulseShape.SQUARE, 9.0, 0.035, params.gamma)


@pytest.fixture
def short_config(params, h_pulse):
    """H-point run long enough to finish the pulse"""
    return SimConfig(params=params, pulse=h_pulse, theta_max=0.6, record_every=5)


def make_density(rng, dim=16, rank=None):
    """Random density matrix of the given rank"""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def make_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def random_density(rng):
    return make_density(rng)


@pytest.fixture
def write_config(temp_dir):
    """Write a config document and return its path"""

    def _write(data, name="config.yaml"):
        path = os.path.join(temp_dir, name)
        with open(path, "w") as f:
            yaml.dump(data, f)
        return path

    return _write


@pytest.fixture
def fast_document(temp_dir):
    """Config document for short end-to-end runs"""
    return {
        "dynamics": {"theta_max_over_2pi": 0.1, "record_every": 20},
        "sweep": {
            "gamma0_over_gamma": [5.0, 9.0],
            "width_over_2pi": [0.035],
            "workers": 1,
        },
        "study": {"n_seeds": 1},
        "output_dir": os.path.join(temp_dir, "run"),
    }

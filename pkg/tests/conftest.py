import math

import numpy as np
import pytest

from quasisep import model
from quasisep.fock import StateVector, canonical_phase, distance


def random_params(rng, bound=5.0):
    """Random detuning and coupling with |delta|, |kappa| <= bound."""
    delta = rng.uniform(-bound, bound)
    kappa = rng.uniform(0.05, bound) * np.exp(1j * rng.uniform(0, 2 * math.pi))
    omega_b = rng.uniform(0.5, 3.0)
    return model.JCParams(omega_b + delta, omega_b, kappa)


def random_state(rng, modes, kets=None):
    kets = kets if kets is not None else StateVector(tuple(modes)).basis()
    vec = rng.standard_normal(len(kets)) + 1j * rng.standard_normal(len(kets))
    vec /= np.linalg.norm(vec)
    return StateVector(tuple(modes), dict(zip(kets, vec)))


def same_ray(a, b):
    """Distance between canonical representatives of two nonzero states."""
    return distance(canonical_phase(a.normalize()), canonical_phase(b.normalize()))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def resonant():
    return model.JCParams.resonant()


ACCEPTANCE_RESULTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[key])

import math

import numpy as np
import pytest
from hypothesis import strategies as st

from stokes_squeeze.fock import StateEnsemble, TwoModeFockState, mode_operators
from stokes_squeeze.polarization import PoincareVector, jones_from_angles
from stokes_squeeze.states import build_state

angles_theta = st.floats(0.0, math.pi, allow_nan=False)
angles_phi = st.floats(0.0, 2 * math.pi, allow_nan=False, exclude_max=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_polarized(rng, kind=None):
    """A random polarized state with its mode and construction parameters."""
    theta0, phi0 = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
    kind = kind or rng.choice(["fock", "coherent", "qubit01", "custom-single-mode"])
    if kind == "fock":
        params = {"n": int(rng.integers(0, 7))}
    elif kind == "coherent":
        params = {"alpha": complex(*rng.normal(size=2))}
    elif kind == "qubit01":
        c1 = rng.uniform(0, 1)
        params = {"c0": np.sqrt(1 - c1**2), "c1": c1 * np.exp(1j * rng.uniform(0, 2 * np.pi))}
    else:
        params = {"amplitudes": list(rng.normal(size=5) + 1j * rng.normal(size=5))}
    ens = build_state(kind, theta0, phi0, **params)
    return ens, jones_from_angles(theta0, phi0)


def random_two_mode(rng, cutoff=8, n_max=4, members=1):
    """Random ensemble of states supported on n_a + n_b <= n_max, x/y labels."""
    grid = np.add.outer(np.arange(cutoff + 1), np.arange(cutoff + 1))
    out = []
    for _ in range(members):
        amps = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        amps[grid > n_max] = 0
        out.append((rng.uniform(0.1, 1), TwoModeFockState.from_amplitudes(amps)))
    return StateEnsemble.mixture(out)


def dense_polarized_xy(vec, eps, cutoff):
    """x/y amplitudes of sum_n c_n (a_eps^dag)^n / sqrt(n!) |0>, by dense matrix powers."""
    a, b = mode_operators(cutoff)
    ex, ey = eps.as_array()
    create = ex * a.conj().T + ey * b.conj().T
    vac = np.zeros((cutoff + 1) ** 2, dtype=complex)
    vac[0] = 1
    out = np.zeros_like(vac)
    term = vac
    for n, c in enumerate(vec):
        out += c * term / math.sqrt(math.factorial(n))
        term = create @ term
    return out.reshape(cutoff + 1, cutoff + 1)


def dense_expectation(amps, op):
    v = np.asarray(amps).ravel()
    return complex(v.conj() @ op @ v)


def direction_at(m, big_phi, spin=0.3):
    """Unit vector at angle big_phi from m, turned by spin about m."""
    m = np.asarray(m, float)
    a = np.array([1.0, 0, 0]) if abs(m[0]) < 0.9 else np.array([0, 1.0, 0])
    u = a - (a @ m) * m
    u /= np.linalg.norm(u)
    t = math.cos(spin) * u + math.sin(spin) * np.cross(m, u)
    return PoincareVector.from_array(math.cos(big_phi) * m + math.sin(big_phi) * t)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.VERDICTS:
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokes_squeeze.criteria import mode_number_moments
from stokes_squeeze.errors import SpecError
from stokes_squeeze.fock import StateEnsemble, TwoModeFockState, total_number_grid
from stokes_squeeze.polarization import (
    PoincareVector,
    PolarizationVector,
    cos_big_phi,
    cos_big_phi_from_angles,
    direction_from_angles,
    jones_from_angles,
    jones_pair,
    parse_angle,
    poincare_from_jones,
)
from stokes_squeeze.states import build_state
from stokes_squeeze.stokes import (
    apply_jones,
    mode_transform,
    stokes_along,
    stokes_moments,
    stokes_operator_matrices,
    to_xy,
    transform_labels,
)

from conftest import angles_phi, angles_theta, dense_expectation, random_polarized, random_two_mode

R2 = 1 / math.sqrt(2)


def close(pv, expected, tol=1e-12):
    np.testing.assert_allclose(pv.as_array(), expected, atol=tol)


@pytest.mark.parametrize("args, expected", [
    ((0.0, 1.234), [1, 0]),
    ((math.pi / 2, math.pi / 2), [R2, 1j * R2]),
    ((math.pi / 2, 0.0), [R2, R2]),
])
def test_jones_from_angles(args, expected):
    close(jones_from_angles(*args), expected)


@pytest.mark.parametrize("jones, expected", [
    ((1, 0), [1, 0, 0]),
    ((R2, 1j * R2), [0, 0, 1]),
    ((R2, R2), [0, 1, 0]),
])
def test_poincare_from_jones(jones, expected):
    close(poincare_from_jones(PolarizationVector(*jones)), expected)


@pytest.mark.parametrize("args, expected", [
    ((0, 0), [1, 0, 0]),
    ((math.pi / 2, math.pi / 2), [0, 0, 1]),
    ((math.pi / 3, math.pi / 4), [0.5, math.sqrt(6) / 4, math.sqrt(6) / 4]),
])
def test_direction_from_angles(args, expected):
    close(direction_from_angles(*args), expected)


def test_cos_big_phi_examples():
    m = direction_from_angles(0.7, 2.1)
    assert cos_big_phi(m, m) == pytest.approx(1.0, abs=1e-15)
    assert cos_big_phi(direction_from_angles(0.7 + math.pi / 2, 2.1), m) == pytest.approx(0.0, abs=1e-15)
    assert cos_big_phi(PoincareVector(0, 0, 1), PoincareVector(1, 0, 0)) == 0.0


@settings(max_examples=200)
@given(angles_theta, angles_phi, angles_theta, angles_phi)
def test_cos_big_phi_matches_angle_formula(t0, p0, t, p):
    n, m = direction_from_angles(t, p), direction_from_angles(t0, p0)
    assert abs(cos_big_phi(n, m) - cos_big_phi_from_angles(t0, p0, t, p)) <= 1e-12


@settings(max_examples=200)
@given(angles_theta, angles_phi)
def test_jones_geometry(t0, p0):
    eps, perp = jones_pair(t0, p0)
    close(eps, jones_from_angles(t0, p0).as_array())
    assert eps.is_unit() and perp.is_unit()
    assert abs(np.vdot(eps.as_array(), perp.as_array())) <= 1e-12
    close(perp, [-math.sin(t0 / 2), math.cos(t0 / 2) * np.exp(1j * p0)])
    # generic partner: orthonormal, and the same vector away from the poles
    other = eps.orthogonal()
    assert abs(np.vdot(eps.as_array(), other.as_array())) <= 1e-12 and other.is_unit()
    if 1e-6 < t0 < math.pi - 1e-6:
        close(other, perp.as_array(), tol=1e-9)
    m = poincare_from_jones(eps)
    close(m, direction_from_angles(t0, p0).as_array())
    close(poincare_from_jones(perp), -m.as_array())


def test_angles_round_trip():
    eps = jones_from_angles(2.0, 5.0)
    assert eps.angles() == pytest.approx((2.0, 5.0))


def test_parse_angle():
    assert parse_angle("45deg") == pytest.approx(math.pi / 4)
    assert parse_angle("0.5rad") == 0.5
    assert parse_angle("1.25") == 1.25
    with pytest.raises(SpecError):
        parse_angle("north")


# Stokes moments

def test_stokes_moments_number_state():
    mom = stokes_moments(StateEnsemble.pure(TwoModeFockState.basis(2, 0, 6)))
    assert mom.s0 == pytest.approx(2)
    np.testing.assert_allclose(mom.s, [2, 0, 0], atol=1e-12)
    np.testing.assert_allclose(mom.s2, [4, 2, 2], atol=1e-12)
    np.testing.assert_allclose(mom.anti, [0, 0, 0], atol=1e-12)


def test_stokes_moments_vacuum():
    mom = stokes_moments(StateEnsemble.pure(TwoModeFockState.basis(0, 0, 4)))
    assert mom.s0 == 0
    assert np.all(mom.s == 0) and np.all(mom.s2 == 0) and np.all(mom.anti == 0)
    assert mom.mean_direction() is None
    assert stokes_along(mom, direction_from_angles(1.0, 2.0)) == (0.0, 0.0)


def test_circular_coherent():
    mom = stokes_moments(build_state("coherent", math.pi / 2, math.pi / 2, alpha=1.0))
    assert mom.s0 == pytest.approx(1, abs=1e-9)
    np.testing.assert_allclose(mom.s, [0, 0, 1], atol=1e-9)


def test_stokes_along_examples():
    mom = stokes_moments(StateEnsemble.pure(TwoModeFockState.basis(2, 0, 6)))
    assert stokes_along(mom, PoincareVector(1, 0, 0)) == pytest.approx((2, 0), abs=1e-12)
    assert stokes_along(mom, PoincareVector(0, 0, 1)) == pytest.approx((0, 2), abs=1e-12)


def dense_stokes(state):
    """Stokes moments of a state by explicit x/y operator matrices."""
    xy = to_xy(state)
    ops = stokes_operator_matrices(xy.cutoff)
    amps = xy.amplitudes
    s = np.array([dense_expectation(amps, ops[j]).real for j in range(1, 4)])
    second = np.array([[dense_expectation(amps, ops[j] @ ops[k]).real for k in range(1, 4)] for j in range(1, 4)])
    return dense_expectation(amps, ops[0]).real, s, second


def test_stokes_moments_match_dense_operators(rng):
    for _ in range(10):
        ens = random_two_mode(rng, cutoff=7, n_max=3)
        mom = stokes_moments(ens)
        s0, s, second = dense_stokes(ens.states[0])
        assert mom.s0 == pytest.approx(s0, abs=1e-12)
        np.testing.assert_allclose(mom.s, s, atol=1e-12)
        # symmetrized products
        np.testing.assert_allclose(mom.second_moments(), (second + second.T) / 2, atol=1e-11)


def test_stokes_moments_in_rotated_labels(rng):
    ens, eps = random_polarized(rng, "custom-single-mode")
    mom = stokes_moments(ens)
    s0, s, second = dense_stokes(ens.states[0])
    np.testing.assert_allclose(mom.s, s, atol=1e-11)
    np.testing.assert_allclose(mom.second_moments(), (second + second.T) / 2, atol=1e-10)


def polarized_closed_form(ens, eps):
    n_mean, fact = mode_number_moments(ens, eps)
    m = poincare_from_jones(eps).as_array()
    s = m * n_mean
    s2 = n_mean + m**2 * fact
    anti = np.array([2 * m[0] * m[1], 2 * m[1] * m[2], 2 * m[2] * m[0]]) * fact
    return n_mean, s, s2, anti


def test_polarized_moment_formulas(rng):
    for _ in range(40):
        ens, eps = random_polarized(rng)
        mom = stokes_moments(ens)
        n_mean, s, s2, anti = polarized_closed_form(ens, eps)
        assert mom.s0 == pytest.approx(n_mean, abs=1e-10)
        np.testing.assert_allclose(mom.s, s, atol=1e-10 * max(1, n_mean))
        np.testing.assert_allclose(mom.s2, s2, atol=1e-10 * max(1, n_mean**2))
        np.testing.assert_allclose(mom.anti, anti, atol=1e-10 * max(1, n_mean**2))


def test_commutators_on_safe_band():
    cutoff = 8
    ops = stokes_operator_matrices(cutoff)
    keep = total_number_grid(cutoff).ravel() <= cutoff - 2
    for j, k, l in [(1, 2, 3), (2, 3, 1), (3, 1, 2)]:
        comm = ops[j] @ ops[k] - ops[k] @ ops[j]
        diff = (comm - 2j * ops[l])[:, keep]
        assert np.abs(diff).max() <= 1e-12
    for j in range(1, 4):
        assert np.abs((ops[0] @ ops[j] - ops[j] @ ops[0])[:, keep]).max() <= 1e-12


def test_uncertainty_relations(rng):
    for _ in range(60):
        ens = random_two_mode(rng, cutoff=8, n_max=4, members=int(rng.integers(1, 4)))
        mom = stokes_moments(ens)
        v = mom.variances
        for j, k, l in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
            assert v[j] * v[k] >= mom.s[l] ** 2 - 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * math.pi))
def test_global_phase_invariance(seed, phase):
    ens = random_two_mode(np.random.default_rng(seed))
    a = stokes_moments(ens)
    b = stokes_moments(ens.map(lambda s: s.global_phase(phase)))
    for x, y in [(a.s, b.s), (a.s2, b.s2), (a.anti, b.anti), (a.s0, b.s0)]:
        np.testing.assert_allclose(x, y, atol=1e-12)


# mode transforms

def test_transform_vacuum():
    vac = TwoModeFockState.basis(0, 0, 5)
    out = mode_transform(vac, jones_from_angles(1.1, 0.3))
    assert abs(out.amplitudes[0, 0]) == pytest.approx(1.0)


def test_transform_single_photon_to_diagonal():
    out = mode_transform(TwoModeFockState.basis(1, 0, 4), jones_from_angles(math.pi / 2, 0))
    expected = np.zeros((5, 5), dtype=complex)
    expected[1, 0], expected[0, 1] = R2, -R2
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)


def test_transform_rejects_non_unit():
    with pytest.raises(SpecError):
        mode_transform(TwoModeFockState.basis(1, 0, 4), PolarizationVector(1, 1))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), angles_theta, angles_phi)
def test_transform_round_trip(seed, t0, p0):
    state = random_two_mode(np.random.default_rng(seed), cutoff=6, n_max=6).states[0]
    there = mode_transform(state, jones_from_angles(t0, p0))
    back = transform_labels(there, state.labels)
    assert there.norm == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)


def test_transform_matches_dense_construction(rng):
    from conftest import dense_polarized_xy

    vec = rng.normal(size=5) + 1j * rng.normal(size=5)
    vec /= np.linalg.norm(vec)
    eps = jones_from_angles(*rng.uniform(0, 3, size=2))
    grid = np.zeros((9, 9), dtype=complex)
    grid[:5, 0] = vec
    state = TwoModeFockState(grid, (eps, eps.orthogonal()))
    np.testing.assert_allclose(to_xy(state).amplitudes, dense_polarized_xy(vec, eps, 8), atol=1e-12)


def test_jones_element_preserves_moments_under_identity(rng):
    state = random_two_mode(rng).states[0]
    out = apply_jones(state, np.eye(2))
    np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-14)

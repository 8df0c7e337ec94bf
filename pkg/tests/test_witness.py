import json
import math

import numpy as np
import pytest

from stokes_squeeze.criteria import scan, squeezing_function
from stokes_squeeze.errors import SpecError
from stokes_squeeze.fock import StateEnsemble, TwoModeFockState
from stokes_squeeze.polarization import direction_from_angles, jones_pair
from stokes_squeeze.states import build_state
from stokes_squeeze.witness import (
    CoherentMixture,
    load_coherent_mixture,
    mixture_to_ensemble,
    nonclassicality_flag,
    p_functional,
    parse_coherent_mixture,
    witness_value,
)

from conftest import direction_at


def random_mixture(rng, k=None, scale=1.2):
    k = k or int(rng.integers(1, 6))
    comps = [(rng.uniform(0.05, 1), complex(*rng.normal(0, scale, 2)), complex(*rng.normal(0, scale, 2)))
             for _ in range(k)]
    return CoherentMixture.from_components(comps)


def random_direction(rng):
    return direction_from_angles(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))


def test_single_component_along_n():
    # direction n = (1,0,0) keeps x/y as the rotated pair
    mix = CoherentMixture.from_components([(1, 1.3 - 0.4j, 0)])
    assert witness_value(mix, direction_from_angles(0, 0)) == pytest.approx(abs(1.3 - 0.4j) ** 2, abs=1e-12)


def test_polarized_coherent_matches_closed_form(rng):
    for _ in range(10):
        gamma = complex(*rng.normal(size=2))
        t0, p0 = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        mix = CoherentMixture.from_components([(1, gamma, 0)], jones_pair(t0, p0))
        m = direction_from_angles(t0, p0).as_array()
        big_phi = rng.uniform(0, math.pi)
        n = direction_at(m, big_phi)
        expected = abs(gamma) ** 2 * (1 - math.sin(big_phi))
        assert witness_value(mix, n) == pytest.approx(expected, abs=1e-9)
        ens = build_state("coherent", t0, p0, alpha=gamma)
        assert squeezing_function(ens, n) == pytest.approx(expected, abs=1e-9)


def test_identical_balanced_components():
    mix = CoherentMixture.from_components([(0.3, 0.8, 0.8), (0.7, 0.8, 0.8)])
    assert witness_value(mix, direction_from_angles(0, 0)) == pytest.approx(0, abs=1e-15)


def test_witness_nonnegative(rng):
    for _ in range(100):
        mix = random_mixture(rng)
        for _ in range(20):
            assert witness_value(mix, random_direction(rng)) >= -1e-12


def test_p_functional_matches_truncated_ensemble(rng):
    for _ in range(8):
        mix = random_mixture(rng, scale=0.8)
        ens = mixture_to_ensemble(mix)
        for _ in range(5):
            n = random_direction(rng)
            assert p_functional(mix, n) == pytest.approx(squeezing_function(ens, n), abs=1e-7)


def test_witness_bounds_f_and_matches_when_phases_agree(rng):
    for _ in range(20):
        mix = random_mixture(rng)
        n = random_direction(rng)
        assert witness_value(mix, n) <= p_functional(mix, n) + 1e-12
    # every component shares arg(conj(alpha) beta): the two functionals agree
    phase = np.exp(0.7j)
    comps = [(w, a, b * phase) for w, a, b in [(0.2, 1.0, 0.5), (0.5, 0.3, 1.4), (0.3, 2.0, 0.1)]]
    mix = CoherentMixture.from_components(comps)
    n = direction_from_angles(0, 0)
    assert witness_value(mix, n) == pytest.approx(p_functional(mix, n), abs=1e-12)
    ens = mixture_to_ensemble(mix)
    assert witness_value(mix, n) == pytest.approx(squeezing_function(ens, n), abs=1e-7)


def test_witness_below_f_for_incoherent_phases():
    mix = CoherentMixture.from_components([(0.5, 1, 1), (0.5, 1j, 1)])
    n = direction_from_angles(0, 0)
    assert witness_value(mix, n) < p_functional(mix, n) - 0.1


def test_flag_examples():
    fock = build_state("fock", 0.5, 1.0, n=5)
    flag, best = nonclassicality_flag(fock, scan(fock, (30, 30)))
    assert flag and best.f < 0
    assert best.f == min(r.f for r in scan(fock, (30, 30)))
    coherent = build_state("coherent", 0.5, 1.0, alpha=1.5)
    assert nonclassicality_flag(coherent, scan(coherent, (30, 30))) == (False, None)
    vac = StateEnsemble.pure(TwoModeFockState.basis(0, 0, 4))
    assert nonclassicality_flag(vac, scan(vac, (10, 10))) == (False, None)


def test_mixture_validation():
    with pytest.raises(SpecError):
        CoherentMixture([0.5, 0.4], [0, 0], [0, 0])
    with pytest.raises(SpecError):
        CoherentMixture([1.5, -0.5], [0, 0], [0, 0])
    with pytest.raises(SpecError):
        CoherentMixture([1.0], [0, 1], [0])


def test_mixture_json(tmp_path):
    obj = {"components": [{"w": 1, "alpha": [1, 0.5], "beta": [0, 0]}, {"w": 3, "alpha": 0.2, "beta": [0.1, -1]}],
           "basis": {"theta0": 0.4, "phi0": 1.0}}
    mix = parse_coherent_mixture(obj)
    assert mix.weights.tolist() == [0.25, 0.75]
    assert mix.alphas[0] == 1 + 0.5j and mix.betas[1] == 0.1 - 1j
    path = tmp_path / "mix.json"
    path.write_text(json.dumps(mix.to_dict()))
    again = load_coherent_mixture(path)
    np.testing.assert_allclose(again.field_vectors(), mix.field_vectors(), atol=1e-15)
    for bad in ({"components": []}, {"components": [{"w": -1}]}, {"components": [{"w": 1}], "basis": "lr"},
                {"components": [{"w": 1, "alpha": "x"}]}):
        with pytest.raises(SpecError):
            parse_coherent_mixture(bad)

"""Squeezing as a nonclassicality witness.

For a state with a non-negative Glauber-Sudarshan P function, here a finite
mixture of two-mode coherent states ``|alpha, beta>``, the squeezing
function ``f(n)`` is an average of non-negative terms over P, so
``f(n) >= 0`` everywhere.  Observing ``f(n) < 0`` therefore rules out any
non-negative P.

Two functionals of a mixture are provided, both evaluated with the
coherent amplitudes re-expressed in the rotated pair ``(eps_bar,
eps_bar_perp)`` tied to ``n``:

* :func:`witness_value`, the point-mass integrand
  ``{|a|^2 - |b|^2 - (<|a|^2> - <|b|^2>)}^2 + (|a| - |b|)^2``;
* :func:`p_functional`, which equals ``f(n)`` for every mixture.

They coincide when all components share the phase of ``conj(a) b`` (in
particular for polarized mixtures and single components); otherwise the
first is a lower bound of the second.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .criteria import SqueezingReport
from .errors import SpecError
from .fock import NORM_TOL, StateEnsemble, TwoModeFockState
from .polarization import X_POL, Y_POL, PoincareVector, PolarizationVector, jones_pair
from .measurement import basis_for_direction
from .states import coherent_amplitudes, coherent_cutoff, encode_complex, parse_complex


@dataclass(frozen=True, eq=False)
class CoherentMixture:
    """Point-mass P function: weights with coherent amplitudes in ``labels``."""

    weights: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    labels: tuple[PolarizationVector, PolarizationVector] = (X_POL, Y_POL)

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        a = np.atleast_1d(np.asarray(self.alphas, dtype=complex))
        b = np.atleast_1d(np.asarray(self.betas, dtype=complex))
        if not (w.shape == a.shape == b.shape) or w.ndim != 1 or w.size == 0:
            raise SpecError("weights, alphas and betas must be equal-length non-empty sequences")
        if np.any(w < 0):
            raise SpecError("P weights must be nonnegative")
        if abs(w.sum() - 1.0) > NORM_TOL:
            raise SpecError(f"P weights sum to {w.sum():.15g}, not 1")
        for name, v in (("weights", w), ("alphas", a), ("betas", b)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def from_components(cls, components, labels=(X_POL, Y_POL)) -> "CoherentMixture":
        """``components`` is an iterable of ``(weight, alpha, beta)``; weights are renormalized."""
        comps = list(components)
        w = np.array([c[0] for c in comps], dtype=float)
        if w.sum() <= 0:
            raise SpecError("P weights must have a positive sum")
        return cls(w / w.sum(), [c[1] for c in comps], [c[2] for c in comps], labels)

    def field_vectors(self) -> np.ndarray:
        """Classical Jones field ``alpha u + beta v`` of each component (rows, x/y)."""
        u, v = self.labels[0].as_array(), self.labels[1].as_array()
        return self.alphas[:, None] * u[None, :] + self.betas[:, None] * v[None, :]

    def rotated_amplitudes(self, n: PoincareVector) -> tuple[np.ndarray, np.ndarray]:
        eps_bar, eps_perp = basis_for_direction(n)
        fields = self.field_vectors()
        return fields @ eps_bar.as_array().conj(), fields @ eps_perp.as_array().conj()

    def to_dict(self) -> dict:
        th, ph = self.labels[0].angles()
        basis = "xy" if np.allclose(self.labels[0].as_array(), [1, 0]) else {"theta0": th, "phi0": ph}
        return {
            "components": [
                {"w": float(w), "alpha": encode_complex(a), "beta": encode_complex(b)}
                for w, a, b in zip(self.weights, self.alphas, self.betas)
            ],
            "basis": basis,
        }


def parse_coherent_mixture(obj, where: str = "$") -> CoherentMixture:
    if not isinstance(obj, dict):
        raise SpecError(f"{where}: coherent mixture must be a JSON object")
    comps = obj.get("components")
    if not isinstance(comps, list) or not comps:
        raise SpecError(f"{where}.components: expected a non-empty list")
    parsed = []
    for i, c in enumerate(comps):
        w = f"{where}.components[{i}]"
        if not isinstance(c, dict):
            raise SpecError(f"{w}: expected an object")
        weight = c.get("w")
        if isinstance(weight, bool) or not isinstance(weight, (int, float)) or weight < 0:
            raise SpecError(f"{w}.w: expected a nonnegative number, got {weight!r}")
        parsed.append((float(weight), parse_complex(c.get("alpha", 0.0), f"{w}.alpha"),
                       parse_complex(c.get("beta", 0.0), f"{w}.beta")))
    basis = obj.get("basis", "xy")
    if basis == "xy":
        labels = (X_POL, Y_POL)
    elif isinstance(basis, dict):
        try:
            labels = jones_pair(float(basis["theta0"]), float(basis["phi0"]))
        except (KeyError, TypeError, ValueError):
            raise SpecError(f"{where}.basis: expected \"xy\" or {{\"theta0\": r, \"phi0\": r}}") from None
    else:
        raise SpecError(f"{where}.basis: expected \"xy\" or {{\"theta0\": r, \"phi0\": r}}")
    return CoherentMixture.from_components(parsed, labels)


def load_coherent_mixture(path: str | Path) -> CoherentMixture:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_coherent_mixture(obj)


def witness_value(mix: CoherentMixture, n: PoincareVector) -> float:
    a, b = mix.rotated_amplitudes(n)
    ia, ib = np.abs(a) ** 2, np.abs(b) ** 2
    w = mix.weights
    centre = w @ ia - w @ ib
    return float(w @ ((ia - ib - centre) ** 2 + (np.abs(a) - np.abs(b)) ** 2))


def p_functional(mix: CoherentMixture, n: PoincareVector) -> float:
    """``f(n)`` of the mixture: ``Var_P(|a|^2-|b|^2) + <|a|^2> + <|b|^2> - 2|<conj(a) b>|``."""
    a, b = mix.rotated_amplitudes(n)
    ia, ib = np.abs(a) ** 2, np.abs(b) ** 2
    w = mix.weights
    d = ia - ib
    var = w @ d**2 - (w @ d) ** 2
    return float(var + w @ ia + w @ ib - 2 * abs(w @ (a.conj() * b)))


def mixture_to_ensemble(mix: CoherentMixture, cutoff: int | None = None) -> StateEnsemble:
    """Truncated Fock expansion of each coherent component."""
    if cutoff is None:
        cutoff = max(coherent_cutoff(np.sqrt(abs(a) ** 2 + abs(b) ** 2)) for a, b in zip(mix.alphas, mix.betas))
    members = []
    for w, a, b in zip(mix.weights, mix.alphas, mix.betas):
        grid = np.outer(coherent_amplitudes(a, cutoff), coherent_amplitudes(b, cutoff))
        members.append((w, TwoModeFockState.from_amplitudes(grid, mix.labels)))
    return StateEnsemble.mixture(members)


def nonclassicality_flag(ens: StateEnsemble, scan_result: list[SqueezingReport]) -> tuple[bool, SqueezingReport | None]:
    """True, with the most squeezed direction, if any scanned direction is squeezed.

    ``ens`` is the scanned ensemble; it is not re-evaluated.
    """
    squeezed = [r for r in scan_result if r.squeezed]
    if not squeezed:
        return False, None
    return True, min(squeezed, key=lambda r: r.f)

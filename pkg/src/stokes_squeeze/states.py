"""Constructors for polarized light and the polarized-state check.

A polarized state has every photon in one mode ``eps``; the orthogonal mode
is vacuum.  States are described by a small JSON document::

    {"schema": 1,
     "kind": "fock" | "coherent" | "qubit01" | "custom-single-mode"
             | "two-mode-custom" | "mixture",
     "params": {...},
     "polarization": {"theta0": 1.047, "phi0": 0.785},
     "cutoff": 30}

Complex numbers are written either as a plain number or as ``[re, im]``.

=====================  =============================================
kind                   params
=====================  =============================================
fock                   ``{"n": 5}``
coherent               ``{"alpha": [1.0, 0.5]}``
qubit01                ``{"c0": 0.632, "c1": 0.775}``
custom-single-mode     ``{"amplitudes": [c0, c1, ...]}``
two-mode-custom        ``{"amplitudes": [[c00, c01, ...], ...]}``
mixture                ``{"members": [{"weight": w, "state": {...}}]}``
=====================  =============================================

``two-mode-custom`` amplitudes are indexed ``[n_eps][n_eps_perp]``.
Mixture members are re-expressed in the mixture's own polarization modes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import NumericalSafetyError, SpecError
from .fock import DEFAULT_LEAKAGE_TOL, BAND_PER_ORDER, StateEnsemble, TwoModeFockState
from .polarization import PolarizationVector, jones_from_angles, jones_pair
from .stokes import annihilate_along, stokes_moments, transform_labels

SCHEMA_VERSION = 1
KINDS = ("fock", "coherent", "qubit01", "custom-single-mode", "two-mode-custom", "mixture")
POLARIZED_KINDS = ("fock", "coherent", "qubit01", "custom-single-mode")

# empty photon-number band kept above finite supports (second-order moments)
FINITE_HEADROOM = 2 * BAND_PER_ORDER
POLARIZED_TOL = 1e-10


@dataclass(frozen=True)
class StateSpec:
    kind: str
    params: dict = field(default_factory=dict)
    theta0: float = 0.0
    phi0: float = 0.0
    cutoff: int | None = None

    @property
    def eps(self) -> PolarizationVector:
        return jones_from_angles(self.theta0, self.phi0)

    @property
    def labels(self) -> tuple[PolarizationVector, PolarizationVector]:
        return jones_pair(self.theta0, self.phi0)

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "kind": self.kind,
            "params": self.params,
            "polarization": {"theta0": self.theta0, "phi0": self.phi0},
        }
        if self.cutoff is not None:
            out["cutoff"] = self.cutoff
        return out


def parse_complex(value: Any, where: str) -> complex:
    if isinstance(value, bool):
        raise SpecError(f"{where}: expected a number or [re, im], got {value!r}")
    if isinstance(value, (int, float, complex, np.number)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise SpecError(f"{where}: expected a number or [re, im], got {value!r}")


def encode_complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _number(obj: dict, key: str, where: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise SpecError(f"{where}: missing field {key!r}")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SpecError(f"{where}.{key}: expected a finite number, got {v!r}")
    return float(v)


def _params_for(kind: str, params: dict, where: str) -> dict:
    """Validate kind-specific parameters; return them unchanged."""
    if kind == "fock":
        n = params.get("n")
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise SpecError(f"{where}.n: expected a nonnegative integer, got {n!r}")
    elif kind == "coherent":
        if "alpha" not in params:
            raise SpecError(f"{where}: missing field 'alpha'")
        parse_complex(params["alpha"], f"{where}.alpha")
    elif kind == "qubit01":
        for key in ("c0", "c1"):
            parse_complex(params.get(key, 0.0), f"{where}.{key}")
    elif kind == "custom-single-mode":
        amps = params.get("amplitudes")
        if not isinstance(amps, list) or not amps:
            raise SpecError(f"{where}.amplitudes: expected a non-empty list")
        for i, a in enumerate(amps):
            parse_complex(a, f"{where}.amplitudes[{i}]")
    elif kind == "two-mode-custom":
        rows = params.get("amplitudes")
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise SpecError(f"{where}.amplitudes: expected a non-empty list of lists")
        for i, row in enumerate(rows):
            for j, a in enumerate(row):
                parse_complex(a, f"{where}.amplitudes[{i}][{j}]")
    elif kind == "mixture":
        members = params.get("members")
        if not isinstance(members, list) or not members:
            raise SpecError(f"{where}.members: expected a non-empty list")
        for i, m in enumerate(members):
            w = f"{where}.members[{i}]"
            if not isinstance(m, dict):
                raise SpecError(f"{w}: expected an object")
            if _number(m, "weight", w) < 0:
                raise SpecError(f"{w}.weight: must be nonnegative")
            if "state" not in m:
                raise SpecError(f"{w}: missing field 'state'")
            parse_state_spec(m["state"], f"{w}.state")
    return params


def parse_state_spec(obj: Any, where: str = "$") -> StateSpec:
    if not isinstance(obj, dict):
        raise SpecError(f"{where}: state spec must be a JSON object")
    schema = obj.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise SpecError(f"{where}.schema: unsupported version {schema!r} (expected {SCHEMA_VERSION})")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise SpecError(f"{where}.kind: expected one of {', '.join(KINDS)}, got {kind!r}")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise SpecError(f"{where}.params: expected an object")
    _params_for(kind, params, f"{where}.params")
    pol = obj.get("polarization", {})
    if not isinstance(pol, dict):
        raise SpecError(f"{where}.polarization: expected an object")
    theta0 = _number(pol, "theta0", f"{where}.polarization", 0.0)
    phi0 = _number(pol, "phi0", f"{where}.polarization", 0.0)
    cutoff = obj.get("cutoff")
    if cutoff is not None and (isinstance(cutoff, bool) or not isinstance(cutoff, int) or cutoff < 0):
        raise SpecError(f"{where}.cutoff: expected a nonnegative integer, got {cutoff!r}")
    return StateSpec(kind, params, theta0, phi0, cutoff)


def load_state_spec(path: str | Path) -> StateSpec:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_state_spec(obj)


def coherent_cutoff(alpha: complex) -> int:
    r = abs(alpha)
    return max(20, math.ceil(r**2 + 8 * r + 10))


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Fock amplitudes ``exp(-|a|^2/2) a^n / sqrt(n!)`` for n = 0..cutoff."""
    amps = np.empty(cutoff + 1, dtype=complex)
    amps[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, cutoff + 1):
        amps[n] = amps[n - 1] * alpha / np.sqrt(n)
    return amps


def coherent_leakage(alpha: complex, cutoff: int) -> float:
    """Poisson mass outside ``n <= cutoff - FINITE_HEADROOM``."""
    keep = cutoff - FINITE_HEADROOM
    if keep < 0:
        return 1.0
    return max(0.0, 1.0 - float(np.sum(np.abs(coherent_amplitudes(alpha, keep)) ** 2)))


def required_coherent_cutoff(alpha: complex, tol: float = DEFAULT_LEAKAGE_TOL) -> int:
    cutoff = FINITE_HEADROOM
    while coherent_leakage(alpha, cutoff) > tol:
        cutoff += 1
    return cutoff


def _single_mode_state(vec: np.ndarray, cutoff: int | None, labels) -> TwoModeFockState:
    vec = np.asarray(vec, dtype=complex)
    support = np.nonzero(np.abs(vec) > 0)[0]
    if support.size == 0:
        raise SpecError("amplitudes are all zero")
    needed = int(support.max())
    if cutoff is None:
        cutoff = needed + FINITE_HEADROOM
    if cutoff < needed:
        raise SpecError(f"cutoff {cutoff} is below the state's photon-number support {needed}")
    grid = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    grid[: needed + 1, 0] = vec[: needed + 1]
    return TwoModeFockState.from_amplitudes(grid, labels)


def _build_pure(spec: StateSpec, labels) -> TwoModeFockState:
    p = spec.params
    if spec.kind == "fock":
        vec = np.zeros(p["n"] + 1, dtype=complex)
        vec[-1] = 1.0
        return _single_mode_state(vec, spec.cutoff, labels)
    if spec.kind == "coherent":
        alpha = parse_complex(p["alpha"], "alpha")
        cutoff = spec.cutoff if spec.cutoff is not None else coherent_cutoff(alpha)
        leak = coherent_leakage(alpha, cutoff)
        if leak > DEFAULT_LEAKAGE_TOL:
            raise NumericalSafetyError(
                f"coherent alpha={alpha} at cutoff {cutoff} leaks {leak:.3g}; "
                f"use cutoff >= {required_coherent_cutoff(alpha)}"
            )
        grid = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        grid[:, 0] = coherent_amplitudes(alpha, cutoff)
        return TwoModeFockState.from_amplitudes(grid, labels)
    if spec.kind == "qubit01":
        vec = [parse_complex(p.get("c0", 0.0), "c0"), parse_complex(p.get("c1", 0.0), "c1")]
        return _single_mode_state(vec, spec.cutoff, labels)
    if spec.kind == "custom-single-mode":
        vec = [parse_complex(a, "amplitudes") for a in p["amplitudes"]]
        return _single_mode_state(vec, spec.cutoff, labels)
    if spec.kind == "two-mode-custom":
        rows = p["amplitudes"]
        na = len(rows)
        nb = max(len(r) for r in rows)
        given = np.zeros((na, nb), dtype=complex)
        for i, row in enumerate(rows):
            for j, a in enumerate(row):
                given[i, j] = parse_complex(a, "amplitudes")
        nz = np.argwhere(np.abs(given) > 0)
        if nz.size == 0:
            raise SpecError("amplitudes are all zero")
        needed = int(nz.sum(axis=1).max())
        cutoff = spec.cutoff if spec.cutoff is not None else needed + FINITE_HEADROOM
        if cutoff < nz.max():
            raise SpecError(f"cutoff {cutoff} is below the state's photon-number support")
        grid = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        ka, kb = min(na, cutoff + 1), min(nb, cutoff + 1)
        grid[:ka, :kb] = given[:ka, :kb]
        return TwoModeFockState.from_amplitudes(grid, labels)
    raise SpecError(f"kind {spec.kind!r} is not a pure-state kind")


def build(spec: StateSpec) -> StateEnsemble:
    """Construct the ensemble described by ``spec``, labelled ``(eps, eps_perp)``."""
    labels = spec.labels
    if spec.kind != "mixture":
        return StateEnsemble.pure(_build_pure(spec, labels))

    members = []
    for m in spec.params["members"]:
        sub = build(parse_state_spec(m["state"]))
        for w, st in sub.members:
            members.append((float(m["weight"]) * w, st))
    cutoff = spec.cutoff if spec.cutoff is not None else max(st.cutoff for _, st in members)
    aligned = []
    for w, st in members:
        st = st.with_cutoff(max(cutoff, st.cutoff))
        st = transform_labels(st, labels).with_cutoff(cutoff)
        aligned.append((w, st))
    return StateEnsemble.mixture(aligned)


def build_state(kind: str, theta0: float = 0.0, phi0: float = 0.0, cutoff: int | None = None, **params) -> StateEnsemble:
    """Keyword shortcut: ``build_state("fock", n=5, theta0=pi/3)``."""
    return build(parse_state_spec({"kind": kind, "params": params,
                                   "polarization": {"theta0": theta0, "phi0": phi0},
                                   "cutoff": cutoff}))


def verify_polarized(ens: StateEnsemble, eps: PolarizationVector) -> float:
    """Largest ``||a_{eps_perp} |psi>||`` over ensemble members (0 for polarized light)."""
    perp = eps.orthogonal()
    return max(float(np.linalg.norm(annihilate_along(st, perp))) for st in ens.states)


def is_polarized(ens: StateEnsemble, eps: PolarizationVector, tol: float = POLARIZED_TOL) -> bool:
    return verify_polarized(ens, eps) <= tol


def polarization_mode(ens: StateEnsemble) -> PolarizationVector | None:
    """Jones vector along the mean Stokes vector, or None when ``<S>`` vanishes."""
    m = stokes_moments(ens).mean_direction()
    return None if m is None else jones_from_angles(*m.angles())

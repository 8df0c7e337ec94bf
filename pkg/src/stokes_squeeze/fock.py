"""Truncated two-mode Fock space.

A state is a complex grid ``c[n_a, n_b]`` with both photon numbers in
``[0, cutoff]``.  The two indices refer to a pair of orthogonal polarization
modes recorded in ``labels`` (x/y linear polarization unless stated
otherwise).  Moments are evaluated by applying annihilation operators to
the grid and taking inner products; the dense-matrix route in
:func:`mode_operators` exists as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericalSafetyError, SpecError
from .polarization import X_POL, Y_POL, PolarizationVector

DEFAULT_LEAKAGE_TOL = 1e-10
NORM_TOL = 1e-12

# Photon-number headroom (per unit of moment order) that must be empty
# before moments of that order are trusted.
BAND_PER_ORDER = 2


def total_number_grid(cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    return n[:, None] + n[None, :]


def labels_match(a: Sequence[PolarizationVector], b: Sequence[PolarizationVector], tol: float = 1e-12) -> bool:
    return all(np.allclose(u.as_array(), v.as_array(), rtol=0.0, atol=tol) for u, v in zip(a, b))


@dataclass(frozen=True, eq=False)
class TwoModeFockState:
    """Amplitude grid over ``(n_a, n_b)`` in a labelled pair of orthogonal modes.

    Direct construction stores the grid as given (annihilation results are
    deliberately unnormalized); use :meth:`from_amplitudes` for a
    normalized state.
    """

    amplitudes: np.ndarray
    labels: tuple[PolarizationVector, PolarizationVector] = (X_POL, Y_POL)
    leakage_tol: float = DEFAULT_LEAKAGE_TOL

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 2 or amps.shape[0] != amps.shape[1] or amps.shape[0] == 0:
            raise SpecError(f"amplitude grid must be square and non-empty, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise SpecError("amplitude grid contains non-finite entries")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def from_amplitudes(cls, amplitudes, labels=(X_POL, Y_POL), leakage_tol=DEFAULT_LEAKAGE_TOL) -> "TwoModeFockState":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise SpecError("amplitudes are all zero; state cannot be normalized")
        return cls(amps / norm, labels, leakage_tol)

    @classmethod
    def basis(cls, n_a: int, n_b: int, cutoff: int, labels=(X_POL, Y_POL)) -> "TwoModeFockState":
        if not (0 <= n_a <= cutoff and 0 <= n_b <= cutoff):
            raise SpecError(f"|{n_a},{n_b}> does not fit under cutoff {cutoff}")
        amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        amps[n_a, n_b] = 1.0
        return cls(amps, labels)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def leakage(self, order: int = 2) -> float:
        """Probability mass with ``n_a + n_b > cutoff - 2*order``."""
        band = total_number_grid(self.cutoff) > self.cutoff - BAND_PER_ORDER * order
        return float(self.probabilities()[band].sum())

    def is_safe(self, order: int = 2) -> bool:
        return self.leakage(order) <= self.leakage_tol

    def with_amplitudes(self, amplitudes, labels=None) -> "TwoModeFockState":
        return TwoModeFockState(amplitudes, self.labels if labels is None else labels, self.leakage_tol)

    def with_cutoff(self, cutoff: int) -> "TwoModeFockState":
        """Zero-pad (or crop, if the cropped entries vanish) to a new cutoff."""
        amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        k = min(cutoff, self.cutoff) + 1
        amps[:k, :k] = self.amplitudes[:k, :k]
        lost = self.norm**2 - np.linalg.norm(amps) ** 2
        if lost > self.leakage_tol:
            raise NumericalSafetyError(f"cropping to cutoff {cutoff} discards probability {lost:.3g}")
        return self.with_amplitudes(amps)

    def global_phase(self, phase: float) -> "TwoModeFockState":
        return self.with_amplitudes(self.amplitudes * np.exp(1j * phase))


def lower(amplitudes: np.ndarray, mode: int) -> np.ndarray:
    """Raw ladder rule on a grid: ``c'[n-1] = sqrt(n) c[n]`` in the chosen mode."""
    out = np.zeros_like(amplitudes)
    sqrt_n = np.sqrt(np.arange(1, amplitudes.shape[0]))
    if mode == 0:
        out[:-1, :] = sqrt_n[:, None] * amplitudes[1:, :]
    elif mode == 1:
        out[:, :-1] = sqrt_n[None, :] * amplitudes[:, 1:]
    else:
        raise SpecError(f"mode index must be 0 or 1, got {mode}")
    return out


def apply_annihilation(state: TwoModeFockState, mode: int) -> TwoModeFockState:
    """Return ``a|psi>`` for the chosen mode, without renormalizing."""
    return state.with_amplitudes(lower(state.amplitudes, mode))


def _lower_many(amps: np.ndarray, k0: int, k1: int) -> np.ndarray:
    for _ in range(k0):
        amps = lower(amps, 0)
    for _ in range(k1):
        amps = lower(amps, 1)
    return amps


def normally_ordered_moment(state: TwoModeFockState, p: int, q: int, r: int, s: int) -> complex:
    """``<a^dag^p a^q b^dag^r b^s>`` by repeated ladder application.

    Raises NumericalSafetyError if the state carries more than its leakage
    tolerance in the photon-number band this moment order depends on.
    """
    if min(p, q, r, s) < 0:
        raise SpecError("moment powers must be nonnegative")
    order = max(p, q, r, s)
    if not state.is_safe(order):
        raise NumericalSafetyError(
            f"state leaks {state.leakage(order):.3g} into the top {BAND_PER_ORDER * order} photon numbers "
            f"(cutoff {state.cutoff}); raise the cutoff for order-{order} moments"
        )
    bra = _lower_many(state.amplitudes, p, r)
    ket = _lower_many(state.amplitudes, q, s)
    return complex(np.vdot(bra, ket))


@dataclass(frozen=True, eq=False)
class StateEnsemble:
    """Finite mixture of pure states sharing a cutoff and mode labels."""

    members: tuple[tuple[float, TwoModeFockState], ...]

    def __post_init__(self):
        members = tuple((float(w), s) for w, s in self.members)
        if not members:
            raise SpecError("ensemble needs at least one member")
        weights = np.array([w for w, _ in members])
        if np.any(weights < 0):
            raise SpecError("ensemble weights must be nonnegative")
        if abs(weights.sum() - 1.0) > NORM_TOL:
            raise SpecError(f"ensemble weights sum to {weights.sum():.15g}, not 1")
        first = members[0][1]
        for _, s in members[1:]:
            if s.cutoff != first.cutoff:
                raise SpecError("ensemble members must share a cutoff")
            if not labels_match(s.labels, first.labels):
                raise SpecError("ensemble members must share mode labels")
        object.__setattr__(self, "members", members)

    @classmethod
    def pure(cls, state: TwoModeFockState) -> "StateEnsemble":
        return cls(((1.0, state),))

    @classmethod
    def mixture(cls, members: Iterable[tuple[float, TwoModeFockState]]) -> "StateEnsemble":
        """Build an ensemble, renormalizing the weights."""
        members = list(members)
        total = sum(w for w, _ in members)
        if total <= 0:
            raise SpecError("mixture weights must have a positive sum")
        return cls(tuple((w / total, s) for w, s in members))

    @property
    def cutoff(self) -> int:
        return self.members[0][1].cutoff

    @property
    def labels(self) -> tuple[PolarizationVector, PolarizationVector]:
        return self.members[0][1].labels

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.members])

    @property
    def states(self) -> list[TwoModeFockState]:
        return [s for _, s in self.members]

    def is_safe(self, order: int = 2) -> bool:
        return all(s.is_safe(order) for s in self.states)

    def map(self, fn) -> "StateEnsemble":
        return StateEnsemble(tuple((w, fn(s)) for w, s in self.members))


def ensemble_moment(ens: StateEnsemble, p: int, q: int, r: int, s: int) -> complex:
    return complex(sum(w * normally_ordered_moment(st, p, q, r, s) for w, st in ens.members if w > 0))


def ladder_matrix(cutoff: int) -> np.ndarray:
    """Dense single-mode annihilation matrix truncated at ``cutoff``."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(complex)


def mode_operators(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``(a, b)`` on the flattened grid, index ``n_a*(cutoff+1) + n_b``."""
    a = ladder_matrix(cutoff)
    eye = np.eye(cutoff + 1)
    return np.kron(a, eye), np.kron(eye, a)


def dense_moment(state: TwoModeFockState, p: int, q: int, r: int, s: int) -> complex:
    """Same quantity as :func:`normally_ordered_moment`, via explicit matrices."""
    A, B = mode_operators(state.cutoff)
    mp = np.linalg.matrix_power
    op = mp(A.conj().T, p) @ mp(A, q) @ mp(B.conj().T, r) @ mp(B, s)
    psi = state.amplitudes.ravel()
    return complex(psi.conj() @ op @ psi)

"""Stokes operators on two-mode states and passive polarization transforms.

``S_j = a^dag M_j a`` with ``a = (a_x, a_y)`` and

    M_1 = diag(1, -1),  M_2 = [[0, 1], [1, 0]],  M_3 = [[0, -i], [i, 0]],

so that ``S_2 + i S_3 = 2 a_x^dag a_y``.  States labelled by another
orthogonal mode pair ``(u, v)`` are handled by conjugating ``M_j`` with the
label matrix ``B = [u v]``; no basis change of the state is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import NumericalSafetyError, SpecError
from .fock import (
    StateEnsemble,
    TwoModeFockState,
    ensemble_moment,
    lower,
    mode_operators,
    total_number_grid,
)
from .polarization import PoincareVector, PolarizationVector, X_POL

PAULI_STOKES = np.array(
    [
        [[1, 0], [0, -1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
    ],
    dtype=complex,
)

IMAG_TOL = 1e-10
VARIANCE_CLAMP = 1e-10

# (j, k) index pairs stored in StokesMoments.anti
ANTI_PAIRS = ((0, 1), (1, 2), (2, 0))


def label_matrix(labels) -> np.ndarray:
    """Columns are the Jones vectors of the two labelled modes."""
    return np.column_stack([labels[0].as_array(), labels[1].as_array()])


def annihilate_along(state: TwoModeFockState, eps: PolarizationVector) -> np.ndarray:
    """Amplitude grid of ``a_eps |psi>`` (unnormalized), for any state labels."""
    coeff = eps.as_array().conj() @ label_matrix(state.labels)
    out = np.zeros_like(state.amplitudes)
    for mode, c in enumerate(coeff):
        if c != 0:
            out = out + c * lower(state.amplitudes, mode)
    return out


@lru_cache(maxsize=64)
def _blocks(w_key: tuple, cutoff: int) -> tuple[np.ndarray, ...]:
    w = np.array(w_key, dtype=complex).reshape(2, 2)
    blocks = [np.ones((1, 1), dtype=complex)]
    for n in range(1, cutoff + 1):
        prev = blocks[-1]
        up_a = np.zeros((n + 1, n), dtype=complex)
        up_b = np.zeros((n + 1, n), dtype=complex)
        up_a[1:] = np.sqrt(np.arange(1, n + 1))[:, None] * prev
        up_b[:-1] = np.sqrt(n - np.arange(n))[:, None] * prev
        block = np.empty((n + 1, n + 1), dtype=complex)
        # old photon added to mode 0 for columns 1..n, to mode 1 for column 0
        block[:, 1:] = (w[0, 0] * up_a + w[1, 0] * up_b) / np.sqrt(np.arange(1, n + 1))
        block[:, 0] = (w[0, 1] * up_a[:, 0] + w[1, 1] * up_b[:, 0]) / np.sqrt(n)
        blocks.append(block)
    return tuple(blocks)


def passive_blocks(w: np.ndarray, cutoff: int) -> tuple[np.ndarray, ...]:
    """Per-photon-number unitaries induced by a single-photon 2x2 unitary ``w``.

    ``w[k, i]`` is the amplitude for a photon entering old mode ``i`` to
    leave in new mode ``k``.  Block ``N`` maps ``|n, N-n>`` (column ``n``)
    to ``|k, N-k>`` (row ``k``).
    """
    w = np.asarray(w, dtype=complex)
    return _blocks(tuple(w.ravel().tolist()), cutoff)


def _apply_passive(state: TwoModeFockState, w: np.ndarray, labels) -> TwoModeFockState:
    if not np.allclose(w.conj().T @ w, np.eye(2), rtol=0, atol=1e-12):
        raise SpecError("single-photon map is not unitary")
    amps = state.amplitudes
    cutoff = state.cutoff
    beyond = float((np.abs(amps[total_number_grid(cutoff) > cutoff]) ** 2).sum())
    if beyond > state.leakage_tol:
        raise NumericalSafetyError(
            f"probability {beyond:.3g} lies above total photon number {cutoff}; "
            "a passive transform cannot be represented at this cutoff"
        )
    out = np.zeros_like(amps)
    rows_all = np.arange(cutoff + 1)
    for n, block in enumerate(passive_blocks(w, cutoff)):
        rows = rows_all[: n + 1]
        out[rows, n - rows] = block @ amps[rows, n - rows]
    if beyond > 0:
        # restore the input norm after dropping the (sub-tolerance) N > cutoff part
        out *= np.linalg.norm(amps) / np.linalg.norm(out)
    return TwoModeFockState(out, labels, state.leakage_tol)


def transform_labels(state: TwoModeFockState, labels) -> TwoModeFockState:
    """Re-express a state in another orthonormal pair of polarization modes."""
    for v in labels:
        v.require_unit()
    new = label_matrix(labels)
    if not np.allclose(new.conj().T @ new, np.eye(2), rtol=0, atol=1e-12):
        raise SpecError("target labels are not an orthonormal pair")
    w = new.conj().T @ label_matrix(state.labels)
    return _apply_passive(state, w, tuple(labels))


def mode_transform(state: TwoModeFockState, eps: PolarizationVector) -> TwoModeFockState:
    """Amplitudes of ``state`` in the ``(eps, eps_perp)`` mode pair."""
    eps.require_unit()
    return transform_labels(state, (eps, eps.orthogonal()))


def apply_jones(state: TwoModeFockState, jones: np.ndarray) -> TwoModeFockState:
    """Pass the light through a lossless element with 2x2 Jones matrix (x/y basis).

    The state keeps its labels; only its amplitudes change.
    """
    b = label_matrix(state.labels)
    w = b.conj().T @ np.asarray(jones, dtype=complex) @ b
    return _apply_passive(state, w, state.labels)


@dataclass(frozen=True, eq=False)
class StokesMoments:
    """First and second moments of the Stokes operators.

    ``anti`` holds ``<{S_j, S_k}>`` for the pairs (1,2), (2,3), (3,1).
    """

    s0: float
    s: np.ndarray
    s2: np.ndarray
    anti: np.ndarray

    def second_moments(self) -> np.ndarray:
        """Symmetric matrix ``C[j,k] = <{S_j, S_k}>/2`` (so ``C[j,j] = <S_j^2>``)."""
        c = np.diag(np.asarray(self.s2, dtype=float))
        for (j, k), v in zip(ANTI_PAIRS, self.anti):
            c[j, k] = c[k, j] = v / 2
        return c

    @property
    def variances(self) -> np.ndarray:
        return self.s2 - self.s**2

    @property
    def polarization_length(self) -> float:
        return float(np.linalg.norm(self.s))

    def degree_of_polarization(self) -> float:
        return self.polarization_length / self.s0 if self.s0 > 0 else float("nan")

    def mean_direction(self) -> PoincareVector | None:
        length = self.polarization_length
        if length <= 1e-12 * max(1.0, self.s0):
            return None
        return PoincareVector.from_array(self.s / length)


def _moment_tables(ens: StateEnsemble):
    cache = {}

    def moment(creators, annihilators):
        p, r = creators.count(0), creators.count(1)
        q, s = annihilators.count(0), annihilators.count(1)
        key = (p, q, r, s)
        if key not in cache:
            cache[key] = ensemble_moment(ens, *key)
        return cache[key]

    g = np.empty((2, 2), dtype=complex)
    h = np.empty((2, 2, 2, 2), dtype=complex)
    for i, j in product(range(2), repeat=2):
        g[i, j] = moment((i,), (j,))
    for a, c, b, d in product(range(2), repeat=4):
        h[a, c, b, d] = moment((a, c), (b, d))
    return g, h


def stokes_moments(ens: StateEnsemble) -> StokesMoments:
    g, h = _moment_tables(ens)
    b = label_matrix(ens.labels)
    ks = [b.conj().T @ m @ b for m in PAULI_STOKES]
    n_total = np.einsum("ii->", g)
    first = np.array([np.einsum("ab,ab->", k, g) for k in ks])
    second = np.empty((3, 3), dtype=complex)
    for j, k in product(range(3), repeat=2):
        # a^dag_a a_b a^dag_c a_d = a^dag_a a^dag_c a_b a_d + delta_bc a^dag_a a_d
        second[j, k] = np.einsum("ab,cd,acbd->", ks[j], ks[k], h) + np.sum((ks[j] @ ks[k]) * g)

    scale = max(1.0, abs(n_total.real)) ** 2
    residues = [abs(n_total.imag), *np.abs(first.imag)]
    residues += list(np.abs(np.diag(second).imag))
    residues += [abs((second[j, k] + second[k, j]).imag) for j, k in ANTI_PAIRS]
    if max(residues) > IMAG_TOL * scale:
        raise NumericalSafetyError(f"Stokes moments have imaginary residue {max(residues):.3g}")

    s = first.real
    s2 = np.diag(second).real
    if np.any(s2 < s**2 - VARIANCE_CLAMP * scale):
        raise NumericalSafetyError("negative Stokes variance beyond rounding tolerance")
    anti = np.array([(second[j, k] + second[k, j]).real for j, k in ANTI_PAIRS])
    return StokesMoments(float(n_total.real), s, s2, anti)


def stokes_along_many(mom: StokesMoments, directions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Means and variances of ``n . S`` for each row of ``directions``."""
    directions = np.asarray(directions, dtype=float)
    mean = directions @ mom.s
    second = np.einsum("...j,jk,...k->...", directions, mom.second_moments(), directions)
    var = second - mean**2
    tol = VARIANCE_CLAMP * max(1.0, mom.s0) ** 2
    if np.any(var < -tol):
        raise NumericalSafetyError(f"variance {var.min():.3g} is negative beyond tolerance")
    return mean, np.where(var < 0, 0.0, var)


def stokes_along(mom: StokesMoments, n: PoincareVector) -> tuple[float, float]:
    mean, var = stokes_along_many(mom, n.as_array())
    return float(mean), float(var)


def stokes_operator_matrices(cutoff: int) -> np.ndarray:
    """Dense ``(S0, S1, S2, S3)`` in the x/y basis on the flattened grid."""
    a, b = mode_operators(cutoff)
    ops = [a, b]
    stack = [a.conj().T @ a + b.conj().T @ b]
    for m in PAULI_STOKES:
        stack.append(sum(m[i, j] * ops[i].conj().T @ ops[j] for i in range(2) for j in range(2)))
    return np.array(stack)


def number_operator_matrix(eps: PolarizationVector, cutoff: int) -> np.ndarray:
    """Dense ``a_eps^dag a_eps`` with ``a_eps = eps_x^* a_x + eps_y^* a_y``."""
    a, b = mode_operators(cutoff)
    op = np.conj(eps.ex) * a + np.conj(eps.ey) * b
    return op.conj().T @ op


def to_xy(state: TwoModeFockState) -> TwoModeFockState:
    return mode_transform(state, X_POL)

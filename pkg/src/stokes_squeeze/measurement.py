"""Photon-counting detection of polarization squeezing.

Squeezing of ``S_n`` can be read off from photon counts in the rotated mode
pair tied to ``n``::

    eps_bar      = cos(theta/2) e_x + sin(theta/2) e^{i phi} e_y
    eps_bar_perp = -sin(theta/2) e_x + cos(theta/2) e^{i phi} e_y

With ``n1``, ``n2`` the counts in those two modes and ``D = n1 - n2``, the
estimator is ``Var(D) - 2 sqrt(<n1><n2>)``, which equals ``f(n)`` for
polarized light.  Physically the rotated basis is reached by delaying the
y component by ``phi``, rotating the beam by ``-theta/2`` and counting
x and y photons.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .criteria import mode_number_moments
from .errors import NumericalSafetyError, SpecError
from .fock import StateEnsemble, normally_ordered_moment
from .polarization import PoincareVector, PolarizationVector, jones_pair
from .states import is_polarized, polarization_mode
from .stokes import (
    apply_jones,
    number_operator_matrix,
    stokes_moments,
    stokes_operator_matrices,
    to_xy,
    transform_labels,
)

BOOTSTRAP_RESAMPLES = 200
DENSE_CUTOFF_MAX = 8
TABLE_SUM_TOL = 1e-10
RNG_NAME = "numpy.random.Generator(PCG64)"


@dataclass(frozen=True, eq=False)
class CountRecord:
    shots: int
    samples: np.ndarray
    seed: int
    theta: float | None = None
    phi: float | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.int64).reshape(-1, 2)
        if len(samples) != self.shots:
            raise SpecError(f"record holds {len(samples)} samples but shots = {self.shots}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def sidecar(self) -> dict:
        return {"schema": 1, "shots": self.shots, "seed": self.seed, "theta": self.theta,
                "phi": self.phi, "rng": RNG_NAME, "columns": ["n1", "n2"]}

    def write(self, csv_path: str | Path) -> tuple[Path, Path]:
        """Write ``n1,n2`` rows plus a JSON sidecar next to the CSV."""
        csv_path = Path(csv_path)
        with csv_path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n1", "n2"])
            writer.writerows(self.samples.tolist())
        side = csv_path.with_suffix(".json")
        side.write_text(json.dumps(self.sidecar(), indent=2) + "\n")
        return csv_path, side

    @classmethod
    def read(cls, csv_path: str | Path) -> "CountRecord":
        csv_path = Path(csv_path)
        meta = json.loads(csv_path.with_suffix(".json").read_text())
        with csv_path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["n1", "n2"]:
                raise SpecError(f"{csv_path}: expected header n1,n2, got {','.join(header)}")
            rows = [[int(a), int(b)] for a, b in reader]
        return cls(len(rows), np.array(rows).reshape(-1, 2), meta["seed"], meta.get("theta"), meta.get("phi"))


@dataclass(frozen=True)
class EstimatorResult:
    value: float
    std_error: float
    method: str
    moments: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error, "method": self.method,
                "moments": {k: {"value": v, "std_error": e} for k, (v, e) in self.moments.items()}}


class IdentityResiduals(NamedTuple):
    residual_op: float
    residual_scalar: float
    polarized: bool


def rotated_basis(theta: float, phi: float) -> tuple[PolarizationVector, PolarizationVector]:
    return jones_pair(theta, phi)


def basis_for_direction(n: PoincareVector) -> tuple[PolarizationVector, PolarizationVector]:
    return rotated_basis(*n.angles())


def joint_distribution(ens: StateEnsemble, basis) -> np.ndarray:
    """``p[n1, n2]`` for photon counts in the two modes of ``basis``."""
    if not ens.is_safe(2):
        raise NumericalSafetyError("ensemble leaks past its cutoff")
    table = sum(w * transform_labels(st, basis).probabilities() for w, st in ens.members)
    total = float(table.sum())
    if abs(total - 1.0) > TABLE_SUM_TOL:
        raise NumericalSafetyError(f"count distribution sums to {total:.15g}")
    return np.clip(table, 0.0, None)


def detection_jones(theta: float, phi: float) -> np.ndarray:
    """Jones matrix of the detection optics: y delayed by ``phi``, then a ``-theta/2`` rotation."""
    r = -theta / 2
    rotation = np.array([[np.cos(r), -np.sin(r)], [np.sin(r), np.cos(r)]])
    delay = np.diag([1.0, np.exp(-1j * phi)])
    return rotation @ delay


def detected_distribution(ens: StateEnsemble, theta: float, phi: float) -> np.ndarray:
    """Counts in x and y after the detection optics (the lab-frame route)."""
    jones = detection_jones(theta, phi)
    return sum(w * apply_jones(to_xy(st), jones).probabilities() for w, st in ens.members)


def sample_counts(table: np.ndarray, shots: int, seed: int, theta: float | None = None,
                  phi: float | None = None) -> CountRecord:
    table = np.asarray(table, dtype=float)
    if table.size == 0 or not table.sum() > 0:
        raise SpecError("count distribution is empty")
    if shots < 1:
        raise SpecError("shots must be positive")
    p = table.ravel() / table.sum()
    rng = np.random.default_rng(seed)
    idx = rng.choice(p.size, size=shots, p=p)
    samples = np.column_stack(np.unravel_index(idx, table.shape))
    return CountRecord(shots, samples, seed, theta, phi)


def _plug_in(n1: np.ndarray, n2: np.ndarray) -> float:
    d = n1 - n2
    return float(np.mean(d * d) - np.mean(d) ** 2 - 2 * np.sqrt(np.mean(n1) * np.mean(n2)))


def estimate_squeezing(rec: CountRecord) -> EstimatorResult:
    if rec.shots < 2:
        raise SpecError("estimation needs at least 2 shots")
    n1 = rec.samples[:, 0].astype(float)
    n2 = rec.samples[:, 1].astype(float)
    shots = rec.shots
    value = _plug_in(n1, n2)

    def stat(x):
        return float(x.mean()), float(x.std(ddof=1) / np.sqrt(shots))

    moments = {"n1": stat(n1), "n2": stat(n2), "n1_sq": stat(n1**2), "n2_sq": stat(n2**2), "n1_n2": stat(n1 * n2)}
    m1, m2 = moments["n1"][0], moments["n2"][0]
    if m1 > 10 / shots and m2 > 10 / shots:
        d = n1 - n2
        z = np.vstack([d, d * d, n1, n2])
        grad = np.array([-2 * d.mean(), 1.0, -np.sqrt(m2 / m1), -np.sqrt(m1 / m2)])
        var = float(grad @ np.cov(z, ddof=1) @ grad) / shots
        return EstimatorResult(value, float(np.sqrt(max(var, 0.0))), "delta", moments)

    # sqrt terms are not differentiable at a zero mean; resample instead
    rng = np.random.default_rng([rec.seed, 1])
    boots = np.empty(BOOTSTRAP_RESAMPLES)
    for b in range(BOOTSTRAP_RESAMPLES):
        idx = rng.integers(0, shots, size=shots)
        boots[b] = _plug_in(n1[idx], n2[idx])
    return EstimatorResult(value, float(boots.std(ddof=1)), "bootstrap", moments)


def estimate_from_table(table: np.ndarray) -> float:
    """Infinite-statistics limit of :func:`estimate_squeezing`."""
    table = np.asarray(table, dtype=float)
    n = np.arange(table.shape[0])
    n1 = n[:, None] * np.ones_like(table)
    n2 = n[None, :] * np.ones_like(table)
    d = n1 - n2
    m1, m2 = float((table * n1).sum()), float((table * n2).sum())
    return float((table * d * d).sum() - (table * d).sum() ** 2 - 2 * np.sqrt(m1 * m2))


def squeezing_from_factorial_moments(ens: StateEnsemble, theta: float, phi: float) -> float:
    """Operator-side form of the estimator from factorial moments in the rotated basis.

    ``F1 + F2 - 2C - (N1 - N2)^2 + (sqrt N1 - sqrt N2)^2`` with
    ``F = <a^dag^2 a^2>``, ``C = <a^dag b^dag a b>``.
    """
    basis = rotated_basis(theta, phi)
    rot = ens.map(lambda st: transform_labels(st, basis))

    def avg(*pqrs):
        return sum(w * normally_ordered_moment(st, *pqrs).real for w, st in rot.members)

    n1, n2 = avg(1, 1, 0, 0), avg(0, 0, 1, 1)
    f1, f2, c = avg(2, 2, 0, 0), avg(0, 0, 2, 2), avg(1, 1, 1, 1)
    return float(f1 + f2 - 2 * c - (n1 - n2) ** 2 + (np.sqrt(n1) - np.sqrt(n2)) ** 2)


def check_number_difference_identity(ens: StateEnsemble, n: PoincareVector) -> IdentityResiduals:
    """Check ``n.S = N_bar - N_bar_perp`` and ``|<S>|^2 - <S_n>^2 = 4 <N_bar><N_bar_perp>``.

    The operator identity is checked with dense matrices (cutoff capped at 8)
    and holds for any state; the scalar one holds for polarized light and is
    only reported for other states.
    """
    eps_bar, eps_perp = basis_for_direction(n)
    cutoff = min(ens.cutoff, DENSE_CUTOFF_MAX)
    s_ops = stokes_operator_matrices(cutoff)
    lhs = np.tensordot(n.as_array(), s_ops[1:], axes=1)
    rhs = number_operator_matrix(eps_bar, cutoff) - number_operator_matrix(eps_perp, cutoff)
    residual_op = float(np.abs(lhs - rhs).max())

    mom = stokes_moments(ens)
    s_n = float(n.as_array() @ mom.s)
    nb, _ = mode_number_moments(ens, eps_bar)
    nbp, _ = mode_number_moments(ens, eps_perp)
    residual_scalar = abs(mom.polarization_length**2 - s_n**2 - 4 * nb * nbp)
    mode = polarization_mode(ens)
    polarized = mode is None or is_polarized(ens, mode)
    return IdentityResiduals(residual_op, float(residual_scalar), polarized)

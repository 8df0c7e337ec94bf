"""Polarization-squeezing criteria, Mandel's Q and the squeezing cone.

For a direction ``n`` on the Poincaré sphere the central quantity is

    f(n) = Var(S_n) - sqrt(|<S>|^2 - <S_n>^2),

and ``S_n`` is called squeezed when ``f(n) < 0``.  For light polarized in
a mode with Poincaré vector ``m`` this reduces to

    f / <N> = (1 - sin P)(1 + Q (1 + sin P)),     cos P = n . m,

so squeezing needs ``Q < -1/2`` and then happens outside a double cone of
half-angle ``arcsin(1/|Q| - 1)`` about ``+-m`` (directions exactly
perpendicular to ``m`` are marginal, ``f = 0``).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NumericalSafetyError, QUndefinedError, SpecError
from .fock import StateEnsemble, lower
from .polarization import PoincareVector, PolarizationVector, directions_from_angles
from .stokes import (
    StokesMoments,
    annihilate_along,
    label_matrix,
    stokes_along,
    stokes_along_many,
    stokes_moments,
)

DEFAULT_TOLERANCE = 1e-9
TRANSVERSE_CLAMP = 1e-9
ORTHOGONALITY_TOL = 1e-10
Q_FLOOR_TOL = 1e-12
THREADS_ENV = "STOKES_SQUEEZE_THREADS"


@dataclass(frozen=True)
class SqueezingReport:
    theta: float
    phi: float
    n: tuple[float, float, float]
    cos_big_phi: float
    mean: float
    variance: float
    transverse_bound: float
    f: float
    chirkin: bool
    heersink: bool
    luis: bool
    luis_n_perp: tuple[float, float, float]
    squeezed: bool


@dataclass(frozen=True)
class ConeDescriptor:
    q: float
    exists: bool
    semi_vertical_angle: float | None = None

    def to_dict(self) -> dict:
        out = {"q": self.q, "exists": self.exists}
        if self.exists:
            out["semi_vertical_angle"] = self.semi_vertical_angle
        return out


def squeeze_threshold(mom: StokesMoments, tolerance: float = DEFAULT_TOLERANCE) -> float:
    """Margin below zero that ``f`` must reach to count as squeezed."""
    return tolerance * max(1.0, mom.s0)


def mode_number_moments(ens: StateEnsemble, eps: PolarizationVector) -> tuple[float, float]:
    """``(<a^dag a>, <a^dag^2 a^2>)`` for the mode ``eps``, ensemble-averaged."""
    mean = fact2 = 0.0
    for w, st in ens.members:
        once = annihilate_along(st, eps)
        # a_eps = c0 a_0 + c1 a_1 with commuting a_0, a_1, so a_eps^2 psi is a_eps applied to once
        twice = np.zeros_like(once)
        for mode, c in enumerate(eps.as_array().conj() @ label_matrix(st.labels)):
            if c != 0:
                twice = twice + c * lower(once, mode)
        mean += w * float(np.vdot(once, once).real)
        fact2 += w * float(np.vdot(twice, twice).real)
    return mean, fact2


def mandel_q(ens: StateEnsemble, eps: PolarizationVector) -> float:
    """Mandel's Q of mode ``eps``: ``(<a^dag^2 a^2> - <N>^2) / <N>``."""
    if not ens.is_safe(2):
        raise NumericalSafetyError("ensemble leaks past its cutoff; second-order moments are unreliable")
    mean, fact2 = mode_number_moments(ens, eps)
    if mean <= 1e-12:
        raise QUndefinedError(f"Mandel's Q is undefined: mean photon number {mean:.3g} in the mode")
    return (fact2 - mean**2) / mean


def transverse_bound(mom: StokesMoments, mean_along: np.ndarray | float) -> np.ndarray | float:
    """``sqrt(|<S>|^2 - <S_n>^2)``: the largest ``|<S_n_perp>|`` over perpendicular directions."""
    gap = mom.polarization_length**2 - np.asarray(mean_along) ** 2
    tol = TRANSVERSE_CLAMP * max(1.0, mom.s0) ** 2
    if np.any(gap < -tol):
        raise NumericalSafetyError("|<S>|^2 - <S_n>^2 is negative beyond rounding")
    return np.sqrt(np.where(gap < 0, 0.0, gap))


def squeezing_function(ens: StateEnsemble | StokesMoments, n: PoincareVector) -> float:
    mom = ens if isinstance(ens, StokesMoments) else stokes_moments(ens)
    mean, var = stokes_along(mom, n)
    return float(var - transverse_bound(mom, mean))


def criterion_chirkin(mom: StokesMoments, j: int, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    """``V_j`` below the coherent-state level ``<S_0>``; axes numbered 1..3."""
    _axis(j)
    return bool(mom.variances[j - 1] < mom.s0 - squeeze_threshold(mom, tolerance))


def criterion_heersink(mom: StokesMoments, j: int, k: int, l: int, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    """``V_j < |<S_l>| < V_k`` with strict margins; ``(j, k, l)`` a permutation of 1..3."""
    if sorted((j, k, l)) != [1, 2, 3]:
        raise SpecError(f"(j, k, l) = {(j, k, l)} is not a permutation of (1, 2, 3)")
    t = squeeze_threshold(mom, tolerance)
    v = mom.variances
    sl = abs(mom.s[l - 1])
    return bool(v[j - 1] < sl - t and sl < v[k - 1] - t)


def _axis(j: int) -> None:
    if j not in (1, 2, 3):
        raise SpecError(f"Stokes axis must be 1, 2 or 3, got {j!r}")


def default_perpendicular(mom: StokesMoments, n: np.ndarray) -> np.ndarray:
    """Unit vector(s) perpendicular to ``n`` along the transverse part of ``<S>``.

    Falls back to Gram-Schmidt on e_x, then e_y, when ``<S>`` has no
    transverse part.
    """
    n = np.atleast_2d(np.asarray(n, dtype=float))
    s = mom.s
    t = s[None, :] - (n @ s)[:, None] * n
    tn = np.linalg.norm(t, axis=1)
    small = tn <= 1e-12 * max(1.0, mom.s0)
    if np.any(small):
        ex = np.array([1.0, 0.0, 0.0])
        ey = np.array([0.0, 1.0, 0.0])
        g = ex[None, :] - n[small][:, [0]] * n[small]
        gn = np.linalg.norm(g, axis=1)
        bad = gn < 1e-6
        if np.any(bad):
            g[bad] = ey[None, :] - n[small][bad][:, [1]] * n[small][bad]
            gn[bad] = np.linalg.norm(g[bad], axis=1)
        t[small] = g
        tn[small] = gn
    return t / tn[:, None]


def criterion_luis(
    ens: StateEnsemble | StokesMoments,
    n: PoincareVector,
    n_perp: PoincareVector | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> bool:
    """``V_n < |<S_{n_perp}>|`` for a chosen perpendicular direction."""
    mom = ens if isinstance(ens, StokesMoments) else stokes_moments(ens)
    nv = n.as_array()
    perp = default_perpendicular(mom, nv)[0] if n_perp is None else n_perp.as_array()
    if abs(float(np.dot(nv, perp))) > ORTHOGONALITY_TOL:
        raise SpecError("n and n_perp are not orthogonal")
    _, var = stokes_along(mom, n)
    return bool(var < abs(float(perp @ mom.s)) - squeeze_threshold(mom, tolerance))


def analytic_polarized_criterion(q: float, big_phi: float) -> float:
    """Factored polarized-light criterion; negative means squeezed."""
    s = np.sin(big_phi)
    return (1 - s) * (1 + q * (1 + s))


def analytic_polarized_criterion_expanded(q: float, big_phi: float) -> float:
    return 1 - np.sin(big_phi) + q * np.cos(big_phi) ** 2


def squeezing_cone(q: float) -> ConeDescriptor:
    if q is None or not math.isfinite(q):
        raise SpecError(f"Q must be a finite number, got {q!r}")
    if q < -1 - Q_FLOOR_TOL:
        raise SpecError(f"Q = {q} is below the physical minimum -1")
    if q >= -0.5:
        return ConeDescriptor(float(q), False)
    q = max(q, -1.0)
    return ConeDescriptor(float(q), True, float(math.asin(min(1.0, 1.0 / abs(q) - 1.0))))


def scan_grid(theta_steps: int, phi_steps: int) -> tuple[np.ndarray, np.ndarray]:
    """theta on [0, pi] inclusive, phi on [0, 2pi), flattened theta-major."""
    if theta_steps < 2 or phi_steps < 2:
        raise SpecError("scan grid must be at least 2x2")
    theta = np.linspace(0.0, np.pi, theta_steps)
    phi = 2 * np.pi * np.arange(phi_steps) / phi_steps
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    return tt.ravel(), pp.ravel()


def _evaluate(mom: StokesMoments, dirs: np.ndarray, tolerance: float) -> dict[str, np.ndarray]:
    t = squeeze_threshold(mom, tolerance)
    mean, var = stokes_along_many(mom, dirs)
    bound = transverse_bound(mom, mean)
    f = var - bound
    perp1 = default_perpendicular(mom, dirs)
    perp2 = np.cross(dirs, perp1)
    s_perp1 = np.abs(perp1 @ mom.s)
    _, var_perp2 = stokes_along_many(mom, perp2)
    m = mom.mean_direction()
    cosphi = np.clip(dirs @ m.as_array(), -1, 1) if m is not None else np.full(len(dirs), np.nan)
    return {
        "cos_big_phi": cosphi,
        "mean": mean,
        "variance": var,
        "transverse_bound": bound,
        "f": f,
        "chirkin": var < mom.s0 - t,
        "heersink": (var < s_perp1 - t) & (s_perp1 < var_perp2 - t),
        "luis": var < s_perp1 - t,
        "luis_n_perp": perp1,
        "squeezed": f < -t,
    }


def _workers(requested: int | None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SpecError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def scan_arrays(
    ens: StateEnsemble | StokesMoments,
    grid: tuple[int, int],
    tolerance: float = DEFAULT_TOLERANCE,
    workers: int | None = None,
) -> dict[str, np.ndarray]:
    """Columnar scan over the theta/phi grid; see :func:`scan` for the row form."""
    mom = ens if isinstance(ens, StokesMoments) else stokes_moments(ens)
    theta, phi = scan_grid(*grid)
    dirs = directions_from_angles(theta, phi)
    nworkers = min(_workers(workers), grid[0])
    if nworkers == 1:
        cols = _evaluate(mom, dirs, tolerance)
    else:
        chunks = np.array_split(np.arange(len(dirs)), nworkers)
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            parts = list(pool.map(lambda idx: _evaluate(mom, dirs[idx], tolerance), chunks))
        cols = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    return {"theta": theta, "phi": phi, "n": dirs, **cols}


def scan(
    ens: StateEnsemble | StokesMoments,
    grid: tuple[int, int],
    tolerance: float = DEFAULT_TOLERANCE,
    workers: int | None = None,
) -> list[SqueezingReport]:
    cols = scan_arrays(ens, grid, tolerance, workers)
    n = cols["n"].tolist()
    perp = cols["luis_n_perp"].tolist()
    fields = [cols[k].tolist() for k in (
        "theta", "phi", "cos_big_phi", "mean", "variance", "transverse_bound", "f",
        "chirkin", "heersink", "luis", "squeezed")]
    return [
        SqueezingReport(th, ph, tuple(nn), c, mu, v, b, f, ch, he, lu, tuple(pp), ps)
        for th, ph, c, mu, v, b, f, ch, he, lu, ps, nn, pp in zip(*fields, n, perp)
    ]


def angle_to_axis_line(cos_big_phi: np.ndarray) -> np.ndarray:
    """Angle in [0, pi/2] between a direction and the line through ``+-m``."""
    return np.arccos(np.clip(np.abs(cos_big_phi), 0.0, 1.0))

"""Jones vectors and Poincaré-sphere directions.

Conventions
-----------
A Jones vector with polar angle ``theta0`` and azimuth ``phi0`` is
``(cos(theta0/2), sin(theta0/2) exp(i phi0))``; its orthogonal partner is
``(-sin(theta0/2), cos(theta0/2) exp(i phi0))``.  The matching Poincaré
vector is ``(cos theta0, sin theta0 cos phi0, sin theta0 sin phi0)``, i.e.
the polar axis is the S1 (x-linear) pole.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecError

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class PolarizationVector:
    """Complex Jones vector ``ex e_x + ey e_y``."""

    ex: complex
    ey: complex

    def __post_init__(self):
        object.__setattr__(self, "ex", complex(self.ex))
        object.__setattr__(self, "ey", complex(self.ey))

    def as_array(self) -> np.ndarray:
        return np.array([self.ex, self.ey], dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.sqrt(abs(self.ex) ** 2 + abs(self.ey) ** 2))

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return abs(abs(self.ex) ** 2 + abs(self.ey) ** 2 - 1.0) <= tol

    def require_unit(self, tol: float = UNIT_TOL) -> "PolarizationVector":
        if not self.is_unit(tol):
            raise SpecError(f"Jones vector {self} is not normalized (norm {self.norm!r})")
        return self

    def orthogonal(self) -> "PolarizationVector":
        """Partner with the same phase convention as :func:`jones_from_angles`.

        Equal to ``exp(i(arg ex + arg ey)) (-ey*, ex*)``, which reduces to
        ``(-sin(t/2), cos(t/2) e^{i p})`` for ``(cos(t/2), sin(t/2) e^{i p})``.
        """
        return PolarizationVector(
            -abs(self.ey) * np.exp(1j * np.angle(self.ex)),
            abs(self.ex) * np.exp(1j * np.angle(self.ey)),
        )

    def angles(self) -> tuple[float, float]:
        """``(theta0, phi0)`` with theta0 in [0, pi], phi0 in [0, 2pi)."""
        return poincare_from_jones(self).angles()

    def poincare(self) -> "PoincareVector":
        return poincare_from_jones(self)


X_POL = PolarizationVector(1.0, 0.0)
Y_POL = PolarizationVector(0.0, 1.0)


@dataclass(frozen=True)
class PoincareVector:
    """Real 3-vector on the Poincaré sphere, components ordered (S1, S2, S3)."""

    m1: float
    m2: float
    m3: float

    def __post_init__(self):
        for name in ("m1", "m2", "m3"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_array(cls, v) -> "PoincareVector":
        v = np.asarray(v, dtype=float)
        return cls(v[0], v[1], v[2])

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3])

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return abs(float(np.linalg.norm(self.as_array())) - 1.0) <= tol

    def angles(self) -> tuple[float, float]:
        m = self.as_array()
        theta = float(np.arccos(np.clip(m[0] / np.linalg.norm(m), -1.0, 1.0)))
        phi = float(np.arctan2(m[2], m[1]) % (2 * np.pi))
        return theta, phi


# same type; the alias marks vectors used as test directions
PoincareDirection = PoincareVector


def jones_from_angles(theta0: float, phi0: float) -> PolarizationVector:
    return PolarizationVector(np.cos(theta0 / 2), np.sin(theta0 / 2) * np.exp(1j * phi0))


def jones_pair(theta0: float, phi0: float) -> tuple[PolarizationVector, PolarizationVector]:
    """``(eps, eps_perp)`` from angles; keeps the ``e^{i phi0}`` on the partner even at the poles."""
    c, s = np.cos(theta0 / 2), np.sin(theta0 / 2)
    e = np.exp(1j * phi0)
    return PolarizationVector(c, s * e), PolarizationVector(-s, c * e)


def poincare_from_jones(eps: PolarizationVector) -> PoincareVector:
    ex, ey = eps.ex, eps.ey
    cross = np.conj(ex) * ey
    return PoincareVector(abs(ex) ** 2 - abs(ey) ** 2, 2 * cross.real, 2 * cross.imag)


def direction_from_angles(theta: float, phi: float) -> PoincareVector:
    return PoincareVector(np.cos(theta), np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi))


def directions_from_angles(theta, phi) -> np.ndarray:
    """Vectorized :func:`direction_from_angles`; trailing axis holds (n1, n2, n3)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    return np.stack([np.cos(theta), np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi)], axis=-1)


def cos_big_phi(n: PoincareVector, m: PoincareVector) -> float:
    """Cosine of the angle (in [0, pi]) between two Poincaré unit vectors."""
    return float(np.clip(np.dot(n.as_array(), m.as_array()), -1.0, 1.0))


def cos_big_phi_from_angles(theta0: float, phi0: float, theta: float, phi: float) -> float:
    return float(np.cos(theta0) * np.cos(theta) + np.cos(phi0 - phi) * np.sin(theta0) * np.sin(theta))


def parse_angle(text: str) -> float:
    """Parse a command-line angle: plain numbers and ``rad`` suffix are radians, ``deg`` is degrees."""
    s = str(text).strip().lower()
    try:
        if s.endswith("deg"):
            return float(np.deg2rad(float(s[:-3])))
        if s.endswith("rad"):
            return float(s[:-3])
        return float(s)
    except ValueError:
        raise SpecError(f"cannot parse angle {text!r}; use e.g. 0.785, 0.785rad or 45deg") from None

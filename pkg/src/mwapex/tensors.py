"""Symmetric-tensor algebra, stress invariants and isotropic elasticity.

Tensors are stored as 6-component numpy arrays in Voigt order
``(11, 22, 33, 12, 13, 23)``. Stress arrays hold true shear components,
strain arrays hold engineering shears (``gam12 = 2*eps12`` etc.).
Tension is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)

# Voigt identity vector [1, 1, 1, 0, 0, 0]
IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


def voigt_to_matrix(v, strain: bool = False) -> np.ndarray:
    """Voigt 6-vector -> symmetric 3x3 matrix.

    With ``strain=True`` the shear entries are treated as engineering
    shears and halved.
    """
    v = np.asarray(v, dtype=float).reshape(6)
    shear = 0.5 if strain else 1.0
    m = np.empty((3, 3))
    for k, (i, j) in enumerate(_PAIRS):
        m[i, j] = m[j, i] = v[k] * (shear if k > 2 else 1.0)
    return m


def matrix_to_voigt(m, strain: bool = False) -> np.ndarray:
    """Symmetric 3x3 matrix -> Voigt 6-vector (inverse of voigt_to_matrix)."""
    m = np.asarray(m, dtype=float)
    shear = 2.0 if strain else 1.0
    v = np.array([m[i, j] for i, j in _PAIRS])
    v[3:] *= shear
    return v


def trace(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(v[0] + v[1] + v[2])


def deviator(sigma) -> np.ndarray:
    """Deviatoric part of a stress-convention Voigt vector."""
    s = np.array(sigma, dtype=float)
    a, b, c = s[:3]
    # difference form: exactly zero for equal normal components
    s[:3] = ((a - b) + (a - c)) / 3.0, ((b - a) + (b - c)) / 3.0, ((c - a) + (c - b)) / 3.0
    return s


def stress_norm(s) -> float:
    """Frobenius norm of a stress-convention Voigt vector."""
    s = np.asarray(s, dtype=float)
    return math.sqrt(float(s[0] ** 2 + s[1] ** 2 + s[2] ** 2
                           + 2.0 * (s[3] ** 2 + s[4] ** 2 + s[5] ** 2)))


def invariants(sigma) -> tuple[float, float, float]:
    """Return ``(I1, J2, J3)`` of a stress tensor."""
    sigma = np.asarray(sigma, dtype=float)
    I1 = trace(sigma)
    s = deviator(sigma)
    J2 = 0.5 * stress_norm(s) ** 2
    s11, s22, s33, s12, s13, s23 = s
    J3 = (s11 * s22 * s33 + 2.0 * s12 * s23 * s13
          - s11 * s23 ** 2 - s22 * s13 ** 2 - s33 * s12 ** 2)
    return I1, J2, float(J3)


def cos3theta(sigma) -> float:
    """Unclamped Lode cosine; 0.0 when the deviator vanishes."""
    s = deviator(sigma)
    norm = stress_norm(s)
    if norm == 0.0:
        return 0.0
    # unit deviator has J2 = 1/2, so (3 sqrt3 / 2) J3 / J2^1.5 = 3 sqrt6 J3
    _, _, J3 = invariants(s / norm)
    return 3.0 * SQRT6 * J3


@dataclass(frozen=True)
class HWCoords:
    """Haigh-Westergaard coordinates; theta is the Lode angle in [0, pi/3]."""

    xi: float
    rho: float
    theta: float


def to_hw(sigma, rho_eps: float = 0.0) -> HWCoords:
    """Map a stress tensor to ``(xi, rho, theta)``.

    Below ``rho_eps`` the Lode angle is undefined and set to 0.
    """
    I1, J2, _ = invariants(sigma)
    xi = I1 / SQRT3
    rho = math.sqrt(2.0 * J2)
    if rho <= rho_eps or J2 <= 0.0:
        return HWCoords(xi, rho, 0.0)
    c = min(1.0, max(-1.0, cos3theta(sigma)))
    return HWCoords(xi, rho, math.acos(c) / 3.0)


@dataclass(frozen=True)
class ElasticModuli:
    E: float
    nu: float

    def __post_init__(self):
        if not self.E > 0.0:
            raise ValueError(f"E must be positive, got {self.E}")
        if not 0.0 < self.nu < 0.5:
            raise ValueError(f"nu must lie in (0, 0.5), got {self.nu}")

    @property
    def bulk(self) -> float:
        """Bulk modulus B* = E / (3(1 - 2 nu))."""
        return self.E / (3.0 * (1.0 - 2.0 * self.nu))

    @property
    def bulk_modified(self) -> float:
        """Modified bulk modulus B = sqrt(3) B*, with xi = B * eps_vol."""
        return SQRT3 * self.bulk

    @property
    def shear(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lame(self) -> float:
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    def stiffness(self) -> np.ndarray:
        """6x6 stiffness mapping engineering strain to stress."""
        lam, G = self.lame, self.shear
        C = np.zeros((6, 6))
        C[:3, :3] = lam
        C[[0, 1, 2], [0, 1, 2]] = lam + 2.0 * G
        C[[3, 4, 5], [3, 4, 5]] = G
        return C

    def compliance(self) -> np.ndarray:
        E, nu, G = self.E, self.nu, self.shear
        S = np.zeros((6, 6))
        S[:3, :3] = -nu / E
        S[[0, 1, 2], [0, 1, 2]] = 1.0 / E
        S[[3, 4, 5], [3, 4, 5]] = 1.0 / G
        return S


def elastic_stress(eps_e, moduli: ElasticModuli) -> np.ndarray:
    """Hooke's law; ``eps_e`` carries engineering shears."""
    eps_e = np.asarray(eps_e, dtype=float)
    lam, G = moduli.lame, moduli.shear
    sig = 2.0 * G * eps_e
    sig[3:] = G * eps_e[3:]
    sig[:3] += lam * trace(eps_e)
    return sig


def elastic_strain(sigma, moduli: ElasticModuli) -> np.ndarray:
    """Inverse of :func:`elastic_stress`."""
    sigma = np.asarray(sigma, dtype=float)
    E, nu, G = moduli.E, moduli.nu, moduli.shear
    eps = (1.0 + nu) / E * sigma
    eps[3:] = sigma[3:] / G
    eps[:3] -= nu / E * trace(sigma)
    return eps

"""Menetrey-Willam yield surface with volumetric hardening/softening.

The surface moves with the hardening variable ``kappa`` (accumulated
volumetric plastic strain) through ``q = q_h * q_s``. Flow is governed by
a quadratic, non-associated potential.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .tensors import SQRT3, SQRT6, IDENTITY, ElasticModuli, HWCoords

DERIV_CLAMP = 1e12


class DegenerateDirectionError(ValueError):
    """Flow direction requested on the hydrostatic axis."""


@dataclass(frozen=True)
class MaterialParams:
    """Elastic and constitutive coefficients (stresses in MPa).

    ``fc`` and ``ft`` are positive magnitudes.
    """

    E: float
    nu: float
    fc: float
    ft: float
    e: float
    t: float
    k1d: float
    qh0: float
    gA: float
    gB: float

    def __post_init__(self):
        for problem in self.violations():
            raise ValueError(problem)

    def violations(self) -> list[str]:
        return check_material(**asdict(self))

    @property
    def moduli(self) -> ElasticModuli:
        return ElasticModuli(self.E, self.nu)

    @property
    def m(self) -> float:
        return cohesion_m(self)

    def with_(self, **changes) -> "MaterialParams":
        return replace(self, **changes)

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


def check_material(E, nu, fc, ft, e, t, k1d, qh0, gA, gB) -> list[str]:
    """Describe every violated parameter invariant (empty when valid)."""
    out = []
    if not E > 0.0:
        out.append(f"E must be > 0 (got {E})")
    if not 0.0 < nu < 0.5:
        out.append(f"nu must satisfy 0 < nu < 0.5 (got {nu})")
    if not fc > ft > 0.0:
        out.append(f"strengths must satisfy fc > ft > 0 (got fc={fc}, ft={ft})")
    if not 0.5 < e <= 1.0:
        out.append(f"eccentricity must satisfy 0.5 < e <= 1 (got {e})")
    if not 0.0 < qh0 <= 1.0:
        out.append(f"qh0 must satisfy 0 < qh0 <= 1 (got {qh0})")
    if not k1d > 0.0:
        out.append(f"k1d must be > 0 (got {k1d})")
    if not t > 0.0:
        out.append(f"t must be > 0 (got {t})")
    if not gA >= 0.0:
        out.append(f"gA must be >= 0 (got {gA})")
    if not gB >= 0.0:
        out.append(f"gB must be >= 0 (got {gB})")
    return out


# Reference concrete of the validation examples.
TABLE1 = MaterialParams(E=30000.0, nu=0.15, fc=32.0, ft=3.0, e=0.52,
                        t=0.0055, k1d=0.10008, qh0=0.20, gA=21.22, gB=31.46)


def cohesion_m(params: MaterialParams) -> float:
    fc, ft, e = params.fc, params.ft, params.e
    return 3.0 * (fc ** 2 - ft ** 2) / (fc * ft) * e / (e + 1.0)


def elliptic_R(theta: float, e: float) -> float:
    """Deviatoric roundness; 1/e on the tensile meridian, 1 on the compressive."""
    c = math.cos(theta)
    a = 1.0 - e * e
    num = 4.0 * a * c * c + (2.0 * e - 1.0) ** 2
    den = 2.0 * a * c + (2.0 * e - 1.0) * math.sqrt(4.0 * a * c * c + 5.0 * e * e - 4.0 * e)
    return num / den


def hardening_qh(kappa: float, params: MaterialParams) -> float:
    if kappa >= params.k1d:
        return 1.0
    k = params.k1d
    x = (k - kappa) / k
    return params.qh0 + (1.0 - params.qh0) * math.sqrt(max(0.0, 1.0 - x * x))


def d_qh_dkappa(kappa: float, params: MaterialParams, clamp: float = DERIV_CLAMP) -> float:
    """Derivative of q_h; the vertical tangent at kappa = 0 is capped at ``clamp``."""
    if kappa >= params.k1d:
        return 0.0
    k = params.k1d
    x = (k - kappa) / k
    root = math.sqrt(max(0.0, 1.0 - x * x))
    num = (1.0 - params.qh0) * x / k
    if root * clamp <= num:
        return clamp
    return num / root


def softening_qs(kappa: float, params: MaterialParams) -> float:
    if kappa <= params.k1d:
        return 1.0
    u = (kappa - params.k1d) / params.t
    return (1.0 + u * u) ** -2


def d_qs_dkappa(kappa: float, params: MaterialParams) -> float:
    if kappa <= params.k1d:
        return 0.0
    # u = (n1 - 1)/(n2 - 1) reduces to (kappa - k1d)/t
    u = (kappa - params.k1d) / params.t
    return -4.0 * u * (1.0 + u * u) ** -3 / params.t


def hardening_q(kappa: float, params: MaterialParams) -> float:
    return hardening_qh(kappa, params) * softening_qs(kappa, params)


def yield_f(hw: HWCoords, kappa: float, params: MaterialParams) -> float:
    """Yield function; ``f <= 0`` is admissible."""
    qh = hardening_qh(kappa, params)
    qs = softening_qs(kappa, params)
    return yield_f_at(hw, qh, qh * qs, params)


def yield_f_at(hw: HWCoords, qh: float, q: float, params: MaterialParams) -> float:
    """Yield function at explicit hardening values ``q_h`` and ``q``."""
    fc = params.fc
    R = elliptic_R(hw.theta, params.e)
    return (1.5 * (hw.rho / fc) ** 2
            + qh * params.m * (hw.rho * R / (SQRT6 * fc) + hw.xi / (SQRT3 * fc))
            - q)


def yield_f_partials(hw: HWCoords, kappa: float, params: MaterialParams,
                     clamp: float = DERIV_CLAMP) -> tuple[float, float, float]:
    """Partial derivatives ``(df/dxi, df/drho, df/dkappa)`` at fixed theta."""
    fc, m = params.fc, params.m
    R = elliptic_R(hw.theta, params.e)
    qh = hardening_qh(kappa, params)
    qs = softening_qs(kappa, params)
    df_dxi = qh * m / (SQRT3 * fc)
    df_drho = 3.0 * hw.rho / fc ** 2 + qh * m * R / (SQRT6 * fc)
    bracket = m * (hw.rho * R / (SQRT6 * fc) + hw.xi / (SQRT3 * fc)) - qs
    df_dk = d_qh_dkappa(kappa, params, clamp) * bracket - qh * d_qs_dkappa(kappa, params)
    return df_dxi, df_drho, df_dk


def plastic_potential(hw: HWCoords, kappa: float, params: MaterialParams) -> float:
    """Scalar potential whose gradient is returned by :func:`potential_gradient`.

    The deviatoric terms enter with a positive sign so that plastic flow
    contracts the stress deviator.
    """
    scale = params.fc * math.sqrt(hardening_q(kappa, params))
    a = hw.rho / scale
    return params.gA * a * a + params.gB * a + hw.xi / scale


def potential_slopes(rho: float, kappa: float, params: MaterialParams) -> tuple[float, float]:
    """``(dg/dxi, dg/drho)`` at the given deviatoric radius."""
    fc = params.fc
    q = hardening_q(kappa, params)
    sq = math.sqrt(q)
    return 1.0 / (fc * sq), 2.0 * params.gA * rho / (fc * fc * q) + params.gB / (fc * sq)


def potential_gradient(hw: HWCoords, s_dir, kappa: float, params: MaterialParams,
                       rho_eps: float | None = None) -> np.ndarray:
    """Flow direction dg/dsigma as a stress-convention Voigt vector.

    ``s_dir`` is the stress deviator at the evaluation point.
    """
    if rho_eps is None:
        rho_eps = 1e-9 * params.fc
    if hw.rho <= rho_eps:
        raise DegenerateDirectionError(
            f"flow direction undefined on the hydrostatic axis (rho={hw.rho:.3e})")
    g_xi, g_rho = potential_slopes(hw.rho, kappa, params)
    return g_xi * IDENTITY / SQRT3 + g_rho * np.asarray(s_dir, dtype=float) / hw.rho


def apex_xi(kappa: float, params: MaterialParams) -> float:
    """Hydrostatic coordinate of the surface vertex."""
    return SQRT3 * params.fc / params.m * softening_qs(kappa, params)


def d_apex_xi(kappa: float, params: MaterialParams) -> float:
    return SQRT3 * params.fc / params.m * d_qs_dkappa(kappa, params)

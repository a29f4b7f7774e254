"""Implicit stress update: elastic predictor, smooth return and return-to-apex.

The smooth corrector projects the trial stress along the potential normal
frozen at the trial point. When the trial hydrostatic coordinate lies
beyond the surface vertex no such projection reaches the surface, and the
stress is returned to the vertex instead by a scalar Newton iteration on
the hardening variable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import surface as sf
from .surface import MaterialParams
from .tensors import (IDENTITY, SQRT3, ElasticModuli, HWCoords, deviator,
                      elastic_stress, to_hw)


class Mode(str, enum.Enum):
    ELASTIC = "Elastic"
    SMOOTH = "SmoothReturn"
    APEX = "ApexReturn"

    def __str__(self):
        return self.value


class IntegrationError(RuntimeError):
    """Base class for stress-update failures."""


class NonConvergenceError(IntegrationError):
    def __init__(self, what: str, iterations: int, residual: float):
        super().__init__(f"{what} did not converge in {iterations} iterations "
                         f"(residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class NegativeMultiplierError(IntegrationError):
    pass


class SignViolationError(IntegrationError):
    pass


class SingularTangentError(IntegrationError):
    pass


@dataclass(frozen=True)
class Tolerances:
    toll: float
    tol_f: float = 1e-9
    maxiter: int = 50
    rho_eps: float = 1e-9 * 32.0
    deriv_clamp: float = sf.DERIV_CLAMP

    def __post_init__(self):
        if not (self.toll > 0 and self.tol_f > 0 and self.rho_eps > 0
                and self.deriv_clamp > 0):
            raise ValueError("tolerances must be strictly positive")
        if self.maxiter < 1:
            raise ValueError("maxiter must be >= 1")

    @classmethod
    def default(cls, params: MaterialParams, **overrides) -> "Tolerances":
        kw = dict(toll=1e-9 * params.fc, rho_eps=1e-9 * params.fc)
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


@dataclass(frozen=True)
class InternalState:
    """Plastic strain (engineering shears) and hardening variable."""

    eps_p: np.ndarray = field(default_factory=lambda: np.zeros(6))
    kappa: float = 0.0


@dataclass(frozen=True)
class StepResult:
    """Outcome of one material-point increment.

    ``residual`` is the final |r| (MPa) of the apex iteration, the final
    |f| of the smooth return, or 0 for elastic steps.
    """

    sigma: np.ndarray
    state: InternalState
    tangent: np.ndarray
    mode: Mode
    iterations: int = 0
    residual: float = 0.0


def _resolve(params, moduli, tol):
    return (moduli if moduli is not None else params.moduli,
            tol if tol is not None else Tolerances.default(params))


def trial_state(eps_total_next, state_n: InternalState, moduli: ElasticModuli,
                rho_eps: float = 0.0) -> tuple[np.ndarray, HWCoords]:
    eps_e = np.asarray(eps_total_next, dtype=float) - state_n.eps_p
    sigma_tr = elastic_stress(eps_e, moduli)
    return sigma_tr, to_hw(sigma_tr, rho_eps)


def classify(hw_tr: HWCoords, kappa_n: float, params: MaterialParams,
             tol: Tolerances | None = None) -> Mode:
    tol_f = tol.tol_f if tol is not None else 1e-9
    if hw_tr.xi > sf.apex_xi(kappa_n, params):
        return Mode.APEX
    if sf.yield_f(hw_tr, kappa_n, params) > tol_f:
        return Mode.SMOOTH
    return Mode.ELASTIC


# --------------------------------------------------------------------------
# return to apex
# --------------------------------------------------------------------------

def apex_residual(kappa: float, xi_tr: float, kappa_n: float,
                  params: MaterialParams, moduli: ElasticModuli) -> tuple[float, float]:
    """Apex residual ``r`` (MPa) and its derivative with respect to kappa."""
    B = moduli.bulk_modified
    r = sf.apex_xi(kappa, params) - xi_tr + B * (kappa - kappa_n)
    dr = sf.d_apex_xi(kappa, params) + B
    return r, dr


def apex_return(xi_tr: float, kappa_n: float, params: MaterialParams,
                moduli: ElasticModuli | None = None, tol: Tolerances | None = None,
                ) -> tuple[float, float, int, float]:
    """Newton iteration on the apex residual starting from ``kappa_n``.

    Returns ``(kappa_next, xi_next, iterations, |r|)``.
    """
    moduli, tol = _resolve(params, moduli, tol)
    kappa = kappa_n
    r, dr = apex_residual(kappa, xi_tr, kappa_n, params, moduli)
    for it in range(1, tol.maxiter + 1):
        kappa = kappa - r / dr
        r, dr = apex_residual(kappa, xi_tr, kappa_n, params, moduli)
        if abs(r) < tol.toll:
            if kappa < kappa_n:
                raise SignViolationError(
                    f"apex return decreased kappa ({kappa_n:.6e} -> {kappa:.6e})")
            return kappa, sf.apex_xi(kappa, params), it, abs(r)
    raise NonConvergenceError("apex return", tol.maxiter, abs(r))


def apex_tangent(kappa_next: float, params: MaterialParams,
                 moduli: ElasticModuli | None = None) -> np.ndarray:
    moduli = moduli if moduli is not None else params.moduli
    B = moduli.bulk_modified
    denom = sf.d_apex_xi(kappa_next, params) + B
    if abs(denom) <= 1e-12 * B:
        raise SingularTangentError(
            f"apex tangent is singular at kappa={kappa_next:.6e}")
    return B / SQRT3 * (1.0 - B / denom) * np.outer(IDENTITY, IDENTITY)


def apex_update(kappa_next: float, xi_next: float, sigma_tr, state_n: InternalState,
                params: MaterialParams, moduli: ElasticModuli | None = None,
                iterations: int = 0, residual: float = 0.0) -> StepResult:
    moduli = moduli if moduli is not None else params.moduli
    sigma = (xi_next / SQRT3) * IDENTITY
    d_eps_p = moduli.compliance() @ (np.asarray(sigma_tr, dtype=float) - sigma)
    state = InternalState(state_n.eps_p + d_eps_p, kappa_next)
    return StepResult(sigma, state, apex_tangent(kappa_next, params, moduli),
                      Mode.APEX, iterations, residual)


def _apex_step(sigma_tr, hw_tr, state_n, params, moduli, tol) -> StepResult:
    kappa, xi, its, res = apex_return(hw_tr.xi, state_n.kappa, params, moduli, tol)
    return apex_update(kappa, xi, sigma_tr, state_n, params, moduli, its, res)


# --------------------------------------------------------------------------
# smooth return
# --------------------------------------------------------------------------

def safeguarded_newton(func, lo: float, hi: float, tol: float, maxiter: int,
                       ) -> tuple[float, float, int]:
    """Root of ``func`` on the bracket ``[lo, hi]``.

    ``func(x)`` returns ``(value, derivative)``. Newton steps are taken
    while they stay inside the bracket and at least halve the previous
    step; otherwise the bracket is bisected. Stops when ``|value| <= tol``.
    Returns ``(root, value, iterations)``.
    """
    f_lo, _ = func(lo)
    if abs(f_lo) <= tol:
        return lo, f_lo, 0
    f_hi, _ = func(hi)
    if abs(f_hi) <= tol:
        return hi, f_hi, 0
    if f_lo * f_hi > 0.0:
        raise ValueError("root is not bracketed")
    x = lo
    f, df = f_lo, func(lo)[1]
    dx_old = hi - lo
    for it in range(1, maxiter + 1):
        newton_ok = df != 0.0
        if newton_ok:
            step = f / df
            x_new = x - step
            newton_ok = lo < x_new < hi and abs(step) <= 0.5 * abs(dx_old)
        if not newton_ok:
            x_new = 0.5 * (lo + hi)
        dx_old = x_new - x
        x = x_new
        f, df = func(x)
        if abs(f) <= tol:
            return x, f, it
        if (f > 0.0) == (f_lo > 0.0):
            lo, f_lo = x, f
        else:
            hi = x
        if hi - lo <= 4.0 * np.finfo(float).eps * max(abs(hi), 1e-300):
            break
    raise NonConvergenceError("smooth return", it, abs(f))


def smooth_return(sigma_tr, hw_tr: HWCoords, state_n: InternalState,
                  params: MaterialParams, moduli: ElasticModuli | None = None,
                  tol: Tolerances | None = None) -> StepResult:
    """Return along the potential normal frozen at the trial point.

    The tangent of the returned result is left as the elastic stiffness;
    :func:`integrate_step` replaces it with :func:`smooth_tangent`.
    """
    moduli, tol = _resolve(params, moduli, tol)
    sigma_tr = np.asarray(sigma_tr, dtype=float)
    kappa_n = state_n.kappa
    s_tr = deviator(sigma_tr)
    n_g = sf.potential_gradient(hw_tr, s_tr, kappa_n, params, tol.rho_eps)
    g_xi, g_rho = sf.potential_slopes(hw_tr.rho, kappa_n, params)

    K3 = 3.0 * moduli.bulk
    G2 = 2.0 * moduli.shear
    dxi, drho, dkappa = K3 * g_xi, G2 * g_rho, SQRT3 * g_xi

    def along(dl):
        hw = HWCoords(hw_tr.xi - dl * dxi, max(0.0, hw_tr.rho - dl * drho), hw_tr.theta)
        kappa = kappa_n + dl * dkappa
        f = sf.yield_f(hw, kappa, params)
        f_xi, f_rho, f_k = sf.yield_f_partials(hw, kappa, params, tol.deriv_clamp)
        return f, -f_xi * dxi - f_rho * drho + f_k * dkappa

    if drho > 0.0:
        dl_max = hw_tr.rho / drho
    else:
        # no deviatoric flow: expand until the volumetric return crosses f = 0
        dl_max = 1e-6
        while along(dl_max)[0] > 0.0:
            dl_max *= 2.0
            if dl_max > 1e6:
                raise NegativeMultiplierError("no admissible plastic multiplier found")
    if along(dl_max)[0] > tol.tol_f:
        # the frozen normal cannot reach the surface before the axis
        return _apex_step(sigma_tr, hw_tr, state_n, params, moduli, tol)

    dl, f_end, its = safeguarded_newton(along, 0.0, dl_max, tol.tol_f, tol.maxiter)
    if dl < 0.0:
        raise NegativeMultiplierError(f"negative plastic multiplier {dl:.3e}")

    n_eng = n_g.copy()
    n_eng[3:] *= 2.0
    d_eps_p = dl * n_eng
    sigma = sigma_tr - elastic_stress(d_eps_p, moduli)
    kappa = kappa_n + dl * dkappa
    state = InternalState(state_n.eps_p + d_eps_p, kappa)
    hw = to_hw(sigma, tol.rho_eps)
    if hw.xi > sf.apex_xi(kappa, params):
        return _apex_step(sigma_tr, hw_tr, state_n, params, moduli, tol)
    return StepResult(sigma, state, moduli.stiffness(), Mode.SMOOTH, its, abs(f_end))


def _stress_update(sigma_tr, state_n, params, moduli, tol) -> StepResult:
    """Dispatch without the (possibly expensive) smooth tangent."""
    hw_tr = to_hw(sigma_tr, tol.rho_eps)
    mode = classify(hw_tr, state_n.kappa, params, tol)
    if mode is Mode.ELASTIC:
        return StepResult(np.asarray(sigma_tr, dtype=float), state_n,
                          moduli.stiffness(), Mode.ELASTIC, 0, 0.0)
    if mode is Mode.APEX or hw_tr.rho <= tol.rho_eps:
        return _apex_step(sigma_tr, hw_tr, state_n, params, moduli, tol)
    return smooth_return(sigma_tr, hw_tr, state_n, params, moduli, tol)


def smooth_tangent(sigma_tr, state_n: InternalState, params: MaterialParams,
                   moduli: ElasticModuli | None = None, tol: Tolerances | None = None,
                   h: float = 1e-7) -> np.ndarray:
    """Central-difference consistent tangent around a trial stress.

    Column ``j`` perturbs the total strain by ``h`` in component ``j``
    (engineering shear for j >= 3) and re-runs the corrector from
    ``state_n``.
    """
    moduli, tol = _resolve(params, moduli, tol)
    sigma_tr = np.asarray(sigma_tr, dtype=float)
    C = moduli.stiffness()
    D = np.empty((6, 6))
    for j in range(6):
        plus = _stress_update(sigma_tr + h * C[:, j], state_n, params, moduli, tol)
        minus = _stress_update(sigma_tr - h * C[:, j], state_n, params, moduli, tol)
        D[:, j] = (plus.sigma - minus.sigma) / (2.0 * h)
    return D


def integrate_step(eps_total_next, state_n: InternalState, params: MaterialParams,
                   moduli: ElasticModuli | None = None,
                   tol: Tolerances | None = None) -> StepResult:
    """Advance one material point to the total strain ``eps_total_next``."""
    moduli, tol = _resolve(params, moduli, tol)
    sigma_tr, _ = trial_state(eps_total_next, state_n, moduli, tol.rho_eps)
    result = _stress_update(sigma_tr, state_n, params, moduli, tol)
    if result.mode is Mode.SMOOTH:
        tangent = smooth_tangent(sigma_tr, state_n, params, moduli, tol)
        result = StepResult(result.sigma, result.state, tangent, result.mode,
                            result.iterations, result.residual)
    return result

"""Single material point under mixed strain/stress control.

A program is a sequence of phases. In each phase every Voigt component
is either strain- or stress-controlled and its target is approached by
linear interpolation from the value reached at the end of the previous
phase. Stress-controlled components are satisfied by an outer Newton
iteration on the free strains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import surface as sf
from .return_mapping import (InternalState, Mode, StepResult, Tolerances,
                             integrate_step)
from .surface import TABLE1, MaterialParams
from .tensors import ElasticModuli, to_hw

STRAIN = "strain"
STRESS = "stress"

# edge of the reference cube specimen, mm
CUBE_EDGE = 100.0


class OuterNonConvergenceError(RuntimeError):
    def __init__(self, increment: int, residual: float):
        super().__init__(f"mixed-control iteration failed at increment {increment} "
                         f"(stress residual {residual:.3e} MPa)")
        self.increment = increment
        self.residual = residual


@dataclass(frozen=True)
class Control:
    kind: str
    target: float

    def __post_init__(self):
        if self.kind not in (STRAIN, STRESS):
            raise ValueError(f"control kind must be 'strain' or 'stress', got {self.kind!r}")


@dataclass(frozen=True)
class ControlStep:
    """One loading phase: six component controls reached over ``increments``."""

    controls: tuple[Control, ...]
    increments: int = 200
    label: str = ""

    def __post_init__(self):
        if len(self.controls) != 6:
            raise ValueError("a control step needs exactly 6 component controls")
        if self.increments < 1:
            raise ValueError("increments must be >= 1")

    @property
    def stress_mask(self) -> np.ndarray:
        return np.array([c.kind == STRESS for c in self.controls])

    @property
    def targets(self) -> np.ndarray:
        return np.array([c.target for c in self.controls], dtype=float)


@dataclass(frozen=True)
class LoadingProgram:
    steps: tuple[ControlStep, ...]
    label: str = "custom"
    material: MaterialParams | None = None


@dataclass(frozen=True)
class StepRecord:
    step: int
    phase: int
    eps: np.ndarray
    sigma: np.ndarray
    xi: float
    rho: float
    theta: float
    kappa: float
    qh: float
    qs: float
    xia: float
    mode: Mode
    iterations: int

    @property
    def mean_stress(self) -> float:
        return float(self.sigma[:3].sum() / 3.0)


def strains(e11, e22, e33, g12=0.0, g13=0.0, g23=0.0) -> tuple[Control, ...]:
    return tuple(Control(STRAIN, v) for v in (e11, e22, e33, g12, g13, g23))


def make_record(step: int, phase: int, eps, result: StepResult,
                params: MaterialParams, rho_eps: float = 0.0) -> StepRecord:
    hw = to_hw(result.sigma, rho_eps)
    k = result.state.kappa
    return StepRecord(step, phase, np.array(eps, dtype=float), np.array(result.sigma),
                      hw.xi, hw.rho, hw.theta, k,
                      sf.hardening_qh(k, params), sf.softening_qs(k, params),
                      sf.apex_xi(k, params), result.mode, result.iterations)


def _fd_tangent(eps, free, state, params, moduli, tol, h=1e-7):
    J = np.empty((len(free), len(free)))
    for col, j in enumerate(free):
        e_p, e_m = eps.copy(), eps.copy()
        e_p[j] += h
        e_m[j] -= h
        sp = integrate_step(e_p, state, params, moduli, tol).sigma
        sm = integrate_step(e_m, state, params, moduli, tol).sigma
        J[:, col] = (sp[free] - sm[free]) / (2.0 * h)
    return J


def _predict(eps_new, eps, sigma, sig_target, mask, tangent, moduli):
    """Tangent predictor for the stress-controlled (free) strains."""
    free, fixed = np.flatnonzero(mask), np.flatnonzero(~mask)
    D = tangent
    if np.linalg.cond(D[np.ix_(free, free)]) > 1e12:
        D = moduli.stiffness()
    d_eps = eps_new - eps
    rhs = sig_target[free] - sigma[free] - D[np.ix_(free, fixed)] @ d_eps[fixed]
    out = eps_new.copy()
    out[free] += np.linalg.solve(D[np.ix_(free, free)], rhs)
    return out


def _solve_mixed(eps_guess, sig_target, mask, state, params, moduli, tol,
                 increment, max_iter=25):
    """Outer Newton on the stress-controlled components."""
    free = np.flatnonzero(mask)
    atol = 1e-6 * params.fc
    eps = eps_guess.copy()
    result = integrate_step(eps, state, params, moduli, tol)
    if free.size == 0:
        return eps, result
    R = result.sigma[free] - sig_target[free]
    norm = float(np.max(np.abs(R)))
    for _ in range(max_iter):
        if norm <= atol:
            return eps, result
        J = result.tangent[np.ix_(free, free)]
        if np.linalg.cond(J) > 1e12:
            J = _fd_tangent(eps, free, state, params, moduli, tol)
        try:
            delta = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError:
            break
        # halve the correction while the residual grows
        for _ in range(30):
            trial = eps.copy()
            trial[free] += delta
            res_t = integrate_step(trial, state, params, moduli, tol)
            R_t = res_t.sigma[free] - sig_target[free]
            norm_t = float(np.max(np.abs(R_t)))
            if norm_t < norm or norm_t <= atol:
                break
            delta *= 0.5
        eps, result, R, norm = trial, res_t, R_t, norm_t
    if norm <= atol:
        return eps, result
    raise OuterNonConvergenceError(increment, norm)


def run_program(program: LoadingProgram, params: MaterialParams | None = None,
                moduli: ElasticModuli | None = None, tol: Tolerances | None = None,
                ) -> list[StepRecord]:
    params = params or program.material or TABLE1
    moduli = moduli or params.moduli
    tol = tol or Tolerances.default(params)

    eps = np.zeros(6)
    sigma = np.zeros(6)
    state = InternalState()
    tangent = moduli.stiffness()
    records: list[StepRecord] = []
    step = 0
    for phase, ctrl in enumerate(program.steps, start=1):
        mask = ctrl.stress_mask
        strain_idx = ~mask
        eps0, sig0 = eps.copy(), sigma.copy()
        targets = ctrl.targets
        n = ctrl.increments
        for i in range(1, n + 1):
            step += 1
            frac = i / n
            eps_new = eps.copy()
            eps_new[strain_idx] = eps0[strain_idx] + (targets[strain_idx] - eps0[strain_idx]) * frac
            sig_target = np.zeros(6)
            sig_target[mask] = sig0[mask] + (targets[mask] - sig0[mask]) * frac
            if mask.any():
                eps_new = _predict(eps_new, eps, sigma, sig_target, mask, tangent, moduli)
            eps_new, result = _solve_mixed(eps_new, sig_target, mask, state,
                                           params, moduli, tol, step)
            records.append(make_record(step, phase, eps_new, result, params, tol.rho_eps))
            eps, sigma, state, tangent = eps_new, result.sigma, result.state, result.tangent
    return records


# --------------------------------------------------------------------------
# validation scenarios
# --------------------------------------------------------------------------

def _confinement(pressure, increments, label="confinement"):
    """Hydrostatic stress ramp to ``pressure`` (MPa), shears held at zero strain."""
    controls = tuple(Control(STRESS, pressure) for _ in range(3)) + tuple(
        Control(STRAIN, 0.0) for _ in range(3))
    return ControlStep(controls, increments, label)


def scenario_2_1(params: MaterialParams | None = None, increments: int = 200,
                 strain: float = 3e-4) -> LoadingProgram:
    """Hydrostatic tension with perfectly plastic apex (q_s stays 1)."""
    params = params or TABLE1
    step = ControlStep(strains(strain, strain, strain), increments, "hydrostatic tension")
    return LoadingProgram((step,), "2.1", params)


def scenario_2_2(params: MaterialParams | None = None, increments: int = 200,
                 unload: bool = False, strain: float | None = None) -> LoadingProgram:
    """Hydrostatic tension with softening (k1d = 1e-4).

    The unloading variant stops at a softened state and then unloads under
    stress control to a stress-free state.
    """
    params = (params or TABLE1).with_(k1d=1e-4)
    if unload:
        peak = 1e-3 if strain is None else strain
        steps = (ControlStep(strains(peak, peak, peak), increments, "hydrostatic tension"),
                 _confinement(0.0, increments, "unloading"))
        return LoadingProgram(steps, "2.2-unload", params)
    peak = 5e-3 if strain is None else strain
    step = ControlStep(strains(peak, peak, peak), increments, "hydrostatic tension")
    return LoadingProgram((step,), "2.2", params)


def _preconfined(label, params, axial_mm, transversal_mm, increments):
    axial = axial_mm / CUBE_EDGE
    trans = transversal_mm / CUBE_EDGE
    steps = (_confinement(-8.0, increments),
             ControlStep(strains(trans, trans, axial), increments, "deviatoric tension"))
    return LoadingProgram(steps, label, params)


def scenario_2_3(params: MaterialParams | None = None, increments: int = 200) -> LoadingProgram:
    """Confinement at -8 MPa, then axial/transversal stretching (q_s stays 1).

    Displacements of 0.05 mm (axial, z) and 0.02 mm (x, y) on the 100 mm
    cube are total values, so the strain ramps start from the confined state.
    """
    return _preconfined("2.3", params or TABLE1, 0.05, 0.02, increments)


def scenario_2_4(params: MaterialParams | None = None, increments: int = 200) -> LoadingProgram:
    """As 2.3 with softening: k1d = 8e-5, t = 1e-3, displacements 0.075/0.005 mm."""
    params = (params or TABLE1).with_(k1d=8e-5, t=1e-3)
    return _preconfined("2.4", params, 0.075, 0.005, increments)


SCENARIOS = {
    "2.1": scenario_2_1,
    "2.2": scenario_2_2,
    "2.2-unload": lambda params=None, increments=200: scenario_2_2(params, increments, unload=True),
    "2.3": scenario_2_3,
    "2.4": scenario_2_4,
}


def scenario(name: str, params: MaterialParams | None = None,
             increments: int = 200) -> LoadingProgram:
    try:
        build = SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    return build(params, increments)


def first_index(records, mode: Mode):
    for k, rec in enumerate(records):
        if rec.mode is mode:
            return k
    return None


def phase_fraction(records, k: int) -> float:
    """Position of record ``k`` within its phase, in (0, 1]."""
    phase = records[k].phase
    in_phase = [r for r in records if r.phase == phase]
    idx = next(i for i, r in enumerate(in_phase) if r.step == records[k].step)
    return (idx + 1) / len(in_phase)


def yield_value(rec: StepRecord, params: MaterialParams) -> float:
    hw = to_hw(rec.sigma)
    return sf.yield_f(hw, rec.kappa, params)

import math

import numpy as np
import pytest

from mwapex import driver as drv
from mwapex.driver import (STRESS, Control, ControlStep, LoadingProgram,
                           OuterNonConvergenceError, run_program, scenario,
                           strains)
from mwapex.return_mapping import InternalState, Mode, integrate_step
from mwapex.surface import TABLE1
from mwapex.tensors import to_hw

M = TABLE1.moduli


@pytest.fixture(scope="module")
def runs():
    return {name: (scenario(name), run_program(scenario(name))) for name in drv.SCENARIOS}


def test_all_strain_elastic_matches_hooke():
    target = np.array([1e-5, -2e-5, 3e-6, 4e-6, -1e-6, 2e-6])
    prog = LoadingProgram((ControlStep(strains(*target), 10),))
    recs = run_program(prog)
    assert len(recs) == 10
    C = M.stiffness()
    for r in recs:
        assert r.mode is Mode.ELASTIC
        np.testing.assert_allclose(r.sigma, C @ r.eps, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(recs[-1].eps, target, rtol=1e-15)


def test_zero_program_gives_zero_records():
    recs = run_program(LoadingProgram((ControlStep(strains(0, 0, 0), 5),)))
    for r in recs:
        assert np.all(r.sigma == 0.0) and np.all(r.eps == 0.0)
        assert r.kappa == 0.0


def test_confinement_phase_reaches_minus_eight():
    recs = run_program(LoadingProgram((drv._confinement(-8.0, 20),)))
    last = recs[-1]
    np.testing.assert_allclose(last.sigma[:3], -8.0, atol=1e-6 * TABLE1.fc)
    assert last.xi == pytest.approx(-8.0 * math.sqrt(3), abs=1e-4)
    assert last.xi == pytest.approx(-13.856, abs=1e-3)
    assert last.rho == pytest.approx(0.0, abs=1e-9)


def test_mixed_uniaxial_stress():
    # uniaxial strain along 33 with free lateral stresses held at zero
    controls = (Control(STRESS, 0.0), Control(STRESS, 0.0),
                Control("strain", 5e-5)) + strains(0, 0, 0)[3:]
    recs = run_program(LoadingProgram((ControlStep(controls, 5),)))
    last = recs[-1]
    assert last.sigma[2] == pytest.approx(TABLE1.E * 5e-5, rel=1e-6)
    assert abs(last.sigma[0]) <= 1e-6 * TABLE1.fc
    assert last.eps[0] == pytest.approx(-TABLE1.nu * 5e-5, rel=1e-6)


def test_control_step_validation():
    with pytest.raises(ValueError):
        ControlStep(strains(0, 0, 0)[:5])
    with pytest.raises(ValueError):
        ControlStep(strains(0, 0, 0), increments=0)
    with pytest.raises(ValueError):
        Control("force", 1.0)


def test_outer_nonconvergence_is_reported():
    # a hydrostatic stress target beyond the apex cannot be reached
    prog = LoadingProgram((drv._confinement(10.0, 4),))
    with pytest.raises(OuterNonConvergenceError) as info:
        run_program(prog)
    assert info.value.increment >= 1
    assert info.value.residual > 0


def test_unknown_scenario():
    with pytest.raises(KeyError):
        scenario("9.9")


@pytest.mark.parametrize("name", list(drv.SCENARIOS))
def test_replay_is_bit_identical(runs, name):
    prog, recs = runs[name]
    state = InternalState()
    for r in recs:
        res = integrate_step(r.eps, state, prog.material)
        assert np.array_equal(res.sigma, r.sigma)
        assert res.mode is r.mode
        state = res.state


@pytest.mark.parametrize("name", list(drv.SCENARIOS))
def test_step_size_robustness(runs, name):
    final = runs[name][1][-1].sigma
    coarse = run_program(scenario(name, increments=100))[-1].sigma
    scale = max(float(np.max(np.abs(final))), 1e-9)
    assert np.max(np.abs(coarse - final)) < 0.01 * max(scale, TABLE1.ft)


@pytest.mark.parametrize("name", ["2.1", "2.2", "2.2-unload"])
def test_hydrostatic_paths_stay_hydrostatic(runs, name):
    for r in runs[name][1]:
        assert np.all(r.sigma[3:] == 0.0)
        assert r.sigma[0] == r.sigma[1] == r.sigma[2]


def test_2_3_rho_monotone_after_yield(runs):
    recs = runs["2.3"][1]
    plastic = [r for r in recs if r.mode is not Mode.ELASTIC]
    assert plastic
    for a, b in zip(plastic, plastic[1:]):
        assert b.rho <= a.rho + 1e-12


@pytest.mark.parametrize("name", list(drv.SCENARIOS))
def test_record_coordinates_consistent(runs, name):
    for r in runs[name][1]:
        hw = to_hw(r.sigma)
        assert abs(hw.xi - r.xi) <= 1e-10
        assert abs(hw.rho - r.rho) <= 1e-10


def test_2_1_hardening_variable_grows_on_plateau(runs):
    recs = [r for r in runs["2.1"][1] if r.mode is Mode.APEX]
    assert recs[0].qh >= TABLE1.qh0
    assert all(b.kappa > a.kappa for a, b in zip(recs, recs[1:]))
    assert all(b.qh >= a.qh for a, b in zip(recs, recs[1:]))


def test_2_2_softening_onset_at_k1d(runs):
    recs = runs["2.2"][1]
    for r in recs:
        if r.kappa <= 1e-4:
            assert r.qs == 1.0
        else:
            assert r.qs < 1.0


def test_2_4_axial_stress_decays_after_peak(runs):
    recs = runs["2.4"][1]
    axial = np.array([r.sigma[2] for r in recs if r.phase == 2])
    k = int(np.argmax(axial))
    assert k < len(axial) - 1
    assert axial[-1] < axial[k]
    assert np.all(np.diff(axial[k:]) <= 1e-9)


def test_phase_helpers(runs):
    recs = runs["2.3"][1]
    k = drv.first_index(recs, Mode.APEX)
    assert recs[k].phase == 2
    assert 0 < drv.phase_fraction(recs, k) <= 1
    assert drv.first_index(recs[:5], Mode.APEX) is None
    assert abs(drv.yield_value(recs[k], TABLE1)) < 1e-8

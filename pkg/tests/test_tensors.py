import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mwapex.tensors import (ElasticModuli, cos3theta, elastic_strain,
                            elastic_stress, invariants, matrix_to_voigt,
                            to_hw, trace, voigt_to_matrix)

MODULI = ElasticModuli(30000.0, 0.15)

comp = st.floats(-100.0, 100.0, allow_nan=False, allow_infinity=False)
tensors = arrays(float, 6, elements=comp)


def test_invariants_hydrostatic():
    I1, J2, J3 = invariants([5.0, 5.0, 5.0, 0, 0, 0])
    assert I1 == 15.0
    assert J2 == pytest.approx(0.0, abs=1e-12)
    assert J3 == pytest.approx(0.0, abs=1e-12)


def test_invariants_uniaxial_compression():
    # deviator (-64/3, 32/3, 32/3)
    I1, J2, J3 = invariants([-32.0, 0, 0, 0, 0, 0])
    assert I1 == -32.0
    assert J2 == pytest.approx(1024.0 / 3.0, rel=1e-14)
    assert J3 == pytest.approx(-2.0 * 32.0 ** 3 / 27.0, rel=1e-14)
    assert J3 == pytest.approx(-2427.26, abs=0.01)


def test_invariants_zero():
    assert invariants(np.zeros(6)) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("sigma, xi, rho, theta", [
    ([2.0, 2.0, 2.0, 0, 0, 0], 2.0 * math.sqrt(3), 0.0, 0.0),
    ([-32.0, 0, 0, 0, 0, 0], -32 / math.sqrt(3), 32 * math.sqrt(2 / 3), math.pi / 3),
    ([3.0, 0, 0, 0, 0, 0], 3 / math.sqrt(3), 3 * math.sqrt(2 / 3), 0.0),
])
def test_to_hw_examples(sigma, xi, rho, theta):
    hw = to_hw(sigma)
    assert hw.xi == pytest.approx(xi, rel=1e-14)
    assert hw.rho == pytest.approx(rho, rel=1e-12, abs=1e-14)
    assert hw.theta == pytest.approx(theta, abs=1e-7)


def test_to_hw_rounded_values():
    hw = to_hw([-32.0, 0, 0, 0, 0, 0])
    assert hw.xi == pytest.approx(-18.475, abs=1e-3)
    assert hw.rho == pytest.approx(26.128, abs=1e-3)


def test_theta_zero_below_rho_eps():
    hw = to_hw([1.0, 1.0, 1.0 + 1e-12, 0, 0, 0], rho_eps=1e-9)
    assert hw.theta == 0.0


def test_elastic_examples():
    assert np.all(elastic_stress(np.zeros(6), MODULI) == 0.0)
    a = 1e-4
    sig = elastic_stress([a, a, a, 0, 0, 0], MODULI)
    # B* = 30000 / (3 * 0.7)
    assert MODULI.bulk == pytest.approx(14285.714285714, rel=1e-12)
    np.testing.assert_allclose(sig[:3], 3 * MODULI.bulk * a, rtol=1e-13)
    np.testing.assert_allclose(sig[:3], 4.2857142857, rtol=1e-10)
    assert np.all(sig[3:] == 0.0)


def test_modified_bulk():
    assert MODULI.bulk_modified == math.sqrt(3) * MODULI.bulk
    assert MODULI.bulk_modified == pytest.approx(24743.6, abs=0.05)


def test_engineering_shear():
    sig = elastic_stress([0, 0, 0, 2e-4, 0, 0], MODULI)
    assert sig[3] == pytest.approx(MODULI.shear * 2e-4)


def test_stiffness_matches_function():
    eps = np.array([1e-4, -2e-4, 3e-5, 1e-4, -5e-5, 2e-5])
    np.testing.assert_allclose(MODULI.stiffness() @ eps, elastic_stress(eps, MODULI), rtol=1e-13)
    np.testing.assert_allclose(MODULI.compliance() @ MODULI.stiffness(), np.eye(6), atol=1e-12)


@pytest.mark.parametrize("E, nu", [(0.0, 0.2), (1.0, 0.5), (1.0, 0.0)])
def test_moduli_validation(E, nu):
    with pytest.raises(ValueError):
        ElasticModuli(E, nu)


@given(tensors, st.booleans())
def test_matrix_round_trip(v, strain):
    m = voigt_to_matrix(v, strain)
    assert np.allclose(m, m.T)
    np.testing.assert_allclose(matrix_to_voigt(m, strain), v, rtol=1e-15, atol=0)
    assert trace(v) == pytest.approx(v[0] + v[1] + v[2])


@given(tensors)
def test_rho_squared_is_twice_j2(v):
    _, J2, _ = invariants(v)
    rho = to_hw(v).rho
    assert rho ** 2 == pytest.approx(2 * J2, rel=1e-12, abs=1e-300)


@given(tensors)
def test_invariants_match_eigenvalues(v):
    lam = np.linalg.eigvalsh(voigt_to_matrix(v))
    dev = lam - lam.mean()
    I1, J2, J3 = invariants(v)
    scale = max(1.0, float(np.max(np.abs(v))))
    assert I1 == pytest.approx(lam.sum(), abs=1e-10 * scale)
    assert J2 == pytest.approx(0.5 * np.sum(dev ** 2), abs=1e-9 * scale ** 2)
    assert J3 == pytest.approx(np.prod(dev), abs=1e-8 * scale ** 3)


@given(tensors)
def test_isotropy_under_axis_permutation(v):
    # swap axes 1 and 2: (11,22,33,12,13,23) -> (22,11,33,12,23,13)
    w = v[[1, 0, 2, 3, 5, 4]]
    a, b = to_hw(v), to_hw(w)
    assert a.xi == pytest.approx(b.xi, abs=1e-12)
    assert a.rho == pytest.approx(b.rho, rel=1e-12, abs=1e-12)
    if a.rho > 1e-3:
        assert a.theta == pytest.approx(b.theta, abs=1e-6)


@given(tensors)
def test_cos3theta_range(v):
    c = cos3theta(v)
    assert -1 - 1e-9 <= c <= 1 + 1e-9
    hw = to_hw(v)
    assert hw.rho >= 0.0
    assert 0.0 <= hw.theta <= math.pi / 3 + 1e-15


@settings(max_examples=200)
@given(arrays(float, 6, elements=st.floats(-1e-2, 1e-2)),
       st.floats(1e3, 1e5), st.floats(0.01, 0.49))
def test_elastic_round_trip(eps, E, nu):
    mod = ElasticModuli(E, nu)
    back = elastic_strain(elastic_stress(eps, mod), mod)
    np.testing.assert_allclose(back, eps, rtol=1e-12, atol=1e-12 * float(np.max(np.abs(eps)) + 1e-300))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from membrane_wrinkle.bench.verify import material_fd_errors, random_strains, split_completeness_errors
from membrane_wrinkle.errors import ConfigError
from membrane_wrinkle.material import (
    ElasticParams,
    WrinkleState,
    classify,
    energy_split,
    evaluate,
    heaviside_minus,
    heaviside_plus,
    standard_svk,
    stress_split,
    svk_tangent,
    tangent_split,
    wrinkle_intensity,
)
from membrane_wrinkle.tensor_spectral import Spectral2, build_G, build_Q, ddot, spectral_decompose, split_tensor, sym2

# nu = 0 and E = 2 give mu = 1, lambda = 0
UNIT = ElasticParams(2.0, 0.0)
E_WR = sym2(0.02, -0.01)


def _sp(e1, e2):
    return Spectral2(e1, e2, np.array([1.0, 0.0]), np.array([0.0, 1.0]))


def test_energy_split_example():
    pp, pm = energy_split(E_WR, UNIT)
    assert_allclose([pp, pm], [4.0e-4, 1.0e-4], rtol=1e-14)
    assert_allclose(pp + pm, standard_svk(E_WR, UNIT)[0], rtol=1e-14)


def test_zero_strain_gives_zero():
    p = ElasticParams(10.0, 0.3)
    assert energy_split(np.zeros((2, 2)), p) == (0.0, 0.0)
    Sp, Sm = stress_split(np.zeros((2, 2)), p)
    assert not Sp.any() and not Sm.any()
    psi, S, _ = standard_svk(np.zeros((2, 2)), p)
    assert psi == 0.0 and not S.any()


def test_fully_tensile_has_no_negative_part():
    p = ElasticParams(10.0, 0.3)
    E = sym2(0.01, 0.02)
    assert energy_split(E, p)[1] == 0.0
    assert not stress_split(E, p)[1].any()
    Cp, Cm = tangent_split(E, p)
    assert not Cm.any()
    assert_allclose(Cp, svk_tangent(p), rtol=1e-14, atol=1e-14)


def test_stress_split_example():
    Sp, Sm = stress_split(E_WR, UNIT)
    assert_allclose(Sp, np.diag([0.04, 0.0]), atol=1e-17)
    assert_allclose(Sm, np.diag([0.0, -0.02]), atol=1e-17)
    assert_allclose(standard_svk(E_WR, UNIT)[1], np.diag([0.04, -0.02]))


def test_tangent_split_wrinkled_example():
    e1, e2 = 0.02, -0.01
    M1 = np.diag([1.0, 0.0])
    M2 = np.diag([0.0, 1.0])
    expected = 2.0 * (build_Q(np.array([1.0, 0.0])) + e1 / (2 * (e1 - e2)) * (build_G(M1, M2) + build_G(M2, M1)))
    Cp, _ = tangent_split(E_WR, UNIT)
    assert_allclose(Cp, expected, atol=1e-14)
    _, ec = material_fd_errors(E_WR[None], UNIT)
    assert ec <= 1e-5


def test_coincident_eigenvalues_use_limit_branch():
    p = ElasticParams(10.0, 0.3)
    c = 0.01
    Cp, Cm = tangent_split(c * np.eye(2), p)
    assert_allclose(Cp, svk_tangent(p), rtol=1e-14)
    assert not Cm.any()
    # approaching coincidence from a split pair recovers the same tangent
    near = tangent_split(sym2(c + 1e-6, c - 1e-6), p)[0]
    assert_allclose(near, svk_tangent(p), rtol=1e-6, atol=1e-12)


def test_taut_strain_tangent_is_svk():
    rng = np.random.default_rng(11)
    p = ElasticParams(5.0, 0.25)
    for E in random_strains(200, rng):
        if spectral_decompose(E).e2 <= 0:
            continue
        Cp, Cm = tangent_split(E, p)
        assert_allclose(Cp, svk_tangent(p), rtol=1e-10, atol=1e-12)
        assert not Cm.any()


@pytest.mark.parametrize("nu", [0.0, 0.3])
def test_variational_consistency(nu):
    Es = random_strains(200, np.random.default_rng(2))
    es, ec = material_fd_errors(Es, ElasticParams(1.0, nu))
    assert es <= 1e-5
    assert ec <= 1e-4


def test_split_completeness():
    Es = random_strains(500, np.random.default_rng(5))
    e_psi, e_S, e_C, e_eta = split_completeness_errors(Es, ElasticParams(3.0, 0.3))
    assert max(e_psi, e_S, e_C) <= 1e-10
    assert e_eta <= 1e-12


@pytest.mark.parametrize(
    "eta, S22",
    [(0.0, 0.0), (1e-4, -2e-6), (1.0, -0.02)],
)
def test_evaluate_degradation(eta, S22):
    r = evaluate(E_WR, UNIT.with_eta(eta))
    assert_allclose(r.S, np.diag([0.04, S22]), atol=1e-17)
    assert r.state == WrinkleState.WRINKLED
    assert_allclose(r.wrinkle_dir, [1.0, 0.0])
    assert_allclose(r.intensity, 0.01)


def test_compressive_stress_linear_in_eta():
    p = ElasticParams(4.0, 0.3)
    E = sym2(0.03, -0.02, 0.004)
    Sm = stress_split(E, p)[1]
    etas = np.linspace(0.0, 1.0, 6)
    S = np.array([evaluate(E, p.with_eta(e), tangent=False).S for e in etas])
    slope = (S[1:] - S[:-1]) / (etas[1] - etas[0])
    assert_allclose(slope, np.broadcast_to(Sm, slope.shape), rtol=1e-9, atol=1e-15)


@pytest.mark.parametrize(
    "e1, e2, state, intensity",
    [
        (0.01, 0.005, WrinkleState.TAUT, 0.0),
        (0.01, -0.005, WrinkleState.WRINKLED, 0.005),
        (0.01, 0.0, WrinkleState.WRINKLED, 0.0),
        (-0.001, -0.005, WrinkleState.SLACK, 0.0),
        (0.0, -0.005, WrinkleState.SLACK, 0.0),
    ],
)
def test_classify_and_intensity(e1, e2, state, intensity):
    sp = _sp(e1, e2)
    assert classify(sp) is state
    assert wrinkle_intensity(sp) == pytest.approx(intensity, abs=1e-18)


def test_heaviside_partition():
    x = np.array([-1.0, -1e-300, 0.0, 1e-300, 2.0])
    assert_allclose(heaviside_plus(x) + heaviside_minus(x), 1.0)
    assert heaviside_plus(0.0) == 1.0


def test_complementarity_at_zero_poisson():
    Es = random_strains(300, np.random.default_rng(8))
    p = ElasticParams(7.0, 0.0)
    Sp, Sm = stress_split(Es, p)
    sp = spectral_decompose(Es)
    Ep, Em = split_tensor(sp)
    assert np.abs(ddot(Sp, Em)).max() <= 1e-12
    assert np.abs(ddot(Sm, Ep)).max() <= 1e-12


@settings(max_examples=60)
@given(
    st.floats(0, 2 * np.pi),
    st.floats(-0.1, 0.1),
    st.floats(-0.1, 0.1),
    st.floats(-0.1, 0.1),
)
def test_objectivity(phi, a, b, c):
    p = ElasticParams(3.0, 0.3)
    Q = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
    E = sym2(a, b, c)
    r0 = evaluate(E, p)
    r1 = evaluate(Q.T @ E @ Q, p)
    assert_allclose(r1.S, Q.T @ r0.S @ Q, atol=1e-12)
    assert_allclose([r1.psi_plus, r1.psi_minus], [r0.psi_plus, r0.psi_minus], atol=1e-12)
    sp0 = r0.spectral
    if sp0.e1 - sp0.e2 > 1e-6 and min(abs(sp0.e1), abs(sp0.e2)) > 1e-9:
        assert r1.state == r0.state
        # eigenvectors are defined up to sign
        d = Q.T @ r0.wrinkle_dir
        assert abs(abs(d @ r1.wrinkle_dir) - 1.0) <= 1e-12


def test_batch_matches_pointwise():
    Es = random_strains(20, np.random.default_rng(9))
    p = ElasticParams(2.0, 0.2, 1e-3)
    batch = evaluate(Es, p)
    for i, E in enumerate(Es):
        one = evaluate(E, p)
        assert_allclose(batch.S[i], one.S, rtol=1e-15)
        assert_allclose(batch.C[i], one.C, rtol=1e-15)
        assert batch.state[i] == one.state


@pytest.mark.parametrize(
    "kwargs",
    [dict(E_mod=0.0, nu=0.3), dict(E_mod=1.0, nu=0.5), dict(E_mod=1.0, nu=-1.0), dict(E_mod=1.0, nu=0.0, eta=-0.1),
     dict(E_mod=1.0, nu=0.0, eta=1.5)],
)
def test_params_validation(kwargs):
    with pytest.raises(ConfigError):
        ElasticParams(**kwargs)


def test_lame_constants():
    p = ElasticParams(200.0, 0.25)
    assert p.mu == pytest.approx(80.0)
    assert p.lambda_ps == pytest.approx(200.0 * 0.25 / (1 - 0.25**2))

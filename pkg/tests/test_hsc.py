import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyqft.hsc import (CENTER_KINDS, SchwartzNormSpec, ShellMeasure, TwoPointIntegrals,
                         bound_ratio_study, check_m_nonnegative, hsc_split_check,
                         local_integrability_study, m_measure_density, m_measure_singular,
                         make_family, offshell_density, p_seminorm, pairing, schwartz_norm,
                         shell_pairing_spherical, split_family)
from levyqft.testfunctions import TestFunction, UnsupportedTestFunction
from levyqft.wightman import minkowski_square


def test_norm_of_unit_gaussian():
    f = TestFunction.gaussian([0.0], [1.0])
    assert schwartz_norm(f, SchwartzNormSpec(0, 0), 1, 0) == pytest.approx(1.0, rel=1e-12)


def test_weighted_norm_of_unit_gaussian():
    f = TestFunction.gaussian([0.0], [1.0])
    assert schwartz_norm(f, SchwartzNormSpec(0, 2), 1, 0) == pytest.approx(
        2 * math.exp(-0.5), rel=1e-6)


@settings(max_examples=8)
@given(st.floats(0.1, 10.0), st.integers(0, 2), st.integers(0, 4))
def test_norm_is_homogeneous(scale, K, N):
    f = TestFunction.gaussian([0.3, -0.4, 1.0, 0.2], [0.8, 1.1, 0.6, 1.5], [1, 0, 0, 2])
    spec = SchwartzNormSpec(K, N)
    assert schwartz_norm(scale * f, spec, 2, 1) == pytest.approx(
        scale * schwartz_norm(f, spec, 2, 1), rel=1e-12)


def test_norm_routes_agree():
    # one term is searched per group; two terms go through the joint search
    f = TestFunction.gaussian([0.3, -1.0, 0.5, 0.2], [0.7, 1.2, 1.0, 0.5], [1, 0, 2, 0])
    spec = SchwartzNormSpec(1, 2)
    split = schwartz_norm(f, spec, 2, 1)
    joint = schwartz_norm(f + 1e-300 * f, spec, 2, 1)
    assert joint == pytest.approx(split, rel=1e-3)


def test_norm_limits():
    f = TestFunction.gaussian(np.zeros(4), 1.0)
    with pytest.raises(UnsupportedTestFunction):
        schwartz_norm(f, SchwartzNormSpec(3, 0), 2, 1)
    with pytest.raises(ValueError):
        schwartz_norm(f, SchwartzNormSpec(0, 0), 3, 1)
    with pytest.raises(ValueError):
        SchwartzNormSpec(-1, 0)


DENS2 = offshell_density(2, 0.25, 1.0, 1)
CENTER = np.array([-2.0, 0.5, 2.0, -0.5])


def test_pairing_is_linear():
    f = TestFunction.gaussian(CENTER, 0.8, [1, 0, 0, 1], freq=[0.3, 0, 0, 0.1])
    g = TestFunction.gaussian(CENTER, 0.8, [1, 0, 0, 1], coef=0.4 - 1j, freq=[-0.5, 0.2, 0, 0])
    a, b, ab = (pairing(2, DENS2, h, 1.0, 1, 0.25).value for h in (f, g, f + g))
    assert abs(ab - a - b) <= 1e-8 * abs(ab)


def test_pairing_outside_support_is_zero():
    far = TestFunction.gaussian([5.0, 0.0, -5.0, 0.0], 0.3)
    assert abs(pairing(2, DENS2, far, 1.0, 1, 0.25).value) < 1e-12


def test_pairing_converges_and_reports():
    f = TestFunction.gaussian(CENTER, [0.5, 1.0, 0.5, 1.0])
    res = pairing(2, DENS2, f, 1.0, 1, 0.25)
    assert res.converged and res.route == "hyperplane-2"
    assert res.abs_integral >= abs(res.value)
    assert res.to_dict()["converged"] is True


@pytest.mark.parametrize("s", [1, 2])
def test_shell_pairing_two_routes(s):
    c = np.concatenate([[-1.5], np.full(s, 0.4)])
    f = TestFunction.gaussian(np.concatenate([c, -c]), np.full(2 * s + 2, 0.8),
                              [0, 1] + [0] * (2 * s), freq=np.r_[0.2, np.zeros(2 * s + 1)])
    sm = ShellMeasure(1.0, s)
    cart = pairing(2, sm, f, 1.0, s)
    sph = shell_pairing_spherical(sm, f)
    assert cart.converged
    assert abs(cart.value - sph) <= 1e-6 * abs(sph)


def test_pairing_argument_checks():
    f = TestFunction.gaussian(np.zeros(4), 1.0)
    with pytest.raises(ValueError):
        pairing(4, DENS2, f, 1.0, 1)
    with pytest.raises(ValueError):
        pairing(3, DENS2, f, 1.0, 1)
    with pytest.raises(ValueError):
        pairing(2, ShellMeasure(2.0, 1), f, 1.0, 1)


def test_family_spans_required_ranges():
    fam = make_family(2, 1, 50, seed=0)
    assert len(fam) == 50
    assert {m["kind"] for m in fam} == set(CENTER_KINDS)
    widths = [m["mean_width"] for m in fam]
    assert min(widths) >= 0.25 and max(widths) <= 4.0
    assert {int(m["degrees"].sum()) for m in fam} == {0, 1, 2, 3, 4}
    for m in fam:
        assert np.allclose(m["centers"].reshape(2, 2).sum(axis=0), 0.0)


def test_small_bound_study_two_point():
    rep = bound_ratio_study(2, 0.25, family_size=4)
    assert rep.all_finite and rep.no_blowup and rep.control_diverges and rep.passed
    assert rep.calibrated_constant == pytest.approx(2 * rep.max_ratio)
    assert set(rep.to_dict()) >= {"members", "narrowing", "spreading", "passed"}


def test_bound_study_domain():
    with pytest.raises(ValueError):
        bound_ratio_study(4, 0.25)
    with pytest.raises(ValueError):
        bound_ratio_study(2, 0.5)


def test_m1_terms_as_typeset():
    k = np.array([[[1.7, 0.3]], [[0.2, 0.9]]])
    alpha, s = 0.25, 1
    u = np.abs(minkowski_square(k[:, 0]) - 1.0)
    w = (1 + np.sum(k[:, 0] ** 2, axis=-1)) ** (s + 1)
    d = m_measure_density(1, alpha, 1.0, s, k)
    assert set(d.terms) == {"{1}|single", "{1}|product"}
    np.testing.assert_allclose(d.terms["{1}|single"], w * u ** (-2 * alpha), rtol=1e-14)
    np.testing.assert_allclose(d.terms["{1}|product"], w * u ** -alpha, rtol=1e-14)
    np.testing.assert_allclose(d.total, d.terms["{1}|single"] + d.terms["{1}|product"])
    assert d.singular_partitions == []


def test_m2_structure():
    k = np.array([[1.7, 0.3], [-0.4, 0.9]])
    d = m_measure_density(2, 0.3, 1.0, 1, k)
    assert d.singular_partitions == [((0, 1),)]
    assert set(d.terms) == {"{1}{2}|" + a + "," + b
                            for a in ("product", "single") for b in ("product", "single")}
    pair = np.array([[1.7, 0.3], [-1.7, -0.3]])
    assert float(m_measure_singular(2, 0.3, 1.0, 1, pair, ((0, 1),))) > 0
    with pytest.raises(ValueError):
        m_measure_singular(2, 0.3, 1.0, 1, k, ((0, 1),))


def test_m3_sum_term_present():
    k = np.array([[1.7, 0.3], [-0.4, 0.9], [0.2, 2.5]])
    d = m_measure_density(3, 0.2, 1.0, 1, k)
    assert "{1,2,3}|sum" in d.terms and "{1,2,3}|product" in d.terms
    assert len(d.singular_partitions) == 3


@pytest.mark.parametrize("j", [1, 2, 3])
def test_m_densities_nonnegative(j):
    rep = check_m_nonnegative(j, 0.3, points=20_000)
    assert rep.passed and rep.details["min_value"] >= 0


def test_m_density_domain():
    with pytest.raises(ValueError):
        m_measure_density(1, 0.5, 1.0, 1, [[1.0, 0.0]])


@pytest.mark.parametrize("alpha", [0.2, 0.4])
def test_shell_integrability_exponent(alpha):
    rep = local_integrability_study(alpha)
    assert rep.converges and rep.matches
    assert rep.fitted_slope == pytest.approx(1 - 2 * alpha, abs=0.05)


def test_non_integrable_exponent_flagged():
    rep = local_integrability_study(0.3, exponent=1.2)
    assert not rep.converges
    assert math.isinf(rep.shell_integrals[0])


def test_split_family_shape():
    pairs = split_family(1, 6, seed=3)
    assert len(pairs) == 6 and pairs[-1][0] is pairs[-1][1]
    for f, g in pairs:
        assert f.dim == g.dim == 2


def test_p1_translation_invariant():
    ints = TwoPointIntegrals(0.25, 1.0, 1)
    f = TestFunction.gaussian([0.2, -0.5], [0.6, 1.1], [1, 0], freq=[-1.8, 0.4])
    base = p_seminorm(f, 1.0, ints)
    for shift in ([3.0, -2.0], [-7.5, 0.25]):
        assert p_seminorm(f.translate(shift), 1.0, ints) == pytest.approx(base, rel=1e-10)


def test_split_chain_on_small_family():
    rep = hsc_split_check(0.25, size=6, seed=4)
    assert rep.passed
    assert any(r["diagonal"] for r in rep.rows)
    assert rep.translation_max_relative <= 1e-10
    for r in rep.rows:
        assert r["lhs"] <= r["middle"] * (1 + 1e-6) and r["middle"] <= r["rhs"]

import math

import numpy as np
import pytest
from scipy import integrate
from hypothesis import given, strategies as st

from levyqft.noise import (LatticeNoiseLaw, LevyLaw, NoDensityError, batched_kstatistics,
                           cumulant, cumulants, interaction_free, potential_V,
                           sample_site_noise, site_density, site_density_fourier, stream)


def test_gaussian_law_has_no_higher_cumulants():
    law = LevyLaw.gaussian(1.0)
    assert cumulant(law, 2) == 1.0
    assert all(cumulant(law, l) == 0.0 for l in range(3, 9))
    assert interaction_free(law)


def test_poisson_cumulants_all_equal_rate():
    np.testing.assert_array_equal(cumulants(LevyLaw.poisson(2.0), 8), np.full(8, 2.0))


def test_symmetric_jump_cumulants():
    law = LevyLaw.symmetric_jumps(3.0)
    assert cumulant(law, 3) == 0.0
    assert cumulant(law, 4) == 3.0
    assert not interaction_free(law)


@given(st.floats(0.1, 4.0), st.floats(0.0, 3.0), st.floats(0.05, 2.0), st.integers(1, 6))
def test_site_cumulant_scaling(v, rate, var, l):
    law = LevyLaw.poisson(rate, 1.5, gaussian_var=var)
    site = LatticeNoiseLaw(law, v)
    assert site.cumulant(l) == pytest.approx(cumulant(law, l) * v ** (1 - l), rel=1e-13)


def test_law_validation():
    with pytest.raises(ValueError):
        LevyLaw(gaussian_var=-1)
    with pytest.raises(ValueError):
        LevyLaw(jump_rate=1.0)
    with pytest.raises(ValueError):
        LevyLaw(0, 0, 1.0, (1.0, 2.0), (0.5, 0.6))
    with pytest.raises(ValueError):
        LevyLaw.from_config({"gaussian_var": 1.0, "sigma": 2})


def test_degenerate_law_samples_zero():
    out = sample_site_noise(LatticeNoiseLaw(LevyLaw()), 1000, seed=3)
    assert np.all(out == 0.0)


def test_streams_are_reproducible_and_distinct():
    a = stream(5, 0).standard_normal(4)
    np.testing.assert_array_equal(a, stream(5, 0).standard_normal(4))
    assert not np.array_equal(a, stream(5, 1).standard_normal(4))
    assert not np.array_equal(a, stream(6, 0).standard_normal(4))


@pytest.mark.parametrize("law,v", [
    (LevyLaw.poisson(2.0, drift=0.3, gaussian_var=0.5), 1.0),
    (LevyLaw.symmetric_jumps(3.0, gaussian_var=1.0), 0.5),
    (LevyLaw(0.0, 0.2, 1.5, (-1.0, 2.0), (0.7, 0.3)), 2.0),
])
def test_empirical_cumulants_within_five_standard_errors(law, v):
    site = LatticeNoiseLaw(law, v)
    x = sample_site_noise(site, 1_000_000, seed=11)
    est, se = batched_kstatistics(x, batches=100)
    for l in range(1, 5):
        assert abs(est[l - 1] - site.cumulant(l)) < 5 * se[l - 1], l


def test_gaussian_potential_closed_form():
    t = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(potential_V(LevyLaw.gaussian(1.0), t),
                               t**2 / 2 - 0.5 * math.log(2 * math.pi), atol=1e-12)


@given(st.floats(0.2, 3.0), st.floats(-1.0, 1.0))
def test_gaussian_potential_is_quadratic(var, drift):
    law = LevyLaw.gaussian(var, drift)
    t = np.array([-1.0, 0.0, 1.0, 2.0])
    v = potential_V(law, t)
    # third finite difference of a quadratic vanishes
    assert abs(v[3] - 3 * v[2] + 3 * v[1] - v[0]) < 1e-9


def test_potential_at_zero_series_vs_fourier():
    law = LevyLaw.poisson(1.0, gaussian_var=1.0)
    series = site_density(law, 0.0)
    fourier = site_density_fourier(law, 0.0)
    assert float(series) == pytest.approx(fourier, rel=1e-8)
    c = 1.0 + 1.0 + 1.0  # c_2 + c_1^2
    assert float(potential_V(law, 0.0)) == pytest.approx(math.log(fourier), rel=1e-8)
    assert c > 0


def test_density_requires_gaussian_part():
    with pytest.raises(NoDensityError):
        site_density(LevyLaw.poisson(1.0), 0.0)


def test_site_density_normalised():
    law = LevyLaw.symmetric_jumps(0.8, 1.5, gaussian_var=0.7)
    total, _ = integrate.quad(lambda t: float(site_density(law, t)), -np.inf, np.inf,
                              epsabs=1e-12, limit=200)
    assert total == pytest.approx(1.0, abs=1e-9)


import numpy as np
import pytest
from hypothesis import given, strategies as st

from levyqft.partitions import (bell_number, cumulants_from_moments, iter_partitions,
                                moments_from_cumulants, set_partitions, subsets)

BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]


@pytest.mark.parametrize("n", range(1, 11))
def test_partition_counts_are_bell_numbers(n):
    parts = set_partitions(n)
    assert len(parts) == BELL[n] == bell_number(n)
    assert len(set(parts)) == len(parts)


@pytest.mark.parametrize("n", range(1, 7))
def test_partitions_cover_each_element_once(n):
    for part in set_partitions(n):
        assert sorted(i for b in part for i in b) == list(range(n))


def test_partition_size_limits():
    with pytest.raises(ValueError):
        set_partitions(0)
    with pytest.raises(ValueError):
        set_partitions(11)
    assert list(iter_partitions(())) == [()]


def test_covariance_case():
    m = {(0,): 1.5, (1,): -2.0, (0, 1): 4.0}
    k = cumulants_from_moments(m, 2)
    assert k[(0, 1)] == pytest.approx(4.0 - 1.5 * -2.0)


def test_third_cumulant_formula():
    rng = np.random.default_rng(0)
    m = {s: rng.normal() for s in subsets(3)}
    k = cumulants_from_moments(m, 3)
    expected = (m[(0, 1, 2)] - m[(0, 1)] * m[(2,)] - m[(0, 2)] * m[(1,)]
                - m[(1, 2)] * m[(0,)] + 2 * m[(0,)] * m[(1,)] * m[(2,)])
    assert k[(0, 1, 2)] == pytest.approx(expected, rel=1e-12)


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    k = {s: rng.uniform(-2, 2) for s in subsets(n)}
    back = cumulants_from_moments(moments_from_cumulants(k, n), n)
    for s in k:
        assert back[s] == pytest.approx(k[s], abs=1e-10)


def test_gaussian_moments_are_wick_sums():
    # zero mean, covariance C: the fourth moment is the sum of three pairings
    rng = np.random.default_rng(4)
    a = rng.normal(size=(4, 4))
    cov = a @ a.T
    k = {s: (cov[s] if len(s) == 2 else 0.0) for s in subsets(4)}
    m = moments_from_cumulants(k, 4)
    wick = cov[0, 1] * cov[2, 3] + cov[0, 2] * cov[1, 3] + cov[0, 3] * cov[1, 2]
    assert m[(0, 1, 2, 3)] == pytest.approx(wick, rel=1e-12)


def test_incomplete_table_rejected():
    with pytest.raises(KeyError):
        cumulants_from_moments({(0,): 1.0}, 2)


def test_subsets_ordered_by_size():
    assert subsets(3) == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]
    assert len(subsets(6)) == 2**6 - 1

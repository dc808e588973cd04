import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from christoffel_ls import (
    ConfigurationError,
    from_indices,
    hyperbolic_cross,
    index_set,
    is_lower_set,
    parse_index_set,
    tensor_product,
    total_degree,
)
from christoffel_ls.multiindex import canonical_key
from christoffel_ls.validation import brute_force_index_set


def test_hc_1d_is_full_range():
    lam = hyperbolic_cross(1, 5)
    assert lam.N == 6
    assert list(lam) == [(k,) for k in range(6)]


def test_hc_order_zero():
    assert list(hyperbolic_cross(3, 0)) == [(0, 0, 0)]


def test_hc_2_3_members_and_order():
    lam = hyperbolic_cross(2, 3)
    assert lam.N == 8
    assert set(lam) == {(0, 0), (0, 1), (1, 0), (0, 2), (2, 0), (0, 3), (1, 1), (3, 0)}
    # product first, then l1 norm, then lex
    assert list(lam) == [(0, 0), (0, 1), (1, 0), (0, 2), (2, 0), (1, 1), (0, 3), (3, 0)]


def test_td_small_cases():
    assert list(total_degree(2, 1)) == [(0, 0), (0, 1), (1, 0)]
    assert total_degree(1, 7).N == 8
    assert total_degree(3, 2).N == math.comb(5, 3)


def test_tp_is_box():
    assert tensor_product(2, 2).N == 9
    assert set(tensor_product(3, 1)) == set(itertools.product((0, 1), repeat=3))


def test_lower_set_examples():
    assert is_lower_set(hyperbolic_cross(2, 3))
    assert not is_lower_set(from_indices([(0, 0), (1, 1)]))
    assert is_lower_set(from_indices([(0,)]))


@pytest.mark.parametrize("kind", ["hc", "td"])
def test_lower_sets_up_to_20(kind):
    for d in range(1, 5):
        for n in range(21):
            assert is_lower_set(index_set(kind, d, n)), (kind, d, n)


@given(kind=st.sampled_from(["hc", "td", "tp"]), d=st.integers(1, 4), n=st.integers(0, 12), dn=st.integers(1, 6))
def test_prefix_nesting(kind, d, n, dn):
    small, big = index_set(kind, d, n), index_set(kind, d, n + dn)
    assert small.is_prefix_of(big)


@given(kind=st.sampled_from(["hc", "td", "tp"]), d=st.integers(1, 3), n=st.integers(0, 10))
def test_matches_brute_force(kind, d, n):
    lam = index_set(kind, d, n)
    assert set(lam) == brute_force_index_set(kind, d, n)
    assert lam.N == len(brute_force_index_set(kind, d, n))


@given(kind=st.sampled_from(["hc", "td", "tp"]), d=st.integers(1, 4), n=st.integers(0, 10))
def test_sorted_by_canonical_key(kind, d, n):
    keys = [canonical_key(kind, idx) for idx in index_set(kind, d, n)]
    assert keys == sorted(keys)


def test_hc_key_reduces_to_product_l1_lex():
    lam = hyperbolic_cross(3, 15)
    keys = [(math.prod(k + 1 for k in idx), sum(idx), idx) for idx in lam]
    assert keys == sorted(keys)


def test_positions_and_membership():
    lam = hyperbolic_cross(2, 3)
    assert (1, 1) in lam and (2, 2) not in lam
    assert lam.position((0, 0)) == 0
    np.testing.assert_array_equal(lam.max_degrees(), [3, 3])


def test_indices_are_read_only():
    lam = total_degree(2, 2)
    with pytest.raises(ValueError):
        lam.indices[0, 0] = 5


def test_equality_and_hash():
    assert hyperbolic_cross(2, 4) == hyperbolic_cross(2, 4)
    assert hash(hyperbolic_cross(2, 4)) == hash(hyperbolic_cross(2, 4))
    assert hyperbolic_cross(2, 4) != total_degree(2, 4)


def test_parse_specs():
    assert parse_index_set("hc:d=2,n=30") == hyperbolic_cross(2, 30)
    assert parse_index_set("td:d=3,n=5") == total_degree(3, 5)
    assert parse_index_set("tp:d=2,n=4") == tensor_product(2, 4)


@pytest.mark.parametrize("bad", ["hc", "hc:d=2", "xx:d=2,n=1", "hc:d=a,n=1", "hc:d=2;n=3"])
def test_parse_rejects(bad):
    with pytest.raises(ConfigurationError):
        parse_index_set(bad)


@pytest.mark.parametrize("d,n", [(0, 1), (2, -1), (1.5, 2)])
def test_bad_arguments(d, n):
    with pytest.raises(ConfigurationError):
        hyperbolic_cross(d, n)


def test_custom_set_rejects_duplicates_and_negatives():
    with pytest.raises(ConfigurationError):
        from_indices([(0, 0), (0, 0)])
    with pytest.raises(ConfigurationError):
        from_indices([(0, -1)])

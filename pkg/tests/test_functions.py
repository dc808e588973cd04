import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from christoffel_ls import ConfigurationError, TensorLegendreBasis, builtin_domain, cube, hyperbolic_cross
from christoffel_ls.functions import builtin_function, check_pairing, in_space, parse_function


@pytest.mark.parametrize("d", [1, 2, 5])
def test_f1_at_origin(d):
    assert builtin_function("f1", d)(np.zeros(d)) == 1.0


def test_f1_formula():
    y = np.array([[0.2, -0.6, 0.1]])
    assert builtin_function("f1", 3)(y)[0] == pytest.approx(math.exp(0.1))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_f4_on_unit_axis(d):
    y = np.zeros(d)
    y[0] = 1.0
    assert builtin_function("f4", d)(y) == 1.0


def test_f3_at_origin_d2():
    assert builtin_function("f3", 2)(np.zeros(2)) == pytest.approx(6 / 11, rel=1e-15)


def test_f3_d3_by_hand():
    # a = 3/4, shifts 1/2, -1/3, 1/4
    a = 0.75
    ref = (a / (a + 0.25)) * (a / (a + 1 / 9)) * (a / (a + 1 / 16))
    assert builtin_function("f3", 3)(np.zeros(3)) == pytest.approx(ref, rel=1e-15)


def test_f2_formula():
    assert builtin_function("f2", 2)(np.array([0.25, -0.04])) == pytest.approx(1 / 0.7)


@given(st.integers(2, 4), st.integers(0, 1000))
def test_finite_on_paired_domains(d, seed):
    from christoffel_ls import RngStream, sample_uniform

    for name, dom in (("f1", "omega1"), ("f2", "omega1"), ("f3", "omega2"), ("f4", "omega3")):
        domain = builtin_domain(dom, d)
        func = builtin_function(name, d)
        check_pairing(func, domain)
        vals = func(sample_uniform(domain, 200, RngStream(seed)))
        assert np.all(np.isfinite(vals))


def test_pairing_rejections():
    with pytest.raises(ConfigurationError, match="origin"):
        check_pairing(builtin_function("f2", 2), cube(2))
    with pytest.raises(ConfigurationError, match="axis"):
        check_pairing(builtin_function("f4", 3), cube(3))
    with pytest.raises(ConfigurationError, match="axis"):
        check_pairing(builtin_function("f4", 2), builtin_domain("omega2", 2))
    with pytest.raises(ConfigurationError):
        check_pairing(builtin_function("f1", 3), cube(2))


def test_lookup_errors():
    with pytest.raises(ConfigurationError):
        builtin_function("f4", 1)
    with pytest.raises(ConfigurationError):
        builtin_function("f9", 2)
    with pytest.raises(ConfigurationError):
        builtin_function("inspace", 2)
    with pytest.raises(ConfigurationError):
        builtin_function("inspace", 3, hyperbolic_cross(2, 3))
    with pytest.raises(ConfigurationError):
        builtin_function("f1", 0)
    with pytest.raises(ConfigurationError):
        builtin_function("f1", 2)(np.zeros(3))


def test_parse_function():
    assert parse_function("f1") == ("f1", {})
    assert parse_function("inspace:seed=3,n=2") == ("inspace", {"seed": 3, "n": 2})
    for bad in ("inspace:seed", "inspace:seed=x", "f1:seed=2", "inspace:k=1"):
        with pytest.raises(ConfigurationError):
            parse_function(bad)


def test_in_space_reproducible_and_matches_basis():
    I = hyperbolic_cross(2, 4)
    a, b = in_space(I, 3), in_space(I, 3)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)
    assert not np.array_equal(a.coefficients, in_space(I, 4).coefficients)
    y = np.random.default_rng(0).uniform(-1, 1, (7, 2))
    np.testing.assert_allclose(a(y), TensorLegendreBasis(I).evaluate(y) @ a.coefficients)
    with pytest.raises(ValueError):
        a.coefficients[0] = 1.0

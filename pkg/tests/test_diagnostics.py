import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from christoffel_ls import (
    ConfigurationError,
    DataError,
    RngStream,
    TensorLegendreBasis,
    annulus,
    assemble_and_factor,
    assemble_method1,
    cube,
    draw_method1,
    generate_grid,
    hyperbolic_cross,
    method1_distribution,
    solve,
    total_degree,
)
from christoffel_ls.diagnostics import (
    C_threshold,
    EvalGrid,
    bound_K,
    bound_K_grid,
    bound_k_method2,
    bound_M_maw1,
    bound_M_maw2,
    bound_M_method1,
    chernoff_lower_rate,
    chernoff_upper_rate,
    condition_number,
    constant_C,
    diagnose,
    error_off_grid,
    error_on_grid,
    estimate_D,
    kappa_threshold,
    make_eval_grid,
    nikolskii_lambda_rect,
    weighted_supnorm_gap,
)

mpmath.mp.dps = 40


def _mp_M_method1(N, gamma, delta):
    N, g, dl = mpmath.mpf(N), mpmath.mpf(gamma), mpmath.mpf(delta)
    return int(mpmath.ceil(N * mpmath.log(4 * N / g) / ((1 + dl) * mpmath.log(1 + dl) - dl)))


def test_bound_M_method1_reference_value():
    assert _mp_M_method1(100, 0.01, 0.5) == 9794
    assert bound_M_method1(100, 0.01, 0.5) == 9794


@given(st.integers(1, 10_000), st.floats(1e-6, 0.99), st.floats(0.01, 0.99))
def test_bounds_against_high_precision(N, gamma, delta):
    mp_g, mp_d, mp_N = mpmath.mpf(gamma), mpmath.mpf(delta), mpmath.mpf(N)
    a = (1 + mp_d) * mpmath.log(1 + mp_d) - mp_d
    b = (1 - mp_d) * mpmath.log(1 - mp_d) + mp_d
    ref = {
        "m1": mp_N * mpmath.log(4 * mp_N / mp_g) / a,
        "k2": mpmath.log(4 * mp_N / mp_g) / a,
        "maw1": mp_N * mpmath.log(mp_N / mp_g) / b,
        "maw2": mp_N * mpmath.log(2 * mp_N / mp_g) / a,
        "K": 7 * mpmath.log(2 * mp_N / mp_g) / b,
        "Kg": 7 * mpmath.log(mp_N / mp_g) / b,
    }
    got = {
        "m1": bound_M_method1(N, gamma, delta),
        "k2": bound_k_method2(N, gamma, delta),
        "maw1": bound_M_maw1(N, gamma, delta),
        "maw2": bound_M_maw2(N, gamma, delta),
        "K": bound_K(N, gamma, delta, 7.0),
        "Kg": bound_K_grid(N, gamma, delta, 7.0),
    }
    for key, value in ref.items():
        # the double-precision ceiling may only disagree when the exact value sits on an integer
        exact = value
        if abs(exact - mpmath.nint(exact)) > 1e-9 * abs(exact):
            assert got[key] == int(mpmath.ceil(exact)), key


def test_maw2_reference():
    assert bound_M_maw2(10, 0.1, 0.5) == 490


@given(st.integers(1, 5000), st.floats(1e-4, 0.5), st.floats(0.05, 0.9))
def test_bound_monotonicity(N, gamma, delta):
    assert bound_M_method1(N + 1, gamma, delta) >= bound_M_method1(N, gamma, delta)
    assert bound_M_method1(N, gamma, min(delta + 0.05, 0.95)) <= bound_M_method1(N, gamma, delta)
    assert bound_M_method1(N, gamma / 2, delta) >= bound_M_method1(N, gamma, delta)


@given(st.floats(1e-4, 0.9999))
def test_chernoff_rates(delta):
    a, b = chernoff_upper_rate(delta), chernoff_lower_rate(delta)
    assert 0 < a < b
    assert a == pytest.approx(float((1 + mpmath.mpf(delta)) * mpmath.log1p(delta) - delta), rel=1e-9)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5])
def test_bad_parameters(bad):
    with pytest.raises(ConfigurationError):
        bound_M_method1(10, bad, 0.5)
    with pytest.raises(ConfigurationError):
        bound_M_method1(10, 0.01, bad)
    with pytest.raises(ConfigurationError):
        bound_k_method2(10, bad, 0.5)
    if bad != 1.0:
        with pytest.raises(ConfigurationError):
            nikolskii_lambda_rect(10, bad)
    with pytest.raises(ConfigurationError):
        bound_M_maw1(0, 0.1, 0.5)


def test_nikolskii_lambda():
    assert nikolskii_lambda_rect(7, 1.0) == 49
    assert nikolskii_lambda_rect(7, 0.25) == 196
    with pytest.raises(ConfigurationError):
        bound_K(10, 0.1, 0.5, 0.0)


def test_thresholds():
    assert kappa_threshold(0.5) == pytest.approx(math.sqrt(3))
    assert C_threshold(0.5) == pytest.approx(math.sqrt(2))


@given(st.integers(1, 12), st.integers(0, 40), st.integers(0, 2**31))
def test_C_against_eigenvalues(N, extra, seed):
    A = np.random.default_rng(seed).standard_normal((N + extra, N))
    lam = np.linalg.eigvalsh(A.T @ A)[0]
    assert constant_C(A) == pytest.approx(1 / math.sqrt(lam), rel=1e-10)
    s = np.linalg.svd(A, compute_uv=False)
    assert constant_C(A) * s[-1] == pytest.approx(1.0, rel=1e-14)
    assert condition_number(A) >= 1.0


def test_singular_C_is_infinite(caplog):
    assert constant_C(np.ones((4, 2))) == math.inf or constant_C(np.ones((4, 2))) > 1e14
    assert constant_C(np.zeros((3, 2))) == math.inf
    assert "infinite" in caplog.text


def test_orthonormal_columns_C_one():
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((20, 5)))
    assert constant_C(Q) == pytest.approx(1.0)
    assert condition_number(Q) == pytest.approx(1.0)


def test_error_on_grid():
    assert error_on_grid([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert error_on_grid([3.0, 4.0], [0.0, 0.0]) == 1.0
    with pytest.raises(DataError):
        error_on_grid([0.0, 0.0], [1.0, 1.0])


def test_supnorm_gap(three_point):
    assert weighted_supnorm_gap(np.ones(3), np.ones(3), np.full(3, 1 / 3)) == 0.0
    g = np.array([0.2, -0.7, 0.1])
    assert weighted_supnorm_gap(g, np.zeros(3), np.full(3, 1 / 3)) == pytest.approx(0.7)
    pi = np.array([5 / 12, 1 / 6, 5 / 12])
    ref = max(0.2 / math.sqrt(15 / 12), 0.7 / math.sqrt(0.5), 0.1 / math.sqrt(15 / 12))
    assert weighted_supnorm_gap(g, np.zeros(3), pi) == pytest.approx(ref, rel=1e-14)
    assert weighted_supnorm_gap(g, np.zeros(3), np.array([0.5, 0.0, 0.5])) == math.inf
    assert weighted_supnorm_gap(np.array([1.0, 0.0]), np.zeros(2), np.array([1.0, 0.0])) == pytest.approx(1 / math.sqrt(2))


def test_D_hat_on_own_grid_and_constant():
    grid = generate_grid(annulus(2), 500, RngStream(0))
    basis = TensorLegendreBasis(hyperbolic_cross(2, 8))
    f = assemble_and_factor(grid, basis)
    assert estimate_D(f, basis, EvalGrid(grid.points)) == pytest.approx(1.0, abs=1e-10)
    b0 = TensorLegendreBasis(total_degree(2, 0))
    f0 = assemble_and_factor(grid, b0)
    assert estimate_D(f0, b0, make_eval_grid(annulus(2), 37, RngStream(5))) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ConfigurationError):
        estimate_D(f, basis, np.zeros((3, 2)))


def test_D_hat_monte_carlo_range():
    grid = generate_grid(cube(1), 200, RngStream(0))
    basis = TensorLegendreBasis(total_degree(1, 4))
    f = assemble_and_factor(grid, basis)
    D = estimate_D(f, basis, make_eval_grid(cube(1), 100_000, RngStream(1)))
    assert 0.8 <= D <= 1.5


def test_off_grid_error_exact_for_polynomials():
    dom = annulus(2)
    grid = generate_grid(dom, 1000, RngStream(0))
    basis = TensorLegendreBasis(hyperbolic_cross(2, 6))
    f = assemble_and_factor(grid, basis)
    coef = np.random.default_rng(0).standard_normal(f.N)
    target = lambda y: basis.evaluate(y) @ coef
    pi, _ = method1_distribution(f)
    idx = draw_method1(pi, 4 * f.N, RngStream(1))
    c, _ = solve(*assemble_method1(f, idx, target(grid.points[idx]), pi))
    for T in (1, 50, 5000):
        err = error_off_grid(dom, target, f, basis, c, T=T, rng=RngStream(2))
        assert 0 <= err <= 1e-8
    with pytest.raises(ConfigurationError):
        error_off_grid(dom, target, f, basis, c)
    with pytest.raises(ConfigurationError):
        make_eval_grid(dom, 0, RngStream(0))


def test_diagnose_report():
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((40, 4)))
    rep = diagnose(Q, fvals_grid=[1.0, 2.0], approx_grid=[1.0, 2.0], nikolskii_sq=16.0)
    assert rep.C == pytest.approx(1.0) and rep.kappa == pytest.approx(1.0)
    assert rep.E_tau == 0.0 and rep.flags == []
    assert rep.theory["M_method1"] == bound_M_method1(4)
    assert "k_method2[N=N_t]" in rep.theory and "K_method1" in rep.theory
    assert json.loads(rep.to_json())["N"] == 4
    assert diagnose(np.ones((5, 2))).kappa > kappa_threshold(0.5)
    assert "singular_A" in diagnose(np.zeros((5, 2))).flags

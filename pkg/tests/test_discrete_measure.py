import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from christoffel_ls import (
    ConfigurationError,
    FullRankFailure,
    KGrid,
    RngStream,
    TensorLegendreBasis,
    annulus,
    assemble_and_factor,
    builtin_domain,
    cube,
    eval_phi,
    extend_factorization,
    factor_schedule,
    factor_with_policy,
    generate_grid,
    hyperbolic_cross,
    index_set,
    load_grid,
    save_grid,
    total_degree,
)
from christoffel_ls.discrete_measure import rank_tolerance


def test_constant_basis():
    grid = generate_grid(cube(1), 7, RngStream(0))
    f = assemble_and_factor(grid, TensorLegendreBasis(total_degree(1, 0)))
    np.testing.assert_allclose(f.B[:, 0], 1 / math.sqrt(7))
    np.testing.assert_allclose(f.Q[:, 0], 1 / math.sqrt(7))
    np.testing.assert_allclose(f.R, [[1.0]])


def test_three_point_hand_qr(three_point):
    grid, basis, f = three_point
    s3 = math.sqrt(3)
    np.testing.assert_allclose(f.B, np.array([[1, -s3], [1, 0], [1, s3]]) / s3, atol=1e-15)
    assert f.R[0, 0] == pytest.approx(1.0, abs=1e-15)
    assert f.R[0, 1] == pytest.approx(0.0, abs=1e-15)
    assert f.R[1, 1] == pytest.approx(math.sqrt(2), abs=1e-15)
    np.testing.assert_allclose(f.Q[:, 1], np.array([-1, 0, 1]) / math.sqrt(2), atol=1e-15)


def test_three_point_phi(three_point):
    _, basis, f = three_point
    y = np.array([[0.3], [-0.8]])
    # Gram-Schmidt on the grid gives phi_2 = sqrt(3/2) y
    np.testing.assert_allclose(eval_phi(f, basis, y), [[1, math.sqrt(1.5) * 0.3], [1, -math.sqrt(1.5) * 0.8]], atol=1e-14)


@given(st.sampled_from(["omega1", "omega2", "omega3", "cube"]), st.integers(2, 3), st.integers(0, 12), st.integers(0, 2**32))
def test_factorisation_invariants(domain, d, n, seed):
    grid = generate_grid(builtin_domain(domain, d), 600, RngStream(seed))
    basis = TensorLegendreBasis(hyperbolic_cross(d, n))
    f = assemble_and_factor(grid, basis)
    assert np.abs(f.Q.T @ f.Q - np.eye(f.N)).max() <= 1e-10
    assert np.abs(f.B - f.Q @ f.R).max() <= 1e-10 * np.abs(f.B).max()
    assert np.all(np.diag(f.R) > 0)
    assert np.allclose(np.tril(f.R, -1), 0)
    phi = eval_phi(f, basis, grid.points)
    np.testing.assert_allclose(phi, math.sqrt(grid.K) * f.Q, atol=1e-10)
    assert np.abs(phi.T @ phi / grid.K - np.eye(f.N)).max() <= 1e-10


def test_phi_spans_leading_psi():
    grid = generate_grid(annulus(2), 400, RngStream(1))
    basis = TensorLegendreBasis(hyperbolic_cross(2, 8))
    f = assemble_and_factor(grid, basis)
    # phi_i uses psi_1..psi_i only: dropping later columns leaves it unchanged
    y = np.random.default_rng(2).uniform(-1, 1, (5, 2))
    full = eval_phi(f, basis, y)
    part = eval_phi(f.leading(6), basis, y)
    np.testing.assert_allclose(full[:, :6], part, atol=1e-12)


def test_extend_matches_direct():
    grid = generate_grid(annulus(2), 800, RngStream(3))
    small, big = TensorLegendreBasis(hyperbolic_cross(2, 1)), TensorLegendreBasis(hyperbolic_cross(2, 3))
    f1 = assemble_and_factor(grid, small)
    ext = extend_factorization(f1, grid, big)
    direct = assemble_and_factor(grid, big)
    np.testing.assert_allclose(ext.Q, direct.Q, atol=1e-10)
    np.testing.assert_allclose(ext.R, direct.R, atol=1e-10)
    np.testing.assert_array_equal(ext.Q[:, : f1.N], f1.Q)
    np.testing.assert_array_equal(ext.R[: f1.N, : f1.N], f1.R)


def test_schedule_extension_keeps_orthonormality():
    grid = generate_grid(annulus(2), 5000, RngStream(4))
    bases = [TensorLegendreBasis(hyperbolic_cross(2, n)) for n in (4, 10, 20, 40, 60)]
    f = factor_schedule(grid, bases)
    direct = assemble_and_factor(grid, bases[-1])
    assert np.abs(f.Q.T @ f.Q - np.eye(f.N)).max() <= 1e-10
    assert np.abs(f.B - f.Q @ f.R).max() <= 1e-10 * np.abs(f.B).max()
    np.testing.assert_allclose(f.Q, direct.Q, atol=1e-8)


def test_extend_by_nothing_is_identity():
    grid = generate_grid(cube(2), 50, RngStream(0))
    basis = TensorLegendreBasis(hyperbolic_cross(2, 3))
    f = assemble_and_factor(grid, basis)
    assert extend_factorization(f, grid, basis) is f


def test_duplicate_column_is_rank_failure():
    grid = generate_grid(cube(2), 100, RngStream(0))
    basis = TensorLegendreBasis(hyperbolic_cross(2, 3))
    f = assemble_and_factor(grid, basis)
    dup = basis.evaluate(grid.points)[:, [2]]
    with pytest.raises(FullRankFailure) as err:
        extend_factorization(f, grid, dup)
    assert err.value.sigma_min / err.value.sigma_max < rank_tolerance(100, f.N + 1)


def test_too_few_points_is_rank_failure():
    # two distinct points cannot support a quadratic
    grid = KGrid(np.array([[0.1], [0.1], [0.7], [0.7]]), "dup")
    with pytest.raises(FullRankFailure):
        assemble_and_factor(grid, TensorLegendreBasis(total_degree(1, 2)))


def test_K_smaller_than_N():
    grid = generate_grid(cube(1), 3, RngStream(0))
    with pytest.raises(ConfigurationError):
        assemble_and_factor(grid, TensorLegendreBasis(total_degree(1, 5)))


def test_policy_regenerate_and_grow(monkeypatch):
    import christoffel_ls.discrete_measure as dm

    dom = annulus(2)
    basis = TensorLegendreBasis(hyperbolic_cross(2, 5))
    grid, f = factor_with_policy(dom, 200, basis, RngStream(0))
    assert grid.K == 200 and f.N == basis.N
    with pytest.raises(ConfigurationError):
        factor_with_policy(dom, 10, basis, RngStream(0))
    with pytest.raises(ConfigurationError):
        factor_with_policy(dom, 200, basis, RngStream(0), policy="shrink")

    real = dm.factor_schedule
    seen = []

    def flaky(g, bases):
        seen.append(g.K)
        if len(seen) < 3:
            raise FullRankFailure(0.0, 1.0)
        return real(g, bases)

    monkeypatch.setattr(dm, "factor_schedule", flaky)
    grid, _ = factor_with_policy(dom, 200, basis, RngStream(0), policy="grow")
    assert seen == [200, 300, 450] and grid.K == 450
    seen.clear()
    grid2, _ = factor_with_policy(dom, 200, basis, RngStream(0), policy="regenerate")
    assert seen == [200, 200, 200]
    assert not np.array_equal(grid2.points, generate_grid(dom, 200, RngStream(0).child(0)).points)
    seen.clear()
    with pytest.raises(FullRankFailure):
        factor_with_policy(dom, 200, basis, RngStream(0), retries=1)


def test_same_seed_same_grid(tmp_path):
    a = generate_grid(annulus(2), 200, RngStream(7))
    b = generate_grid(annulus(2), 200, RngStream(7))
    np.testing.assert_array_equal(a.points, b.points)
    for name in ("g.npy", "g.csv"):
        save_grid(a, tmp_path / name)
        np.testing.assert_array_equal(load_grid(tmp_path / name).points, a.points)


def test_large_grid_is_full_rank():
    grid = generate_grid(annulus(2), 20000, RngStream(0))
    f = assemble_and_factor(grid, TensorLegendreBasis(index_set("hc", 2, 100)))
    assert f.N == 484 and f.full_rank

"""Weighted least-squares assembly, solve and evaluation.

All three samplers lead to the same algebraic problem: rows of ``Q`` picked
at the drawn grid indices and rescaled by ``1 / sqrt(M p_i)``, where ``p`` is
the distribution the index was effectively drawn from (Method 1's ``pi``, the
Method 2 mixture, or ``1/K`` for uniform sampling). The right-hand side uses
the same scaling with an extra ``1 / sqrt(K)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular

from .discrete_measure import OrthoFactorization
from .errors import ConfigurationError, DataError, InvariantViolation, SolveFailure
from .legendre import TensorLegendreBasis
from .sampling import Method1Plan, Method2Plan, method1_distribution, method2_mixture

SOLVE_SAFETY = 16.0


@dataclass(frozen=True)
class WlsFit:
    """A solved weighted least-squares problem.

    ``c`` holds coefficients in the grid-orthonormal basis ``phi``.
    """

    method: str
    indices: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    kappa: float
    sigma_min: float
    sigma_max: float
    residual: float

    @property
    def N(self) -> int:
        return self.A.shape[1]

    @property
    def M(self) -> int:
        return self.A.shape[0]

    def summary(self, seed=None) -> dict:
        return {
            "method": self.method,
            "N": self.N,
            "M": self.M,
            "kappa": self.kappa,
            "residual": self.residual,
            "seed": seed,
        }


def _check_fvals(indices, fvals):
    fvals = np.asarray(fvals, dtype=float)
    if fvals.shape != (len(indices),):
        raise DataError(f"expected {len(indices)} function values, got shape {fvals.shape}")
    bad = np.flatnonzero(~np.isfinite(fvals))
    if bad.size:
        j = int(bad[0])
        raise DataError(f"non-finite function value {fvals[j]} at grid index {int(indices[j])} (sample {j})")
    return fvals


def assemble_weighted(
    f: OrthoFactorization, indices: np.ndarray, fvals, density: np.ndarray, N: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``q_{i,:} / sqrt(M p_i)`` and values ``f(z_i) / sqrt(M K p_i)``.

    ``density`` is the per-grid-index probability the draws effectively came
    from; only the first ``N`` columns of ``Q`` are used.
    """
    N = f.N if N is None else N
    indices = np.asarray(indices, dtype=np.int64)
    fvals = _check_fvals(indices, fvals)
    p = density[indices]
    if np.any(p <= 0):
        j = int(np.flatnonzero(p <= 0)[0])
        raise InvariantViolation(f"grid index {int(indices[j])} was drawn but has probability {p[j]}")
    M = len(indices)
    scale = 1.0 / np.sqrt(M * p)
    A = f.Q[indices, :N] * scale[:, None]
    b = fvals * scale / math.sqrt(f.K)
    return A, b


def assemble_method1(f: OrthoFactorization, plan: Method1Plan | np.ndarray, fvals, pi=None):
    """Method 1 system; ``plan`` may be a :class:`Method1Plan` or an index array."""
    if isinstance(plan, Method1Plan):
        indices, pi = plan.indices, plan.pi
    else:
        indices = plan
        if pi is None:
            pi, _ = method1_distribution(f)
    return assemble_weighted(f, indices, fvals, pi)


def assemble_method2(f: OrthoFactorization, plan: Method2Plan, fvals):
    """Method 2 system at the plan's current stage.

    Denominators use ``(M_t / N_t) sum_{l <= N_t} pi^(l)``, i.e. ``M_t`` times
    the mixture of the per-column distributions.
    """
    N_t = plan.N
    if N_t == 0:
        raise ConfigurationError("plan has no completed stage")
    if f.N < N_t:
        raise ConfigurationError(f"factorisation has {f.N} columns, plan needs {N_t}")
    mix = method2_mixture(f, N_t)
    return assemble_weighted(f, plan.indices, fvals, mix, N=N_t)


def assemble_uniform(f: OrthoFactorization, indices, fvals):
    """Unweighted baseline (``w = 1``): rows ``q_{i,:} sqrt(K / M)``."""
    return assemble_weighted(f, indices, fvals, np.full(f.K, 1.0 / f.K))


def solve(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares minimiser of ``||Ax - b||_2`` and ``kappa(A)``.

    Householder QR of ``A`` followed by a triangular solve; the singular
    values come from the small ``N x N`` triangular factor.
    """
    c, kappa, *_ = _solve_full(A, b)
    return c, kappa


def _solve_full(A, b):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    M, N = A.shape
    if M < N:
        raise SolveFailure(f"underdetermined system: M={M} < N={N}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise DataError("non-finite entries in the least-squares system")
    Qa, Ra = np.linalg.qr(A, mode="reduced")
    s = np.linalg.svd(Ra, compute_uv=False)
    smax, smin = float(s[0]), float(s[-1])
    if smax == 0 or smin / smax < max(M, N) * np.finfo(float).eps * SOLVE_SAFETY:
        raise SolveFailure(
            f"A is numerically rank deficient: sigma_max={smax:.3e}, sigma_min={smin:.3e}",
            singular_values=s,
        )
    c = solve_triangular(Ra, Qa.T @ b, lower=False)
    residual = float(np.linalg.norm(A @ c - b))
    return c, smax / smin, smin, smax, residual


def fit(method: str, A, b, indices) -> WlsFit:
    c, kappa, smin, smax, residual = _solve_full(A, b)
    return WlsFit(method, np.asarray(indices), A, b, c, kappa, smin, smax, residual)


def evaluate_on_grid(f: OrthoFactorization, c) -> np.ndarray:
    """``sqrt(K) Q c``: the approximation at all grid points."""
    c = np.asarray(c, dtype=float)
    return math.sqrt(f.K) * (f.Q[:, : len(c)] @ c)


def evaluate_at(f: OrthoFactorization, basis: TensorLegendreBasis, c, y, psi=None):
    """``sum_i c_i phi_i(y)`` at one point or an array of points.

    Computed as ``psi(y) . (R^{-1} c)``, which equals ``(R^{-T} psi(y)) . c``
    and needs a single triangular solve regardless of the number of points.
    ``psi`` may carry precomputed basis values for ``y``.
    """
    c = np.asarray(c, dtype=float)
    n = len(c)
    coef = solve_triangular(f.R[:n, :n], c, lower=False)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1 and psi is None
    if psi is None:
        psi = basis.evaluate(y, columns=slice(0, n))
    vals = psi[:, :n] @ coef
    return float(vals[0]) if single else vals


class EvaluationCache:
    """Function values keyed by grid index; each index is evaluated at most once.

    Used so adaptive sampling never re-evaluates the target at recycled
    sample points.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], points: np.ndarray):
        self._func = func
        self._points = points
        self._values: dict[int, float] = {}
        self.n_calls = 0

    def __call__(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        missing = np.unique(indices[[int(i) not in self._values for i in indices.tolist()]]) if indices.size else indices
        if missing.size:
            vals = np.asarray(self._func(self._points[missing]), dtype=float).reshape(-1)
            self._values.update(zip(missing.tolist(), vals.tolist()))
            self.n_calls += 1
        return np.array([self._values[i] for i in indices.tolist()])

    @property
    def n_evaluations(self) -> int:
        return len(self._values)

    def evaluated_indices(self) -> set[int]:
        return set(self._values)

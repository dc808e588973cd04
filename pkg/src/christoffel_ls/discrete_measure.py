r"""Discrete orthogonality measure on a random K-grid.

Given grid points :math:`z_1, \dots, z_K` drawn uniformly on the domain and a
starting basis :math:`\psi_1, \dots, \psi_N`, this module assembles

.. math::

    B_{ij} = \psi_j(z_i) / \sqrt{K},

checks that it has full column rank and computes the reduced QR
factorisation :math:`B = QR` with a positive diagonal in ``R``. The functions
:math:`\phi_i = \sum_{j \le i} (R^{-T})_{ij} \psi_j` are then orthonormal for
the uniform discrete measure on the grid.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular

from .domains import Domain, sample_uniform
from .errors import ConfigurationError, FullRankFailure
from .legendre import TensorLegendreBasis
from .rng import RngStream, as_stream

log = logging.getLogger(__name__)

RANK_SAFETY = 16.0
REGENERATE, GROW = "regenerate", "grow"


@dataclass(frozen=True)
class KGrid:
    """``K`` points drawn i.i.d. from the uniform measure on a domain."""

    points: np.ndarray = field(repr=False)
    provenance: str = ""

    @property
    def K(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def generate_grid(domain: Domain, K: int, rng: RngStream | int, **sampler_kw) -> KGrid:
    if K < 1:
        raise ConfigurationError(f"K must be >= 1, got {K}")
    rng = as_stream(rng)
    pts = sample_uniform(domain, K, rng, **sampler_kw)
    pts.setflags(write=False)
    return KGrid(pts, f"{domain.name};seed={rng.seed};stream={rng.stream};path={rng.path}")


def save_grid(grid: KGrid, path) -> Path:
    """Dump grid points for audits: ``.npy`` (binary) or anything else as CSV."""
    path = Path(path)
    if path.suffix == ".npy":
        np.save(path, grid.points)
    else:
        header = ",".join(f"y{k + 1}" for k in range(grid.d))
        np.savetxt(path, grid.points, delimiter=",", header=header, comments="", fmt="%.17g")
    return path


def load_grid(path) -> KGrid:
    path = Path(path)
    if path.suffix == ".npy":
        pts = np.load(path)
    else:
        pts = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return KGrid(pts, f"file:{path}")


def rank_tolerance(K: int, N: int) -> float:
    """Relative singular-value floor below which B counts as rank deficient."""
    return max(K, N) * np.finfo(float).eps * RANK_SAFETY


@dataclass(frozen=True)
class OrthoFactorization:
    """Reduced QR factorisation of ``B`` with ``diag(R) > 0``.

    ``Q`` and ``R`` of a factorisation built by successive
    :func:`extend_factorization` calls agree (up to rounding) with a direct
    factorisation, so leading blocks describe the nested subspaces.
    """

    B: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    sigma_min: float
    sigma_max: float

    @property
    def K(self) -> int:
        return self.Q.shape[0]

    @property
    def N(self) -> int:
        return self.Q.shape[1]

    @property
    def rank_ratio(self) -> float:
        return self.sigma_min / self.sigma_max if self.sigma_max > 0 else 0.0

    @property
    def full_rank(self) -> bool:
        return self.rank_ratio >= rank_tolerance(self.K, self.N)

    def leading(self, n: int) -> "OrthoFactorization":
        """Factorisation of the first ``n`` columns (views, no copies).

        Singular values are those of the leading block of ``R``.
        """
        if not 0 < n <= self.N:
            raise ConfigurationError(f"cannot take {n} leading columns of an N={self.N} factorisation")
        if n == self.N:
            return self
        R = self.R[:n, :n]
        smin, smax = _extreme_singular_values(R)
        return OrthoFactorization(self.B[:, :n], self.Q[:, :n], R, smin, smax)


def _extreme_singular_values(R: np.ndarray) -> tuple[float, float]:
    s = np.linalg.svd(R, compute_uv=False)
    return float(s[-1]), float(s[0])


def _positive_diagonal(Q: np.ndarray, R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return Q * signs, R * signs[:, None]


def _check_rank(B_shape, R) -> tuple[float, float]:
    smin, smax = _extreme_singular_values(R)
    K, N = B_shape
    if smax == 0 or smin / smax < rank_tolerance(K, N):
        raise FullRankFailure(smin, smax)
    return smin, smax


def assemble_and_factor(grid: KGrid, basis: TensorLegendreBasis) -> OrthoFactorization:
    """Assemble ``B`` on the grid and factor it; raises :class:`FullRankFailure`."""
    K, N = grid.K, basis.N
    if K < N:
        raise ConfigurationError(f"grid size K={K} is smaller than N={N}")
    B = basis.evaluate(grid.points) / math.sqrt(K)
    Q, R = np.linalg.qr(B, mode="reduced")
    Q, R = _positive_diagonal(Q, R)
    smin, smax = _check_rank(B.shape, R)
    return OrthoFactorization(B, Q, R, smin, smax)


def extend_factorization(
    f: OrthoFactorization, grid: KGrid, basis: TensorLegendreBasis | np.ndarray
) -> OrthoFactorization:
    """Append the columns ``f.N+1 .. N_new`` of ``B`` to an existing factorisation.

    ``basis`` is either the enlarged basis, whose first ``f.N`` functions must
    be the ones ``f`` was built from, or a ``(K, m)`` array of raw values
    ``psi_j(z_i)`` for the ``m`` appended functions. Existing columns of ``Q``
    and the leading block of ``R`` are copied unchanged. New columns are
    orthogonalised twice against the existing ``Q`` (classical Gram-Schmidt
    with one re-orthogonalisation pass), then factored among themselves by
    Householder QR.
    """
    if grid.K != f.K:
        raise ConfigurationError("grid does not match the factorisation")
    n_old = f.N
    if isinstance(basis, TensorLegendreBasis):
        n_new = basis.N
        if n_new < n_old:
            raise ConfigurationError(f"cannot shrink a factorisation from {n_old} to {n_new} columns")
        C = basis.evaluate(grid.points, columns=slice(n_old, n_new)) / math.sqrt(grid.K)
    else:
        C = np.asarray(basis, dtype=float).reshape(grid.K, -1) / math.sqrt(grid.K)
        n_new = n_old + C.shape[1]
    if n_new == n_old:
        return f
    if n_new > grid.K:
        raise ConfigurationError(f"grid size K={grid.K} is smaller than N={n_new}")
    W = C.copy()
    R12 = np.zeros((n_old, n_new - n_old))
    for _ in range(2):
        S = f.Q.T @ W
        W -= f.Q @ S
        R12 += S
    Q2, R22 = np.linalg.qr(W, mode="reduced")
    Q2, R22 = _positive_diagonal(Q2, R22)
    Q = np.hstack([f.Q, Q2])
    R = np.zeros((n_new, n_new))
    R[:n_old, :n_old] = f.R
    R[:n_old, n_old:] = R12
    R[n_old:, n_old:] = R22
    B = np.hstack([f.B, C])
    smin, smax = _check_rank(B.shape, R)
    return OrthoFactorization(B, Q, R, smin, smax)


def factor_schedule(grid: KGrid, bases: list[TensorLegendreBasis]) -> OrthoFactorization:
    """Factor the largest basis by extending stage by stage through ``bases``."""
    f = assemble_and_factor(grid, bases[0])
    for basis in bases[1:]:
        f = extend_factorization(f, grid, basis)
    return f


def factor_with_policy(
    domain: Domain,
    K: int,
    basis: TensorLegendreBasis | list[TensorLegendreBasis],
    rng: RngStream | int,
    policy: str = REGENERATE,
    retries: int = 3,
) -> tuple[KGrid, OrthoFactorization]:
    """Draw a grid and factor, handling rank failures.

    ``policy="regenerate"`` redraws a fresh grid (up to ``retries`` times);
    ``policy="grow"`` keeps the points and appends 50% more each retry.
    The last :class:`FullRankFailure` propagates when retries run out.
    """
    if policy not in (REGENERATE, GROW):
        raise ConfigurationError(f"unknown rank-failure policy {policy!r}")
    bases = basis if isinstance(basis, list) else [basis]
    rng = as_stream(rng)
    grid = generate_grid(domain, K, rng.child(0))
    for attempt in range(retries + 1):
        try:
            return grid, factor_schedule(grid, bases)
        except FullRankFailure as exc:
            if attempt == retries:
                raise
            log.warning("attempt %d: %s; applying %s policy", attempt + 1, exc, policy)
            if policy == REGENERATE:
                grid = generate_grid(domain, K, rng.child(attempt + 1))
            else:
                extra = generate_grid(domain, max(1, math.ceil(grid.K * 0.5)), rng.child(attempt + 1))
                grid = KGrid(np.vstack([grid.points, extra.points]), grid.provenance + f"+grow{attempt + 1}")
    raise AssertionError("unreachable")


def eval_phi(f: OrthoFactorization, basis: TensorLegendreBasis, y) -> np.ndarray:
    """Orthonormal basis values ``phi_1..phi_N`` at ``y`` by solving ``R^T x = psi(y)``.

    ``y`` may be a single point (returns ``(N,)``) or an array of points
    (returns ``(T, N)``). Only the first ``f.N`` basis functions are used.
    """
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    psi = basis.evaluate(y, columns=slice(0, f.N))
    phi = solve_triangular(f.R, psi.T, trans="T", lower=False).T
    return phi[0] if single else phi

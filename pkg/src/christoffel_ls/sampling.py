r"""Near-optimal discrete sampling distributions on the K-grid.

Method 1 draws all ``M`` sample indices from the single distribution

.. math::

    \pi_i = \frac{1}{N} \sum_{j=1}^{N} |q_{ij}|^2 = \frac{1}{K w(z_i)},

where ``w`` is the reciprocal of the (normalised) Christoffel function of the
space on the grid. Method 2 draws ``k_t`` indices from each per-column
distribution :math:`\pi^{(l)}_i = |q_{il}|^2` and keeps every earlier draw as
the space grows, so stage ``t`` only needs ``M_t - M_{t-1}`` fresh draws.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .discrete_measure import OrthoFactorization
from .errors import ConfigurationError
from .rng import RngStream, as_stream

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightFunction:
    """Values ``w(z_i)`` of the optimal weight on the grid (``inf`` where ``pi_i = 0``)."""

    values: np.ndarray = field(repr=False)

    @property
    def inverse(self) -> np.ndarray:
        return 1.0 / self.values


@dataclass(frozen=True)
class Method1Plan:
    pi: np.ndarray = field(repr=False)
    M: int
    indices: np.ndarray = field(repr=False)


def method1_distribution(f: OrthoFactorization) -> tuple[np.ndarray, WeightFunction]:
    """Method 1 distribution ``pi`` and the matching weight ``w = 1 / (K pi)``."""
    pi = np.einsum("ij,ij->i", f.Q, f.Q) / f.N
    with np.errstate(divide="ignore"):
        w = 1.0 / (f.K * pi)
    return pi, WeightFunction(w)


def column_distribution(f: OrthoFactorization, l: int) -> np.ndarray:
    """Method 2 distribution ``pi^(l)_i = |q_il|^2`` (``l`` is 1-based)."""
    q = f.Q[:, l - 1]
    return q * q


def method2_mixture(f: OrthoFactorization, N_t: int | None = None) -> np.ndarray:
    """Average of the first ``N_t`` per-column distributions."""
    N_t = f.N if N_t is None else N_t
    Q = f.Q[:, :N_t]
    return np.einsum("ij,ij->i", Q, Q) / N_t


def draw_categorical(p: np.ndarray, size: int, rng: RngStream | int) -> np.ndarray:
    """I.i.d. draws from the discrete distribution ``p`` (inverse CDF, binary search).

    Zero-probability entries occupy empty CDF intervals and are never drawn.
    """
    rng = as_stream(rng)
    cdf = np.cumsum(p)
    total = cdf[-1]
    u = rng.random(size) * total
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(p) - 1)


def draw_method1(pi: np.ndarray, M: int, rng: RngStream | int, N: int | None = None) -> np.ndarray:
    """``M`` i.i.d. grid indices from ``pi`` (with replacement)."""
    if M < 1:
        raise ConfigurationError(f"M must be >= 1, got {M}")
    if N is not None and M < N:
        log.warning("drawing M=%d < N=%d samples; the least-squares solve will reject this", M, N)
    return draw_categorical(pi, M, rng)


def uniform_distribution(K: int) -> np.ndarray:
    return np.full(K, 1.0 / K)


@dataclass(frozen=True)
class Method2Plan:
    """Draw ledger for adaptive sampling.

    ``Ns``, ``ks`` and ``Ms`` hold ``N_t``, ``k_t`` and ``M_t = k_t N_t`` for
    every completed stage. Draws are stored in the order they were made;
    ``draw_l`` is the 1-based basis index each draw came from and
    ``draw_stage`` the 1-based stage that made it.
    """

    Ns: tuple[int, ...] = ()
    ks: tuple[int, ...] = ()
    indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64), repr=False)
    draw_l: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64), repr=False)
    draw_stage: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64), repr=False)

    @property
    def stage(self) -> int:
        return len(self.Ns)

    @property
    def Ms(self) -> tuple[int, ...]:
        return tuple(k * n for k, n in zip(self.ks, self.Ns))

    @property
    def N(self) -> int:
        return self.Ns[-1] if self.Ns else 0

    @property
    def k(self) -> int:
        return self.ks[-1] if self.ks else 0

    @property
    def M(self) -> int:
        return self.k * self.N

    def draws_per_l(self) -> np.ndarray:
        """Number of draws made from each ``pi^(l)``, ``l = 1..N``."""
        return np.bincount(self.draw_l, minlength=self.N + 1)[1:]

    def fresh_draws(self, stage: int) -> int:
        """Draws made at 1-based ``stage``."""
        return int(np.count_nonzero(self.draw_stage == stage))


def method2_advance(plan: Method2Plan, f: OrthoFactorization, k_t: int, rng: RngStream | int) -> Method2Plan:
    """Run Steps 4-5 of the adaptive method for the next stage.

    ``f`` covers the ``N_t`` columns of the new stage; its leading columns
    must coincide with those used at earlier stages, which the positive
    diagonal convention of the factorisation guarantees. Old columns get
    ``k_t - k_{t-1}`` extra draws, new columns get ``k_t``.
    """
    rng = as_stream(rng)
    N_prev, k_prev = plan.N, plan.k
    N_t = f.N
    if k_t < k_prev:
        raise ConfigurationError(f"sampling ratios must be nondecreasing, got k_t={k_t} < k_(t-1)={k_prev}")
    if k_t < 1:
        raise ConfigurationError(f"k_t must be >= 1, got {k_t}")
    if N_t <= N_prev:
        raise ConfigurationError(f"subspace dimensions must increase, got N_t={N_t} <= N_(t-1)={N_prev}")
    t = plan.stage + 1
    new_idx, new_l = [], []
    for l in range(1, N_t + 1):
        count = k_t - k_prev if l <= N_prev else k_t
        if count == 0:
            continue
        new_idx.append(draw_categorical(column_distribution(f, l), count, rng))
        new_l.append(np.full(count, l, dtype=np.int64))
    fresh_idx = np.concatenate(new_idx) if new_idx else np.zeros(0, dtype=np.int64)
    fresh_l = np.concatenate(new_l) if new_l else np.zeros(0, dtype=np.int64)
    expected = k_t * N_t - k_prev * N_prev
    assert fresh_idx.size == expected, (fresh_idx.size, expected)
    return Method2Plan(
        Ns=plan.Ns + (N_t,),
        ks=plan.ks + (k_t,),
        indices=np.concatenate([plan.indices, fresh_idx]),
        draw_l=np.concatenate([plan.draw_l, fresh_l]),
        draw_stage=np.concatenate([plan.draw_stage, np.full(fresh_idx.size, t, dtype=np.int64)]),
    )


def mixture_check(plan: Method2Plan, f: OrthoFactorization) -> float:
    """Max deviation between the average of the ``pi^(l)`` and Method 1's ``pi``.

    The average is accumulated column by column from the individual
    distributions; Method 1's ``pi`` comes from :func:`method1_distribution`
    applied to the leading ``N_t`` columns.
    """
    N_t = plan.N
    if N_t == 0:
        raise ConfigurationError("plan has no completed stage")
    acc = np.zeros(f.K)
    for l in range(1, N_t + 1):
        acc += column_distribution(f, l)
    pi1, _ = method1_distribution(f.leading(N_t))
    return float(np.max(np.abs(acc / N_t - pi1)))


def target_M_nlogn(N: int, c: float = 1.0) -> int:
    """Smallest integer ``M >= c N ln N``, never below ``N`` (``ln 1 = 0``)."""
    return max(N, math.ceil(c * N * math.log(N))) if N > 1 else 1


def default_k_schedule(Ns: Sequence[int], m_target: Callable[[int], int] = target_M_nlogn) -> list[int]:
    """``k_t = max(k_{t-1}, ceil(M_target(N_t) / N_t))``."""
    ks, prev = [], 0
    for N in Ns:
        prev = max(prev, math.ceil(m_target(N) / N))
        ks.append(prev)
    return ks


def write_ledger(plan: Method2Plan, path) -> Path:
    """CSV with columns ``stage,l,grid_index`` (stage and l 1-based, grid index 0-based)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "l", "grid_index"])
        writer.writerows(zip(plan.draw_stage.tolist(), plan.draw_l.tolist(), plan.indices.tolist()))
    return path


def read_ledger(path) -> list[tuple[int, int, int]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [(int(r["stage"]), int(r["l"]), int(r["grid_index"])) for r in reader]

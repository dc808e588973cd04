r"""Multi-index sets defining polynomial approximation spaces.

A multi-index set :math:`\Lambda \subset \mathbb{N}_0^d` selects the tensor
Legendre polynomials spanning the space :math:`P`. Three kinds are supported:

* ``hc`` hyperbolic cross, :math:`\prod_k (n_k + 1) \le n + 1`
* ``td`` total degree, :math:`\sum_k n_k \le n`
* ``tp`` tensor product, :math:`\max_k n_k \le n`

Indices are stored in a canonical order chosen so that, for a fixed kind and
dimension, the set of order ``n`` is a prefix of the set of any larger order.
Nested spaces :math:`P_1 \subset P_2 \subset \dots` then correspond to
leading columns of one basis matrix, which adaptive sampling relies on.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigurationError

KINDS = ("hc", "td", "tp")
_KIND_ALIASES = {
    "hc": "hc",
    "hyperbolic-cross": "hc",
    "hyperbolic_cross": "hc",
    "td": "td",
    "total-degree": "td",
    "total_degree": "td",
    "tp": "tp",
    "tensor": "tp",
}


def _level(kind: str, index: tuple[int, ...]) -> int:
    """Smallest order ``n`` of ``kind`` whose set contains ``index``."""
    if kind == "hc":
        return math.prod(k + 1 for k in index) - 1
    if kind == "td":
        return sum(index)
    if kind == "tp":
        return max(index, default=0)
    return 0


def canonical_key(kind: str, index: tuple[int, ...]) -> tuple:
    """Sort key: entry level for ``kind``, then product, then l1 norm, then lex.

    For hyperbolic crosses the level equals ``prod(n_k + 1) - 1`` so the key
    reduces to ``(prod(n_k + 1), |n|_1, lex)``.
    """
    return (_level(kind, index), math.prod(k + 1 for k in index), sum(index), index)


@dataclass(frozen=True, eq=False)
class MultiIndexSet:
    """Ordered set of ``d``-dimensional multi-indices.

    Attributes
    ----------
    d : int
        Ambient dimension.
    kind : str
        ``"hc"``, ``"td"``, ``"tp"`` or ``"custom"``.
    order : int or None
        The order ``n`` used to build the set (``None`` for custom sets).
    indices : numpy.ndarray
        Read-only integer array of shape ``(N, d)``.
    """

    d: int
    kind: str
    order: int | None
    indices: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.indices, dtype=np.int64).reshape(-1, self.d)
        if self.d < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {self.d}")
        if arr.size and arr.min() < 0:
            raise ConfigurationError("multi-index entries must be non-negative")
        if len({tuple(row) for row in arr.tolist()}) != len(arr):
            raise ConfigurationError("multi-index set contains duplicates")
        arr.setflags(write=False)
        object.__setattr__(self, "indices", arr)

    def __eq__(self, other):
        if not isinstance(other, MultiIndexSet):
            return NotImplemented
        return (self.d, self.kind, self.order) == (other.d, other.kind, other.order) and np.array_equal(
            self.indices, other.indices
        )

    def __hash__(self):
        return hash((self.d, self.kind, self.order, self.indices.tobytes()))

    @property
    def N(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return (tuple(row) for row in self.indices.tolist())

    def __contains__(self, index) -> bool:
        return tuple(int(k) for k in index) in self._lookup

    @property
    def _lookup(self) -> dict[tuple[int, ...], int]:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {idx: pos for pos, idx in enumerate(self)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    def position(self, index) -> int:
        """Zero-based position of ``index`` in the canonical order."""
        return self._lookup[tuple(int(k) for k in index)]

    def max_degrees(self) -> np.ndarray:
        """Largest exponent per coordinate (zeros for an empty set)."""
        if self.N == 0:
            return np.zeros(self.d, dtype=np.int64)
        return self.indices.max(axis=0)

    def is_prefix_of(self, other: "MultiIndexSet") -> bool:
        return (
            self.d == other.d
            and self.N <= other.N
            and np.array_equal(self.indices, other.indices[: self.N])
        )

    def describe(self) -> str:
        return f"{self.kind}:d={self.d},n={self.order}"


def _hc_indices(d: int, budget: int) -> list[tuple[int, ...]]:
    # budget = n + 1; each coordinate consumes a factor (k + 1)
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int):
        if len(prefix) == d:
            out.append(prefix)
            return
        k = 0
        while k + 1 <= remaining:
            rec(prefix + (k,), remaining // (k + 1))
            k += 1

    rec((), budget)
    return out


def _td_indices(d: int, n: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int):
        if len(prefix) == d:
            out.append(prefix)
            return
        for k in range(remaining + 1):
            rec(prefix + (k,), remaining - k)

    rec((), n)
    return out


def _build(kind: str, d: int, n: int, raw: Iterable[tuple[int, ...]]) -> MultiIndexSet:
    if d < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {d}")
    if n < 0:
        raise ConfigurationError(f"order must be >= 0, got {n}")
    ordered = sorted(raw, key=lambda idx: canonical_key(kind, idx))
    return MultiIndexSet(d=d, kind=kind, order=n, indices=np.array(ordered, dtype=np.int64).reshape(-1, d))


def hyperbolic_cross(d: int, n: int) -> MultiIndexSet:
    """Hyperbolic cross of order ``n``: all indices with ``prod(n_k + 1) <= n + 1``."""
    _check_dn(d, n)
    return _build("hc", d, n, _hc_indices(d, n + 1))


def total_degree(d: int, n: int) -> MultiIndexSet:
    """Total-degree set of order ``n``: all indices with ``sum(n_k) <= n``."""
    _check_dn(d, n)
    return _build("td", d, n, _td_indices(d, n))


def tensor_product(d: int, n: int) -> MultiIndexSet:
    """Full tensor grid ``{0..n}^d``."""
    _check_dn(d, n)
    return _build("tp", d, n, itertools.product(range(n + 1), repeat=d))


def _check_dn(d, n):
    if int(d) != d or d < 1:
        raise ConfigurationError(f"dimension must be a positive integer, got {d!r}")
    if int(n) != n or n < 0:
        raise ConfigurationError(f"order must be a non-negative integer, got {n!r}")


_CONSTRUCTORS = {"hc": hyperbolic_cross, "td": total_degree, "tp": tensor_product}


def index_set(kind: str, d: int, n: int) -> MultiIndexSet:
    """Dispatch on ``kind`` (accepts the long aliases, e.g. ``"hyperbolic-cross"``)."""
    try:
        key = _KIND_ALIASES[kind.lower()]
    except KeyError:
        raise ConfigurationError(f"unknown index-set kind {kind!r}; expected one of {KINDS}") from None
    return _CONSTRUCTORS[key](int(d), int(n))


def from_indices(indices, d: int | None = None) -> MultiIndexSet:
    """Wrap an explicit list of indices, keeping the given order."""
    arr = np.asarray(list(indices), dtype=np.int64)
    if d is None:
        if arr.ndim != 2:
            raise ConfigurationError("cannot infer dimension from an empty index list")
        d = arr.shape[1]
    return MultiIndexSet(d=d, kind="custom", order=None, indices=arr.reshape(-1, d))


def is_lower_set(lam: MultiIndexSet) -> bool:
    """True iff every componentwise-smaller index of a member is a member.

    Checking the ``d`` immediate lower neighbours of each member suffices:
    downward closure then follows by induction on ``|n|_1``.
    """
    members = set(lam)
    for idx in members:
        for k, entry in enumerate(idx):
            if entry > 0 and idx[:k] + (entry - 1,) + idx[k + 1:] not in members:
                return False
    return True


_SPEC_RE = re.compile(r"^\s*([A-Za-z_\-]+)\s*:\s*(.*)$")


def parse_index_set(spec: str) -> MultiIndexSet:
    """Parse ``"hc:d=2,n=30"``, ``"td:d=3,n=5"`` or ``"tp:d=2,n=4"``."""
    m = _SPEC_RE.match(spec)
    if not m:
        raise ConfigurationError(f"malformed index-set spec {spec!r}")
    kind, rest = m.groups()
    params = _parse_params(rest, spec)
    missing = {"d", "n"} - params.keys()
    if missing:
        raise ConfigurationError(f"index-set spec {spec!r} is missing {sorted(missing)}")
    try:
        d, n = int(params["d"]), int(params["n"])
    except ValueError:
        raise ConfigurationError(f"non-integer d/n in {spec!r}") from None
    return index_set(kind, d, n)


def _parse_params(text: str, spec: str) -> dict[str, str]:
    params = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise ConfigurationError(f"expected key=value in {spec!r}, got {part!r}")
        key, value = (s.strip() for s in part.split("=", 1))
        params[key] = value
    return params

"""Benchmark targets ``f1``-``f4`` and random in-space polynomials.

=======  ==================================================================
``f1``   ``exp(-(y_1 + ... + y_d) / d)``
``f2``   ``1 / sum_i sqrt(|y_i|)``, singular at the origin
``f3``   product peak ``prod_i a / (a + (y_i + (-1)^(i+1) / (i+1))^2)``,
         ``a = d / 4``
``f4``   ``1 / (y_1^2 + y_2^2)``, singular on ``y_1 = y_2 = 0``
=======  ==================================================================
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domains import Domain
from .errors import ConfigurationError
from .legendre import TensorLegendreBasis
from .multiindex import MultiIndexSet
from .rng import FUNCTION_STREAM, RngStream


@dataclass(frozen=True)
class TargetFunction:
    """Vectorised real function on ``[-1, 1]^d``.

    Calling with an ``(T, d)`` array returns ``(T,)`` values; a single
    ``(d,)`` point returns a float.
    """

    name: str
    d: int
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    note: str = ""
    coefficients: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        single = y.ndim == 1
        if y.shape[-1] != self.d:
            raise ConfigurationError(f"{self.name} expects d={self.d}, got points of dimension {y.shape[-1]}")
        pts = y.reshape(-1, self.d)
        vals = np.asarray(self.evaluator(pts), dtype=float)
        return float(vals[0]) if single else vals


def _f1(d):
    return lambda y: np.exp(-y.sum(axis=1) / d)


def _f2(y):
    with np.errstate(divide="ignore"):
        return 1.0 / np.sqrt(np.abs(y)).sum(axis=1)


def _f3(d):
    a = d / 4.0
    i = np.arange(1, d + 1)
    shift = (-1.0) ** (i + 1) / (i + 1)
    return lambda y: np.prod(a / (a + (y + shift) ** 2), axis=1)


def _f4(y):
    with np.errstate(divide="ignore"):
        return 1.0 / (y[:, 0] ** 2 + y[:, 1] ** 2)


def in_space(index_set: MultiIndexSet, seed: int = 0) -> TargetFunction:
    """``sum_j a_j psi_j`` with i.i.d. standard normal ``a_j`` over ``index_set``."""
    basis = TensorLegendreBasis(index_set)
    coef = RngStream(seed, FUNCTION_STREAM).normal(size=index_set.N)
    coef.setflags(write=False)
    return TargetFunction(
        f"inspace(seed={seed})",
        index_set.d,
        lambda y: basis.evaluate(y) @ coef,
        f"polynomial in {index_set.describe()}",
        coef,
    )


def builtin_function(name: str, d: int, index_set: MultiIndexSet | None = None, seed: int = 0) -> TargetFunction:
    """Look up ``f1``..``f4`` or ``inspace`` (which needs ``index_set``)."""
    if int(d) != d or d < 1:
        raise ConfigurationError(f"dimension must be a positive integer, got {d!r}")
    key = name.strip().lower().replace("_", "")
    if key == "f1":
        return TargetFunction("f1", d, _f1(d), "entire")
    if key == "f2":
        return TargetFunction("f2", d, _f2, "continuous, unbounded at the origin")
    if key == "f3":
        return TargetFunction("f3", d, _f3(d), "analytic product peak")
    if key == "f4":
        if d < 2:
            raise ConfigurationError("f4 needs d >= 2")
        return TargetFunction("f4", d, _f4, "unbounded on the y1 = y2 = 0 axis")
    if key == "inspace":
        if index_set is None:
            raise ConfigurationError("inspace needs an index set")
        if index_set.d != d:
            raise ConfigurationError(f"index set has d={index_set.d}, expected {d}")
        return in_space(index_set, seed)
    raise ConfigurationError(f"unknown function {name!r}")


def parse_function(spec: str) -> tuple[str, dict]:
    """Split ``"inspace:seed=3,n=2"`` into ``("inspace", {"seed": 3, "n": 2})``."""
    name, _, rest = spec.strip().partition(":")
    params = {}
    for part in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = part.partition("=")
        if not eq:
            raise ConfigurationError(f"expected key=value in function spec {spec!r}, got {part!r}")
        try:
            params[key.strip()] = int(value)
        except ValueError:
            raise ConfigurationError(f"function parameter {key}={value!r} is not an integer") from None
    allowed = {"seed", "n"} if name.strip().lower().replace("_", "") == "inspace" else set()
    extra = set(params) - allowed
    if extra:
        raise ConfigurationError(f"unexpected parameters for function {name!r}: {sorted(extra)}")
    return name.strip(), params


def _axis_probes(d: int, per_dim: int = 41) -> np.ndarray:
    """Points with ``y_1 = y_2 = 0`` on a lattice over the remaining coordinates."""
    if d == 2:
        return np.zeros((1, 2))
    ticks = np.linspace(-1.0, 1.0, per_dim if d == 3 else 11)
    rest = np.array(list(itertools.product(ticks, repeat=d - 2)))
    return np.hstack([np.zeros((len(rest), 2)), rest])


def check_pairing(func: TargetFunction, domain: Domain) -> None:
    """Reject targets that are singular somewhere on the domain.

    ``f2`` may not be used where the origin belongs to the domain, ``f4``
    where any probed point of the ``y_1 = y_2 = 0`` axis does.
    """
    if func.d != domain.d:
        raise ConfigurationError(f"function has d={func.d} but domain {domain.name} has d={domain.d}")
    if func.name == "f2" and domain.contains(np.zeros(domain.d)):
        raise ConfigurationError(f"f2 is singular at the origin, which lies in {domain.name}")
    if func.name == "f4" and np.any(domain.contains(_axis_probes(domain.d))):
        raise ConfigurationError(f"f4 is singular on the y1 = y2 = 0 axis, which meets {domain.name}")

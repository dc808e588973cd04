"""Irregular domains inside ``[-1, 1]^d`` and uniform sampling on them.

A :class:`Domain` is an indicator predicate plus metadata. Built-in shapes
cover the annuli, the half-space-cut cube and the cylinder complement used in
the experiments; combinators build intersections, unions and differences.
Uniform samples come from rejection sampling with a uniform proposal on the
bounding cube.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, SamplingBudgetExceeded
from .rng import RngStream, as_stream

DEFAULT_MAX_ATTEMPTS = 10_000

Indicator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Domain:
    """Subset of ``[-1, 1]^d`` given by a vectorised indicator.

    ``indicator`` maps an ``(T, d)`` array to a boolean ``(T,)`` array. It is
    only ever called on points of the bounding cube. ``nominal_fraction`` is
    ``vol(domain) / 2^d`` when it is known in closed form.
    """

    name: str
    d: int
    indicator: Indicator = field(repr=False, compare=False)
    nominal_fraction: float | None = None

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = pts.reshape(-1, self.d) if pts.size else pts.reshape(0, self.d)
        if pts.shape[1] != self.d:
            raise ConfigurationError(f"points have dimension {pts.shape[1]}, domain {self.name} has d={self.d}")
        in_cube = np.all(np.abs(pts) <= 1.0, axis=1)
        out = in_cube & np.asarray(self.indicator(pts), dtype=bool)
        return bool(out[0]) if single else out

    def __contains__(self, point) -> bool:
        return bool(self.contains(np.asarray(point, dtype=float).reshape(-1)))


def _ball_fraction(d: int, r: float) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d / 2**d


def _irwin_hall_cdf(x: float, n: int) -> float:
    return sum((-1) ** k * math.comb(n, k) * (x - k) ** n for k in range(int(math.floor(x)) + 1)) / math.factorial(n)


def annulus(d: int, r_min: float = 0.25, r_max: float = 1.0) -> Domain:
    """``{y : r_min <= ||y||_2 <= r_max}``."""
    _check_d(d)
    for r in (r_min, r_max):
        if not 0.0 < r <= 1.0:
            raise ConfigurationError(f"annulus radii must lie in (0, 1], got {r}")
    if r_min >= r_max:
        raise ConfigurationError(f"annulus needs r_min < r_max, got {r_min} >= {r_max}")

    def ind(y):
        r2 = np.einsum("ij,ij->i", y, y)
        return (r2 >= r_min**2) & (r2 <= r_max**2)

    frac = _ball_fraction(d, r_max) - _ball_fraction(d, r_min)
    return Domain(f"annulus(rmin={r_min:g} rmax={r_max:g})", d, ind, frac)


def halfspace_cut_cube(d: int) -> Domain:
    """``{y in (-1, 1)^d : y_1 + ... + y_d <= 1}``."""
    _check_d(d)
    # sum of d U(-1,1) <= 1  <=>  sum of d U(0,1) <= (d + 1) / 2
    frac = _irwin_hall_cdf((d + 1) / 2, d)
    return Domain("halfspace", d, lambda y: y.sum(axis=1) <= 1.0, frac)


def cylinder_complement(d: int, r: float = 0.5) -> Domain:
    """``{y in (-1, 1)^d : y_1^2 + y_2^2 >= r^2}``; needs ``d >= 2``."""
    _check_d(d)
    if d < 2:
        raise ConfigurationError("cylinder complement needs d >= 2")
    if not 0.0 < r <= 1.0:
        raise ConfigurationError(f"cylinder radius must lie in (0, 1], got {r}")
    return Domain(
        f"cylcomp(r={r:g})",
        d,
        lambda y: y[:, 0] ** 2 + y[:, 1] ** 2 >= r**2,
        1.0 - math.pi * r**2 / 4.0,
    )


def cube(d: int) -> Domain:
    _check_d(d)
    return Domain("cube", d, lambda y: np.ones(len(y), dtype=bool), 1.0)


def intersect(*domains: Domain) -> Domain:
    d = _same_d(domains)
    return Domain(
        "intersect(" + ";".join(dom.name for dom in domains) + ")",
        d,
        lambda y: np.logical_and.reduce([dom.contains(y) for dom in domains]),
    )


def union(*domains: Domain) -> Domain:
    d = _same_d(domains)
    return Domain(
        "union(" + ";".join(dom.name for dom in domains) + ")",
        d,
        lambda y: np.logical_or.reduce([dom.contains(y) for dom in domains]),
    )


def minus(a: Domain, b: Domain) -> Domain:
    d = _same_d((a, b))
    return Domain(f"minus({a.name};{b.name})", d, lambda y: a.contains(y) & ~b.contains(y))


def complement(a: Domain) -> Domain:
    """Complement relative to the bounding cube."""
    return Domain(
        f"complement({a.name})",
        a.d,
        lambda y: ~a.contains(y),
        None if a.nominal_fraction is None else 1.0 - a.nominal_fraction,
    )


def _check_d(d):
    if int(d) != d or d < 1:
        raise ConfigurationError(f"dimension must be a positive integer, got {d!r}")


def _same_d(domains) -> int:
    if not domains:
        raise ConfigurationError("combinator needs at least one domain")
    dims = {dom.d for dom in domains}
    if len(dims) != 1:
        raise ConfigurationError(f"cannot combine domains of different dimensions {sorted(dims)}")
    return dims.pop()


def _float_param(params, *keys, default):
    for key in keys:
        if key in params:
            try:
                return float(params.pop(key))
            except ValueError:
                raise ConfigurationError(f"parameter {key}={params.get(key)!r} is not a number") from None
    return default


def builtin_domain(name: str, d: int, params: dict | None = None) -> Domain:
    """Look up a named domain.

    Names: ``annulus`` (``rmin``, ``rmax``), ``halfspace`` /
    ``halfspace_cut_cube``, ``cylcomp`` / ``cylinder_complement`` (``r``),
    ``cube``, plus the experiment shorthands ``omega1``, ``omega2``,
    ``omega3`` and ``small_annulus``.
    """
    params = dict(params or {})
    key = name.strip().lower()
    if key in ("annulus", "omega1", "small_annulus"):
        defaults = (0.125, 0.5) if key == "small_annulus" else (0.25, 1.0)
        dom = annulus(
            d,
            _float_param(params, "rmin", "r_min", default=defaults[0]),
            _float_param(params, "rmax", "r_max", default=defaults[1]),
        )
    elif key in ("halfspace", "halfspace_cut_cube", "omega2"):
        dom = halfspace_cut_cube(d)
    elif key in ("cylcomp", "cylinder_complement", "omega3"):
        dom = cylinder_complement(d, _float_param(params, "r", default=0.5))
    elif key == "cube":
        dom = cube(d)
    else:
        raise ConfigurationError(f"unknown domain {name!r}")
    if params:
        raise ConfigurationError(f"unexpected parameters for domain {name!r}: {sorted(params)}")
    return dom


_COMBINATORS = {"intersect": intersect, "union": union, "minus": minus, "complement": complement}
_CALL_RE = re.compile(r"^([A-Za-z_]+)\((.*)\)$", re.S)


def _split_top_level(text: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for pos, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ConfigurationError(f"unbalanced parentheses in {text!r}")
        elif ch == ";" and depth == 0:
            parts.append(text[start:pos])
            start = pos + 1
    if depth != 0:
        raise ConfigurationError(f"unbalanced parentheses in {text!r}")
    parts.append(text[start:])
    return [p.strip() for p in parts]


def parse_domain(spec: str, d: int) -> Domain:
    """Parse a config string such as ``"annulus:rmin=0.25,rmax=1"``.

    Combinators take ``;``-separated arguments, e.g.
    ``"minus(cube;annulus:rmin=0.1,rmax=0.5)"``.
    """
    text = spec.strip()
    m = _CALL_RE.match(text)
    if m and m.group(1).lower() in _COMBINATORS:
        args = [parse_domain(part, d) for part in _split_top_level(m.group(2)) if part]
        fn = _COMBINATORS[m.group(1).lower()]
        try:
            dom = fn(*args)
        except TypeError:
            raise ConfigurationError(f"wrong number of arguments in {spec!r}") from None
        return dom
    name, _, rest = text.partition(":")
    params = {}
    for part in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = part.partition("=")
        if not eq:
            raise ConfigurationError(f"expected key=value in domain spec {spec!r}, got {part!r}")
        params[key.strip()] = value.strip()
    return builtin_domain(name, d, params)


def sample_uniform(
    domain: Domain,
    count: int,
    rng: RngStream | int,
    max_attempts_per_point: int = DEFAULT_MAX_ATTEMPTS,
) -> np.ndarray:
    """Draw ``count`` i.i.d. uniform points on ``domain`` by rejection.

    Proposals are uniform on ``[-1, 1]^d`` and consumed in order, so the
    result is equivalent to a point-by-point loop; the batching only affects
    speed. Raises :class:`SamplingBudgetExceeded` as soon as some point needs
    more than ``max_attempts_per_point`` proposals.
    """
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    if max_attempts_per_point < 1:
        raise ConfigurationError("max_attempts_per_point must be >= 1")
    rng = as_stream(rng)
    accepted = []
    n_accepted = 0
    proposals = 0
    run = 0  # proposals spent on the point currently being drawn
    rate_guess = domain.nominal_fraction or 0.5
    while n_accepted < count:
        need = count - n_accepted
        batch = int(min(max(need / max(rate_guess, 1e-3) * 1.1 + 64, 256), 2_000_000))
        y = rng.uniform(-1.0, 1.0, (batch, domain.d))
        hits = np.flatnonzero(domain.contains(y))
        proposals += batch
        if hits.size:
            gaps = np.diff(np.concatenate(([-1], hits)))
            gaps[0] += run
            take = min(hits.size, need)
            if gaps[:take].max() > max_attempts_per_point:
                bad = int(np.argmax(gaps[:take] > max_attempts_per_point))
                _budget_error(domain, n_accepted + bad, max_attempts_per_point, n_accepted + hits.size, proposals)
            accepted.append(y[hits[:take]])
            n_accepted += take
            run = batch - 1 - hits[-1]
        else:
            run += batch
        if run > max_attempts_per_point and n_accepted < count:
            _budget_error(domain, n_accepted, max_attempts_per_point, n_accepted, proposals)
        rate_guess = max(n_accepted / proposals, 1e-3) if n_accepted else rate_guess / 4
    return np.concatenate(accepted)


def _budget_error(domain, point, budget, n_hits, proposals):
    rate = n_hits / proposals if proposals else 0.0
    raise SamplingBudgetExceeded(
        f"rejection sampling on {domain.name} exceeded {budget} attempts for point {point}; "
        f"empirical acceptance rate {rate:.3g}",
        acceptance_rate=rate,
    )

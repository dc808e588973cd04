"""Self-checks runnable from the command line.

Each suite returns a :class:`SuiteReport` holding one entry per measured
quantity together with its threshold, so failures carry the numbers that
caused them.

``orthonormality``  ``Q^T Q = I`` and discrete orthonormality of ``phi``
``distributions``   normalisation of ``pi`` and ``pi^(l)``, ``K pi w = 1``
``recovery``        exact recovery of in-space targets by both methods
``chernoff``        Monte Carlo check of the ``kappa`` / ``C`` guarantee
``oracle``          normal equations and brute-force index-set enumeration
"""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .diagnostics import bound_M_maw2, relative_rms_error
from .discrete_measure import assemble_and_factor, eval_phi, extend_factorization, generate_grid
from .domains import builtin_domain
from .errors import ConfigurationError
from .functions import in_space
from .legendre import TensorLegendreBasis
from .multiindex import KINDS, index_set
from .rng import DRAW_STREAM, EVAL_STREAM, GRID_STREAM, RngStream
from .sampling import (
    Method2Plan,
    column_distribution,
    default_k_schedule,
    draw_method1,
    method1_distribution,
    method2_advance,
    mixture_check,
    target_M_nlogn,
)
from .solver import EvaluationCache, assemble_method1, assemble_method2, evaluate_at, evaluate_on_grid, solve

SUITES = ("orthonormality", "distributions", "recovery", "chernoff", "oracle")


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, threshold, op="<="):
        value = float(value)
        ok = value <= threshold if op == "<=" else value >= threshold
        self.checks.append(Check(name, value, float(threshold), bool(ok)))

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "seconds": self.seconds,
                "checks": [asdict(c) for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class RandomConfig:
    domain: str
    d: int
    kind: str
    n: int
    N: int
    K: int

    def label(self) -> str:
        return f"{self.domain}/d={self.d}/{self.kind}:{self.n}/N={self.N}/K={self.K}"


def _largest_order(kind, d, N_max):
    n = 0
    while index_set(kind, d, n + 1).N <= N_max:
        n += 1
    return n


def random_configs(count: int, seed: int = 0, N_max: int = 300, K_max: int = 5000, d_max: int = 4) -> list[RandomConfig]:
    """Random ``(domain, d, index set, K)`` combinations.

    One-dimensional runs use only the cube: on a 1-D annulus the Legendre
    basis restricted to two short intervals is too ill-conditioned for
    double precision at moderate ``N``.
    """
    gen = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(99,)))
    out = []
    while len(out) < count:
        d = int(gen.integers(1, d_max + 1))
        domains = ["cube"] if d == 1 else ["omega1", "omega2", "omega3", "cube"]
        domain = domains[int(gen.integers(len(domains)))]
        kind = KINDS[int(gen.integers(len(KINDS)))]
        n_top = _largest_order(kind, d, N_max)
        n = int(gen.integers(0, n_top + 1))
        N = index_set(kind, d, n).N
        K = int(gen.integers(max(10 * N, 500), K_max + 1)) if max(10 * N, 500) <= K_max else K_max
        out.append(RandomConfig(domain, d, kind, n, N, K))
    return out


def _factor(cfg: RandomConfig, seed: int):
    domain = builtin_domain(cfg.domain, cfg.d)
    grid = generate_grid(domain, cfg.K, RngStream(seed, GRID_STREAM))
    basis = TensorLegendreBasis(index_set(cfg.kind, cfg.d, cfg.n))
    return domain, grid, basis, assemble_and_factor(grid, basis)


def phi_gram_error(f, basis, points, seed: int = 0, full_upto: int = 50, pairs: int = 500) -> float:
    """``max |(1/K) sum_k phi_i(z_k) phi_j(z_k) - delta_ij|`` with ``phi`` from :func:`eval_phi`.

    All pairs are checked for ``N <= full_upto``, otherwise ``pairs`` random
    pairs plus the diagonal.
    """
    phi = eval_phi(f, basis, points)
    K, N = phi.shape
    if N <= full_upto:
        return float(np.abs(phi.T @ phi / K - np.eye(N)).max())
    gen = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(97,)))
    i = np.concatenate([np.arange(N), gen.integers(0, N, pairs)])
    j = np.concatenate([np.arange(N), gen.integers(0, N, pairs)])
    vals = np.einsum("ki,ki->i", phi[:, i], phi[:, j]) / K
    return float(np.abs(vals - (i == j)).max())


def suite_orthonormality(count: int = 20, seed: int = 0, tol: float = 1e-10) -> SuiteReport:
    rep = SuiteReport("orthonormality")
    for i, cfg in enumerate(random_configs(count, seed)):
        _, grid, basis, f = _factor(cfg, seed + i)
        qtq = np.abs(f.Q.T @ f.Q - np.eye(f.N)).max()
        rep.add(f"{cfg.label()} |QtQ-I|max", qtq, tol)
        rep.add(f"{cfg.label()} |phi gram-I|max", phi_gram_error(f, basis, grid.points, seed + i), tol)
    return rep


def suite_distributions(count: int = 20, seed: int = 0, tol: float = 1e-12) -> SuiteReport:
    rep = SuiteReport("distributions")
    for i, cfg in enumerate(random_configs(count, seed)):
        _, _, _, f = _factor(cfg, seed + i)
        pi, w = method1_distribution(f)
        rep.add(f"{cfg.label()} |sum pi-1|", abs(pi.sum() - 1), tol)
        col = max(abs(column_distribution(f, l).sum() - 1) for l in range(1, f.N + 1))
        rep.add(f"{cfg.label()} max_l |sum pi_l-1|", col, tol)
        pos = pi > 0
        rep.add(f"{cfg.label()} |K pi w-1|max", np.abs(f.K * pi[pos] * w.values[pos] - 1).max(), tol)
        plan = method2_advance(Method2Plan(), f, 1, RngStream(seed + i, DRAW_STREAM))
        rep.add(f"{cfg.label()} mixture_check", mixture_check(plan, f), tol)
    return rep


def _recovery_run(cfg: RandomConfig, seed: int):
    """E_tau and E_tau_tilde for Method 1 and Method 2 on an in-space target."""
    domain = builtin_domain(cfg.domain, cfg.d)
    grid = generate_grid(domain, cfg.K, RngStream(seed, GRID_STREAM))
    orders = sorted({max(0, cfg.n - 2), max(0, cfg.n - 1), cfg.n})
    bases = [TensorLegendreBasis(index_set(cfg.kind, cfg.d, n)) for n in orders]
    f = assemble_and_factor(grid, bases[0])
    for b in bases[1:]:
        f = extend_factorization(f, grid, b)
    basis = bases[-1]
    target = in_space(basis.index_set, seed)
    f_grid = target(grid.points)
    eval_pts = generate_grid(domain, 2000, RngStream(seed, EVAL_STREAM)).points
    f_eval = target(eval_pts)
    out = {}

    N = f.N
    pi, _ = method1_distribution(f)
    idx = draw_method1(pi, target_M_nlogn(N), RngStream(seed, DRAW_STREAM, (1,)))
    c, _ = solve(*assemble_method1(f, idx, target(grid.points[idx]), pi))
    out["method1"] = (relative_rms_error(f_grid, evaluate_on_grid(f, c)),
                      relative_rms_error(f_eval, evaluate_at(f, basis, c, eval_pts)))

    Ns = [b.N for b in bases]
    ks = default_k_schedule(Ns)
    plan = Method2Plan()
    cache = EvaluationCache(target, grid.points)
    rng = RngStream(seed, DRAW_STREAM, (2,))
    for s, (Nt, k) in enumerate(zip(Ns, ks)):
        plan = method2_advance(plan, f.leading(Nt), k, rng.child(s))
    c, _ = solve(*assemble_method2(f, plan, cache(plan.indices)))
    out["method2"] = (relative_rms_error(f_grid, evaluate_on_grid(f, c)),
                      relative_rms_error(f_eval, evaluate_at(f, basis, c, eval_pts)))
    return out


def suite_recovery(count: int = 20, seed: int = 0, tol: float = 1e-8) -> SuiteReport:
    rep = SuiteReport("recovery")
    for i, cfg in enumerate(random_configs(count, seed + 1000, N_max=200)):
        for method, (e_grid, e_off) in _recovery_run(cfg, seed + i).items():
            rep.add(f"{cfg.label()} {method} E_tau", e_grid, tol)
            rep.add(f"{cfg.label()} {method} E_tau_tilde", e_off, tol)
    return rep


def chernoff_trials(trials: int = 200, seed: int = 0, N_order: int = 4, K: int = 2000,
                    delta: float = 0.5, gamma: float = 0.1):
    """``(kappa, C)`` for Method 1 on the 2-D cube with ``M`` from the two-sided bound."""
    domain = builtin_domain("cube", 2)
    grid = generate_grid(domain, K, RngStream(seed, GRID_STREAM))
    basis = TensorLegendreBasis(index_set("hc", 2, N_order))
    f = assemble_and_factor(grid, basis)
    M = bound_M_maw2(f.N, gamma, delta)
    pi, _ = method1_distribution(f)
    out = []
    for t in range(trials):
        idx = draw_method1(pi, M, RngStream(seed, DRAW_STREAM, (t,)))
        A = f.Q[idx] / np.sqrt(M * pi[idx])[:, None]
        s = np.linalg.svd(A, compute_uv=False)
        out.append((s[0] / s[-1], 1 / s[-1]))
    return f.N, M, np.array(out)


def suite_chernoff(trials: int = 200, seed: int = 0, delta: float = 0.5, gamma: float = 0.1) -> SuiteReport:
    rep = SuiteReport("chernoff")
    N, M, kc = chernoff_trials(trials, seed, delta=delta, gamma=gamma)
    ok = (kc[:, 0] <= math.sqrt((1 + delta) / (1 - delta))) & (kc[:, 1] <= 1 / math.sqrt(1 - delta))
    rep.add(f"N={N} M={M} success fraction", ok.mean(), 1 - gamma, op=">=")
    return rep


def _normal_equations(A, b):
    return np.linalg.solve(A.T @ A, A.T @ b)


def brute_force_index_set(kind: str, d: int, n: int) -> set[tuple[int, ...]]:
    """Every multi-index in ``{0..n}^d`` satisfying the defining inequality."""
    test = {
        "hc": lambda k: math.prod(x + 1 for x in k) <= n + 1,
        "td": lambda k: sum(k) <= n,
        "tp": lambda k: max(k) <= n,
    }[kind]
    return {k for k in itertools.product(range(n + 1), repeat=d) if test(k)}


def suite_oracle(seed: int = 0, systems: int = 50, tol: float = 1e-8) -> SuiteReport:
    rep = SuiteReport("oracle")
    gen = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(98,)))
    worst = 0.0
    for _ in range(systems):
        N = int(gen.integers(1, 21))
        M = int(gen.integers(N, 101))
        A = gen.standard_normal((M, N))
        b = gen.standard_normal(M)
        c, _ = solve(A, b)
        ref = _normal_equations(A, b)
        worst = max(worst, np.abs(c - ref).max() / max(1.0, np.abs(ref).max()))
    rep.add("max relative |c - c_normal|", worst, tol)
    mismatches = 0
    for kind, d, n in itertools.product(KINDS, (1, 2, 3), range(11)):
        mismatches += set(index_set(kind, d, n)) != brute_force_index_set(kind, d, n)
    rep.add("index-set mismatches (d<=3, n<=10)", mismatches, 0)
    return rep


def run_suite(name: str, **kw) -> SuiteReport:
    fns = {
        "orthonormality": suite_orthonormality,
        "distributions": suite_distributions,
        "recovery": suite_recovery,
        "chernoff": suite_chernoff,
        "oracle": suite_oracle,
    }
    if name not in fns:
        raise ConfigurationError(f"unknown suite {name!r}; choose from {SUITES}")
    t0 = time.perf_counter()
    rep = fns[name](**kw)
    rep.seconds = time.perf_counter() - t0
    return rep

"""Config-driven sweeps over nested polynomial spaces.

A sweep fixes one K-grid, factors the basis matrix of the largest space once
(stage by stage, so every smaller space is a leading block) and then, for
each trial and method, draws samples, fits and records error and stability
numbers. Rows go to a CSV with one line per ``(method, m_rule, N, trial)``
plus a mean line per ``(method, m_rule, N)``.

Random streams are keyed as follows, so every number in the CSV is a pure
function of the config and seed:

======================  ========================================
grid (attempt ``a``)    ``(seed, GRID_STREAM, a)``
evaluation grid         ``(seed, EVAL_STREAM)``
in-space coefficients   ``(seed, FUNCTION_STREAM)``
draws                   ``(seed, DRAW_STREAM, method, rule, trial, stage)``
======================  ========================================
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular

from .diagnostics import make_eval_grid, relative_rms_error, theory_thresholds
from .discrete_measure import (
    GROW,
    REGENERATE,
    KGrid,
    OrthoFactorization,
    assemble_and_factor,
    extend_factorization,
    generate_grid,
)
from .domains import parse_domain
from .errors import ConfigurationError, FullRankFailure, SolveFailure
from .functions import builtin_function, check_pairing, parse_function
from .legendre import TensorLegendreBasis
from .multiindex import index_set
from .rng import DRAW_STREAM, EVAL_STREAM, GRID_STREAM, RngStream
from .sampling import (
    Method2Plan,
    default_k_schedule,
    draw_method1,
    method1_distribution,
    method2_advance,
)
from .solver import EvaluationCache, _solve_full, assemble_method2, assemble_weighted, evaluate_at, evaluate_on_grid

log = logging.getLogger(__name__)

METHODS = ("uniform", "method1", "method2")
COLUMNS = (
    "method", "m_rule", "d", "domain", "function", "K", "T", "N", "M", "trial", "seed",
    "status", "E_tau", "E_tau_tilde", "C", "kappa", "wall_ms", "row_type",
)


# -- M rules ----------------------------------------------------------------------


@dataclass(frozen=True)
class MRule:
    """Sample-count rule; ``text`` is what appears in the ``m_rule`` column.

    ``nlogn`` / ``nlogn:c``  ``M = max(N, ceil(c N ln N))``
    ``linear:c``             ``M = max(N, ceil(c N))``
    ``explicit:M1,M2,..``    one ``M`` per schedule stage
    ``k:k1,k2,..``           Method 2 ratios, ``M = k_t N_t``
    """

    text: str
    kind: str
    c: float = 1.0
    values: tuple[int, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "MRule":
        name, _, arg = text.strip().partition(":")
        name = name.lower()
        try:
            if name == "nlogn":
                c = float(arg) if arg else 1.0
                if c <= 0:
                    raise ConfigurationError(f"M rule {text!r} needs c > 0")
                return cls(text.strip(), name, c)
            if name == "linear":
                c = float(arg)
                if c < 1:
                    raise ConfigurationError(f"M rule {text!r} needs c >= 1 so that M >= N")
                return cls(text.strip(), name, c)
            if name in ("explicit", "k"):
                values = tuple(int(v) for v in arg.split(",") if v.strip())
                if not values or min(values) < 1:
                    raise ConfigurationError(f"M rule {text!r} needs positive integers")
                return cls(text.strip(), name, values=values)
        except ValueError:
            raise ConfigurationError(f"malformed M rule {text!r}") from None
        raise ConfigurationError(f"unknown M rule {text!r}")

    def m_values(self, Ns) -> list[int]:
        """``M`` per stage for single-space methods."""
        if self.kind == "nlogn":
            return [max(N, math.ceil(self.c * N * math.log(N))) if N > 1 else 1 for N in Ns]
        if self.kind == "linear":
            return [max(N, math.ceil(self.c * N)) for N in Ns]
        self._check_len(Ns)
        if self.kind == "explicit":
            return list(self.values)
        return [k * N for k, N in zip(self.values, Ns)]

    def k_values(self, Ns) -> list[int]:
        """Nondecreasing ratios ``k_t`` with ``k_t N_t`` at least the rule's ``M``."""
        if self.kind == "k":
            self._check_len(Ns)
            ks = list(self.values)
            if any(b < a for a, b in zip(ks, ks[1:])):
                raise ConfigurationError(f"M rule {self.text!r}: ratios must be nondecreasing")
            return ks
        target = dict(zip(Ns, self.m_values(Ns)))
        return default_k_schedule(Ns, lambda N: target[N])

    def _check_len(self, Ns):
        if len(self.values) != len(Ns):
            raise ConfigurationError(
                f"M rule {self.text!r} has {len(self.values)} entries for {len(Ns)} schedule stages"
            )


# -- configuration ----------------------------------------------------------------


@dataclass
class ExperimentConfig:
    domain: str
    d: int
    K: int
    schedule: list[int]
    function: str | None = "f1"
    index_kind: str = "hc"
    methods: list[str] = field(default_factory=lambda: ["method1"])
    m_rules: list[str] = field(default_factory=lambda: ["nlogn"])
    T: int | None = None
    trials: int = 10
    seed: int = 0
    delta: float = 0.5
    gamma: float = 0.01
    out: str = "results.csv"
    rank_policy: str = REGENERATE
    retries: int = 3
    timing: bool = False
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        if "method" in data:
            m = data.pop("method")
            data["methods"] = [m] if isinstance(m, str) else list(m)
        if "m_rule" in data:
            r = data.pop("m_rule")
            data["m_rules"] = [r] if isinstance(r, str) else list(r)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigurationError(f"bad config: {exc}") from None
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError(f"config {path} must hold a JSON object")
        return cls.from_dict(data)

    def replace(self, **changes) -> "ExperimentConfig":
        cfg = dataclasses.replace(self, **changes)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not isinstance(self.d, int) or self.d < 1:
            raise ConfigurationError(f"d must be a positive integer, got {self.d!r}")
        if not self.schedule or any(int(n) != n or n < 0 for n in self.schedule):
            raise ConfigurationError("schedule must be a nonempty list of nonnegative integer orders")
        if any(b <= a for a, b in zip(self.schedule, self.schedule[1:])):
            raise ConfigurationError(f"schedule must be strictly increasing, got {self.schedule}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigurationError(f"methods must be drawn from {METHODS}, got {self.methods}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if self.T is not None and self.T < 1:
            raise ConfigurationError(f"T must be >= 1, got {self.T}")
        if not 0 < self.delta < 1 or not 0 < self.gamma < 1:
            raise ConfigurationError("delta and gamma must lie in (0, 1)")
        if self.rank_policy not in (REGENERATE, GROW):
            raise ConfigurationError(f"rank_policy must be {REGENERATE!r} or {GROW!r}")
        if self.retries < 0 or self.workers < 1:
            raise ConfigurationError("retries must be >= 0 and workers >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.m_rules:
            raise ConfigurationError("at least one M rule is required")
        rules = [MRule.parse(r) for r in self.m_rules]
        Ns = self.dimensions()
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise ConfigurationError(f"schedule {self.schedule} does not give strictly increasing dimensions {Ns}")
        if self.K < Ns[-1]:
            raise ConfigurationError(f"K={self.K} is smaller than the largest dimension N={Ns[-1]}")
        for r in rules:
            if r.kind == "k" and "method2" not in self.methods:
                raise ConfigurationError(f"M rule {r.text!r} only applies to method2")
            if r.kind != "k":
                Ms = r.m_values(Ns)
                if any(M < N for M, N in zip(Ms, Ns)):
                    raise ConfigurationError(f"M rule {r.text!r} gives M < N")
            r.k_values(Ns) if "method2" in self.methods else None
        parse_domain(self.domain, self.d)
        if self.function is not None:
            parse_function(self.function)

    def index_sets(self):
        return [index_set(self.index_kind, self.d, n) for n in self.schedule]

    def dimensions(self) -> list[int]:
        return [lam.N for lam in self.index_sets()]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# -- factorisation with failure bookkeeping ---------------------------------------


def _factor_chain(grid: KGrid, bases) -> tuple[OrthoFactorization | None, int]:
    """Factor stage by stage; returns the last good factorisation and how many stages it covers."""
    f = None
    for s, basis in enumerate(bases):
        try:
            f = assemble_and_factor(grid, basis) if f is None else extend_factorization(f, grid, basis)
        except FullRankFailure as exc:
            log.warning("stage %d (N=%d): %s", s + 1, basis.N, exc)
            return f, s
    return f, len(bases)


def build_factorization(cfg: ExperimentConfig, domain, bases):
    """Grid plus factorisation, honouring the rank-failure policy.

    Returns ``(grid, f, n_ok)`` where ``n_ok`` counts the schedule stages
    whose factorisation succeeded on the final grid.
    """
    rng = RngStream(cfg.seed, GRID_STREAM)
    grid = generate_grid(domain, cfg.K, rng.child(0))
    for attempt in range(cfg.retries + 1):
        f, n_ok = _factor_chain(grid, bases)
        if n_ok == len(bases) or attempt == cfg.retries:
            break
        if cfg.rank_policy == REGENERATE:
            grid = generate_grid(domain, cfg.K, rng.child(attempt + 1))
        else:
            extra = generate_grid(domain, max(1, math.ceil(grid.K * 0.5)), rng.child(attempt + 1))
            grid = KGrid(np.vstack([grid.points, extra.points]), grid.provenance + f"+grow{attempt + 1}")
    return grid, f, n_ok


# -- the sweep ----------------------------------------------------------------------


@dataclass
class _Context:
    cfg: ExperimentConfig
    domain_name: str
    function_name: str
    grid: KGrid
    f: OrthoFactorization | None
    n_ok: int
    Ns: list[int]
    basis: TensorLegendreBasis
    func: object
    f_grid: np.ndarray | None
    f_eval: np.ndarray | None
    psi_eval: np.ndarray | None
    pis: list[np.ndarray]
    K: int


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) or isinstance(x, np.floating):
        return format(float(x), ".17g")
    return str(x)


def _row(ctx: _Context, method, rule, N, M, trial, status, E_tau=None, E_tt=None, C=None, kappa=None, wall=None, kind="trial"):
    cfg = ctx.cfg
    return {
        "method": method,
        "m_rule": rule,
        "d": cfg.d,
        "domain": ctx.domain_name,
        "function": ctx.function_name,
        "K": ctx.K,
        "T": cfg.T if cfg.T is not None else "",
        "N": N,
        "M": M,
        "trial": trial,
        "seed": cfg.seed,
        "status": status,
        "E_tau": E_tau,
        "E_tau_tilde": E_tt,
        "C": C,
        "kappa": kappa,
        "wall_ms": wall if cfg.timing else None,
        "row_type": kind,
    }


def _fit_row(ctx: _Context, method, rule, stage, M, trial, indices, assemble, cache):
    N = ctx.Ns[stage]
    t0 = time.perf_counter()
    fvals = cache(indices) if cache is not None else np.zeros(len(indices))
    A, b = assemble(fvals)
    try:
        c, kappa, smin, _, _ = _solve_full(A, b)
    except SolveFailure as exc:
        log.warning("%s %s N=%d trial=%d: %s", method, rule, N, trial, exc)
        return _row(ctx, method, rule, N, M, trial, "solve_failure")
    E_tau = E_tt = None
    if ctx.f_grid is not None:
        E_tau = relative_rms_error(ctx.f_grid, evaluate_on_grid(ctx.f, c))
        if ctx.psi_eval is not None:
            approx = evaluate_at(ctx.f, ctx.basis, c, None, psi=ctx.psi_eval[:, :N])
            E_tt = relative_rms_error(ctx.f_eval, approx)
    wall = (time.perf_counter() - t0) * 1e3
    return _row(ctx, method, rule, N, M, trial, "ok", E_tau, E_tt, 1.0 / smin, kappa, wall)


_METHOD_ID = {m: i for i, m in enumerate(METHODS)}


def _trial_rows(ctx: _Context, method: str, rule_idx: int, rule: MRule, trial: int) -> list[dict]:
    cfg = ctx.cfg
    rng = RngStream(cfg.seed, DRAW_STREAM, (_METHOD_ID[method], rule_idx, trial))
    cache = EvaluationCache(ctx.func, ctx.grid.points) if ctx.func is not None else None
    rows = []
    if method == "method2":
        ks = rule.k_values(ctx.Ns)
        plan = Method2Plan()
        for s, N in enumerate(ctx.Ns):
            M = ks[s] * N
            if s >= ctx.n_ok:
                rows.append(_row(ctx, method, rule.text, N, M, trial, "rank_failure"))
                continue
            fs = ctx.f.leading(N)
            plan = method2_advance(plan, fs, ks[s], rng.child(s))
            rows.append(_fit_row(ctx, method, rule.text, s, M, trial, plan.indices,
                                 lambda fv, fs=fs, p=plan: assemble_method2(fs, p, fv), cache))
        return rows
    Ms = rule.m_values(ctx.Ns)
    for s, N in enumerate(ctx.Ns):
        M = Ms[s]
        if s >= ctx.n_ok:
            rows.append(_row(ctx, method, rule.text, N, M, trial, "rank_failure"))
            continue
        fs = ctx.f.leading(N)
        if method == "method1":
            pi = ctx.pis[s]
            idx = draw_method1(pi, M, rng.child(s), N)
        else:
            pi = np.full(ctx.K, 1.0 / ctx.K)
            idx = rng.child(s).integers(0, ctx.K, M)
        rows.append(_fit_row(ctx, method, rule.text, s, M, trial, idx,
                             lambda fv, fs=fs, idx=idx, pi=pi: assemble_weighted(fs, idx, fv, pi), cache))
    return rows


def _mean(values):
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def _mean_rows(ctx: _Context, rows: list[dict], method: str, rule: str) -> list[dict]:
    out = []
    for N in ctx.Ns:
        group = [r for r in rows if r["N"] == N]
        ok = [r for r in group if r["status"] == "ok"]
        M = group[0]["M"]
        status = "ok" if len(ok) == len(group) else ("partial" if ok else "failed")
        out.append(
            _row(
                ctx, method, rule, N, M, "mean", status,
                _mean(r["E_tau"] for r in ok),
                _mean(r["E_tau_tilde"] for r in ok),
                _mean(r["C"] for r in ok),
                _mean(r["kappa"] for r in ok),
                _mean(r["wall_ms"] for r in ok) if ctx.cfg.timing else None,
                "mean",
            )
        )
    return out


def _prepare(cfg: ExperimentConfig, need_function: bool) -> _Context:
    domain = parse_domain(cfg.domain, cfg.d)
    sets = cfg.index_sets()
    bases = [TensorLegendreBasis(lam) for lam in sets]
    Ns = [b.N for b in bases]
    func = None
    fname = ""
    if cfg.function is not None:
        name, params = parse_function(cfg.function)
        lam = None
        if name.lower().replace("_", "") == "inspace":
            lam = index_set(cfg.index_kind, cfg.d, params.get("n", cfg.schedule[0]))
        func = builtin_function(name, cfg.d, lam, params.get("seed", cfg.seed))
        check_pairing(func, domain)
        fname = cfg.function
    elif need_function:
        raise ConfigurationError("this run needs a target function")
    grid, f, n_ok = build_factorization(cfg, domain, bases)
    pis = [method1_distribution(f.leading(N))[0] for N in Ns[:n_ok]] if f is not None else []
    f_grid = f_eval = psi_eval = None
    if func is not None:
        f_grid = func(grid.points)
        if cfg.T is not None:
            eval_grid = make_eval_grid(domain, cfg.T, RngStream(cfg.seed, EVAL_STREAM))
            f_eval = func(eval_grid.points)
            psi_eval = bases[-1].evaluate(eval_grid.points)
    return _Context(cfg, domain.name, fname, grid, f, n_ok, Ns, bases[-1], func,
                    f_grid, f_eval, psi_eval, pis, grid.K)


def _collect(ctx: _Context) -> list[dict]:
    cfg = ctx.cfg
    jobs = []
    for method in cfg.methods:
        for ri, text in enumerate(cfg.m_rules):
            rule = MRule.parse(text)
            if rule.kind == "k" and method != "method2":
                continue
            jobs.append((method, ri, rule))
    rows = []
    for method, ri, rule in jobs:
        def one(trial, method=method, ri=ri, rule=rule):
            return _trial_rows(ctx, method, ri, rule, trial)

        if cfg.workers > 1:
            with ThreadPoolExecutor(cfg.workers) as pool:
                per_trial = list(pool.map(one, range(cfg.trials)))
        else:
            per_trial = [one(t) for t in range(cfg.trials)]
        flat = [r for trial_rows in per_trial for r in trial_rows]
        flat.sort(key=lambda r: (ctx.Ns.index(r["N"]), r["trial"]))
        rows.extend(flat)
        rows.extend(_mean_rows(ctx, flat, method, rule.text))
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


@dataclass
class SweepResult:
    csv_path: Path
    rows: list[dict]
    summary: dict

    def means(self, method: str, m_rule: str | None = None, column: str = "E_tau") -> dict[int, float]:
        """``{N: mean value}`` from the mean rows of one method and rule."""
        out = {}
        for r in self.rows:
            if r["row_type"] == "mean" and r["method"] == method and (m_rule is None or r["m_rule"] == m_rule):
                out[r["N"]] = r[column]
        return out


def _write(cfg: ExperimentConfig, ctx: _Context, rows, out) -> SweepResult:
    path = Path(out if out is not None else cfg.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(rows), encoding="utf-8")
    summary = {
        "config": cfg.to_dict(),
        "grid": ctx.grid.provenance,
        "K_used": ctx.K,
        "dimensions": ctx.Ns,
        "stages_factored": ctx.n_ok,
        "rows": len(rows),
        "failed_rows": sum(r["status"] not in ("ok",) for r in rows if r["row_type"] == "trial"),
        "theory": {str(N): theory_thresholds(N, cfg.delta, cfg.gamma) for N in ctx.Ns},
        "notes": ["k_method2 bound evaluated with N = N_t (stage dimension)"],
    }
    if ctx.psi_eval is not None and ctx.f is not None and ctx.n_ok and cfg.T >= ctx.Ns[ctx.n_ok - 1]:
        N = ctx.Ns[ctx.n_ok - 1]
        phi = _phi_from_psi(ctx.f.leading(N), ctx.psi_eval[:, :N])
        summary["D_hat"] = float(np.linalg.norm(phi / math.sqrt(cfg.T), 2))
    summary_path = path.with_suffix(".summary.json")
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return SweepResult(path, rows, summary)


def _phi_from_psi(f: OrthoFactorization, psi: np.ndarray) -> np.ndarray:
    return solve_triangular(f.R, psi.T, trans="T", lower=False).T


def run_sweep(cfg: ExperimentConfig, out=None) -> SweepResult:
    """Errors and stability constants for every method, rule, stage and trial."""
    ctx = _prepare(cfg, need_function=True)
    return _write(cfg, ctx, _collect(ctx), out)


def run_conditioning_sweep(cfg: ExperimentConfig, out=None) -> SweepResult:
    """Like :func:`run_sweep`, but the target is optional; without one only ``C`` and ``kappa`` are filled."""
    ctx = _prepare(cfg, need_function=False)
    return _write(cfg, ctx, _collect(ctx), out)


def read_results(path) -> list[dict]:
    """Read a results CSV back, converting numeric columns."""
    ints = {"d", "K", "N", "M", "seed"}
    floats = {"E_tau", "E_tau_tilde", "C", "kappa", "wall_ms"}
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            for k in ints:
                r[k] = int(r[k]) if r[k] else None
            for k in floats:
                r[k] = float(r[k]) if r[k] else None
            r["T"] = int(r["T"]) if r["T"] else None
            r["trial"] = r["trial"] if r["trial"] == "mean" else int(r["trial"])
            rows.append(r)
    return rows

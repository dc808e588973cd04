r"""Quality constants, error functionals and sample-complexity thresholds.

Constants
---------
``C``
    Stability of the fit on the grid, ``1 / sigma_min(A)``.
``D_hat``
    Empirical stand-in for the grid-to-domain norm ratio: the top singular
    value of ``phi_j(t_i) / sqrt(T)`` over an independent uniform evaluation
    grid. The exact supremum is not computable, so this is only an estimate.

Bounds
------
All thresholds use natural logarithms and are rounded up. With
``a(delta) = (1+delta) ln(1+delta) - delta`` and
``b(delta) = (1-delta) ln(1-delta) + delta``:

=====================  ==============================================
``bound_M_method1``    ``N ln(4N/gamma) / a``
``bound_K``            ``Nik^2 ln(2N/gamma) / b``
``bound_k_method2``    ``ln(4N/gamma_t) / a``
``bound_M_maw1``       ``N ln(N/gamma) / b``
``bound_M_maw2``       ``N ln(2N/gamma) / a``
``bound_K_grid``       ``Nik^2 ln(N/gamma) / b``
``nikolskii_lambda``   ``N^2 / lambda``
=====================  ==============================================
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .discrete_measure import OrthoFactorization, eval_phi
from .domains import Domain, sample_uniform
from .errors import ConfigurationError, DataError
from .legendre import TensorLegendreBasis
from .rng import RngStream
from .solver import evaluate_at

log = logging.getLogger(__name__)

DEFAULT_DELTA = 0.5
DEFAULT_GAMMA = 0.01


def singular_values(A) -> np.ndarray:
    return np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)


def constant_C(A) -> float:
    """``1 / sqrt(lambda_min(A^T A)) = 1 / sigma_min(A)``; ``inf`` if singular."""
    smin = singular_values(A)[-1]
    if smin == 0.0:
        log.warning("A is singular; constant C is infinite")
        return math.inf
    return float(1.0 / smin)


def condition_number(A) -> float:
    s = singular_values(A)
    return math.inf if s[-1] == 0.0 else float(s[0] / s[-1])


def relative_rms_error(fvals, approx) -> float:
    fvals = np.asarray(fvals, dtype=float)
    approx = np.asarray(approx, dtype=float)
    denom = np.linalg.norm(fvals)
    if denom == 0.0:
        raise DataError("target has zero norm on the evaluation points")
    return float(np.linalg.norm(fvals - approx) / denom)


def error_on_grid(fvals, approx_vals) -> float:
    """Relative discrete L2 error over the K-grid (the ``1/K`` factors cancel)."""
    return relative_rms_error(fvals, approx_vals)


@dataclass(frozen=True)
class EvalGrid:
    """``T`` uniform points on the domain, independent of the K-grid."""

    points: np.ndarray = field(repr=False)

    @property
    def T(self) -> int:
        return self.points.shape[0]


def make_eval_grid(domain: Domain, T: int, rng: RngStream | int) -> EvalGrid:
    if T < 1:
        raise ConfigurationError(f"T must be >= 1, got {T}")
    return EvalGrid(sample_uniform(domain, T, rng))


def error_off_grid(
    domain: Domain,
    target,
    f: OrthoFactorization,
    basis: TensorLegendreBasis,
    c,
    T: int | None = None,
    rng: RngStream | int | None = None,
    eval_grid: EvalGrid | None = None,
) -> float:
    """Relative discrete L2 error over a fresh uniform evaluation grid.

    Pass either ``T`` and ``rng`` (a new grid is drawn) or a prebuilt
    ``eval_grid``.
    """
    if eval_grid is None:
        if T is None or rng is None:
            raise ConfigurationError("error_off_grid needs an eval_grid or both T and rng")
        eval_grid = make_eval_grid(domain, T, rng)
    fvals = np.asarray(target(eval_grid.points), dtype=float)
    approx = evaluate_at(f, basis, c, eval_grid.points)
    return relative_rms_error(fvals, approx)


def weighted_supnorm_gap(fvals, pvals, pi, K: int | None = None) -> float:
    """``max_i |g(z_i)| / sqrt(K pi_i)`` with ``g = f - p`` on the grid.

    ``pi`` is Method 1's distribution, or the Method 2 mixture
    ``(1/N_t) sum_l pi^(l)`` for the stage-wise norm. Entries with ``pi_i = 0``
    and ``g(z_i) != 0`` make the norm infinite.
    """
    g = np.abs(np.asarray(fvals, dtype=float) - np.asarray(pvals, dtype=float))
    pi = np.asarray(pi, dtype=float)
    K = len(pi) if K is None else K
    zero = pi <= 0
    if np.any(g[zero] > 0):
        log.warning("g is nonzero where pi vanishes; weighted sup-norm is infinite")
        return math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(zero, 0.0, g / np.sqrt(K * np.where(zero, 1.0, pi)))
    return float(ratios.max()) if ratios.size else 0.0


def estimate_D(f: OrthoFactorization, basis: TensorLegendreBasis, eval_grid: EvalGrid | np.ndarray) -> float:
    """Top singular value of ``{phi_j(t_i) / sqrt(T)}`` on an evaluation grid."""
    pts = eval_grid.points if isinstance(eval_grid, EvalGrid) else np.asarray(eval_grid, dtype=float)
    T = pts.shape[0]
    if T < f.N:
        raise ConfigurationError(f"estimate_D needs T >= N, got T={T} < N={f.N}")
    phi = eval_phi(f, basis, pts)
    return float(np.linalg.norm(phi / math.sqrt(T), 2))


# -- sample-complexity thresholds -------------------------------------------------


def _check_unit(name, value, closed_right=False):
    ok = 0.0 < value <= 1.0 if closed_right else 0.0 < value < 1.0
    if not ok:
        interval = "(0, 1]" if closed_right else "(0, 1)"
        raise ConfigurationError(f"{name} must lie in {interval}, got {value}")


def _check_N(N):
    if int(N) != N or N < 1:
        raise ConfigurationError(f"N must be a positive integer, got {N}")


def chernoff_upper_rate(delta: float) -> float:
    """``(1+delta) ln(1+delta) - delta``."""
    return (1.0 + delta) * math.log1p(delta) - delta


def chernoff_lower_rate(delta: float) -> float:
    """``(1-delta) ln(1-delta) + delta``."""
    return (1.0 - delta) * math.log1p(-delta) + delta


def bound_M_method1(N: int, gamma: float = DEFAULT_GAMMA, delta: float = DEFAULT_DELTA) -> int:
    _check_N(N)
    _check_unit("gamma", gamma)
    _check_unit("delta", delta)
    return math.ceil(N * math.log(4 * N / gamma) / chernoff_upper_rate(delta))


def bound_K(N: int, gamma: float = DEFAULT_GAMMA, delta: float = DEFAULT_DELTA, nikolskii_sq: float = 1.0) -> int:
    """Grid size for the fixed-space method given ``Nik(P, rho)^2``."""
    _check_N(N)
    _check_unit("gamma", gamma)
    _check_unit("delta", delta)
    if nikolskii_sq <= 0:
        raise ConfigurationError("squared Nikolskii constant must be positive")
    return math.ceil(nikolskii_sq * math.log(2 * N / gamma) / chernoff_lower_rate(delta))


def bound_k_method2(N: int, gamma_t: float = DEFAULT_GAMMA, delta: float = DEFAULT_DELTA) -> int:
    """Per-stage sampling ratio. ``N`` is taken to be the stage dimension ``N_t``."""
    _check_N(N)
    _check_unit("gamma_t", gamma_t)
    _check_unit("delta", delta)
    return math.ceil(math.log(4 * N / gamma_t) / chernoff_upper_rate(delta))


def bound_M_maw1(N: int, gamma: float = DEFAULT_GAMMA, delta: float = DEFAULT_DELTA) -> int:
    """Samples sufficient for ``C <= 1/sqrt(1-delta)`` with probability ``1-gamma``."""
    _check_N(N)
    _check_unit("gamma", gamma)
    _check_unit("delta", delta)
    return math.ceil(N * math.log(N / gamma) / chernoff_lower_rate(delta))


def bound_M_maw2(N: int, gamma: float = DEFAULT_GAMMA, delta: float = DEFAULT_DELTA) -> int:
    """Samples sufficient for both the ``C`` and ``kappa(A)`` guarantees."""
    _check_N(N)
    _check_unit("gamma", gamma)
    _check_unit("delta", delta)
    return math.ceil(N * math.log(2 * N / gamma) / chernoff_upper_rate(delta))


def bound_K_grid(N: int, gamma: float = DEFAULT_GAMMA, delta: float = DEFAULT_DELTA, nikolskii_sq: float = 1.0) -> int:
    """Grid size sufficient for ``D <= 1/sqrt(1-delta)`` with probability ``1-gamma``."""
    _check_N(N)
    _check_unit("gamma", gamma)
    _check_unit("delta", delta)
    if nikolskii_sq <= 0:
        raise ConfigurationError("squared Nikolskii constant must be positive")
    return math.ceil(nikolskii_sq * math.log(N / gamma) / chernoff_lower_rate(delta))


def nikolskii_lambda_rect(N: int, lam: float) -> float:
    """Upper bound ``N^2 / lambda`` on the squared Nikolskii constant for lower sets."""
    _check_N(N)
    _check_unit("lambda", lam, closed_right=True)
    return N * N / lam


def kappa_threshold(delta: float) -> float:
    return math.sqrt((1 + delta) / (1 - delta))


def C_threshold(delta: float) -> float:
    return 1.0 / math.sqrt(1 - delta)


# -- reports ----------------------------------------------------------------------


@dataclass
class DiagnosticsReport:
    C: float
    kappa: float
    E_tau: float | None = None
    E_tau_tilde: float | None = None
    D_hat: float | None = None
    N: int | None = None
    M: int | None = None
    delta: float = DEFAULT_DELTA
    gamma: float = DEFAULT_GAMMA
    theory: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_json_default)


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(type(x).__name__)


def theory_thresholds(N: int, delta: float = DEFAULT_DELTA, gamma: float = DEFAULT_GAMMA, nikolskii_sq=None) -> dict:
    """All closed-form thresholds for one ``N``.

    The adaptive ratio is computed with ``N`` read as the current stage
    dimension; the key records that reading.
    """
    out = {
        "M_method1": bound_M_method1(N, gamma, delta),
        "M_maw1": bound_M_maw1(N, gamma, delta),
        "M_maw2": bound_M_maw2(N, gamma, delta),
        "k_method2[N=N_t]": bound_k_method2(N, gamma, delta),
    }
    if nikolskii_sq is not None:
        out["K_method1"] = bound_K(N, gamma, delta, nikolskii_sq)
        out["K_grid"] = bound_K_grid(N, gamma, delta, nikolskii_sq)
    return out


def diagnose(
    A,
    *,
    fvals_grid=None,
    approx_grid=None,
    E_tau_tilde=None,
    D_hat=None,
    delta: float = DEFAULT_DELTA,
    gamma: float = DEFAULT_GAMMA,
    nikolskii_sq=None,
) -> DiagnosticsReport:
    """Bundle ``C``, ``kappa``, errors and thresholds for one fit."""
    s = singular_values(A)
    flags = []
    if s[-1] == 0.0:
        flags.append("singular_A")
        C = kappa = math.inf
    else:
        C, kappa = float(1 / s[-1]), float(s[0] / s[-1])
    M, N = np.shape(A)
    E_tau = None
    if fvals_grid is not None and approx_grid is not None:
        E_tau = error_on_grid(fvals_grid, approx_grid)
    if C > C_threshold(delta):
        flags.append("C_above_chernoff_level")
    if kappa > kappa_threshold(delta):
        flags.append("kappa_above_chernoff_level")
    return DiagnosticsReport(
        C=C,
        kappa=kappa,
        E_tau=E_tau,
        E_tau_tilde=E_tau_tilde,
        D_hat=D_hat,
        N=N,
        M=M,
        delta=delta,
        gamma=gamma,
        theory=theory_thresholds(N, delta, gamma, nikolskii_sq),
        flags=flags,
    )

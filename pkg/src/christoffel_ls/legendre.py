r"""Tensor-product Legendre polynomials, orthonormal for the uniform probability measure.

The 1-D polynomials are normalised so that

.. math::

    \frac12 \int_{-1}^{1} L_n(y) L_m(y)\, dy = \delta_{nm},

i.e. :math:`L_n = \sqrt{2n+1}\, P_n`. Restricted to a subdomain these form the
(nonorthogonal) starting basis :math:`\psi_1, \dots, \psi_N`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .multiindex import MultiIndexSet


def legendre_table(nmax: int, y) -> np.ndarray:
    """Orthonormal Legendre values of degrees ``0..nmax`` at the points ``y``.

    Uses the three-term recurrence for the classical :math:`P_n` and rescales
    at the end. Returns an array of shape ``y.shape + (nmax + 1,)``.
    """
    y = np.asarray(y, dtype=float)
    out = np.empty(y.shape + (nmax + 1,))
    out[..., 0] = 1.0
    if nmax >= 1:
        out[..., 1] = y
    for n in range(1, nmax):
        out[..., n + 1] = ((2 * n + 1) * y * out[..., n] - n * out[..., n - 1]) / (n + 1)
    out *= np.sqrt(2.0 * np.arange(nmax + 1) + 1.0)
    return out


def legendre_1d(n: int, y):
    """Degree-``n`` orthonormal Legendre polynomial :math:`\\sqrt{2n+1} P_n(y)`.

    Values outside ``[-1, 1]`` are computed but not meaningful for the method;
    callers enforce the domain.
    """
    if n < 0:
        raise ConfigurationError(f"degree must be non-negative, got {n}")
    vals = legendre_table(n, y)[..., n]
    return float(vals) if np.ndim(vals) == 0 else vals


@dataclass(frozen=True)
class TensorLegendreBasis:
    """Basis :math:`\\psi_j(y) = \\prod_k L_{n_k^{(j)}}(y_k)` over an index set."""

    index_set: MultiIndexSet

    @property
    def d(self) -> int:
        return self.index_set.d

    @property
    def N(self) -> int:
        return self.index_set.N

    def evaluate(self, points, columns: slice | None = None) -> np.ndarray:
        """Basis matrix of shape ``(T, N)`` (or the selected ``columns``).

        One recurrence per coordinate up to the largest degree that
        coordinate needs, then products of table look-ups.
        """
        pts = self._as_points(points)
        idx = self.index_set.indices if columns is None else self.index_set.indices[columns]
        out = np.ones((pts.shape[0], idx.shape[0]))
        if idx.shape[0] == 0:
            return out
        for k in range(self.d):
            col = idx[:, k]
            top = int(col.max())
            if top == 0:
                continue
            table = legendre_table(top, pts[:, k])
            out *= table[:, col]
        return out

    def _as_points(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise ConfigurationError(
                f"points have dimension {pts.shape[-1] if pts.ndim else 0}, basis expects d={self.d}"
            )
        return pts

    def leading(self, n: int) -> "TensorLegendreBasis":
        """Basis of the first ``n`` functions (requires a prefix-closed order)."""
        lam = self.index_set
        sub = MultiIndexSet(d=lam.d, kind=lam.kind, order=None, indices=lam.indices[:n])
        return TensorLegendreBasis(sub)


def eval_basis_row(basis: TensorLegendreBasis, y) -> np.ndarray:
    """Row vector ``(psi_1(y), ..., psi_N(y))`` for a single point ``y``."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ConfigurationError("eval_basis_row expects a single point")
    return basis.evaluate(y)[0]

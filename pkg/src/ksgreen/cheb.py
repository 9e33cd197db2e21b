"""Chebyshev grids of the second kind, barycentric interpolation and
Clenshaw-Curtis quadrature.

All grids store their nodes in descending order, matching cos(j*pi/n) for
j = 0..n. Sub-grids on a sub-interval are obtained by an affine map of the
canonical [-1, 1] grid; the barycentric weights are kept in unscaled
canonical form because common factors cancel in the barycentric quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import KsgreenError

#: Default tolerance for snapping interpolation targets onto source nodes.
SNAP_TOL = 1e-13


@dataclass(frozen=True)
class ChebyshevGrid:
    """Closed Chebyshev grid of the second kind on an interval.

    Attributes
    ----------
    order : int
        Polynomial order n; the grid has n + 1 nodes.
    nodes : ndarray
        Node coordinates in descending order, endpoints exact.
    bary_weights : ndarray
        Canonical barycentric weights (1/2, -1, 1, ..., +-1/2).
    interval : tuple of float
        The (lo, hi) interval covered by the grid.
    """

    order: int
    nodes: np.ndarray
    bary_weights: np.ndarray
    interval: tuple[float, float]

    @property
    def length(self) -> float:
        lo, hi = self.interval
        return hi - lo


@dataclass(frozen=True)
class InterpolationMatrix:
    """Dense matrix mapping samples on a source grid to target points."""

    rows: int
    cols: int
    entries: np.ndarray


@dataclass(frozen=True)
class QuadratureRow:
    """Clenshaw-Curtis weights paired with a descending Chebyshev grid."""

    length: int
    weights: np.ndarray
    interval_length: float


def bary_weights(n: int) -> np.ndarray:
    """Canonical barycentric weights for the order-n closed Chebyshev grid."""
    w = np.ones(n + 1)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[n] *= 0.5
    return w


def chebyshev_nodes(n: int, interval: tuple[float, float] = (-1.0, 1.0)) -> ChebyshevGrid:
    """Build the order-n Chebyshev grid of the second kind on an interval.

    Nodes are cos(j*pi/n) mapped affinely onto the interval, stored in
    descending order with exact endpoints.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if n < 1:
        raise KsgreenError(f"grid order must be >= 1, got {n}")
    if not lo < hi:
        raise KsgreenError(f"degenerate interval ({lo}, {hi})")
    x = np.cos(np.arange(n + 1) * (np.pi / n))
    # exact antisymmetry x[j] = -x[n-j]: mirror the upper half
    half = n // 2
    x[n - half:] = -x[half::-1]
    if n % 2 == 0:
        x[half] = 0.0
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
    nodes[0] = hi
    nodes[n] = lo
    if n % 2 == 0:
        nodes[half] = 0.5 * (lo + hi)
    return ChebyshevGrid(order=n, nodes=nodes, bary_weights=bary_weights(n), interval=(lo, hi))


def interpolation_matrix(
    source: ChebyshevGrid,
    targets: np.ndarray,
    snap_tol: float = SNAP_TOL,
) -> InterpolationMatrix:
    """Barycentric interpolation matrix from a Chebyshev grid to arbitrary targets.

    Entry (p, q) carries the weight of source node q in the interpolated
    value at target p. A target within ``snap_tol`` of a source node gets
    the corresponding unit row, which removes the 0/0 singularity at
    coinciding points.

    Raises
    ------
    KsgreenError
        If a target lies outside the source interval.
    """
    if snap_tol < 0:
        raise KsgreenError("snap_tol must be >= 0")
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    lo, hi = source.interval
    pad = snap_tol + 1e-15 * max(abs(lo), abs(hi))
    if targets.min() < lo - pad or targets.max() > hi + pad:
        raise KsgreenError(
            f"targets outside source interval [{lo}, {hi}]: "
            f"range ({targets.min()}, {targets.max()})"
        )

    x = source.nodes
    w = source.bary_weights
    diff = targets[:, None] - x[None, :]
    hit_p, hit_q = np.nonzero(np.abs(diff) <= snap_tol)
    # keep the closest source node if several fall inside the tolerance
    snap_row = {}
    for p, q in zip(hit_p, hit_q):
        if p not in snap_row or abs(diff[p, q]) < abs(diff[p, snap_row[p]]):
            snap_row[p] = q

    if snap_row:
        diff[list(snap_row.keys()), :] = 1.0  # silenced; rows overwritten below
    quot = w[None, :] / diff
    with np.errstate(divide="ignore", invalid="ignore"):
        # snapped rows sum to exactly zero; they are overwritten below
        entries = quot / quot.sum(axis=1)[:, None]
    for p, q in snap_row.items():
        entries[p, :] = 0.0
        entries[p, q] = 1.0
    return InterpolationMatrix(rows=targets.size, cols=source.order + 1, entries=entries)


def _cc_canonical(m: int) -> np.ndarray:
    """Clenshaw-Curtis weights of unit interval length on the order-m grid.

    Computed as a cosine-matrix product: the weights are the integrals of
    the Chebyshev interpolant, with half weighting of the first and (for
    even m) last cosine coefficients.
    """
    k = np.arange(m + 1)
    c = np.zeros(m + 1)
    c[0] = 1.0
    even = k[2::2]
    c[2::2] = 2.0 / (1.0 - even.astype(float) ** 2)
    if m % 2 == 0 and m >= 2:
        c[m] *= 0.5
    f = np.cos(np.outer(k, k) * (np.pi / m)) / m
    w = (c[:, None] * f).sum(axis=0)
    w[0] *= 0.5
    w[m] *= 0.5
    return w


_CC_CACHE: dict[int, np.ndarray] = {}


def clenshaw_curtis_row(m: int, interval_length: float) -> QuadratureRow:
    """Clenshaw-Curtis quadrature weights for an order-m mapped Chebyshev grid.

    The dot product with function samples on the matching (descending)
    grid approximates the integral over the sub-interval of the given
    length.
    """
    if m < 1:
        raise KsgreenError(f"quadrature order must be >= 1, got {m}")
    if not interval_length > 0:
        raise KsgreenError(f"interval length must be positive, got {interval_length}")
    base = _CC_CACHE.get(m)
    if base is None:
        base = _cc_canonical(m)
        _CC_CACHE[m] = base
    return QuadratureRow(length=m + 1, weights=interval_length * base, interval_length=interval_length)

"""Assembly of the dense convolution operators.

For every global grid point the two convolution integrals (kernel and
kernel derivative against the integrand) are discretized by re-interpolating
from the global Chebyshev grid onto left/right mapped sub-grids, sampling
the kernel there and applying Clenshaw-Curtis weights. The result is a pair
of dense matrices M, N and a constant vector J so that one time step is a
matrix-vector product.

The build is row-parallel: disjoint row ranges can be assembled by any
number of workers and merged afterwards; the per-row summation order is
fixed, so results are bitwise identical for any worker count.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cheb import SNAP_TOL, bary_weights, chebyshev_nodes, clenshaw_curtis_row
from .errors import CacheMismatchError, KsgreenError, PartitionError
from .greens import GreenAux, ProblemParams, green_aux, green_deriv_eval, green_eval

CACHE_MAGIC = b"KSGF"
CACHE_VERSION = 1
_POLICY_CODES = {"spanned_plus_margin": 0, "full": 1}
_POLICY_NAMES = {v: k for k, v in _POLICY_CODES.items()}


class ResourceError(KsgreenError):
    """Dense operator storage would exceed the memory budget."""

    def __init__(self, required_bytes, limit_bytes):
        self.required_bytes = required_bytes
        self.limit_bytes = limit_bytes
        super().__init__(
            f"operator build needs ~{required_bytes / 1e9:.2f} GB "
            f"(limit {limit_bytes / 1e9:.2f} GB)"
        )


@dataclass(frozen=True)
class SubgridPolicy:
    """Sizing rule for the per-row quadrature sub-grids.

    ``spanned_plus_margin`` makes each sub-grid order exceed the number of
    global points it spans by ``margin`` (interpolation then never loses
    resolution); ``full`` uses order n+1 everywhere.
    """

    mode: str = "spanned_plus_margin"
    margin: int = 8
    min_order: int = 8

    def __post_init__(self):
        if self.mode not in _POLICY_CODES:
            raise KsgreenError(f"unknown sub-grid policy mode {self.mode!r}")
        if self.margin < 0 or self.min_order < 1:
            raise KsgreenError("margin must be >= 0 and min_order >= 1")

    def orders(self, n: int, i: int) -> tuple[int, int]:
        """Left/right sub-grid orders for global row i of an order-n grid."""
        if self.mode == "full":
            return n + 1, n + 1
        left = max(self.min_order, (n + 1 - i) + self.margin)
        right = max(self.min_order, (i + 1) + self.margin)
        return left, right


@dataclass
class ConvolutionOperators:
    """Dense convolution operators for one parameter set.

    Rows outside ``partition`` are unassembled (zero); a complete operator
    set covers rows 0..n.
    """

    n: int
    M: np.ndarray
    N: np.ndarray
    J: np.ndarray
    params: ProblemParams
    policy: SubgridPolicy
    partition: list[tuple[int, int]] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return _normalize_ranges(self.partition, self.n) == [(0, self.n + 1)]


def _normalize_ranges(ranges, n):
    out = []
    for lo, hi in sorted(ranges):
        if out and lo <= out[-1][1]:
            if lo < out[-1][1]:
                raise PartitionError(f"overlapping row ranges near {lo}")
            out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def memory_limit_bytes() -> int:
    """Physical-memory budget for dense operator storage."""
    env = os.environ.get("KSGREEN_MAX_BYTES")
    if env:
        return int(float(env))
    try:
        return os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES")
    except (ValueError, OSError):  # pragma: no cover
        return 1 << 34


def _assemble_row(
    out_m: np.ndarray,
    out_n: np.ndarray,
    aux: GreenAux,
    params: ProblemParams,
    xg: np.ndarray,
    wg: np.ndarray,
    i: int,
    policy: SubgridPolicy,
    snap_tol: float,
    with_deriv: bool,
) -> None:
    """Fill rows i of M (and N) in place; fixed summation order throughout."""
    n = xg.size - 1
    xi = xg[i]
    m_left, m_right = policy.orders(n, i)
    for interval, m, side in (((-1.0, xi), m_left, -1), ((xi, 1.0), m_right, +1)):
        sub = chebyshev_nodes(m, interval)
        cc = clenshaw_curtis_row(m, sub.length)
        gval = green_eval(aux, params, xi, sub.nodes)
        t_m = cc.weights * gval
        if with_deriv:
            gder = green_deriv_eval(aux, params, xi, sub.nodes, side=side)
            t_n = cc.weights * gder
        # barycentric interpolation rows applied without forming the matrix:
        # contribution_j = sum_p t_p * B[p, j]
        diff = sub.nodes[:, None] - xg[None, :]
        absd = np.abs(diff)
        qmin = absd.argmin(axis=1)
        snapped = absd[np.arange(m + 1), qmin] <= snap_tol
        if snapped.any():
            diff[snapped, :] = 1.0
        quot = wg[None, :] / diff
        with np.errstate(divide="ignore", invalid="ignore"):
            # snapped rows can sum to exactly zero; they are overwritten below
            quot /= quot.sum(axis=1)[:, None]
        if snapped.any():
            quot[snapped, :] = 0.0
            quot[snapped, qmin[snapped]] = 1.0
        out_m[:] += (t_m[:, None] * quot).sum(axis=0)
        if with_deriv:
            out_n[:] += (t_n[:, None] * quot).sum(axis=0)


def build_operators(
    params: ProblemParams,
    n: int,
    policy: SubgridPolicy | None = None,
    row_range: tuple[int, int] | None = None,
    snap_tol: float = SNAP_TOL,
    workers: int = 1,
    with_deriv: bool = True,
    max_bytes: int | None = None,
) -> ConvolutionOperators:
    """Assemble operator rows ``row_range`` (default: all rows 0..n).

    ``workers`` threads split the row range; the output is bitwise
    independent of the worker count. ``with_deriv=False`` skips the N
    matrix (quadrature-error experiments only need M).

    Raises
    ------
    RealRootError
        Propagated from the kernel parameters (S >= 1).
    ResourceError
        If the dense matrices would not fit in the memory budget.
    """
    if n < 2:
        raise KsgreenError(f"global grid order must be >= 2, got {n}")
    policy = policy or SubgridPolicy()
    aux = green_aux(params)
    lo, hi = (0, n + 1) if row_range is None else row_range
    if not (0 <= lo < hi <= n + 1):
        raise KsgreenError(f"row range ({lo}, {hi}) outside [0, {n + 1})")

    required = (2 if with_deriv else 1) * (n + 1) ** 2 * 8 + (n + 1) * 8
    limit = memory_limit_bytes() if max_bytes is None else max_bytes
    if required > limit:
        raise ResourceError(required, limit)

    grid = chebyshev_nodes(n)
    xg, wg = grid.nodes, grid.bary_weights
    M = np.zeros((n + 1, n + 1))
    N = np.zeros((n + 1, n + 1))
    J = np.zeros(n + 1)
    phi = params.phi_profile(xg)

    def run_rows(r0, r1):
        for i in range(r0, r1):
            if i == 0 or i == n:
                continue  # kernel vanishes at x = +-1: rows stay zero
            _assemble_row(M[i], N[i], aux, params, xg, wg, i, policy, snap_tol, with_deriv)
            J[i] = -params.delta * params.R * (M[i] * phi).sum()

    rows = range(lo, hi)
    if workers <= 1 or len(rows) < 2 * workers:
        run_rows(lo, hi)
    else:
        bounds = np.linspace(lo, hi, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_rows, int(bounds[w]), int(bounds[w + 1]))
                for w in range(workers)
            ]
            for f in futures:
                f.result()

    return ConvolutionOperators(
        n=n, M=M, N=N, J=J, params=params, policy=policy, partition=[(lo, hi)]
    )


def merge_partitions(parts: list[ConvolutionOperators]) -> ConvolutionOperators:
    """Concatenate partial builds into one complete operator set.

    Parts must share parameters and policy and tile rows 0..n exactly;
    assembly is pure copying, so the merge is bitwise identical regardless
    of how the rows were partitioned.
    """
    if not parts:
        raise PartitionError("no partitions to merge")
    first = parts[0]
    n = first.n
    for p in parts[1:]:
        if p.n != n or p.params != first.params or p.policy != first.policy:
            raise PartitionError("partitions have mismatched parameters")
    ranges = []
    for p in parts:
        ranges.extend(p.partition)
    merged_ranges = _normalize_ranges(ranges, n)
    if merged_ranges != [(0, n + 1)]:
        raise PartitionError(f"row ranges {merged_ranges} do not cover [0, {n}]")

    if len(parts) == 1:
        return first
    M = np.zeros((n + 1, n + 1))
    N = np.zeros((n + 1, n + 1))
    J = np.zeros(n + 1)
    for p in parts:
        for lo, hi in p.partition:
            M[lo:hi] = p.M[lo:hi]
            N[lo:hi] = p.N[lo:hi]
            J[lo:hi] = p.J[lo:hi]
    return ConvolutionOperators(
        n=n, M=M, N=N, J=J, params=first.params, policy=first.policy,
        partition=[(0, n + 1)],
    )


# ---------------------------------------------------------------------------
# operator cache file

_HEADER = struct.Struct("<4sIIddddBI")


def save_operators(ops: ConvolutionOperators, path) -> None:
    """Write a complete operator set to a little-endian binary cache file."""
    if not ops.complete:
        raise KsgreenError("refusing to cache a partial operator set")
    p = ops.params
    header = _HEADER.pack(
        CACHE_MAGIC,
        CACHE_VERSION,
        ops.n,
        p.nu,
        p.delta,
        p.l,
        p.r,
        _POLICY_CODES[ops.policy.mode],
        ops.policy.margin,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(ops.M, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(ops.N, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(ops.J, dtype="<f8").tobytes())


def load_operators(
    path,
    params: ProblemParams | None = None,
    n: int | None = None,
    policy: SubgridPolicy | None = None,
) -> ConvolutionOperators:
    """Load a cached operator set, validating the header against a request.

    Raises
    ------
    CacheMismatchError
        If the file is not a valid cache or disagrees with the requested
        parameters.
    """
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise CacheMismatchError(f"{path}: truncated header")
        magic, version, fn, nu, delta, l, r, mode_code, margin = _HEADER.unpack(raw)
        if magic != CACHE_MAGIC:
            raise CacheMismatchError(f"{path}: bad magic {magic!r}")
        if version != CACHE_VERSION:
            raise CacheMismatchError(f"{path}: unsupported version {version}")
        file_params = ProblemParams(nu=nu, delta=delta, l=l, r=r)
        file_policy = SubgridPolicy(mode=_POLICY_NAMES[mode_code], margin=margin)
        if n is not None and fn != n:
            raise CacheMismatchError(f"{path}: n = {fn}, requested {n}")
        if params is not None and file_params != params:
            raise CacheMismatchError(
                f"{path}: parameters {file_params} do not match request {params}"
            )
        if policy is not None and (
            policy.mode != file_policy.mode or policy.margin != file_policy.margin
        ):
            raise CacheMismatchError(f"{path}: sub-grid policy mismatch")
        count = (fn + 1) * (fn + 1)
        M = np.fromfile(fh, dtype="<f8", count=count).reshape(fn + 1, fn + 1)
        N = np.fromfile(fh, dtype="<f8", count=count).reshape(fn + 1, fn + 1)
        J = np.fromfile(fh, dtype="<f8", count=fn + 1)
        if J.size != fn + 1:
            raise CacheMismatchError(f"{path}: truncated payload")
    return ConvolutionOperators(
        n=fn, M=M, N=N, J=J, params=file_params, policy=file_policy,
        partition=[(0, fn + 1)],
    )

"""Semi-implicit backward-differentiation time stepping by matrix products.

One step forms the two integrand vectors from the recent history, applies
the precomputed convolution operators and rotates the history ring buffer;
there is no numerical differentiation and no linear solve anywhere. Four
seeding strategies fill the multistep history.
"""

from __future__ import annotations

import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BlowUpError, ConfigError, KsgreenError, SeedingUnstableError
from .greens import ProblemParams
from .operators import ConvolutionOperators, SubgridPolicy, build_operators

_TABLE = {
    1: (Fraction(1), (Fraction(1),), (Fraction(1),)),
    2: (Fraction(2, 3), (Fraction(4, 3), Fraction(-1, 3)), (Fraction(2), Fraction(-1))),
    3: (
        Fraction(6, 11),
        (Fraction(18, 11), Fraction(-9, 11), Fraction(2, 11)),
        (Fraction(3), Fraction(-3), Fraction(1)),
    ),
    4: (
        Fraction(12, 25),
        (Fraction(48, 25), Fraction(-36, 25), Fraction(16, 25), Fraction(-3, 25)),
        (Fraction(4), Fraction(-6), Fraction(4), Fraction(-1)),
    ),
}


@dataclass(frozen=True)
class SbdfScheme:
    """Coefficients of the semi-implicit BDF formula of a given order.

    ``alpha[s-1]`` and ``beta[s-1]`` weight the solution and the explicit
    terms s steps back (s = 1 is the most recent); the implicit-solve
    constant is ``delta_factor * h``.
    """

    order: int
    delta_factor: Fraction
    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]

    def delta(self, h: float) -> float:
        return float(self.delta_factor) * h

    @property
    def alpha_f(self) -> np.ndarray:
        return np.array([float(a) for a in self.alpha])

    @property
    def beta_f(self) -> np.ndarray:
        return np.array([float(b) for b in self.beta])


def sbdf_scheme(o: int) -> SbdfScheme:
    """Exact coefficient row for order o in {1, 2, 3, 4}."""
    if o not in _TABLE:
        raise KsgreenError(f"SBDF order must be in 1..4, got {o}")
    factor, alpha, beta = _TABLE[o]
    return SbdfScheme(order=o, delta_factor=factor, alpha=alpha, beta=beta)


class SimState:
    """Ring buffer of the most recent solution vectors plus run metadata.

    ``history`` has shape (order, n+1) with the newest vector last; the
    vectors are deviations from the linear boundary profile and vanish
    exactly at the endpoints.
    """

    def __init__(self, history, params: ProblemParams, scheme: SbdfScheme, h: float,
                 step_index: int = 0):
        history = np.array(history, dtype=float)
        if history.ndim != 2 or history.shape[0] != scheme.order:
            raise KsgreenError(
                f"history must hold {scheme.order} vectors, got shape {history.shape}"
            )
        expected = scheme.delta(h)
        if not np.isclose(params.delta, expected, rtol=1e-12, atol=0.0):
            raise ConfigError(
                f"params.delta = {params.delta} but scheme requires {expected}"
            )
        history[:, 0] = 0.0
        history[:, -1] = 0.0
        self.history = history
        self.params = params
        self.scheme = scheme
        self.h = float(h)
        self.step_index = int(step_index)

    @property
    def n(self) -> int:
        return self.history.shape[1] - 1

    @property
    def newest(self) -> np.ndarray:
        return self.history[-1]

    @property
    def time(self) -> float:
        return self.step_index * self.h

    def solution(self) -> np.ndarray:
        """Physical solution u = v + (linear boundary profile)."""
        grid = np.cos(np.arange(self.n + 1) * (np.pi / self.n))
        return self.newest + self.params.phi_profile(grid)


def integrands(state: SimState) -> tuple[np.ndarray, np.ndarray]:
    """Form the two convolution integrands from the history buffer.

    The first collects the linear terms, the second the explicitly
    extrapolated quadratic and profile-advection terms (already scaled by
    the implicit-solve constant).
    """
    params, scheme = state.params, state.scheme
    delta, R = params.delta, params.R
    grid = np.cos(np.arange(state.n + 1) * (np.pi / state.n))
    phi = params.phi_profile(grid)
    i1 = np.zeros(state.n + 1)
    i2 = np.zeros(state.n + 1)
    for s in range(1, scheme.order + 1):
        v = state.history[-s]
        a = float(scheme.alpha[s - 1])
        b = float(scheme.beta[s - 1])
        i1 += (a + b * delta * R) * v
        i2 += b * (0.5 * v * v + phi * v)
    i2 *= delta
    return i1, i2


def _apply_operators(ops: ConvolutionOperators, i1, i2, workers: int = 1) -> np.ndarray:
    if workers <= 1:
        return ops.M @ i1 + ops.N @ i2 + ops.J
    out = np.empty(ops.n + 1)
    bounds = np.linspace(0, ops.n + 1, workers + 1).astype(int)

    def block(w):
        lo, hi = int(bounds[w]), int(bounds[w + 1])
        out[lo:hi] = ops.M[lo:hi] @ i1 + ops.N[lo:hi] @ i2 + ops.J[lo:hi]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for f in [pool.submit(block, w) for w in range(workers)]:
            f.result()
    return out


def blowup_threshold(params: ProblemParams) -> float:
    return 1e6 * max(1.0, abs(params.l), abs(params.r))


def step(state: SimState, ops: ConvolutionOperators, workers: int = 1) -> SimState:
    """Advance one time step; returns a new state with rotated history.

    Raises
    ------
    ConfigError
        If the operators were built for different parameters or grid.
    BlowUpError
        If the update contains non-finite or runaway values.
    """
    if ops.n != state.n:
        raise ConfigError(f"operator grid order {ops.n} != state grid order {state.n}")
    if ops.params != state.params:
        raise ConfigError(
            f"operator parameters {ops.params} do not match state {state.params}"
        )
    i1, i2 = integrands(state)
    v_new = _apply_operators(ops, i1, i2, workers)
    if not np.all(np.isfinite(v_new)) or np.max(np.abs(v_new)) > blowup_threshold(state.params):
        raise BlowUpError(state.step_index + 1)
    history = np.empty_like(state.history)
    history[:-1] = state.history[1:]
    history[-1] = v_new
    new = SimState.__new__(SimState)
    new.history = history
    new.params = state.params
    new.scheme = state.scheme
    new.h = state.h
    new.step_index = state.step_index + 1
    return new


# ---------------------------------------------------------------------------
# solitary-wave exact solution

_Q_SOLITON = np.sqrt(11.0 / 76.0)


def soliton(x, t, nu: float, c: float, x0: float):
    """Exact traveling-wave solution of the underlying PDE.

    A solitary wave of speed c connecting two constant states; its
    boundary variation on [-1, 1] decays like exp(-2*q*d/sqrt(nu)) a
    distance d from the wave, so for small nu it satisfies the fixed
    boundary conditions far below round-off.
    """
    z = np.tanh(_Q_SOLITON / np.sqrt(nu) * (np.asarray(x) - c * t - x0))
    amp = (15.0 / 19.0) * np.sqrt(11.0 / (19.0 * nu))
    return c + amp * (11.0 * z**3 - 9.0 * z)


def soliton_limits(nu: float, c: float) -> tuple[float, float]:
    """Asymptotic left/right boundary values (l, r) of the solitary wave."""
    amp = (30.0 / 19.0) * np.sqrt(11.0 / (19.0 * nu))
    return c - amp, c + amp


# ---------------------------------------------------------------------------
# seeding strategies


def _grid(n: int) -> np.ndarray:
    return np.cos(np.arange(n + 1) * (np.pi / n))


def _make_state(vectors, nu, l, r, scheme, h, step_index=0) -> SimState:
    params = ProblemParams(nu=nu, delta=scheme.delta(h), l=l, r=r)
    return SimState(np.array(vectors), params, scheme, h, step_index=step_index)


def seed_exact_soliton(nu: float, h: float, n: int, o: int, c: float, x0: float,
                       boundary_tol: float = 1e-20) -> SimState:
    """History from the exact solitary wave sampled at t = 0, -h, ...

    Boundary values are taken from the wave's asymptotic states; a warning
    is issued if the wave actually varies at the boundaries by more than
    ``boundary_tol``.
    """
    scheme = sbdf_scheme(o)
    l, r = soliton_limits(nu, c)
    x = _grid(n)
    phi = l + 0.5 * (r - l) * (x + 1.0)
    vecs = []
    worst = 0.0
    for j in range(o):
        t = -(o - 1 - j) * h
        w = soliton(x, t, nu, c, x0)
        worst = max(worst, abs(w[0] - r), abs(w[-1] - l))
        vecs.append(w - phi)
    if worst > boundary_tol:
        warnings.warn(
            f"solitary wave varies at the boundaries by {worst:.3e} "
            f"(> {boundary_tol:.1e}); fixed boundary values are inexact",
            stacklevel=2,
        )
    return _make_state(vecs, nu, l, r, scheme, h)


def linear_growth_rates(nu: float, R: float, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    """Growth rates of the odd/even linear modes about the zero deviation.

    Rates are sigma = kappa^2 - nu*kappa^4 - R with kappa = m*pi for the
    sine modes and (m - 1/2)*pi for the cosine modes (advection by the
    linear profile is neglected, exact for equal boundary values).
    """
    m = np.arange(1, n_modes + 1, dtype=float)
    ko = np.pi * m
    ke = np.pi * (m - 0.5)
    return ko**2 - nu * ko**4 - R, ke**2 - nu * ke**4 - R


def seed_eigenmode_growth(nu: float, h: float, n: int, o: int,
                          odd_amps, even_amps=None,
                          l: float = 0.0, r: float = 0.0) -> SimState:
    """History from a linear-mode perturbation propagated backward in time.

    Each mode is scaled by exp(sigma * t) at the seed times t = 0, -h,
    ..., -(o-1)h, which is the exact linear evolution when the nonlinear
    term is negligible. Strongly damped modes would be exponentially large
    in the past, so their backward amplification is capped at a factor 10;
    such modes are transient and do not affect the grown solution.
    """
    scheme = sbdf_scheme(o)
    odd_amps = np.atleast_1d(np.asarray(odd_amps, dtype=float))
    even_amps = (
        np.zeros_like(odd_amps)
        if even_amps is None
        else np.atleast_1d(np.asarray(even_amps, dtype=float))
    )
    n_modes = max(odd_amps.size, even_amps.size)
    odd_amps = np.pad(odd_amps, (0, n_modes - odd_amps.size))
    even_amps = np.pad(even_amps, (0, n_modes - even_amps.size))
    R = 0.5 * (r - l)
    sig_o, sig_e = linear_growth_rates(nu, R, n_modes)
    x = _grid(n)
    m = np.arange(1, n_modes + 1, dtype=float)
    sines = np.sin(np.outer(x, np.pi * m))
    cosines = np.cos(np.outer(x, np.pi * (m - 0.5)))
    vecs = []
    cap = np.log(10.0)
    for j in range(o):
        t = -(o - 1 - j) * h
        vecs.append(sines @ (odd_amps * np.exp(np.minimum(sig_o * t, cap)))
                    + cosines @ (even_amps * np.exp(np.minimum(sig_e * t, cap))))
    return _make_state(vecs, nu, l, r, scheme, h)


def max_subgrid_end_spacing(n: int, policy: SubgridPolicy) -> float:
    """Largest end-point spacing over all quadrature sub-grids."""
    worst = 0.0
    x = _grid(n)
    for i in range(1, n):
        m_left, m_right = policy.orders(n, i)
        worst = max(
            worst,
            0.5 * (x[i] + 1.0) * (1.0 - np.cos(np.pi / m_left)),
            0.5 * (1.0 - x[i]) * (1.0 - np.cos(np.pi / m_right)),
        )
    return worst


def seed_small_step_order1(v0, nu: float, h: float, n: int, o: int,
                           l: float = 0.0, r: float = 0.0,
                           substeps: int = 8,
                           policy: SubgridPolicy | None = None,
                           safety: float = 1.0,
                           workers: int = 1) -> SimState:
    """History by first-order sub-stepping from an initial deviation.

    Refuses when the kernel length scale 1/b at the reduced step drops to
    the sub-grid end-point spacing (of order 1/n^2), where the quadrature
    of the near-delta kernel becomes unstable.
    """
    scheme = sbdf_scheme(o)
    policy = policy or SubgridPolicy()
    if substeps < 1:
        raise KsgreenError("substeps must be >= 1")
    h_sub = h / substeps
    sub_params = ProblemParams(nu=nu, delta=h_sub, l=l, r=r)
    from .greens import green_aux

    aux = green_aux(sub_params)
    spacing = max_subgrid_end_spacing(n, policy)
    if 1.0 / aux.b < safety * spacing:
        raise SeedingUnstableError(
            f"kernel length scale 1/b = {1.0 / aux.b:.3e} is below the "
            f"sub-grid end spacing {spacing:.3e}; increase the seeding step"
        )
    ops = build_operators(sub_params, n, policy, workers=workers)
    state = _make_state([v0], nu, l, r, sbdf_scheme(1), h_sub)
    vecs = [np.asarray(v0, dtype=float)]
    for _ in range(o - 1):
        for _ in range(substeps):
            state = step(state, ops, workers=workers)
        vecs.append(state.newest.copy())
    return _make_state(vecs, nu, l, r, scheme, h, step_index=o - 1)


def seed_richardson(v0, nu: float, h: float, n: int, o: int,
                    l: float = 0.0, r: float = 0.0,
                    policy: SubgridPolicy | None = None,
                    workers: int = 1) -> SimState:
    """History by Richardson extrapolation of first-order sub-stepping.

    Every distinct sub-step size needs its own operator build (an O(n^3)
    cost each), so this seeder is only practical for small grids and low
    orders; it is kept behind an explicit choice for that reason.
    """
    scheme = sbdf_scheme(o)
    policy = policy or SubgridPolicy()
    v0 = np.asarray(v0, dtype=float)
    ops_cache: dict[float, ConvolutionOperators] = {}

    def integrate(v, total_time, steps):
        tau = total_time / steps
        if tau not in ops_cache:
            ops_cache[tau] = build_operators(
                ProblemParams(nu=nu, delta=tau, l=l, r=r), n, policy, workers=workers
            )
        st = _make_state([v], nu, l, r, sbdf_scheme(1), tau)
        for _ in range(steps):
            st = step(st, ops_cache[tau], workers=workers)
        return st.newest.copy()

    vecs = [v0]
    for j in range(1, o):
        target = j * h
        # extrapolation table for a first-order base method, halving steps
        table = [integrate(v0, target, j * 2**level) for level in range(o)]
        for m in range(1, o):
            table = [
                (2**m * table[idx + 1] - table[idx]) / (2**m - 1)
                for idx in range(len(table) - 1)
            ]
        vecs.append(table[0])
    return _make_state(vecs, nu, l, r, scheme, h, step_index=o - 1)


# ---------------------------------------------------------------------------
# checkpoint files

CHECKPOINT_MAGIC = b"KSCK"
CHECKPOINT_VERSION = 1
_CK_HEADER = struct.Struct("<4sIIIddddQ")


def save_checkpoint(state: SimState, path) -> None:
    """Write the full stepping state to a little-endian binary file."""
    p = state.params
    header = _CK_HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        state.n,
        state.scheme.order,
        state.h,
        p.nu,
        p.l,
        p.r,
        state.step_index,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.history, dtype="<f8").tobytes())


def load_checkpoint(path) -> SimState:
    """Restore a stepping state; bitwise inverse of :func:`save_checkpoint`."""
    with open(path, "rb") as fh:
        raw = fh.read(_CK_HEADER.size)
        if len(raw) != _CK_HEADER.size:
            raise KsgreenError(f"{path}: truncated checkpoint header")
        magic, version, n, o, h, nu, l, r, step_index = _CK_HEADER.unpack(raw)
        if magic != CHECKPOINT_MAGIC:
            raise KsgreenError(f"{path}: not a checkpoint file")
        if version != CHECKPOINT_VERSION:
            raise KsgreenError(f"{path}: unsupported checkpoint version {version}")
        history = np.fromfile(fh, dtype="<f8", count=o * (n + 1)).reshape(o, n + 1)
        if history.size != o * (n + 1):
            raise KsgreenError(f"{path}: truncated checkpoint payload")
    scheme = sbdf_scheme(o)
    params = ProblemParams(nu=nu, delta=scheme.delta(h), l=l, r=r)
    return SimState(history, params, scheme, h, step_index=step_index)

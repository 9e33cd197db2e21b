"""Closed-form kernel of the time-discretized linear operator.

The linear operator ``1 + Delta*R + Delta*d_xx + Delta*nu*d_xxxx`` with
homogeneous Dirichlet / second-derivative boundary conditions on [-1, 1]
is inverted analytically. Its kernel G(x, y) and the derivative dG/dy are
evaluated here in a boundary-stable four-term exponential form; no
intermediate quantity exceeds O(Q) in magnitude.

A truncated modal sum over the operator's eigenfunctions is provided as an
independent cross-check (it converges slowly and is for validation only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrumError, KsgreenError, RealRootError


@dataclass(frozen=True)
class ProblemParams:
    """Physical and time-discretization parameters.

    Attributes
    ----------
    nu : float
        Viscosity (coefficient of the fourth derivative), positive.
    delta : float
        Implicit-solve constant of the multistep scheme, positive.
    l, r : float
        Boundary values of the solution at x = -1 and x = +1.
    """

    nu: float
    delta: float
    l: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        if not self.nu > 0:
            raise KsgreenError(f"nu must be positive, got {self.nu}")
        if not self.delta > 0:
            raise KsgreenError(f"delta must be positive, got {self.delta}")

    @property
    def R(self) -> float:
        """Half the boundary-value jump, (r - l)/2."""
        return 0.5 * (self.r - self.l)

    def phi_profile(self, x):
        """Linear profile l + R*(x+1) subtracted to homogenize the BCs."""
        return self.l + self.R * (np.asarray(x) + 1.0)


@dataclass(frozen=True)
class GreenAux:
    """Derived parameters of the closed-form kernel.

    ``p_plus = a + i*b`` is the first-quadrant root of the factorized
    symbol; ``phase_phi`` and ``Q`` are the phase and amplitude of the
    stable four-term form.
    """

    S: float
    a: float
    b: float
    theta: float
    phase_phi: float
    Q: float
    p_plus_sq: complex
    p_minus_sq: complex


def green_aux(params: ProblemParams) -> GreenAux:
    """Compute the auxiliary kernel parameters for given problem parameters.

    Raises
    ------
    RealRootError
        If S = delta / (4*nu*(1 + delta*R)) >= 1, i.e. the symbol roots
        are real and the kernel oscillates globally (time step too large).
    """
    nu, delta, R = params.nu, params.delta, params.R
    denom = 1.0 + delta * R
    if not denom > 0:
        raise KsgreenError(f"1 + delta*R must be positive, got {denom}")
    S = delta / (4.0 * nu * denom)
    if S >= 1.0:
        raise RealRootError(S)

    rs = math.sqrt(S)
    scale = S ** -0.25 / (2.0 * math.sqrt(nu))
    a = scale * math.sqrt(1.0 + rs)
    b = scale * math.sqrt(1.0 - rs)
    theta = math.atan(math.sqrt((1.0 - rs) / (1.0 + rs)))

    # phase written with exp(-4b) factors so that large b cannot overflow
    e4b = math.exp(-4.0 * b)
    phase = (
        2.0 * a
        - theta
        - 0.5 * math.pi
        + math.atan2(math.sin(4.0 * a) * e4b, 1.0 - math.cos(4.0 * a) * e4b)
    )
    Q = (
        math.sqrt(nu)
        / delta
        * math.sqrt(2.0 * S * rs / (1.0 - S))
        / math.sqrt(1.0 - 2.0 * e4b * math.cos(4.0 * a) + e4b * e4b)
    )

    disc = complex(delta * delta - 4.0 * delta * nu * denom)
    root = np.sqrt(disc)
    p_plus_sq = 1.0 / (2.0 * nu) + root / (2.0 * delta * nu)
    p_minus_sq = 1.0 / (2.0 * nu) - root / (2.0 * delta * nu)
    if p_plus_sq.imag < 0:
        p_plus_sq, p_minus_sq = p_minus_sq, p_plus_sq

    return GreenAux(
        S=S,
        a=a,
        b=b,
        theta=theta,
        phase_phi=phase,
        Q=Q,
        p_plus_sq=p_plus_sq,
        p_minus_sq=p_minus_sq,
    )


# ---------------------------------------------------------------------------
# evaluation kernels (array-valued; no symmetry mapping applied)


def _g_four_term(aux: GreenAux, x, y):
    """Four-term exponential form, accurate away from the x = +-1 edges."""
    a, b, phi, Q = aux.a, aux.b, aux.phase_phi, aux.Q
    d = np.abs(x - y)
    s = x + y
    return Q * (
        np.exp(-b * d) * np.sin(2.0 * a - a * d - phi)
        - np.exp(-4.0 * b + b * d) * np.sin(2.0 * a - a * d + phi)
        - np.exp(-2.0 * b + b * s) * np.sin(a * s - phi)
        + np.exp(-2.0 * b - b * s) * np.sin(a * s + phi)
    )


def _g_right(aux: GreenAux, x, y):
    """Edge-stable rewrite for x near +1; requires y <= x elementwise."""
    a, b, phi, Q = aux.a, aux.b, aux.phase_phi, aux.Q
    cp = np.cos(a * (y + 1.0) + phi)
    cm = np.cos(a * (y + 1.0) - phi)
    sp = np.sin(a * (y + 1.0) + phi)
    sm = np.sin(a * (y + 1.0) - phi)
    e1 = np.exp(b * (x - y - 4.0))
    e2 = np.exp(-b * (x + y + 2.0))
    e3 = np.exp(-b * (x - y))
    e4 = np.exp(b * (x + y - 2.0))
    t1 = Q * np.sin(a * (x - 1.0)) * (cp * (e1 + e2) - cm * (e3 + e4))
    t2 = (
        -2.0
        * Q
        * np.sinh(b * (x - 1.0))
        * np.cos(a * (x - 1.0))
        * (sm * np.exp(b * (y - 1.0)) + sp * np.exp(-b * (y + 3.0)))
    )
    return t1 + t2


def _gy_four_term(aux: GreenAux, x, y, sgn):
    """y-derivative of the four-term form; sgn = sign(x - y) (one-sided at 0)."""
    a, b, phi, Q = aux.a, aux.b, aux.phase_phi, aux.Q
    d = np.abs(x - y)
    s = x + y
    am = 2.0 * a - a * d - phi
    ap = 2.0 * a - a * d + phi
    sm = a * s - phi
    sp = a * s + phi
    return Q * (
        sgn * np.exp(-b * d) * (b * np.sin(am) + a * np.cos(am))
        + sgn * np.exp(-4.0 * b + b * d) * (b * np.sin(ap) - a * np.cos(ap))
        - np.exp(-2.0 * b + b * s) * (b * np.sin(sm) + a * np.cos(sm))
        + np.exp(-2.0 * b - b * s) * (-b * np.sin(sp) + a * np.cos(sp))
    )


def _gy_right(aux: GreenAux, x, y):
    """y-derivative of the edge-stable rewrite; requires y <= x."""
    a, b, phi, Q = aux.a, aux.b, aux.phase_phi, aux.Q
    cp = np.cos(a * (y + 1.0) + phi)
    cm = np.cos(a * (y + 1.0) - phi)
    sp = np.sin(a * (y + 1.0) + phi)
    sm = np.sin(a * (y + 1.0) - phi)
    e1 = np.exp(b * (x - y - 4.0))
    e2 = np.exp(-b * (x + y + 2.0))
    e3 = np.exp(-b * (x - y))
    e4 = np.exp(b * (x + y - 2.0))
    dp = -a * sp * (e1 + e2) - b * cp * (e1 + e2)
    dm = a * sm * (e3 + e4) - b * cm * (e3 + e4)
    em = np.exp(b * (y - 1.0))
    ep = np.exp(-b * (y + 3.0))
    ds = (a * cm + b * sm) * em + (a * cp - b * sp) * ep
    return Q * np.sin(a * (x - 1.0)) * (dp + dm) - 2.0 * Q * np.sinh(
        b * (x - 1.0)
    ) * np.cos(a * (x - 1.0)) * ds


def _gx_right(aux: GreenAux, x, y):
    """x-derivative of the edge-stable rewrite; requires y <= x."""
    a, b, phi, Q = aux.a, aux.b, aux.phase_phi, aux.Q
    cp = np.cos(a * (y + 1.0) + phi)
    cm = np.cos(a * (y + 1.0) - phi)
    sp = np.sin(a * (y + 1.0) + phi)
    sm = np.sin(a * (y + 1.0) - phi)
    e1 = np.exp(b * (x - y - 4.0))
    e2 = np.exp(-b * (x + y + 2.0))
    e3 = np.exp(-b * (x - y))
    e4 = np.exp(b * (x + y - 2.0))
    p = cp * (e1 + e2) - cm * (e3 + e4)
    dp_dx = b * (cp * (e1 - e2) - cm * (e4 - e3))
    s = sm * np.exp(b * (y - 1.0)) + sp * np.exp(-b * (y + 3.0))
    sinx = np.sin(a * (x - 1.0))
    cosx = np.cos(a * (x - 1.0))
    shx = np.sinh(b * (x - 1.0))
    chx = np.cosh(b * (x - 1.0))
    return Q * (
        a * cosx * p + sinx * dp_dx - 2.0 * (b * chx * cosx - a * shx * sinx) * s
    )


# ---------------------------------------------------------------------------
# public evaluation with symmetry reduction


def _check_domain(*coords):
    for c in coords:
        arr = np.asarray(c)
        if arr.size and (arr.min() < -1.0 - 1e-12 or arr.max() > 1.0 + 1e-12):
            raise KsgreenError("evaluation point outside [-1, 1]")


def green_eval(aux: GreenAux, params: ProblemParams, x, y):
    """Evaluate the kernel G(x, y); scalars or broadcastable arrays.

    The point is first mapped by the symmetry relations G(x,y) = G(y,x)
    and G(-x,-y) = G(x,y) onto 0 <= x <= 1, -x <= y <= x, then the
    edge-stable rewrite is used whenever 1 - x < 1/b.
    """
    _check_domain(x, y)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    scalar = x.ndim == 0
    x, y = np.atleast_1d(x).copy(), np.atleast_1d(y).copy()

    swap = np.abs(y) > np.abs(x)
    x[swap], y[swap] = y[swap], x[swap].copy()
    flip = x < 0
    x[flip] = -x[flip]
    y[flip] = -y[flip]

    out = np.empty_like(x)
    near = (1.0 - x) * aux.b < 1.0
    if near.any():
        out[near] = _g_right(aux, x[near], y[near])
    rest = ~near
    if rest.any():
        out[rest] = _g_four_term(aux, x[rest], y[rest])
    return out[0] if scalar else out


def green_deriv_eval(aux: GreenAux, params: ProblemParams, x, y, side: int = -1):
    """Evaluate dG/dy(x, y); ``side`` picks the one-sided limit at y = x.

    ``side=-1`` (default) takes the limit from y < x, ``side=+1`` from
    y > x. Edge-stable rewrites are used near all four boundaries, routed
    through the symmetry relations of the kernel.
    """
    _check_domain(x, y)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    scalar = x.ndim == 0
    x, y = np.atleast_1d(x).copy(), np.atleast_1d(y).copy()
    sign = np.ones_like(x)

    flip = x < 0
    x[flip] = -x[flip]
    y[flip] = -y[flip]
    sign[flip] = -1.0
    eff_side = np.where(flip, -side, side)

    out = np.empty_like(x)
    inv_b = 1.0 / aux.b
    below = (y < x) | ((y == x) & (eff_side < 0))

    # y <= x branch
    m = below & (1.0 - x < inv_b)
    if m.any():
        out[m] = _gy_right(aux, x[m], y[m])
    m2 = below & ~m & (y < 0) & (1.0 + y < inv_b)
    if m2.any():
        # dG/dy(x,y) = d1G(y,x) = -d1G(-y,-x), with -y near +1 and -x <= -y
        out[m2] = -_gx_right(aux, -y[m2], -x[m2])
    m3 = below & ~m & ~m2
    if m3.any():
        out[m3] = _gy_four_term(aux, x[m3], y[m3], 1.0)

    above = ~below
    n1 = above & (1.0 - y < inv_b)
    if n1.any():
        # dG/dy(x,y) = d1G(y,x) with y near +1 and x <= y
        out[n1] = _gx_right(aux, y[n1], x[n1])
    n2 = above & ~n1
    if n2.any():
        out[n2] = _gy_four_term(aux, x[n2], y[n2], -1.0)

    out *= sign
    return out[0] if scalar else out


def eigen_sum_oracle(params: ProblemParams, x, y, K: int, chunk: int = 65536):
    """Partial modal sum of the kernel over the first K odd/even eigenpairs.

    Converges to G(x, y) as K grows, with an O(1/K^3) tail near the
    diagonal; intended as an independent validation oracle, not for
    production evaluation.
    """
    if K < 1:
        raise KsgreenError(f"K must be >= 1, got {K}")
    _check_domain(x, y)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    nu, delta, R = params.nu, params.delta, params.R
    const = 1.0 + delta * R
    total = np.zeros(np.broadcast_shapes(x.shape, y.shape))
    for k0 in range(1, K + 1, chunk):
        k = np.arange(k0, min(k0 + chunk, K + 1), dtype=float)
        ko = np.pi * k
        ke = np.pi * (k - 0.5)
        lam_o = const - delta * ko**2 + delta * nu * ko**4
        lam_e = const - delta * ke**2 + delta * nu * ke**4
        if np.any(lam_o == 0.0) or np.any(lam_e == 0.0):
            raise DegenerateSpectrumError("zero eigenvalue in modal sum")
        total = total + (
            np.sin(np.outer(x, ko)) * np.sin(np.outer(y, ko)) / lam_o
            + np.cos(np.outer(x, ke)) * np.cos(np.outer(y, ke)) / lam_e
        ).sum(axis=1)
    return total[0] if total.size == 1 else total


def green_compact(aux: GreenAux, params: ProblemParams, x, y):
    """Compact complex form of the kernel (validation only).

    Numerically unstable near the boundaries: it contains terms as large
    as exp(2*Im p_plus). Kept solely for cross-checks against the stable
    four-term form and the modal sum at interior points.
    """
    p = np.sqrt(aux.p_plus_sq)
    if p.imag < 0:
        p = -p
    num = -np.cos(2.0 * p - p * np.abs(x - y)) + np.cos(p * (x + y))
    pref = 1.0 / (params.delta * params.nu * (aux.p_plus_sq - aux.p_minus_sq).imag)
    return pref * np.imag(num / (p * np.sin(2.0 * p)))

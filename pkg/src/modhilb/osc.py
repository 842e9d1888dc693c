"""Bump families and oscillatory-integral evaluation.

Concrete realizations of the cutoffs (eta, psi, Theta, chi, zeta), the
continuous multiplier block H_j, the slab integrals mu and mu_bar, and
the stationary-phase split of the windowed oscillatory symbol G.

The base cutoff eta is a polynomial smoothstep (default degree 9, C^4):
eta = 1 on [-1,1], 0 outside [-2,2], monotone on the transition bands.
Everything else is derived from eta, so smoothness and support constants
are certified by construction rather than assumed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

TWO_PI = 2.0 * np.pi


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature exhausts its panel budget.

    Carries the best estimate achieved so far in the ``estimate``
    attribute so callers can decide whether to accept it.
    """

    def __init__(self, message: str, estimate: complex):
        super().__init__(message)
        self.estimate = estimate


class BumpFamily:
    """The smooth cutoff family used throughout.

    Members (all even unless noted):

    - eta:   1 on [-1,1], 0 outside [-2,2]
    - w:     eta(x) - eta(2x), an annular window on 1/2 <= |x| <= 2
    - psi:   w(t)/t, odd, supported on 1/2 <= |t| <= 2
    - theta: annular partition unit, sum_j theta(2^j xi) = 1 for xi != 0
    - chi:   1 on |xi| <= c_chi, 0 outside |xi| <= 2*c_chi
    - zeta:  fat annulus, 1 on 1/8 <= |xi| <= 8, supported in [1/16, 16]
    - xi0:   narrow bump of radius 1/(4d) around 0 (critical-point excision)

    plus the overline variants theta_bar, chi_bar, zeta_bar, each equal
    to one on the support of its base member.
    """

    def __init__(self, d: int = 2, smoothness_order: int = 4,
                 c_chi: Optional[float] = None):
        if smoothness_order < 2:
            raise ValueError("smoothness_order must be >= 2")
        if d < 2:
            raise ValueError("d must be >= 2")
        self.d = d
        self.smoothness_order = smoothness_order
        self.c_chi = float(c_chi) if c_chi is not None else 1.0 / (8 * d)
        n = smoothness_order
        # smoothstep coefficients for S_n(u) = u^(n+1) * sum_k c_k u^k
        self._step_coeffs = np.array(
            [math.comb(n + k, k) * math.comb(2 * n + 1, n - k) * (-1) ** k
             for k in range(n + 1)], dtype=float)

    def _smoothstep(self, u: np.ndarray) -> np.ndarray:
        """S_n(u) on [0,1]: 0 at 0, 1 at 1, C^n when extended by constants."""
        u = np.clip(u, 0.0, 1.0)
        c = self._step_coeffs
        poly = c[-1] * u
        poly += c[-2]
        for k in range(len(c) - 3, -1, -1):
            poly *= u
            poly += c[k]
        # u^(n+1) by plain multiplies; pow() per element is far slower
        power = u * u
        for _ in range(self.smoothness_order - 1):
            power *= u
        poly *= power
        return poly

    def eta(self, x):
        arr = np.asarray(x, dtype=float)
        res = 1.0 - self._smoothstep(np.abs(arr) - 1.0)
        return float(res) if arr.ndim == 0 else res

    def w(self, x):
        arr = np.asarray(x, dtype=float)
        res = np.asarray(self.eta(arr)) - np.asarray(self.eta(2.0 * arr))
        return float(res) if arr.ndim == 0 else res

    def psi(self, t):
        # fused form of w(t)/t: both smoothsteps clip to zero for
        # |t| <= 1/2, so the quotient needs no support bookkeeping
        arr = np.asarray(t, dtype=float)
        a = np.abs(arr)
        num = self._smoothstep(2.0 * a - 1.0)
        num -= self._smoothstep(a - 1.0)
        res = np.divide(num, arr, out=np.zeros_like(num), where=arr != 0.0)
        return float(res) if arr.ndim == 0 else res

    def theta(self, xi):
        return self.w(xi)

    def theta_bar(self, xi):
        arr = np.asarray(xi, dtype=float)
        res = np.asarray(self.eta(arr / 2.0)) - np.asarray(self.eta(4.0 * arr))
        return float(res) if arr.ndim == 0 else res

    def chi(self, xi):
        arr = np.asarray(xi, dtype=float)
        res = np.asarray(self.eta(arr / self.c_chi))
        return float(res) if arr.ndim == 0 else res

    def chi_bar(self, xi):
        arr = np.asarray(xi, dtype=float)
        res = np.asarray(self.eta(arr / (2.0 * self.c_chi)))
        return float(res) if arr.ndim == 0 else res

    def zeta(self, xi):
        arr = np.asarray(xi, dtype=float)
        res = np.asarray(self.eta(arr / 8.0)) - np.asarray(self.eta(16.0 * arr))
        return float(res) if arr.ndim == 0 else res

    def zeta_bar(self, xi):
        arr = np.asarray(xi, dtype=float)
        res = np.asarray(self.eta(arr / 16.0)) - np.asarray(self.eta(32.0 * arr))
        return float(res) if arr.ndim == 0 else res

    def xi0(self, s):
        """Excision bump: 1 for |s| <= 1/(8d), 0 for |s| >= 1/(4d)."""
        arr = np.asarray(s, dtype=float)
        res = np.asarray(self.eta(8.0 * self.d * arr))
        return float(res) if arr.ndim == 0 else res


DEFAULT_BUMPS = BumpFamily(d=2)


def psi_j(t, j: int, fam: BumpFamily = DEFAULT_BUMPS):
    """The dilated block 2^(-j) psi(2^(-j) t), supported 2^(j-1) <= |t| <= 2^(j+1)."""
    scale = math.ldexp(1.0, -j)
    arr = np.asarray(t, dtype=float)
    res = scale * np.asarray(fam.psi(scale * arr))
    return float(res) if arr.ndim == 0 else res


# ---------------------------------------------------------------------------
# adaptive oscillatory quadrature

# 15-point Kronrod extension of 7-point Gauss-Legendre; the Gauss nodes
# sit at the odd indices, so one evaluation pass feeds both rules.
_XGK_HALF = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0])
_WGK_HALF = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728])
_WG_HALF = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469])
_XGK = np.concatenate([-_XGK_HALF[:-1], _XGK_HALF[::-1]])
_WGK = np.concatenate([_WGK_HALF[:-1], _WGK_HALF[::-1]])
_WG = np.zeros(15)
_WG[1:14:2] = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])


def _panel_batch(g, n_out: int, lo: np.ndarray,
                 hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Kronrod integrals and error estimates over each [lo_i, hi_i].

    g maps a flat node array to an (n_out, nodes) stack of integrand
    values sharing the same panels; one vectorized evaluation at the 15
    Kronrod nodes yields the K15 result, the embedded G7 result, and a
    scaled error estimate in the style of classic automatic integrators:
    the raw |K15 - G7| gap is damped through the panel's total variation
    proxy, so nearly-exact panels are not refined just because the gap
    sits above round-off.
    """
    n = len(lo)
    res_k = np.empty((n_out, n), dtype=complex)
    err = np.empty((n_out, n))
    # chunked so the (panels x 15) node matrices stay cache-sized
    step = 1 << 12
    for start in range(0, n, step):
        sl = slice(start, min(start + step, n))
        mid = 0.5 * (lo[sl] + hi[sl])
        half = 0.5 * (hi[sl] - lo[sl])
        t = mid[:, None] + half[:, None] * _XGK[None, :]
        vals = g(t.ravel()).reshape((n_out,) + t.shape)
        rk = (vals @ _WGK) * half
        rg = (vals @ _WG) * half
        mean = rk / np.where(half == 0.0, 1.0, 2.0 * half)
        resasc = (np.abs(vals - mean[..., None]) @ _WGK) * half
        raw = np.abs(rk - rg)
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = resasc * np.minimum(1.0, (200.0 * raw / resasc) ** 1.5)
        res_k[:, sl] = rk
        err[:, sl] = np.where(resasc > 0.0, scaled, raw)
    return res_k, err


def _adaptive_oscillatory(phase, g, n_out: int, support: tuple[float, float],
                          tol: float, panel_budget: int) -> np.ndarray:
    """Shared-panel adaptive core behind oscillatory_quadrature.

    Integrates the n_out stacked integrands produced by g over [a, b] on
    one common panel layout, refining until every component meets the
    absolute tolerance.  On budget exhaustion raises QuadratureError
    whose estimate is the length-n_out vector achieved so far.
    """
    a, b = float(support[0]), float(support[1])
    if not b > a:
        return np.zeros(n_out, dtype=complex)

    span = b - a
    # estimated |phase'| on a midpoint grid; fine enough for the smooth
    # polynomial phases used here
    m = 2048
    cell = span / m
    mids = a + (np.arange(m) + 0.5) * cell
    h = span * 1e-7
    dphi = np.abs(np.asarray(phase(mids + h)) - np.asarray(phase(mids - h))) / (2 * h)
    cycles = np.concatenate([[0.0], np.cumsum(dphi * cell)])
    total_cycles = cycles[-1]

    n_osc = int(math.ceil(total_cycles * 4.0))
    budget_hit = False
    if n_osc > panel_budget:
        n_osc = panel_budget
        budget_hit = True
    if n_osc > 0:
        targets = np.linspace(0.0, total_cycles, n_osc + 1)
        osc_edges = np.interp(targets, cycles, np.concatenate([[a], mids + 0.5 * cell]))
    else:
        osc_edges = np.array([a, b])
    base_edges = np.linspace(a, b, 17)
    edges = np.unique(np.concatenate([osc_edges, base_edges, [a, b]]))

    lo_e, hi_e = edges[:-1], edges[1:]
    vals, err = _panel_batch(g, n_out, lo_e, hi_e)
    created = len(lo_e)

    if budget_hit:
        raise QuadratureError(
            "initial quarter-period subdivision exceeds the panel budget",
            vals.sum(axis=1))

    while err.sum(axis=1).max() > tol:
        thresh = tol / (2.0 * len(lo_e))
        bad = (err > thresh).any(axis=0)
        if not bad.any():
            bad = err.max(axis=0) == err.max()
        if created + int(bad.sum()) > panel_budget:
            raise QuadratureError(
                "panel budget exhausted before reaching tolerance",
                vals.sum(axis=1))
        ba, bb = lo_e[bad], hi_e[bad]
        mid = 0.5 * (ba + bb)
        new_lo = np.concatenate([ba, mid])
        new_hi = np.concatenate([mid, bb])
        new_vals, new_err = _panel_batch(g, n_out, new_lo, new_hi)
        keep = ~bad
        lo_e = np.concatenate([lo_e[keep], new_lo])
        hi_e = np.concatenate([hi_e[keep], new_hi])
        vals = np.concatenate([vals[:, keep], new_vals], axis=1)
        err = np.concatenate([err[:, keep], new_err], axis=1)
        created += int(bad.sum())
    return vals.sum(axis=1)


def _oscillating_factor(phase, t):
    """e(phase(t)) evaluated in one pass."""
    ph = (2.0 * np.pi) * np.asarray(phase(t))
    out = np.empty(ph.shape, dtype=complex)
    np.cos(ph, out=out.real)
    np.sin(ph, out=out.imag)
    return out


def oscillatory_quadrature(phase: Callable, amplitude: Callable,
                           support: tuple[float, float], tol: float = 1e-10,
                           panel_budget: int = 2 ** 18) -> complex:
    """Evaluate int e(phase(t)) amplitude(t) dt over [a, b] adaptively.

    Panels are first laid out so that no panel spans more than a quarter
    of the local oscillation period (the period is estimated from
    |phase'| by centered differences on a fine midpoint grid), then
    refined by bisection wherever the embedded Gauss-Kronrod 7/15 error
    estimate indicates the absolute error budget is not yet met.

    Both callables must accept numpy arrays.  Raises QuadratureError,
    carrying the achieved estimate, if the panel budget is exhausted.
    """
    def g(t):
        out = _oscillating_factor(phase, t)
        out *= np.asarray(amplitude(t))
        return out[None, :]

    try:
        res = _adaptive_oscillatory(phase, g, 1, support, tol, panel_budget)
    except QuadratureError as exc:
        raise QuadratureError(str(exc), complex(exc.estimate[0])) from None
    return complex(res[0])


def _psi_support_quadrature(phase, fam: BumpFamily, tol: float,
                            panel_budget: int, extra_amplitude=None) -> complex:
    """Integrate e(phase) psi (times an optional factor) over supp psi."""
    if extra_amplitude is None:
        amp = fam.psi
    else:
        def amp(t):
            return np.asarray(fam.psi(t)) * np.asarray(extra_amplitude(t))
    total = 0j
    for a, b in ((-2.0, -0.5), (0.5, 2.0)):
        total += oscillatory_quadrature(phase, amp, (a, b), tol / 2, panel_budget)
    return total


def _psi_support_quadrature_multi(phase, fam: BumpFamily, weight_stack,
                                  n_out: int, tol: float,
                                  panel_budget: int) -> np.ndarray:
    """Integrate e(phase) psi w_i over supp psi for a stack of weights.

    weight_stack maps a node array to an (n_out, nodes) real stack; the
    common factor e(phase) psi is evaluated once per node and shared, so
    the cost of n_out integrals is close to the cost of one.
    """
    def g(t):
        base = _oscillating_factor(phase, t)
        base *= np.asarray(fam.psi(t))
        return base[None, :] * weight_stack(t)

    total = np.zeros(n_out, dtype=complex)
    for a, b in ((-2.0, -0.5), (0.5, 2.0)):
        total += _adaptive_oscillatory(phase, g, n_out, (a, b), tol / 2,
                                       panel_budget)
    return total


# ---------------------------------------------------------------------------
# the continuous multiplier block H_j

def H_j(x: float, y: float, j: int, d: int, fam: BumpFamily = DEFAULT_BUMPS,
        tol: float = 1e-10, panel_budget: int = 2 ** 18) -> complex:
    """int e(-x t^d - y t) psi_j(t) dt.

    Computed after the substitution t = 2^j u, which keeps the quadrature
    domain fixed at the support of psi for every j.
    """
    X = math.ldexp(float(x), d * j)
    Y = math.ldexp(float(y), j)

    def phase(u):
        return -(X * u ** d + Y * u)

    return _psi_support_quadrature(phase, fam, tol, panel_budget)


def mu(lam: float, l: int, k: int, d: int, fam: BumpFamily = DEFAULT_BUMPS,
       tol: float = 1e-10) -> complex:
    """int e(-lam 2^(kd) t^d) psi(t) dt; |mu| <= C min(2^l, 1) on the slab."""
    scale = math.ldexp(float(lam), k * d)

    def phase(t):
        return -scale * t ** d

    return _psi_support_quadrature(phase, fam, tol, 2 ** 18)


def mu_bar(lam: float, l: int, k: int, d: int, fam: BumpFamily = DEFAULT_BUMPS,
           tol: float = 1e-10) -> complex:
    """-2 pi i int e(-lam 2^(kd) t^d) t psi(t) dt."""
    scale = math.ldexp(float(lam), k * d)

    def phase(t):
        return -scale * t ** d

    def times_t(t):
        return np.asarray(t, dtype=float)

    val = _psi_support_quadrature(phase, fam, tol, 2 ** 18, extra_amplitude=times_t)
    return -2j * np.pi * val


# ---------------------------------------------------------------------------
# phase geometry and the stationary-phase split

@dataclass(frozen=True)
class PhaseContext:
    """Parameters of the rescaled phase -2^(-l) (lam 2^(kd) t^d + xi 2^k t).

    lam must lie in the dyadic slab [2^(l-dk), 2^(l-dk+1)).  When
    regime_C is supplied, the regime condition k^C >= 2^l is enforced.
    """

    d: int
    k: int
    l: int
    lam: float
    regime_C: Optional[float] = None

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.l < 0:
            raise ValueError("l must be >= 0")
        slab_lo = math.ldexp(1.0, self.l - self.d * self.k)
        if not (slab_lo <= self.lam < 2.0 * slab_lo):
            raise ValueError("lam outside its dyadic slab")
        if self.regime_C is not None:
            if self.k < 1 or self.k ** self.regime_C < math.ldexp(1.0, self.l):
                raise ValueError("regime condition k^C >= 2^l violated")

    @property
    def lam2kd(self) -> float:
        """lam * 2^(kd), always in [2^l, 2^(l+1))."""
        return math.ldexp(self.lam, self.d * self.k)


def critical_point(xi: float, ctx: PhaseContext) -> list[float]:
    """Real solutions t of d lam 2^(k(d-1)) t^(d-1) = -xi.

    One root for d even; for d odd, two roots when xi < 0 and none when
    xi > 0.  xi = 0 is degenerate and yields the empty list with a
    diagnostic warning.
    """
    if xi == 0.0:
        warnings.warn("critical_point: xi = 0 is degenerate; no roots returned")
        return []
    coeff = ctx.d * math.ldexp(ctx.lam, ctx.k * (ctx.d - 1))
    rhs = -xi / coeff
    p = ctx.d - 1
    if ctx.d % 2 == 0:
        t = math.copysign(abs(rhs) ** (1.0 / p), rhs)
        return [t]
    if rhs <= 0.0:
        return []
    r = rhs ** (1.0 / p)
    return [r, -r]


def conjugate_phase_constant(d: int) -> float:
    """The constant c_d = -((d+1)/d) * d^(-1/(d-1)) in the conjugate phase.

    The local (critical point) part of the split carries the oscillation
    c_d * lam^(-1/(d-1)) * xi^(d/(d-1)) with the signed-power convention
    of signed_power.
    """
    return -((d + 1.0) / d) * d ** (-1.0 / (d - 1.0))


def signed_power(xi: float, d: int) -> float:
    """xi^(d/(d-1)): signed power for d even, absolute power for d odd."""
    p = d / (d - 1.0)
    if d % 2 == 0:
        return math.copysign(abs(xi) ** p, xi)
    return abs(xi) ** p


def _g_phase(ctx: PhaseContext, xi: float):
    X = ctx.lam2kd
    Y = math.ldexp(float(xi), ctx.k)

    def phase(t):
        # repeated multiplies: the power ufunc dominates otherwise
        p = t * t
        for _ in range(ctx.d - 2):
            p = p * t
        return -(X * p + Y * t)

    return phase


def G_hat_direct(xi: float, ctx: PhaseContext, fam: BumpFamily = DEFAULT_BUMPS,
                 tol: float = 1e-10, panel_budget: int = 2 ** 18) -> complex:
    """The windowed symbol: int e(2^l phi(t, xi)) psi(t) dt * zeta(2^(k-l) xi)."""
    zf = fam.zeta(math.ldexp(float(xi), ctx.k - ctx.l))
    if zf == 0.0:
        return 0j
    phase = _g_phase(ctx, xi)
    return zf * _psi_support_quadrature(phase, fam, tol, panel_budget)


def stationary_phase_split(xi: float, ctx: PhaseContext,
                           fam: BumpFamily = DEFAULT_BUMPS, tol: float = 1e-10,
                           panel_budget: int = 2 ** 18):
    """Split the windowed symbol into nonstationary and local parts.

    Returns (A_hat, B_hat_plus, B_hat_minus); B_hat_minus is None for d
    even (a second critical point exists only for d odd).  The critical
    points are excised from A_hat by the bump xi0; each B part is the
    integral against the corresponding xi0 window, so

        A_hat + B_hat_plus (+ B_hat_minus) = G_hat_direct(xi)

    exactly, up to quadrature tolerance.  When no critical point exists,
    A_hat is the whole symbol and the B parts vanish.
    """
    d_even = ctx.d % 2 == 0
    zf = fam.zeta(math.ldexp(float(xi), ctx.k - ctx.l))
    if zf == 0.0:
        return (0j, 0j, None if d_even else 0j)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        roots = critical_point(xi, ctx) if xi != 0.0 else []
    phase = _g_phase(ctx, xi)
    if not roots:
        whole = zf * _psi_support_quadrature(phase, fam, tol, panel_budget)
        return (whole, 0j, None if d_even else 0j)

    # the excised part and the per-root windows share the phase, hence
    # the same panel layout; stacking them shares the node evaluations
    def weight_stack(t):
        t = np.asarray(t, dtype=float)
        windows = [np.asarray(fam.xi0(t - r)) for r in roots]
        return np.stack([1.0 - sum(windows)] + windows)

    vals = zf * _psi_support_quadrature_multi(phase, fam, weight_stack,
                                              1 + len(roots), tol,
                                              panel_budget)
    a_hat = complex(vals[0])
    b_parts = [complex(v) for v in vals[1:]]
    if d_even:
        return (a_hat, b_parts[0], None)
    # for d odd the two roots are +/- r with r > 0; the plus part is the
    # window at the larger root
    return (a_hat, b_parts[0], b_parts[1])


# ---------------------------------------------------------------------------
# square function

def square_function_S_G(f, l: int, k_range: tuple[int, int],
                        lambda_grid_per_slab: int, d: int,
                        fam: BumpFamily = DEFAULT_BUMPS,
                        ring_size: Optional[int] = None, tol: float = 1e-8,
                        derivative: bool = False):
    """Discrete square function built from the windowed symbols.

    For each k in k_range, integrates |G_lam * f|^2 over the dyadic slab
    of lam values by the trapezoid rule on a lambda grid, weights the
    slab by 2^(dk), sums over k and takes a pointwise square root.
    Convolutions run on a circular domain of at least 4x the support of
    f.  With derivative=True the symbol is replaced by its centered
    difference in lam (the primed square function).
    """
    from .spectral import Signal, apply_multiplier

    if lambda_grid_per_slab < 1:
        raise ValueError("need at least one grid point per slab")
    k_min, k_max = k_range
    if ring_size is None:
        width = max(len(f.values), 1)
        ring_size = 1
        while ring_size < 4 * width:
            ring_size *= 2
    acc = np.zeros(ring_size)
    for k in range(k_min, k_max + 1):
        slab_lo = math.ldexp(1.0, l - d * k)
        slab_hi = 2.0 * slab_lo
        n = lambda_grid_per_slab
        if n == 1:
            lams = np.array([slab_lo])
            weights = np.array([slab_hi - slab_lo])
        else:
            lams = np.linspace(slab_lo, slab_hi, n)
            dx = (slab_hi - slab_lo) / (n - 1)
            weights = np.full(n, dx)
            weights[0] = weights[-1] = dx / 2
        for lam, wgt in zip(lams, weights):
            lam = min(lam, np.nextafter(slab_hi, 0.0))
            ctx = PhaseContext(d, k, l, lam)

            def symbol(beta, ctx=ctx):
                beta = np.asarray(beta, dtype=float)
                xi = beta - np.round(beta)
                out = np.zeros(xi.shape, dtype=complex)
                flat_xi = np.atleast_1d(xi.ravel())
                flat_out = np.atleast_1d(out.ravel())
                for i, x in enumerate(flat_xi):
                    if derivative:
                        h = ctx.lam * 1e-6
                        lam_p = min(ctx.lam + h, np.nextafter(2 * math.ldexp(1.0, l - d * k), 0))
                        lam_m = max(ctx.lam - h, math.ldexp(1.0, l - d * k))
                        up = G_hat_direct(x, PhaseContext(d, k, l, lam_p), fam, tol)
                        dn = G_hat_direct(x, PhaseContext(d, k, l, lam_m), fam, tol)
                        flat_out[i] = (up - dn) / (lam_p - lam_m)
                    else:
                        flat_out[i] = G_hat_direct(x, ctx, fam, tol)
                return flat_out.reshape(out.shape)

            conv = apply_multiplier(f, symbol, ring_size)
            acc += math.ldexp(1.0, d * k) * wgt * np.abs(conv.values) ** 2
    return Signal(0, np.sqrt(acc).astype(complex))

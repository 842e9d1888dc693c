"""Complete and incomplete Weyl/Gauss exponential sums.

The normalized complete sum

    S(a/q, b/q) = (1/q) * sum_{r=1..q} e(-(a/q) r^d - (b/q) r),

its orthogonality and kernel identities, and empirical decay scans
(square-root cancellation in q, minor-arc smallness).

Phases of complete sums are reduced mod q in exact integer arithmetic
before the single transcendental call, so no drift accumulates even for
large q.  The summation index runs 1..q; by periodicity this agrees with
0..q-1 and with the r = 0..Q-1 convention used elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .farey import ReducedFraction, torus_distance


@dataclass(frozen=True)
class WeylTriple:
    """Arguments (a/q, b/q) of a complete sum, jointly normalized.

    Invariants: 0 <= a, b < q and gcd(a, b, q) = 1.
    """

    a: int
    b: int
    q: int
    d: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be positive")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if not (0 <= self.a < self.q and 0 <= self.b < self.q):
            raise ValueError("need 0 <= a, b < q")
        if math.gcd(math.gcd(self.a, self.b), self.q) != 1:
            raise ValueError("need gcd(a, b, q) = 1")


@dataclass(frozen=True)
class PolynomialPhase:
    """A real polynomial phase c_1 x + ... + c_d x^d on an interval.

    The constant term is omitted (it only rotates the sum).  The weight
    is a C^1 function with |phi| <= C and |phi'(x)| <= C(1+|x|)^(-1);
    None means the unit weight.
    """

    coefficients: tuple[float, ...]
    interval: tuple[float, float]
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if len(self.coefficients) < 1:
            raise ValueError("need at least the linear coefficient")
        if self.interval[1] - self.interval[0] < 1.0:
            raise ValueError("interval length must be >= 1")

    @property
    def degree(self) -> int:
        return len(self.coefficients)


def _complete_sum(a: int, b: int, q: int, d: int) -> complex:
    """(1/q) sum_{r=1..q} e(-(a/q) r^d - (b/q) r); no normalization checks.

    The integer phase a*r^d + b*r is reduced mod q exactly per term.
    """
    ks = np.array([(a * pow(r, d, q) + b * r) % q for r in range(1, q + 1)])
    return complex(np.exp(-2j * np.pi * ks / q).sum() / q)


def complete_weyl_sum(t: WeylTriple) -> complex:
    """The normalized complete Gauss sum S(a/q, b/q)."""
    return _complete_sum(t.a, t.b, t.q, t.d)


def _complete_sum_row(a: int, q: int, d: int) -> np.ndarray:
    """S(a/q, b/q) for all b = 0..q-1 at once, via a length-q DFT.

    With x_r = e(-(a/q) r^d), the b-th sum is (1/q) * DFT(x)[b]; the
    residues a r^d mod q are computed exactly before exponentiation.
    """
    rd = np.array([pow(r, d, q) for r in range(q)], dtype=np.int64)
    ks = (a * rd) % q
    x = np.exp(-2j * np.pi * ks / q)
    return np.fft.fft(x) / q


def incomplete_weyl_sum(p: PolynomialPhase) -> complex:
    """sum_{n in I cap Z} e(P(n)) phi(n) by direct summation.

    Phases are accumulated in extended precision and reduced mod 1
    before exponentiation.
    """
    lo = math.ceil(p.interval[0])
    hi = math.floor(p.interval[1])
    if hi < lo:
        return 0j
    n = np.arange(lo, hi + 1, dtype=np.int64)
    phase = np.zeros(len(n), dtype=np.longdouble)
    nl = n.astype(np.longdouble)
    power = nl.copy()
    for c in p.coefficients:
        if c != 0.0:
            term = np.longdouble(c) * power
            phase += term - np.floor(term)
        power = power * nl
    phase -= np.floor(phase)
    vals = np.exp(2j * np.pi * phase.astype(np.float64))
    if p.weight is not None:
        vals = vals * p.weight(n.astype(np.float64))
    return complex(vals.sum())


def weyl_orthogonality_scan(q_max: int, d: int) -> dict:
    """Scan all (a, b, q) with q <= q_max, gcd(a,b,q)=1, gcd(a,q)>1.

    Every such sum vanishes identically; the report carries the maximum
    |S| observed (floating-point noise only) and the number of cases.
    """
    if q_max < 1:
        raise ValueError("q_max must be positive")
    max_abs = 0.0
    count = 0
    for q in range(2, q_max + 1):
        b_arr = np.arange(q)
        for a in range(q):
            g = math.gcd(a, q)
            if g <= 1:
                continue
            admissible = np.gcd(g, np.gcd(b_arr, q)) == 1
            if not admissible.any():
                continue
            row = np.abs(_complete_sum_row(a, q, d))
            max_abs = max(max_abs, float(row[admissible].max()))
            count += int(admissible.sum())
    return {"q_max": q_max, "d": d, "max_abs": max_abs, "count": count}


def weyl_kernel_identity(a_over_q: ReducedFraction, d: int, x: int) -> tuple[complex, complex]:
    """Both sides of the kernel re-expression at a/q.

    lhs = sum_{b=1..q} S(a/q, b/q) e((b/q) x), computed naively;
    rhs = sum_{r=1..q, r = x mod q} e(-(a/q) r^d), a single unimodular
    term.  The two agree and |rhs| = 1.
    """
    a, q = a_over_q.numerator, a_over_q.denominator
    row = _complete_sum_row(a, q, d)
    b_arr = np.arange(q)
    lhs = complex((row * np.exp(2j * np.pi * b_arr * x / q)).sum())
    r = x % q
    rhs = complex(np.exp(-2j * np.pi * ((a * pow(r, d, q)) % q) / q))
    return lhs, rhs


def hua_exponent_fit(q_max: int, d: int) -> tuple[float, float]:
    """Least-squares slope of log per-q max |S| against log q.

    Aggregates per-denominator maxima over all admissible (a, b) before
    fitting; returns (fitted_exponent, max of |S| * q^(1/d)).
    """
    if q_max < 8:
        raise ValueError("q_max must be >= 8")
    qs, maxima = [], []
    for q in range(2, q_max + 1):
        b_arr = np.arange(q)
        gb = np.gcd(b_arr, q)
        best = 0.0
        for a in range(q):
            g = math.gcd(a, q)
            admissible = np.gcd(g, gb) == 1
            if not admissible.any():
                continue
            row = np.abs(_complete_sum_row(a, q, d))
            best = max(best, float(row[admissible].max()))
        if best > 0.0:
            qs.append(q)
            maxima.append(best)
    qs_a = np.array(qs, dtype=float)
    max_a = np.array(maxima)
    slope, _ = np.polyfit(np.log(qs_a), np.log(max_a), 1)
    max_constant = float((max_a * qs_a ** (1.0 / d)).max())
    return float(slope), max_constant


def in_log_major_box(xi_d: float, xi_1: float, j: int, d: int, C: float) -> bool:
    """Membership in the union of log-scale major boxes at scale 2^j.

    Boxes sit at coprime tuples (a_d, a_1, q) with q <= j^C and have
    half-width j^C * 2^(-j*i) in the degree-i coordinate.
    """
    q_bound = int(math.floor(j ** C))
    w_d = (j ** C) * 2.0 ** (-j * d)
    w_1 = (j ** C) * 2.0 ** (-j)
    for q in range(1, q_bound + 1):
        a_d = round(xi_d * q)
        a_1 = round(xi_1 * q)
        if (torus_distance(xi_d, a_d / q) <= w_d
                and torus_distance(xi_1, a_1 / q) <= w_1):
            # nearest numerators suffice: box widths are < 1/(2q)
            if math.gcd(math.gcd(a_d % q, a_1 % q), q) == 1:
                return True
    return False


def minor_arc_decay_scan(j: int, d: int, alpha: float, C: float,
                         samples: int = 500, seed: int = 0) -> dict:
    """Sample xi outside the log-scale major boxes; record |S_N(xi)|/N.

    Uses rejection sampling against the box membership test and direct
    summation of the N = 2^j term incomplete sum with unit weight.
    Reports the max normalized magnitude and whether it is <= C_bound
    with C_bound = C * j^(-alpha) for the supplied constants.
    """
    if j < 4:
        raise ValueError("j must be >= 4")
    rng = np.random.Generator(np.random.Philox(seed))
    n_terms = 2 ** j
    max_norm = 0.0
    accepted = 0
    while accepted < samples:
        xi_d, xi_1 = rng.random(2)
        if in_log_major_box(xi_d, xi_1, j, d, C):
            continue
        accepted += 1
        coeffs = [0.0] * d
        coeffs[0] = xi_1
        coeffs[d - 1] = xi_d
        p = PolynomialPhase(tuple(coeffs), (1.0, float(n_terms)))
        val = abs(incomplete_weyl_sum(p)) / n_terms
        max_norm = max(max_norm, val)
    bound = C * j ** (-alpha)
    return {"j": j, "d": d, "samples": samples, "max_normalized": max_norm,
            "bound": bound, "passes": max_norm <= bound}

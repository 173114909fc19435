"""Arbitrary-precision special functions: log Gamma, Hurwitz zeta derivatives at s=0,
Dedekind eta and the upper incomplete Gamma function.

Every routine takes a :class:`PrecisionContext` and claims an absolute error at most
``ctx.target_abs_err`` unless its docstring says otherwise.  Arithmetic runs in a private
``mpmath.MPContext`` so callers never touch the global ``mpmath.mp`` state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import mpmath
import numpy as np
from scipy import special

GUARD_DIGITS = 10


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


@dataclass(frozen=True)
class PrecisionContext:
    work_digits: int = 25
    target_abs_err: float | None = None
    series_truncation_slack: float = 1.5

    def __post_init__(self):
        if int(self.work_digits) != self.work_digits or self.work_digits < 15:
            raise ValueError(f"work_digits must be an integer >= 15, got {self.work_digits}")
        if self.target_abs_err is None:
            object.__setattr__(self, "target_abs_err", 10.0 ** (4 - self.work_digits))
        if not self.target_abs_err > 0:
            raise ValueError("target_abs_err must be positive")
        # float rounding of 10**k is not exact; compare with a hair of slack
        if self.target_abs_err < 10.0 ** (2 - self.work_digits) * (1 - 1e-12):
            raise ValueError(
                f"target_abs_err={self.target_abs_err:g} is below 10^(2-work_digits)"
            )
        if not self.series_truncation_slack > 0:
            raise ValueError("series_truncation_slack must be positive")

    @property
    def mp(self) -> mpmath.ctx_mp.MPContext:
        return _mp_context(self.work_digits)

    def with_digits(self, work_digits: int) -> "PrecisionContext":
        return PrecisionContext(work_digits, None, self.series_truncation_slack)

    def with_target(self, target_abs_err: float) -> "PrecisionContext":
        return PrecisionContext(self.work_digits, target_abs_err, self.series_truncation_slack)


@lru_cache(maxsize=None)
def _mp_context(work_digits: int):
    ctx = mpmath.MPContext()
    ctx.dps = work_digits + GUARD_DIGITS
    return ctx


HP_DIGITS = 100


def hp_context():
    """Shared 100-digit context for exact-ish data (lattice bases, CM points) that outlives one call."""
    return _mp_context(HP_DIGITS - GUARD_DIGITS)


class Constants(NamedTuple):
    pi: object
    log_2pi: object
    half_log_2pi: object
    euler_gamma: object


def constants(ctx: PrecisionContext) -> Constants:
    """pi, log 2pi, (1/2) log 2pi and Euler's gamma at the context's precision (cached)."""
    return _constants(ctx.work_digits)


@lru_cache(maxsize=None)
def _constants(work_digits: int) -> Constants:
    mp = _mp_context(work_digits)
    log_2pi = mp.log(2 * mp.pi)
    return Constants(+mp.pi, log_2pi, log_2pi / 2, +mp.euler)


@lru_cache(maxsize=None)
def bernoulli_fraction(n: int) -> Fraction:
    p, q = mpmath.bernfrac(n)
    return Fraction(int(p), int(q))


def to_mpf(x, mp):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    if isinstance(x, float):
        return mp.mpf(repr(x))
    return mp.mpf(x)


def to_mpc(z, mp):
    if isinstance(z, (Fraction, int)):
        return mp.mpc(to_mpf(z, mp))
    if isinstance(z, complex):
        return mp.mpc(mp.mpf(repr(z.real)), mp.mpf(repr(z.imag)))
    return mp.mpc(z)


# ---------------------------------------------------------------------------
# log Gamma


@dataclass(frozen=True)
class StirlingPlan:
    shift_to: int
    terms: int
    error_bound: float


@lru_cache(maxsize=None)
def _stirling_plan(work_digits: int, target: float) -> StirlingPlan:
    # remainder after p terms for real z >= z0: |B_{2p+2}| / ((2p+2)(2p+1) z0^(2p+1))
    z0 = max(8, math.ceil(0.45 * work_digits))
    goal = target / 100
    for p in range(1, 400):
        b = abs(float(bernoulli_fraction(2 * p + 2)))
        bound = b / ((2 * p + 2) * (2 * p + 1)) * z0 ** (-(2 * p + 1))
        if bound < goal:
            return StirlingPlan(z0, p, bound)
    raise ArithmeticError("no Stirling plan reaches the requested accuracy")


def log_gamma(x, ctx: PrecisionContext):
    """log Gamma(x) for real x > 0.

    Shifts x upward to ``z0`` with the recurrence, then sums the Stirling series; the
    truncation bound of the series is below ``target_abs_err / 100``.
    """
    mp = ctx.mp
    x = to_mpf(x, mp)
    if x <= 0:
        raise DomainError(f"log_gamma needs x > 0, got {x}")
    plan = _stirling_plan(ctx.work_digits, ctx.target_abs_err)
    z = x
    prod = mp.mpf(1)
    while z < plan.shift_to:
        prod *= z
        z += 1
    c = constants(ctx)
    total = (z - mp.mpf(1) / 2) * mp.log(z) - z + c.half_log_2pi
    zpow = z
    z2 = z * z
    for k in range(1, plan.terms + 1):
        b = bernoulli_fraction(2 * k)
        total += mp.mpf(b.numerator) / (b.denominator * (2 * k) * (2 * k - 1)) / zpow
        zpow *= z2
    return total - mp.log(prod)


# ---------------------------------------------------------------------------
# Hurwitz zeta derivatives at s = 0


@dataclass(frozen=True)
class HurwitzDerivs:
    """Derivatives d^k/ds^k zeta(s, x) at s = 0 for k = 0..k_max, with EM metadata."""

    values: tuple
    x: object
    shift: int
    terms: int
    error_bound: float

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def _series_mul(a, b, n):
    out = [0] * (n + 1)
    for i, ai in enumerate(a[: n + 1]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[: n + 1 - i]):
            out[i + j] += ai * bj
    return out


def _series_exp(c, n, mp):
    out = [mp.mpf(1)]
    for j in range(1, n + 1):
        out.append(out[-1] * c / j)
    return out


def _em_remainder_bound(a: float, p: int, k_max: int, rho: float = 0.5) -> float:
    # Backlund bound for the EM remainder of zeta(s, x) on |s| = rho, turned into a
    # derivative bound at 0 by Cauchy's estimate.
    log_poch = sum(math.log(j + rho) for j in range(2 * p + 1))
    b = abs(float(bernoulli_fraction(2 * p + 2)))
    log_term = (
        log_poch
        + math.log(b)
        - math.lgamma(2 * p + 3)
        + (rho - 2 * p - 1) * math.log(a)
        + math.log((2 * p + 1 + rho) / (2 * p + 1 - rho))
    )
    worst = max(math.factorial(k) / rho**k for k in range(k_max + 1))
    return worst * math.exp(log_term)


@lru_cache(maxsize=None)
def _em_plan(work_digits: int, target: float, k_max: int) -> tuple[int, int, float]:
    shift = max(10, work_digits)
    goal = target / 100
    for p in range(1, 4 * shift):
        bound = _em_remainder_bound(float(shift), p, k_max)
        if bound < goal:
            return shift, p, bound
    raise ArithmeticError("no Euler-Maclaurin plan reaches the requested accuracy")


def hurwitz_zeta_derivs(x, k_max: int, ctx: PrecisionContext) -> HurwitzDerivs:
    """d^k/ds^k zeta(s, x) at s = 0 for 0 < x <= 1 and k <= k_max <= 2.

    Euler-Maclaurin with ``M`` explicit terms and ``p`` Bernoulli corrections, carried out
    as truncated power series in s.  Entry 0 reproduces 1/2 - x and entry 1 reproduces
    log Gamma(x) - (1/2) log 2pi without calling :func:`log_gamma`.
    """
    if not (0 <= k_max <= 2):
        raise ValueError("k_max must be 0, 1 or 2")
    mp = ctx.mp
    x = to_mpf(x, mp)
    if not (0 < x <= 1):
        raise DomainError(f"hurwitz_zeta_derivs needs 0 < x <= 1, got {x}")
    n = k_max
    shift, p, bound = _em_plan(ctx.work_digits, ctx.target_abs_err, n)

    acc = [mp.mpf(0)] * (n + 1)
    for j in range(shift):
        term = _series_exp(-mp.log(j + x), n, mp)
        acc = [u + v for u, v in zip(acc, term)]

    a = shift + x
    la = mp.log(a)
    e = _series_exp(-la, n, mp)
    # a^(1-s)/(s-1) = -a * a^(-s) * sum_j s^j
    geo = _series_mul(e, [mp.mpf(1)] * (n + 1), n)
    acc = [u - a * v for u, v in zip(acc, geo)]
    acc = [u + v / 2 for u, v in zip(acc, e)]

    # B_{2k}/(2k)! (s)_{2k-1} a^(1-s-2k)
    poch = [mp.mpf(0), mp.mpf(1)] + [mp.mpf(0)] * max(0, n - 1)
    poch = poch[: n + 1]
    apow = 1 / a
    for k in range(1, p + 1):
        if k > 1:
            for j in (2 * k - 3, 2 * k - 2):
                poch = _series_mul(poch, [mp.mpf(j), mp.mpf(1)], n)
        b = bernoulli_fraction(2 * k)
        coef = mp.mpf(b.numerator) / b.denominator / mp.factorial(2 * k) * apow
        term = _series_mul(poch, e, n)
        acc = [u + coef * v for u, v in zip(acc, term)]
        apow /= a * a

    values = tuple(acc[k] * math.factorial(k) for k in range(n + 1))
    return HurwitzDerivs(values, x, shift, p, bound)


# ---------------------------------------------------------------------------
# Dedekind eta


def eta_truncation(im_tau: float, ctx: PrecisionContext) -> int:
    base = math.ceil(ctx.work_digits * math.log(10) / (2 * math.pi * im_tau))
    return base + math.ceil(4 * ctx.series_truncation_slack)


def dedekind_eta(tau, ctx: PrecisionContext):
    """eta(tau) = q^(1/24) prod_{n>=1} (1 - q^n), q = exp(2 pi i tau), Im tau > 0.

    The product is cut at N factors with N from :func:`eta_truncation`, then extended until
    the dropped tail is below ``target_abs_err / 10``.
    """
    mp = ctx.mp
    tau = to_mpc(tau, mp)
    y = tau.imag
    if y <= 0:
        raise DomainError(f"dedekind_eta needs Im tau > 0, got {tau}")
    q = mp.exp(2j * mp.pi * tau)
    aq = abs(q)
    N = eta_truncation(float(y), ctx)
    prefix = mp.exp(1j * mp.pi * tau / 12)

    # |prefix| prod_{k<=n}(1+|q|^k) (exp(|q|^(n+1)/(1-|q|)) - 1) bounds the dropped tail
    head = abs(prefix) * mp.exp(aq / (1 - aq))

    def tail_bound(n):
        return float(head * mp.expm1(aq ** (n + 1) / (1 - aq)))

    while tail_bound(N) > ctx.target_abs_err / 10:
        N += max(1, N // 4)
    prod = mp.mpc(1)
    qn = mp.mpc(1)
    for _ in range(N):
        qn *= q
        prod *= 1 - qn
    result = prefix * prod
    if result == 0:
        raise ArithmeticError("eta evaluated to zero; precision too low")
    return result


# ---------------------------------------------------------------------------
# Upper incomplete Gamma


def _is_nonpositive_integer(s, mp) -> int | None:
    if s.imag == 0 and s.real <= 0 and mp.isint(s.real):
        return int(s.real)
    return None


def _gamma_cf(s, x, mp, eps, max_iter=20000):
    """Lentz evaluation of Gamma(s, x) * exp(x) * x^(-s); converges for every x > 0."""
    tiny = mp.mpf(10) ** (-(mp.dps + 20))
    b = x + 1 - s
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, max_iter):
        an = -i * (i - s)
        b += 2
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < eps:
            return h
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (s={s}, x={x})")


def _lower_series(s, x, mp, eps, max_iter=20000):
    """sum_{n>=0} x^n / (s (s+1) ... (s+n)); gamma(s,x) = x^s e^-x times this."""
    term = 1 / s
    total = term
    for n in range(1, max_iter):
        term *= x / (s + n)
        total += term
        if abs(term) < eps * abs(total):
            return total
    raise ArithmeticError("incomplete gamma series did not converge")


def _e1(x, mp, eps):
    total = -mp.euler - mp.log(x)
    term = mp.mpf(1)
    k = 1
    while True:
        term *= -x / k
        add = -term / k
        total += add
        if abs(add) < eps * abs(total):
            return total
        k += 1


def upper_incomplete_gamma(s, x, ctx: PrecisionContext):
    """Gamma(s, x) = int_x^inf t^(s-1) e^(-t) dt for complex s and real x > 0.

    Switchover: for ``x >= 1`` or ``x >= Re(s) + 1`` the Legendre continued fraction is
    used; otherwise Gamma(s) minus the lower series.  Non-positive
    integer s with small x go through E1 and the downward recurrence.
    """
    mp = ctx.mp
    s = to_mpc(s, mp)
    x = to_mpf(x, mp)
    if x <= 0:
        raise DomainError(f"upper_incomplete_gamma needs x > 0, got {x}")
    return _upper_gamma(s, x, mp)


def _use_cf(s, x) -> bool:
    return x >= 1 or x >= s.real + 1


def _upper_gamma(s, x, mp):
    eps = mp.mpf(10) ** (-(mp.dps - 2))
    if _use_cf(s, x):
        return mp.exp(-x) * x**s * _gamma_cf(s, x, mp, eps)
    m = _is_nonpositive_integer(s, mp)
    if m is not None:
        n = -m
        e1 = _e1(x, mp, eps)
        acc = mp.mpf(0)
        for k in range(n):
            acc += (-1) ** k * mp.factorial(k) / x ** (k + 1)
        return mp.mpc((-1) ** n / mp.factorial(n) * (e1 - mp.exp(-x) * acc))
    return mp.gamma(s) - x**s * mp.exp(-x) * _lower_series(s, x, mp, eps)


def scaled_upper_gamma(s, x, ctx: PrecisionContext):
    """Gamma(s, x) * x^(-s), the kernel that appears in theta-smoothed lattice sums."""
    mp = ctx.mp
    s = to_mpc(s, mp)
    x = to_mpf(x, mp)
    if x <= 0:
        raise DomainError(f"scaled_upper_gamma needs x > 0, got {x}")
    eps = mp.mpf(10) ** (-(mp.dps - 2))
    if _use_cf(s, x):
        return mp.exp(-x) * _gamma_cf(s, x, mp, eps)
    return _upper_gamma(s, x, mp) * x ** (-s)


def scaled_upper_gamma_array(s: complex, x: np.ndarray, tol: float = 1e-15) -> np.ndarray:
    """Vectorised double-precision Gamma(s, x) * x^(-s) for x > 0.

    Same switchover as :func:`upper_incomplete_gamma`; relative accuracy about 1e-14.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("scaled_upper_gamma_array needs x > 0")
    s = complex(s)
    out = np.empty(x.shape, dtype=complex)
    use_cf = (x >= s.real + 1) | (x >= 1.0)
    if use_cf.any():
        xc = x[use_cf]
        tiny = 1e-300
        b = xc + 1 - s
        c = np.full(xc.shape, 1 / tiny, dtype=complex)
        d = 1 / b
        h = d.copy()
        for i in range(1, 5000):
            an = -i * (i - s)
            b = b + 2
            d = an * d + b
            d = np.where(np.abs(d) < tiny, tiny, d)
            c = b + an / c
            c = np.where(np.abs(c) < tiny, tiny, c)
            d = 1 / d
            delta = d * c
            h = h * delta
            if np.max(np.abs(delta - 1)) < tol:
                break
        else:
            raise ArithmeticError("vectorised incomplete gamma did not converge")
        out[use_cf] = np.exp(-xc) * h
    if (~use_cf).any():
        xs = x[~use_cf]
        term = np.full(xs.shape, 1 / s, dtype=complex)
        total = term.copy()
        for n in range(1, 5000):
            term = term * xs / (s + n)
            total = total + term
            if np.max(np.abs(term) / np.abs(total)) < tol:
                break
        out[~use_cf] = special.gamma(s) * xs ** (-s) - np.exp(-xs) * total
    return out


def hurwitz_zeta(z, a, ctx: PrecisionContext, tol=None):
    """ζ(z, a) = Σ_{k≥0} (a+k)^{-z} for complex z ≠ 1 and real a > 0.

    Euler–Maclaurin with shift M ≥ |z| + work_digits; Bernoulli terms are
    added until one drops below ctx.target_abs_err/100, and the remainder is
    bounded by that last term (the terms decrease geometrically once the
    shift exceeds |z|).  ``tol`` overrides the absolute target.
    """
    mp = ctx.mp
    z = mp.mpc(z)
    a = to_mpf(a, mp)
    if a <= 0:
        raise DomainError("hurwitz_zeta needs a > 0")
    if z == 1:
        raise DomainError("hurwitz_zeta has a pole at z = 1")
    M = int(abs(z)) + ctx.work_digits
    total = mp.fsum((a + k) ** (-z) for k in range(M))
    b = a + M
    total += b ** (1 - z) / (z - 1) + b ** (-z) / 2
    tol = ctx.target_abs_err / 100 if tol is None else tol
    rising = z  # (z)_{2j-1}
    bpow = b ** (-z - 1)
    for j in range(1, 200):
        term = mp.bernoulli(2 * j) / mp.factorial(2 * j) * rising * bpow
        total += term
        if abs(term) < tol:
            return total
        rising *= (z + 2 * j - 1) * (z + 2 * j)
        bpow /= b * b
    raise DomainError("Euler-Maclaurin tail did not converge")


def gamma_complex(s, ctx: PrecisionContext):
    return ctx.mp.gamma(to_mpc(s, ctx.mp))


def rgamma_complex(s, ctx: PrecisionContext):
    return ctx.mp.rgamma(to_mpc(s, ctx.mp))


def decimal_string(value, digits: int) -> str:
    """Fixed-format decimal text with ``digits`` significant digits (no binary floats)."""
    if isinstance(value, Fraction) and value.denominator == 1:
        return str(value.numerator)
    with mpmath.workdps(digits + 5):
        if isinstance(value, Fraction):
            value = mpmath.mpf(value.numerator) / value.denominator
        # values may come from a private mpmath context, so test by attribute
        if hasattr(value, "_mpc_") or isinstance(value, complex):
            v = mpmath.mpc(value.real, value.imag)
        else:
            v = mpmath.mpf(value)
        if isinstance(v, mpmath.mpc):
            re = mpmath.nstr(v.real, digits, min_fixed=-30, max_fixed=30)
            im = mpmath.nstr(abs(v.imag), digits, min_fixed=-30, max_fixed=30)
            sign = "-" if v.imag < 0 else "+"
            return f"{re}{sign}{im}i"
        return mpmath.nstr(v, digits, min_fixed=-30, max_fixed=30)



def error_string(value, digits: int = 6) -> str:
    """Short scientific text for error sizes and tolerances."""
    if isinstance(value, Fraction):
        value = mpmath.mpf(value.numerator) / value.denominator
    with mpmath.workdps(digits + 5):
        return mpmath.nstr(mpmath.mpf(value), digits)

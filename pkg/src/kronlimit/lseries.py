"""Dirichlet characters and Taylor data at s = 0.

L(χ, s) = f^{-s} Σ_a χ(a) ζ(s, a/f), so every derivative at 0 is a finite
combination of Hurwitz data.  Values of L(χ, 0) are also kept exactly in
ℚ(ζ_n) where n is the order of χ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .numerics import PrecisionContext, DomainError, constants, hurwitz_zeta_derivs, log_gamma
from .quadfields import CMDeskField, QuadFieldData, _cyclotomic_poly, _poly_mod, is_fundamental


class LSeriesError(ValueError):
    pass


# --------------------------------------------------------------------------
# exact cyclotomic numbers


@dataclass(frozen=True)
class CycloNumber:
    """Element of ℚ(ζ_n) as coefficients of 1, ζ, …, ζ^{φ(n)−1}."""

    n: int
    coeffs: tuple[Fraction, ...]

    @classmethod
    def from_exponents(cls, n: int, terms: dict[int, Fraction]) -> "CycloNumber":
        poly = [Fraction(0)] * n
        for k, c in terms.items():
            poly[k % n] += Fraction(c)
        return cls(n, tuple(_poly_mod(poly, _cyclotomic_poly(n))))

    def __mul__(self, other: "CycloNumber") -> "CycloNumber":
        if self.n != other.n:
            raise ValueError("different cyclotomic fields")
        prod = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs))
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                prod[i + j] += a * b
        return CycloNumber(self.n, tuple(_poly_mod(prod, _cyclotomic_poly(self.n))))

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def numeric(self, mp):
        z = mp.expjpi(mp.mpf(2) / self.n)
        return sum((mp.mpf(c.numerator) / c.denominator * z**k for k, c in enumerate(self.coeffs)), mp.mpc(0))

    def __str__(self):
        parts = [f"{c}*z^{k}" if k else str(c) for k, c in enumerate(self.coeffs) if c]
        return " + ".join(parts) or "0"


# --------------------------------------------------------------------------
# characters


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D/n) for n ≥ 1."""
    if n <= 0:
        raise DomainError("kronecker needs n >= 1")
    result = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            result = -result
    # Jacobi symbol (D/n), n odd
    a = D % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _primitive_root(p: int) -> int:
    factors = {q for q in range(2, p) if (p - 1) % q == 0 and all(q % r for r in range(2, q))}
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise DomainError(f"no primitive root mod {p}")


@dataclass(frozen=True)
class DirichletCharacter:
    """χ mod f with χ(a) = exp(2πi·exps[a]/order); residues not coprime to f are absent."""

    label: str
    modulus: int
    order: int
    exps: tuple[tuple[int, int], ...] = field(repr=False)

    def __post_init__(self):
        table = dict(self.exps)
        if set(table) != {a for a in range(1, self.modulus + 1) if math.gcd(a, self.modulus) == 1}:
            raise LSeriesError(f"{self.label}: value table must cover exactly the units mod {self.modulus}")
        for a in table:
            for b in table:
                ab = a * b % self.modulus or self.modulus
                if (table[a] + table[b] - table[ab]) % self.order:
                    raise LSeriesError(f"{self.label}: table is not multiplicative")

    @property
    def table(self) -> dict[int, int]:
        return dict(self.exps)

    @property
    def conductor(self) -> int:
        return self.modulus

    def exponent(self, a: int) -> int | None:
        a %= self.modulus
        return self.table.get(a or self.modulus)

    def value(self, a: int, mp):
        k = self.exponent(a)
        if k is None:
            return mp.mpc(0)
        return mp.expjpi(mp.mpf(2 * k) / self.order)

    @property
    def is_even(self) -> bool:
        if self.modulus <= 2:
            return True
        return self.exponent(-1) % self.order == 0

    @property
    def is_real(self) -> bool:
        return all((2 * k) % self.order == 0 for k in self.table.values())

    def is_primitive(self) -> bool:
        f = self.modulus
        for g in range(1, f):
            if f % g:
                continue
            # χ factors through (ℤ/g)^× iff it is trivial on units ≡ 1 mod g
            if all(k % self.order == 0 for a, k in self.exps if (a - 1) % g == 0):
                return False
        return True

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.label + "*", self.modulus, self.order, tuple((a, -k % self.order) for a, k in self.exps))

    @classmethod
    def trivial(cls) -> "DirichletCharacter":
        return cls("trivial", 1, 1, ((1, 0),))

    @classmethod
    def kronecker_char(cls, D: int) -> "DirichletCharacter":
        if D == 1:
            return cls.trivial()
        if not is_fundamental(D):
            raise LSeriesError(f"kron:{D}: D must be a fundamental discriminant")
        f = abs(D)
        exps = tuple((a, 0 if kronecker(D, a) == 1 else 1) for a in range(1, f + 1) if math.gcd(a, f) == 1)
        return cls(f"kron:{D}", f, 2, exps)

    @classmethod
    def prime_char(cls, p: int, k: int) -> "DirichletCharacter":
        g = _primitive_root(p)
        exps, x = [], 1
        for j in range(p - 1):
            exps.append((x, j * k % (p - 1)))
            x = x * g % p
        return cls(f"prime:{p}:{k}", p, p - 1, tuple(sorted(exps)))

    @classmethod
    def from_label(cls, label: str) -> "DirichletCharacter":
        return _from_label(label)


@lru_cache(maxsize=None)
def _from_label(label: str) -> DirichletCharacter:
    parts = label.split(":")
    try:
        if parts[0] == "kron" and len(parts) == 2:
            chi = DirichletCharacter.kronecker_char(int(parts[1]))
        elif parts[0] == "prime" and len(parts) == 3:
            chi = DirichletCharacter.prime_char(int(parts[1]), int(parts[2]))
        elif label == "trivial":
            chi = DirichletCharacter.trivial()
        else:
            raise ValueError
    except ValueError as exc:
        if isinstance(exc, LSeriesError):
            raise
        raise LSeriesError(f"bad character label {label!r}") from None
    if not chi.is_primitive():
        raise LSeriesError(f"{label} is not primitive")
    return chi


def as_character(chi) -> DirichletCharacter:
    return chi if isinstance(chi, DirichletCharacter) else DirichletCharacter.from_label(chi)


# --------------------------------------------------------------------------
# Taylor data


@dataclass(frozen=True)
class TaylorAtZero:
    """Power series c_0 + c_1 s + … + c_K s^K with per-coefficient error bounds.

    ``order`` is the index of the first coefficient whose modulus exceeds
    ``zero_threshold``; it is None ("order undetermined") when every stored
    coefficient is below it.
    """

    coeffs: tuple
    errors: tuple[float, ...]
    zero_threshold: float
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def order(self) -> int | None:
        for k, c in enumerate(self.coeffs):
            if abs(c) >= self.zero_threshold:
                return k
        return None

    @property
    def leading(self):
        r = self.order
        if r is None:
            raise LSeriesError("order undetermined: all coefficients below threshold")
        return self.coeffs[r]

    def coeff(self, k: int):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def _combine(self, other, coeffs, errors):
        return TaylorAtZero(tuple(coeffs), tuple(errors), max(self.zero_threshold, other.zero_threshold))

    def __mul__(self, other: "TaylorAtZero") -> "TaylorAtZero":
        n = min(len(self), len(other))
        coeffs, errors = [], []
        for k in range(n):
            coeffs.append(sum(self.coeffs[i] * other.coeffs[k - i] for i in range(k + 1)))
            errors.append(
                sum(
                    self.errors[i] * abs(other.coeffs[k - i])
                    + other.errors[k - i] * abs(self.coeffs[i])
                    + self.errors[i] * other.errors[k - i]
                    for i in range(k + 1)
                )
            )
        return self._combine(other, coeffs, errors)

    def __add__(self, other: "TaylorAtZero") -> "TaylorAtZero":
        n = min(len(self), len(other))
        return self._combine(
            other,
            [self.coeffs[k] + other.coeffs[k] for k in range(n)],
            [self.errors[k] + other.errors[k] for k in range(n)],
        )

    def scale(self, c) -> "TaylorAtZero":
        return TaylorAtZero(
            tuple(c * x for x in self.coeffs), tuple(abs(c) * e for e in self.errors), self.zero_threshold, self.meta
        )

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def real(self) -> "TaylorAtZero":
        """Drop imaginary parts (caller asserts they are rounding noise)."""
        return TaylorAtZero(tuple(_re(c) for c in self.coeffs), self.errors, self.zero_threshold, self.meta)


def _re(c):
    return c.real if hasattr(c, "real") else c


def _threshold(ctx: PrecisionContext) -> float:
    return 100 * ctx.target_abs_err


def l_value_at_0_exact(chi) -> CycloNumber:
    """L(χ, 0) = Σ_a χ(a)(1/2 − a/f) in ℚ(ζ_order).  For nontrivial χ this is −(1/f)Σ χ(a)a."""
    chi = as_character(chi)
    f = chi.modulus
    terms: dict[int, Fraction] = {}
    for a, k in chi.exps:
        terms[k] = terms.get(k, Fraction(0)) + Fraction(1, 2) - Fraction(a, f)
    return CycloNumber.from_exponents(chi.order, terms)


def l_taylor_at_0(chi, k_max: int = 2, ctx: PrecisionContext | None = None) -> TaylorAtZero:
    """Taylor coefficients of L(χ, s) at 0 up to s^{k_max}.

    L(χ,0) is exact; L′(χ,0) = Σ χ(a) log Γ(a/f) − ½ log 2π·Σχ(a) − log f·L(χ,0)
    from the Lerch formula; L″ uses Hurwitz second derivatives.  Absolute
    error per coefficient ≤ 10·ctx.target_abs_err (dominated by φ(f) terms
    of log Γ / Hurwitz error at ctx.target_abs_err/100 each).
    """
    ctx = ctx or PrecisionContext()
    if not 0 <= k_max <= 2:
        raise DomainError("k_max must be 0, 1 or 2")
    chi = as_character(chi)
    if not chi.is_primitive():
        raise LSeriesError(f"{chi.label} is not primitive")
    return _l_taylor(chi, k_max, ctx)


@lru_cache(maxsize=512)
def _l_taylor(chi: DirichletCharacter, k_max: int, ctx: PrecisionContext) -> TaylorAtZero:
    mp = ctx.mp
    f = chi.modulus
    logf = mp.log(f)
    sub = ctx.with_target(max(ctx.target_abs_err / 100, 10.0 ** (2 - ctx.work_digits)))
    L0 = l_value_at_0_exact(chi).numeric(mp)
    coeffs = [L0]
    errors = [0.0]
    if k_max >= 1:
        half = constants(ctx).half_log_2pi
        d1 = mp.mpc(0)
        for a, _ in chi.exps:
            d1 += chi.value(a, mp) * (log_gamma(_frac(a, f), sub) - half)
        coeffs.append(d1 - logf * L0)
        errors.append(len(chi.exps) * sub.target_abs_err)
    if k_max >= 2:
        d2 = mp.mpc(0)
        herr = 0.0
        for a, _ in chi.exps:
            h = hurwitz_zeta_derivs(_frac(a, f), 2, sub)
            d2 += chi.value(a, mp) * (logf**2 * h[0] - 2 * logf * h[1] + h[2])
            herr += (1 + 2 * float(logf)) * h.error_bound + sub.target_abs_err
        coeffs.append(d2 / 2)
        errors.append(herr / 2)
    if chi.is_real:
        coeffs = [mp.re(c) for c in coeffs]
    return TaylorAtZero(tuple(coeffs), tuple(errors), _threshold(ctx), {"character": chi.label})


def l_derivative_hurwitz_path(chi, ctx: PrecisionContext | None = None):
    """L′(χ, 0) from the Euler–Maclaurin Hurwitz derivatives only (no log Γ)."""
    ctx = ctx or PrecisionContext()
    chi = as_character(chi)
    mp = ctx.mp
    f = chi.modulus
    logf = mp.log(f)
    total = mp.mpc(0)
    for a, _ in chi.exps:
        h = hurwitz_zeta_derivs(_frac(a, f), 1, ctx)
        total += chi.value(a, mp) * (h[1] - logf * h[0])
    return mp.re(total) if chi.is_real else total


def _frac(a: int, f: int) -> Fraction:
    return Fraction(a, f)


def product_taylor(labels: Sequence, k_max: int, ctx: PrecisionContext) -> TaylorAtZero:
    out = TaylorAtZero(tuple([ctx.mp.mpf(1)] + [ctx.mp.mpf(0)] * k_max), (0.0,) * (k_max + 1), _threshold(ctx))
    for lab in labels:
        out = out * l_taylor_at_0(lab, k_max, ctx)
    return out


# --------------------------------------------------------------------------
# ζ_F, γ_F, ht(χ), class zetas


@dataclass(frozen=True)
class ZetaFTaylor:
    series: TaylorAtZero
    gamma_F: object
    gamma_error: float
    h_F: int
    R_F: object


def zeta_F_taylor(F: QuadFieldData, ctx: PrecisionContext | None = None) -> ZetaFTaylor:
    """ζ_F at 0: order d−1, leading −h_F R_F, next coefficient −h_F γ_F.

    For F = ℚ the series is ζ itself, giving γ_ℚ = ½ log 2π; for real
    quadratic F it is ζ·L(χ_D).
    """
    ctx = ctx or PrecisionContext()
    if F.is_rational:
        series, d = l_taylor_at_0("trivial", 2, ctx), 1
    elif F.signature == "real":
        series, d = product_taylor(["trivial", f"kron:{F.D}"], 2, ctx), 2
    else:
        raise DomainError("zeta_F_taylor supports F = Q or real quadratic F")
    g = -series.coeffs[d] / F.h
    return ZetaFTaylor(series, g, series.errors[d] / F.h, F.h, F.regulator(ctx.mp))


def chi_taylor(K: CMDeskField, ctx: PrecisionContext, k_max: int = 2) -> TaylorAtZero:
    """L(χ_{K/F}, s) as the product of the catalog's Dirichlet factors."""
    return product_taylor(K.chi_factors, k_max, ctx)


def zeta_K_taylor(K: CMDeskField, ctx: PrecisionContext | None = None) -> TaylorAtZero:
    ctx = ctx or PrecisionContext()
    series = zeta_F_taylor(K.F_data, ctx).series * chi_taylor(K, ctx)
    return series.real() if _imag_negligible(series, ctx) else series


def _imag_negligible(series: TaylorAtZero, ctx) -> bool:
    return all(abs(getattr(c, "imag", 0)) < _threshold(ctx) for c in series.coeffs)


def ht_chi(K: CMDeskField, ctx: PrecisionContext | None = None):
    """ht(χ) = Σ_i L′(χ_i, 0)/L(χ_i, 0) over the catalog factorization."""
    ctx = ctx or PrecisionContext()
    total = ctx.mp.mpc(0)
    for lab in K.chi_factors:
        t = l_taylor_at_0(lab, 1, ctx)
        if abs(t.coeffs[0]) < _threshold(ctx):
            raise LSeriesError(f"{K.label}: L({lab}, 0) vanishes; catalog factorization is inconsistent")
        total += t.coeffs[1] / t.coeffs[0]
    if abs(ctx.mp.im(total)) > 1e-10:
        raise LSeriesError(f"{K.label}: ht has imaginary part {ctx.mp.im(total)}")
    return ctx.mp.re(total)


def eta_taylor(K: CMDeskField, ctx: PrecisionContext | None = None) -> TaylorAtZero:
    """L(η, s) for the genus character η of a class-number-two field."""
    ctx = ctx or PrecisionContext()
    if K.h_K != 2 or not K.class_characters:
        raise LSeriesError(f"{K.label}: no genus factorization in the catalog")
    return product_taylor(K.class_characters, 2, ctx)


def class_zeta_taylor(K: CMDeskField, class_index: int, ctx: PrecisionContext | None = None) -> TaylorAtZero:
    """Partial zeta of an ideal class; index 0 is the principal class.

    h_K = 1: ζ_K.  h_K = 2: (ζ_K ± L(η))/2 with + on the principal class.
    """
    ctx = ctx or PrecisionContext()
    if K.h_K > 2:
        raise LSeriesError(f"{K.label}: h_K = {K.h_K} > 2 unsupported")
    if not 0 <= class_index < K.h_K:
        raise LSeriesError(f"{K.label}: class index {class_index} out of range")
    zK = zeta_K_taylor(K, ctx)
    if K.h_K == 1:
        return zK
    sign = 1 if class_index == 0 else -1
    return (zK + eta_taylor(K, ctx).scale(sign)).scale(ctx.mp.mpf(1) / 2)


# --------------------------------------------------------------------------
# catalog self-check through prime splitting (independent of the character labels)


def _primes(n: int) -> list[int]:
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [p for p in range(n + 1) if sieve[p]]


def _quadratic_local(D: int, p: int) -> list[int]:
    """Degrees of the primes above p in ℚ(√D), from roots of x² ≡ D mod 4p."""
    if D % p == 0:
        return [1]  # ramified; one prime of degree 1 (its square is p)
    roots = sum(1 for x in range(4 * p) if (x * x - D) % (4 * p) == 0)
    return [1, 1] if roots > 2 else [2]


def _local_degrees(desc: dict, p: int) -> list[int]:
    """Residue degrees of the primes above p, with ramification folded in (one entry per prime)."""
    if desc["kind"] == "quadratic":
        return _quadratic_local(desc["D"], p)
    if desc["kind"] == "rational":
        return [1]
    n = desc["conductor"]
    m = n
    while m % p == 0:
        m //= p
    phi_m = sum(1 for a in range(1, m + 1) if math.gcd(a, m) == 1)
    f = 1
    while pow(p, f, m) != 1 % m:
        f += 1
    return [f] * (phi_m // f)


def catalog_self_check(K: CMDeskField, prime_bound: int = 200, ctx: PrecisionContext | None = None) -> float:
    """Max deviation between ∏(1 − χ_i(p)X) and the local factor ratio of ζ_K/ζ_F.

    The K and F local factors come from prime splitting (quadratic residues,
    multiplicative orders), not from the character tables, so agreement up to
    rounding certifies the catalog's chi_factors.  Raises on mismatch.
    """
    ctx = ctx or PrecisionContext(20)
    mp = ctx.mp
    chis = [as_character(c) for c in K.chi_factors]
    F_desc = {"kind": "rational"} if K.F_data.is_rational else {"kind": "quadratic", "D": K.F_data.D}
    worst = 0.0
    for p in _primes(prime_bound):
        # polynomials in X = p^{-s}; local factor of ζ_L is ∏ (1 − X^f)^{-1}
        num = [mp.mpc(1)]
        for f_deg in _local_degrees(F_desc, p):
            num = _pmul(num, [1] + [0] * (f_deg - 1) + [-1])
        den = [mp.mpc(1)]
        for f_deg in _local_degrees(K.K_description, p):
            den = _pmul(den, [1] + [0] * (f_deg - 1) + [-1])
        lhs = [mp.mpc(1)]
        for chi in chis:
            lhs = _pmul(lhs, [1, -chi.value(p, mp)])
        # (∏ 1/(1−χX)) = ζ_K/ζ_F local  ⇔  den_K = lhs · den_F
        rhs = _pmul(lhs, num)
        n = max(len(rhs), len(den))
        rhs += [0] * (n - len(rhs))
        den += [0] * (n - len(den))
        dev = max(float(abs(a - b)) for a, b in zip(rhs, den))
        worst = max(worst, dev)
        if dev > 1e-12:
            raise LSeriesError(f"{K.label}: Euler factor mismatch at p={p}")
    return worst


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def class_number_from_zeta(F: QuadFieldData, ctx: PrecisionContext | None = None) -> Fraction:
    """−(leading coefficient of ζ_F)/R_F, which must be the integer h_F."""
    ctx = ctx or PrecisionContext()
    z = zeta_F_taylor(F, ctx)
    lead = z.series.coeffs[F.degree - 1]
    val = -lead / F.regulator(ctx.mp)
    return Fraction(int(ctx.mp.nint(val))) if abs(val - ctx.mp.nint(val)) < 1e-12 else Fraction(str(val))

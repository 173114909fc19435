from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from kronlimit.numerics import (
    DomainError,
    PrecisionContext,
    decimal_string,
    dedekind_eta,
    error_string,
    hurwitz_zeta,
    hurwitz_zeta_derivs,
    log_gamma,
    scaled_upper_gamma,
    scaled_upper_gamma_array,
    upper_incomplete_gamma,
)

# mpmath at 40 digits, frozen
LOGGAMMA_03 = "1.095797994818075521677168142370107278445"
LOGGAMMA_725 = "7.052185450738539444925749253133010245418"
HURWITZ_25_07 = "2.902867577757346219628357657609499791537"
HZ_D1_03 = "0.1768594616134027798968384059644896385837"
HZ_D2_03 = "-0.5595941200099633917065845124389874800628"
ETA_I = "0.7682254223260566590025941795761806445179"
ETA_2I = "0.5923827813324158852903633744919953727615"
ETA_RHO = ("0.7937303350476405194499851839410421637536", "0.1044965810199023959255170676621713938542")
GAMMA_2PI_15 = ("0.2888994708500214964044574045643534508883", "0.429647321101111365924250025114927383487")


def close(a, b, tol):
    with mpmath.workdps(50):
        if isinstance(b, Fraction):
            b = mpmath.mpf(b.numerator) / b.denominator
        return abs(mpmath.mpmathify(a) - mpmath.mpmathify(b)) < tol


class TestPrecisionContext:
    def test_defaults(self):
        ctx = PrecisionContext()
        assert ctx.work_digits == 25
        assert ctx.target_abs_err == pytest.approx(1e-21)

    @pytest.mark.parametrize("digits", [0, 14, 15.5])
    def test_rejects_low_or_fractional_digits(self, digits):
        with pytest.raises(ValueError):
            PrecisionContext(digits)

    def test_rejects_target_below_floor(self):
        with pytest.raises(ValueError):
            PrecisionContext(20, 1e-30)

    def test_with_digits(self):
        assert PrecisionContext(20).with_digits(30).work_digits == 30


class TestLogGamma:
    def test_oracles(self, ctx40):
        assert close(log_gamma(ctx40.mp.mpf("0.3"), ctx40), LOGGAMMA_03, 1e-34)
        assert close(log_gamma(ctx40.mp.mpf("7.25"), ctx40), LOGGAMMA_725, 1e-34)

    def test_domain(self, ctx25):
        with pytest.raises(DomainError):
            log_gamma(0, ctx25)

    @given(st.floats(min_value=0.01, max_value=40))
    def test_recurrence(self, x):
        ctx = PrecisionContext(25)
        x = ctx.mp.mpf(x)
        assert abs(log_gamma(x + 1, ctx) - log_gamma(x, ctx) - ctx.mp.log(x)) < 1e-19


class TestHurwitz:
    def test_value(self, ctx40):
        assert close(hurwitz_zeta(ctx40.mp.mpf("2.5"), ctx40.mp.mpf("0.7"), ctx40), HURWITZ_25_07, 1e-34)

    def test_derivs_at_zero(self, ctx40):
        d = hurwitz_zeta_derivs(ctx40.mp.mpf("0.3"), 2, ctx40)
        assert close(d[0], Fraction(1, 2) - Fraction(3, 10), 1e-34)
        assert close(d[1], HZ_D1_03, 1e-33)
        assert close(d[2], HZ_D2_03, 1e-33)

    def test_lerch(self, ctx25):
        # ζ'(0, x) = log Γ(x) − ½ log 2π
        mp = ctx25.mp
        x = mp.mpf("0.85")
        d = hurwitz_zeta_derivs(x, 1, ctx25)
        assert abs(d[1] - (log_gamma(x, ctx25) - mp.log(2 * mp.pi) / 2)) < 1e-20

    def test_large_complex_argument(self, ctx25):
        # mpmath.zeta(z, a) drifts for complex z with large real part; compare with a direct sum
        mp = ctx25.mp
        z, a = mp.mpc(42, 1), mp.mpf(3)
        ref = mp.nsum(lambda k: (a + k) ** -z, [0, mp.inf])
        assert abs(hurwitz_zeta(z, a, ctx25) - ref) < 1e-40

    def test_explicit_tolerance(self, ctx25):
        mp = ctx25.mp
        z, a = mp.mpc(30, 1), mp.mpf(9)
        v = hurwitz_zeta(z, a, ctx25, tol=mp.mpf(10) ** -50)
        ref = mp.fsum((a + k) ** -z for k in range(400))
        assert abs(v - ref) < mp.mpf(10) ** -45

    @pytest.mark.parametrize("a", [0, -1])
    def test_domain(self, ctx25, a):
        with pytest.raises(DomainError):
            hurwitz_zeta(2, a, ctx25)

    @given(st.floats(min_value=0.05, max_value=5))
    def test_shift(self, a):
        # ζ(s, a) − ζ(s, a+1) = a^{-s}
        ctx = PrecisionContext(20)
        mp = ctx.mp
        s = mp.mpc(2.3, 0.7)
        a = mp.mpf(a)
        assert abs(hurwitz_zeta(s, a, ctx) - hurwitz_zeta(s, a + 1, ctx) - a ** -s) < 1e-14


class TestEta:
    def test_oracles(self, ctx40):
        mp = ctx40.mp
        assert close(dedekind_eta(mp.mpc(0, 1), ctx40), ETA_I, 1e-34)
        assert close(dedekind_eta(mp.mpc(0, 2), ctx40), ETA_2I, 1e-34)
        rho = (1 + mp.sqrt(3) * mp.mpc(0, 1)) / 2
        assert close(dedekind_eta(rho, ctx40), mp.mpc(*ETA_RHO), 1e-34)

    def test_closed_form_at_i(self, ctx25):
        mp = ctx25.mp
        ref = mp.gamma(mp.mpf(1) / 4) / (2 * mp.pi ** (mp.mpf(3) / 4))
        assert abs(dedekind_eta(mp.mpc(0, 1), ctx25) - ref) < 1e-22

    def test_domain(self, ctx25):
        with pytest.raises(DomainError):
            dedekind_eta(ctx25.mp.mpc(0.3, -1), ctx25)

    @given(st.floats(min_value=-0.5, max_value=0.5), st.floats(min_value=0.5, max_value=2.5))
    def test_modular(self, x, y):
        # η(−1/τ) = √(τ/i) η(τ) and η(τ+1) = e^{πi/12} η(τ)
        ctx = PrecisionContext(20)
        mp = ctx.mp
        tau = mp.mpc(x, y)
        e = dedekind_eta(tau, ctx)
        assert abs(dedekind_eta(-1 / tau, ctx) - mp.sqrt(tau / mp.mpc(0, 1)) * e) < 1e-15
        assert abs(dedekind_eta(tau + 1, ctx) - mp.expjpi(mp.mpf(1) / 12) * e) < 1e-15


class TestIncompleteGamma:
    def test_oracle(self, ctx40):
        mp = ctx40.mp
        v = upper_incomplete_gamma(mp.mpc(2, 1), mp.mpf("1.5"), ctx40)
        assert close(v, mp.mpc(*GAMMA_2PI_15), 1e-30)

    def test_scaled(self, ctx25):
        mp = ctx25.mp
        s, x = mp.mpc(-0.5, 2), mp.mpf("0.25")
        assert abs(scaled_upper_gamma(s, x, ctx25) - upper_incomplete_gamma(s, x, ctx25) * x ** -s) < 1e-18

    def test_array_kernel_matches_mpmath(self):
        xs = np.array([0.01, 0.3, 1.0, 2.5, 7.0, 30.0])
        for s in (0.1 + 0.05j, -0.9 + 0.02j, 1.1 - 0.07j):
            got = scaled_upper_gamma_array(s, xs)
            ref = [complex(mpmath.gammainc(s, x) * mpmath.mpf(x) ** -s) for x in xs]
            assert np.allclose(got, ref, rtol=1e-12, atol=1e-14)

    @given(st.floats(min_value=0.05, max_value=20))
    def test_recurrence(self, x):
        # Γ(s+1, x) = sΓ(s, x) + x^s e^{−x}
        ctx = PrecisionContext(20)
        mp = ctx.mp
        s, x = mp.mpc(0.7, -1.3), mp.mpf(x)
        lhs = upper_incomplete_gamma(s + 1, x, ctx)
        rhs = s * upper_incomplete_gamma(s, x, ctx) + x**s * mp.exp(-x)
        assert abs(lhs - rhs) < 1e-14 * max(1, abs(lhs))


class TestFormatting:
    def test_fraction(self):
        assert decimal_string(Fraction(2, 5), 25) == "0.4"
        assert decimal_string(Fraction(7), 25) == "7"
        assert decimal_string(Fraction(1, 3), 10) == "0.3333333333"

    def test_complex_from_private_context(self, ctx25):
        v = ctx25.mp.mpc(1, -2)
        assert decimal_string(v, 10) == "1.0-2.0i"

    def test_error_string(self):
        assert error_string(1e-8) == "1.0e-8"

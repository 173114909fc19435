import time

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from kronlimit.epstein import (
    OFLattice,
    class_lattice,
    epstein_direct,
    epstein_taylor0,
    epstein_value,
    psi_class,
    psi_lattice,
)
from kronlimit.numerics import DomainError, PrecisionContext, constants
from kronlimit.quadfields import catalog_lookup

# mpmath: 2 zeta(2) Catalan, and the 1.5+0.5i value from mpmath's dirichlet L and zeta at 40 digits
E_GAUSS_2 = "3.013406019845970061773130096364142791971"
E_GAUSS_Z = ("2.953697856300632141438638637028876688547", "-1.496857360095325093953428576761283063096")
# 5 zeta_K(s) for Q(zeta_5): mpmath zeta times dirichlet L for the three nontrivial characters mod 5
E_Z5_2 = "5.461748308654848911982739057176022579044"
E_Z5_Z = ("4.642693958532883928102611624067176260773", "0.6536331257864277513362811244796857751713")
LOG_PHI = "0.4812118250596034474977589134243684231352"


def psi_oracle(tau, dps=40):
    # classical limit formula: Ψ(ℤ+ℤτ) = ½ log 2π + 2 log|η(τ)|
    with mpmath.workdps(dps):
        tau = mpmath.mpc(tau)
        return mpmath.log(2 * mpmath.pi) / 2 + 2 * mpmath.log(abs(mpmath.eta(tau)))


def gamma_Q(ctx):
    return constants(ctx).half_log_2pi


@pytest.fixture(scope="module")
def gauss():
    return OFLattice.from_tau(1j)


@pytest.fixture(scope="module")
def zeta5():
    return OFLattice.from_desk_field(catalog_lookup("Qzeta5"))


@pytest.fixture(scope="module")
def zeta5_taylor(zeta5):
    return epstein_taylor0(zeta5, PrecisionContext(20))


class TestLattice:
    def test_dependent_basis(self):
        with pytest.raises(DomainError):
            OFLattice.rank_one(1, 2)

    def test_d2_needs_unit(self):
        with pytest.raises(DomainError):
            OFLattice(2, ((1, 1), (1j, 1j), (2, 3), (1, 5j)))

    def test_unit_preserves_norm(self, zeta5):
        assert float(zeta5.unit_lambda) == pytest.approx((3 + 5**0.5) / 2, rel=1e-12)
        for v in ([1, 0, 0, 0], [1, 2, -1, 3]):
            w = [sum(r[j] * v[j] for j in range(4)) for r in zeta5.unit_action]
            assert zeta5.norm_form(v) == pytest.approx(zeta5.norm_form(w), rel=1e-10)


class TestRankOne:
    def test_values(self, gauss, ctx40):
        mp = ctx40.mp
        assert abs(epstein_value(gauss, 2, ctx40) - mp.mpf(E_GAUSS_2)) < 1e-30
        assert abs(epstein_value(gauss, mp.mpc(1.5, 0.5), ctx40) - mp.mpc(*E_GAUSS_Z)) < 1e-30

    def test_taylor_at_zero(self, gauss, ctx25):
        t = epstein_taylor0(gauss, ctx25)
        assert abs(t.coeffs[0] + ctx25.mp.mpf(1) / 2) < 1e-20
        assert abs(psi_lattice(gauss, gamma_Q(ctx25), ctx=ctx25, taylor=t) - psi_oracle(1j)) < 1e-19

    @pytest.mark.parametrize("s", [2, 1.5 + 0.5j, 1.3 - 2j])
    def test_direct_matches_continuation(self, gauss, s):
        ctx = PrecisionContext(20)
        direct = epstein_direct(gauss, s, ctx=ctx)
        cont = epstein_value(gauss, s, ctx)
        assert direct.certified
        assert abs(direct.value - cont) <= direct.tail_bound + 1e-17

    def test_direct_rejects_left_half(self, gauss):
        with pytest.raises(DomainError):
            epstein_direct(gauss, 0.9)

    @settings(max_examples=6)
    @given(st.floats(-0.5, 0.5), st.floats(0.9, 2.5))
    def test_psi_against_eta_oracle(self, x, y):
        if x * x + y * y < 1:
            y = (1 - x * x) ** 0.5 + 0.05
        ctx = PrecisionContext(20)
        tau = complex(x, y)
        assert abs(psi_lattice(OFLattice.from_tau(tau), gamma_Q(ctx), ctx=ctx) - psi_oracle(tau)) < 1e-15

    @settings(max_examples=4)
    @given(st.floats(-0.5, 0.5), st.floats(0.9, 1.8), st.floats(0.3, 3.0), st.floats(0, 6.28))
    def test_homogeneity_sign(self, x, y, r, theta):
        # Ψ(αΛ) = Ψ(Λ) − ½ log|α|²; the "+" variant must miss
        ctx = PrecisionContext(20)
        mp = ctx.mp
        tau = mp.mpc(x, max(y, (1 - x * x) ** 0.5 + 0.05))
        alpha = mp.mpf(r) * mp.expj(theta)
        lat = OFLattice.rank_one(1, tau)
        psi = psi_lattice(lat, gamma_Q(ctx), ctx=ctx)
        psi_scaled = psi_lattice(OFLattice.rank_one(alpha, alpha * tau), gamma_Q(ctx), ctx=ctx)
        shift = mp.log(abs(alpha) ** 2) / 2
        assert abs(psi_scaled - (psi - shift)) < 1e-15
        if abs(shift) > 1e-6:
            assert abs(psi_scaled - (psi + shift)) > 1e-7

    def test_modular_invariance(self):
        ctx = PrecisionContext(20)
        tau = ctx.mp.mpc(0.2, 1.1)
        a = psi_lattice(OFLattice.from_tau(tau), gamma_Q(ctx), ctx=ctx)
        b = psi_lattice(OFLattice.rank_one(1, tau + 1), gamma_Q(ctx), ctx=ctx)
        c = psi_lattice(OFLattice.rank_one(tau, 1), gamma_Q(ctx), ctx=ctx)
        assert abs(a - b) < 1e-15 and abs(a - c) < 1e-15


class TestClasses:
    def test_nonprincipal_class_shift(self, ctx25):
        K = catalog_lookup("Qsqrt-5")
        lat, norm_a = class_lattice(K, 1, ctx25)
        assert norm_a == 2
        direct = psi_lattice(lat, gamma_Q(ctx25), ctx=ctx25) - ctx25.mp.log(2) / 2
        assert abs(psi_class(K, 1, gamma_Q(ctx25), ctx25) - direct) < 1e-20

    def test_class_index_out_of_range(self, ctx25):
        with pytest.raises(DomainError):
            class_lattice(catalog_lookup("Qi"), 1, ctx25)

    def test_d2_nonprincipal_unsupported(self, ctx25):
        with pytest.raises(DomainError):
            class_lattice(catalog_lookup("Qzeta5"), 1, ctx25)


class TestRankTwo:
    def test_values(self, zeta5, ctx25):
        mp = ctx25.mp
        assert abs(epstein_value(zeta5, 2, ctx25) - mp.mpf(E_Z5_2)) < 1e-9
        assert abs(epstein_value(zeta5, mp.mpc(1.3, 2), ctx25) - mp.mpc(*E_Z5_Z)) < 1e-9

    def test_taylor_leading(self, zeta5_taylor):
        c = zeta5_taylor.coeffs
        assert abs(c[0]) < 1e-9
        # leading coefficient is −2R_F = −log φ
        assert abs(c[1] + mpmath.mpf(LOG_PHI)) < 1e-9

    def test_direct_matches_continuation(self, zeta5):
        s = 1.4 - 1j
        direct = epstein_direct(zeta5, s)
        cont = epstein_value(zeta5, s)
        assert not direct.certified
        assert abs(direct.value - cont) < max(direct.tail_bound, 1e-9) * 10

    def test_homogeneity(self, zeta5, ctx25):
        alpha = (ctx25.mp.mpc(1.3, 0.4), ctx25.mp.mpc(0.2, -0.9))
        N2 = abs(alpha[0] * alpha[1]) ** 2
        scaled = zeta5.scaled(alpha)
        lhs = epstein_value(scaled, 2, ctx25)
        assert abs(lhs - N2 ** -2 * epstein_value(zeta5, 2, ctx25)) < 1e-9

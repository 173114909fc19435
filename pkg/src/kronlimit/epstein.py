"""Epstein zeta functions of O_F-lattices near s = 0, for F = ℚ and real quadratic F.

Continuation uses the theta transformation.  For a positive definite
quadratic form Q of rank n with Gram determinant D and Z(a) = Σ' Q(v)^{-a},

    π^{-a} Γ(a) Z(a) = −1/a + D^{-1/2}/(a − n/2)
                       + Σ' G(a, πQ(v)) + D^{-1/2} Σ' G(n/2 − a, πQ*(w)),

with G(a, x) = Γ(a, x) x^{-a} and Q* the inverse form.  At d = 1 the lattice
sum modulo ±1 is E = Z/2.  At d = 2 the unit group is unfolded onto
u ∈ [1, λ], λ = |σ₁ε|² for the fundamental unit ε of F, with
Q_u(ω) = u|σ₁ω|² + u^{-1}|σ₂ω|², which gives

    E(s) = π^{2s}/Γ(s)² · [ log λ·(−1/(2s) + D^{-1/2}/(2s − 2))
                           + ∫₁^λ (S_u(2s) + D^{-1/2} S*_u(2 − 2s)) du/u ].

Taylor coefficients at 0 come from Cauchy integrals on |s| = 0.1.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import special

from .lseries import TaylorAtZero
from .numerics import (
    DomainError,
    PrecisionContext,
    hp_context,
    hurwitz_zeta,
    scaled_upper_gamma,
    scaled_upper_gamma_array,
)
from .quadfields import (
    CMDeskField,
    cm_point_of_form,
    cyclotomic_embeddings,
    multiplication_matrix,
    unit_coordinates,
)

CAUCHY_RADIUS = 0.1
MIN_NODES = 32
MAX_NODES = 256
FLOAT_FLOOR = 1e-11  # best absolute accuracy claimed by the float64 (d = 2) backend


_HP = hp_context()


class PrecisionExhausted(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(f"{message}; diagnostics={diagnostics}")
        self.diagnostics = diagnostics


# --------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class OFLattice:
    """Rank-2d lattice in ℂ^d with an O_F structure.

    ``basis[j][i]`` is σ_{i+1} of the j-th ℤ-basis vector.  For d = 2,
    ``unit_action`` is the integer matrix of multiplication by the
    fundamental unit ε of F on ℤ-coordinates and ``unit_lambda`` = |σ₁ε|².
    """

    d: int
    basis: tuple
    unit_action: tuple | None = None
    unit_lambda: object = None
    label: str = ""

    def __post_init__(self):
        if self.d not in (1, 2) or len(self.basis) != 2 * self.d:
            raise DomainError("OFLattice needs d in {1, 2} and 2d basis vectors")
        if any(len(b) != self.d for b in self.basis):
            raise DomainError("each basis vector needs d embeddings")
        B = self.real_matrix()
        if abs(np.linalg.det(B)) < 1e-12:
            raise DomainError("basis vectors are linearly dependent")
        if self.d == 2:
            if self.unit_action is None or self.unit_lambda is None:
                raise DomainError("d = 2 lattices need unit_action and unit_lambda")
            M = np.array(self.unit_action, dtype=float)
            if abs(abs(round(np.linalg.det(M))) - 1) > 1e-9 or abs(abs(np.linalg.det(M)) - 1) > 1e-9:
                raise DomainError("unit_action must have determinant ±1")
            # the unit must preserve the norm form on a few test vectors
            rng = np.random.default_rng(0)
            for _ in range(4):
                v = rng.integers(-3, 4, size=4)
                if abs(self.norm_form(v) - self.norm_form(M.astype(int) @ v)) > 1e-8 * (1 + self.norm_form(v)):
                    raise DomainError("unit_action does not preserve the norm form")

    def real_matrix(self) -> np.ndarray:
        """Columns are basis vectors in ℝ^{2d} (Re σ₁, Im σ₁, Re σ₂, Im σ₂)."""
        cols = []
        for b in self.basis:
            col = []
            for z in b:
                z = complex(z)
                col += [z.real, z.imag]
            cols.append(col)
        return np.array(cols, dtype=float).T

    def embed(self, v: Sequence[int], mp=_HP) -> list:
        return [sum((int(c) * mp.mpc(b[i]) for c, b in zip(v, self.basis)), mp.mpc(0)) for i in range(self.d)]

    def norm_form(self, v) -> float:
        """∏_i |σ_i(ω)|², i.e. |N(ω)|², in float."""
        x = self.real_matrix() @ np.asarray(v, dtype=float)
        return float(np.prod([x[2 * i] ** 2 + x[2 * i + 1] ** 2 for i in range(self.d)]))

    def scaled(self, alpha: Sequence) -> "OFLattice":
        """The lattice αΛ for α ∈ (ℂ ⊗ F)^× given by its d embeddings."""
        basis = tuple(tuple(_HP.mpc(a) * _HP.mpc(z) for a, z in zip(alpha, b)) for b in self.basis)
        return OFLattice(self.d, basis, self.unit_action, self.unit_lambda, self.label)

    def rebased(self, M: Sequence[Sequence[int]]) -> "OFLattice":
        """Same lattice with ℤ-basis b'_j = Σ_k M[k][j] b_k (M unimodular)."""
        n = 2 * self.d
        basis = tuple(
            tuple(sum((M[k][j] * _HP.mpc(self.basis[k][i]) for k in range(n)), _HP.mpc(0)) for i in range(self.d))
            for j in range(n)
        )
        action = None
        if self.unit_action is not None:
            Mi = np.linalg.inv(np.array(M, dtype=float))
            A = Mi @ np.array(self.unit_action, dtype=float) @ np.array(M, dtype=float)
            action = tuple(tuple(int(round(x)) for x in row) for row in A)
        return OFLattice(self.d, basis, action, self.unit_lambda, self.label)

    @classmethod
    def rank_one(cls, omega1, omega2, label: str = "") -> "OFLattice":
        return cls(1, ((_HP.mpc(omega1),), (_HP.mpc(omega2),)), label=label)

    @classmethod
    def from_tau(cls, tau) -> "OFLattice":
        return cls.rank_one(1, tau, label=f"Z+Z({mpmath.nstr(_HP.mpc(tau), 12)})")

    @classmethod
    def from_desk_field(cls, K: CMDeskField, mp=None) -> "OFLattice":
        """O_K as an O_F-lattice for the quartic cyclotomic catalog entries."""
        mp = _HP
        if K.d != 2:
            raise DomainError(f"{K.label}: use class forms for d = 1")
        n = int(K.K_description["conductor"])
        rows = cyclotomic_embeddings(n, mp)
        basis = tuple((rows[0][j], rows[1][j]) for j in range(4))
        coords = unit_coordinates(K, mp)
        eps1 = sum((c * rows[0][j] for j, c in enumerate(coords)), mp.mpc(0))
        action = tuple(tuple(r) for r in multiplication_matrix(coords, n))
        return cls(2, basis, action, abs(eps1) ** 2, label=f"O({K.label})")


# --------------------------------------------------------------------------
# lattice point enumeration


def _points_in_ellipsoid(A: np.ndarray, X: float) -> np.ndarray:
    """Nonzero integer v with vᵀAv ≤ X (float decision with a relative slack of 1e-9)."""
    n = A.shape[0]
    Ainv = np.linalg.inv(A)
    bounds = [int(math.floor(math.sqrt(X * Ainv[i, i]) + 1e-9)) for i in range(n)]
    grids = [np.arange(-b, b + 1) for b in bounds]
    out = []
    # chunk over the first coordinate to keep memory flat
    rest = np.stack(np.meshgrid(*grids[1:], indexing="ij"), axis=-1).reshape(-1, n - 1) if n > 1 else np.zeros((1, 0))
    for v0 in grids[0]:
        V = np.concatenate([np.full((rest.shape[0], 1), v0), rest], axis=1)
        q = np.einsum("ij,jk,ik->i", V, A, V)
        keep = q <= X * (1 + 1e-9)
        out.append(V[keep])
    pts = np.concatenate(out).astype(np.int64)
    return pts[np.any(pts != 0, axis=1)]


def _theta_cutoff(tol: float) -> float:
    # Σ_{Q > X} G(a, πQ) ≲ e^{−πX}/covol: G(a, x) ~ e^{−x}/x for every a
    return (-math.log(tol) + 8.0) / math.pi


# --------------------------------------------------------------------------
# d = 1 evaluator (arbitrary precision)


@dataclass
class _RankTwoData:
    values: list  # distinct Q values (mpf)
    mult: list  # multiplicities
    dual_values: list
    dual_mult: list
    inv_sqrt_det: object
    cutoff: float


def _group(vals, digits: int):
    groups: dict[str, list] = {}
    for v in vals:
        key = mpmath.nstr(v, digits)
        if key in groups:
            groups[key][1] += 1
        else:
            groups[key] = [v, 1]
    items = sorted(groups.values(), key=lambda t: t[0])
    return [t[0] for t in items], [t[1] for t in items]


def _rank_two_data(lat: OFLattice, ctx: PrecisionContext) -> _RankTwoData:
    mp = ctx.mp
    w1, w2 = mp.mpc(lat.basis[0][0]), mp.mpc(lat.basis[1][0])
    A = mp.matrix([[abs(w1) ** 2, mp.re(w1 * mp.conj(w2))], [mp.re(w1 * mp.conj(w2)), abs(w2) ** 2]])
    det = A[0, 0] * A[1, 1] - A[0, 1] ** 2
    Ainv = mp.matrix([[A[1, 1], -A[0, 1]], [-A[0, 1], A[0, 0]]]) / det
    X = _theta_cutoff(ctx.target_abs_err / 1e4)
    Af = np.array(A.tolist(), dtype=float)
    Aif = np.array(Ainv.tolist(), dtype=float)

    def qvals(M, pts):
        return [M[0, 0] * a * a + 2 * M[0, 1] * a * b + M[1, 1] * b * b for a, b in pts.tolist()]

    v, m = _group(qvals(A, _points_in_ellipsoid(Af, X)), ctx.work_digits)
    dv, dm = _group(qvals(Ainv, _points_in_ellipsoid(Aif, X)), ctx.work_digits)
    return _RankTwoData(v, m, dv, dm, 1 / mp.sqrt(det), X)


def _eval_d1(data: _RankTwoData, s, ctx: PrecisionContext):
    mp = ctx.mp
    s = mp.mpc(s)
    pi = mp.pi
    total = -1 / s + data.inv_sqrt_det / (s - 1)
    for q, m in zip(data.values, data.mult):
        total += m * scaled_upper_gamma(s, pi * q, ctx)
    dual = mp.mpc(0)
    for q, m in zip(data.dual_values, data.dual_mult):
        dual += m * scaled_upper_gamma(1 - s, pi * q, ctx)
    total += data.inv_sqrt_det * dual
    # E = Z/2 = π^s/(2Γ(s)) · [...]
    return pi**s * mp.rgamma(s) * total / 2


# --------------------------------------------------------------------------
# d = 2 evaluator (float64, vectorized)


@dataclass
class _HeckeData:
    p1: np.ndarray
    p2: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    inv_sqrt_det: float
    log_lambda: float
    cutoff: float


def _hecke_data(lat: OFLattice, tol: float) -> _HeckeData:
    B = lat.real_matrix()
    lam = float(lat.unit_lambda)
    X = _theta_cutoff(tol)
    # Q_u ≥ Q_1/λ on [1, λ], so Q_1 ≤ λX covers every u
    pts = _points_in_ellipsoid(B.T @ B, lam * X).astype(float)
    x = pts @ B.T
    Binv_T = np.linalg.inv(B).T
    dpts = _points_in_ellipsoid(np.linalg.inv(B.T @ B), lam * X).astype(float)
    y = dpts @ Binv_T.T
    return _HeckeData(
        p1=x[:, 0] ** 2 + x[:, 1] ** 2,
        p2=x[:, 2] ** 2 + x[:, 3] ** 2,
        q1=y[:, 0] ** 2 + y[:, 1] ** 2,
        q2=y[:, 2] ** 2 + y[:, 3] ** 2,
        inv_sqrt_det=1.0 / abs(np.linalg.det(B)),
        log_lambda=math.log(lam),
        cutoff=X,
    )


def _hecke_integrand(h: _HeckeData, s: complex, u: float) -> complex:
    a = 2 * s
    S = scaled_upper_gamma_array(a, np.pi * (u * h.p1 + h.p2 / u)).sum()
    Sd = scaled_upper_gamma_array(2 - a, np.pi * (h.q1 / u + u * h.q2)).sum()
    return complex(S + h.inv_sqrt_det * Sd)


def _eval_d2_many(h: _HeckeData, svals: Sequence[complex], n_gl: int) -> np.ndarray:
    t, wts = np.polynomial.legendre.leggauss(n_gl)
    L = h.log_lambda
    us = np.exp((t + 1) * L / 2)
    wts = wts * L / 2
    out = []
    for s in svals:
        integral = sum(w * _hecke_integrand(h, s, u) for u, w in zip(us, wts))
        bracket = L * (-1 / (2 * s) + h.inv_sqrt_det / (2 * s - 2)) + integral
        pref = np.pi ** (2 * s) * special.rgamma(s) ** 2
        out.append(pref * bracket)
    return np.array(out)


# --------------------------------------------------------------------------
# Taylor extraction


def _cauchy_nodes(N: int, r: float) -> np.ndarray:
    # nodes with Im ≥ 0; the rest follow from E(s̄) = conj E(s)
    k = np.arange(N // 2 + 1)
    return r * np.exp(2j * np.pi * k / N)


def _cauchy_coeffs(vals_half: Sequence, N: int, r: float, k_max: int, mp=None) -> list:
    """Coefficients c_0..c_kmax from f on the upper half of N equispaced nodes."""
    full = list(vals_half) + [_conj(v) for v in list(vals_half)[1:-1][::-1]]
    out = []
    for k in range(k_max + 1):
        acc = 0
        for j, v in enumerate(full):
            theta = 2 * math.pi * j * k / N
            if mp is not None:
                acc += v * mp.expjpi(-mp.mpf(2 * j * k) / N)
            else:
                acc += v * complex(math.cos(theta), -math.sin(theta))
        out.append(acc / N / (r**k))
    return out


def _conj(v):
    return v.conjugate() if hasattr(v, "conjugate") else mpmath.conj(v)


def _taylor_from_evaluator(
    evaluate: Callable[[list], list], k_max: int, target: float, mp=None, diagnostics: dict | None = None
):
    """Cauchy extraction with node doubling; error = |coeffs(N) − coeffs(N/2)|."""
    r = CAUCHY_RADIUS
    if mp is not None:
        r = mp.mpf(1) / 10
    N = MIN_NODES
    cache: dict[int, object] = {}
    history = []

    def values(N):
        # nodes of N/2 are every other node of N
        need = []
        for j in range(N // 2 + 1):
            key = j * (MAX_NODES // N)
            if key not in cache:
                need.append((key, j))
        if need:
            if mp is not None:
                pts = [r * mp.expjpi(mp.mpf(2 * j) / N) for _, j in need]
            else:
                pts = [complex(float(r) * np.exp(2j * np.pi * j / N)) for _, j in need]
            for (key, _), v in zip(need, evaluate(pts)):
                cache[key] = v
        return [cache[j * (MAX_NODES // N)] for j in range(N // 2 + 1)]

    while True:
        c_full = _cauchy_coeffs(values(N), N, r, k_max, mp)
        c_half = _cauchy_coeffs(values(N // 2), N // 2, r, k_max, mp)
        errs = [float(abs(a - b)) for a, b in zip(c_full, c_half)]
        history.append({"nodes": N, "errors": errs})
        if max(errs) <= target:
            break
        if 2 * N > MAX_NODES:
            diag = dict(diagnostics or {})
            diag["cauchy_history"] = history
            raise PrecisionExhausted("Cauchy extraction did not reach target", diag)
        N *= 2
    if diagnostics is not None:
        diagnostics["cauchy_nodes"] = N
        diagnostics["cauchy_history"] = history
    return c_full, errs


@dataclass(frozen=True)
class EpsteinTaylor:
    taylor: TaylorAtZero
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def coeffs(self):
        return self.taylor.coeffs

    @property
    def errors(self):
        return self.taylor.errors


def epstein_taylor0(lat: OFLattice, ctx: PrecisionContext | None = None, k_max: int | None = None) -> EpsteinTaylor:
    """Taylor data of E(Λ, s) at 0 up to s^{d} (or s^{k_max}).

    d = 1 runs at ctx precision and certifies ctx.target_abs_err·10 per
    coefficient.  d = 2 runs in float64 and claims max(target, 1e-11) per
    coefficient, estimated by Gauss–Legendre doubling and Cauchy node halving.
    """
    ctx = ctx or PrecisionContext()
    k_max = lat.d if k_max is None else k_max
    t0 = time.perf_counter()
    diag: dict = {"d": lat.d, "label": lat.label}
    if lat.d == 1:
        mp = ctx.mp
        data = _rank_two_data(lat, ctx)
        diag.update(theta_cutoff=data.cutoff, groups=len(data.values), dual_groups=len(data.dual_values))
        # Cauchy error on c_k scales as node error/r^k; aim node error at target/100
        target = 10 * ctx.target_abs_err
        coeffs, errs = _taylor_from_evaluator(
            lambda pts: [_eval_d1(data, s, ctx) for s in pts], k_max, target, mp, diag
        )
        coeffs = [mp.re(c) for c in coeffs]
        errs = [max(e, ctx.target_abs_err) for e in errs]
        thr = 100 * ctx.target_abs_err
    else:
        target = max(ctx.target_abs_err, FLOAT_FLOOR) * 10
        h = _hecke_data(lat, 1e-16)
        diag.update(theta_cutoff=h.cutoff, points=int(h.p1.size), dual_points=int(h.q1.size), backend="float64")
        n_gl = 16
        prev = None
        while True:
            coeffs, errs = _taylor_from_evaluator(
                lambda pts: list(_eval_d2_many(h, pts, n_gl)), k_max, target / 10, None, diag
            )
            if prev is not None:
                gl_err = max(abs(a - b) for a, b in zip(coeffs, prev))
                if gl_err <= target / 10:
                    break
            if n_gl >= 256:
                raise PrecisionExhausted("u-quadrature did not converge", diag)
            prev = coeffs
            n_gl *= 2
        diag["gauss_legendre_nodes"] = n_gl
        diag["gl_change"] = gl_err
        mp = ctx.mp
        coeffs = [mp.mpf(c.real) for c in coeffs]
        errs = [max(e, gl_err, FLOAT_FLOOR) for e in errs]
        thr = 100 * max(ctx.target_abs_err, FLOAT_FLOOR)
    diag["runtime_s"] = time.perf_counter() - t0
    return EpsteinTaylor(TaylorAtZero(tuple(coeffs), tuple(errs), thr, {"source": "epstein"}), diag)


def epstein_value(lat: OFLattice, s, ctx: PrecisionContext | None = None, n_gl: int = 32):
    """E(Λ, s) from the continuation formula at a single point (any s ≠ 0, 1)."""
    ctx = ctx or PrecisionContext()
    if lat.d == 1:
        return _eval_d1(_rank_two_data(lat, ctx), s, ctx)
    h = _hecke_data(lat, 1e-16)
    return ctx.mp.mpc(_eval_d2_many(h, [complex(s)], n_gl)[0])


# --------------------------------------------------------------------------
# direct sums in the convergence region


@dataclass(frozen=True)
class DirectSum:
    value: object
    tail_bound: float
    terms: int
    certified: bool
    detail: dict = field(default_factory=dict, compare=False)


def epstein_direct(lat: OFLattice, s, cutoff: float | None = None, ctx: PrecisionContext | None = None) -> DirectSum:
    """E(Λ, s) for Re s > 1 by summation.

    d = 1: rows m + nτ of the reduced basis; each row |n| ≤ N is summed
    exactly (explicit terms plus binomial/Hurwitz tails), rows beyond N are
    replaced by their integral with the Poisson remainder bounded through
    |K_ν(x)| ≤ K_{Re ν}(x).  The bound is rigorous.
    d = 2: orbit representatives 1 ≤ |σ₁ω/σ₂ω| < λ (one per ± pair) with
    |N(ω)|² < X.  Riesz means Σ N^{-s}(1 − N/X)^k minus the pole term of
    κ (κ the residue of E at 1) are extrapolated in X (X, X/2, X/4).  At
    real integer s the sharp cutoff with tail κX^{1−s}/(s−1) is used.  The
    reported bound compares extrapolation orders and is an estimate, not a
    proof.
    """
    ctx = ctx or PrecisionContext(20)
    mp = ctx.mp
    s = mp.mpc(s)
    if mp.re(s) <= 1:
        raise DomainError("epstein_direct needs Re s > 1")
    if lat.d == 1:
        return _direct_d1(lat, s, ctx, cutoff)
    return _direct_d2(lat, s, ctx, cutoff or 4e5)


def _direct_d1(lat: OFLattice, s, ctx: PrecisionContext, cutoff):
    mp = ctx.mp
    w1, w2 = mp.mpc(lat.basis[0][0]), mp.mpc(lat.basis[1][0])
    # E(Λ) = |ω|^{−2s} E(ℤ + ℤτ) for Λ = ω(ℤ + ℤτ); pick the shortest vector as ω
    pts = _points_in_ellipsoid(lat.real_matrix().T @ lat.real_matrix(), 4 * max(abs(w1), abs(w2)) ** 2 + 1)
    vecs = sorted((abs(a * w1 + b * w2), a, b) for a, b in pts.tolist())
    omega = vecs[0][1] * w1 + vecs[0][2] * w2
    # second basis vector: shortest one completing a ℤ-basis
    a0, b0 = vecs[0][1], vecs[0][2]
    for _, a, b in vecs[1:]:
        if abs(a0 * b - b0 * a) == 1:
            tau = (a * w1 + b * w2) / omega
            break
    if mp.im(tau) < 0:
        tau = mp.conj(tau)
    x, y = mp.re(tau), mp.im(tau)
    sigma = mp.re(s)
    tol = mp.mpf(ctx.target_abs_err)
    # rows beyond N: Poisson k ≠ 0 terms decay like e^{−2π|k| n y}
    N = int(mp.ceil((-mp.log(tol) + 10) / (2 * mp.pi * y))) if cutoff is None else int(cutoff)
    total = 2 * hurwitz_zeta(2 * s, 1, ctx)  # row n = 0
    for n in range(1, N + 1):
        total += 2 * _row_sum(n * x, n * y, s, ctx, tol / (4 * N))
    # rows n > N through the integral ∫ ((t)² + h²)^{−s} dt = √π Γ(s−½)/Γ(s) h^{1−2s}
    c = mp.sqrt(mp.pi) * mp.gamma(s - 0.5) * mp.rgamma(s)
    total += 2 * c * y ** (1 - 2 * s) * hurwitz_zeta(2 * s - 1, N + 1, ctx)
    bound = _poisson_bound(N, y, s, mp)
    value = abs(omega) ** (-2 * s) * total / 2
    bound = float(abs(abs(omega) ** (-2 * s)) * (bound + tol) / 2)
    return DirectSum(value, bound, N, True, {"rows": N, "tau": complex(tau)})


def _row_sum(shift, h, s, ctx, tol):
    """Σ_{m ∈ ℤ} ((m + shift)² + h²)^{−s}."""
    mp = ctx.mp
    c = shift - mp.floor(shift)  # in [0, 1)
    m0 = int(mp.ceil(2 * h)) + 2
    total = mp.mpc(0)
    # explicit: m + c ∈ (−m0, m0)
    for m in range(-m0, m0):
        t = m + c
        if -m0 < t < m0:
            total += (t * t + h * h) ** (-s)
    # tails t ≥ m0 (t = m + c) and t ≤ −m0 (|t| = m − c), binomial in (h/t)²
    starts = [m0 + c if c > 0 else m0, m0 + (1 - c) if c > 0 else m0]
    if c == 0:
        starts = [mp.mpf(m0), mp.mpf(m0)]
    for a in starts:
        j = 0
        coef = mp.mpf(1)
        while True:
            scale = abs(coef) * h ** (2 * j)
            term = coef * h ** (2 * j) * hurwitz_zeta(2 * s + 2 * j, a, ctx, tol / (10 * scale))
            total += term
            if abs(term) < tol and j > 2:
                break
            j += 1
            coef = coef * (-s - j + 1) / j
            if j > 400:
                raise PrecisionExhausted("row tail series did not converge", {"h": float(h)})
    return total


def _poisson_bound(N: int, y, s, mp):
    """Σ_{n>N} Σ_{k≠0} |f̂_n(k)| with f̂(k) = 2π^s/Γ(s)·|k/h|^{s−½} K_{s−½}(2π|k|h), h = n y (times 2 for ±n)."""
    nu = mp.re(s) - mp.mpf(1) / 2
    pref = 2 * abs(mp.pi**s * mp.rgamma(s))
    total = mp.mpf(0)
    for n in range(N + 1, N + 200):
        h = n * y
        row = mp.mpf(0)
        for k in range(1, 200):
            term = 2 * pref * (k / h) ** nu * mp.besselk(nu, 2 * mp.pi * k * h)
            row += term
            if term < row * mp.mpf(10) ** -30:
                break
        total += 2 * row
        if row < total * mp.mpf(10) ** -30:
            break
    return float(total)


def _orbit_reps_d2(lat: OFLattice, X: float):
    """|σ₁ω|², |σ₂ω|² for orbit representatives with |N(ω)|² ≤ X.

    Fundamental domain 1 ≤ |σ₁ω|²/|σ₂ω|² < λ² for the fundamental unit
    (ratio multiplies by λ² under ω ↦ εω); of each ± pair the vector whose
    first nonzero coordinate is positive is kept.
    """
    lam = float(lat.unit_lambda)
    B = lat.real_matrix()
    # inside the domain: |σ₁|² ≤ λ√X, |σ₂|² ≤ √X
    R1, R2 = lam * math.sqrt(X), math.sqrt(X)
    W = np.diag([1 / R1, 1 / R1, 1 / R2, 1 / R2])
    A = B.T @ W @ B
    Ainv = np.linalg.inv(A)
    bounds = [int(math.floor(math.sqrt(2 * Ainv[i, i]))) for i in range(4)]
    grids = [np.arange(-b, b + 1) for b in bounds[1:]]
    rest = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, 3)
    p1s, p2s = [], []
    for v0 in range(0, bounds[0] + 1):
        V = np.concatenate([np.full((rest.shape[0], 1), v0), rest], axis=1)
        if v0 == 0:
            # first nonzero coordinate positive
            nz = V[:, 1:] != 0
            first = np.where(nz.any(axis=1), V[:, 1:][np.arange(len(V)), nz.argmax(axis=1)], 0)
            V = V[first > 0]
        x = V @ B.T
        p1 = x[:, 0] ** 2 + x[:, 1] ** 2
        p2 = x[:, 2] ** 2 + x[:, 3] ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            r = p1 / p2
        keep = (p1 * p2 <= X) & (r >= 1 - 1e-12) & (r < lam * lam * (1 - 1e-12))
        p1s.append(p1[keep])
        p2s.append(p2[keep])
    return np.concatenate(p1s), np.concatenate(p2s)


RIESZ_ORDERS = (3, 4)


def _riesz_sum(vals: np.ndarray, counts: np.ndarray, s: complex, X: float, k: int, kappa: float) -> complex:
    # Σ N^{-s} (1 − N/X)^k minus the pole contribution κ X^{1−s} Γ(1−s)Γ(k+1)/Γ(k+2−s)
    sel = vals < X
    v = vals[sel]
    part = np.sum(counts[sel] * (1 - v / X) ** k * np.exp(-s * np.log(v)))
    pole = kappa * X ** (1 - s) * complex(mpmath.gammaprod([1 - s, k + 1], [k + 2 - s]))
    return complex(part - pole)


def _direct_d2(lat: OFLattice, s, ctx: PrecisionContext, X: float) -> DirectSum:
    mp = ctx.mp
    p1, p2 = _orbit_reps_d2(lat, X)
    # |N_{K/Q}(ω)| is an integer; grouping cuts the number of complex powers
    vals, counts = np.unique(np.rint(p1 * p2).astype(np.int64), return_counts=True)
    vals = vals.astype(float)
    sc = complex(s)
    B = lat.real_matrix()
    kappa = np.pi**2 * math.log(float(lat.unit_lambda)) / (2 * abs(np.linalg.det(B)))
    if sc.imag == 0 and sc.real == int(sc.real):
        # Γ(1 − s) has a pole here; the sharp cutoff is accurate enough at s ≥ 2
        sharp = [
            complex(np.sum(counts[vals <= Y] * np.exp(-sc * np.log(vals[vals <= Y]))))
            + kappa * Y ** (1 - sc) / (sc - 1)
            for Y in (X, X / 2)
        ]
        return DirectSum(
            mp.mpc(sharp[0]), abs(sharp[0] - sharp[1]), int(counts.sum()), False,
            {"cutoff": X, "kappa": kappa, "method": "sharp"},
        )
    # Riesz means carry an expansion in powers of 1/X; two Richardson steps remove 1/X and 1/X²
    ests = []
    for k in RIESZ_ORDERS:
        a, b, c = (_riesz_sum(vals, counts, sc, X / 2**j, k, kappa) for j in range(3))
        r1, r1b = 2 * a - b, 2 * b - c
        ests.append(((4 * r1 - r1b) / 3, abs((4 * r1 - r1b) / 3 - r1)))
    value, step = ests[-1]
    bound = max(step, abs(ests[-1][0] - ests[0][0]))
    return DirectSum(
        mp.mpc(value), float(bound), int(counts.sum()), False,
        {"cutoff": X, "kappa": kappa, "method": "riesz", "orders": RIESZ_ORDERS},
    )


# --------------------------------------------------------------------------
# Kronecker limit function


def psi_lattice(lat: OFLattice, gamma_F, R_F=None, ctx: PrecisionContext | None = None, taylor: EpsteinTaylor | None = None):
    """Ψ_F(Λ) = −(s^d coefficient of E) − 2^{d−1} γ_F.

    ``R_F`` is accepted for the record; the leading coefficient of E is
    measured, not assumed.
    """
    ctx = ctx or PrecisionContext()
    t = taylor or epstein_taylor0(lat, ctx)
    return -t.coeffs[lat.d] - 2 ** (lat.d - 1) * gamma_F


def class_lattice(K: CMDeskField, class_index: int, ctx: PrecisionContext | None = None) -> tuple[OFLattice, int]:
    """A lattice representing 𝔞⁻¹ for the class and N𝔞.

    d = 1: the form (a, b, c) gives 𝔞 = [a, (−b+√D)/2] of norm a and
    𝔞⁻¹ = conj(ℤ + ℤτ); the conjugate has the same Epstein function so
    ℤ + ℤτ itself is returned.  d = 2: only the principal class, O_K.
    """
    ctx = ctx or PrecisionContext()
    if K.d == 1:
        forms = K.class_forms()
        if not 0 <= class_index < len(forms):
            raise DomainError(f"{K.label}: class index {class_index} out of range")
        f = forms[class_index]
        tau, _ = cm_point_of_form(f)
        return OFLattice.from_tau(tau), f.a
    if K.h_K != 1 or class_index != 0:
        raise DomainError(f"{K.label}: d = 2 supports only the principal class of h_K = 1 fields")
    return OFLattice.from_desk_field(K, ctx.mp), 1


def psi_class_from_lattice(inv_lattice: OFLattice, norm_a, gamma_F, ctx: PrecisionContext | None = None,
                           taylor: EpsteinTaylor | None = None):
    """Ψ_F(ȧ) = Ψ_F(𝔞⁻¹) − c·log N𝔞 with c = −(leading coefficient of E) = 2^{d−1} R_F.

    The minus sign is the convention forced by E(αΛ, s) = |N α|^{−2s} E(Λ, s).
    """
    ctx = ctx or PrecisionContext()
    t = taylor or epstein_taylor0(inv_lattice, ctx)
    lead = -t.coeffs[inv_lattice.d - 1]
    return psi_lattice(inv_lattice, gamma_F, None, ctx, t) - lead * ctx.mp.log(norm_a)


def psi_class(K: CMDeskField, class_index: int, gamma_F, ctx: PrecisionContext | None = None):
    ctx = ctx or PrecisionContext()
    lat, norm_a = class_lattice(K, class_index, ctx)
    return psi_class_from_lattice(lat, norm_a, gamma_F, ctx)

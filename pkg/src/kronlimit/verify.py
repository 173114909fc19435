"""Identity checkers and their reports.

Each checker evaluates one side through the lattice route (epstein and
numerics) and the other through the L-function route (lseries and the
catalog).  Reports are JSON-serializable with every number written as a
decimal string.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import _expr
from .epstein import OFLattice, class_lattice, epstein_taylor0, psi_class_from_lattice
from .lseries import (
    eta_taylor,
    ht_chi,
    l_value_at_0_exact,
    zeta_F_taylor,
)
from .numerics import PrecisionContext, constants, decimal_string, dedekind_eta, error_string
from .quadfields import CMDeskField, catalog_lookup

TOL_D1 = 1e-8
TOL_D2 = 1e-6
CACHE_ENV = "KRONLIMIT_CACHE_DIR"


class VerificationError(RuntimeError):
    pass


@dataclass
class VerificationReport:
    identity_id: str
    parameters: dict
    lhs: list
    rhs: list
    abs_err: object
    tolerance: float
    runtime_ms: int
    precision_digits: int
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.abs_err <= self.tolerance

    def to_record(self) -> dict:
        d = self.precision_digits

        def dec(v):
            return decimal_string(v, d)

        def side(vals):
            out = [dec(v) for v in vals]
            return out[0] if len(out) == 1 else out

        rec = {
            "identity": self.identity_id,
            "params": {k: str(v) for k, v in sorted(self.parameters.items())},
            "lhs": side(self.lhs),
            "rhs": side(self.rhs),
            "abs_err": error_string(self.abs_err),
            "tol": error_string(self.tolerance),
            "pass": bool(self.passed),
            "digits": d,
            "runtime_ms": int(self.runtime_ms),
        }
        if self.notes:
            rec["notes"] = {k: str(v) for k, v in sorted(self.notes.items())}
        return rec


def _report(identity, params, lhs, rhs, tol, t0, ctx, notes=None, abs_err=None) -> VerificationReport:
    mp = ctx.mp
    if abs_err is None:
        abs_err = max(abs(mp.mpf(a) - mp.mpf(b)) if not isinstance(a, Fraction) else abs(a - b) for a, b in zip(lhs, rhs))
    return VerificationReport(
        identity, dict(params), list(lhs), list(rhs), abs_err, tol,
        int(round((time.perf_counter() - t0) * 1000)), ctx.work_digits, notes or {},
    )


def _gamma_Q(ctx: PrecisionContext):
    return ctx.mp.log(2 * constants(ctx).pi) / 2


def gamma_F(K: CMDeskField, ctx: PrecisionContext):
    """γ_F: log √(2π) in closed form for F = ℚ, from ζ_F otherwise."""
    if K.d == 1:
        return _gamma_Q(ctx)
    return zeta_F_taylor(K.F_data, ctx).gamma_F


def _tolerance(K: CMDeskField) -> float:
    return TOL_D1 if K.d == 1 else TOL_D2


# --------------------------------------------------------------------------
# checkers


def check_kronecker_limit_q(z, ctx: PrecisionContext | None = None) -> VerificationReport:
    """E(ℤ+ℤz, s) = −1/2 − (log(√2π|η(z)|²) + log√2π) s + O(s²)."""
    ctx = ctx or PrecisionContext()
    mp = ctx.mp
    t0 = time.perf_counter()
    text = z if isinstance(z, str) else None
    if isinstance(z, str):
        z = _expr.evaluate(z, mp)
    z = mp.mpc(z)
    taylor = epstein_taylor0(OFLattice.from_tau(z), ctx)
    eta = dedekind_eta(z, ctx)
    g = _gamma_Q(ctx)
    rhs = [mp.mpf(-1) / 2, -(mp.log(mp.sqrt(2 * constants(ctx).pi) * abs(eta) ** 2) + g)]
    lhs = taylor.coeffs[:2]
    return _report("kronecker", {"z": text or decimal_string(z, 20)}, lhs, rhs, TOL_D1, t0, ctx)


def psi_classes(K: CMDeskField, ctx: PrecisionContext) -> list:
    """Ψ_F(ȧ) for every class (index 0 principal), lattice route."""
    g = gamma_F(K, ctx)
    out = []
    for i in range(K.h_K):
        lat, norm_a = class_lattice(K, i, ctx)
        out.append(psi_class_from_lattice(lat, norm_a, g, ctx))
    return out


def check_truc7(K: CMDeskField | str, ctx: PrecisionContext | None = None) -> VerificationReport:
    """(1/[U_K:U_F]) Σ_ȧ Ψ_F(ȧ) = h_K R_K ht(χ)."""
    ctx = ctx or PrecisionContext()
    K = catalog_lookup(K) if isinstance(K, str) else K
    if K.d == 2 and K.h_K != 1:
        raise VerificationError(f"{K.label}: d = 2 requires h_K = 1")
    if K.d == 1 and K.h_K > 2:
        raise VerificationError(f"{K.label}: h_K > 2 unsupported")
    mp = ctx.mp
    t0 = time.perf_counter()
    psis = psi_classes(K, ctx)
    lhs = mp.fsum(psis) / K.unit_index
    rhs = K.h_K * K.R_K(mp) * ht_chi(K, ctx)
    return _report("truc7", {"field": K.label}, [lhs], [rhs], _tolerance(K), t0, ctx)


def check_truc_h2(K: CMDeskField | str, ctx: PrecisionContext | None = None) -> VerificationReport:
    """Ψ(ȧ) = [U_K:U_F] R_K ht(χ) ± (difference term) for F = ℚ, h_K ≤ 2.

    Compared as the pair (Ψ₁ + Ψ₂, Ψ₁ − Ψ₂).  The difference term is the
    s-coefficient of the genus L-function L(η, s) and the sign on the
    principal class is read off from the data and recorded in the notes.
    For h_K = 1 there is no difference term and this is the class number one check.
    """
    ctx = ctx or PrecisionContext()
    K = catalog_lookup(K) if isinstance(K, str) else K
    if K.d != 1:
        raise VerificationError(f"{K.label}: genus check is for F = ℚ")
    mp = ctx.mp
    t0 = time.perf_counter()
    base = K.unit_index * K.R_K(mp) * ht_chi(K, ctx)
    psis = psi_classes(K, ctx)
    if K.h_K == 1:
        return _report("truc-h2", {"field": K.label}, [psis[0] / K.unit_index], [base / K.unit_index], TOL_D1, t0, ctx)
    if K.h_K != 2:
        raise VerificationError(f"{K.label}: h_K = {K.h_K} unsupported")
    eta = eta_taylor(K, ctx)
    if abs(eta.coeffs[0]) > 100 * ctx.target_abs_err:
        raise VerificationError(f"{K.label}: L(η, 0) ≠ 0, no genus difference term")
    diff_term = mp.re(eta.coeffs[1]) * K.unit_index
    measured = psis[0] - psis[1]
    sign = 1 if abs(measured - diff_term) <= abs(measured + diff_term) else -1
    lhs = [psis[0] + psis[1], measured]
    rhs = [2 * base, sign * diff_term]
    notes = {"principal_sign": "+" if sign > 0 else "-", "stated_sign": "+"}
    H = K.hilbert_class_field
    if H is not None:
        ratio = H.h_H * H.regulator(mp) / (K.h_K * K.R_K(mp))
        notes["hilbert_ratio"] = decimal_string(ratio, 20)
        notes["hilbert_ratio_err"] = error_string(abs(ratio - mp.re(eta.coeffs[1])), 3)
    return _report("truc-h2", {"field": K.label}, lhs, rhs, TOL_D1, t0, ctx, notes)


def check_unit_index_and_leading(K: CMDeskField | str, ctx: PrecisionContext | None = None) -> VerificationReport:
    """L(χ, 0) = (h_K/h_F) · 2^{d−1}/[U_K:U_F], both sides exact rationals."""
    ctx = ctx or PrecisionContext()
    K = catalog_lookup(K) if isinstance(K, str) else K
    t0 = time.perf_counter()
    value = None
    for lab in K.chi_factors:
        v = l_value_at_0_exact(lab)
        value = v if value is None else value * v
    if not value.is_rational():
        raise VerificationError(f"{K.label}: L(χ, 0) = {value} is not rational")
    lhs = value.rational()
    rhs = Fraction(K.h_K, K.F_data.h) * Fraction(2 ** (K.d - 1), K.unit_index)
    notes = {"lhs_exact": lhs, "rhs_exact": rhs,
             "unit_index_from_regulators": K.computed_unit_index()}
    ok_units = K.computed_unit_index() == K.unit_index
    err = abs(lhs - rhs) + (0 if ok_units else 1)
    return _report("unit-index", {"field": K.label}, [lhs], [rhs], 0, t0, ctx, notes, abs_err=err)


# --------------------------------------------------------------------------
# registry, cache, dispatch


CHECKS: dict[str, tuple[str, Callable]] = {
    "kronecker": ("z", check_kronecker_limit_q),
    "truc7": ("field", check_truc7),
    "truc-h2": ("field", check_truc_h2),
    "unit-index": ("field", check_unit_index_and_leading),
}

DEFAULT_SUITE: dict[str, list[str]] = {
    "kronecker": ["i", "2*i", "(1+sqrt(3)*i)/2"],
    "truc7": ["Qi", "Qsqrt-2", "Qsqrt-3", "Qsqrt-7", "Qsqrt-5", "Qsqrt-15", "Qzeta5"],
    "truc-h2": ["Qsqrt-5", "Qsqrt-15", "Qi"],
    "unit-index": ["Qi", "Qsqrt-2", "Qsqrt-3", "Qsqrt-7", "Qsqrt-5", "Qsqrt-15", "Qzeta5", "Qzeta8"],
}


@dataclass(frozen=True)
class CheckRequest:
    identity: str
    value: str
    digits: int
    catalog_path: str | None = None

    @property
    def params(self) -> dict:
        return {CHECKS[self.identity][0]: self.value}

    def key(self) -> str:
        parts = [self.identity, self.params, self.digits]
        if self.catalog_path is not None:
            parts.append(str(Path(self.catalog_path).resolve()))
        blob = json.dumps(parts, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "kronlimit"


def _cache_read(cache_dir: Path | None, key: str) -> dict | None:
    if cache_dir is None:
        return None
    p = Path(cache_dir) / f"{key}.json"
    try:
        return json.loads(p.read_text())
    except FileNotFoundError:
        return None
    except (OSError, ValueError):
        return None


def _cache_write(cache_dir: Path | None, key: str, record: dict) -> None:
    if cache_dir is None:
        return
    cache_dir = Path(cache_dir)
    try:
        cache_dir.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=cache_dir, prefix=f".{key}.", suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(record, fh)
        os.replace(tmp, cache_dir / f"{key}.json")
    except OSError as exc:
        raise VerificationError(f"cannot write cache entry in {cache_dir}: {exc}") from exc


def run_check(req: CheckRequest, cache_dir: Path | None = None) -> dict:
    """Report record for one request, through the disk cache when given."""
    key = req.key()
    hit = _cache_read(cache_dir, key)
    if hit is not None:
        return hit
    ctx = PrecisionContext(req.digits)
    _, fn = CHECKS[req.identity]
    if CHECKS[req.identity][0] == "field":
        target = catalog_lookup(req.value, req.catalog_path)
    else:
        target = req.value
    record = fn(target, ctx).to_record()
    _cache_write(cache_dir, key, record)
    return record


def suite_requests(identities: Iterable[str], digits: int, catalog_path: str | None = None) -> list[CheckRequest]:
    return [CheckRequest(i, v, digits, catalog_path) for i in identities for v in DEFAULT_SUITE[i]]


def sort_records(records: Iterable[dict]) -> list[dict]:
    return sorted(records, key=lambda r: (r["identity"], json.dumps(r["params"], sort_keys=True)))


def emit_report(records: Sequence[dict], path: str | Path | None = None) -> str:
    """JSON array of records sorted by identity then params."""
    text = json.dumps(sort_records(records), indent=2, ensure_ascii=False)
    if path is not None:
        try:
            Path(path).write_text(text + "\n")
        except OSError as exc:
            raise VerificationError(f"cannot write report to {path}: {exc}") from exc
    return text

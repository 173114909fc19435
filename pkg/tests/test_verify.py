import json
import os
from fractions import Fraction

import mpmath
import pytest

from kronlimit.numerics import PrecisionContext
from kronlimit.verify import (
    CHECKS,
    CheckRequest,
    DEFAULT_SUITE,
    VerificationError,
    check_kronecker_limit_q,
    check_truc7,
    check_truc_h2,
    check_unit_index_and_leading,
    emit_report,
    gamma_F,
    run_check,
    sort_records,
)
from kronlimit.quadfields import catalog_lookup

SCHEMA = {"identity", "params", "lhs", "rhs", "abs_err", "tol", "pass", "digits", "runtime_ms"}
# Ψ₁ ± Ψ₂ from mpmath η at 40 digits (Ψ = ½ log 2π + 2 log|η| − ½ log N𝔞 per class)
GENUS = {
    "Qsqrt-5": ("-0.2631250964824194666727784", "-0.2406059125298017237"),
    "Qsqrt-15": ("-0.02958754011975871319579", "-0.1604039416865344825"),
}


@pytest.fixture(scope="module")
def ctx():
    return PrecisionContext(25)


def strip_runtime(records):
    return [{k: v for k, v in r.items() if k != "runtime_ms"} for r in records]


class TestCheckers:
    @pytest.mark.parametrize("z", ["i", "2*i", "(1+sqrt(3)*i)/2", 0.3 + 1.2j])
    def test_kronecker(self, z, ctx):
        rep = check_kronecker_limit_q(z, ctx)
        assert rep.passed and rep.abs_err < 1e-18

    @pytest.mark.parametrize("label", ["Qi", "Qsqrt-2", "Qsqrt-3", "Qsqrt-7", "Qsqrt-5", "Qsqrt-15"])
    def test_class_number_one_d1(self, label, ctx):
        rep = check_truc7(label, ctx)
        assert rep.passed and rep.abs_err < 1e-18

    @pytest.mark.parametrize("label", sorted(GENUS))
    def test_genus_pair(self, label, ctx):
        rep = check_truc_h2(label, ctx)
        assert rep.passed
        assert rep.notes["principal_sign"] == "-"
        s_ref, d_ref = (ctx.mp.mpf(x) for x in GENUS[label])
        assert abs(rep.lhs[0] - s_ref) < 1e-18
        assert abs(rep.lhs[1] - d_ref) < 1e-18
        assert float(rep.notes["hilbert_ratio_err"]) < 1e-15

    def test_genus_independent_oracle(self):
        # classes of Q(sqrt(-5)): forms (1,0,5), (2,2,3); Ψ from mpmath eta
        with mpmath.workdps(40):
            def psi(tau, a):
                return mpmath.log(2 * mpmath.pi) / 2 + 2 * mpmath.log(abs(mpmath.eta(tau))) - mpmath.log(a) / 2
            p1 = psi(mpmath.sqrt(5) * 1j, 1)
            p2 = psi((-2 + mpmath.sqrt(-20)) / 4, 2)
            assert abs(p1 + p2 - mpmath.mpf(GENUS["Qsqrt-5"][0])) < 1e-20
            assert abs(p1 - p2 - mpmath.mpf(GENUS["Qsqrt-5"][1])) < 1e-18
            # |Ψ₁ − Ψ₂| = ½ log φ
            assert abs(abs(p1 - p2) - mpmath.log((1 + mpmath.sqrt(5)) / 2) / 2) < 1e-18

    def test_h1_reduces_to_class_number_one(self, ctx):
        a, b = check_truc_h2("Qi", ctx), check_truc7("Qi", ctx)
        assert a.lhs == b.lhs and a.rhs == b.rhs

    def test_genus_rejects_d2(self, ctx):
        with pytest.raises(VerificationError):
            check_truc_h2("Qzeta5", ctx)

    @pytest.mark.parametrize("label", DEFAULT_SUITE["unit-index"])
    def test_unit_index(self, label, ctx):
        rep = check_unit_index_and_leading(label, ctx)
        assert rep.passed and rep.abs_err == 0
        assert isinstance(rep.lhs[0], Fraction)

    def test_gamma_F_real_quadratic(self, ctx):
        # γ for Q(√5) from ζ_F, compared with an mpmath oracle ζ·L(χ₅) differentiated at 0
        g = gamma_F(catalog_lookup("Qzeta5"), ctx)
        with mpmath.workdps(30):
            chi = [0, 1, -1, -1, 1]
            L = lambda s: mpmath.zeta(s, mpmath.mpf(1) / 5) - mpmath.zeta(s, mpmath.mpf(2) / 5) - mpmath.zeta(s, mpmath.mpf(3) / 5) + mpmath.zeta(s, mpmath.mpf(4) / 5)
            c1 = mpmath.diff(lambda s: 5 ** (-s) * L(s), 0)
            c2 = mpmath.diff(lambda s: 5 ** (-s) * L(s), 0, 2) / 2
            z0, z1 = mpmath.mpf(-1) / 2, -mpmath.log(2 * mpmath.pi) / 2
            coeff2 = z0 * c2 + z1 * c1
            assert abs(g + coeff2) < 1e-12


class TestReports:
    def test_record_schema(self, ctx):
        rec = check_truc7("Qi", ctx).to_record()
        assert SCHEMA <= set(rec)
        assert rec["identity"] == "truc7" and rec["params"] == {"field": "Qi"}
        assert rec["tol"] == "1.0e-8"
        assert isinstance(rec["lhs"], str) and rec["pass"] is True

    def test_vector_record(self, ctx):
        rec = check_truc_h2("Qsqrt-5", ctx).to_record()
        assert isinstance(rec["lhs"], list) and len(rec["lhs"]) == 2
        assert rec["notes"]["principal_sign"] == "-"

    def test_empty_report(self):
        assert emit_report([]) == "[]"

    def test_sorted_by_identity_then_params(self):
        recs = [{"identity": "truc7", "params": {"field": "Qsqrt-3"}}, {"identity": "kronecker", "params": {"z": "i"}},
                {"identity": "truc7", "params": {"field": "Qi"}}]
        out = sort_records(recs)
        assert [(r["identity"], r["params"]) for r in out] == [
            ("kronecker", {"z": "i"}), ("truc7", {"field": "Qi"}), ("truc7", {"field": "Qsqrt-3"})]

    def test_write_failure(self, tmp_path):
        with pytest.raises(VerificationError):
            emit_report([], tmp_path / "missing" / "out.json")


class TestCache:
    REQS = [CheckRequest("unit-index", "Qi", 20), CheckRequest("kronecker", "i", 20), CheckRequest("truc7", "Qsqrt-3", 20)]

    def test_warm_equals_cold(self, tmp_path):
        cold = emit_report([run_check(r, tmp_path) for r in self.REQS])
        files = sorted(os.listdir(tmp_path))
        assert len(files) == 3 and not any(f.endswith(".tmp") for f in files)
        warm = emit_report([run_check(r, tmp_path) for r in self.REQS])
        assert warm == cold

    def test_cold_runs_agree_up_to_runtime(self, tmp_path):
        a = [run_check(r, tmp_path / "a") for r in self.REQS]
        b = [run_check(r, tmp_path / "b") for r in self.REQS]
        assert strip_runtime(a) == strip_runtime(b)

    def test_corrupt_entry_recomputed(self, tmp_path):
        req = self.REQS[0]
        (tmp_path / f"{req.key()}.json").write_text("{not json")
        rec = run_check(req, tmp_path)
        assert rec["pass"] is True
        assert json.loads((tmp_path / f"{req.key()}.json").read_text()) == rec

    def test_key_depends_on_digits_and_catalog(self, tmp_path):
        a = CheckRequest("truc7", "Qi", 20)
        assert a.key() != CheckRequest("truc7", "Qi", 21).key()
        assert a.key() != CheckRequest("truc7", "Qi", 20, str(tmp_path / "cat.yaml")).key()
        assert a.key() == CheckRequest("truc7", "Qi", 20).key()

    def test_unwritable_cache(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(VerificationError):
            run_check(self.REQS[0], blocker / "sub")


def test_registry():
    assert set(CHECKS) == set(DEFAULT_SUITE) == {"kronecker", "truc7", "truc-h2", "unit-index"}

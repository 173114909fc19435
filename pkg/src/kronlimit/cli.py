"""Command-line front end: ``kronlimit <command> [options]``.

Exit status: 0 when every requested check passes, 1 when any check fails,
2 on usage or input errors.  JSON goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import _expr, cmtypes, lseries, verify
from .epstein import OFLattice, PrecisionExhausted, class_lattice, epstein_direct, epstein_taylor0, epstein_value
from .numerics import PrecisionContext, decimal_string, dedekind_eta, error_string
from .quadfields import CatalogError, load_catalog


@dataclass(frozen=True)
class CliConfig:
    digits: int = 25
    catalog_path: str | None = None
    cache_dir: str | None = None
    output: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.digits < 15:
            raise ValueError(f"--digits must be at least 15, got {self.digits}")
        if self.jobs < 1:
            raise ValueError(f"--jobs must be at least 1, got {self.jobs}")
        if self.output not in (None, "json", "tsv"):
            raise ValueError(f"--output must be json or tsv, got {self.output}")

    @property
    def ctx(self) -> PrecisionContext:
        return PrecisionContext(self.digits)

    def resolved_cache_dir(self) -> Path | None:
        if self.cache_dir == "none":
            return None
        if self.cache_dir:
            return Path(self.cache_dir)
        return verify.default_cache_dir()


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# output


def _emit(obj, cfg: CliConfig, tsv_rows: list[list[str]] | None = None, text: str | None = None) -> None:
    mode = cfg.output or ("text" if text is not None else "json")
    if mode == "text":
        print(text)
    elif mode == "tsv":
        for row in tsv_rows or [[k, str(v)] for k, v in obj.items()]:
            print("\t".join(row))
    else:
        print(json.dumps(obj, indent=2, ensure_ascii=False))


def _dec(v, cfg: CliConfig) -> str:
    return decimal_string(v, cfg.digits)


# --------------------------------------------------------------------------
# commands


def _cmd_eta(args, cfg: CliConfig) -> int:
    ctx = cfg.ctx
    tau = _expr.evaluate(args.tau, ctx.mp)
    v = dedekind_eta(tau, ctx)
    _emit({"tau": args.tau, "eta": _dec(v, cfg), "abs_eta": _dec(abs(v), cfg)}, cfg)
    return 0


def _cmd_lvalue(args, cfg: CliConfig) -> int:
    ctx = cfg.ctx
    chi = lseries.as_character(args.chi)
    t = lseries.l_taylor_at_0(chi, args.k_max, ctx)
    out = {
        "chi": chi.label,
        "conductor": chi.conductor,
        "L0_exact": str(lseries.l_value_at_0_exact(chi)),
        "coefficients": [_dec(c, cfg) for c in t.coeffs],
        "errors": [error_string(e) for e in t.errors],
    }
    if args.dual:
        d = lseries.l_derivative_hurwitz_path(chi, ctx)
        out["L1_hurwitz_path"] = _dec(d, cfg)
        out["dual_path_diff"] = error_string(abs(d - t.coeffs[1]))
    _emit(out, cfg)
    return 0


def _cmd_zeta_taylor(args, cfg: CliConfig) -> int:
    ctx = cfg.ctx
    K = load_catalog(cfg.catalog_path).lookup(args.field)
    if args.base:
        z = lseries.zeta_F_taylor(K.F_data, ctx)
        out = {"field": args.field, "zeta": "F", "coefficients": [_dec(c, cfg) for c in z.series.coeffs],
               "gamma_F": _dec(z.gamma_F, cfg)}
    elif args.class_index is not None:
        t = lseries.class_zeta_taylor(K, args.class_index, ctx)
        out = {"field": args.field, "zeta": f"class {args.class_index}", "coefficients": [_dec(c, cfg) for c in t.coeffs]}
    else:
        t = lseries.zeta_K_taylor(K, ctx)
        out = {"field": args.field, "zeta": "K", "coefficients": [_dec(c, cfg) for c in t.coeffs]}
    _emit(out, cfg)
    return 0


def _lattice_from_args(args, cfg: CliConfig):
    if (args.tau is None) == (args.field is None):
        raise UsageError("give exactly one of --tau or --field")
    if args.tau is not None:
        return OFLattice.from_tau(_expr.evaluate(args.tau, cfg.ctx.mp)), 1, None
    K = load_catalog(cfg.catalog_path).lookup(args.field)
    lat, norm_a = class_lattice(K, args.class_index or 0, cfg.ctx)
    return lat, norm_a, K


def _cmd_epstein(args, cfg: CliConfig) -> int:
    ctx = cfg.ctx
    lat, _, _ = _lattice_from_args(args, cfg)
    if args.s is None:
        t = epstein_taylor0(lat, ctx)
        _emit({"d": lat.d, "coefficients": [_dec(c, cfg) for c in t.coeffs],
               "errors": [error_string(e) for e in t.errors]}, cfg)
        return 0
    s = _expr.evaluate(args.s, ctx.mp)
    out = {"d": lat.d, "s": args.s, "continuation": _dec(epstein_value(lat, s, ctx), cfg)}
    if args.direct:
        d = epstein_direct(lat, s, None, ctx)
        out.update(direct=_dec(d.value, cfg), direct_bound=error_string(d.tail_bound), certified=d.certified)
    _emit(out, cfg)
    return 0


def _cmd_psi(args, cfg: CliConfig) -> int:
    from .epstein import psi_class_from_lattice

    ctx = cfg.ctx
    lat, norm_a, K = _lattice_from_args(args, cfg)
    g = verify.gamma_F(K, ctx) if K is not None else ctx.mp.log(2 * ctx.mp.pi) / 2
    psi = psi_class_from_lattice(lat, norm_a, g, ctx)
    _emit({"psi": _dec(psi, cfg), "norm": str(norm_a), "gamma_F": _dec(g, cfg)}, cfg)
    return 0


def _cmd_cmtypes(args, cfg: CliConfig) -> int:
    G = cmtypes.desk_group(args.group)
    if args.cm_command == "rank":
        r = cmtypes.rank_report(G)
        _emit({"group": G.label, "dim_even": r.dim_even, "rank_B": r.rank_B, "equal": r.equal}, cfg, text=str(r))
        return 0 if r.equal else 1
    if args.cm_command == "decompose":
        if args.values is None:
            raise UsageError("cmtypes decompose needs --values (one rational per element, in table order)")
        vals = [_expr.as_fraction(v.strip()) for v in args.values.split(",")]
        if any(v is None for v in vals):
            raise UsageError(f"--values must be rationals, got {args.values!r}")
        phi = cmtypes.CMFunction.from_values(G, vals)
        dec = cmtypes.decompose_even(phi)
        ok = dec.evaluate(G) == phi
        rows = [{"K": t.K, "Phi": t.describe(), "coefficient": str(x)} for t, x in dec.coefficients]
        _emit({"group": G.label, "method": dec.method, "terms": rows, "reproduces": ok}, cfg,
              tsv_rows=[[r["K"], r["Phi"], r["coefficient"]] for r in rows])
        return 0 if ok else 1
    suite = cmtypes.exact_suite(G)
    rows = [{"relation": r.name, "checked": r.checked, "failures": r.failures} for r in suite.relations]
    rows.append({"relation": "rank even part = rank B", "checked": 1, "failures": int(not suite.rank.equal)})
    rows.append({"relation": "four-term identity", "checked": suite.four_term_checked, "failures": suite.four_term_failures})
    rows.append({"relation": "induced character", "checked": suite.induced_checked, "failures": suite.induced_failures})
    _emit({"group": G.label, "relations": rows, "pass": suite.ok}, cfg,
          tsv_rows=[[r["relation"], str(r["checked"]), str(r["failures"])] for r in rows])
    return 0 if suite.ok else 1


def _run_one(req: verify.CheckRequest, cache_dir):
    return verify.run_check(req, cache_dir)


def _cmd_verify(args, cfg: CliConfig) -> int:
    which = args.verify_command
    identities = list(verify.CHECKS) if which == "all" else [which]
    if which == "all":
        reqs = verify.suite_requests(identities, cfg.digits, cfg.catalog_path)
    else:
        key = verify.CHECKS[which][0]
        value = getattr(args, key, None)
        values = [value] if value else verify.DEFAULT_SUITE[which]
        reqs = [verify.CheckRequest(which, v, cfg.digits, cfg.catalog_path) for v in values]
        if key == "field":
            cat = load_catalog(cfg.catalog_path)
            for r in reqs:
                cat.lookup(r.value)
    cache = cfg.resolved_cache_dir()
    if cfg.jobs > 1 and len(reqs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_run_one, reqs, [cache] * len(reqs)))
    else:
        records = [_run_one(r, cache) for r in reqs]
    records = verify.sort_records(records)
    rows = [[r["identity"], json.dumps(r["params"], sort_keys=True), json.dumps(r["lhs"]), json.dumps(r["rhs"]),
             r["abs_err"], r["tol"], "pass" if r["pass"] else "FAIL"] for r in records]
    if cfg.output == "tsv":
        _emit(None, cfg, tsv_rows=rows)
    else:
        print(verify.emit_report(records))
    for r in records:
        if not r["pass"]:
            print(f"FAIL {r['identity']} {r['params']} abs_err={r['abs_err']} tol={r['tol']}", file=sys.stderr)
    return 0 if all(r["pass"] for r in records) else 1


def _cmd_catalog(args, cfg: CliConfig) -> int:
    cat = load_catalog(cfg.catalog_path)
    if args.catalog_command == "list":
        rows = [[lab, str(cat.lookup(lab).degree_2d), str(cat.lookup(lab).h_K)] for lab in cat.labels()]
        _emit({"catalog": str(cat.source), "fields": cat.labels()}, cfg, tsv_rows=rows)
        return 0
    if args.field is None:
        raise UsageError("catalog show needs --field")
    K = cat.lookup(args.field)
    out = {
        "label": K.label,
        "degree": K.degree_2d,
        "F_discriminant": K.F_data.D,
        "K": K.K_description,
        "h_K": K.h_K,
        "w_K": K.w_K,
        "R_K": K.R_K_paper,
        "R_F": _dec(K.R_F(cfg.ctx.mp), cfg),
        "unit_index": K.unit_index,
        "chi_factors": list(K.chi_factors),
        "class_characters": list(K.class_characters),
    }
    if K.hilbert_class_field is not None:
        H = K.hilbert_class_field
        out["hilbert_class_field"] = {"field": H.field, "h_H": H.h_H, "w_H": H.w_H, "R_H": H.R_H_paper}
    _emit(out, cfg)
    return 0


# --------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--digits", type=int, default=25, help="working decimal digits (>= 15)")
    g.add_argument("--catalog-path", default=None, help="alternative catalog YAML")
    g.add_argument("--cache-dir", default=None,
                   help=f"report cache directory (default ${verify.CACHE_ENV} or ~/.cache/kronlimit; 'none' disables)")
    g.add_argument("--output", choices=["json", "tsv"], default=None)
    g.add_argument("--jobs", type=int, default=1, help="parallel checks for verify")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = argparse.ArgumentParser(prog="kronlimit", description="Kronecker limit formulas for CM fields: evaluation and verification.")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    s = sub.add_parser("eta", parents=[common], help="Dedekind eta at a point of the upper half plane")
    s.add_argument("--tau", required=True, help="expression such as i or (1+sqrt(3)*i)/2")
    s.set_defaults(func=_cmd_eta)

    s = sub.add_parser("lvalue", parents=[common], help="Taylor data of L(χ, s) at 0")
    s.add_argument("--chi", required=True, help="kron:D or prime:p:k")
    s.add_argument("--k-max", type=int, default=2)
    s.add_argument("--dual", action="store_true", help="also evaluate L'(χ, 0) via Hurwitz derivatives")
    s.set_defaults(func=_cmd_lvalue)

    s = sub.add_parser("zeta-taylor", parents=[common], help="Taylor data of ζ_K (or ζ_F, or a class zeta) at 0")
    s.add_argument("--field", required=True)
    s.add_argument("--base", action="store_true", help="ζ_F of the totally real subfield")
    s.add_argument("--class-index", type=int, default=None)
    s.set_defaults(func=_cmd_zeta_taylor)

    for name, func, helptext in (("epstein", _cmd_epstein, "Epstein zeta of a lattice"),
                                 ("psi", _cmd_psi, "Kronecker limit function Ψ_F")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--tau", default=None, help="lattice ℤ + ℤτ")
        s.add_argument("--field", default=None, help="catalog field; uses the class lattice")
        s.add_argument("--class-index", type=int, default=None)
        if name == "epstein":
            s.add_argument("--s", default=None, help="evaluate at s instead of the Taylor data at 0")
            s.add_argument("--direct", action="store_true", help="also sum directly (Re s > 1)")
        s.set_defaults(func=func)

    s = sub.add_parser("cmtypes", help="exact CM-type algebra on desk groups")
    cm = s.add_subparsers(dest="cm_command", required=True, metavar="rank|decompose|relations")
    for name in ("rank", "decompose", "relations"):
        c = cm.add_parser(name, parents=[common])
        c.add_argument("--group", required=True, help="Z2, C4, V4, Z2xZ4 or D8")
        if name == "decompose":
            c.add_argument("--values", default=None, help="comma-separated rationals in element order")
        c.set_defaults(func=_cmd_cmtypes)

    s = sub.add_parser("verify", help="identity checks with JSON reports")
    vs = s.add_subparsers(dest="verify_command", required=True, metavar="kronecker|truc7|truc-h2|unit-index|all")
    for name in ("kronecker", "truc7", "truc-h2", "unit-index", "all"):
        c = vs.add_parser(name, parents=[common])
        if name == "kronecker":
            c.add_argument("--z", default=None, help="point in the upper half plane (default: suite points)")
        elif name != "all":
            c.add_argument("--field", default=None, help="catalog label (default: suite fields)")
        c.set_defaults(func=_cmd_verify)

    s = sub.add_parser("catalog", help="inspect the field catalog")
    cs = s.add_subparsers(dest="catalog_command", required=True, metavar="list|show")
    for name in ("list", "show"):
        c = cs.add_parser(name, parents=[common])
        if name == "show":
            c.add_argument("--field", default=None)
        c.set_defaults(func=_cmd_catalog)
    return p


def _subparser_for(parser: argparse.ArgumentParser, args) -> argparse.ArgumentParser:
    # walk down to the deepest subcommand parser for error messages
    node = parser
    for attr in ("command", "cm_command", "verify_command", "catalog_command"):
        name = getattr(args, attr, None)
        if name is None:
            continue
        for action in node._actions:
            if isinstance(action, argparse._SubParsersAction) and name in action.choices:
                node = action.choices[name]
                break
    return node


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = CliConfig(args.digits, args.catalog_path, args.cache_dir, args.output, args.jobs)
    except ValueError as exc:
        _subparser_for(parser, args).print_usage(sys.stderr)
        print(f"kronlimit: error: {exc}", file=sys.stderr)
        return 2
    if cfg.cache_dir is None and os.environ.get(verify.CACHE_ENV):
        cfg = CliConfig(cfg.digits, cfg.catalog_path, os.environ[verify.CACHE_ENV], cfg.output, cfg.jobs)
    try:
        return args.func(args, cfg)
    except UsageError as exc:
        _subparser_for(parser, args).print_usage(sys.stderr)
        print(f"kronlimit: error: {exc}", file=sys.stderr)
        return 2
    except (PrecisionExhausted, verify.VerificationError) as exc:
        print(f"kronlimit: check could not complete: {exc}", file=sys.stderr)
        return 1
    except CatalogError as exc:
        print(f"kronlimit: error: {exc.args[0]}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # DomainError, CMTypeError, LSeriesError and bad expressions all land here
        print(f"kronlimit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

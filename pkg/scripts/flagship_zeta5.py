"""Flagship d = 2 run: the O_F-lattice O_K for F = Q(sqrt 5), K = Q(zeta_5).

Prints the Taylor data of E(O_K, s) at 0, both sides of the class
number one identity, and a few continuation-versus-direct spot checks.
"""

from __future__ import annotations

import argparse
import time

from kronlimit.epstein import OFLattice, epstein_direct, epstein_taylor0, epstein_value
from kronlimit.numerics import PrecisionContext
from kronlimit.quadfields import catalog_lookup
from kronlimit.verify import check_truc7


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--digits", type=int, default=25)
    ap.add_argument("--field", default="Qzeta5")
    ap.add_argument("--spot", nargs="*", default=["1.3+0.5j", "2.5-1j"], help="points for the direct-sum check")
    args = ap.parse_args()
    ctx = PrecisionContext(args.digits)
    K = catalog_lookup(args.field)
    lat = OFLattice.from_desk_field(K)
    R_F = K.R_F(ctx.mp)

    t0 = time.perf_counter()
    t = epstein_taylor0(lat, ctx)
    print(f"{K.label}: Taylor data in {time.perf_counter() - t0:.1f} s, {t.diagnostics.get('points')} lattice points")
    for k, (c, e) in enumerate(zip(t.coeffs, t.errors)):
        print(f"  s^{k}: {ctx.mp.nstr(c, 15):>22}  err {e:.1e}")
    print(f"  -R_F = {ctx.mp.nstr(-R_F, 12)}, -2R_F = {ctx.mp.nstr(-2 * R_F, 12)}")

    rep = check_truc7(K, ctx)
    print(f"identity: lhs {ctx.mp.nstr(rep.lhs[0], 18)} rhs {ctx.mp.nstr(rep.rhs[0], 18)} "
          f"abs_err {float(rep.abs_err):.1e} ({rep.runtime_ms} ms)")

    for text in args.spot:
        s = complex(text)
        d = epstein_direct(lat, s)
        v = epstein_value(lat, s)
        print(f"s={s}: |direct - continuation| = {float(abs(d.value - v)):.1e} (estimate {d.tail_bound:.1e})")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())

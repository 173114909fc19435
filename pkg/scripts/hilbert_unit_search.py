"""Cross-check the Hilbert class field data shipped in the catalog.

For every class-number-two entry, search for the fundamental unit of the
biquadratic field H = Q(sqrt m, sqrt n), rebuild R_H = log|u|^2 / w_H and
compare with the catalog value.  The ratio h_H R_H / (h_K R_K) is then set
against the s-coefficient of the genus L-function.
"""

from __future__ import annotations

import argparse

from kronlimit.lseries import eta_taylor
from kronlimit.numerics import PrecisionContext
from kronlimit.quadfields import biquadratic_unit_search, load_catalog


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bound", type=int, default=2)
    ap.add_argument("--digits", type=int, default=25)
    args = ap.parse_args()
    ctx = PrecisionContext(args.digits)
    mp = ctx.mp
    bad = 0
    for K in load_catalog():
        H = K.hilbert_class_field
        if H is None:
            continue
        m, n = (squarefree_part(D) for D in H.quadratic_subfields[:2])
        u = biquadratic_unit_search(m, n, args.bound)
        R_search = u.log_abs_sq / u.w
        R_cat = float(H.regulator(mp))
        ratio = H.h_H * H.regulator(mp) / (K.h_K * K.R_K(mp))
        c_eta = mp.re(eta_taylor(K, ctx).coeffs[1])
        ok = u.w == H.w_H and abs(R_search - R_cat) < 1e-9 and abs(ratio - c_eta) < 1e-15
        bad += not ok
        print(f"{K.label}: H={H.field} w={u.w} (catalog {H.w_H}) R_H={R_search:.12f} (catalog {R_cat:.12f}) "
              f"ratio-c_eta={mpmath_e(ratio - c_eta)} {'ok' if ok else 'MISMATCH'}")
    return 1 if bad else 0


def squarefree_part(D: int) -> int:
    # fundamental discriminant to the squarefree m with Q(sqrt D) = Q(sqrt m)
    return D // 4 if D % 4 == 0 else D


def mpmath_e(x) -> str:
    return f"{float(abs(x)):.1e}"


if __name__ == "__main__":
    raise SystemExit(main())

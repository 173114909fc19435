"""Error of the class number one identity as the working precision grows.

For each field and each digit count the identity is evaluated from
scratch; the measured abs_err should track the target 10^(4 - digits)
for d = 1 and level off near the float64 floor for d = 2.
"""

from __future__ import annotations

import argparse
import time

from kronlimit.numerics import PrecisionContext
from kronlimit.verify import check_truc7


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fields", nargs="*", default=["Qi", "Qsqrt-3", "Qsqrt-5"])
    ap.add_argument("--digits", nargs="*", type=int, default=[15, 20, 25, 30, 40])
    args = ap.parse_args()
    print("field\tdigits\ttarget\tabs_err\tseconds")
    for label in args.fields:
        for digits in args.digits:
            ctx = PrecisionContext(digits)
            t0 = time.perf_counter()
            rep = check_truc7(label, ctx)
            print(f"{label}\t{digits}\t{ctx.target_abs_err:.0e}\t{float(rep.abs_err):.1e}\t{time.perf_counter() - t0:.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

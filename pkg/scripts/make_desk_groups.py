"""Regenerate src/kronlimit/data/groups.yaml from small presentations.

Each group is written as a full multiplication table together with the
central involution c and every subgroup (found by closing pairs of
generators, which suffices at these orders).
"""

from __future__ import annotations

import itertools
from pathlib import Path

import yaml

OUT = Path(__file__).resolve().parents[1] / "src" / "kronlimit" / "data" / "groups.yaml"


def abelian(orders, names, c, description):
    elems = list(itertools.product(*[range(n) for n in orders]))
    mul = lambda a, b: tuple((x + y) % n for x, y, n in zip(a, b, orders))
    return elems, mul, names, c, description


def dihedral8():
    elems = [(a, b) for b in range(2) for a in range(4)]

    def mul(x, y):
        a, b = x
        c_, d = y
        return ((a + (-1) ** b * c_) % 4, (b + d) % 2)

    def name(x):
        a, b = x
        r = "" if a == 0 else ("r" if a == 1 else f"r{a}")
        s = "s" if b else ""
        return (r + s) or "1"

    return elems, mul, name, (2, 0), "dihedral group of order 8, c = r^2"


def cyclic_name(gen: str):
    def name(k):
        k = k[0] if isinstance(k, tuple) else k
        return "1" if k == 0 else (gen if k == 1 else f"{gen}{k}")
    return name


def product_name(x):
    t, k = x
    g = "" if k == 0 else ("g" if k == 1 else f"g{k}")
    return ("t" if t else "") + g or "1"


def v4_name(x):
    return {(0, 0): "1", (1, 0): "c", (0, 1): "t", (1, 1): "ct"}[x]


def subgroups(elems, mul, name):
    e = elems[0]
    found = {}
    for a, b in itertools.combinations_with_replacement(elems, 2):
        H = {e}
        frontier = {a, b}
        while frontier:
            H |= frontier
            frontier = {mul(x, y) for x in H for y in H} - H
        key = frozenset(H)
        if key not in found:
            gens = sorted({a, b} - {e}, key=elems.index)
            found[key] = gens
    out = {}
    for H, gens in sorted(found.items(), key=lambda kv: (len(kv[0]), sorted(elems.index(x) for x in kv[0]))):
        if len(H) == 1:
            label = "1"
        elif len(H) == len(elems):
            label = "G"
        else:
            label = "<" + ",".join(name(g) for g in gens) + ">"
        out[label] = [name(x) for x in elems if x in H]
    return out


def build():
    specs = {
        "Z2": abelian((2,), cyclic_name("c"), (1,), "Z/2 = Gal(K/Q) for K imaginary quadratic"),
        "C4": abelian((4,), cyclic_name("g"), (2,), "cyclic quartic, c = g^2"),
        "V4": abelian((2, 2), v4_name, (1, 0), "(Z/2)^2, e.g. Q(i, sqrt 5)/Q"),
        "Z2xZ4": abelian((2, 4), product_name, (0, 2), "Z/2 x Z/4, c = (0, 2)"),
        "D8": dihedral8(),
    }
    doc = {}
    for label, (elems, mul, name, c, desc) in specs.items():
        doc[label] = {
            "description": desc,
            "elements": [name(x) for x in elems],
            "table": [[name(mul(x, y)) for y in elems] for x in elems],
            "c": name(c),
            "subgroups": subgroups(elems, mul, name),
        }
    return doc


def main():
    header = (
        "# Desk Galois groups: finite groups with a central involution c.\n"
        "# table[i][j] = elements[i] * elements[j]; elements[0] is the identity.\n"
        "# Regenerate with scripts/make_desk_groups.py.\n"
    )
    OUT.write_text(header + yaml.safe_dump(build(), sort_keys=False, default_flow_style=None, width=120))
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()

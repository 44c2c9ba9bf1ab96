"""Zeros of pi_104 for the seven-jump weight, written as an annotated SVG.

Run: python demos/thumbnail_zeros.py [out.svg]
"""

import sys

from opuclab.asymptotics import f_n
from opuclab.numerics import PrecisionContext
from opuclab.opuc import WeightSpec, build_moments, levinson_opuc
from opuclab.potentials import PRESETS
from opuclab.szego import szego_apparatus
from opuclab.zeros import classify, find_zeros, zeros_svg


def main(out: str = "thumbnail-zeros.svg") -> None:
    ctx = PrecisionContext(256)
    V = PRESETS["thumbnail"]()
    n, k = 104, V.smoothness_k
    res = levinson_opuc(build_moments(WeightSpec(V), n, ctx))
    zs = find_zeros(res.coeffs[n], ctx)
    sz = szego_apparatus(V, ctx)
    fn = f_n(V, sz, n)
    cl = classify(zs, fn, k, n, sz=sz)
    for label in ("near_circle", "spurious", "other"):
        print(f"{label:12s} {cl.count(label)}")
    print(f"violations   {len(cl.violations)}")
    with open(out, "w") as fh:
        fh.write(zeros_svg(zs, n, k, fn, V.jump_angles, title=f"thumbnail n={n}"))
    print(f"wrote {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])

"""Error exponents of the fixed-weight approximants for the three-jump weight.

Run: python demos/jump3_rates.py
"""

from opuclab.asymptotics import fit_rate, fixed_error_series
from opuclab.numerics import PrecisionContext
from opuclab.potentials import PRESETS


def main() -> None:
    ctx = PrecisionContext(256)
    ns = [32, 64, 128, 256]
    kinds = ["OutsideFixed", "CircleFixed", "InsideFixed", "InsideDeep", "gamma", "alpha"]
    reports = fixed_error_series(PRESETS["jump3"](), ns, kinds, ctx)
    print(f"{'kind':14s} " + " ".join(f"n={n:<9d}" for n in ns) + " exponent")
    for kind, rep in reports.items():
        errs = " ".join(f"{e:.3e}   " for e in rep.sup_errors)
        print(f"{kind:14s} {errs} {fit_rate(rep).exponent:+.2f}")


if __name__ == "__main__":
    main()

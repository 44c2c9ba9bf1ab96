"""Single-band equilibrium density for V = A cos(theta) and its energy.

The candidate kappa'/(2 pi) satisfies the band condition when the
sufficient conditions hold; the uniform density is shown as a control.

Run: python demos/cosine_equilibrium.py [A]
"""

import sys

from opuclab.equilibrium import band_residual, candidate_density, energy, uniform_density
from opuclab.numerics import PrecisionContext
from opuclab.potentials import Cosine
from opuclab.szego import build_fourier, check_condition_convex, check_condition_t, szego_apparatus


def main(A: str = "0.5") -> None:
    ctx = PrecisionContext(128)
    V = Cosine(float(A))
    t = check_condition_t(build_fourier(V, ctx), V)
    c = check_condition_convex(V, ctx)
    print(f"t-sum {t.value:.4f} holds={t.holds}; inf V'' {c.value:.4f} holds={c.holds}")
    psi = candidate_density(szego_apparatus(V, ctx))
    rep = band_residual(psi, V, ctx)
    print(f"candidate: energy {rep.energy:.12f} (product rule "
          f"{energy(psi, V, ctx, cells=True):.12f}), band residual {rep.band_residual:.2e}")
    ctrl = band_residual(uniform_density(), V, ctx)
    print(f"uniform:   energy {ctrl.energy:.12f}, band residual {ctrl.band_residual:.2e}")


if __name__ == "__main__":
    main(*sys.argv[1:])

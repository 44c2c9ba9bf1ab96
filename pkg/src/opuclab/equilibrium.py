"""
Weighted logarithmic energy on the circle and the single-band checks.

Densities live on the uniform grid ``theta_i = -pi + (i + 1/2) h``.  The
logarithmic potential is applied through its Fourier multiplier,

    int log|e^{i theta} - e^{i theta'}| psi(theta') dtheta'
        = -pi sum_{j != 0} psi_j e^{i j theta} / |j|,

which is spectrally accurate for smooth densities.  A product rule (density
constant per cell, kernel integrated exactly through the Clausen function) is
kept as an independent cross-check.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import mpmath
import numpy as np

from .numerics import DEFAULT_CONTEXT, TWO_PI, PrecisionContext, is_mp
from .potentials import Cosine, PiecewiseCubic, Potential
from .szego import (DomainError, SzegoEvaluator, build_fourier, check_condition_convex,
                    check_condition_t, omega_jet_on_ring)

logger = logging.getLogger(__name__)

DEFAULT_NODES = 2 ** 12


def grid_angles(N: int) -> np.ndarray:
    return -math.pi + TWO_PI * (np.arange(N) + 0.5) / N


@dataclass
class Density:
    """Samples of a density on the uniform midpoint grid.

    ``samples`` is a float array, or a list of mpf for the precise path.
    """

    samples: object

    def __post_init__(self):
        vals = self.samples if isinstance(self.samples, list) else np.asarray(self.samples)
        if any(v < 0 for v in vals):
            raise ValueError("density samples must be non-negative")

    @property
    def N(self) -> int:
        return len(self.samples)

    @property
    def theta(self) -> np.ndarray:
        return grid_angles(self.N)

    @property
    def precise(self) -> bool:
        return isinstance(self.samples, list) and bool(self.samples) and is_mp(self.samples[0])

    def mass(self):
        if self.precise:
            mp = self.samples[0].context
            return mp.fsum(self.samples) * 2 * mp.pi / self.N
        return float(math.fsum(np.asarray(self.samples, dtype=float))) * TWO_PI / self.N

    def values(self) -> np.ndarray:
        return np.array([float(v) for v in self.samples], dtype=float)

    def normalized(self) -> "Density":
        return Density(self.values() / float(self.mass()))

    def masked(self, arc: Tuple[float, float]) -> "Density":
        """Zero the density on the arc ``a < theta < b`` and renormalize."""
        a, b = arc
        th = self.theta
        inside = ((th - a) % TWO_PI) < ((b - a) % TWO_PI)
        vals = np.where(inside, 0.0, self.values())
        return Density(vals).normalized()


def uniform_density(N: int = DEFAULT_NODES) -> Density:
    return Density(np.full(N, 1.0 / TWO_PI))


def _psi_hat(psi: Density) -> Tuple[np.ndarray, np.ndarray]:
    vals = psi.values()
    N = vals.size
    j = np.fft.fftfreq(N, 1.0 / N)
    # (1/2pi) * (2pi/N) sum psi_l e^{-ij theta_l}
    c = np.fft.fft(vals) / N * np.exp(-1j * j * (-math.pi + math.pi / N))
    return c, j


def log_potential(psi: Density) -> np.ndarray:
    """``int log|e^{i theta} - e^{i theta'}| psi(theta') dtheta'`` at the nodes (spectral)."""
    c, j = _psi_hat(psi)
    N = c.size
    mult = np.zeros(N)
    nz = j != 0
    mult[nz] = -math.pi / np.abs(j[nz])
    if N % 2 == 0:
        mult[N // 2] *= 0.5          # split the Nyquist mode symmetrically
    spec = c * mult
    return np.real(np.fft.ifft(spec * np.exp(1j * j * (-math.pi + math.pi / N))) * N)


@lru_cache(maxsize=8)
def _clausen_row(N: int) -> np.ndarray:
    """``int log|2 sin(x/2)|`` over the cells ``[(d - 1/2) h, (d + 1/2) h]``.

    ``Cl_2(t) = -int_0^t log|2 sin(x/2)| dx`` gives each cell exactly.
    """
    h = TWO_PI / N
    edges = np.array([float(mpmath.clsin(2, (d + 0.5) * h)) for d in range(N)])
    row = np.empty(N)
    row[0] = -2.0 * edges[0]
    row[1:] = edges[:-1] - edges[1:]
    return row


def log_potential_cells(psi: Density) -> np.ndarray:
    """Product-rule cross-check of :func:`log_potential` (second-order accurate)."""
    vals = psi.values()
    N = vals.size
    row = _clausen_row(N)
    # circulant: U_i = sum_l row[(i-l) mod N] psi_l
    return np.real(np.fft.ifft(np.fft.fft(row) * np.fft.fft(vals)))


def energy(psi: Density, V: Potential, ctx: PrecisionContext = DEFAULT_CONTEXT,
           cells: bool = False) -> float:
    """``E[psi] = iint log(1/|e^{i theta} - e^{i theta'}|) psi psi' + int V psi``.

    The spectral form is ``2 pi^2 sum_{j != 0} |psi_j|^2 / |j| + int V psi``;
    ``cells=True`` uses the Clausen product rule instead.
    """
    th = psi.theta
    vals = psi.values()
    h = TWO_PI / vals.size
    pot = float(np.sum(np.asarray(V(th), dtype=float) * vals) * h)
    if cells:
        inter = -float(np.sum(log_potential_cells(psi) * vals) * h)
    else:
        c, j = _psi_hat(psi)
        nz = j != 0
        w = np.ones(c.size)
        if c.size % 2 == 0:
            w[c.size // 2] = 0.5
        inter = 2 * math.pi ** 2 * float(np.sum(w[nz] * np.abs(c[nz]) ** 2 / np.abs(j[nz])))
    return inter + pot


def candidate_density(sz: SzegoEvaluator, N: int = DEFAULT_NODES,
                      precise: bool = False) -> Density:
    """Single-band candidate ``psi = kappa'/(2 pi)``.

    Raises
    ------
    DomainError
        ``kappa'`` is not positive on the grid.
    """
    th = grid_angles(N)
    if precise:
        mp = sz.ctx.mp
        thm = [-mp.pi + 2 * mp.pi * (mp.mpf(i) + mp.mpf(1) / 2) / N for i in range(N)]
        vals = [(1 + sz.Omega(t, 1, precise=True)) / (2 * mp.pi) for t in thm]
        if min(vals) <= 0:
            raise DomainError("kappa' is not positive")
        return Density(vals)
    om1 = omega_jet_on_ring(sz, 1, th)[1]
    kp = 1.0 + om1
    if np.min(kp) <= 0:
        raise DomainError(f"kappa' margin {np.min(kp):.3g} is not positive")
    return Density(kp / TWO_PI)


@dataclass
class EnergyReport:
    energy: float
    lagrange_estimate: float
    band_residual: float
    v0_defect: float
    gap_margins: List[float]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def band_residual(psi: Density, V: Potential, ctx: PrecisionContext = DEFAULT_CONTEXT,
                  V0: Optional[float] = None) -> EnergyReport:
    """Euler-Lagrange residual on a single band.

    ``U = 2 int log|e^{i theta} - e^{i theta'}| psi' dtheta' - V``,
    ``l = mean U``, residual ``sup |U - l|``; ``v0_defect = |l + V0|``.
    """
    if np.min(psi.values()) <= 0:
        raise DomainError("band residual needs a density positive on the whole circle")
    th = psi.theta
    U = 2 * log_potential(psi) - np.asarray(V(th), dtype=float)
    ell = float(np.mean(U))
    if V0 is None:
        V0 = float(np.mean(np.asarray(V(th), dtype=float)))
    return EnergyReport(energy(psi, V, ctx), ell, float(np.max(np.abs(U - ell))),
                        abs(ell + V0), [])


def phi_double_prime(psi: Density, V: Potential, theta: float) -> float:
    """``-2 int psi'/|e^{i theta} - e^{i theta'}|^2 dtheta' - V''(theta)`` off the support."""
    vals = psi.values()
    th = psi.theta
    N = vals.size
    h = TWO_PI / N
    idx = int(np.floor((theta + math.pi) / h)) % N
    if vals[idx] > 0 or vals[(idx + 1) % N] > 0 or vals[(idx - 1) % N] > 0:
        raise DomainError("theta lies in the support of psi")
    dist2 = 2.0 - 2.0 * np.cos(theta - th)
    support = vals > 0
    integral = float(np.sum(vals[support] / dist2[support]) * h)
    return -2.0 * integral - float(V.derivative(theta, 2))


# ---------------------------------------------------------------------------
# sufficient-condition comparison
# ---------------------------------------------------------------------------

@dataclass
class ConditionRow:
    weight: str
    t_sum: float
    inf_Vpp: float
    t_holds: bool
    convex_holds: bool


@dataclass
class ConditionReport:
    cosine_boundaries: List[Tuple[int, float, float]]
    rows: List[ConditionRow]

    @property
    def t_not_convex(self) -> List[ConditionRow]:
        return [r for r in self.rows if r.t_holds and not r.convex_holds]

    @property
    def convex_not_t(self) -> List[ConditionRow]:
        return [r for r in self.rows if r.convex_holds and not r.t_holds]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["weight", "t_sum", "inf_Vpp", "t_holds", "convex_holds"])
        for r in self.rows:
            w.writerow([r.weight, f"{r.t_sum:.12g}", f"{r.inf_Vpp:.12g}", r.t_holds,
                        r.convex_holds])
        return buf.getvalue()


def cosine_boundaries(k: int) -> Tuple[float, float]:
    """Amplitude thresholds for ``A cos(k theta)``: ``(1/k, 1/(2k^2))``."""
    return 1.0 / k, 1.0 / (2 * k * k)


def piecewise_cubic_t_sum(V: PiecewiseCubic, terms: int = 10 ** 6) -> float:
    """``sum_j |j V_j|`` from the closed-form coefficients (tail bounded by ``2M/(pi K^2)``)."""
    k = np.arange(1, terms + 1, dtype=float)
    s = float(np.sum(4 * V.M / (math.pi * k ** 3) * np.sin(k * V.eps / 2) ** 2))
    return s


def sufficient_condition_suite(ctx: PrecisionContext = DEFAULT_CONTEXT) -> ConditionReport:
    """Both conditions on the cosine family and on the piecewise cubic."""
    bounds = [(k,) + cosine_boundaries(k) for k in (1, 2, 3)]
    rows = []
    for k, A in ((1, 0.4), (2, 0.3), (2, 0.1), (3, 0.2), (3, 0.05)):
        V = Cosine(A, k)
        t_val, t_ok = check_condition_t(build_fourier(V, ctx), V)
        c_val, c_ok = check_condition_convex(V, ctx)
        rows.append(ConditionRow(f"{A:g}cos{k}", t_val, c_val, t_ok, c_ok))
    eps = 0.01
    pc = PiecewiseCubic(0.9 * math.pi / eps ** 2, eps)
    t_val = piecewise_cubic_t_sum(pc)
    c_val, c_ok = check_condition_convex(pc, ctx)
    rows.append(ConditionRow(f"cubic(M={pc.M:g},eps={eps:g})", t_val, c_val, t_val < 1, c_ok))
    return ConditionReport(bounds, rows)


appendixB_suite = sufficient_condition_suite

"""
The dbar problem on the annulus ``2^{-eps} <= |z| <= 2^{eps}``.

The data matrix (``W`` for a fixed weight, ``X`` for a varying one) is
sampled cell by cell on a polar grid that is uniform in ``log r`` and in
``theta`` and split exactly at ``r = 1``.  The area integral

    (W F)(z) = -(1/pi) iint F(z') W(z') / (z' - z) dA'

is discretized by product integration: ``F W`` is taken constant on each
cell and the geometric weight ``iint_cell dA'/(z' - z)`` is computed exactly
enough (midpoint for far cells, a Stokes boundary formula for near cells,
which removes the Cauchy singularity).  Because the grid is uniform in
angle, the operator on grid targets is a circular correlation in ``theta``
and is applied with FFTs; a direct summation serves as the oracle.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from .numerics import DEFAULT_CONTEXT, LOG2, TWO_PI, PrecisionContext, bump, bump_prime
from .opuc import PrecisionGateError, WeightSpec
from .szego import DomainError, SzegoEvaluator, kappa_prime_margin, omega_jet_on_ring

logger = logging.getLogger(__name__)

#: Gauss nodes per edge in the boundary formula for near cells
EDGE_NODES = 16
#: cells whose centre lies within this many cell diameters of a target are "near"
NEAR_FACTOR = 2.5
#: kernel tables up to this many complex entries are kept between applications
KERNEL_CACHE_ENTRIES = 2 ** 23
CONTRACTION_GATE = 0.5
FLOAT_FLOOR = 1e-15


class DbarGateError(PrecisionGateError):
    """The operator is not contractive enough to sum the Neumann series."""

    def __init__(self, message: str, first_term: float):
        super().__init__(message, required_bits=0)
        self.first_term = first_term


class DbarDivergenceError(ArithmeticError):
    """Neumann terms stopped decreasing."""

    def __init__(self, message: str, terms: Sequence[float]):
        super().__init__(message)
        self.terms = list(terms)


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnnulusGrid:
    """Polar cells covering ``2^{-eps} <= r <= 2^{eps}``.

    ``radial_cells`` must be even; half of the rings lie inside the unit
    circle so that ``r = 1`` is a cell boundary.
    """

    epsilon: float
    radial_cells: int
    angular_cells: int

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.radial_cells < 2 or self.radial_cells % 2:
            raise ValueError("radial_cells must be a positive even number")
        if self.angular_cells < 4:
            raise ValueError("angular_cells must be >= 4")

    @classmethod
    def default(cls, n: int, epsilon: float = 0.5) -> "AnnulusGrid":
        """``max(64, 4n)`` rings and ``max(256, 8n)`` angular cells."""
        return cls(epsilon, max(64, 4 * n), max(256, 8 * n))

    @property
    def log_extent(self) -> float:
        return self.epsilon * LOG2

    @property
    def rho_edges(self) -> np.ndarray:
        return np.linspace(-self.log_extent, self.log_extent, self.radial_cells + 1)

    @property
    def r_edges(self) -> np.ndarray:
        return np.exp(self.rho_edges)

    @property
    def r_centers(self) -> np.ndarray:
        e = self.rho_edges
        return np.exp(0.5 * (e[1:] + e[:-1]))

    @property
    def dtheta(self) -> float:
        return TWO_PI / self.angular_cells

    @property
    def theta0(self) -> float:
        return -math.pi + 0.5 * self.dtheta

    @property
    def theta_centers(self) -> np.ndarray:
        return self.theta0 + self.dtheta * np.arange(self.angular_cells)

    @property
    def ring_areas(self) -> np.ndarray:
        """Area of one cell in each ring."""
        re = self.r_edges
        return 0.5 * (re[1:] ** 2 - re[:-1] ** 2) * self.dtheta

    @property
    def total_area(self) -> float:
        return math.pi * (2.0 ** (2 * self.epsilon) - 2.0 ** (-2 * self.epsilon))

    @property
    def inside(self) -> np.ndarray:
        """Boolean per ring: ``r < 1``."""
        return np.arange(self.radial_cells) < self.radial_cells // 2

    def points(self) -> np.ndarray:
        """Cell centres as a ``(radial, angular)`` complex array."""
        return self.r_centers[:, None] * np.exp(1j * self.theta_centers)[None, :]

    def cell_bounds(self, i: int, theta_c: float) -> Tuple[float, float, float, float]:
        re = self.r_edges
        h = 0.5 * self.dtheta
        return re[i], re[i + 1], theta_c - h, theta_c + h

    def diameters(self) -> np.ndarray:
        re = self.r_edges
        return np.hypot(re[1:] - re[:-1], re[1:] * self.dtheta)

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "radial_cells": self.radial_cells,
                "angular_cells": self.angular_cells}


# ---------------------------------------------------------------------------
# geometric weights
# ---------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(EDGE_NODES)


def cell_cauchy_weight(ra: float, rb: float, ta: float, tb: float, z: complex) -> complex:
    """``iint_cell dA'/(z' - z)`` for the polar cell ``[ra, rb] x [ta, tb]``.

    Uses ``iint_D dA/(z'-z) = (1/2i) oint_{dD} conj(z'-z)/(z'-z) dz'``; the
    boundary integrand has modulus one, so the formula is valid for ``z``
    inside or outside the cell.
    """
    def edge(zs, dz):
        d = zs - z
        return np.sum(np.conj(d) / d * dz)

    tm, th = 0.5 * (ta + tb), 0.5 * (tb - ta)
    rm, rh = 0.5 * (ra + rb), 0.5 * (rb - ra)
    t = tm + th * _GL_X
    s = rm + rh * _GL_X
    total = 0j
    # outer arc a -> b, inner arc b -> a
    for r, sign in ((rb, 1.0), (ra, -1.0)):
        zs = r * np.exp(1j * t)
        total += sign * edge(zs, 1j * zs * th * _GL_W)
    # radial edges: at tb inward, at ta outward
    for ang, sign in ((tb, -1.0), (ta, 1.0)):
        e = np.exp(1j * ang)
        total += sign * edge(s * e, e * rh * _GL_W)
    return complex(total / 2j)


class _KernelTable:
    """Ring-by-ring kernels ``K0[i][j, d]`` for targets at ``r_i`` (angle 0)."""

    def __init__(self, grid: AnnulusGrid):
        self.grid = grid
        self._cache: Dict[int, np.ndarray] = {}
        size = grid.radial_cells ** 2 * grid.angular_cells
        self._keep = size <= KERNEL_CACHE_ENTRIES

    def raw(self, i: int) -> np.ndarray:
        g = self.grid
        rc = g.r_centers
        d = np.arange(g.angular_cells)
        ang = np.where(d <= g.angular_cells // 2, d, d - g.angular_cells) * g.dtheta
        src = rc[:, None] * np.exp(1j * ang)[None, :]
        target = rc[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            K = g.ring_areas[:, None] / (src - target)
        dist = np.abs(src - target)
        diam = g.diameters()
        near = dist < NEAR_FACTOR * np.maximum(diam[:, None], diam[i])
        for j, dd in zip(*np.nonzero(near)):
            ra, rb, ta, tb = g.cell_bounds(int(j), float(ang[dd]))
            K[j, dd] = cell_cauchy_weight(ra, rb, ta, tb, complex(target))
        return K

    def spectral(self, i: int) -> np.ndarray:
        """``N * ifft(K0)`` so that the correlation becomes a product."""
        if i in self._cache:
            return self._cache[i]
        out = self.grid.angular_cells * np.fft.ifft(self.raw(i), axis=1)
        if self._keep:
            self._cache[i] = out
        return out


# ---------------------------------------------------------------------------
# kernel field
# ---------------------------------------------------------------------------

def _extension(derivs: Sequence[np.ndarray], m: int, r: np.ndarray, theta: np.ndarray):
    """``E_m f`` and ``dbar E_m f`` on the grid (rows = radii)."""
    L = (-1j * np.log(r))[:, None]
    value = np.zeros((r.size, theta.size), dtype=complex)
    term = np.ones_like(L)
    for p in range(m):
        value = value + derivs[p][None, :] * term
        term = term * L / (p + 1)
    top = derivs[m][None, :] * (L ** (m - 1) / math.factorial(m - 1))
    dbar = 1j * np.exp(1j * theta)[None, :] / (2 * r[:, None]) * top
    return value, dbar


@dataclass
class KernelField:
    """Samples of the dbar data matrix on an :class:`AnnulusGrid`.

    ``samples[i, a]`` is a 2x2 matrix: strictly upper-triangular for
    ``r < 1`` and strictly lower-triangular for ``r > 1``.
    """

    kind: str
    n: int
    m: int
    epsilon: float
    grid: AnnulusGrid
    samples: np.ndarray
    weight_hash: str = ""
    _kernels: Optional[_KernelTable] = field(default=None, repr=False)

    @property
    def kernels(self) -> _KernelTable:
        if self._kernels is None:
            self._kernels = _KernelTable(self.grid)
        return self._kernels

    @property
    def trace(self) -> np.ndarray:
        return self.samples[..., 0, 0] + self.samples[..., 1, 1]

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def ring_sup(self) -> np.ndarray:
        """Largest entry modulus per ring."""
        return np.max(np.abs(self.samples), axis=(1, 2, 3))

    def envelope_ratio(self) -> np.ndarray:
        """Ring sup divided by ``e^{-n|log r|} |log r|^{m-1}``."""
        rho = np.log(self.grid.r_centers)
        env = np.exp(-self.n * np.abs(rho)) * np.abs(rho) ** (self.m - 1)
        return self.ring_sup() / env


def _bump_factor(grid: AnnulusGrid):
    r = grid.r_centers
    ell = np.log(r) / grid.epsilon
    B = bump(ell)
    dB = (bump_prime(ell) / grid.epsilon)[:, None] * np.exp(1j * grid.theta_centers)[None, :] / (2 * r[:, None])
    return B[:, None], dB


def build_kernel_field(w: WeightSpec, sz: SzegoEvaluator, n: int, m: int,
                       grid: Optional[AnnulusGrid] = None, epsilon: float = 0.5) -> KernelField:
    """Sample ``W`` (fixed weight) or ``X`` (varying weight) on the grid.

    fixed, ``r < 1``: ``W_12 = z^n S^2 dbar[B e^{E_m V}]``;
    fixed, ``r > 1``: ``W_21 = z^{-n} S^{-2} dbar[B e^{E_m V}]``;
    varying, ``r < 1``: ``X_12 = z^n dbar[B e^{i n E_m Omega}]``;
    varying, ``r > 1``: ``X_21 = z^{-n} dbar[B e^{-i n E_m Omega}]``.

    Raises
    ------
    ValueError
        ``m`` out of range.
    DomainError
        Varying weight whose ``kappa'`` is not positive.
    """
    grid = grid or AnnulusGrid.default(n, epsilon)
    V = w.potential
    k = V.smoothness_k
    if m < 1 or (k is not None and m > k):
        raise ValueError(f"extension order m={m} outside 1..{k}")
    r = grid.r_centers
    th = grid.theta_centers
    Z = grid.points()
    inside = grid.inside
    B, dB = _bump_factor(grid)
    out = np.zeros(Z.shape + (2, 2), dtype=complex)
    if w.mode == "fixed":
        derivs = [np.asarray(d, dtype=float) for d in V.jet(th, m)]
        E, dE = _extension(derivs, m, r, th)
        eE = np.exp(E)
        dbar = eE * (dB + B * dE)
        rin, rout = r[inside], r[~inside]
        S_in = np.exp(-float(sz.V0) - sz.conjN_on_grid(rin, th.size, grid.theta0))
        S_out = np.exp(sz.N_on_grid(rout, th.size, grid.theta0))
        out[inside, :, 0, 1] = Z[inside] ** n * S_in ** 2 * dbar[inside]
        out[~inside, :, 1, 0] = Z[~inside] ** (-n) * S_out ** (-2) * dbar[~inside]
    elif w.mode == "varying":
        if m < 2:
            raise ValueError("the varying field needs m >= 2")
        margin = kappa_prime_margin(sz)
        if margin <= 0:
            raise DomainError(f"kappa' margin {margin:.3g} is not positive")
        derivs = omega_jet_on_ring(sz, m, th)
        E, dE = _extension(derivs, m, r, th)
        for rows, sgn, entry in ((inside, 1, (0, 1)), (~inside, -1, (1, 0))):
            ph = np.exp(sgn * 1j * n * E[rows])
            dbar = ph * (dB[rows] + B[rows] * sgn * 1j * n * dE[rows])
            out[rows, :, entry[0], entry[1]] = Z[rows] ** (sgn * n) * dbar
    else:
        raise ValueError(f"unknown weight mode {w.mode!r}")
    kind = "W_fixed" if w.mode == "fixed" else "X_varying"
    return KernelField(kind, n, m, grid.epsilon, grid, out, w.content_hash())


def unit_field(n: int, grid: AnnulusGrid) -> KernelField:
    """``W`` for ``phi = 1`` (``m = 1``): ``z^{+-n} dbar B``."""
    Z = grid.points()
    _, dB = _bump_factor(grid)
    out = np.zeros(Z.shape + (2, 2), dtype=complex)
    ins = grid.inside
    out[ins, :, 0, 1] = Z[ins] ** n * dB[ins]
    out[~ins, :, 1, 0] = Z[~ins] ** (-n) * dB[~ins]
    return KernelField("W_fixed", n, 1, grid.epsilon, grid, out)


def unit_closed_form(n: int, grid: AnnulusGrid) -> np.ndarray:
    """``H`` for ``phi = 1``: ``[[1, z^n(B-1)],[0,1]]`` inside, mirrored outside."""
    Z = grid.points()
    B = bump(np.log(np.abs(Z)) / grid.epsilon)
    H = np.zeros(Z.shape + (2, 2), dtype=complex)
    H[..., 0, 0] = 1
    H[..., 1, 1] = 1
    ins = grid.inside
    H[ins, :, 0, 1] = Z[ins] ** n * (B[ins] - 1)
    H[~ins, :, 1, 0] = Z[~ins] ** (-n) * (B[~ins] - 1)
    return H


# ---------------------------------------------------------------------------
# the operator
# ---------------------------------------------------------------------------

def apply_operator(field: KernelField, F: np.ndarray) -> np.ndarray:
    """``(W F)`` at every cell centre (FFT correlation in angle)."""
    g = field.grid
    G = np.einsum("raij,rajk->raik", F, field.samples)
    Ghat = np.fft.fft(G, axis=1)
    phase = np.exp(-1j * g.theta_centers)
    out = np.empty_like(G)
    active = np.nonzero(np.any(G != 0, axis=(1, 2, 3)))[0]
    Ga = Ghat[active]
    for i in range(g.radial_cells):
        Kh = field.kernels.spectral(i)[active]
        S = np.einsum("jq,jqab->qab", Kh, Ga)
        out[i] = np.fft.ifft(S, axis=0) * phase[:, None, None]
    return -out / math.pi


def cauchy_apply(field: KernelField, F: np.ndarray, z: complex,
                 target_diam: float = 0.0) -> np.ndarray:
    """``(W F)(z)`` at one point by direct summation over all cells.

    Cells within ``NEAR_FACTOR`` diameters (the larger of the source cell's
    and ``target_diam``) use the exact cell weight.
    """
    g = field.grid
    G = np.einsum("raij,rajk->raik", F, field.samples)
    Z = g.points()
    areas = np.broadcast_to(g.ring_areas[:, None], Z.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = areas / (Z - z)
    diam = np.broadcast_to(g.diameters()[:, None], Z.shape)
    near = np.abs(Z - z) < NEAR_FACTOR * np.maximum(diam, target_diam)
    th = g.theta_centers
    for i, a in zip(*np.nonzero(near)):
        ra, rb, ta, tb = g.cell_bounds(int(i), float(th[a]))
        K[i, a] = cell_cauchy_weight(ra, rb, ta, tb, complex(z))
    return -np.einsum("ra,raij->ij", K, G) / math.pi


def apply_operator_direct(field: KernelField, F: np.ndarray,
                          targets: Sequence[Tuple[int, int]]) -> np.ndarray:
    """Oracle for :func:`apply_operator` at selected grid cells."""
    Z = field.grid.points()
    diam = field.grid.diameters()
    return np.array([cauchy_apply(field, F, complex(Z[i, a]), float(diam[i]))
                     for i, a in targets])


# ---------------------------------------------------------------------------
# Neumann series
# ---------------------------------------------------------------------------

def _sup(A: np.ndarray) -> float:
    return float(np.max(np.abs(A)))


@dataclass
class DbarSolution:
    """Neumann-series solution on the grid.

    ``samples`` approximates ``H`` (fixed) or ``J`` (varying);
    ``neumann_terms[p]`` is the sup-norm (largest entry modulus) of the
    ``p``-th term, starting with ``p = 1``.
    """

    field: KernelField
    samples: np.ndarray
    neumann_terms: List[float]
    first_term: np.ndarray = field(repr=False, default=None)

    def deviation(self) -> float:
        """``sup |H - I|`` over the grid (largest entry modulus)."""
        I = np.eye(2)
        return _sup(self.samples - I)

    def second_order_defect(self) -> float:
        """``sup |H - I - W I|``."""
        return _sup(self.samples - np.eye(2) - self.first_term)

    def det_defect(self) -> float:
        S = self.samples
        det = S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] * S[..., 1, 0]
        return float(np.max(np.abs(det - 1)))

    def evaluate(self, z: complex) -> np.ndarray:
        """``I + (W H)(z)`` at an arbitrary point."""
        return np.eye(2) + cauchy_apply(self.field, self.samples, z)

    def norms_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["term_index", "sup_norm"])
        for p, v in enumerate(self.neumann_terms, start=1):
            wr.writerow([p, f"{v:.17g}"])
        return buf.getvalue()

    def to_json(self) -> str:
        g = self.field.grid
        S = self.samples
        grid_vals = [[[[f"{S[i, a, b, c].real:.17g}", f"{S[i, a, b, c].imag:.17g}"]
                       for b in range(2) for c in range(2)]
                      for a in range(g.angular_cells)] for i in range(g.radial_cells)]
        return json.dumps({"kind": self.field.kind, "n": self.field.n, "m": self.field.m,
                           "grid": g.to_dict(), "neumann_terms": [f"{v:.17g}" for v in
                                                                   self.neumann_terms],
                           "samples": grid_vals}, sort_keys=True)


def neumann_solve(field: KernelField, ctx: PrecisionContext = DEFAULT_CONTEXT,
                  max_terms: int = 40) -> DbarSolution:
    """Sum ``I + W I + W^2 I + ...`` on the grid.

    Raises
    ------
    DbarGateError
        ``sup |W I| >= 1/2`` (operator not contractive at this ``n``).
    DbarDivergenceError
        Three successive term ratios ``>= 1``.
    """
    g = field.grid
    shape = (g.radial_cells, g.angular_cells, 2, 2)
    term = np.zeros(shape, dtype=complex)
    term[..., 0, 0] = 1
    term[..., 1, 1] = 1
    total = term.copy()
    norms: List[float] = []
    first = None
    stop = max(ctx.tol, FLOAT_FLOOR)
    rising = 0
    for p in range(1, max_terms + 1):
        term = apply_operator(field, term)
        s = _sup(term)
        norms.append(s)
        if p == 1:
            first = term.copy()
            if s >= CONTRACTION_GATE:
                raise DbarGateError(f"sup|W I| = {s:.3g} >= {CONTRACTION_GATE}", s)
        total = total + term
        logger.debug("neumann term %d: %.3e", p, s)
        if s < stop:
            break
        if p >= 2 and s >= norms[-2]:
            rising += 1
            if rising >= 3:
                raise DbarDivergenceError("Neumann terms stopped decreasing", norms)
        else:
            rising = 0
    return DbarSolution(field, total, norms, first)


# ---------------------------------------------------------------------------
# lemma checks
# ---------------------------------------------------------------------------

def _theta_integral(r_src: float, r: float) -> float:
    """``int_{-pi}^{pi} dtheta' / |r' e^{i theta'} - r|`` via the complete elliptic integral."""
    s = r_src + r
    q = ((r_src - r) / s) ** 2          # complementary parameter 1 - m
    if q == 0:
        return math.inf
    return 4.0 * float(special.ellipkm1(q)) / s


def keybound_lhs(n: int, nu: float, epsilon: float, r: float) -> float:
    """``int r' dr' e^{-n|log r'|} |log r'|^{nu-1} int dtheta'/|z'-z|`` at ``|z| = r``."""
    lo, hi = 2.0 ** (-epsilon), 2.0 ** epsilon

    def f(rp):
        L = abs(math.log(rp))
        return rp * math.exp(-n * L) * L ** (nu - 1) * _theta_integral(rp, r)

    pts = sorted({1.0} | ({r} if lo < r < hi else set()))
    edges = [lo] + pts + [hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        inner = [x for x in (1.0 + 1.0 / n, 1.0 - 1.0 / n) if a < x < b]
        val, _ = integrate.quad(f, a, b, points=inner or None, limit=400,
                                epsabs=1e-14, epsrel=1e-10)
        total += val
    return total


@dataclass
class KeyboundRow:
    n: int
    lhs: float
    scaled: float          # lhs / (log n / n^nu), or lhs * n^nu away from the annulus
    argmax_r: float


@dataclass
class KeyboundTable:
    nu: float
    epsilon: float
    rows: List[KeyboundRow]
    away_rows: List[KeyboundRow]
    exponent: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["variant", "n", "lhs", "scaled", "argmax_r"])
        for tag, rows in (("uniform", self.rows), ("away", self.away_rows)):
            for row in rows:
                wr.writerow([tag, row.n, f"{row.lhs:.12g}", f"{row.scaled:.12g}",
                             f"{row.argmax_r:.12g}"])
        return buf.getvalue()


def verify_keybound(nu: float, epsilon: float, n_list: Sequence[int],
                    ctx: PrecisionContext = DEFAULT_CONTEXT, away_radius: float = 4.0,
                    radii: Optional[Sequence[float]] = None) -> KeyboundTable:
    """Sup over ``|z|`` of the Laplace-type Cauchy integral, for each ``n``.

    By rotation invariance only ``|z|`` matters; the sup is taken over a radial
    sample that includes ``r = 1`` and points on either side at spacing ``1/n``.
    The fitted exponent is the slope of ``log lhs`` against ``log n``.
    """
    if nu < 1:
        raise ValueError("nu must be >= 1")
    rows, away = [], []
    for n in n_list:
        sample = radii if radii is not None else \
            sorted({1.0} | {math.exp(s / n) for s in (-3, -2, -1, -0.5, 0.5, 1, 2, 3)}
                   | {2.0 ** (-epsilon), 2.0 ** epsilon})
        vals = [(keybound_lhs(n, nu, epsilon, r), r) for r in sample]
        best, rbest = max(vals)
        rows.append(KeyboundRow(n, best, best / (math.log(n) / n ** nu), rbest))
        far = keybound_lhs(n, nu, epsilon, away_radius)
        away.append(KeyboundRow(n, far, far * n ** nu, away_radius))
    x = np.log([r.n for r in rows])
    y = np.log([r.lhs for r in rows])
    slope = float(np.polyfit(x, y, 1)[0]) if len(rows) >= 2 else float("nan")
    return KeyboundTable(nu, epsilon, rows, away, slope)


@dataclass(frozen=True)
class ExponentControl:
    mu: float
    holds: bool
    m: int
    epsilon: float


def verify_exponent_control(sz: SzegoEvaluator, m: int, epsilon: float,
                            ctx: PrecisionContext = DEFAULT_CONTEXT, radial: int = 64,
                            angular: int = 512) -> ExponentControl:
    """Largest ``mu`` with ``|e^{-+ i E_m Omega}| <= r^{+-(1-mu)}`` on the sample.

    Both one-sided inequalities reduce to ``mu <= 1 - Im(E_m Omega)/log r``,
    so ``mu`` is the minimum of that quantity over the annulus sample.
    """
    if m < 2:
        raise ValueError("exponent control needs m >= 2")
    grid = AnnulusGrid(epsilon, 2 * (radial // 2), angular)
    th = grid.theta_centers
    derivs = omega_jet_on_ring(sz, m, th)
    r = grid.r_centers
    E, _ = _extension(derivs, m, r, th)
    L = np.log(r)[:, None]
    mu = float(np.min(1.0 - E.imag / L))
    return ExponentControl(mu, mu > 0, m, epsilon)


def choose_varying_epsilon(sz: SzegoEvaluator, m: int, start: float = 0.5,
                           min_epsilon: float = 1.0 / 64) -> float:
    """Halve ``epsilon`` from ``start`` until exponent control holds."""
    eps = start
    while eps >= min_epsilon:
        if verify_exponent_control(sz, m, eps).holds:
            return eps
        eps /= 2
    raise DomainError("exponent control fails for every tried epsilon")

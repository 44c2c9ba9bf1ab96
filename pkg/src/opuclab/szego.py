"""
Fourier analysis of the potential and the Szego apparatus.

The central object is :class:`SzegoEvaluator`, which provides

* ``N(z) = sum_{j>=1} V_{-j} z^{-j}`` for ``|z| >= 1`` and its reflection
  ``conjN(z) = conj(N(1/conj(z)))`` for ``|z| <= 1``;
* the conjugate function ``Omega = 2 Im N`` on the circle and its
  derivatives, ``kappa = theta + Omega`` and ``kappa'``;
* the Szego function ``S(z)``: ``e^{N}`` outside, ``e^{-V0 - conjN}`` inside.

For trigonometric polynomials everything is a finite sum.  For potentials
of finite smoothness the Fourier series converges too slowly to be useful
near the circle, so ``N`` is evaluated there from the Cauchy-type integral

    N(r e^{i theta}) = mean_u [ (V(theta+u) - V(theta)) e^{iu} / (r - e^{iu}) ]

with composite Gauss-Legendre rules split at the kinks of ``V`` and graded
toward ``u = 0`` when ``r`` is close to 1.  Subtracting ``V(theta)`` is
legitimate because ``mean_u e^{iu}/(r - e^{iu}) = 0`` for ``r >= 1`` and it
makes the integrand bounded uniformly up to the circle.  Grids use a dense
FFT spectrum instead (:class:`DenseSpectrum`).
"""

from __future__ import annotations

import functools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .numerics import (DEFAULT_CONTEXT, TWO_PI, PolarPoint, PrecisionContext,
                       circle_fourier_mp, circle_gauss_rule,
                       converge_by_doubling,
                       gl_nodes_np, is_mp, wrap_angle)
from .potentials import Potential

logger = logging.getLogger(__name__)

#: largest truncation order tried when building a FourierTable
DEFAULT_M_CAP = 256


class DomainError(ValueError):
    """Evaluation requested outside the domain of a formula."""


# ---------------------------------------------------------------------------
# Fourier table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FourierTable:
    """Fourier coefficients ``V_j``, ``0 <= j <= M_trunc`` (``V_{-j} = conj V_j``).

    Attributes
    ----------
    V0 : mpf
        Circle mean of ``V``.
    coefficients : dict
        ``j -> V_j`` as mpc for ``j >= 0``.
    tail_bound : float
        Bound on ``sum_{|j| > M_trunc} |V_j|``.
    certified : bool
        Whether ``tail_bound < ctx.tol``.
    exact : bool
        Set for trigonometric polynomials (no truncation at all).
    """

    V0: object
    M_trunc: int
    coefficients: Dict[int, object]
    tail_bound: float
    certified: bool
    exact: bool = False
    bits: int = 256

    def coeff(self, j: int):
        """``V_j`` for any integer ``j`` (zero beyond the truncation)."""
        c = self.coefficients.get(abs(j))
        if c is None:
            return 0
        return c if j >= 0 else c.conjugate()

    def to_json(self) -> str:
        digits = int(self.bits * math.log10(2)) + 2
        mp = PrecisionContext(self.bits).mp
        pairs = []
        for j in sorted(self.coefficients):
            for jj in ((j, -j) if j else (0,)):
                c = mp.mpc(self.coeff(jj))
                pairs.append([jj, mp.nstr(c.real, digits), mp.nstr(c.imag, digits)])
        doc = {"V0": mp.nstr(mp.mpf(self.V0), digits), "M_trunc": self.M_trunc,
               "pairs": pairs, "tail_bound": self.tail_bound,
               "certified": self.certified, "exact": self.exact, "bits": self.bits}
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "FourierTable":
        doc = json.loads(text)
        mp = PrecisionContext(int(doc.get("bits", 256))).mp
        coeffs = {}
        for j, re, im in doc["pairs"]:
            if j >= 0:
                coeffs[int(j)] = mp.mpc(re, im)
        return cls(mp.mpf(doc["V0"]), int(doc["M_trunc"]), coeffs, float(doc["tail_bound"]),
                   bool(doc["certified"]), bool(doc.get("exact", False)), int(doc.get("bits", 256)))


def total_variation_of_top_derivative(V: Potential, samples_per_arc: int = 4000) -> float:
    """Total variation of ``V^(k)`` over the circle, jumps included."""
    k = V.smoothness_k
    angles = list(V.jump_angles)
    arcs = [(angles[i], angles[i + 1]) for i in range(len(angles) - 1)]
    if angles:
        arcs.append((angles[-1], angles[0] + TWO_PI))
    else:
        arcs = [(-math.pi, math.pi)]
    tv = 0.0
    for a, b in arcs:
        t = np.linspace(a, b, samples_per_arc)
        d = np.asarray(V.jet(t[1:-1], k)[k])
        lo = V.derivative(a, k, +1)
        hi = V.derivative(b, k, -1)
        seq = np.concatenate([[lo], d, [hi]])
        tv += float(np.sum(np.abs(np.diff(seq))))
    for a in angles:
        tv += abs(float(V.derivative(a, k, +1) - V.derivative(a, k, -1)))
    return tv


def coefficient_tail_bound(tv: float, k: int, M: int) -> float:
    """Bound on ``sum_{|j|>M} |V_j|`` from ``|V_j| <= TV(V^(k)) / (2 pi |j|^{k+1})``."""
    return tv / (math.pi * k * M ** k)


@functools.lru_cache(maxsize=32)
def _build_fourier_cached(V: Potential, bits: int, base_quad_points: int, M_cap: int):
    ctx = PrecisionContext(bits, base_quad_points)
    mp = ctx.mp
    exact = V.fourier_exact()
    if exact is not None:
        coeffs = {j: mp.mpc(c) for j, c in exact.items()}
        coeffs.setdefault(0, mp.mpc(0))
        coeffs[0] = mp.mpc(coeffs[0].real)
        M = max(coeffs) if coeffs else 0
        return FourierTable(mp.mpf(coeffs[0].real), M, coeffs, 0.0, True, True, bits)

    k = V.smoothness_k
    tv = total_variation_of_top_derivative(V)
    M = 16
    while M < M_cap and coefficient_tail_bound(tv, k, M) >= ctx.tol:
        M *= 2
    tail = coefficient_tail_bound(tv, k, M)
    certified = tail < ctx.tol
    if not certified:
        logger.info("FourierTable truncated at M=%d with tail bound %.3e (> tol %.1e)",
                    M, tail, ctx.tol)
    vals = circle_fourier_mp(lambda t: V(t), M, V.breakpoints(mp), ctx)
    coeffs = {j: vals[j] for j in range(M + 1)}
    coeffs[0] = mp.mpc(vals[0].real)
    return FourierTable(mp.mpf(vals[0].real), M, coeffs, tail, certified, False, bits)


def build_fourier(V: Potential, ctx: PrecisionContext = DEFAULT_CONTEXT,
                  M_cap: int = DEFAULT_M_CAP) -> FourierTable:
    """Fourier table of ``V``.

    Trigonometric polynomials are copied exactly.  Otherwise coefficients
    come from :func:`~opuclab.numerics.circle_fourier_mp` between the kink angles and
    ``M_trunc`` is the smallest power of two (>= 16) whose bounded-variation
    tail bound is below ``ctx.tol``, capped at ``M_cap``; a capped table is
    flagged ``certified=False`` and carries its achieved bound.
    """
    return _build_fourier_cached(V, ctx.mantissa_bits, ctx.base_quad_points, M_cap)


# ---------------------------------------------------------------------------
# dense float spectrum for grids
# ---------------------------------------------------------------------------

class DenseSpectrum:
    """Double-precision ``V_j`` for ``0 <= j <= J`` from an oversampled FFT."""

    def __init__(self, V: Potential, J: int = 2 ** 15, oversample: int = 4):
        n = J * oversample
        theta = -math.pi + TWO_PI * np.arange(n) / n
        vals = np.asarray(V(theta), dtype=float)
        c = np.fft.fft(vals) / n
        # shift from nodes starting at -pi: multiply by e^{i j pi} = (-1)^j
        j = np.arange(n)
        c = c * np.where(j % 2 == 0, 1.0, -1.0)
        self.J = J
        self.coeffs = c[: J + 1].copy()          # V_j, j >= 0
        self.V0 = float(c[0].real)

    def N_points(self, z: np.ndarray, chunk: int = 256) -> np.ndarray:
        """``N(z)`` at arbitrary points with ``|z| >= 1`` (direct sum)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(np.abs(z) < 1 - 1e-14):
            raise DomainError("N is defined for |z| >= 1")
        vm = np.conj(self.coeffs[1:])                      # V_{-j}
        jj = np.arange(1, self.J + 1)
        out = np.empty(z.shape, dtype=complex)
        flat = z.ravel()
        res = out.ravel()
        for s in range(0, flat.size, chunk):
            zz = flat[s:s + chunk]
            logw = -np.log(zz)[:, None] * jj[None, :]
            res[s:s + chunk] = np.exp(logw) @ vm
        return out

    def N_ring(self, r: float, n_angles: int, theta0: float) -> np.ndarray:
        """``N(r e^{i theta_l})`` at ``theta_l = theta0 + 2 pi l / n_angles`` (``r >= 1``)."""
        if r < 1 - 1e-14:
            raise DomainError("N is defined for |z| >= 1")
        jj = np.arange(1, self.J + 1)
        c = np.conj(self.coeffs[1:]) * np.exp(-jj * math.log(r)) * np.exp(-1j * jj * theta0)
        folded = np.zeros(n_angles, dtype=complex)
        np.add.at(folded, jj % n_angles, c)
        # sum_q folded[q] e^{-2 pi i q l / n}
        return np.fft.fft(folded)

    def Omega(self, theta: np.ndarray) -> np.ndarray:
        return 2.0 * np.imag(self.N_points(np.exp(1j * np.asarray(theta, dtype=float))))


# ---------------------------------------------------------------------------
# the evaluator
# ---------------------------------------------------------------------------

def _graded_breaks(d: float, limit: float = 0.5) -> List[float]:
    out = []
    s = d
    while s < limit:
        out.extend((-s, s))
        s *= 2.0
    return out


@dataclass
class SzegoEvaluator:
    """Szego apparatus for a potential ``V`` and its Fourier table.

    Parameters
    ----------
    V : Potential
    table : FourierTable
    ctx : PrecisionContext
    float_nodes : int
        Gauss nodes per arc for the double-precision integrals.
    float_arc : float
        Longest arc for the double-precision integrals.
    """

    V: Potential
    table: FourierTable
    ctx: PrecisionContext = DEFAULT_CONTEXT
    float_nodes: int = 32
    float_arc: float = 0.25
    _dense: Optional[DenseSpectrum] = field(default=None, repr=False)

    # -- basic data ------------------------------------------------------------
    @property
    def V0(self):
        return self.table.V0

    @property
    def exact(self) -> bool:
        return self.table.exact

    @property
    def dense(self) -> DenseSpectrum:
        if self._dense is None:
            self._dense = DenseSpectrum(self.V)
        return self._dense

    def _series_N(self, z, mp=None):
        """Truncated series ``sum_{j=1}^{M} V_{-j} z^{-j}`` (exact for trig polynomials)."""
        tbl = self.table
        if mp is None:
            z = np.asarray(z, dtype=complex)
            out = np.zeros_like(z)
            for j in range(1, tbl.M_trunc + 1):
                c = tbl.coefficients.get(j)
                if c is not None and c != 0:
                    out = out + complex(c).conjugate() * z ** (-j)
            return out
        w = 1 / mp.mpc(z)
        acc = mp.mpc(0)
        p = mp.mpc(1)
        for j in range(1, tbl.M_trunc + 1):
            p *= w
            c = tbl.coefficients.get(j)
            if c is not None:
                acc += c.conjugate() * p
        return acc

    def _series_ok(self, r: float) -> bool:
        if self.exact:
            return True
        M = self.table.M_trunc
        return math.log(r) * M > 40.0 + math.log(max(1.0, M)) and self.table.tail_bound < 1

    # -- N by the subtracted Cauchy integral ---------------------------------------
    def _u_breaks(self, theta: float, r: float) -> List[float]:
        bps = [0.0]
        if r > 1.0:
            bps += _graded_breaks(math.log(r))
        for a in self.V.jump_angles:
            u = wrap_angle(a - theta)
            bps.append(u)
        bps = sorted(set(round(b, 15) for b in bps))
        return bps

    def _float_rule(self, bps: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        x, w = gl_nodes_np(self.float_nodes)
        us, ws = [], []
        arcs = [(bps[i], bps[i + 1]) for i in range(len(bps) - 1)]
        arcs.append((bps[-1], bps[0] + TWO_PI))
        for a, b in arcs:
            pieces = max(1, int(math.ceil((b - a) / self.float_arc)))
            h = (b - a) / pieces
            for p in range(pieces):
                lo = a + p * h
                us.append(lo + h / 2 * (x + 1))
                ws.append(h / 2 * w)
        return np.concatenate(us), np.concatenate(ws) / TWO_PI

    def _N_integral_float(self, r: float, theta: float, order: int = 0) -> complex:
        """``N^{[p]}(r e^{i theta})``: the integral with ``V`` replaced by ``V^(p)``."""
        u, w = self._float_rule(self._u_breaks(theta, r))
        vp = np.asarray(self.V.jet(theta + u, order)[order])
        v0 = float(self.V.derivative(theta, order))
        eu = np.exp(1j * u)
        if r == 1.0:
            kern = -0.5 + 0.5j / np.tan(u / 2)
        else:
            kern = eu / (r - eu)
        return complex(np.sum(w * (vp - v0) * kern))

    def _N_integral_mp(self, r, theta, order: int = 0):
        mp = self.ctx.mp
        theta = mp.mpf(theta)
        r = mp.mpf(r)
        bps = [mp.zero]
        if r > 1:
            bps += [mp.mpf(b) for b in _graded_breaks(float(mp.log(r)))]
        for i in range(len(self.V.jump_angles)):
            a = self.V._mp_angle(i, mp)
            bps.append(wrap_angle(a - theta))
        bps = sorted(set(bps))
        v0 = self.V.derivative(theta, order)

        def compute(level):
            acc = mp.mpc(0)
            for u, w in circle_gauss_rule(bps, level, self.ctx, max_arc=1.0):
                vu = self.V.derivative(theta + u, order)
                if r == 1:
                    kern = mp.mpc(-0.5, mp.cot(u / 2) / 2)
                else:
                    eu = mp.expj(u)
                    kern = eu / (r - eu)
                acc += w * (vu - v0) * kern
            return acc

        val, _, _ = converge_by_doubling(compute, 5, self.ctx, n_segments=len(bps) + 8)
        return val

    # -- public evaluators -----------------------------------------------------------
    def N(self, z, precise: bool = False):
        """``N(z)`` for ``|z| >= 1``.

        ``z`` may be complex, a complex array, or an mpc (extended precision).
        ``precise`` forces the extended-precision route for complex input.
        """
        mp = self.ctx.mp
        use_mp = is_mp(z) or precise
        if use_mp:
            z = mp.mpc(z)
            r = abs(z)
            if r < 1 - mp.mpf(2) ** (-self.ctx.mantissa_bits + 8):
                raise DomainError("N is defined for |z| >= 1")
            if r < 1:
                r = mp.one
            if self.exact or self._series_ok(float(r)):
                if r == 1 and not self.exact:
                    return self._N_integral_mp(r, mp.arg(z))
                return self._series_N(z, mp)
            return self._N_integral_mp(r, mp.arg(z))
        zz = np.asarray(z, dtype=complex)
        rr = np.abs(zz)
        if np.any(rr < 1 - 1e-13):
            raise DomainError("N is defined for |z| >= 1")
        if self.exact:
            return self._series_N(zz)
        out = np.empty(zz.shape, dtype=complex)
        for idx in np.ndindex(zz.shape):
            r = max(1.0, float(rr[idx]))
            th = math.atan2(zz[idx].imag, zz[idx].real)
            if self._series_ok(r):
                out[idx] = complex(self._series_N(np.asarray(zz[idx])))
            else:
                out[idx] = self._N_integral_float(r if r - 1.0 > 1e-15 else 1.0, th)
        return out if out.shape else complex(out)

    def conjN(self, z, precise: bool = False):
        """``conj(N(1/conj(z)))`` for ``0 < |z| <= 1``; equals 0 at ``z = 0``."""
        if is_mp(z) or precise:
            mp = self.ctx.mp
            z = mp.mpc(z)
            if z == 0:
                return mp.mpc(0)
            if abs(z) > 1 + mp.mpf(2) ** (-self.ctx.mantissa_bits + 8):
                raise DomainError("conjN is defined for |z| <= 1")
            return self.N(1 / z.conjugate(), precise=True).conjugate()
        zz = np.asarray(z, dtype=complex)
        if np.any(np.abs(zz) > 1 + 1e-13):
            raise DomainError("conjN is defined for |z| <= 1")
        safe = np.where(zz == 0, 1.0, zz)
        val = np.conj(self.N(1.0 / np.conj(safe)))
        return np.where(zz == 0, 0.0, val) if np.ndim(val) else (0j if zz == 0 else complex(val))

    def N_circle(self, theta, precise: bool = False):
        """Boundary value ``N(e^{i theta}) = (V - V0)/2 + i Omega/2``."""
        if precise or is_mp(theta):
            return self._N_integral_mp(1, theta) if not self.exact else \
                self._series_N(self.ctx.mp.expj(self.ctx.mp.mpf(theta)), self.ctx.mp)
        return self.N(np.exp(1j * np.asarray(theta, dtype=float)))

    def Omega(self, theta, order: int = 0, precise: bool = False):
        """``Omega^(p)(theta)``, the conjugate function of ``V^(p)``.

        Satisfies ``Omega = 2 Im N(e^{i theta})``; for finite smoothness the
        order-``k`` derivative exists almost everywhere (log-singular at kinks).
        """
        if self.exact:
            return self._Omega_series(theta, order, precise)
        if precise or is_mp(theta):
            return 2 * self._N_integral_mp(1, theta, order).imag
        th = np.asarray(theta, dtype=float)
        out = np.empty(th.shape)
        for idx in np.ndindex(th.shape):
            out[idx] = 2.0 * self._N_integral_float(1.0, float(th[idx]), order).imag
        return out if out.shape else float(out)

    def _Omega_series(self, theta, order, precise):
        # Omega = 2 Im sum_j V_{-j} e^{-ij theta}; differentiate termwise
        tbl = self.table
        if precise or is_mp(theta):
            mp = self.ctx.mp
            theta = mp.mpf(theta)
            acc = mp.mpf(0)
            for j, c in tbl.coefficients.items():
                if j >= 1:
                    acc += 2 * (c.conjugate() * (-1j * j) ** order * mp.expj(-j * theta)).imag
            return acc
        th = np.asarray(theta, dtype=float)
        acc = np.zeros(th.shape)
        for j, c in tbl.coefficients.items():
            if j >= 1:
                acc = acc + 2 * np.imag(complex(c).conjugate() * (-1j * j) ** order
                                        * np.exp(-1j * j * th))
        return acc if acc.shape else float(acc)

    def kappa(self, theta, precise: bool = False):
        return theta + self.Omega(theta, 0, precise)

    def kappa_prime(self, theta, precise: bool = False):
        return 1 + self.Omega(theta, 1, precise)

    def S(self, z, side: int = 0):
        """Szego function; on ``|z| = 1`` pass ``side=+1`` (outside) or ``-1`` (inside)."""
        mp_in = is_mp(z)
        mp = self.ctx.mp
        r = abs(z)
        if mp_in:
            on = abs(r - 1) < mp.mpf(2) ** (-self.ctx.mantissa_bits + 8)
        else:
            on = abs(r - 1) < 1e-14
        exp = mp.exp if mp_in else np.exp
        if on:
            if side == 0:
                raise DomainError("S on the circle needs side=+1 or side=-1")
            th = mp.arg(z) if mp_in else math.atan2(z.imag, z.real)
            nb = self.N_circle(th, precise=mp_in)
            if side > 0:
                return exp(nb)
            V0 = self.V0 if mp_in else float(self.V0)
            return exp(-V0 - nb.conjugate())
        if r > 1:
            return exp(self.N(z))
        V0 = self.V0 if mp_in else float(self.V0)
        return exp(-V0 - self.conjN(z))

    # -- grids --------------------------------------------------------------------------
    def N_on_grid(self, radii: np.ndarray, n_angles: int, theta0: float) -> np.ndarray:
        """``N`` on a polar lattice with all ``radii >= 1`` (rows = radii)."""
        if self.exact:
            th = theta0 + TWO_PI * np.arange(n_angles) / n_angles
            Z = np.asarray(radii)[:, None] * np.exp(1j * th)[None, :]
            return self._series_N(Z)
        return np.stack([self.dense.N_ring(float(r), n_angles, theta0) for r in radii])

    def conjN_on_grid(self, radii: np.ndarray, n_angles: int, theta0: float) -> np.ndarray:
        """``conjN`` on a polar lattice with all ``radii <= 1``."""
        return np.conj(self.N_on_grid(1.0 / np.asarray(radii), n_angles, theta0))


def omega_jet_on_ring(sz: SzegoEvaluator, order: int, theta: np.ndarray) -> List[np.ndarray]:
    """``Omega^(p)`` for ``p <= order`` on equally spaced angles."""
    if sz.exact:
        return [np.asarray(sz.Omega(theta, p), dtype=float) for p in range(order + 1)]
    c = sz.dense.coeffs[1:]
    keep = np.abs(c) > 1e-17 * max(1e-300, float(np.max(np.abs(c))))
    J = int(np.nonzero(keep)[0].max()) + 1 if keep.any() else 0
    jj = np.arange(1, J + 1)
    a = np.conj(c[:J])
    n_ang = theta.size
    theta0 = float(theta[0])
    out = []
    for p in range(order + 1):
        coef = a * (-1j * jj) ** p * np.exp(-1j * jj * theta0)
        folded = np.zeros(n_ang, dtype=complex)
        np.add.at(folded, jj % n_ang, coef)
        out.append(2.0 * np.imag(np.fft.fft(folded)))
    return out


def szego_apparatus(V: Potential, ctx: PrecisionContext = DEFAULT_CONTEXT,
                    table: Optional[FourierTable] = None) -> SzegoEvaluator:
    """Build the evaluator (and the Fourier table unless one is supplied)."""
    if table is None:
        table = build_fourier(V, ctx)
    return SzegoEvaluator(V, table, ctx)


# ---------------------------------------------------------------------------
# extension operator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtensionSample:
    """``E_m f`` and its ``dbar`` and ``d`` derivatives at one point (or a grid)."""

    m: int
    value: object
    dbar: object
    dz: object


def extension_from_derivatives(derivs: Sequence, m: int, r, theta) -> ExtensionSample:
    """Extension from precomputed ``f^(0), ..., f^(m)`` at ``theta``.

    ``value = sum_{p<m} f^(p) L^p / p!`` with ``L = -i log r``;
    ``dbar = (i e^{i theta} / 2r) f^(m) L^{m-1} / (m-1)!``;
    ``dz = -(i e^{-i theta} / 2r) [f^(m) L^{m-1}/(m-1)! + 2 sum_{p<=m-2} f^(p+1) L^p/p!]``.
    Works elementwise for numpy arrays.
    """
    if m < 1:
        raise ValueError("extension order m must be >= 1")
    if len(derivs) < m + 1:
        raise ValueError(f"extension of order {m} needs derivatives up to order {m}")
    if is_mp(r) or is_mp(theta):
        mp = (r if is_mp(r) else theta).context
        if r <= 0:
            raise DomainError("extension needs r > 0")
        L = -1j * mp.log(r)
        e_pos, e_neg = mp.expj(theta), mp.expj(-theta)
    else:
        if np.any(np.asarray(r) <= 0):
            raise DomainError("extension needs r > 0")
        L = -1j * np.log(r)
        e_pos, e_neg = np.exp(1j * np.asarray(theta)), np.exp(-1j * np.asarray(theta))
    powers = [1]
    for p in range(1, m):
        powers.append(powers[-1] * L / p)        # L^p / p!
    value = sum(derivs[p] * powers[p] for p in range(m))
    top = derivs[m] * powers[m - 1]
    dbar = 1j * e_pos / (2 * r) * top
    inner = top + 2 * sum((derivs[p + 1] * powers[p] for p in range(m - 1)), 0)
    dz = -1j * e_neg / (2 * r) * inner
    return ExtensionSample(m, value, dbar, dz)


def extend(f_derivs: Sequence[Callable], m: int, p: PolarPoint) -> ExtensionSample:
    """Order-``m`` extension of a circle function off the circle.

    Parameters
    ----------
    f_derivs : sequence of callables
        ``f^(0), ..., f^(m)``; ``f^(m)`` may be defined almost everywhere.
    m : int
        Extension order; ``dbar`` vanishes to order ``m - 1`` at ``r = 1``.
    p : PolarPoint
    """
    if p.r <= 0:
        raise DomainError("extension needs r > 0")
    derivs = [f(p.theta) for f in f_derivs[: m + 1]]
    return extension_from_derivatives(derivs, m, p.r, p.theta)


# ---------------------------------------------------------------------------
# sufficient conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionResult:
    """Value of a sufficient-condition functional and the verdict.

    Iterates as ``(value, holds)``.
    """

    value: float
    holds: bool
    tail: float = 0.0

    def __iter__(self):
        return iter((self.value, self.holds))


def check_condition_t(table: FourierTable, V: Optional[Potential] = None) -> ConditionResult:
    """``sum_j |j| |V_j| < 1``, with a tail bound for truncated tables.

    The tail uses ``|V_j| <= TV(V^(k)) / (2 pi |j|^{k+1})`` and needs ``V``;
    for ``k = 1`` it is infinite.
    """
    s = 2.0 * sum(j * abs(complex(c)) for j, c in table.coefficients.items() if j > 0)
    tail = 0.0
    if not table.exact:
        if V is None or V.smoothness_k is None:
            tail = float("inf")
        else:
            k = V.smoothness_k
            tv = total_variation_of_top_derivative(V)
            M = table.M_trunc
            tail = float("inf") if k < 2 else tv / math.pi * M ** (1 - k) / (k - 1)
    return ConditionResult(s, s + tail < 1.0, tail)


def _dense_angles(V: Potential, n: int = 2 ** 12, offset: float = 1e-6) -> np.ndarray:
    th = -math.pi + TWO_PI * (np.arange(n) + 0.5) / n
    extra = []
    for a in V.jump_angles:
        extra += [a - offset, a + offset]
    return np.concatenate([th, np.asarray(extra, dtype=float)])


def check_condition_convex(V: Potential, ctx: PrecisionContext = DEFAULT_CONTEXT) -> ConditionResult:
    """``V'' > -1/2`` everywhere; closed-form infimum when the family has one."""
    inf = V.vpp_inf_exact()
    if inf is None:
        th = _dense_angles(V)
        vals = np.asarray(V.jet(th, 2, +1)[2])
        for a in V.jump_angles:
            vals = np.append(vals, [V.derivative(a, 2, +1), V.derivative(a, 2, -1)])
        inf = float(np.min(vals))
    return ConditionResult(float(inf), inf > -0.5)


def kappa_prime_margin(sz: SzegoEvaluator, n: int = 2 ** 12) -> float:
    """``min kappa'`` over ``n`` angles plus every kink angle +- 1e-6."""
    th = _dense_angles(sz.V, n)
    return float(np.min(sz.kappa_prime(th)))

"""
Zeros of ``pi_n`` and their comparison with the predicted geometry.

Roots are found by Aberth iteration, first in double precision and then
polished in extended precision (gmpy2) until every Newton-Aberth step is
below ``ctx.tol``.  A companion-matrix eigenvalue solver serves as an
independent oracle for small degree.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import gmpy2
import numpy as np

from .asymptotics import RationalFn, attract_radius
from .numerics import (DEFAULT_CONTEXT, TWO_PI, PrecisionContext, _gmpy_to_mpf, _mpc_to_gmpy,
                       is_mp)
from .szego import SzegoEvaluator

logger = logging.getLogger(__name__)


class RootFindingError(ArithmeticError):
    """Aberth iteration did not converge for some roots."""

    def __init__(self, message: str, unconverged: Sequence[int]):
        super().__init__(message)
        self.unconverged = list(unconverged)


@dataclass
class ZeroSet:
    """Roots of a monic polynomial in extended precision.

    Attributes
    ----------
    roots : list of mpc
    n : int
        Degree.
    residuals : list of float
        ``|p(root)|`` evaluated at working precision.
    unconverged : list of int
        Indices whose last Aberth step exceeded the tolerance.
    """

    roots: List
    n: int
    residuals: List[float]
    bits: int
    unconverged: List[int] = field(default_factory=list)
    sweeps: int = 0

    def as_complex(self) -> np.ndarray:
        return np.array([complex(r) for r in self.roots])

    def clusters(self, radius: float) -> List[Tuple[complex, int]]:
        """Roots merged when closer than ``radius``: ``(center, multiplicity)``."""
        pts = self.as_complex()
        used = np.zeros(pts.size, dtype=bool)
        out = []
        for i in range(pts.size):
            if used[i]:
                continue
            near = (~used) & (np.abs(pts - pts[i]) < radius)
            used |= near
            out.append((complex(np.mean(pts[near])), int(near.sum())))
        return out

    def vieta_defects(self, coeffs: Sequence) -> Tuple[float, float]:
        """``|sum z + c_{n-1}|`` and ``|e_2(z) - c_{n-2}|``."""
        mp = PrecisionContext(self.bits).mp
        s1 = sum(self.roots, mp.mpc(0))
        s2 = sum((r * r for r in self.roots), mp.mpc(0))
        e2 = (s1 * s1 - s2) / 2
        d1 = abs(s1 + mp.mpc(coeffs[self.n - 1]))
        d2 = abs(e2 - mp.mpc(coeffs[self.n - 2])) if self.n >= 2 else mp.zero
        return float(d1), float(d2)


def _as_mp_coeffs(coeffs: Sequence, mp) -> List:
    return [mp.mpc(c) if not is_mp(c) else mp.mpc(c) for c in coeffs]


def _aberth_float(c: np.ndarray, z: np.ndarray, max_iter: int = 500) -> np.ndarray:
    """Double-precision Aberth sweeps; ``c`` ascending, monic."""
    n = c.size - 1
    dc = c[1:] * np.arange(1, n + 1)
    for _ in range(max_iter):
        p = np.full(z.shape, c[-1], dtype=complex)
        for a in c[-2::-1]:
            p = p * z + a
        dp = np.full(z.shape, dc[-1], dtype=complex)
        for a in dc[-2::-1]:
            dp = dp * z + a
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = np.sum(1.0 / diff, axis=1)
            w = ratio / (1.0 - ratio * s)
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.max(np.abs(w)) < 1e-14 * max(1.0, float(np.max(np.abs(z)))):
            break
    return z


def _aberth_mp(c: List, z: List, bits: int, tol: float, max_sweeps: int = 200):
    """Extended-precision Aberth polishing in gmpy2; returns (roots, steps, sweeps)."""
    n = len(c) - 1
    with gmpy2.context(gmpy2.get_context(), precision=bits + 16):
        gc = [_mpc_to_gmpy(a) for a in c]
        gdc = [gc[j] * j for j in range(1, n + 1)]
        gz = [gmpy2.mpc(complex(v)) if not is_mp(v) else _mpc_to_gmpy(v) for v in z]
        steps = [math.inf] * n
        sweeps = 0
        for sweeps in range(1, max_sweeps + 1):
            worst = 0.0
            for i in range(n):
                zi = gz[i]
                p = gc[n]
                for a in reversed(gc[:n]):
                    p = p * zi + a
                dp = gdc[n - 1]
                for a in reversed(gdc[:n - 1]):
                    dp = dp * zi + a
                if p == 0:
                    steps[i] = 0.0
                    continue
                s = gmpy2.mpc(0)
                for j in range(n):
                    if j != i:
                        d = zi - gz[j]
                        if d != 0:
                            s += 1 / d
                if dp == 0:
                    w = gmpy2.mpc(tol * 1e3)
                else:
                    ratio = p / dp
                    w = ratio / (1 - ratio * s)
                gz[i] = zi - w
                st = float(abs(w))
                steps[i] = st
                worst = max(worst, st)
            if worst < tol:
                break
        return gz, steps, sweeps


def _eval_gmpy(gc, z):
    p = gc[-1]
    for a in reversed(gc[:-1]):
        p = p * z + a
    return p


def find_zeros(coeffs: Sequence, ctx: PrecisionContext = DEFAULT_CONTEXT,
               strict: bool = False) -> ZeroSet:
    """All roots of a monic polynomial (coefficients ascending, ``c_n = 1``).

    Trailing coefficients below the working-precision noise floor
    (``2^{-bits+8}`` relative to the largest) are treated as exact zeros,
    so ``z^n`` and numerically computed ``z^n`` both give a root cluster at 0.

    Raises
    ------
    ValueError
        Degree < 1 or non-monic input.
    RootFindingError
        Only when ``strict`` and some roots failed to converge.
    """
    mp = ctx.mp
    c = _as_mp_coeffs(coeffs, mp)
    n = len(c) - 1
    if n < 1:
        raise ValueError("degree must be >= 1")
    if abs(c[-1] - 1) > 1e-30:
        raise ValueError("polynomial must be monic")
    scale = max(abs(a) for a in c)
    floor = scale * mp.mpf(2) ** (-ctx.mantissa_bits + 8)
    m = 0
    while m < n and abs(c[m]) <= floor:
        m += 1
    red = c[m:]
    d = n - m
    roots: List = [mp.mpc(0)] * m
    steps: List[float] = [0.0] * m
    sweeps = 0
    if d >= 1:
        cf = np.array([complex(a) for a in red])
        rad = abs(cf[0]) ** (1.0 / d) if cf[0] != 0 else 1.0
        ang = TWO_PI * (np.arange(d) + 0.25) / d + 0.1 / max(d, 1)
        z0 = rad * np.exp(1j * ang)
        zf = _aberth_float(cf, z0)
        gz, st, sweeps = _aberth_mp(red, list(zf), ctx.mantissa_bits, ctx.tol)
        roots += [mp.mpc(_gmpy_to_mpf(v.real, mp), _gmpy_to_mpf(v.imag, mp)) for v in gz]
        steps += st
    with gmpy2.context(gmpy2.get_context(), precision=ctx.mantissa_bits + 16):
        gc = [_mpc_to_gmpy(a) for a in c]
        residuals = [float(abs(_eval_gmpy(gc, _mpc_to_gmpy(r)))) for r in roots]
    bad = [i for i, s in enumerate(steps) if not s < ctx.tol]
    zs = ZeroSet(roots, n, residuals, ctx.mantissa_bits, bad, sweeps)
    if bad:
        msg = f"{len(bad)} of {n} roots did not converge"
        logger.warning(msg)
        if strict:
            raise RootFindingError(msg, bad)
    return zs


def companion_zeros(coeffs: Sequence, bits: int = 128) -> List:
    """Eigenvalues of the companion matrix (oracle for degree <= 32)."""
    n = len(coeffs) - 1
    if n > 32:
        raise ValueError("companion oracle is meant for degree <= 32")
    mp = PrecisionContext(bits).mp
    C = mp.zeros(n, n)
    for i in range(1, n):
        C[i, i - 1] = 1
    for i in range(n):
        C[i, n - 1] = -mp.mpc(coeffs[i])
    return list(mp.eig(C, left=False, right=False))


def match_distance(a: Sequence, b: Sequence) -> float:
    """Largest nearest-neighbour distance between two equal-size root lists."""
    A = np.array([complex(v) for v in a])
    B = [complex(v) for v in b]
    worst = 0.0
    for v in A:
        d = [abs(v - w) for w in B]
        j = int(np.argmin(d))
        worst = max(worst, d[j])
        B.pop(j)
    return worst


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def zero_free_verdict(zs: ZeroSet, k: int, delta: float, n: int, mode: str = "fixed",
                      sz: Optional[SzegoEvaluator] = None) -> List[int]:
    """Indices of zeros inside the region the corollaries declare zero-free.

    fixed: ``log|z| > -(k - delta) log n / n``;
    varying: ``log r > -((k - 1 - delta) / (1 + Omega'(theta))) log n / n``.
    """
    z = zs.as_complex()
    logr = np.log(np.maximum(np.abs(z), 1e-300))
    if mode == "fixed":
        bound = -(k - delta) * math.log(n) / n
        return [int(i) for i in np.nonzero(logr > bound)[0]]
    if sz is None:
        raise ValueError("varying verdict needs the Szego evaluator")
    th = np.angle(z)
    kp = 1.0 + np.asarray(sz.Omega(th, 1), dtype=float)
    bound = -((k - 1 - delta) / kp) * math.log(n) / n
    return [int(i) for i in np.nonzero(logr > bound)[0]]


@dataclass
class SpuriousMatch:
    fn_zero: complex
    pi_index: int
    distance: float


def match_spurious(zs: ZeroSet, fn: Optional[RationalFn], k: int, n: int
                   ) -> Tuple[List[SpuriousMatch], List[complex]]:
    """One-to-one matching of deep ``f_n`` zeros with zeros of ``pi_n``.

    ``f_n`` zeros with ``|z| <= 1 - (k+1) log n / n - 5/n`` are paired with the
    nearest ``pi_n`` zero within ``0.5 log n / n`` (greedy over increasing
    distance).  Returns the matches and the ``f_n`` zeros whose candidate was
    already taken (ambiguous).
    """
    if fn is None:
        return [], []
    cap = 1.0 - (k + 1) * math.log(n) / n - 5.0 / n
    radius = 0.5 * math.log(n) / n
    fz = [complex(v) for v in fn.zeros() if abs(v) <= cap]
    pz = zs.as_complex()
    pairs = []
    for a, f in enumerate(fz):
        d = np.abs(pz - f)
        for i in np.nonzero(d < radius)[0]:
            pairs.append((float(d[i]), a, int(i)))
    pairs.sort()
    used_f, used_p = set(), set()
    matches, ambiguous = [], []
    for dist, a, i in pairs:
        if a in used_f:
            continue
        if i in used_p:
            continue
        used_f.add(a)
        used_p.add(i)
        matches.append(SpuriousMatch(fz[a], i, dist))
    for a, f in enumerate(fz):
        if a not in used_f and any(p[1] == a for p in pairs):
            ambiguous.append(f)
    return matches, ambiguous


@dataclass
class NearCircleZero:
    index: int
    modulus_residual: float
    angle_residual: float


@dataclass
class ZeroClassification:
    """Zeros of ``pi_n`` sorted into near-circle, spurious and other.

    ``labels[i]`` is one of ``near_circle``, ``spurious``, ``other``;
    ``f_class[i]`` is ``+``, ``0`` or ``-`` (``log|f_n|`` against ``+-M``).
    """

    n: int
    k: int
    sigma: float
    M: float
    annulus: Tuple[float, float]
    labels: List[str]
    f_class: List[str]
    near_circle: List[NearCircleZero]
    gaps: np.ndarray
    spurious: List[SpuriousMatch]
    ambiguous: List[complex]
    violations: List[int]
    f_minus_hits: List[int]
    nearest_pole: List[int]

    def count(self, label: str) -> int:
        return sum(1 for v in self.labels if v == label)

    @property
    def mean_gap(self) -> float:
        return float(np.mean(self.gaps)) if self.gaps.size else float("nan")

    def to_csv(self, zs: ZeroSet) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "abs", "class", "f_class", "matched_pole_or_zero"])
        matched = {m.pi_index: m for m in self.spurious}
        for i, r in enumerate(zs.as_complex()):
            tag = ""
            if i in matched:
                f = matched[i].fn_zero
                tag = f"fzero:{f.real:.12g}{f.imag:+.12g}j"
            elif self.f_class[i] == "+":
                tag = f"pole:{self.nearest_pole[i] + 1}"
            w.writerow([f"{r.real:.17g}", f"{r.imag:.17g}", f"{abs(r):.17g}", self.labels[i],
                        self.f_class[i], tag])
        return buf.getvalue()


def _wrap_half(x: np.ndarray, period: float) -> np.ndarray:
    return (x + period / 2) % period - period / 2


def classify(zs: ZeroSet, fn: Optional[RationalFn], k: int, n: int, sigma: float = 0.5,
             M: float = 5.0, sz: Optional[SzegoEvaluator] = None,
             delta: float = 0.5) -> ZeroClassification:
    """Partition the zeros and test the modulus, angle and spacing predictions."""
    z = zs.as_complex()
    ln = math.log(n)
    lo = math.exp(-(k + 1) * ln / n - sigma / n)
    hi = math.exp(-(k - sigma) * ln / n)
    absz = np.abs(z)
    in_ann = (absz > lo) & (absz < hi)
    if fn is not None:
        with np.errstate(divide="ignore"):
            logf = np.log(np.abs(fn(z)))
        poles = fn.poles
        nearest = [int(np.argmin(np.abs(poles - v))) for v in z]
    else:
        logf = np.full(z.shape, -np.inf)
        nearest = [-1] * z.size
    f_class = ["+" if v > M else ("-" if v < -M else "0") for v in logf]
    matches, ambiguous = match_spurious(zs, fn, k, n)
    spurious_idx = {m.pi_index for m in matches}
    labels = []
    for i in range(z.size):
        if i in spurious_idx:
            labels.append("spurious")
        elif in_ann[i]:
            labels.append("near_circle")
        else:
            labels.append("other")
    near = [i for i in range(z.size) if labels[i] == "near_circle"]
    f_minus = [i for i in near if f_class[i] == "-"]
    entries = []
    if near and fn is not None:
        idx = np.array([i for i in near if f_class[i] != "-"], dtype=int)
        if idx.size:
            th = np.angle(z[idx])
            om = np.asarray(sz.Omega(th), dtype=float) if sz is not None else np.zeros(th.size)
            fz = fn(z[idx])
            mod_pred = attract_radius(n, k) + np.log(np.abs(fz)) / n
            ang_pred = -om / n + np.angle(fz) / n + math.pi / n
            ang_res = _wrap_half(th - ang_pred, TWO_PI / n)
            for j, i in enumerate(idx):
                entries.append(NearCircleZero(int(i), float(absz[i] - mod_pred[j]),
                                              float(ang_res[j])))
    if len(near) >= 2:
        th = np.sort(np.angle(z[near]))
        gaps = np.diff(np.concatenate([th, [th[0] + TWO_PI]]))
    else:
        gaps = np.zeros(0)
    violations = zero_free_verdict(zs, k, delta, n)
    return ZeroClassification(n, k, sigma, M, (lo, hi), labels, f_class, entries, gaps,
                              matches, ambiguous, violations, f_minus, nearest)


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def zeros_svg(zs: ZeroSet, n: int, k: Optional[int] = None, fn: Optional[RationalFn] = None,
              jump_angles: Sequence[float] = (), size: int = 480, title: str = "") -> str:
    """Scatter plot of zeros with the unit, attract and forbidden circles.

    Unit circle black, ``1 - (k+1) log n / n`` green, ``1 - k log n / n`` red,
    ``f_n`` zeros as large dots, ``pi_n`` zeros as small dots, ticks at the
    jump angles.
    """
    half = 1.2
    scale = size / (2 * half)

    def X(x):
        return _fmt((x + half) * scale)

    def Y(y):
        return _fmt((half - y) * scale)

    def R(r):
        return _fmt(r * scale)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">']
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<rect width="{size}" height="{size}" fill="white"/>')
    out.append(f'<circle cx="{X(0)}" cy="{Y(0)}" r="{R(1)}" fill="none" stroke="black" '
               f'stroke-width="1"/>')
    if k is not None and n > 1:
        ln = math.log(n)
        for rad, col in ((1 - (k + 1) * ln / n, "green"), (1 - k * ln / n, "red")):
            if rad > 0:
                out.append(f'<circle cx="{X(0)}" cy="{Y(0)}" r="{R(rad)}" fill="none" '
                           f'stroke="{col}" stroke-width="1"/>')
    for a in jump_angles:
        c, s = math.cos(a), math.sin(a)
        out.append(f'<line x1="{X(1.03 * c)}" y1="{Y(1.03 * s)}" x2="{X(1.12 * c)}" '
                   f'y2="{Y(1.12 * s)}" stroke="black" stroke-width="2"/>')
    if fn is not None:
        for v in fn.zeros():
            if abs(v) < half:
                out.append(f'<circle cx="{X(v.real)}" cy="{Y(v.imag)}" r="5" fill="blue"/>')
    for v in zs.as_complex():
        if abs(v) < half:
            out.append(f'<circle cx="{X(v.real)}" cy="{Y(v.imag)}" r="1.6" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

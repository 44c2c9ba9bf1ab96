"""
Real potentials ``V`` on the circle, with exact one-sided derivatives.

Every potential exposes :meth:`Potential.jet`, which returns the values of
``V, V', ..., V^(order)`` at an angle.  The angle may be a float, a numpy
array or an mpmath ``mpf``; the arithmetic follows the input type, so the
same closed form serves the double-precision grids and the extended
precision quadratures.  Derivatives are produced by truncated Taylor series
arithmetic rather than hand-written formulas, which keeps the families
short and the high orders exact.

At a kink angle the right limit is returned by default (``side=+1``);
``side=-1`` gives the left limit.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .numerics import TWO_PI, wrap_angle

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# backend dispatch and truncated Taylor series
# ---------------------------------------------------------------------------

class _NumpyBackend:
    sin = staticmethod(np.sin)
    cos = staticmethod(np.cos)
    exp = staticmethod(np.exp)
    log = staticmethod(np.log)
    pi = math.pi

    @staticmethod
    def where(cond, a, b):
        return np.where(cond, a, b)

    @staticmethod
    def zeros_like(x):
        return np.zeros_like(np.asarray(x, dtype=float))


class _MPBackend:
    def __init__(self, ctx):
        self.ctx = ctx
        self.sin = ctx.sin
        self.cos = ctx.cos
        self.exp = ctx.exp
        self.log = ctx.log
        self.pi = ctx.pi

    @staticmethod
    def where(cond, a, b):
        return a if cond else b

    def zeros_like(self, x):
        return self.ctx.zero


def backend_for(theta):
    """Pick the arithmetic that matches ``theta``."""
    ctx = getattr(theta, "context", None)
    if ctx is not None:
        return _MPBackend(ctx)
    return _NumpyBackend()


def ts_mul(a: List, b: List) -> List:
    n = len(a)
    return [sum(a[j] * b[i - j] for j in range(i + 1)) for i in range(n)]


def ts_pow(a: List, k: int) -> List:
    out = a
    for _ in range(k - 1):
        out = ts_mul(out, a)
    return out


def ts_log(a: List, be) -> List:
    n = len(a)
    b = [be.log(a[0])]
    for i in range(1, n):
        acc = a[i]
        for j in range(1, i):
            acc = acc - (j * b[j] * a[i - j]) / i
        b.append(acc / a[0])
    return b


def ts_exp(a: List, be) -> List:
    n = len(a)
    b = [be.exp(a[0])]
    for i in range(1, n):
        acc = 0
        for j in range(1, i + 1):
            acc = acc + j * a[j] * b[i - j]
        b.append(acc / i)
    return b


def _sin_series(x, scale, order, be) -> List:
    """Taylor coefficients of ``h -> sin(x + scale*h)``."""
    s, c = be.sin(x), be.cos(x)
    cyc = [s, c, -s, -c]
    out = []
    fact = 1
    for p in range(order + 1):
        if p:
            fact *= p
        out.append(cyc[p % 4] * scale ** p / fact)
    return out


def _to_derivatives(coeffs: List) -> List:
    out = []
    fact = 1
    for p, c in enumerate(coeffs):
        if p:
            fact *= p
        out.append(c * fact)
    return out


def _side_sign(x, side, be):
    """+1 / -1 sign of ``x`` with zero assigned according to ``side``."""
    if side >= 0:
        return be.where(x >= 0, 1.0, -1.0)
    return be.where(x > 0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Potential:
    """Base class for a real potential ``V`` on the unit circle.

    Attributes
    ----------
    smoothness_k : int or None
        ``V`` is of class ``C^{k-1,1}`` with ``V^(k)`` piecewise smooth.
        ``None`` marks a trigonometric polynomial.
    jump_angles : tuple of float
        Angles in ``[-pi, pi)`` where ``V^(k)`` jumps; also used as
        quadrature breakpoints.
    """

    def jet(self, theta, order: int, side: int = 1) -> List:
        raise NotImplementedError

    # -- conveniences ------------------------------------------------------
    @property
    def tag(self) -> str:
        return type(self).__name__

    @property
    def smoothness_k(self) -> Optional[int]:
        return None

    @property
    def jump_angles(self) -> Tuple[float, ...]:
        return ()

    def breakpoints(self, mp=None):
        """Kink angles, as mpf in ``mp`` when given."""
        if mp is None:
            return list(self.jump_angles)
        return [self._mp_angle(i, mp) for i in range(len(self.jump_angles))]

    def _mp_angle(self, i: int, mp):
        return mp.mpf(self.jump_angles[i])

    def __call__(self, theta, side: int = 1):
        return self.jet(theta, 0, side)[0]

    def derivative(self, theta, p: int, side: int = 1):
        return self.jet(theta, p, side)[p]

    def fourier_exact(self) -> Optional[Dict[int, complex]]:
        """Nonzero coefficients ``V_j`` (j >= 0) for trigonometric polynomials."""
        return None

    def vpp_inf_exact(self) -> Optional[float]:
        return None

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"family": self.tag, **self.params()}

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def osc(self, samples: int = 4096) -> float:
        """``max V - min V`` from a dense sample including kink angles."""
        th = np.concatenate([np.linspace(-math.pi, math.pi, samples, endpoint=False),
                             np.asarray(self.jump_angles, dtype=float)])
        v = self(th)
        return float(np.max(v) - np.min(v))

    def __add__(self, other: "Potential") -> "Potential":
        return Sum((self, other))


@dataclass(frozen=True)
class Zero(Potential):
    """``V = 0``; the weight is identically one."""

    def jet(self, theta, order, side=1):
        be = backend_for(theta)
        z = be.zeros_like(theta)
        return [z] * (order + 1)

    def fourier_exact(self):
        return {}

    def vpp_inf_exact(self):
        return 0.0

    def params(self):
        return {}


@dataclass(frozen=True)
class Cosine(Potential):
    """``V = A cos(mode * theta)``."""

    A: float
    mode: int = 1

    def jet(self, theta, order, side=1):
        be = backend_for(theta)
        x = self.mode * theta
        s, c = be.sin(x), be.cos(x)
        cyc = [c, -s, -c, s]
        return [self.A * self.mode ** p * cyc[p % 4] for p in range(order + 1)]

    def fourier_exact(self):
        return {self.mode: complex(self.A / 2.0)}

    def vpp_inf_exact(self):
        return -abs(self.A) * self.mode ** 2

    def osc(self, samples=0):
        return 2.0 * abs(self.A)

    def params(self):
        return {"A": self.A, "mode": self.mode}


@dataclass(frozen=True)
class FourierList(Potential):
    """Trigonometric polynomial ``V0 + 2 Re sum_{j>=1} V_j e^{ij theta}``.

    ``coefficients[j]`` holds ``V_j`` for ``j = 0, 1, ...``; ``V_0`` must be real.
    """

    coefficients: Tuple[complex, ...] = (0.0,)

    def jet(self, theta, order, side=1):
        be = backend_for(theta)
        out = []
        c0 = complex(self.coefficients[0]).real
        for p in range(order + 1):
            acc = be.zeros_like(theta) + (c0 if p == 0 else 0.0)
            for j, cj in enumerate(self.coefficients[1:], start=1):
                cj = complex(cj)
                a = cj * (1j * j) ** p
                x = j * theta
                acc = acc + 2 * (a.real * be.cos(x) - a.imag * be.sin(x))
            out.append(acc)
        return out

    def fourier_exact(self):
        return {j: complex(c) for j, c in enumerate(self.coefficients) if c != 0}

    def params(self):
        return {"coefficients": [[complex(c).real, complex(c).imag] for c in self.coefficients]}


def constant(c: float) -> FourierList:
    """The constant potential ``V = c``."""
    return FourierList((c,))


@dataclass(frozen=True)
class JumpFamily(Potential):
    """``V = -log(phi)`` for the equally spaced jump family.

    On the arc ``[theta_{j-1}, theta_j)`` the weight is
    ``1 + e^{w_j} |sin(ell/2 (theta - theta_j))|^k`` with
    ``theta_j = (2 pi/ell)(j - 1/2 - ell/2)``; the arc of ``w_1`` wraps
    through ``theta = pi``.  ``V^(k)`` jumps at every ``theta_j``.
    """

    ell: int
    k: int
    w: Tuple[float, ...]

    def __post_init__(self):
        if len(self.w) != self.ell:
            raise ValueError("JumpFamily needs one w per jump angle")
        if self.k < 1:
            raise ValueError("JumpFamily needs k >= 1")

    @property
    def smoothness_k(self):
        return self.k

    @property
    def jump_angles(self):
        return tuple(TWO_PI / self.ell * (j - 0.5 - self.ell / 2.0)
                     for j in range(1, self.ell + 1))

    def _mp_angle(self, i, mp):
        return 2 * mp.pi / self.ell * (mp.mpf(i + 1) - mp.mpf(1) / 2 - mp.mpf(self.ell) / 2)

    def _locate(self, theta, side, be):
        """Anchor angle, its weight exponent and the (unwrapped) angle."""
        if isinstance(be, _NumpyBackend):
            theta = np.asarray(theta, dtype=float)
            th = wrap_angle(theta)
            a = np.asarray(self.jump_angles)
            cnt = np.searchsorted(a, th, side="right" if side >= 0 else "left")
            wrap = cnt == self.ell
            seg = np.where((cnt == 0) | wrap, 0, cnt)
            th = np.where(wrap, th - TWO_PI, th)
            return a[seg], np.asarray(self.w, dtype=float)[seg], th
        mp = be.ctx
        th = wrap_angle(theta)
        angles = [self._mp_angle(i, mp) for i in range(self.ell)]
        cnt = sum(1 for a in angles if (a <= th if side >= 0 else a < th))
        if cnt == self.ell:
            th = th - 2 * mp.pi
        seg = 0 if cnt in (0, self.ell) else cnt
        return angles[seg], mp.mpf(self.w[seg]), th

    def jet(self, theta, order, side=1):
        be = backend_for(theta)
        anchor, w, th = self._locate(theta, side, be)
        half = self.ell / 2.0 if isinstance(be, _NumpyBackend) else be.ctx.mpf(self.ell) / 2
        s = [-c for c in _sin_series(half * (th - anchor), half, order, be)]
        sk = ts_pow(s, self.k)
        ew = be.exp(w)
        phi = [1 + ew * sk[0]] + [ew * c for c in sk[1:]]
        return [-d for d in _to_derivatives(ts_log(phi, be))]

    def weight(self, theta, side=1):
        """The weight ``phi = e^{-V}`` itself (no logarithm)."""
        be = backend_for(theta)
        anchor, w, th = self._locate(theta, side, be)
        half = self.ell / 2.0 if isinstance(be, _NumpyBackend) else be.ctx.mpf(self.ell) / 2
        return 1 + be.exp(w) * (-be.sin(half * (th - anchor))) ** self.k

    def jump_sizes(self, mp=None) -> List:
        """``V^(k)(theta_j+) - V^(k)(theta_j-)`` from the closed form."""
        out = []
        for i in range(self.ell):
            th = self._mp_angle(i, mp) if mp is not None else self.jump_angles[i]
            out.append(self.derivative(th, self.k, +1) - self.derivative(th, self.k, -1))
        return out

    def params(self):
        return {"ell": self.ell, "k": self.k, "w": list(self.w)}


def jump_family_moments(ell: int, k: int, w: Sequence, p_values: Sequence[int], mp,
                        w_mp: Sequence | None = None) -> List:
    """Closed-form moments ``(1/2pi) int e^{-ip theta} phi(theta) d theta``.

    Each arc contributes a finite trigonometric sum obtained by expanding
    ``(-sin(ell u/2))^k`` into exponentials, so no quadrature is involved.
    ``w_mp`` may supply the exponents as exact mp numbers (e.g. ``-1/4``).
    """
    ws = [mp.mpf(x) for x in (w_mp if w_mp is not None else w)]
    L = 2 * mp.pi / ell
    half = mp.mpf(ell) / 2
    anchors = [2 * mp.pi / ell * (mp.mpf(j) - mp.mpf(1) / 2 - half) for j in range(1, ell + 1)]
    # (-sin(a u))^k = (-1)^k (2i)^{-k} sum_r C(k,r) (-1)^{k-r} e^{i a (2r-k) u}
    pref = (-1) ** k / (2j) ** k
    terms = [(pref * math.comb(k, r) * (-1) ** (k - r), 2 * r - k) for r in range(k + 1)]
    ew = [mp.exp(x) for x in ws]
    out = []
    for p in p_values:
        # arc of theta_j is (theta_j - L, theta_j) in the unwrapped variable
        tot = mp.mpc(0)
        for j in range(ell):
            acc = mp.mpc(0)
            for coef, q in terms:
                beta = half * q - p
                if beta == 0:
                    integ = L
                else:
                    integ = (1 - mp.expj(-beta * L)) / (1j * beta)
                acc += mp.mpc(coef) * integ
            tot += ew[j] * mp.expj(-p * anchors[j]) * acc
        out.append((1 if p == 0 else 0) + tot / (2 * mp.pi))
    return out


@dataclass(frozen=True)
class PiecewiseCubic(Potential):
    """Even piecewise cubic with ``V''`` constant outside ``|theta| < eps``.

    ``V''' `` jumps at ``-eps``, ``0`` and ``eps`` (class ``C^{2,1}``).  The
    constant ``V'' = -M eps^2 / (2 pi)`` away from the origin makes the
    convexity margin explicit while ``sum |j V_j|`` can be made large.
    """

    M: float
    eps: float

    def __post_init__(self):
        if not (0 < self.eps < math.pi):
            raise ValueError("PiecewiseCubic needs 0 < eps < pi")

    @property
    def smoothness_k(self):
        return 3

    @property
    def jump_angles(self):
        return (-self.eps, 0.0, self.eps)

    def _mp_angle(self, i, mp):
        return [-mp.mpf(self.eps), mp.zero, mp.mpf(self.eps)][i]

    def jet(self, theta, order, side=1):
        be = backend_for(theta)
        isnp = isinstance(be, _NumpyBackend)
        th = wrap_angle(np.asarray(theta, dtype=float) if isnp else theta)
        M = self.M if isnp else be.ctx.mpf(self.M)
        e = self.eps if isnp else be.ctx.mpf(self.eps)
        pi = be.pi
        sg = _side_sign(th, side, be)
        if side >= 0:
            inner = (th >= -e) & (th < e) if isnp else (-e <= th < e)
        else:
            inner = (th > -e) & (th <= e) if isnp else (-e < th <= e)
        b = M * e / 2 - M * e ** 2 / (4 * pi)
        vin = [-(M / 6) * sg * th ** 3 + b * th ** 2 + M * e ** 4 / (4 * pi) - M * e ** 3 / 3,
               -(M / 2) * sg * th ** 2 + 2 * b * th,
               -M * sg * th + 2 * b,
               -M * sg]
        a2 = M * e ** 2 / (4 * pi)
        vout = [-a2 * th ** 2 + (M * e ** 2 / 2) * sg * th + M * e ** 4 / (4 * pi) - M * e ** 3 / 2,
                -2 * a2 * th + (M * e ** 2 / 2) * sg,
                -2 * a2 + 0 * th,
                0 * th]
        out = []
        for p in range(order + 1):
            if p < 4:
                out.append(be.where(inner, vin[p], vout[p]))
            else:
                out.append(be.zeros_like(th) if isnp else be.ctx.zero)
        return out

    def fourier_closed_form(self, j: int, mp=None):
        """Closed-form ``V_j`` of this family (checked against quadrature in tests)."""
        if mp is None:
            M, e, pi, sin = self.M, self.eps, math.pi, math.sin
        else:
            M, e, pi, sin = mp.mpf(self.M), mp.mpf(self.eps), mp.pi, mp.sin
        if j == 0:
            return 7 * M * e ** 4 / (48 * pi) - M * e ** 3 / 4 + M * pi * e ** 2 / 12
        return -2 * M / (pi * j ** 4) * sin(j * e / 2) ** 2

    def vpp_inf_exact(self):
        return -self.M * self.eps ** 2 / TWO_PI

    def params(self):
        return {"M": self.M, "eps": self.eps}


@dataclass(frozen=True)
class Kink(Potential):
    """``V = eta |2 sin((theta - center)/2)|^k``: a single jump of ``V^(k)``.

    For odd ``k`` this is of class ``C^{k-1,1}`` with the jump
    ``V^(k)(center+) - V^(k)(center-) = 2 eta k!`` at ``center``.
    """

    eta: float
    k: int = 3
    center: float = 0.0

    @property
    def smoothness_k(self):
        return self.k

    @property
    def jump_angles(self):
        return (float(wrap_angle(float(self.center))),)

    def jet(self, theta, order, side=1):
        be = backend_for(theta)
        isnp = isinstance(be, _NumpyBackend)
        x = wrap_angle((np.asarray(theta, dtype=float) if isnp else theta) - self.center)
        sg = _side_sign(x, side, be)
        half = 0.5 if isnp else be.ctx.mpf(1) / 2
        s = [2 * sg * c for c in _sin_series(half * x, half, order, be)]
        sk = ts_pow(s, self.k)
        return [self.eta * d for d in _to_derivatives(sk)]

    def params(self):
        return {"eta": self.eta, "k": self.k, "center": self.center}


@dataclass(frozen=True)
class Sum(Potential):
    """Sum of potentials; smoothness is the worst of the parts."""

    parts: Tuple[Potential, ...] = field(default_factory=tuple)

    @property
    def smoothness_k(self):
        ks = [p.smoothness_k for p in self.parts if p.smoothness_k is not None]
        return min(ks) if ks else None

    @property
    def jump_angles(self):
        k = self.smoothness_k
        angs = set()
        for p in self.parts:
            if p.smoothness_k is not None:
                angs.update(p.jump_angles)
        return tuple(sorted(angs)) if k is not None else ()

    def _mp_angle(self, i, mp):
        target = self.jump_angles[i]
        for p in self.parts:
            for j, a in enumerate(p.jump_angles):
                if a == target:
                    return p._mp_angle(j, mp)
        return mp.mpf(target)

    def jet(self, theta, order, side=1):
        out = None
        for p in self.parts:
            j = p.jet(theta, order, side)
            out = j if out is None else [a + b for a, b in zip(out, j)]
        return out

    def fourier_exact(self):
        acc: Dict[int, complex] = {}
        for p in self.parts:
            fe = p.fourier_exact()
            if fe is None:
                return None
            for j, c in fe.items():
                acc[j] = acc.get(j, 0) + c
        return acc

    def params(self):
        return {"parts": [p.to_dict() for p in self.parts]}


def smooth_surrogate(A: float = 0.2, eta: float = 0.02, k: int = 3) -> Sum:
    """``A cos(theta)`` plus a small kink making ``V`` exactly ``C^{k-1,1}``.

    A pure cosine is analytic, so the finite-smoothness rates need a
    controlled defect; the kink at ``theta = 0`` has ``V^(k)`` jump
    ``2 eta k!`` and leaves the weight real and positive.
    """
    return Sum((Cosine(A, 1), Kink(eta, k, 0.0)))


# ---------------------------------------------------------------------------
# construction from dictionaries and presets
# ---------------------------------------------------------------------------

def from_dict(d: dict) -> Potential:
    fam = d["family"]
    if fam == "Zero":
        return Zero()
    if fam == "Cosine":
        return Cosine(float(d["A"]), int(d.get("mode", 1)))
    if fam == "FourierList":
        return FourierList(tuple(complex(a, b) for a, b in d["coefficients"]))
    if fam == "JumpFamily":
        return JumpFamily(int(d["ell"]), int(d["k"]), tuple(float(x) for x in d["w"]))
    if fam == "PiecewiseCubic":
        return PiecewiseCubic(float(d["M"]), float(d["eps"]))
    if fam == "Kink":
        return Kink(float(d["eta"]), int(d.get("k", 3)), float(d.get("center", 0.0)))
    if fam == "Sum":
        return Sum(tuple(from_dict(p) for p in d["parts"]))
    raise ValueError(f"unknown potential family {fam!r}")


PRESETS = {
    "unit": lambda: Zero(),
    "jump3": lambda: JumpFamily(3, 2, (-4.0, -2.0, -3.0)),
    "thumbnail": lambda: JumpFamily(7, 3, (-1.0, -0.5, -0.25, -1.0, -0.25, -1.0, -0.5)),
    "fluct2": lambda: JumpFamily(7, 2, (-1.0, -0.5, -0.25, 0.5, -0.25, 0.25, -0.5)),
    "fluct3": lambda: JumpFamily(7, 3, (-1.0, -0.5, -0.25, 0.5, -0.25, 0.25, -0.5)),
    "surrogate": lambda: smooth_surrogate(0.2, 0.02, 3),
}


def deformation_weights(t: float) -> Tuple[float, ...]:
    """Exponents ``w(t)`` of the one-parameter deformation (ell = 7, k = 2)."""
    base = (0.0, 0.0, 0.0, 0.5, 0.0, 0.25, 0.0)
    slope = (1.0, 0.5, 0.25, 0.0, 0.25, 0.0, 0.5)
    return tuple(b - s * t for b, s in zip(base, slope))


def one_sided_derivative(f, theta: float, p: int, side: int = 1,
                         h: float = 2.0 ** -10, order: int = 6) -> float:
    """One-sided finite-difference derivative of order ``p``.

    Uses ``p + order`` samples on one side of ``theta`` with weights from a
    Vandermonde solve, giving truncation error ``O(h^order)``.
    """
    npts = p + order
    offs = side * h * np.arange(npts, dtype=float)
    A = np.vander(offs / h, npts, increasing=True).T
    rhs = np.zeros(npts)
    rhs[p] = math.factorial(p)
    wts = np.linalg.solve(A, rhs)
    vals = np.array([float(f(theta + o)) for o in offs])
    return float(wts @ vals) / h ** p

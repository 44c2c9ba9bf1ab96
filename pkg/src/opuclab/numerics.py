"""
Extended-precision context, circle quadrature rules and the bump cutoff.

Everything that needs more than double precision goes through a
:class:`PrecisionContext`, which owns a private ``mpmath`` context so that
no global precision state is touched.  Quadrature on the circle comes in two
flavours:

* :func:`periodic_trapezoid` for smooth periodic integrands (spectrally
  accurate, exact for trigonometric polynomials of degree < M/2);
* :func:`segmented_gauss` for integrands that are analytic between a list of
  breakpoints (kinks), using composite Gauss-Legendre on each segment.

Both report circle means, i.e. ``(1/2pi) * integral``, and both can be run
with automatic node doubling until two successive results agree to
``ctx.tol``.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple, Union

import gmpy2
import mpmath
import numpy as np
from mpmath.calculus.quadrature import GaussLegendre

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
LOG2 = math.log(2.0)

#: hard cap on the total number of quadrature nodes used by doubling loops
MAX_QUAD_NODES = 2 ** 18


class QuadratureError(ArithmeticError):
    """Raised when a quadrature sample is not finite or doubling fails."""

    def __init__(self, message: str, node_index: int | None = None,
                 achieved: float | None = None):
        super().__init__(message)
        self.node_index = node_index
        self.achieved = achieved


@functools.lru_cache(maxsize=None)
def _mp_context(bits: int) -> mpmath.ctx_mp.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


@functools.lru_cache(maxsize=None)
def _gl_engine(bits: int) -> GaussLegendre:
    return GaussLegendre(_mp_context(bits))


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision and quadrature defaults.

    Parameters
    ----------
    mantissa_bits : int
        Binary precision of the private mpmath context (>= 64).
    base_quad_points : int
        Starting node count for periodic trapezoid rules.
    """

    mantissa_bits: int = 256
    base_quad_points: int = 4096

    def __post_init__(self):
        if self.mantissa_bits < 64:
            raise ValueError("mantissa_bits must be >= 64")
        if self.base_quad_points < 2:
            raise ValueError("base_quad_points must be >= 2")

    @property
    def tol(self) -> float:
        """Agreement tolerance ``2**(-mantissa_bits/4)``."""
        return 2.0 ** (-self.mantissa_bits / 4.0)

    @property
    def mp(self) -> mpmath.ctx_mp.MPContext:
        """The private mpmath context at ``mantissa_bits`` precision."""
        return _mp_context(self.mantissa_bits)

    def mpf(self, x) -> mpmath.mpf:
        return self.mp.mpf(x)

    def mpc(self, x, y=0) -> mpmath.mpc:
        return self.mp.mpc(x, y)


DEFAULT_CONTEXT = PrecisionContext()


def is_mp(x) -> bool:
    """True for mpmath numbers from any context (private contexts included)."""
    return hasattr(x, "_mpf_") or hasattr(x, "_mpc_")


def wrap_angle(theta):
    """Wrap an angle (float, array or mpf) into ``[-pi, pi)``.

    Angles already in range are returned unchanged, so kink angles survive
    the round trip bit for bit.
    """
    if isinstance(theta, np.ndarray):
        inside = (theta >= -np.pi) & (theta < np.pi)
        return np.where(inside, theta, (theta + np.pi) % TWO_PI - np.pi)
    if isinstance(theta, (float, int, np.floating)):
        if -math.pi <= theta < math.pi:
            return float(theta)
        return (theta + math.pi) % TWO_PI - math.pi
    mp = theta.context
    if -mp.pi <= theta < mp.pi:
        return theta
    two_pi = 2 * mp.pi
    return theta - two_pi * mp.floor((theta + mp.pi) / two_pi)


@dataclass(frozen=True)
class PolarPoint:
    """A point ``r e^{i theta}`` of the punctured plane."""

    r: float
    theta: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"PolarPoint radius must be positive, got {self.r}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @classmethod
    def from_complex(cls, z) -> "PolarPoint":
        if is_mp(z):
            mp = z.context
            return cls(abs(z), mp.arg(z))
        return cls(abs(z), math.atan2(z.imag, z.real))

    @property
    def z(self):
        if isinstance(self.r, float) and isinstance(self.theta, float):
            return self.r * complex(math.cos(self.theta), math.sin(self.theta))
        mp = getattr(self.r, "context", None) or self.theta.context
        return mp.mpf(self.r) * mp.expj(self.theta)


# ---------------------------------------------------------------------------
# periodic trapezoid
# ---------------------------------------------------------------------------

def _is_finite(v) -> bool:
    if isinstance(v, (list, tuple)):
        return all(_is_finite(x) for x in v)
    try:
        return bool(mpmath.isfinite(v))
    except TypeError:
        return bool(np.all(np.isfinite(v)))


def periodic_trapezoid(f: Callable, M: int, ctx: PrecisionContext = DEFAULT_CONTEXT,
                       vector: bool = False):
    """Circle mean of a periodic function by the M-point trapezoid rule.

    Parameters
    ----------
    f : callable
        ``f(theta)`` with ``theta`` an mpf; returns an mp number, or a list of
        them when ``vector`` is true.
    M : int
        Number of equispaced nodes ``theta_j = -pi + 2 pi j / M``.
    ctx : PrecisionContext

    Returns
    -------
    mpc or list of mpc
        ``(1/M) sum_j f(theta_j)``.

    Raises
    ------
    QuadratureError
        If a sample is not finite; the offending node index is attached.
    """
    if M < 2:
        raise ValueError("periodic_trapezoid needs M >= 2")
    mp = ctx.mp
    acc = None
    step = 2 * mp.pi / M
    for j in range(M):
        theta = -mp.pi + j * step
        v = f(theta)
        if not _is_finite(v):
            raise QuadratureError(f"non-finite integrand at node {j}", node_index=j)
        if vector:
            if acc is None:
                acc = [mp.mpc(x) for x in v]
            else:
                for i, x in enumerate(v):
                    acc[i] += x
        else:
            acc = v if acc is None else acc + v
    if vector:
        return [a / M for a in acc]
    return acc / M


def _max_diff(a, b) -> float:
    if isinstance(a, list):
        return max((float(abs(x - y)) for x, y in zip(a, b)), default=0.0)
    return float(abs(a - b))


def trapezoid_converged(f: Callable, ctx: PrecisionContext = DEFAULT_CONTEXT,
                        M0: int | None = None, vector: bool = False):
    """Trapezoid rule with node doubling until agreement to ``ctx.tol``.

    Returns
    -------
    value, M : result at the finer resolution and its node count.
    """
    M = M0 or ctx.base_quad_points
    prev = periodic_trapezoid(f, M, ctx, vector)
    while 2 * M <= MAX_QUAD_NODES:
        M *= 2
        cur = periodic_trapezoid(f, M, ctx, vector)
        diff = _max_diff(cur, prev)
        if diff < ctx.tol:
            return cur, M
        prev = cur
    raise QuadratureError("trapezoid doubling hit the node cap", achieved=diff)


# ---------------------------------------------------------------------------
# Gauss-Legendre on segments of the circle
# ---------------------------------------------------------------------------

def gl_level_for(nodes: int) -> int:
    """Smallest mpmath Gauss-Legendre level with at least ``nodes`` nodes.

    mpmath's level ``d`` carries ``3 * 2**(d-1)`` nodes.
    """
    d = 1
    while 3 * 2 ** (d - 1) < nodes:
        d += 1
    return d


def gl_nodes(level: int, ctx: PrecisionContext) -> List[Tuple[mpmath.mpf, mpmath.mpf]]:
    """Gauss-Legendre nodes and weights on ``[-1, 1]`` (cached per level)."""
    return _gl_cached(level, ctx.mantissa_bits)


@functools.lru_cache(maxsize=None)
def _gl_cached(level: int, bits: int):
    eng = _gl_engine(bits)
    # guard bits so the nodes are good to the working precision
    return tuple(eng.calc_nodes(level, bits + 20))


@functools.lru_cache(maxsize=64)
def gl_nodes_np(count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Double-precision Gauss-Legendre rule with ``count`` nodes."""
    x, w = np.polynomial.legendre.leggauss(count)
    return x, w


def circle_segments(breakpoints: Sequence, mp) -> List[Tuple]:
    """Closed list of arcs ``(a, b)`` with ``b > a`` covering one turn.

    The last arc wraps from the largest breakpoint to the smallest plus 2 pi.
    """
    pts = [mp.mpf(b) for b in breakpoints]
    if any(pts[i + 1] <= pts[i] for i in range(len(pts) - 1)):
        raise ValueError("breakpoints must be strictly increasing")
    segs = [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]
    segs.append((pts[-1], pts[0] + 2 * mp.pi))
    return segs


def circle_gauss_rule(breakpoints: Sequence, level: int, ctx: PrecisionContext,
                      max_arc: float | None = None):
    """Composite Gauss-Legendre nodes for circle means.

    Parameters
    ----------
    breakpoints : sequence of angles
        Strictly increasing; arcs between them are integrated separately.
    level : int
        mpmath Gauss-Legendre level per arc.
    max_arc : float, optional
        Split arcs longer than this into equal pieces.

    Returns
    -------
    list of (theta, weight)
        Weights include the ``1/(2 pi)`` mean normalization.
    """
    mp = ctx.mp
    base = gl_nodes(level, ctx)
    rule = []
    for a, b in circle_segments(breakpoints, mp):
        pieces = 1
        if max_arc is not None:
            pieces = max(1, int(math.ceil(float(b - a) / max_arc)))
        h = (b - a) / pieces
        for p in range(pieces):
            lo = a + p * h
            half = h / 2
            mid = lo + half
            for x, w in base:
                rule.append((mid + half * x, half * w / (2 * mp.pi)))
    return rule


def _total_nodes(breakpoints, level):
    return max(1, len(breakpoints)) * 3 * 2 ** (level - 1)


def segmented_gauss(f: Callable, breakpoints: Sequence, nodes_per_segment: int,
                    ctx: PrecisionContext = DEFAULT_CONTEXT, vector: bool = False,
                    check: bool = True):
    """Circle mean of a piecewise-analytic function by composite Gauss rules.

    Parameters
    ----------
    f : callable
        ``f(theta)``; may receive angles outside ``[-pi, pi)`` on the wrap
        arc, so it must be 2 pi-periodic.
    breakpoints : sequence of angles
        Kink locations, strictly increasing in ``[-pi, pi)``.  An empty list
        delegates to :func:`trapezoid_converged`.
    nodes_per_segment : int
        Minimum Gauss nodes per arc (rounded up to an mpmath level).
    check : bool
        Double the nodes until agreement to ``ctx.tol``.

    Returns
    -------
    mpc or list of mpc
    """
    if len(breakpoints) == 0:
        M0 = max(2, min(ctx.base_quad_points, 2 * nodes_per_segment))
        if not check:
            return periodic_trapezoid(f, M0, ctx, vector)
        return trapezoid_converged(f, ctx, M0=M0, vector=vector)[0]

    level = gl_level_for(nodes_per_segment)

    def run(lvl):
        mp = ctx.mp
        acc = None
        for idx, (theta, w) in enumerate(circle_gauss_rule(breakpoints, lvl, ctx)):
            v = f(theta)
            if not _is_finite(v):
                raise QuadratureError(f"non-finite integrand at node {idx}", node_index=idx)
            if vector:
                if acc is None:
                    acc = [mp.mpc(0)] * len(v)
                acc = [a + w * x for a, x in zip(acc, v)]
            else:
                acc = w * v if acc is None else acc + w * v
        return acc

    prev = run(level)
    if not check:
        return prev
    diff = float("inf")
    while _total_nodes(breakpoints, level + 1) <= MAX_QUAD_NODES:
        level += 1
        cur = run(level)
        diff = _max_diff(cur, prev)
        logger.debug("segmented_gauss level %d diff %.3e", level, diff)
        if diff < ctx.tol:
            return cur
        prev = cur
    raise QuadratureError("segmented_gauss doubling hit the node cap", achieved=diff)


def converge_by_doubling(compute: Callable[[int], object], level0: int,
                         ctx: PrecisionContext, n_segments: int = 1,
                         tol: float | None = None):
    """Generic doubling driver for level-indexed Gauss computations.

    ``compute(level)`` returns a number or list; levels increase until two
    successive results agree to ``tol`` (default ``ctx.tol``).

    Returns
    -------
    value, level, diff
    """
    tol = ctx.tol if tol is None else tol
    level = level0
    prev = compute(level)
    diff = float("inf")
    while n_segments * 3 * 2 ** level <= MAX_QUAD_NODES:
        level += 1
        cur = compute(level)
        diff = _max_diff(cur, prev)
        logger.debug("doubling level %d diff %.3e", level, diff)
        if diff < tol:
            return cur, level, diff
        prev = cur
    raise QuadratureError("Gauss doubling hit the node cap", achieved=diff)


# ---------------------------------------------------------------------------
# bump cutoff
# ---------------------------------------------------------------------------

def _g(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _transition_coordinate(l):
    return (LOG2 - np.abs(l)) / (LOG2 / 2.0)


def bump(l) -> Union[float, np.ndarray]:
    """Smooth even cutoff: 1 for ``|l| <= log(2)/2``, 0 for ``|l| >= log 2``.

    The transition is ``s(t) = g(t) / (g(t) + g(1 - t))`` with
    ``g(t) = exp(-1/t)`` for ``t > 0`` and
    ``t = (log 2 - |l|) / (log(2)/2)``.
    """
    scalar = np.ndim(l) == 0
    t = _transition_coordinate(np.asarray(l, dtype=float))
    a, b = _g(t), _g(1.0 - t)
    out = a / (a + b)
    return float(out) if scalar else out


def bump_prime(l) -> Union[float, np.ndarray]:
    """Derivative ``dB/dl`` of :func:`bump`."""
    scalar = np.ndim(l) == 0
    l = np.asarray(l, dtype=float)
    t = _transition_coordinate(l)
    a, b = _g(t), _g(1.0 - t)
    with np.errstate(divide="ignore", invalid="ignore"):
        da = np.where(t > 0, a / np.where(t > 0, t, 1.0) ** 2, 0.0)
        db = np.where(1 - t > 0, b / np.where(1 - t > 0, 1 - t, 1.0) ** 2, 0.0)
        denom = (a + b) ** 2
        ds = np.where(denom > 0, (da * b + a * db) / np.where(denom > 0, denom, 1.0), 0.0)
    out = ds * (-np.sign(l)) / (LOG2 / 2.0)
    return float(out) if scalar else out


def bump_mp(l, mp):
    """:func:`bump` evaluated in an mpmath context."""
    l = mp.mpf(l)
    half = mp.log(2) / 2
    t = (mp.log(2) - abs(l)) / half
    a = mp.exp(-1 / t) if t > 0 else mp.zero
    b = mp.exp(-1 / (1 - t)) if 1 - t > 0 else mp.zero
    return a / (a + b)


# ---------------------------------------------------------------------------
# Fourier-type circle means in extended precision
# ---------------------------------------------------------------------------

def _mpf_to_gmpy(x):
    sign, man, exp, bc = x._mpf_
    if not man:
        return gmpy2.mpfr(0)
    v = gmpy2.mul_2exp(gmpy2.mpfr(man), exp)
    return -v if sign else v


def _mpc_to_gmpy(z):
    return gmpy2.mpc(_mpf_to_gmpy(z.real), _mpf_to_gmpy(z.imag))


def _gmpy_to_mpf(x, mp):
    man, exp = x.as_mantissa_exp()
    return mp.mpf((int(man), int(exp)))


def _accumulate_powers(pairs, J: int, bits: int, mp) -> list:
    """``sum_nodes a * e^j`` for ``j = 0..J``; ``pairs`` holds ``(a, e)`` mpc tuples.

    The inner loop runs in gmpy2 at ``bits`` precision, which is several
    times faster than mpmath number objects.
    """
    with gmpy2.context(gmpy2.get_context(), precision=bits + 16):
        acc = [gmpy2.mpc(0)] * (J + 1)
        for a, e in pairs:
            p = _mpc_to_gmpy(a)
            g = _mpc_to_gmpy(e)
            acc[0] += p
            for j in range(1, J + 1):
                p *= g
                acc[j] += p
        return [mp.mpc(_gmpy_to_mpf(c.real, mp), _gmpy_to_mpf(c.imag, mp)) for c in acc]


def arc_for_bandwidth(bandwidth: float, q_nodes: int = 96) -> float:
    """Arc length on which a ``q``-point Gauss rule resolves ``e^{i bandwidth t}``."""
    return min(1.0, 2.0 * q_nodes / (3.0 * max(bandwidth, 1.0)))


def circle_fourier_mp(f: Callable, J: int, breakpoints: Sequence,
                      ctx: PrecisionContext = DEFAULT_CONTEXT, bandwidth: float = 0.0,
                      level0: int = 6):
    """Circle means ``mean f(theta) e^{-ij theta}`` for ``j = 0..J``.

    Parameters
    ----------
    f : callable
        ``f(theta)`` for mpf ``theta``; must be 2 pi-periodic.
    J : int
        Highest frequency.
    breakpoints : sequence
        Kink angles.  Without kinks the periodic trapezoid rule is used (it
        is exact for the band-limited part); with kinks, composite
        Gauss-Legendre on arcs short enough for frequency ``J + bandwidth``.
    bandwidth : float
        Extra frequency content of ``f`` itself.

    Returns
    -------
    list of mpc
        Converged to ``ctx.tol`` by node doubling.
    """
    mp = ctx.mp
    if len(breakpoints) == 0:
        M = 64
        while M < 2 * (J + bandwidth) + 64:
            M *= 2

        def trap(M):
            step = 2 * mp.pi / M
            pairs = []
            for l in range(M):
                th = -mp.pi + l * step
                v = f(th)
                if not _is_finite(v):
                    raise QuadratureError(f"non-finite integrand at node {l}", node_index=l)
                pairs.append((mp.mpc(v) / M, mp.expj(-th)))
            return _accumulate_powers(pairs, J, ctx.mantissa_bits, mp)

        prev = trap(M)
        while 2 * M <= MAX_QUAD_NODES:
            M *= 2
            cur = trap(M)
            diff = _max_diff(cur, prev)
            if diff < ctx.tol:
                return cur
            prev = cur
        raise QuadratureError("trapezoid doubling hit the node cap", achieved=diff)

    max_arc = arc_for_bandwidth(J + bandwidth + 20)

    def compute(level):
        pairs = []
        for idx, (th, w) in enumerate(circle_gauss_rule(list(breakpoints), level, ctx,
                                                        max_arc=max_arc)):
            v = f(th)
            if not _is_finite(v):
                raise QuadratureError(f"non-finite integrand at node {idx}", node_index=idx)
            pairs.append((mp.mpc(v) * w, mp.expj(-th)))
        return _accumulate_powers(pairs, J, ctx.mantissa_bits, mp)

    n_seg = int(2 * math.pi / max_arc) + len(breakpoints) + 1
    value, level, diff = converge_by_doubling(compute, level0, ctx, n_segments=n_seg)
    logger.debug("circle_fourier_mp J=%d level=%d diff=%.2e", J, level, diff)
    return value

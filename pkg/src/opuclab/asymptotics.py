"""
Closed-form approximants for ``pi_n`` and their measured errors.

Every approximant is built from the Szego apparatus alone (no OPUC data);
:func:`sup_error` compares it with computed polynomials in the normalized
form appropriate to each region, on published deterministic sample sets:

* circle: ``8n`` equispaced angles offset by half a node,
* regions off the circle: a ``64 x 256`` polar lattice.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .numerics import DEFAULT_CONTEXT, TWO_PI, PrecisionContext, bump
from .opuc import OPUCResult, WeightSpec, build_moments, levinson_opuc
from .potentials import JumpFamily, Potential, one_sided_derivative
from .szego import DomainError, SzegoEvaluator, szego_apparatus

logger = logging.getLogger(__name__)

LATTICE_RADII = 64
LATTICE_ANGLES = 256
# extension order used for weights without a finite smoothness index
ANALYTIC_ORDER = 8


class ApproxKind(str, Enum):
    OUTSIDE_FIXED = "OutsideFixed"
    CIRCLE_FIXED = "CircleFixed"
    INSIDE_FIXED = "InsideFixed"
    INSIDE_DEEP = "InsideDeep"
    JUMP_MODEL = "JumpModel"
    OUTSIDE_VARYING = "OutsideVarying"
    CIRCLE_VARYING = "CircleVarying"
    INSIDE_VARYING = "InsideVarying"

    @property
    def varying(self) -> bool:
        return self.value.endswith("Varying")


# ---------------------------------------------------------------------------
# sample sets
# ---------------------------------------------------------------------------

def circle_angles(n: int) -> np.ndarray:
    """``8n`` angles ``-pi + 2 pi (j + 1/2) / 8n``."""
    count = 8 * max(1, n)
    return -math.pi + TWO_PI * (np.arange(count) + 0.5) / count


def lattice_angles(count: int = LATTICE_ANGLES) -> np.ndarray:
    return -math.pi + TWO_PI * (np.arange(count) + 0.5) / count


def lattice_radii(lo: float, hi: float, count: int = LATTICE_RADII,
                  closed_top: bool = False) -> np.ndarray:
    """Cell-midpoint radii in ``(lo, hi)``, or right endpoints when ``closed_top``."""
    offs = np.arange(1, count + 1) if closed_top else np.arange(count) + 0.5
    return lo + (hi - lo) * offs / count


@dataclass(frozen=True)
class Region:
    """Sample set: ``radii x angles`` (a circle when ``radii == (1,)``)."""

    name: str
    radii: Tuple[float, ...]
    angles: Tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.radii) * len(self.angles)

    def points(self) -> np.ndarray:
        return np.asarray(self.radii)[:, None] * np.exp(1j * np.asarray(self.angles))[None, :]


def default_region(kind: ApproxKind, n: int, rho: Optional[float] = None,
                   k: Optional[int] = None, sigma: float = 0.5) -> Region:
    """Region sample set each theorem is checked on."""
    if kind in (ApproxKind.CIRCLE_FIXED, ApproxKind.CIRCLE_VARYING):
        return Region("circle", (1.0,), tuple(circle_angles(n)))
    ang = tuple(lattice_angles())
    if kind in (ApproxKind.OUTSIDE_FIXED, ApproxKind.OUTSIDE_VARYING):
        rho = 1.1 if rho is None else rho
        return Region(f"outside rho={rho}", tuple(lattice_radii(rho, 2 * rho)), ang)
    if kind in (ApproxKind.INSIDE_FIXED, ApproxKind.INSIDE_VARYING):
        rho = 0.5 if rho is None else rho
        return Region(f"annulus rho={rho}", tuple(lattice_radii(rho, 1.0)), ang)
    if kind == ApproxKind.INSIDE_DEEP:
        rho = 0.5 if rho is None else rho
        return Region(f"disk rho={rho}", tuple(lattice_radii(0.0, rho, closed_top=True)), ang)
    if kind == ApproxKind.JUMP_MODEL:
        if k is None:
            raise ValueError("JumpModel region needs k")
        top = math.exp(-(k - sigma) * math.log(n) / n)
        return Region(f"jump model sigma={sigma}", tuple(lattice_radii(0.0, top, closed_top=True)),
                      ang)
    raise ValueError(f"unknown kind {kind}")


# ---------------------------------------------------------------------------
# jump data and f_n
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JumpData:
    """Jump angles, jumps of ``V^(k)`` and ``Omega`` at the jump angles."""

    k: int
    angles: Tuple[float, ...]
    jumps: Tuple[float, ...]
    omega: Tuple[float, ...]


def jump_data(V: Potential, sz: SzegoEvaluator) -> JumpData:
    """Collect ``(theta_j, Delta_j^(k), Omega(theta_j))`` for a piecewise-smooth ``V``.

    Jumps come from the analytic one-sided jets; a sixth-order one-sided
    stencil is the fallback when a jet is unavailable.

    Raises
    ------
    ValueError
        If ``V`` has no finite smoothness or no jump angles.
    """
    k = V.smoothness_k
    if k is None or not V.jump_angles:
        raise ValueError("f_n needs a potential with jump data")
    if isinstance(V, JumpFamily):
        jumps = tuple(float(d) for d in V.jump_sizes())
    else:
        jumps = []
        for a in V.jump_angles:
            try:
                d = float(V.jet(a, k, side=1)[k]) - float(V.jet(a, k, side=-1)[k])
            except (NotImplementedError, TypeError):
                d = (one_sided_derivative(V, a, k, side=1)
                     - one_sided_derivative(V, a, k, side=-1))
            jumps.append(d)
        jumps = tuple(jumps)
    omega = tuple(float(sz.Omega(a)) for a in V.jump_angles)
    return JumpData(k, tuple(V.jump_angles), jumps, omega)


@dataclass(frozen=True)
class RationalFn:
    """``f_n(z) = (i^{k+1}/2 pi) sum_j c_j e^{i(n+1) theta_j} / (e^{i theta_j} - z)``.

    ``c_j = Delta_j e^{i Omega(theta_j)}``.
    """

    n: int
    k: int
    angles: Tuple[float, ...]
    weights: Tuple[complex, ...]

    @property
    def prefactor(self) -> complex:
        return (1j ** (self.k + 1)) / TWO_PI

    @property
    def poles(self) -> np.ndarray:
        return np.exp(1j * np.asarray(self.angles))

    def residue_weights(self) -> np.ndarray:
        a = np.asarray(self.angles)
        return self.prefactor * np.asarray(self.weights) * np.exp(1j * (self.n + 1) * a)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for c, p in zip(self.residue_weights(), self.poles):
            out = out + c / (p - z)
        return out if out.shape else complex(out)

    def numerator(self) -> np.ndarray:
        """Coefficients (highest degree first) of ``f_n(z) prod_j (p_j - z)``."""
        poles = self.poles
        num = np.zeros(1, dtype=complex)
        for j, c in enumerate(self.residue_weights()):
            term = np.array([c], dtype=complex)
            for i, p in enumerate(poles):
                if i != j:
                    term = np.polymul(term, np.array([-1.0, p]))
            num = np.polyadd(num, term)
        return num

    def zeros(self) -> np.ndarray:
        """Zeros of ``f_n`` (at most ``ell - 1``)."""
        num = np.trim_zeros(self.numerator(), "f")
        scale = np.max(np.abs(num)) if num.size else 0.0
        while num.size and abs(num[0]) <= 1e-14 * scale:
            num = num[1:]
        if num.size <= 1:
            return np.zeros(0, dtype=complex)
        return np.roots(num)


def f_n(V: Potential, sz: SzegoEvaluator, n: int, data: Optional[JumpData] = None) -> RationalFn:
    """The rational function governing ``pi_n`` inside the disk for jump weights."""
    data = data if data is not None else jump_data(V, sz)
    weights = tuple(d * complex(math.cos(o), math.sin(o)) for d, o in zip(data.jumps, data.omega))
    return RationalFn(n, data.k, data.angles, weights)


# ---------------------------------------------------------------------------
# approximants
# ---------------------------------------------------------------------------

def _omega_jet(sz: SzegoEvaluator, theta: np.ndarray, order: int) -> List[np.ndarray]:
    return [np.asarray(sz.Omega(theta, p), dtype=float) for p in range(order + 1)]


def _extension_value(derivs: Sequence, m: int, r) -> np.ndarray:
    L = -1j * np.log(r)
    term = np.ones_like(L)
    acc = np.zeros_like(L)
    for p in range(m):
        acc = acc + derivs[p] * term
        term = term * L / (p + 1)
    return acc


@dataclass
class Approximant:
    """A closed-form model of ``pi_n`` valid on one region.

    Attributes
    ----------
    kind : ApproxKind
    n : int
    k : int or None
        Smoothness index; the extension order ``m`` is always ``k``.
    epsilon : float
        Bump scale for the jump model.
    """

    kind: ApproxKind
    sz: SzegoEvaluator
    n: int
    k: Optional[int] = None
    epsilon: float = 0.5
    sigma: float = 0.5
    fn: Optional[RationalFn] = None

    @property
    def V(self) -> Potential:
        return self.sz.V

    # region checks ----------------------------------------------------------------
    def check_region(self, r: np.ndarray) -> None:
        r = np.asarray(r)
        kind, n = self.kind, self.n
        if kind in (ApproxKind.OUTSIDE_FIXED, ApproxKind.OUTSIDE_VARYING,
                    ApproxKind.CIRCLE_FIXED, ApproxKind.CIRCLE_VARYING):
            bad = r < 1 - 1e-13
        elif kind in (ApproxKind.INSIDE_FIXED, ApproxKind.INSIDE_VARYING):
            bad = (r > 1 + 1e-13) | (r <= 0)
        elif kind == ApproxKind.INSIDE_DEEP:
            bad = r >= 1
        else:
            bad = np.log(np.maximum(r, 1e-300)) >= -(self.k - self.sigma) * math.log(n) / n + 1e-15
        if np.any(bad):
            raise DomainError(f"{kind.value} evaluated outside its region")

    def _k_required(self) -> int:
        if self.k is None:
            raise ValueError(f"{self.kind.value} needs a finite smoothness index k")
        return self.k

    # evaluation on a polar lattice -------------------------------------------------
    def on_lattice(self, radii: Sequence[float], angles: Sequence[float]) -> np.ndarray:
        """Approximant values, ``len(radii) x len(angles)``."""
        r = np.asarray(radii, dtype=float)[:, None]
        th = np.asarray(angles, dtype=float)[None, :]
        self.check_region(r)
        z = r * np.exp(1j * th)
        n, sz, kind = self.n, self.sz, self.kind
        if kind == ApproxKind.INSIDE_DEEP:
            return np.zeros(z.shape, dtype=complex)
        if kind in (ApproxKind.OUTSIDE_FIXED, ApproxKind.CIRCLE_FIXED,
                    ApproxKind.OUTSIDE_VARYING, ApproxKind.CIRCLE_VARYING):
            Nv = self._N_lattice(r[:, 0], th[0])
            s = 1 if kind in (ApproxKind.OUTSIDE_FIXED, ApproxKind.CIRCLE_FIXED) else n
            return z ** n * np.exp(s * Nv)
        k = self._k_required()
        cN = self._conjN_lattice(r[:, 0], th[0])
        V0 = float(sz.V0)
        if kind == ApproxKind.INSIDE_FIXED:
            ekv = _extension_value([d[None, :] for d in self.V.jet(th[0], k)], k, r)
            return z ** n * np.exp(-V0 - cN + ekv)
        if kind == ApproxKind.INSIDE_VARYING:
            eko = _extension_value([d[None, :] for d in _omega_jet(sz, th[0], k - 1)], k, r)
            return z ** n * np.exp(n * cN + 1j * n * eko)
        # jump model
        ekv = _extension_value([d[None, :] for d in self.V.jet(th[0], k)], k, r)
        fn = self.fn if self.fn is not None else f_n(self.V, sz, n)
        B = bump(np.log(r) / self.epsilon)
        return (z ** n * np.exp(-V0 - cN + ekv) * B
                + np.exp(cN) * fn(z) / float(n) ** (k + 1))

    def __call__(self, z):
        """Pointwise evaluation at arbitrary ``z`` (slow path)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.array([self.on_lattice([abs(v)], [math.atan2(v.imag, v.real)])[0, 0] for v in z])
        return out if out.size > 1 else complex(out[0])

    def _N_lattice(self, radii: np.ndarray, angles: np.ndarray) -> np.ndarray:
        sz = self.sz
        if sz.exact:
            return sz._series_N(radii[:, None] * np.exp(1j * angles)[None, :])
        # off the circle the FFT spectrum is accurate (r^{-J} is negligible);
        # on it use the principal-value integral
        rows = []
        for r in radii:
            if r == 1.0:
                rows.append(np.asarray(sz.N_circle(angles)))
            else:
                rows.append(self._N_ring(r, angles))
        return np.stack(rows)

    def _N_ring(self, r: float, angles: np.ndarray) -> np.ndarray:
        a = np.asarray(angles)
        step = a[1] - a[0] if a.size > 1 else 0.0
        uniform = a.size > 1 and np.allclose(np.diff(a), step) and abs(a.size * step - TWO_PI) < 1e-9
        if uniform:
            return self.sz.dense.N_ring(float(r), a.size, float(a[0]))
        return self.sz.dense.N_points(r * np.exp(1j * a))

    def _conjN_lattice(self, radii: np.ndarray, angles: np.ndarray) -> np.ndarray:
        sz = self.sz
        z = radii[:, None] * np.exp(1j * angles)[None, :]
        if sz.exact:
            safe = np.where(z == 0, 1.0, z)
            return np.where(z == 0, 0.0, np.conj(sz._series_N(1 / np.conj(safe))))
        out = np.empty(z.shape, dtype=complex)
        for i, r in enumerate(radii):
            if r == 0:
                out[i] = 0.0
            elif r == 1.0:
                out[i] = np.conj(np.asarray(sz.N_circle(angles)))
            else:
                out[i] = np.conj(self._N_ring(1.0 / r, angles))
        return out


def make_approximant(kind, sz: SzegoEvaluator, n: int, k: Optional[int] = None,
                     epsilon: float = 0.5, sigma: float = 0.5) -> Approximant:
    """Build an approximant; ``k`` defaults to the potential's smoothness index.

    Weights without a finite index (trigonometric polynomials) satisfy the
    hypotheses for every ``k`` and use ``ANALYTIC_ORDER``.

    Raises
    ------
    ValueError
        For kinds needing ``k`` on a potential of unbounded smoothness, or a
        jump model without jump data.
    """
    kind = ApproxKind(kind)
    if k is None:
        k = sz.V.smoothness_k
    if k is None and kind == ApproxKind.JUMP_MODEL:
        raise ValueError("the jump model needs a potential with jump data")
    if k is None:
        k = ANALYTIC_ORDER
    fn = None
    if kind == ApproxKind.JUMP_MODEL:
        fn = f_n(sz.V, sz, n)
    return Approximant(kind, sz, n, k, epsilon, sigma, fn)


def attract_radius(n: int, k: int) -> float:
    """``1 - (k+1) log n / n``."""
    return 1.0 - (k + 1) * math.log(n) / n


def forbidden_radius(n: int, k: int, delta: float = 0.0) -> float:
    """``exp(-(k - delta) log n / n)``: zero-free for larger moduli."""
    return math.exp(-(k - delta) * math.log(n) / n)


def bulge_radius(n: int, k: int) -> float:
    """``1 - k log n / n - log log n / n``."""
    return 1.0 - (k * math.log(n) + math.log(math.log(n))) / n


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

@dataclass
class ErrorEntry:
    n: int
    sup_error: float
    samples: int


@dataclass
class ErrorReport:
    """Sup errors for one approximant kind (or invariant) over several ``n``."""

    region: str
    kind: str
    entries: List[ErrorEntry] = field(default_factory=list)

    @property
    def n_list(self) -> List[int]:
        return [e.n for e in self.entries]

    @property
    def sup_errors(self) -> List[float]:
        return [e.sup_error for e in self.entries]

    def add(self, n: int, err: float, samples: int) -> None:
        self.entries.append(ErrorEntry(n, float(err), samples))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "sup_error", "samples"])
        for e in self.entries:
            w.writerow([e.n, repr(e.sup_error), e.samples])
        return buf.getvalue()


def _normalized_error(kind: ApproxKind, approx: Approximant, pi: np.ndarray, z: np.ndarray,
                      target: np.ndarray) -> np.ndarray:
    n = approx.n
    if kind in (ApproxKind.OUTSIDE_FIXED, ApproxKind.CIRCLE_FIXED,
                ApproxKind.OUTSIDE_VARYING, ApproxKind.CIRCLE_VARYING):
        return np.abs(pi / target - 1.0)
    if kind in (ApproxKind.INSIDE_FIXED, ApproxKind.INSIDE_DEEP):
        return np.abs(pi - target)
    if kind == ApproxKind.INSIDE_VARYING:
        cN = approx._conjN_lattice(np.abs(z[:, 0]), np.angle(z[0]))
        return np.abs((pi - target) * np.exp(-n * cN))
    # jump model in the form n^{k+1} e^{-conjN} (pi - model)
    cN = approx._conjN_lattice(np.abs(z[:, 0]), np.angle(z[0]))
    return np.abs(float(n) ** (approx.k + 1) * np.exp(-cN) * (pi - target))


def sup_error(approx: Approximant, res: OPUCResult, region: Optional[Region] = None) -> ErrorEntry:
    """Sup over the region's sample set of the theorem's normalized error.

    * outside / circle: ``|pi_n z^{-n} e^{-sN} - 1|`` (``s = 1`` or ``n``)
    * inside (fixed): ``|pi_n - z^n e^{-V0 - conjN} e^{E_k V}|``
    * deep: ``|pi_n|``
    * inside (varying): ``|pi_n e^{-n conjN} - z^n e^{i n E_k Omega}|``
    * jump model: ``|n^{k+1} e^{-conjN} pi_n - n^{k+1} z^n e^{-V0-2 conjN} e^{E_k V} B - f_n|``
    """
    region = region or default_region(approx.kind, approx.n, k=approx.k, sigma=approx.sigma)
    target = approx.on_lattice(region.radii, region.angles)
    z = region.points()
    pi = res.evaluate_float(approx.n, z)
    err = _normalized_error(approx.kind, approx, pi, z, target)
    return ErrorEntry(approx.n, float(np.max(err)), region.count)


def gamma_error(res: OPUCResult, n: int, mode: str = "fixed") -> float:
    """``|gamma_n^2 e^{-V0} - 1|`` (fixed) or ``|gamma_{n-1}^2 e^{-n V0} - 1|`` (varying).

    For a varying weight ``res`` must come from the degree-``n`` weight.
    """
    idx = n if mode == "fixed" else n - 1
    return float(abs(res.gamma_sq_scaled(idx) - 1))


# ---------------------------------------------------------------------------
# series drivers
# ---------------------------------------------------------------------------

def fixed_error_series(V: Potential, n_list: Sequence[int], kinds: Sequence,
                       ctx: PrecisionContext = DEFAULT_CONTEXT, cache_dir=None,
                       sz: Optional[SzegoEvaluator] = None) -> Dict[str, ErrorReport]:
    """Error reports for a fixed weight over ``n_list`` (one moment table)."""
    sz = sz or szego_apparatus(V, ctx)
    n_max = max(n_list)
    w = WeightSpec(V)
    res = levinson_opuc(build_moments(w, n_max, ctx, cache_dir=cache_dir))
    reports: Dict[str, ErrorReport] = {}
    for kind in kinds:
        if kind == "gamma":
            rep = ErrorReport("norming constant", "gamma")
            for n in n_list:
                rep.add(n, gamma_error(res, n), 1)
        elif kind == "alpha":
            rep = ErrorReport("Verblunsky coefficient", "alpha")
            for n in n_list:
                rep.add(n, float(abs(res.alpha[n])), 1)
        else:
            kind = ApproxKind(kind)
            rep = None
            for n in n_list:
                ap = make_approximant(kind, sz, n)
                reg = default_region(kind, n, k=ap.k)
                rep = rep or ErrorReport(reg.name, kind.value)
                e = sup_error(ap, res, reg)
                rep.add(n, e.sup_error, e.samples)
        reports[rep.kind] = rep
    return reports


def varying_error_series(V: Potential, n_list: Sequence[int], kinds: Sequence,
                         ctx: PrecisionContext = DEFAULT_CONTEXT, cache_dir=None,
                         sz: Optional[SzegoEvaluator] = None) -> Dict[str, ErrorReport]:
    """Error reports for ``e^{-nV}``: one weight (and moment table) per ``n``."""
    sz = sz or szego_apparatus(V, ctx)
    reports: Dict[str, ErrorReport] = {}
    for n in n_list:
        w = WeightSpec(V, "varying", n)
        res = levinson_opuc(build_moments(w, n, ctx, cache_dir=cache_dir))
        for kind in kinds:
            if kind == "gamma":
                rep = reports.setdefault("gamma", ErrorReport("norming constant", "gamma"))
                rep.add(n, gamma_error(res, n, "varying"), 1)
            elif kind == "alpha":
                rep = reports.setdefault("alpha", ErrorReport("Verblunsky coefficient", "alpha"))
                rep.add(n, float(abs(res.alpha[n])), 1)
            else:
                kind = ApproxKind(kind)
                ap = make_approximant(kind, sz, n)
                reg = default_region(kind, n, k=ap.k)
                rep = reports.setdefault(kind.value, ErrorReport(reg.name, kind.value))
                e = sup_error(ap, res, reg)
                rep.add(n, e.sup_error, e.samples)
    return reports


# ---------------------------------------------------------------------------
# rate fits
# ---------------------------------------------------------------------------

@dataclass
class RateFit:
    """``log err = a + p log n`` (after removing ``log log n`` when requested)."""

    exponent: float
    log_prefactor: float
    with_loglog: bool
    residual_rms: float
    n_used: List[int] = field(default_factory=list)
    dropped: List[int] = field(default_factory=list)

    @property
    def prefactor(self) -> float:
        return math.exp(self.log_prefactor)

    def to_json(self) -> str:
        return json.dumps({"exponent": self.exponent, "prefactor": self.prefactor,
                           "residual": self.residual_rms, "with_loglog": self.with_loglog,
                           "n_used": self.n_used, "dropped": self.dropped},
                          indent=1, sort_keys=True)


def fit_rate(report: ErrorReport, with_loglog: bool = False) -> RateFit:
    """Least-squares exponent of an error series.

    Non-positive errors are dropped and listed in ``RateFit.dropped``.

    Raises
    ------
    ValueError
        If fewer than four usable points remain.
    """
    ns = np.array([e.n for e in report.entries if e.sup_error > 0], dtype=float)
    errs = np.array([e.sup_error for e in report.entries if e.sup_error > 0])
    dropped = [e.n for e in report.entries if not e.sup_error > 0]
    if dropped:
        logger.info("fit_rate: dropped non-positive errors at n=%s", dropped)
    if ns.size < 4:
        raise ValueError(f"rate fit needs >= 4 positive errors, got {ns.size}")
    y = np.log(errs)
    if with_loglog:
        y = y - np.log(np.log(ns))
    A = np.stack([np.ones_like(ns), np.log(ns)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return RateFit(float(coef[1]), float(coef[0]), with_loglog,
                   float(np.sqrt(np.mean(resid ** 2))), [int(v) for v in ns], dropped)


def two_point_slope(report: ErrorReport, i: int = -2, j: int = -1) -> float:
    """``log(err_j / err_i) / log(n_j / n_i)``."""
    a, b = report.entries[i], report.entries[j]
    return math.log(b.sup_error / a.sup_error) / math.log(b.n / a.n)

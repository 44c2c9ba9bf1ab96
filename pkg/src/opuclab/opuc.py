"""
Monic orthogonal polynomials on the unit circle and the matrix ``M^n``.

The weight is ``phi = e^{-V}`` (fixed) or ``phi = e^{-nV}`` (varying, with
the degree tied to ``n``).  Moments are computed in extended precision and
scaled by ``e^{V0}`` or ``e^{n V0}`` so that the Toeplitz data stay of
order one; every quantity downstream is reported in true (unscaled) form.

The polynomials come from the Szego recurrence in coefficient space,

    pi_{n+1}(z) = z pi_n(z) + alpha_{n+1} pi_n^*(z),

with ``alpha_{n+1}`` fixed by orthogonality of ``pi_{n+1}`` to the constant
and with ``||pi_n||^2`` recomputed from the moments at every step (not from
the product formula), so the identity ``(gamma_{n-1}/gamma_n)^2 = 1 - |alpha_n|^2``
remains an independent check.
"""

from __future__ import annotations

import functools
import hashlib
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .numerics import (DEFAULT_CONTEXT, PrecisionContext, arc_for_bandwidth,
                       circle_fourier_mp, circle_gauss_rule, is_mp)
from .potentials import JumpFamily, Potential, from_dict
from .szego import DomainError

logger = logging.getLogger(__name__)


class PrecisionGateError(RuntimeError):
    """Working precision is too low for the requested weight and degree."""

    def __init__(self, message: str, required_bits: int):
        super().__init__(message)
        self.required_bits = required_bits


class PositivityError(ArithmeticError):
    """A Verblunsky coefficient reached modulus one (broken positivity)."""


# ---------------------------------------------------------------------------
# weights and moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpec:
    """Circle weight ``e^{-V}`` (``mode='fixed'``) or ``e^{-nV}`` (``mode='varying'``)."""

    potential: Potential
    mode: str = "fixed"
    n_weight: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ("fixed", "varying"):
            raise ValueError("mode must be 'fixed' or 'varying'")
        if self.mode == "varying" and (self.n_weight is None or self.n_weight < 1):
            raise ValueError("varying mode requires n_weight >= 1")

    @property
    def exponent_factor(self) -> int:
        """``1`` for fixed weights, ``n`` for varying ones."""
        return 1 if self.mode == "fixed" else int(self.n_weight)

    def phi(self, theta, V0=None):
        """Weight at ``theta``; multiplied by ``e^{s V0}`` when ``V0`` is given."""
        s = self.exponent_factor
        V = self.potential
        mp_in = is_mp(theta)
        if mp_in:
            mp = theta.context
            if s == 1 and isinstance(V, JumpFamily):
                val = V.weight(theta)
                return val if V0 is None else val * mp.exp(V0)
            shift = 0 if V0 is None else V0
            return mp.exp(s * (shift - V(theta)))
        shift = 0.0 if V0 is None else float(V0)
        if s == 1 and isinstance(V, JumpFamily):
            val = V.weight(theta)
            return val if V0 is None else val * math.exp(shift)
        return np.exp(s * (shift - np.asarray(V(theta))))

    def to_dict(self) -> dict:
        return {"potential": self.potential.to_dict(), "mode": self.mode,
                "n_weight": self.n_weight}

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSpec":
        return cls(from_dict(d["potential"]), d.get("mode", "fixed"), d.get("n_weight"))


@functools.lru_cache(maxsize=64)
def potential_mean(V: Potential, bits: int):
    """``V0`` (circle mean of ``V``) at ``bits`` precision."""
    ctx = PrecisionContext(bits)
    mp = ctx.mp
    exact = V.fourier_exact()
    if exact is not None:
        return mp.mpf(complex(exact.get(0, 0)).real)
    return mp.mpf(circle_fourier_mp(lambda t: V(t), 0, V.breakpoints(mp), ctx)[0].real)


def _max_slope(V: Potential) -> float:
    th = np.linspace(-math.pi, math.pi, 4097)
    return float(np.max(np.abs(V.jet(th, 1)[1])))


def required_bits(w: WeightSpec, n: int) -> int:
    """Precision needed for a varying weight: ``n osc(V) / ln 2 + 64``."""
    if w.mode == "fixed":
        return 64
    return int(math.ceil(n * w.potential.osc() / math.log(2) + 64))


@dataclass(frozen=True)
class MomentTable:
    """Scaled moments ``mu_j = mean(e^{-ij theta} phi) e^{scale_exponent}``, ``0 <= j <= n_max``.

    Negative indices follow from Hermitian symmetry ``mu_{-j} = conj(mu_j)``.
    """

    moments: Tuple
    scale_exponent: object
    n_max: int
    bits: int
    weight: WeightSpec
    content_hash: str = ""

    def mu(self, j: int):
        if abs(j) > self.n_max:
            raise IndexError(f"moment {j} beyond table range {self.n_max}")
        return self.moments[j] if j >= 0 else self.moments[-j].conjugate()

    def to_json(self) -> str:
        digits = int(self.bits * math.log10(2)) + 2
        mp = PrecisionContext(self.bits).mp
        doc = {"weight": self.weight.to_dict(), "bits": self.bits, "n_max": self.n_max,
               "scale_exponent": mp.nstr(self.scale_exponent, digits),
               "moments": [[mp.nstr(c.real, digits), mp.nstr(c.imag, digits)]
                           for c in self.moments]}
        return json.dumps(doc, indent=0, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MomentTable":
        doc = json.loads(text)
        bits = int(doc["bits"])
        mp = PrecisionContext(bits).mp
        moms = tuple(mp.mpc(a, b) for a, b in doc["moments"])
        h = hashlib.sha256(text.encode()).hexdigest()[:16]
        return cls(moms, mp.mpf(doc["scale_exponent"]), int(doc["n_max"]), bits,
                   WeightSpec.from_dict(doc["weight"]), h)

    def toeplitz(self, n: int):
        """``(n+1) x (n+1)`` Toeplitz section ``T[j, m] = <z^j, z^m> = mu_{m-j}``."""
        mp = PrecisionContext(self.bits).mp
        return mp.matrix([[self.mu(m - j) for m in range(n + 1)] for j in range(n + 1)])


def cache_path(cache_dir, w: WeightSpec, n_max: int, bits: int) -> Path:
    return Path(cache_dir) / w.content_hash() / f"{w.mode}-{bits}-{n_max}.json"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_moments(w: WeightSpec, n_max: int, ctx: PrecisionContext = DEFAULT_CONTEXT,
                  cache_dir=None) -> MomentTable:
    """Scaled moments of the weight up to index ``n_max``.

    Parameters
    ----------
    w : WeightSpec
    n_max : int
    ctx : PrecisionContext
    cache_dir : path, optional
        Reuse or store the table under ``<cache_dir>/<weight hash>/``.

    Raises
    ------
    PrecisionGateError
        For a varying weight when ``ctx.mantissa_bits < n osc(V)/ln 2 + 64``.
    """
    need = required_bits(w, w.n_weight or 0)
    if ctx.mantissa_bits < need:
        raise PrecisionGateError(
            f"varying weight with n={w.n_weight} needs at least {need} bits "
            f"(have {ctx.mantissa_bits})", need)
    if cache_dir is not None:
        path = cache_path(cache_dir, w, n_max, ctx.mantissa_bits)
        if path.exists():
            logger.info("moment cache hit %s", path)
            return MomentTable.from_json(path.read_text())
    table = _compute_moments(w, n_max, ctx.mantissa_bits, ctx.base_quad_points)
    if cache_dir is not None:
        text = table.to_json()
        _atomic_write(path, text)
        table = MomentTable.from_json(text)
    return table


@functools.lru_cache(maxsize=16)
def _compute_moments(w: WeightSpec, n_max: int, bits: int, base_quad_points: int) -> MomentTable:
    ctx = PrecisionContext(bits, base_quad_points)
    mp = ctx.mp
    V = w.potential
    s = w.exponent_factor
    V0 = potential_mean(V, bits)
    exact = V.fourier_exact()
    if exact is not None and all(complex(c) == 0 for j, c in exact.items() if j != 0):
        # constant potential: the scaled weight is identically 1
        vals = [mp.mpc(1)] + [mp.mpc(0)] * n_max
    else:
        bandwidth = 2.0 * s * _max_slope(V) + 10.0
        vals = circle_fourier_mp(lambda t: w.phi(t, V0), n_max, V.breakpoints(mp), ctx,
                                 bandwidth=bandwidth)
    vals[0] = mp.mpc(vals[0].real)
    text = json.dumps([w.to_dict(), n_max, bits], sort_keys=True)
    return MomentTable(tuple(vals), s * V0, n_max, bits, w,
                       hashlib.sha256(text.encode()).hexdigest()[:16])


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

@dataclass
class OPUCResult:
    """Monic polynomials ``pi_0..pi_nmax`` and their invariants.

    Attributes
    ----------
    coeffs : list of lists
        ``coeffs[n][j]`` is the coefficient of ``z^j`` in ``pi_n``.
    norms : list
        ``||pi_n||^2`` in the scaled inner product.
    gamma : list
        True norming constants ``gamma_n = ||pi_n||^{-1}``.
    alpha : list
        ``alpha_n = pi_n(0)``; ``alpha_0 = 1``.
    scale_exponent : mpf
        ``s V0`` used to scale the moments.
    """

    n_max: int
    coeffs: List[List]
    norms: List
    gamma: List
    alpha: List
    scale_exponent: object
    bits: int
    weight: Optional[WeightSpec] = None
    moment_hash: str = ""

    @property
    def mp(self):
        return PrecisionContext(self.bits).mp

    def gamma_sq_scaled(self, n: int):
        """``gamma_n^2 e^{-scale_exponent} = 1 / ||pi_n||^2_scaled``."""
        return 1 / self.norms[n]

    def star_coeffs(self, n: int) -> List:
        c = self.coeffs[n]
        return [c[n - j].conjugate() for j in range(n + 1)]

    def evaluate(self, n: int, z, star: bool = False):
        """``pi_n(z)`` (or ``pi_n^*(z)``) by Horner's rule in extended precision."""
        c = self.star_coeffs(n) if star else self.coeffs[n]
        mp = self.mp
        z = mp.mpc(z)
        acc = mp.mpc(0)
        for a in reversed(c):
            acc = acc * z + a
        return acc

    def derivative(self, n: int, z, star: bool = False):
        c = self.star_coeffs(n) if star else self.coeffs[n]
        mp = self.mp
        z = mp.mpc(z)
        acc = mp.mpc(0)
        for j in range(n, 0, -1):
            acc = acc * z + j * c[j]
        return acc

    def coeffs_complex(self, n: int) -> np.ndarray:
        return np.array([complex(c) for c in self.coeffs[n]])

    def evaluate_float(self, n: int, z) -> np.ndarray:
        """``pi_n(z)`` in double precision for arrays of points."""
        c = self.coeffs_complex(n)
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for a in c[::-1]:
            acc = acc * z + a
        return acc

    def to_json(self) -> str:
        mp = self.mp
        digits = int(self.bits * math.log10(2)) + 2

        def cs(c):
            return [mp.nstr(mp.mpf(c.real), digits), mp.nstr(mp.mpf(c.imag), digits)]

        doc = {"n_max": self.n_max, "bits": self.bits,
               "weight": self.weight.to_dict() if self.weight else None,
               "moment_hash": self.moment_hash,
               "scale_exponent": mp.nstr(self.scale_exponent, digits),
               "coeffs": [[cs(c) for c in row] for row in self.coeffs],
               "gamma": [mp.nstr(g, digits) for g in self.gamma],
               "alpha": [cs(a) for a in self.alpha],
               "norms_scaled": [mp.nstr(e, digits) for e in self.norms]}
        return json.dumps(doc, indent=0, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "OPUCResult":
        doc = json.loads(text)
        bits = int(doc["bits"])
        mp = PrecisionContext(bits).mp
        coeffs = [[mp.mpc(a, b) for a, b in row] for row in doc["coeffs"]]
        w = WeightSpec.from_dict(doc["weight"]) if doc.get("weight") else None
        return cls(int(doc["n_max"]), coeffs, [mp.mpf(e) for e in doc["norms_scaled"]],
                   [mp.mpf(g) for g in doc["gamma"]], [mp.mpc(a, b) for a, b in doc["alpha"]],
                   mp.mpf(doc["scale_exponent"]), bits, w, doc.get("moment_hash", ""))


def _inner_with_monomial(c: Sequence, m: int, mom: MomentTable):
    """``<pi, z^m> = sum_j c_j mu_{m-j}``."""
    return sum((cj * mom.mu(m - j) for j, cj in enumerate(c)), mom.moments[0] * 0)


def levinson_opuc(mom: MomentTable, n_max: Optional[int] = None) -> OPUCResult:
    """Monic OPUC by the Szego recurrence on the scaled moment table.

    Raises
    ------
    PositivityError
        If some ``|alpha_n| >= 1`` (precision or quadrature fault).
    """
    n_max = mom.n_max if n_max is None else n_max
    if n_max > mom.n_max:
        raise ValueError(f"moment table only reaches {mom.n_max}")
    mp = PrecisionContext(mom.bits).mp
    scale = mp.exp(mom.scale_exponent)
    c = [mp.mpc(1)]
    coeffs = [c]
    E = mom.moments[0].real
    if E <= 0:
        raise PositivityError("zeroth moment is not positive")
    norms, alpha = [E], [mp.mpc(1)]
    for n in range(n_max):
        # <z pi_n, 1> = sum_j c_j conj(mu_{j+1});  <pi_n^*, 1> = ||pi_n||^2
        num = sum((c[j] * mom.moments[j + 1].conjugate() for j in range(n + 1)), mp.mpc(0))
        a = -num / E
        if abs(a) >= 1:
            raise PositivityError(f"|alpha_{n + 1}| = {mp.nstr(abs(a), 8)} >= 1")
        star = [c[n - j].conjugate() for j in range(n + 1)]
        new = [a * star[0]] + [c[j - 1] + a * star[j] for j in range(1, n + 1)] + [c[n]]
        c = new
        coeffs.append(c)
        E = _inner_with_monomial(c, n + 1, mom).real
        if E <= 0:
            raise PositivityError(f"||pi_{n + 1}||^2 is not positive")
        norms.append(E)
        alpha.append(c[0])
    gamma = [mp.sqrt(scale / e) for e in norms]
    return OPUCResult(n_max, coeffs, norms, gamma, alpha, mom.scale_exponent, mom.bits,
                      mom.weight, mom.content_hash)


def gram_schmidt_oracle(w: WeightSpec, n: int, ctx: PrecisionContext = DEFAULT_CONTEXT,
                        mom: Optional[MomentTable] = None) -> OPUCResult:
    """Modified Gram-Schmidt on ``1, z, ..., z^n`` in the moment inner product.

    An ``O(n^3)`` reference implementation independent of the recurrence.
    """
    if n > 32:
        raise ValueError("gram_schmidt_oracle is meant for n <= 32")
    mom = mom if mom is not None else build_moments(w, n, ctx)
    mp = PrecisionContext(mom.bits).mp

    def inner(f, g):
        acc = mp.mpc(0)
        for j, fj in enumerate(f):
            if fj == 0:
                continue
            for m, gm in enumerate(g):
                if gm != 0:
                    acc += fj * gm.conjugate() * mom.mu(m - j)
        return acc

    basis: List[List] = []
    norms = []
    for k in range(n + 1):
        v = [mp.mpc(0)] * k + [mp.mpc(1)]
        for i, q in enumerate(basis):
            proj = inner(v, q) / norms[i]
            v = [v[j] - proj * (q[j] if j < len(q) else 0) for j in range(k + 1)]
        nrm = inner(v, v).real
        if nrm <= 0:
            raise PositivityError(f"Gram-Schmidt lost positivity at degree {k}")
        basis.append(v)
        norms.append(nrm)
    scale = mp.exp(mom.scale_exponent)
    gamma = [mp.sqrt(scale / e) for e in norms]
    alpha = [q[0] for q in basis]
    return OPUCResult(n, basis, norms, gamma, alpha, mom.scale_exponent, mom.bits, w,
                      mom.content_hash)


def orthogonality_residual(res: OPUCResult, mom: MomentTable, n: int) -> float:
    """``max_{j<n} |<pi_n, z^j>| / ||pi_n||`` in the scaled inner product."""
    c = res.coeffs[n]
    nrm = res.norms[n] ** 0.5
    return max((float(abs(_inner_with_monomial(c, j, mom)) / nrm) for j in range(n)),
               default=0.0)


# ---------------------------------------------------------------------------
# Riemann-Hilbert matrix
# ---------------------------------------------------------------------------

class RHPMatrix:
    """The matrix ``M^n(z)`` off the unit circle.

    First column from the polynomials; second column from Cauchy integrals
    ``C[h](z) = mean_theta h(theta) s / (s - z)`` (``s = e^{i theta}``) with

    * ``M12 = C[pi_n s^{-n} phi]``,
    * ``M22 = -gamma_{n-1}^2 C[conj(pi_{n-1}(s)) s^{-1} phi]``.

    For ``|z| >= 1/2`` the quadratic Taylor polynomial of the density at
    ``z/|z|`` is subtracted first (its Cauchy transform is known in closed
    form), which keeps the quadrature accurate up to the circle.
    """

    def __init__(self, res: OPUCResult, w: WeightSpec, n: int,
                 ctx: PrecisionContext = DEFAULT_CONTEXT, level: Optional[int] = None,
                 max_arc: Optional[float] = None, subtract: bool = True):
        if n > res.n_max:
            raise ValueError(f"degree {n} beyond computed range {res.n_max}")
        self.res, self.w, self.n, self.ctx = res, w, n, ctx
        self.mp = ctx.mp
        self.fixed_level = level
        self.subtract = subtract
        self._rules: Dict[int, tuple] = {}
        mp = self.mp
        if n >= 1:
            self.gamma_sq = res.gamma[n - 1] ** 2
        self.breaks = w.potential.breakpoints(mp) or [-mp.pi]
        s = w.exponent_factor
        if max_arc is None:
            max_arc = arc_for_bandwidth(n + 2 * s * _max_slope(w.potential) + 20, 48)
        self.max_arc = max_arc

    # densities -------------------------------------------------------------------
    def _densities(self, theta):
        mp, n, res = self.mp, self.n, self.res
        sv = mp.expj(theta)
        phi = self.w.phi(theta)
        if n == 0:
            return phi, mp.mpc(0)
        h1 = res.evaluate(n, sv) * sv ** (-n) * phi
        h2 = res.evaluate(n - 1, sv).conjugate() / sv * phi
        return h1, h2

    def _density_jets(self, theta):
        """``(h, dh/ds, d^2h/ds^2)`` along the circle for both densities.

        The theta-derivatives come from a five-point stencil with step
        ``2^{-bits/5}``, which keeps truncation and rounding far below ``tol``.
        """
        mp = self.mp
        eta = mp.mpf(2) ** (-(self.ctx.mantissa_bits // 5))
        vals = [self._densities(theta + k * eta) for k in (-2, -1, 0, 1, 2)]
        sv = mp.expj(theta)
        out = []
        for i in range(2):
            f = [v[i] for v in vals]
            d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * eta)
            d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * eta ** 2)
            out.append((f[2], d1 / (1j * sv), -(d2 - 1j * d1) / sv ** 2))
        return out

    def _rule(self, level: int):
        if level not in self._rules:
            nodes = []
            for th, wt in circle_gauss_rule(self.breaks, level, self.ctx, max_arc=self.max_arc):
                sv = self.mp.expj(th)
                h1, h2 = self._densities(th)
                nodes.append((sv, wt, h1, h2))
            self._rules[level] = nodes
        return self._rules[level]

    def _cauchy_pair(self, z, level: int):
        mp = self.mp
        r = abs(z)
        subtract = self.subtract and r >= 0.5
        if subtract:
            zs = z / r
            (p1, a1, b1), (p2, a2, b2) = self._density_jets(mp.arg(z))
            b1, b2 = b1 / 2, b2 / 2
        acc1 = mp.mpc(0)
        acc2 = mp.mpc(0)
        for sv, wt, h1, h2 in self._rule(level):
            k = wt * sv / (sv - z)
            if subtract:
                u = sv - zs
                acc1 += (h1 - p1 - u * (a1 + u * b1)) * k
                acc2 += (h2 - p2 - u * (a2 + u * b2)) * k
            else:
                acc1 += h1 * k
                acc2 += h2 * k
        if subtract and r < 1:
            u = z - zs
            acc1 += p1 + u * (a1 + u * b1)
            acc2 += p2 + u * (a2 + u * b2)
        return acc1, acc2

    def cauchy(self, z):
        """Both Cauchy integrals at ``z``, converged by level doubling."""
        if self.fixed_level is not None:
            return self._cauchy_pair(z, self.fixed_level)
        # the subtracted density leaves an O(dist^3) term no fixed rule resolves
        dist = abs(abs(z) - 1)
        target = self.ctx.tol * 1e-3 + 10 * dist ** 3
        level = 5
        prev = self._cauchy_pair(z, level)
        while level < 10:
            level += 1
            cur = self._cauchy_pair(z, level)
            diff = max(abs(cur[0] - prev[0]), abs(cur[1] - prev[1]))
            if diff < target:
                return cur
            prev = cur
        logger.warning("Cauchy integral at z=%s did not converge (diff %.2e)", z, float(diff))
        return prev

    def __call__(self, z):
        mp = self.mp
        z = mp.mpc(z)
        if abs(abs(z) - 1) < mp.mpf(2) ** (-self.ctx.mantissa_bits + 8):
            raise DomainError("M^n is evaluated off the unit circle only")
        c1, c2 = self.cauchy(z)
        if self.n == 0:
            return mp.matrix([[1, c1], [0, 1]])
        m11 = self.res.evaluate(self.n, z)
        m21 = -self.gamma_sq * self.res.evaluate(self.n - 1, z, star=True)
        return mp.matrix([[m11, c1], [m21, -self.gamma_sq * c2]])


def assemble_M(res: OPUCResult, w: WeightSpec, n: int, z,
               ctx: PrecisionContext = DEFAULT_CONTEXT):
    """``M^n(z)`` as a 2x2 mpmath matrix (``|z| != 1``)."""
    return RHPMatrix(res, w, n, ctx)(z)


def _conj_matrix(A, mp):
    return mp.matrix([[A[i, j].conjugate() for j in range(2)] for i in range(2)])


def symmetry_defect(M: RHPMatrix, z) -> float:
    """``max |M(z) - i^{s3} conj(M(0))^{-1} conj(M(1/conj z)) (-i z^n)^{s3}|``."""
    mp = M.mp
    z = mp.mpc(z)
    n = M.n
    lhs = M(z)
    M0 = M(mp.mpc(0))
    inv0 = _conj_matrix(M0, mp) ** -1
    refl = _conj_matrix(M(1 / z.conjugate()), mp)
    left = mp.matrix([[1j, 0], [0, -1j]])
    t = -1j * z ** n
    right = mp.matrix([[t, 0], [0, 1 / t]])
    rhs = left * inv0 * refl * right
    return max(float(abs(lhs[i, j] - rhs[i, j])) for i in range(2) for j in range(2))


def det_defect(M: RHPMatrix, z) -> float:
    A = M(z)
    return float(abs(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0] - 1))


def rhp_residual(res: OPUCResult, w: WeightSpec, n: int, theta_samples: Sequence[float],
                 ctx: PrecisionContext = DEFAULT_CONTEXT, level: Optional[int] = None,
                 delta=None, max_arc: Optional[float] = None, subtract: bool = True) -> float:
    """Max entry of ``M_+ - M_- v`` on the circle, ``v = [[1, s^{-n} phi], [0, 1]]``.

    Boundary values come from ``r = 1 -+ j delta`` (``j = 1, 2, 3``) by quadratic
    extrapolation (``delta = sqrt(ctx.tol)`` by default), so the error of the
    limit is ``O(delta^3)``.  ``level`` and ``max_arc`` pin the Gauss rule
    for refinement studies.  With ``subtract=True`` the closed-form Taylor
    term carries the jump at any rule, so quadrature refinement is only
    visible with ``subtract=False``.
    """
    mp = ctx.mp
    M = RHPMatrix(res, w, n, ctx, level=level, max_arc=max_arc, subtract=subtract)
    d = mp.sqrt(mp.mpf(ctx.tol)) if delta is None else mp.mpf(delta)
    worst = 0.0
    for th in theta_samples:
        th = mp.mpf(th)
        sv = mp.expj(th)
        plus = 3 * M((1 - d) * sv) - 3 * M((1 - 2 * d) * sv) + M((1 - 3 * d) * sv)
        minus = 3 * M((1 + d) * sv) - 3 * M((1 + 2 * d) * sv) + M((1 + 3 * d) * sv)
        jump = mp.matrix([[1, sv ** (-n) * w.phi(th)], [0, 1]])
        diff = plus - minus * jump
        worst = max(worst, max(float(abs(diff[i, j])) for i in range(2) for j in range(2)))
    return worst

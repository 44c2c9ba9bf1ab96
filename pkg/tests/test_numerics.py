import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opuclab.numerics import (LOG2, PolarPoint, PrecisionContext, QuadratureError, bump,
                              bump_mp, bump_prime, periodic_trapezoid, segmented_gauss,
                              trapezoid_converged, wrap_angle)


# -- precision context --------------------------------------------------------

def test_context_defaults():
    ctx = PrecisionContext()
    assert ctx.mantissa_bits == 256
    assert ctx.base_quad_points == 4096
    assert ctx.tol == 2.0 ** -64
    assert ctx.tol < 1e-4


def test_context_rejects_low_precision():
    with pytest.raises(ValueError):
        PrecisionContext(32)


def test_tolerance_monotone_in_bits():
    tols = [PrecisionContext(b).tol for b in (64, 128, 256, 512)]
    assert tols == sorted(tols, reverse=True)


def test_private_contexts_do_not_leak():
    before = mpmath.mp.prec
    PrecisionContext(512).mp.mpf(1) / 3
    assert mpmath.mp.prec == before


# -- polar points -------------------------------------------------------------

def test_polar_point_wraps_angle():
    p = PolarPoint(2.0, 3 * math.pi / 2)
    assert p.theta == pytest.approx(-math.pi / 2)
    assert abs(p.z - 2.0 * complex(0, -1)) < 1e-15


def test_polar_point_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        PolarPoint(0.0, 0.0)


@given(st.floats(-50, 50))
def test_wrap_angle_range_and_period(theta):
    w = wrap_angle(theta)
    assert -math.pi <= w < math.pi
    assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-9)
    assert math.isclose(math.sin(w), math.sin(theta), abs_tol=1e-9)


# -- trapezoid ----------------------------------------------------------------

def test_trapezoid_constant(ctx256):
    assert periodic_trapezoid(lambda t: ctx256.mpf(1), 16, ctx256) == 1


def test_trapezoid_single_mode(ctx256):
    mp = ctx256.mp
    assert abs(periodic_trapezoid(lambda t: mp.expj(t), 16, ctx256)) < 1e-70


@given(st.integers(-7, 7), st.integers(-7, 7))
@settings(max_examples=30, deadline=None)
def test_trapezoid_orthogonality(j, m):
    ctx = PrecisionContext(128)
    mp = ctx.mp
    val = periodic_trapezoid(lambda t: mp.expj((j - m) * t), 16, ctx)
    assert abs(val - (1 if j == m else 0)) < 1e-30


def test_trapezoid_self_convergence(ctx256):
    mp = ctx256.mp
    f = lambda t: mp.exp(-mp.cos(t))
    a = periodic_trapezoid(f, 4096, ctx256)
    b = periodic_trapezoid(f, 8192, ctx256)
    assert abs(a - b) < ctx256.tol
    # independent closed form: mean of e^{-cos} is I_0(1)
    assert abs(a - mp.besseli(0, 1)) < 1e-60


def test_trapezoid_rejects_nonfinite(ctx128):
    mp = ctx128.mp
    with pytest.raises(QuadratureError) as info:
        periodic_trapezoid(lambda t: mp.inf if t == 0 else mp.mpf(1), 8, ctx128)
    assert info.value.node_index == 4


def test_trapezoid_converged_reports_nodes(ctx128):
    mp = ctx128.mp
    val, M = trapezoid_converged(lambda t: mp.exp(mp.sin(t)), ctx128, M0=16)
    assert abs(val - mp.besseli(0, 1)) < 1e-30
    assert M >= 32


# -- segmented Gauss ----------------------------------------------------------

def test_segmented_gauss_constant(ctx256):
    mp = ctx256.mp
    val = segmented_gauss(lambda t: mp.mpf(1), [mp.mpf(-1), mp.mpf(2)], 8, ctx256)
    assert abs(val - 1) < 1e-70


def test_segmented_gauss_abs_sine(ctx256):
    mp = ctx256.mp
    val = segmented_gauss(lambda t: abs(mp.sin(t)), [-mp.pi, mp.mpf(0)], 32, ctx256)
    assert abs(val - 2 / mp.pi) < 1e-60


def test_segmented_gauss_empty_breakpoints_delegates(ctx128):
    mp = ctx128.mp
    val = segmented_gauss(lambda t: mp.exp(mp.cos(t)), [], 32, ctx128)
    assert abs(val - mp.besseli(0, 1)) < 1e-30


def test_segmented_gauss_jump_weight_mean(ctx256, jump3):
    mp = ctx256.mp
    bps = jump3.breakpoints(mp)
    val = segmented_gauss(lambda t: jump3.weight(t), bps, 64, ctx256)
    # independent rule: tanh-sinh between the same kinks
    with mp.workprec(256):
        ref = mp.quad(lambda t: jump3.weight(t), list(bps) + [bps[0] + 2 * mp.pi]) / (2 * mp.pi)
    assert abs(val - ref) < 1e-30


# -- bump ---------------------------------------------------------------------

def test_bump_plateaus_and_midpoint():
    assert bump(0.0) == 1.0
    assert bump(LOG2) == 0.0
    assert bump(0.75 * LOG2) == pytest.approx(0.5, abs=1e-12)


@given(st.floats(-2, 2))
def test_bump_even_and_bounded(l):
    assert bump(l) == pytest.approx(bump(-l), abs=1e-15)
    assert 0.0 <= bump(l) <= 1.0


@given(st.floats(0.0, 0.3465))
def test_bump_plateau_inner(l):
    assert bump(l) == 1.0


def test_bump_monotone_on_transition():
    l = np.linspace(LOG2 / 2, LOG2, 400)
    assert np.all(np.diff(bump(l)) <= 0)
    inner = np.linspace(LOG2 / 2 + 0.02, LOG2 - 0.02, 400)
    assert np.all(np.diff(bump(inner)) < 0)


def test_bump_smooth_at_junctions():
    for l0 in (LOG2 / 2, LOG2):
        slopes = [abs(bump(l0 + h) - bump(l0 - h)) / (2 * h) for h in (1e-2, 5e-3, 2.5e-3)]
        assert slopes[0] >= slopes[1] >= slopes[2]
        assert slopes[-1] < 1e-20
        curv = abs(bump(l0 + 1e-3) - 2 * bump(l0) + bump(l0 - 1e-3)) / 1e-6
        assert curv < 1e-20


def test_bump_prime_matches_finite_difference():
    l = np.linspace(0.36, 0.68, 17)
    h = 1e-6
    fd = (bump(l + h) - bump(l - h)) / (2 * h)
    assert np.max(np.abs(fd - bump_prime(l))) < 1e-6


def test_bump_mp_matches_float(ctx128):
    for l in (0.0, 0.4, 0.5, 0.6, 0.7):
        assert float(bump_mp(l, ctx128.mp)) == pytest.approx(bump(l), abs=1e-14)

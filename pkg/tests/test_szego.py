import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opuclab.numerics import PolarPoint, PrecisionContext
from opuclab.potentials import Cosine, FourierList, PiecewiseCubic, Zero, constant
from opuclab.szego import (DomainError, FourierTable, build_fourier, check_condition_convex,
                           check_condition_t, extend, extension_from_derivatives,
                           kappa_prime_margin, szego_apparatus)


# -- Fourier tables -----------------------------------------------------------

def test_cosine_table_is_single_mode(ctx256):
    t = build_fourier(Cosine(0.3), ctx256)
    assert t.exact
    assert t.V0 == 0
    assert abs(t.coeff(1) - 0.15) < 1e-16 and abs(t.coeff(-1) - 0.15) < 1e-16
    assert all(t.coeff(j) == 0 for j in (2, 3, -5))


def test_constant_table(ctx256):
    t = build_fourier(constant(0.7), ctx256)
    assert abs(t.V0 - 0.7) < 1e-15
    assert all(abs(t.coeff(j)) == 0 for j in range(1, 6))


@given(st.integers(1, 40))
@settings(max_examples=20, deadline=None)
def test_table_reality(j):
    ctx = PrecisionContext(128)
    t = build_fourier(PiecewiseCubic(3.0, 0.5), ctx)
    assert t.coeff(-j) == t.coeff(j).conjugate()


def test_jump_weight_mean_self_convergence(jump3, ctx256):
    a = build_fourier(jump3, ctx256)
    b = build_fourier(jump3, PrecisionContext(256, 8192))
    assert abs(a.V0 - b.V0) < 1e-30
    # frozen value of the circle mean of V for the three-jump preset
    assert abs(float(a.V0) - (-0.03266917568174832664)) < 1e-18


def test_table_json_roundtrip(ctx128):
    t = build_fourier(PiecewiseCubic(3.0, 0.5), ctx128)
    u = FourierTable.from_json(t.to_json())
    assert u.M_trunc == t.M_trunc
    assert all(abs(u.coeff(j) - t.coeff(j)) < 1e-35 for j in range(0, 20))


# -- Szego apparatus ----------------------------------------------------------

def test_szego_at_origin_is_geometric_mean(sz_jump3, ctx256):
    mp = ctx256.mp
    assert abs(sz_jump3.S(mp.mpc(0)) - mp.exp(-sz_jump3.V0)) < 1e-60


def test_single_mode_closed_forms(ctx256):
    A = 0.4
    sz = szego_apparatus(Cosine(A), ctx256)
    z = 1.7 - 0.4j
    assert abs(sz.N(z) - A / (2 * z)) < 1e-15
    th = np.linspace(-3, 3, 13)
    assert np.max(np.abs(sz.Omega(th) - (-A * np.sin(th)))) < 1e-15
    assert np.max(np.abs(sz.kappa_prime(th) - (1 - A * np.cos(th)))) < 1e-15


def test_N_rejects_interior(sz_cos05):
    with pytest.raises(DomainError):
        sz_cos05.N(0.5)
    with pytest.raises(DomainError):
        sz_cos05.conjN(2.0)


def test_boundary_ratio_recovers_weight(sz_jump3, jump3):
    worst = 0.0
    for th in np.linspace(-3.1, 3.1, 64):
        s = complex(math.cos(th), math.sin(th))
        ratio = sz_jump3.S(s, -1) / sz_jump3.S(s, +1)
        worst = max(worst, abs(ratio - jump3.weight(th)))
    # double-precision route; the jump preset's table is truncated at 256 modes
    assert worst < 1e-10


def test_boundary_product_relation(sz_cos05):
    V0 = float(sz_cos05.V0)
    for th in np.linspace(-3, 3, 16):
        s = complex(math.cos(th), math.sin(th))
        prod = sz_cos05.S(s, -1) * sz_cos05.S(s, +1)
        assert abs(prod - math.exp(-V0) * np.exp(1j * sz_cos05.Omega(th))) < 1e-14


def test_omega_zero_mean(sz_jump3, ctx256):
    exact = szego_apparatus(Cosine(0.5, 3), ctx256)
    mp = ctx256.mp
    mean = mp.fsum(exact.Omega(-mp.pi + 2 * mp.pi * j / 64, precise=True) for j in range(64)) / 64
    assert abs(mean) < ctx256.tol
    th = -math.pi + 2 * math.pi * (np.arange(4096) + 0.5) / 4096
    # midpoint rule on a function with log-type kinks: accuracy limited by the rule
    assert abs(np.mean(sz_jump3.Omega(th))) < 1e-10


def test_kappa_winds_once(sz_jump3):
    assert abs(sz_jump3.kappa(1.0 + 2 * math.pi) - sz_jump3.kappa(1.0) - 2 * math.pi) < 1e-12


def test_kappa_prime_margin_frozen(sz_jump3):
    assert kappa_prime_margin(sz_jump3) == pytest.approx(0.8580717166184825, abs=1e-9)


# -- extension operator -------------------------------------------------------

def _exp_derivs(m):
    return [lambda t, p=p: (1j) ** p * complex(math.cos(t), math.sin(t)) for p in range(m + 1)]


def test_extension_order_one_is_constant_in_r():
    f = _exp_derivs(1)
    for r in (0.6, 1.0, 1.5):
        assert extend(f, 1, PolarPoint(r, 0.7)).value == pytest.approx(f[0](0.7))


@given(st.floats(0.55, 1.8), st.floats(-3.0, 3.0))
def test_extension_order_two_closed_form(r, th):
    e = extend(_exp_derivs(2), 2, PolarPoint(r, th))
    eith = complex(math.cos(th), math.sin(th))
    assert abs(e.value - eith * (1 + math.log(r))) < 1e-12
    assert abs(e.dbar - (-eith ** 2 * math.log(r) / (2 * r))) < 1e-12


def test_extension_dbar_vanishes_on_circle():
    e = extend(_exp_derivs(2), 2, PolarPoint(1.0, 0.3))
    assert e.dbar == 0


@pytest.mark.parametrize("m", [2, 3, 4])
def test_dbar_vanishing_order(m):
    f = _exp_derivs(m)
    ratios = []
    for t in range(4, 13):
        r = 1 + 2.0 ** -t
        e = extend(f, m, PolarPoint(r, 0.4))
        ratios.append(abs(e.dbar) / abs(math.log(r)) ** (m - 1))
    limit = ratios[-1]
    assert all(0.5 * limit <= q <= 2 * limit for q in ratios)


def test_extension_partial_sums_converge_to_z():
    r, th = 1.3, 0.9
    z = r * complex(math.cos(th), math.sin(th))
    errs = [abs(extend(_exp_derivs(m), m, PolarPoint(r, th)).value - z) for m in range(1, 9)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-5


def test_extension_dz_matches_wirtinger_derivative():
    m, r, th, h = 3, 1.2, 0.5, 1e-6
    f = _exp_derivs(m)
    e = extend(f, m, PolarPoint(r, th))
    z = r * complex(math.cos(th), math.sin(th))

    def val(w):
        p = PolarPoint.from_complex(w)
        return extend(f, m, p).value
    dx = (val(z + h) - val(z - h)) / (2 * h)
    dy = (val(z + 1j * h) - val(z - 1j * h)) / (2 * h)
    assert abs(e.dz - 0.5 * (dx - 1j * dy)) < 1e-7
    assert abs(e.dbar - 0.5 * (dx + 1j * dy)) < 1e-7


def test_extension_rejects_bad_order():
    with pytest.raises(ValueError):
        extension_from_derivatives([1.0], 0, 1.0, 0.0)


# -- sufficient conditions ----------------------------------------------------

@pytest.mark.parametrize("A,k", [(0.3, 1), (0.4, 2), (0.2, 3), (0.6, 2)])
def test_condition_t_on_cosines(ctx256, A, k):
    V = Cosine(A, k)
    val, holds = check_condition_t(build_fourier(V, ctx256), V)
    assert val == pytest.approx(A * k, rel=1e-12)
    assert holds == (A < 1 / k)


@pytest.mark.parametrize("A,k", [(0.3, 1), (0.1, 2), (0.2, 2), (0.05, 3)])
def test_condition_convex_on_cosines(ctx256, A, k):
    val, holds = check_condition_convex(Cosine(A, k), ctx256)
    assert val == pytest.approx(-A * k * k, rel=1e-12)
    assert holds == (A < 1 / (2 * k * k))


def test_conditions_for_zero_potential(ctx256):
    assert tuple(check_condition_t(build_fourier(Zero(), ctx256))) == (0.0, True)
    assert tuple(check_condition_convex(Zero(), ctx256)) == (0.0, True)


def test_piecewise_cubic_convexity_closed_form(ctx256):
    eps = 0.01
    V = PiecewiseCubic(0.9 * math.pi / eps ** 2, eps)
    val, holds = check_condition_convex(V, ctx256)
    assert val == pytest.approx(-0.45, rel=1e-12)
    assert holds


def test_fourier_list_sum(ctx256):
    V = FourierList((0, 0.1, 0.05))
    val, holds = check_condition_t(build_fourier(V, ctx256), V)
    assert val == pytest.approx(2 * (1 * 0.1 + 2 * 0.05))
    assert holds

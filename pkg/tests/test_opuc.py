import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opuclab.numerics import PrecisionContext
from opuclab.opuc import (MomentTable, OPUCResult, PositivityError, PrecisionGateError,
                          RHPMatrix, WeightSpec, assemble_M, build_moments, cache_path,
                          det_defect, gram_schmidt_oracle, levinson_opuc,
                          orthogonality_residual, required_bits, rhp_residual,
                          symmetry_defect)
from opuclab.potentials import PRESETS, Cosine, Zero


def _max_coeff_gap(a: OPUCResult, b: OPUCResult, n: int) -> float:
    return max(float(abs(x - y)) for x, y in zip(a.coeffs[n], b.coeffs[n]))


# -- weights and moments ------------------------------------------------------

def test_weight_spec_validation():
    with pytest.raises(ValueError):
        WeightSpec(Zero(), "varying")
    with pytest.raises(ValueError):
        WeightSpec(Zero(), "other")


def test_weight_spec_roundtrip_and_hash():
    w = WeightSpec(PRESETS["jump3"]())
    assert WeightSpec.from_dict(w.to_dict()) == w
    assert w.content_hash() == WeightSpec.from_dict(w.to_dict()).content_hash()
    assert w.content_hash() != WeightSpec(Cosine(0.3)).content_hash()


def test_unit_moments_are_kronecker(ctx256):
    mom = build_moments(WeightSpec(Zero()), 6, ctx256)
    assert mom.mu(0) == 1 and all(mom.mu(j) == 0 for j in range(1, 7))


def test_cosine_moments_are_bessel_values(ctx256):
    A = 0.7
    mp = ctx256.mp
    mom = build_moments(WeightSpec(Cosine(A)), 6, ctx256)
    for j in range(7):
        # mean e^{-ij t} e^{-A cos t} = (-1)^j I_j(A); V0 = 0 so no scaling
        assert abs(mom.mu(j) - (-1) ** j * mp.besseli(j, A)) < 1e-60


def test_moment_hermitian_symmetry(ctx256, jump3):
    mom = build_moments(WeightSpec(jump3), 8, ctx256)
    assert mom.mu(0).imag == 0 and mom.mu(0).real > 0
    assert all(mom.mu(-j) == mom.mu(j).conjugate() for j in range(1, 9))


def test_varying_moments_positive_definite(ctx256):
    mom = build_moments(WeightSpec(Cosine(0.2), "varying", 16), 16, ctx256)
    mp = ctx256.mp
    mp.cholesky(mom.toeplitz(16))


def test_precision_gate_names_required_bits():
    w = WeightSpec(Cosine(0.2), "varying", 32)
    need = required_bits(w, 32)
    assert need == math.ceil(32 * 0.4 / math.log(2) + 64)
    with pytest.raises(PrecisionGateError) as info:
        build_moments(w, 32, PrecisionContext(64))
    assert info.value.required_bits == need


def test_fixed_weights_need_no_extra_bits():
    assert required_bits(WeightSpec(Cosine(5.0)), 1000) == 64


def test_moment_cache_roundtrip(tmp_path, ctx128):
    w = WeightSpec(Cosine(0.3))
    first = build_moments(w, 10, ctx128, cache_dir=tmp_path)
    path = cache_path(tmp_path, w, 10, 128)
    assert path.exists()
    assert path.parent.name == w.content_hash()
    assert path.name == "fixed-128-10.json"
    second = build_moments(w, 10, ctx128, cache_dir=tmp_path)
    assert first.content_hash == second.content_hash
    assert all(a == b for a, b in zip(first.moments, second.moments))
    again = MomentTable.from_json(path.read_text())
    assert again.content_hash == first.content_hash


# -- Levinson recursion -------------------------------------------------------

def test_unit_weight_gives_monomials(ctx256):
    res = levinson_opuc(build_moments(WeightSpec(Zero()), 10, ctx256))
    for n in range(11):
        assert res.coeffs[n] == [0] * n + [1]
        assert res.gamma[n] == 1
        if n:
            assert res.alpha[n] == 0


def test_levinson_rejects_short_table(ctx128):
    mom = build_moments(WeightSpec(Zero()), 4, ctx128)
    with pytest.raises(ValueError):
        levinson_opuc(mom, 6)


def test_levinson_detects_broken_positivity(ctx128):
    mp = ctx128.mp
    bad = MomentTable((mp.mpc(1), mp.mpc(2)), mp.mpf(0), 1, 128, WeightSpec(Zero()))
    with pytest.raises(PositivityError):
        levinson_opuc(bad)


@pytest.mark.parametrize("name", ["jump3", "thumbnail"])
def test_gamma_alpha_identity(ctx256, name):
    res = levinson_opuc(build_moments(WeightSpec(PRESETS[name]()), 40, ctx256))
    for n in range(1, 41):
        lhs = (res.gamma[n - 1] / res.gamma[n]) ** 2
        assert abs(lhs - (1 - abs(res.alpha[n]) ** 2)) < 10 * ctx256.tol
        assert abs(res.alpha[n]) < 1


def test_orthogonality_residuals(ctx256, jump3):
    mom = build_moments(WeightSpec(jump3), 20, ctx256)
    res = levinson_opuc(mom)
    for n in (1, 5, 20):
        assert orthogonality_residual(res, mom, n) < 10 * ctx256.tol


def test_result_json_roundtrip(ctx256, jump3):
    res = levinson_opuc(build_moments(WeightSpec(jump3), 6, ctx256))
    back = OPUCResult.from_json(res.to_json())
    assert _max_coeff_gap(res, back, 6) < 1e-70
    assert back.moment_hash == res.moment_hash
    assert res.to_json() == back.to_json()


# -- Gram-Schmidt oracle ------------------------------------------------------

def test_oracle_unit_weight(ctx256):
    res = gram_schmidt_oracle(WeightSpec(Zero()), 5, ctx256)
    assert all(abs(c - (1 if j == 5 else 0)) < 1e-70 for j, c in enumerate(res.coeffs[5]))


def test_oracle_gamma0(ctx256, jump3):
    w = WeightSpec(jump3)
    res = gram_schmidt_oracle(w, 2, ctx256)
    mom = build_moments(w, 2, ctx256)
    mp = ctx256.mp
    c0 = mom.mu(0) * mp.exp(-mom.scale_exponent)
    assert abs(res.gamma[0] - c0.real ** -0.5) < 1e-60


def test_oracle_matches_levinson_cosine(ctx256):
    w = WeightSpec(Cosine(0.3))
    lev = levinson_opuc(build_moments(w, 16, ctx256))
    gs = gram_schmidt_oracle(w, 16, ctx256)
    assert max(_max_coeff_gap(lev, gs, n) for n in range(17)) < 1e-25


def test_oracle_matches_levinson_thumbnail(ctx256, thumbnail):
    w = WeightSpec(thumbnail)
    lev = levinson_opuc(build_moments(w, 24, ctx256))
    gs = gram_schmidt_oracle(w, 24, ctx256)
    assert max(_max_coeff_gap(lev, gs, n) for n in range(25)) < 1e-25


def test_oracle_size_limit(ctx128):
    with pytest.raises(ValueError):
        gram_schmidt_oracle(WeightSpec(Zero()), 40, ctx128)


@given(st.floats(-0.6, 0.6), st.integers(1, 3))
@settings(max_examples=6, deadline=None)
def test_oracle_agreement_property(A, mode):
    ctx = PrecisionContext(128)
    w = WeightSpec(Cosine(A, mode))
    lev = levinson_opuc(build_moments(w, 8, ctx))
    gs = gram_schmidt_oracle(w, 8, ctx)
    assert max(_max_coeff_gap(lev, gs, n) for n in range(9)) < 1e-25


# -- Riemann-Hilbert matrix ---------------------------------------------------

@pytest.fixture(scope="module")
def unit_result(ctx256):
    return levinson_opuc(build_moments(WeightSpec(Zero()), 4, ctx256))


def test_unit_matrix_residue_oracle(ctx256, unit_result):
    mp = ctx256.mp
    M = assemble_M(unit_result, WeightSpec(Zero()), 1, mp.mpc(2), ctx256)
    assert abs(M[0, 0] - 2) < 1e-60
    assert abs(M[1, 0] + 1) < 1e-60
    assert abs(M[0, 1]) < 1e-60
    assert abs(M[1, 1] - 0.5) < 1e-60


def test_degree_zero_matrix_is_unipotent(ctx256, unit_result):
    mp = ctx256.mp
    M = assemble_M(unit_result, WeightSpec(Zero()), 0, mp.mpc(0.5), ctx256)
    assert M[0, 0] == 1 and M[1, 1] == 1 and M[1, 0] == 0


def test_M21_at_origin(ctx256, jump3):
    w = WeightSpec(jump3)
    res = levinson_opuc(build_moments(w, 8, ctx256))
    M = RHPMatrix(res, w, 8, ctx256)
    assert abs(M(ctx256.mp.mpc(0))[1, 0] + res.gamma[7] ** 2) < 1e-60


def test_unit_jump_residual(ctx256, unit_result):
    assert rhp_residual(unit_result, WeightSpec(Zero()), 3, [0.3, 1.1, -2.0], ctx256) < 1e-20


def test_cauchy_quadrature_refinement(ctx256, jump3):
    mp = ctx256.mp
    w = WeightSpec(jump3)
    res = levinson_opuc(build_moments(w, 8, ctx256))
    z = mp.mpc(0.8 * mp.cos(0.3), 0.8 * mp.sin(0.3))
    ref = RHPMatrix(res, w, 8, ctx256)(z)
    errs = []
    for level in (1, 2, 3, 4):
        A = RHPMatrix(res, w, 8, ctx256, level=level, subtract=False, max_arc=1.0)(z)
        errs.append(max(float(abs(A[i, j] - ref[i, j])) for i in range(2) for j in range(2)))
    assert all(b <= a / 4 for a, b in zip(errs, errs[1:]))


def test_symmetry_and_determinant(ctx256, jump3):
    mp = ctx256.mp
    w = WeightSpec(jump3)
    res = levinson_opuc(build_moments(w, 8, ctx256))
    M = RHPMatrix(res, w, 8, ctx256)
    for z in (mp.mpc(0.5, 0.2), mp.mpc(-1.4, 1.1)):
        assert symmetry_defect(M, z) < 1e3 * ctx256.tol
        assert det_defect(M, z) < 1e3 * ctx256.tol


def test_matrix_rejects_degree_beyond_result(ctx256, unit_result):
    with pytest.raises(ValueError):
        RHPMatrix(unit_result, WeightSpec(Zero()), 9, ctx256)

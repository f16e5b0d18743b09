import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from liftpir import gf
from liftpir.gf import FieldMismatchError, FieldSpec
from liftpir.linalg import SingularMatrixError, joint_ranks, rank_mod, rref_mod, solve_mod

SMALL_PRIMES = (3, 5, 7)
PRIMES = st.sampled_from([3, 5, 7, 11, 13, 65537, 2_147_483_647])


def elements(p):
    F = FieldSpec(p)
    return [F(a) for a in range(p)]


# ---------------------------------------------------------------
# field axioms, exhaustively on small fields
# ---------------------------------------------------------------

@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_additive_and_multiplicative_identities(p):
    F = FieldSpec(p)
    zero, one = F(0), F(1)
    for a in elements(p):
        assert a + zero == a
        assert a * one == a
        assert a * zero == zero
        assert a + (-a) == zero


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_commutativity_associativity_distributivity(p):
    els = elements(p)
    for a in els:
        for b in els:
            assert a + b == b + a
            assert a * b == b * a
            for c in els:
                assert (a + b) + c == a + (b + c)
                assert (a * b) * c == a * (b * c)
                assert a * (b + c) == a * b + a * c


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_every_nonzero_element_has_an_inverse(p):
    for a in elements(p)[1:]:
        assert a * a.inverse() == FieldSpec(p)(1)
        assert a / a == FieldSpec(p)(1)


def test_field_arith_matches_operators():
    F = FieldSpec(7)
    a, b = F(3), F(5)
    assert gf.field_arith(a, b, "add") == F(1)
    assert gf.field_arith(a, b, "sub") == F(5)
    assert gf.field_arith(a, b, "mul") == F(1)
    assert gf.field_arith(a, b, "div") == F(3 * pow(5, -1, 7))
    with pytest.raises(ValueError):
        gf.field_arith(a, b, "%")


def test_division_by_zero_raises():
    F = FieldSpec(5)
    with pytest.raises(ZeroDivisionError):
        F(3) / F(0)
    with pytest.raises(ZeroDivisionError):
        F(0).inverse()


def test_mixing_fields_raises():
    with pytest.raises(FieldMismatchError):
        FieldSpec(5)(1) + FieldSpec(7)(1)


@pytest.mark.parametrize("bad", [1, 2, 4, 9, 2**31 + 11, 2**61 - 1])
def test_fieldspec_rejects_bad_moduli(bad):
    with pytest.raises(ValueError):
        FieldSpec(bad)


def test_scalars_are_reduced():
    assert FieldSpec(5)(-1).value == 4
    assert int(FieldSpec(5)(12)) == 2


# ---------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------

@given(p=PRIMES, coeffs=st.lists(st.integers(0, 10**12), min_size=1, max_size=8),
       x=st.integers(0, 10**12))
def test_poly_eval_matches_brute_force(p, coeffs, x):
    F = FieldSpec(p)
    expected = sum(c * pow(x, i, p) for i, c in enumerate(coeffs)) % p
    assert gf.poly_eval([F(c) for c in coeffs], F(x)).value == expected


def test_poly_eval_needs_coefficients():
    with pytest.raises(ValueError):
        gf.poly_eval([], FieldSpec(5)(1))


@settings(max_examples=60)
@given(p=st.sampled_from([7, 11, 101, 65537]), data=st.data())
def test_interpolate_round_trip(p, data):
    n = data.draw(st.integers(1, min(6, p)))
    xs = data.draw(st.lists(st.integers(0, p - 1), min_size=n, max_size=n, unique=True))
    coeffs = data.draw(st.lists(st.integers(0, p - 1), min_size=n, max_size=n))
    F = FieldSpec(p)
    ys = [gf.poly_eval([F(c) for c in coeffs], F(x)) for x in xs]
    assert [c.value for c in gf.interpolate([F(x) for x in xs], ys)] == coeffs


def test_interpolate_rejects_repeated_points():
    F = FieldSpec(5)
    with pytest.raises(ValueError):
        gf.interpolate([F(1), F(1)], [F(0), F(2)])


def test_dependency_coefficients_of_the_f3_fixture():
    # fourth server value from the first three, degree < 3
    F = FieldSpec(3)
    w = gf.dependency_coeffs([(1, 0), (0, 1), (1, 1)], (1, 2), 3, field=F)
    assert [c.value for c in w] == [2, 2, 2]  # i.e. (-1, 2, 2)


@settings(max_examples=40)
@given(p=st.sampled_from([11, 13, 101, 65537]), data=st.data())
def test_interpolation_weights_predict_polynomial_values(p, data):
    D = data.draw(st.integers(1, 5))
    xs = data.draw(st.lists(st.integers(0, p - 1), min_size=D + 1, max_size=D + 1, unique=True))
    coeffs = np.array(data.draw(st.lists(st.integers(0, p - 1), min_size=D, max_size=D)))
    pts = [gf.as_point(p, x) for x in xs]
    w = gf.interpolation_weights(p, pts[:D], pts[D], D)
    vals = [int(gf.evaluate(p, coeffs, pt)) for pt in pts]
    assert int(w @ np.array(vals[:D]) % p) == vals[D]


def test_interpolation_weights_guards():
    p = 7
    pts = [(1, 1), (1, 2)]
    with pytest.raises(ValueError):
        gf.interpolation_weights(p, pts, (1, 3), 3)
    with pytest.raises(ValueError):
        gf.interpolation_weights(p, [(1, 1), (1, 1)], (1, 3), 2)
    with pytest.raises(ValueError):
        gf.interpolation_weights(p, pts, (1, 2), 2)


def test_dependency_coeffs_needs_a_field_for_bare_pairs():
    with pytest.raises(ValueError):
        gf.dependency_coeffs([(1, 0)], (0, 1), 1)


def test_projective_point_normalisation():
    assert gf.as_point(5, (2, 4)) == (1, 2)
    assert gf.as_point(5, (0, 3)) == gf.INFINITY
    assert gf.as_point(5, 7) == (1, 2)
    with pytest.raises(ValueError):
        gf.as_point(5, (0, 0))


def test_monomials_at_infinity_pick_the_top_coefficient():
    assert list(gf.monomials(7, gf.INFINITY, 3)) == [0, 0, 1]


# ---------------------------------------------------------------
# sampling
# ---------------------------------------------------------------

def test_sample_uniform_passes_chi_square():
    F = FieldSpec(7)
    draws = [s.value for s in gf.sample_uniform(F, np.random.default_rng(5), 70_000)]
    counts = np.bincount(draws, minlength=7)
    assert chisquare(counts).pvalue > 1e-4


def test_sample_uniform_is_seeded():
    F = FieldSpec(11)
    a = gf.sample_uniform(F, np.random.default_rng(1), 20)
    b = gf.sample_uniform(F, np.random.default_rng(1), 20)
    assert a == b
    with pytest.raises(ValueError):
        gf.sample_uniform(F, np.random.default_rng(1), -1)


# ---------------------------------------------------------------
# linear algebra mod p
# ---------------------------------------------------------------

def test_invertible_2x2_count_over_f3():
    # |GL_2(F_3)| = (9 - 1)(9 - 3)
    count = 0
    for flat in np.ndindex(*(3,) * 4):
        if rank_mod(np.array(flat).reshape(2, 2), 3) == 2:
            count += 1
    assert count == 48


matrices = st.integers(1, 5).flatmap(
    lambda m: st.integers(1, 5).flatmap(
        lambda n: st.lists(st.lists(st.integers(0, 4), min_size=n, max_size=n),
                           min_size=m, max_size=m)))


@given(rows=matrices)
def test_rank_is_transpose_invariant(rows):
    A = np.array(rows)
    assert rank_mod(A, 5) == rank_mod(A.T, 5)


@given(rows=matrices)
def test_rref_rows_span_the_same_space(rows):
    A = np.array(rows)
    R, piv = rref_mod(A, 5)
    assert rank_mod(np.vstack([A, R]), 5) == len(piv) == rank_mod(A, 5)


@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_solve_recovers_x(n, seed):
    rng = np.random.default_rng(seed)
    p = 101
    A = rng.integers(0, p, (n, n))
    x = rng.integers(0, p, n)
    if rank_mod(A, p) < n:
        with pytest.raises(SingularMatrixError):
            solve_mod(A, A @ x % p, p)
    else:
        assert np.array_equal(solve_mod(A, A @ x % p, p), x)


def test_solve_rejects_non_square():
    with pytest.raises(ValueError):
        solve_mod(np.ones((2, 3)), np.ones(2), 5)


@given(seed=st.integers(0, 2**32 - 1))
def test_joint_ranks_match_plain_rank(seed):
    rng = np.random.default_rng(seed)
    p = 5
    m = int(rng.integers(1, 7))
    blocks = []
    for _ in range(3):
        B = rng.integers(0, p, (m, int(rng.integers(0, 4))))
        B[rng.random(B.shape) < 0.6] = 0  # sparse, so the component split matters
        blocks.append(B)
    combos = [(0,), (1,), (0, 1), (0, 2), (0, 1, 2)]
    got = joint_ranks(blocks, combos, p)
    want = [rank_mod(np.hstack([blocks[i] for i in c]), p) for c in combos]
    assert got == want


def test_uniform_bounds():
    v = gf.uniform(13, np.random.default_rng(0), 1000)
    assert v.min() >= 0 and v.max() < 13 and v.dtype == np.int64
    assert math.isclose(v.mean(), 6, abs_tol=0.5)

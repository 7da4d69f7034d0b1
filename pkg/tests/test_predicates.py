import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monocert.core import TolerancePolicy
from monocert.monotonicity import (
    DegeneratePairError,
    PairEvaluation,
    StrongParams,
    pair_monotone,
    pair_pseudo,
    pair_quasi,
    pair_strict,
    pair_strong,
)

TOL = TolerancePolicy()


def pe(x, y, fx, fy):
    return PairEvaluation(x=np.atleast_1d(np.asarray(x, float)),
                          y=np.atleast_1d(np.asarray(y, float)),
                          fx=np.atleast_1d(np.asarray(fx, float)),
                          fy=np.atleast_1d(np.asarray(fy, float)))


def test_identity_pair_monotone():
    e = pe([1.0, 2.0], [0.0, -1.0], [1.0, 2.0], [0.0, -1.0])
    # <x - y, x - y> = 1 + 9 = 10
    assert e.d_inner == 10.0
    assert pair_monotone(e, TOL)
    assert pair_strict(e, TOL)
    assert pair_strong(e, StrongParams(1.0), TOL)
    assert pair_pseudo(e, TOL)
    assert pair_quasi(e, TOL)


def test_cube_pair_strict_but_not_strong_near_zero():
    # F(x) = x^3 on [-2, 2]: d_inner = (x^3 - y^3)(x - y) > 0 for x != y,
    # but near zero it is o(|x - y|^2): at x=1e-3, y=-1e-3,
    # d_inner = 2e-9 * 2e-3 = 4e-12 while |x-y|^2 = 4e-6
    x, y = 1e-3, -1e-3
    e = pe([x], [y], [x ** 3], [y ** 3])
    assert e.d_inner == pytest.approx(4e-12, rel=1e-12)
    assert pair_strict(e, TOL)
    assert not pair_strong(e, StrongParams(1e-2), TOL)


def test_square_pair_quasi_only():
    # F(x) = x^2 on [-2, 2] at x=1, y=-2:
    # d_inner = (1 - 4)(1 - (-2)) = -9 -> not monotone
    # premise <F(y), x - y> = 4 * 3 = 12 > 0, conclusion <F(x), x - y> = 3 > 0
    e = pe([1.0], [-2.0], [1.0], [4.0])
    assert e.d_inner == -9.0
    assert not pair_monotone(e, TOL)
    assert pair_quasi(e, TOL)
    assert pair_pseudo(e, TOL)  # this particular pair has positive conclusion


def test_square_pair_pseudo_violation():
    # the pseudo violation of x^2 needs y near 0 with a positive tail:
    # x=-1, y=0.5: premise <F(y), x - y> = 0.25 * (-1.5) < 0 -> flip
    # orientation: premise <F(x), y - x> = 1 * 1.5 > 0 but
    # conclusion <F(y), y - x> = 0.25 * 1.5 > 0 still holds; true violation
    # needs y exactly at 0: premise <F(0), ...> = 0 never strict.
    # With our y=0 pair the quasi premise is non-strict, so quasi holds.
    e = pe([0.0], [-1.0], [0.0], [1.0])
    assert e.premise_inner == 1.0   # <F(y), x - y> = 1 * 1
    assert e.conclusion_inner == 0.0
    assert pair_pseudo(e, TOL)
    assert pair_quasi(e, TOL)


def test_neg_pair_fails_everything():
    # F(x) = -x at x=1, y=-1: premise <F(y), x - y> = 1 * 2 = 2 > 0 while
    # conclusion <F(x), x - y> = -2 < 0, so even quasi fails on this pair
    e = pe([1.0], [-1.0], [-1.0], [1.0])
    assert e.d_inner == -4.0
    assert e.premise_inner == 2.0
    assert e.conclusion_inner == -2.0
    assert not pair_monotone(e, TOL)
    assert not pair_strict(e, TOL)
    assert not pair_strong(e, StrongParams(0.5), TOL)
    assert not pair_pseudo(e, TOL)
    assert not pair_quasi(e, TOL)


def test_exp_slice_pair_inner_product():
    # F(x, y, z) = e^{-(x+y)} (1, 1, 0) on the z=0 slice.
    # Pair x=(1,0,0), y=(0,0,0):
    # d_inner = (e^{-1} - 1)(1) + (e^{-1} - 1)(0) = e^{-1} - 1
    x = np.array([1.0, 0.0, 0.0])
    y = np.zeros(3)
    fx = math.exp(-1.0) * np.array([1.0, 1.0, 0.0])
    fy = np.array([1.0, 1.0, 0.0])
    e = PairEvaluation(x=x, y=y, fx=fx, fy=fy)
    assert e.d_inner == pytest.approx(math.exp(-1.0) - 1.0, abs=1e-15)
    assert e.d_inner == pytest.approx(-0.6321205588285577, abs=1e-12)
    assert not pair_monotone(e, TOL)
    # premise <F(y), x - y> = 1 > 0, conclusion e^{-1} > 0: quasi/pseudo hold
    assert pair_pseudo(e, TOL)
    assert pair_quasi(e, TOL)


def test_strict_rejects_coincident_points():
    e = pe([1.0], [1.0], [1.0], [1.0])
    with pytest.raises(DegeneratePairError):
        pair_strict(e, TOL)


def test_strong_modulus_must_be_positive():
    with pytest.raises(ValueError):
        StrongParams(0.0)
    with pytest.raises(ValueError):
        StrongParams(-1.0)


def test_monotone_tolerates_tiny_negative_inner():
    e = pe([1.0], [0.0], [-(0.5e-9)], [0.0])
    assert e.d_inner == -0.5e-9
    assert pair_monotone(e, TOL)
    e2 = pe([1.0], [0.0], [-(2e-9)], [0.0])
    assert not pair_monotone(e2, TOL)


points = st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=2)


@given(points, points)
@settings(max_examples=100, deadline=None)
def test_implication_chain_identity_field(xc, yc):
    # For F = id every distinct pair satisfies the full chain; exercise
    # strong => strict => monotone => pseudo => quasi on a map where all hold.
    x = np.array(xc)
    y = np.array(yc)
    if np.linalg.norm(x - y) <= 1e-6:
        return
    e = PairEvaluation(x=x, y=y, fx=x, fy=y)
    assert pair_strong(e, StrongParams(1.0), TOL)
    assert pair_strict(e, TOL)
    assert pair_monotone(e, TOL)
    assert pair_pseudo(e, TOL)
    assert pair_quasi(e, TOL)


@given(points, points, points, points)
@settings(max_examples=200, deadline=None)
def test_implication_chain_arbitrary_values(xc, yc, fxc, fyc):
    # chain implications that hold pairwise for ANY single evaluation,
    # away from the tolerance boundary
    x, y, fx, fy = (np.array(v) for v in (xc, yc, fxc, fyc))
    if np.linalg.norm(x - y) <= 1e-6:
        return
    e = PairEvaluation(x=x, y=y, fx=fx, fy=fy)
    margin = 10 * TOL.slack
    if e.d_inner > margin:         # comfortably strict
        assert pair_strict(e, TOL)
        assert pair_monotone(e, TOL)
    if e.d_inner >= 0.0:           # comfortably monotone
        assert pair_monotone(e, TOL)
        # monotone pair => pseudo pair needs the symmetric orientation too;
        # the one-sided check follows from <F(x)-F(y), x-y> >= 0:
        # premise > 0 means <F(y), x-y> > 0, so conclusion >= premise > 0
        if e.premise_inner > margin:
            assert e.conclusion_inner >= e.premise_inner - 1e-12
            assert pair_pseudo(e, TOL)
            assert pair_quasi(e, TOL)
    if pair_pseudo(e, TOL) and e.premise_inner > margin:
        assert pair_quasi(e, TOL)


@pytest.mark.parametrize("factor", [1e-3, 1.0, 1e3])
def test_pseudo_quasi_invariant_under_positive_scaling(factor):
    # pseudo/quasi only consult signs of inner products, so scaling F by a
    # positive constant must not change the verdict (tolerances permitting)
    rng = np.random.default_rng(5)
    tol = TOL.with_scale(factor)
    for _ in range(50):
        x, y = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
        fx, fy = rng.uniform(-3, 3, 2), rng.uniform(-3, 3, 2)
        e = PairEvaluation(x=x, y=y, fx=fx, fy=fy)
        es = PairEvaluation(x=x, y=y, fx=factor * fx, fy=factor * fy)
        assert pair_pseudo(e, TOL) == pair_pseudo(es, tol)
        assert pair_quasi(e, TOL) == pair_quasi(es, tol)

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monocert.core import (
    AffineSlice,
    Box,
    DimensionMismatchError,
    DualLine,
    VertexPolytope,
    as_point,
    domain_contains,
    domain_sample,
    format_domain,
    parse_domain,
    segment_sample,
)


def test_point_validation():
    with pytest.raises(ValueError):
        as_point([1.0, np.nan])
    with pytest.raises(ValueError):
        as_point([[1.0, 2.0]])
    assert as_point([1, 2]).dtype == float


def test_box_contains_center():
    box = Box([-1.0, -1.0], [1.0, 1.0])
    assert domain_contains(box, [0.0, 0.0])
    assert not domain_contains(box, [0.0, 1.5])
    with pytest.raises(DimensionMismatchError):
        domain_contains(box, [0.0])


def test_box_requires_ordered_bounds():
    with pytest.raises(ValueError):
        Box([1.0], [0.0])


def test_slice_membership():
    sl = AffineSlice(base=np.zeros(3),
                     dirs=np.array([[1.0, 0, 0], [0, 1.0, 0]]),
                     lo=[-5.0, -5.0], hi=[5.0, 5.0])
    assert domain_contains(sl, [1.0, 2.0, 0.0])
    assert not domain_contains(sl, [1.0, 2.0, 0.5])
    assert not domain_contains(sl, [6.0, 0.0, 0.0])


def test_slice_rejects_non_orthonormal_dirs():
    with pytest.raises(ValueError):
        AffineSlice(base=np.zeros(2), dirs=np.array([[1.0, 1.0]]),
                    lo=[-1.0], hi=[1.0])


def brute_force_in_triangle(vertices, p, steps=400):
    # independent oracle: barycentric grid feasibility
    v = np.asarray(vertices, float)
    for i in range(steps + 1):
        for j in range(steps + 1 - i):
            a, b = i / steps, j / steps
            c = 1.0 - a - b
            q = a * v[0] + b * v[1] + c * v[2]
            if np.max(np.abs(q - p)) < 2.0 / steps:
                return True
    return False


def test_polytope_membership_against_barycentric_grid():
    verts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    poly = VertexPolytope(np.array(verts))
    assert domain_contains(poly, [0.25, 0.25])
    assert brute_force_in_triangle(verts, np.array([0.25, 0.25]))
    assert not domain_contains(poly, [0.7, 0.7])
    assert not brute_force_in_triangle(verts, np.array([0.7, 0.7]))


def test_box_sampling_deterministic():
    box = Box([0.0], [1.0])
    a = domain_sample(box, 3, 7)
    b = domain_sample(box, 3, 7)
    assert a.shape == (3, 1)
    assert np.all((0 <= a) & (a <= 1))
    np.testing.assert_array_equal(a, b)


def test_polytope_samples_lie_inside():
    poly = VertexPolytope(np.array([(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)]))
    pts = domain_sample(poly, 100, 11)
    for p in pts:
        assert domain_contains(poly, p, tol=1e-8)


def test_slice_samples_have_zero_third_coordinate():
    sl = AffineSlice(base=np.zeros(3),
                     dirs=np.array([[1.0, 0, 0], [0, 1.0, 0]]),
                     lo=[-5.0, -5.0], hi=[5.0, 5.0])
    pts = domain_sample(sl, 50, 3)
    assert np.all(pts[:, 2] == 0.0)
    for p in pts:
        assert domain_contains(sl, p)


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 40))
@settings(max_examples=25, deadline=None)
def test_sampling_determinism_and_membership(seed, n):
    box = Box([-2.0, 0.5], [3.0, 0.75])
    a = domain_sample(box, n, seed)
    b = domain_sample(box, n, seed)
    np.testing.assert_array_equal(a, b)
    for p in a:
        assert domain_contains(box, p)


def test_segment_sample_midpoint():
    pts = segment_sample([0.0, 0.0], [1.0, 1.0], 3)
    np.testing.assert_allclose(pts, [[0, 0], [0.5, 0.5], [1, 1]])


def test_segment_sample_degenerate():
    pts = segment_sample([2.0], [2.0], 5)
    np.testing.assert_array_equal(pts, np.full((5, 1), 2.0))


def test_segment_sample_grid():
    pts = segment_sample([0.0], [2.0], 5)
    np.testing.assert_allclose(pts[:, 0], [0, 0.5, 1, 1.5, 2])


def test_segment_sample_affinely_ordered():
    pts = segment_sample([0.1, -0.3], [2.7, 1.9], 9)
    diffs = np.diff(pts, axis=0)
    np.testing.assert_allclose(diffs, np.tile(diffs[0], (8, 1)), atol=1e-14)


def test_dual_line_invariants():
    with pytest.raises(ValueError):
        DualLine(u=[0.0], v=[0.0], lambda_grid=[0.0])
    with pytest.raises(ValueError):
        DualLine(u=[0.0], v=[1.0], lambda_grid=[1.0, 1.0])
    line = DualLine(u=[1.0], v=[2.0], lambda_grid=[-1.0, 0.0, 1.0])
    np.testing.assert_allclose(line.omega(0.5), [2.0])


@pytest.mark.parametrize("spec", [
    "box:-1,-1:1,1",
    "slice:base=0,0,0;dirs=e1,e2;box=-5:5",
    "poly:v1=0,0;v2=1,0;v3=0,1",
])
def test_domain_spec_roundtrip(spec):
    d = parse_domain(spec)
    d2 = parse_domain(format_domain(d))
    assert type(d) is type(d2)
    pts = domain_sample(d, 10, 5)
    pts2 = domain_sample(d2, 10, 5)
    np.testing.assert_array_equal(pts, pts2)


def test_domain_spec_errors():
    from monocert.core import DomainSpecError
    with pytest.raises(DomainSpecError):
        parse_domain("sphere:1")
    with pytest.raises(DomainSpecError):
        parse_domain("box:1,2")
    with pytest.raises(DomainSpecError):
        parse_domain("slice:base=0,0;box=-1:1")

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomy_lab.errors import NotGraphicalError, StructureError
from holonomy_lab.forms import (
    CalibrationForm,
    basis_components,
    comass_check,
    coordinate_rows,
    monomial_value,
    random_orthonormal_frames,
    sort_sign,
)
from holonomy_lab.planes import (
    graph_basis,
    linear_estimate_suite,
    max_principal_angle,
    random_graphical_basis,
    reconstruct,
    split_plane,
)
from holonomy_lab.riemann import FrameIndexSet


def permutation_parity(perm) -> int:
    perm = list(perm)
    sign = 1
    for i, j in itertools.combinations(range(len(perm)), 2):
        if perm[i] > perm[j]:
            sign = -sign
    return sign


@given(st.permutations(list(range(6))))
def test_sort_sign_matches_permutation_parity(perm):
    sign, ordered = sort_sign(perm)
    assert ordered == tuple(range(6))
    assert sign == permutation_parity(perm)


def test_sort_sign_of_repeated_label_is_zero():
    assert sort_sign((1, 3, 1)) == (0, ())


def test_monomial_value_is_determinant():
    rng = np.random.default_rng(1)
    rows = rng.standard_normal((3, 5))
    vectors = rng.standard_normal((5, 3))
    assert monomial_value(rows, vectors) == pytest.approx(np.linalg.det(rows @ vectors))
    with pytest.raises(StructureError):
        monomial_value(rows, vectors[:, :2])


@pytest.mark.parametrize("dim,degree", [(4, 2), (6, 3), (8, 4)])
def test_orthonormal_monomial_has_unit_norm(dim, degree):
    rng = np.random.default_rng(dim)
    frame = random_orthonormal_frames(dim, degree, 1, rng)[0]
    assert np.sum(np.abs(basis_components(frame.T)) ** 2) == pytest.approx(1.0)


def test_calibration_form_is_one_on_the_horizontal_plane():
    form = CalibrationForm(FrameIndexSet(3, 3))
    assert form.evaluate(np.eye(6)[:, :3]) == pytest.approx(1.0)
    sign, rest = form.interior(1)
    # omega^1 ^ interior(1) reproduces Omega
    assert sort_sign((1,) + rest)[0] * sign == 1


@pytest.mark.parametrize("n,m", [(2, 2), (3, 3), (3, 4), (4, 3), (4, 4)])
def test_comass_bound_on_random_planes(n, m):
    report = comass_check(FrameIndexSet(n, m), 4000, np.random.default_rng(n * 10 + m))
    assert report.passed
    assert report.max_value <= 1.0 + 1e-12


def test_horizontal_plane_has_zero_angles():
    frame = FrameIndexSet(3, 3)
    split = split_plane(np.eye(6)[:3], frame)
    np.testing.assert_array_equal(split.theta, np.zeros(3))
    assert split.s_frak == 0.0
    assert split.star_omega == 1.0


@pytest.mark.parametrize("lam", [0.1, 0.7, 3.0])
def test_single_matrix_unit_graph(lam):
    frame = FrameIndexSet(3, 2)
    slope = np.zeros((2, 3))
    slope[1, 2] = lam
    split = split_plane(graph_basis(slope), frame)
    assert split.theta[0] == pytest.approx(np.arctan(lam), abs=1e-14)
    np.testing.assert_allclose(split.theta[1:], 0.0, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.floats(1e-3, 5.0), st.integers(0, 2**31))
def test_split_reconstructs_the_plane(n, m, tilt, seed):
    frame = FrameIndexSet(n, m)
    basis = random_graphical_basis(frame, np.random.default_rng(seed), tilt)
    split = split_plane(basis, frame)
    assert max_principal_angle(reconstruct(split), basis) < 1e-8
    np.testing.assert_allclose(split.e @ split.e.T, np.eye(n), atol=1e-12)
    np.testing.assert_allclose(split.e @ split.e_perp.T, 0.0, atol=1e-12)
    assert split.omega_value == pytest.approx(split.star_omega, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.floats(1e-3, 3.0), st.integers(0, 2**31))
def test_tilt_below_twice_root_eps(n, m, tilt, seed):
    frame = FrameIndexSet(n, m)
    split = split_plane(random_graphical_basis(frame, np.random.default_rng(seed), tilt), frame)
    eps = 1.0 - split.star_omega
    if 0 < eps < 0.5:
        assert split.s_frak < 2.0 * np.sqrt(eps)


def test_reversed_orientation_is_not_graphical():
    frame = FrameIndexSet(2, 2)
    basis = np.eye(4)[[1, 0]]
    with pytest.raises(NotGraphicalError):
        split_plane(basis, frame)


def test_vertical_plane_is_not_graphical():
    with pytest.raises(NotGraphicalError):
        split_plane(np.eye(4)[2:], FrameIndexSet(2, 2))


def test_horizontal_plane_has_no_mixed_pairings():
    frame = FrameIndexSet(3, 3)
    report = linear_estimate_suite(split_plane(np.eye(6)[:3], frame), trials=3)
    assert report.passed
    for line in report.lines[1:]:
        if "e_(n+nu), e without e_j" not in line.name:
            assert line.lhs == pytest.approx(0.0, abs=1e-15)


def test_estimates_on_random_planes_with_given_tilt():
    frame = FrameIndexSet(3, 3)
    rng = np.random.default_rng(7)
    target = 0.3
    checked = 0
    for _ in range(50):
        slope = rng.standard_normal((3, 3))
        slope *= np.tan(np.arcsin(target)) / np.linalg.norm(slope, 2)
        gauge, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        if np.linalg.det(gauge) < 0:
            gauge[:, 0] *= -1
        split = split_plane(graph_basis(slope, gauge), frame)
        assert split.s_frak == pytest.approx(target)
        assert linear_estimate_suite(split, trials=4, rng=rng).passed
        checked += 1
    assert checked == 50


@pytest.mark.parametrize("seed", range(5))
def test_exhaustive_first_pairing_bound_for_n_two(seed):
    frame = FrameIndexSet(2, 2)
    split = split_plane(random_graphical_basis(frame, np.random.default_rng(seed), 0.8), frame)
    rows = coordinate_rows(range(2), 4)
    for mu, i in itertools.product(range(2), range(2)):
        others = np.delete(split.e, i, axis=0)
        value = monomial_value(rows, np.vstack([split.e_perp[mu], others]).T)
        assert abs(value) <= split.s_frak + 1e-14

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from holonomy_lab.errors import StructureError
from holonomy_lab.riemann import (
    FrameIndexSet,
    RiemannSample,
    check_riemann_symmetries,
    close_under_symmetries,
    complex_structure_matrix,
    j_action_split,
    mixed_block_violation,
    ricci_contract,
    space_form,
)


def kulkarni_nomizu(h: np.ndarray, k: np.ndarray) -> np.ndarray:
    """``(h o k)[x,y,z,w]``; an algebraic curvature tensor for symmetric ``h, k``."""
    return (
        np.einsum("xz,yw->xyzw", h, k)
        + np.einsum("yw,xz->xyzw", h, k)
        - np.einsum("xw,yz->xyzw", h, k)
        - np.einsum("yz,xw->xyzw", h, k)
    )


@pytest.mark.parametrize("dim", [2, 3, 4, 6])
def test_space_form_has_no_symmetry_violation(dim):
    report = check_riemann_symmetries(space_form(dim))
    assert report.max_violation == 0.0
    assert report.passed


@pytest.mark.parametrize("dim,curvature", [(3, 1.0), (4, 2.5), (5, 0.3)])
def test_space_form_ricci_is_scaled_identity(dim, curvature):
    np.testing.assert_allclose(ricci_contract(space_form(dim, curvature)), (dim - 1) * curvature * np.eye(dim), atol=1e-15)


def test_round_three_sphere_ricci_is_twice_identity():
    np.testing.assert_array_equal(ricci_contract(space_form(3)), 2.0 * np.eye(3))


def test_sectional_curvature_sign_convention():
    comps = space_form(4, 1.7).components
    assert comps[0, 1, 0, 1] == pytest.approx(1.7)
    assert comps[0, 1, 1, 0] == pytest.approx(-1.7)


@pytest.mark.parametrize("delta", [1e-3, 1e-5])
def test_injected_fault_is_reported_at_its_size(delta):
    comps = space_form(4).components.copy()
    comps[0, 1, 2, 3] += delta
    report = check_riemann_symmetries(RiemannSample(comps))
    assert report.max_violation == pytest.approx(delta, rel=1e-9)
    assert not report.passed or delta < report.tol


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-2, 2)), arrays(np.float64, (4, 4), elements=st.floats(-2, 2)))
def test_kulkarni_nomizu_products_satisfy_all_symmetries(h, k):
    tensor = kulkarni_nomizu(h + h.T, k + k.T)
    report = check_riemann_symmetries(RiemannSample(tensor))
    assert report.max_violation <= 1e-12 * max(1.0, np.abs(tensor).max())


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 5), elements=st.floats(-1, 1)))
def test_ricci_of_kulkarni_nomizu_with_metric(h):
    sym = h + h.T
    dim = 5
    tensor = kulkarni_nomizu(sym, np.eye(dim))
    expected = (dim - 2) * sym + np.trace(sym) * np.eye(dim)
    np.testing.assert_allclose(ricci_contract(tensor), expected, atol=1e-12)


def test_closure_reproduces_space_form_from_canonical_entries():
    dim = 4
    entries = {(i, j, i, j): 1.0 for i in range(dim) for j in range(dim) if i < j}
    np.testing.assert_array_equal(close_under_symmetries(entries, dim), space_form(dim).components)


def test_closure_rejects_conflicting_entries():
    with pytest.raises(StructureError):
        close_under_symmetries({(0, 1, 0, 1): 1.0, (1, 0, 1, 0): 2.0}, 2)


def test_closure_with_complex_structure_is_j_invariant():
    n = 1
    table = close_under_symmetries({(0, 1, 0, 1): 3.0}, 2 * n, j_action_split(n))
    report = check_riemann_symmetries(RiemannSample(table, complex_structure_matrix(n)))
    assert report.j_invariance == 0.0


def test_complex_structure_squares_to_minus_identity():
    jmat = complex_structure_matrix(3)
    np.testing.assert_array_equal(jmat @ jmat, -np.eye(6))


def test_mixed_block_violation_detects_hvvv_entries():
    comps = space_form(4).components.copy()
    assert mixed_block_violation(RiemannSample(comps), 2) == 0.0
    comps[0, 2, 2, 3] = 0.25
    assert mixed_block_violation(RiemannSample(comps), 2) == 0.25


@pytest.mark.parametrize("shape", [(3, 3, 3), (2, 2, 3, 3)])
def test_sample_rejects_bad_shapes(shape):
    with pytest.raises(StructureError):
        RiemannSample(np.zeros(shape))


def test_frame_index_set_ranges():
    frame = FrameIndexSet(3, 2)
    assert frame.dim == 5
    assert list(frame.horizontal) == [0, 1, 2]
    assert list(frame.vertical) == [3, 4]
    with pytest.raises(StructureError):
        FrameIndexSet(0, 2)

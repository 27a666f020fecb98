import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reference_values import (
    SPINOR_S3_ALPHA0,
    SPINOR_S3_ALPHA0_LITERAL,
    SPINOR_S3_BETA0,
    SPINOR_S3_RATIO_SLOPE_PER_KAPPA,
)

from holonomy_lab import bryant_salamon as bs
from holonomy_lab.errors import DomainError, StructureError
from holonomy_lab.riemann import check_riemann_symmetries, ricci_contract


def fiber_vector(space, s, seed=0):
    y = np.random.default_rng(seed).standard_normal(space.m)
    return np.sqrt(s) * y / np.linalg.norm(y)


def random_skew_connection(n, rng):
    conn = rng.standard_normal((n, n, n))
    return conn - conn.transpose(1, 0, 2)


def test_spinor_initial_values():
    space = bs.make_space("spinor_S3", 1.0)
    assert space.alpha0 == pytest.approx(SPINOR_S3_ALPHA0, rel=1e-15)
    assert space.alpha0 == pytest.approx(SPINOR_S3_ALPHA0_LITERAL, rel=1e-15)
    assert space.beta0 == SPINOR_S3_BETA0


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
def test_spinor_ratio_grows_linearly(kappa):
    space = bs.make_space("spinor_S3", kappa)
    s = np.linspace(0.0, 4.0, 9)
    state = bs.alpha_beta(space, s)
    slope = np.diff(state.alpha**2 / state.beta**2) / np.diff(s)
    np.testing.assert_allclose(slope, SPINOR_S3_RATIO_SLOPE_PER_KAPPA * kappa, rtol=1e-12)


@pytest.mark.parametrize("space_id", bs.SPACE_IDS)
@pytest.mark.parametrize("kappa", [0.5, 1.0, 3.0])
def test_ode_and_relations_hold(space_id, kappa):
    space = bs.make_space(space_id, kappa)
    grid = np.linspace(0.0, 10.0, 101)
    assert bs.ode_residuals(space, grid).max() < 1e-12
    report = bs.relation_checks(space, grid)
    assert report.max_closed_form < 1e-12
    assert report.max_fd < 1e-8
    assert report.alpha_p_positive and report.beta_condition


def test_negative_fiber_norm_is_rejected():
    with pytest.raises(DomainError):
        bs.alpha_beta(bs.make_space("asd_S4"), -0.1)


@pytest.mark.parametrize("kappa", [1.0, 2.5])
def test_f_table_entries(kappa):
    spinor = bs.f_matrix(bs.make_space("spinor_S3", kappa))
    assert spinor[1, 3, 0, 2] == pytest.approx(kappa / 2)
    asd = bs.f_matrix(bs.make_space("asd_S4", kappa))
    assert asd[0, 1, 0, 3] == pytest.approx(-kappa)
    assert asd[0, 1, 1, 2] == pytest.approx(kappa)


@pytest.mark.parametrize("space_id", bs.SPACE_IDS)
def test_f_table_is_skew_in_both_pairs(space_id):
    table = bs.f_matrix(bs.make_space(space_id, 1.3))
    np.testing.assert_array_equal(table, -table.transpose(1, 0, 2, 3))
    np.testing.assert_array_equal(table, -table.transpose(0, 1, 3, 2))


@pytest.mark.parametrize("space_id", bs.SPACE_IDS)
def test_f_table_is_parallel_for_any_base_connection(space_id):
    space = bs.make_space(space_id, 1.5)
    assert bs.nabla_AF_residual(space) == 0.0
    conn = random_skew_connection(space.n, np.random.default_rng(3))
    assert bs.nabla_AF_residual(space, conn) < 1e-12


@pytest.mark.parametrize("space_id", bs.SPACE_IDS)
def test_injected_table_fault_scales_linearly(space_id):
    space = bs.make_space(space_id, 1.5)
    conn = random_skew_connection(space.n, np.random.default_rng(4))
    small = bs.nabla_AF_residual(space, conn, ((0, 1, 0, 1), 1e-3))
    large = bs.nabla_AF_residual(space, conn, ((0, 1, 0, 1), 2e-3))
    assert small > 1e-4
    assert large == pytest.approx(2 * small, rel=1e-9)


@pytest.mark.parametrize("space_id", bs.SPACE_IDS)
def test_mixed_connection_vanishes_on_the_zero_section(space_id):
    space = bs.make_space(space_id, 1.0)
    forms = bs.connection_sample(space, np.zeros(space.m)).forms
    assert np.abs(forms[space.n :, : space.n]).max() == 0.0


@pytest.mark.parametrize("space_id", bs.SPACE_IDS)
def test_connection_forms_are_skew(space_id):
    space = bs.make_space(space_id, 1.0)
    forms = bs.connection_sample(space, fiber_vector(space, 0.4)).forms
    np.testing.assert_allclose(forms, -forms.transpose(1, 0, 2), atol=1e-15)


@pytest.mark.parametrize("space_id", bs.SPACE_IDS)
@pytest.mark.parametrize("s", [0.0, 0.3, 1.0])
@pytest.mark.parametrize("kappa", [1.0, 2.0])
def test_curvature_is_ricci_flat(space_id, s, kappa):
    space = bs.make_space(space_id, kappa)
    sample = bs.curvature(space, fiber_vector(space, s))
    assert np.abs(ricci_contract(sample)).max() < 1e-8
    assert check_riemann_symmetries(sample).passed


@pytest.mark.parametrize("kappa", [1.0, 2.0])
def test_asd_vertical_block_on_zero_section(kappa):
    space = bs.make_space("asd_S4", kappa)
    comps = bs.curvature(space, np.zeros(space.m)).components
    n, m = space.n, space.m
    eye = np.eye(m)
    expected = 4 * space.kappa2 / space.alpha0**2 * (np.einsum("ac,bd->abcd", eye, eye) - np.einsum("ad,bc->abcd", eye, eye))
    np.testing.assert_allclose(comps[n:, n:, n:, n:], expected, atol=1e-14)


def test_curvature_rejects_wrong_fiber_length():
    space = bs.make_space("asd_S4")
    with pytest.raises(StructureError):
        bs.curvature(space, np.zeros(4))


@pytest.mark.parametrize("space_id", bs.SPACE_IDS)
def test_hessian_on_zero_section(space_id):
    space = bs.make_space(space_id, 1.0)
    hess = bs.hessian_s(space, np.zeros(space.m)).matrix
    expected = np.diag([0.0] * space.n + [2.0 / space.beta0**2] * space.m)
    np.testing.assert_allclose(hess, expected, atol=1e-15)


@pytest.mark.parametrize("space_id", bs.SPACE_IDS)
def test_hessian_positive_and_above_bound(space_id):
    space = bs.make_space(space_id, 1.0)
    for s in np.geomspace(1e-3, 10.0, 25):
        hess = bs.hessian_s(space, fiber_vector(space, float(s)))
        assert hess.min_eigenvalue > 0
        assert hess.bound_holds


@pytest.mark.parametrize("space_id", bs.SPACE_IDS)
def test_vertical_hessian_eigenvalues_split_along_fiber_vector(space_id):
    space = bs.make_space(space_id, 1.0)
    y = fiber_vector(space, 0.7)
    s = float(y @ y)
    state = bs.alpha_beta(space, s)
    be, bp = float(state.beta), float(state.beta_p)
    along = 2 / be**2 - 4 * bp * s / be**3
    across = 2 / be**2 + 4 * bp * s / be**3
    eig = np.linalg.eigvalsh(bs.hessian_s(space, y).matrix[space.n :, space.n :])
    np.testing.assert_allclose(np.sort(eig), np.sort([across] * (space.m - 1) + [along]), rtol=1e-12)


@pytest.mark.parametrize("s", [0.05, 0.2, 0.3])
def test_beta_weighted_bound_exceeds_hessian_for_small_s(s):
    space = bs.make_space("spinor_S3", 1.0)
    hess = bs.hessian_s(space, fiber_vector(space, s))
    assert bs.beta_weighted_horizontal_bound(space, s) > hess.matrix[0, 0]


@pytest.mark.parametrize("s", [0.5, 2.0])
def test_beta_weighted_bound_holds_for_larger_s(s):
    space = bs.make_space("spinor_S3", 1.0)
    hess = bs.hessian_s(space, fiber_vector(space, s))
    assert bs.beta_weighted_horizontal_bound(space, s) < hess.matrix[0, 0]


@pytest.mark.parametrize("m", [2, 3, 4])
def test_arbitrary_coefficients_can_break_convexity(m):
    s = 1.0
    y = np.zeros(m)
    y[0] = np.sqrt(s)
    alpha, beta = 1 + s, np.exp(-s)
    hess = bs.hessian_from_coefficients(alpha, beta, 1.0, -np.exp(-s), y, 3)
    vals, vecs = np.linalg.eigh(hess)
    assert vals[0] < 0
    assert abs(vecs[:, 0] @ np.concatenate([np.zeros(3), y])) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(bs.SPACE_IDS), st.sampled_from([str.upper, str.lower, str.swapcase]))
def test_space_ids_are_case_insensitive(space_id, transform):
    assert bs.canonical_space_id(transform(space_id)) == space_id


def test_unknown_space_is_rejected():
    with pytest.raises(StructureError):
        bs.make_space("spinor_S5")


@pytest.mark.parametrize("kappa", [0.0, -1.0, float("nan")])
def test_non_positive_kappa_is_rejected(kappa):
    with pytest.raises(DomainError):
        bs.make_space("asd_S4", kappa)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reference_values import CALABI_AT_ZERO

from holonomy_lab import calabi
from holonomy_lab.errors import DomainError, StructureError
from holonomy_lab.form_derivatives import dense_gradient
from holonomy_lab.riemann import check_riemann_symmetries, ricci_contract


def test_coefficients_at_zero():
    assert tuple(float(v) for v in calabi.coefficients(0.0)) == CALABI_AT_ZERO


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 5.0))
def test_b_squared_minus_a_squared_is_one(r):
    a, b = calabi.coefficients(r)[:2]
    assert b * b - a * a == pytest.approx(1.0, abs=1e-12 * max(1.0, b * b))


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 5.0))
def test_first_and_second_derivative_coefficients_agree(r):
    a, b, c, f, _ = calabi.coefficients(r)
    assert a / (b * c) == pytest.approx(f / b**2, rel=1e-12)


@pytest.mark.parametrize("r", [1.0, 0.3, 2.0])
def test_hyperkaehler_relations_closed_form(r):
    assert calabi.hk_system_residual(calabi.radial_state(r, 1)).max() < 1e-12


@pytest.mark.parametrize("r", [1.0, 0.3, 2.0])
def test_hyperkaehler_relations_finite_difference(r):
    assert calabi.hk_system_residual(calabi.radial_state(r, 1), h_fd=1e-5).max() < 1e-8


def test_first_relation_at_zero():
    assert calabi.hk_system_residual(calabi.radial_state(0.0, 2))[0] == 0.0


def test_finite_difference_step_cannot_cross_zero():
    with pytest.raises(DomainError):
        calabi.hk_system_residual(calabi.radial_state(1e-6, 1), h_fd=1e-5)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_connection_is_skew_hermitian_with_vanishing_block(n):
    forms = calabi.connection_sample(calabi.radial_state(0.7, n)).forms
    assert np.abs(forms + np.conj(np.swapaxes(forms, 0, 1))).max() < 1e-12
    if n > 1:
        assert np.abs(forms[1:n, n + 1 :]).max() == 0.0


def test_connection_is_singular_at_zero():
    with pytest.raises(DomainError):
        calabi.connection_sample(calabi.radial_state(0.0, 1))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("r", [0.2, 0.8, 1.5])
def test_curvature_is_ricci_flat_and_kaehler(n, r):
    sample = calabi.curvature(calabi.radial_state(r, n))
    assert np.abs(ricci_contract(sample)).max() < 1e-8
    report = check_riemann_symmetries(sample)
    assert report.passed
    assert report.j_invariance < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3])
def test_radial_curvature_forms_are_opposite(n):
    forms = calabi.curvature_forms(0.9, n)
    np.testing.assert_allclose(forms[n, n], -forms[0, 0], atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_hessian_positive_with_fixed_entry(n):
    for r in np.linspace(0.02, 2.0, 50):
        hess = calabi.hessian_psi(calabi.radial_state(float(r), n))
        assert hess.min_eigenvalue > 0
        assert hess.entries[2 * n] == 2.0


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 6.0))
def test_imaginary_radial_hessian_coefficient_positive(r):
    _, _, c, f, _ = calabi.coefficients(r)
    assert 1.0 / f - 2.0 * f / c**2 > 0


def test_form_derivatives_require_positive_radius():
    with pytest.raises(DomainError):
        calabi.omega_terms(2, 0.0)


def test_form_gradient_is_nonzero_off_the_zero_section():
    grads, _ = calabi.state_terms(calabi.radial_state(0.5, 2))
    assert np.abs(dense_gradient(grads, 8, 4)).max() > 1e-3


def test_dimension_check():
    with pytest.raises(StructureError):
        calabi.radial_state(0.5, 0)


@pytest.mark.parametrize("n", [1, 2])
def test_complex_householder_is_unitary(n):
    z = np.array([0.3 + 0.4j, -0.2 + 0.1j][:n])
    unit = z / np.linalg.norm(z)
    mat = calabi.complex_householder(unit)
    np.testing.assert_allclose(mat @ mat.conj().T, np.eye(n), atol=1e-14)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomy_lab import bryant_salamon, certify
from holonomy_lab.riemann import FrameIndexSet


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0), st.floats(0, 10))
def test_required_constants_make_each_bound_tight(trace, scale, s_frak, grad):
    req = certify.required_constant([grad], [trace], [scale], [s_frak])
    assert req["gradient"][0] * scale == pytest.approx(grad)
    assert -req["lower"][0] * (scale**2 + s_frak**2) == pytest.approx(trace, abs=1e-12)
    k = req["upper"][0]
    assert k > 0
    assert k * s_frak**2 - scale**2 / k == pytest.approx(trace, abs=1e-9 * max(1.0, k))


def test_untilted_plane_with_nonnegative_trace_admits_no_constant():
    req = certify.required_constant([0.0, 0.0], [0.5, -0.25], [0.5, 0.5], [0.0, 0.0])
    assert req["upper"][0] == np.inf
    assert req["upper"][1] == pytest.approx(1.0)


@pytest.mark.parametrize("n,m", [(2, 2), (3, 4), (4, 3)])
def test_random_planes_are_orthonormal_and_oriented(n, m):
    batch = certify.random_planes(FrameIndexSet(n, m), 200, np.random.default_rng(n + m))
    gram = batch.planes @ np.swapaxes(batch.planes, 1, 2)
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(n), gram.shape), atol=1e-12)
    assert np.all(batch.omega > 0)
    assert np.all((batch.s_frak > 0) & (batch.s_frak < 1))
    # star-Omega is the product of the principal-angle cosines, so it cannot exceed the largest one
    assert np.all(batch.omega <= np.sqrt(1 - batch.s_frak**2) + 1e-12)


def test_random_planes_are_reproducible():
    frame = FrameIndexSet(3, 3)
    first = certify.random_planes(frame, 50, np.random.default_rng(9))
    second = certify.random_planes(frame, 50, np.random.default_rng(9))
    np.testing.assert_array_equal(first.planes, second.planes)


@pytest.mark.parametrize("make", [
    lambda: certify.certify_stenzel(2, samples=500, seed=1),
    lambda: certify.certify_calabi(1, samples=500, seed=1),
    lambda: certify.certify_bryant_salamon(bryant_salamon.make_space("asd_S4"), samples=500, seed=1),
])
def test_small_certificates_pass(make):
    cert = make()
    assert cert.passed
    assert cert.k_emp >= certify.SAFETY_FACTOR
    assert cert.imag_residue < 1e-10
    assert set(cert.certification_max) == {"gradient", "lower", "upper"}

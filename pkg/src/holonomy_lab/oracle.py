"""Finite-difference differential geometry used to cross-check the closed forms.

A metric field is any callable mapping a chart point ``x`` (shape ``(N,)``) to
the symmetric coordinate matrix ``g_ab(x)``.  Coframe fields return ``E`` with
``omega^a = E[a, i] dx^i``; the frame vectors are the columns of ``inv(E)``.
All derivatives are central differences with step ``h``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bryant_salamon, calabi, stenzel
from .errors import DomainError, NumericError
from .form_derivatives import dense_monomial

MetricField = Callable[[np.ndarray], np.ndarray]
CoframeField = Callable[[np.ndarray], np.ndarray]

DEFAULT_STEP = 1e-4


def _check_step(h: float) -> None:
    if not 1e-6 <= h <= 1e-2:
        raise DomainError(f"finite-difference step must lie in [1e-6, 1e-2], got {h}")


def metric_from_coframe(coframe: CoframeField) -> MetricField:
    """``g = E^T E`` for an orthonormal coframe field."""

    def metric(x):
        mat = coframe(x)
        return mat.T @ mat

    return metric


def _inverse(mat: np.ndarray) -> np.ndarray:
    try:
        inv = np.linalg.inv(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericError("singular metric in finite-difference oracle") from exc
    if not np.all(np.isfinite(inv)):
        raise NumericError("singular metric in finite-difference oracle")
    return inv


def _metric_derivative(metric: MetricField, x: np.ndarray, h: float) -> np.ndarray:
    """``d[e, a, b] = d_e g_ab``."""
    dim = x.shape[0]
    eye = np.eye(dim)
    return np.stack([(metric(x + h * eye[e]) - metric(x - h * eye[e])) / (2 * h) for e in range(dim)])


def _christoffel_from(ginv: np.ndarray, deriv: np.ndarray) -> np.ndarray:
    first_kind = 0.5 * (np.einsum("ceb->ebc", deriv) + np.einsum("bec->ebc", deriv) - deriv)
    return np.einsum("fe,ebc->fbc", ginv, first_kind)


def christoffel_fd(metric: MetricField, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """Christoffel symbols ``Gamma[k, a, b]`` of the second kind, second-order accurate."""
    _check_step(h)
    x = np.asarray(x, dtype=float)
    return _christoffel_from(_inverse(metric(x)), _metric_derivative(metric, x, h))


def christoffel_fd_batch(metric: Callable[[np.ndarray], np.ndarray], points: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Christoffel symbols ``Gamma[p, k, a, b]`` for a vectorised metric ``(P, N) -> (P, N, N)``."""
    _check_step(h)
    points = np.asarray(points, dtype=float)
    dim = points.shape[1]
    eye = np.eye(dim)
    deriv = np.stack([(metric(points + h * eye[e]) - metric(points - h * eye[e])) / (2 * h) for e in range(dim)], axis=1)
    # deriv[p, c, e, b] = d_c g_eb; first kind [p, e, b, c] = (d_c g_eb + d_b g_ec - d_e g_bc) / 2
    first_kind = 0.5 * (deriv.transpose(0, 2, 3, 1) + deriv.transpose(0, 2, 1, 3) - deriv)
    count = points.shape[0]
    inverse = np.linalg.inv(metric(points))
    return (inverse @ first_kind.reshape(count, dim, dim * dim)).reshape(count, dim, dim, dim)


def riemann_fd(metric: MetricField, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """All-lower coordinate Riemann tensor in the package convention.

    Uses second differences of the metric, so the result is ``O(h^2)``.
    """
    _check_step(h)
    x = np.asarray(x, dtype=float)
    dim = x.shape[0]
    g0 = metric(x)
    cache: dict = {}

    def shifted(*steps):
        key = tuple(sorted(steps))
        if key not in cache:
            point = x.copy()
            for axis, sign in steps:
                point[axis] += sign * h
            cache[key] = metric(point)
        return cache[key]

    first = np.zeros((dim,) * 3)
    second = np.zeros((dim,) * 4)
    for i in range(dim):
        first[i] = (shifted((i, 1)) - shifted((i, -1))) / (2 * h)
        second[i, i] = (shifted((i, 1)) - 2 * g0 + shifted((i, -1))) / h**2
        for j in range(i):
            value = (shifted((i, 1), (j, 1)) - shifted((i, 1), (j, -1)) - shifted((i, -1), (j, 1)) + shifted((i, -1), (j, -1))) / (4 * h * h)
            second[i, j] = second[j, i] = value
    gamma = _christoffel_from(_inverse(g0), first)
    out = 0.5 * (
        np.einsum("bcad->abcd", second)
        + np.einsum("adbc->abcd", second)
        - np.einsum("bdac->abcd", second)
        - np.einsum("acbd->abcd", second)
    )
    out += np.einsum("ef,ebc,fad->abcd", g0, gamma, gamma) - np.einsum("ef,ebd,fac->abcd", g0, gamma, gamma)
    return out


def to_frame(tensor: np.ndarray, coframe_matrix: np.ndarray, start: int = 0) -> np.ndarray:
    """Contract every covariant slot from ``start`` on with the frame vectors ``inv(E)``."""
    frame = _inverse(coframe_matrix)
    out = tensor
    for axis in range(start, tensor.ndim):
        out = np.moveaxis(np.tensordot(out, frame, axes=([axis], [0])), -1, axis)
    return out


def covariant_derivative_fd(field: Callable[[np.ndarray], np.ndarray], metric: MetricField, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """``(nabla T)[c, a_1, ..., a_k]`` of a covariant tensor field, derivative slot first."""
    _check_step(h)
    x = np.asarray(x, dtype=float)
    dim = x.shape[0]
    eye = np.eye(dim)
    value = np.asarray(field(x))
    out = np.stack([(np.asarray(field(x + h * eye[c])) - np.asarray(field(x - h * eye[c]))) / (2 * h) for c in range(dim)])
    gamma = christoffel_fd(metric, x, h)
    for slot in range(value.ndim):
        moved = np.moveaxis(value, slot, 0)
        correction = np.einsum("dca,d...->ca...", gamma, moved)
        out = out - np.moveaxis(correction, 1, slot + 1)
    return out


def connection_forms_fd(coframe: CoframeField, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """Levi-Civita connection forms ``conn[a, b, c] = omega^a_b(e_c)``.

    Defined by ``nabla e_b = omega^a_b e_a``, equivalently
    ``d omega^a = -omega^a_b ^ omega^b``.
    """
    _check_step(h)
    x = np.asarray(x, dtype=float)
    dim = x.shape[0]
    eye = np.eye(dim)
    mat = coframe(x)
    frame = _inverse(mat)
    dframe = np.stack([(_inverse(coframe(x + h * eye[j])) - _inverse(coframe(x - h * eye[j]))) / (2 * h) for j in range(dim)])
    gamma = christoffel_fd(metric_from_coframe(coframe), x, h)
    # nabla_j e_b = d_j V[:, b] + Gamma[:, j, k] V[k, b]
    nabla = dframe + np.einsum("ijk,kb->jib", gamma, frame)
    return np.einsum("ai,jib,jc->abc", mat, nabla, frame)


def vielbein_roundtrip(metric: MetricField, coframe: CoframeField, x) -> float:
    """``max |V^T g V - I|`` at ``x``."""
    x = np.asarray(x, dtype=float)
    frame = _inverse(coframe(x))
    return float(np.abs(frame.T @ metric(x) @ frame - np.eye(x.shape[0])).max())


@dataclass
class RichardsonReport:
    """Errors at successive step halvings and the observed convergence order."""

    steps: tuple[float, ...]
    errors: tuple[float, ...]

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(self.errors[i] / self.errors[i + 1] for i in range(len(self.errors) - 1))

    @property
    def order(self) -> float:
        return float(np.log2(self.ratios[-1]))

    def second_order(self, low: float = 3.5, high: float = 4.5) -> bool:
        return low <= self.ratios[-1] <= high


def richardson_check(error_at_step: Callable[[float], float], h: float, levels: int = 2) -> RichardsonReport:
    """Evaluate ``error_at_step`` at ``h, h/2, ...`` and report the error ratios."""
    steps = tuple(h / 2**k for k in range(levels))
    return RichardsonReport(steps, tuple(float(error_at_step(step)) for step in steps))


def relative_error(approx: np.ndarray, exact: np.ndarray) -> float:
    """``max |approx - exact| / max |exact|``."""
    return float(np.abs(approx - exact).max() / max(np.abs(exact).max(), 1e-300))


# --- chart metrics ------------------------------------------------------------


def sphere_colatitude_metric(radius: float = 1.0) -> MetricField:
    """Round 2-sphere in colatitude/longitude ``(theta, phi)``."""

    def metric(x):
        return radius**2 * np.diag([1.0, np.sin(x[0]) ** 2])

    return metric


def sphere_colatitude_christoffel(x) -> np.ndarray:
    """Exact Christoffel symbols of the colatitude chart (unit radius)."""
    theta = x[0]
    out = np.zeros((2, 2, 2))
    out[0, 1, 1] = -np.sin(theta) * np.cos(theta)
    out[1, 0, 1] = out[1, 1, 0] = np.cos(theta) / np.sin(theta)
    return out


def stereographic_conformal(x: np.ndarray) -> tuple[float, np.ndarray]:
    """Log conformal factor ``f = log(2/(1+|x|^2))`` and its gradient."""
    q = 1.0 + x @ x
    return float(np.log(2.0 / q)), -2.0 * x / q


def sphere_stereographic_metric(dim: int, kappa: float = 1.0) -> MetricField:
    """Round sphere of curvature ``kappa`` in stereographic coordinates."""

    def metric(x):
        f, _ = stereographic_conformal(x)
        return np.exp(2 * f) / kappa * np.eye(dim)

    return metric


def euclidean_metric(dim: int) -> MetricField:
    return lambda x: np.eye(dim)


# --- family coframes ------------------------------------------------------------


def stenzel_coframe(n: int) -> CoframeField:
    """Orthonormal coframe of the Stenzel metric in the chart (stereographic base, fiber ``y``).

    Frame order matches :func:`holonomy_lab.stenzel.curvature`: radial-horizontal,
    other horizontal, radial-vertical, other vertical.
    """

    def coframe(point):
        x, y = point[:n], point[n:]
        f, grad = stereographic_conformal(x)
        r = float(np.linalg.norm(y))
        if r < 1e-2:
            raise DomainError("Stenzel chart excludes r < 1e-2")
        state = stenzel.radial_state(r, n, with_rho=False)
        gauge = stenzel.householder_rotation(y / r)
        base = np.hstack([np.exp(f) * np.eye(n), np.zeros((n, n))])
        fiber = np.hstack([-np.outer(grad, y) + (y @ grad) * np.eye(n), np.eye(n)])
        sb, sf = gauge @ base, gauge @ fiber
        return np.vstack([state.c * sb[:1], state.a * sb[1:], state.c * sf[:1], (state.b / r) * sf[1:]])

    return coframe


def calabi_coframe(n: int) -> CoframeField:
    """Real coframe of the Calabi metric in affine Fubini–Study coordinates.

    Chart point: ``(re w, im w, re p, im p)``; the fiber coordinate ``p`` is
    rescaled by the Hermitian square root of the base metric, then unitary
    gauged so that its first row is ``z/|z|``.
    """

    def coframe(point):
        w = point[:n] + 1j * point[n : 2 * n]
        p = point[2 * n : 3 * n] + 1j * point[3 * n :]
        s = 1.0 + float((w.conj() @ w).real)
        herm = (s * np.eye(n) - np.outer(w.conj(), w)) / s**2
        gamma = np.zeros((n, n, n), dtype=complex)
        for c in range(n):
            for a in range(n):
                for b in range(n):
                    gamma[c, a, b] = -((a == c) * w.conj()[b] + (b == c) * w.conj()[a]) / s
        upper = np.linalg.cholesky(herm.T).conj().T
        size = 4 * n
        dw = np.zeros((n, size), dtype=complex)
        dp = np.zeros((n, size), dtype=complex)
        for a in range(n):
            dw[a, a], dw[a, n + a] = 1.0, 1j
            dp[a, 2 * n + a], dp[a, 3 * n + a] = 1.0, 1j
        theta = upper @ dw
        dp_cov = dp - np.einsum("c,cab,ak->bk", p, gamma, dw)
        upper_inv = np.linalg.inv(upper)
        z = p @ upper_inv
        dz = np.einsum("bk,bv->vk", dp_cov, upper_inv)
        r = float(np.linalg.norm(z))
        if r < 1e-2:
            raise DomainError("Calabi chart excludes r < 1e-2")
        gauge = calabi.complex_householder(z / r)
        sig, sig_fiber = gauge @ theta, gauge.conj() @ dz
        a, b, c, f = calabi.coefficients(r)[:4]
        h = c
        xi = np.zeros((2 * n, size), dtype=complex)
        xi[0] = c * sig[0]
        xi[1:n] = b * sig[1:]
        xi[n] = h * sig_fiber[0].real + 1j * (f / r) * sig_fiber[0].imag
        xi[n + 1 :] = (a / r) * sig_fiber[1:]
        out = np.zeros((size, size))
        out[0::2], out[1::2] = xi.real, xi.imag
        return out

    return coframe


def calabi_form_rows(n: int) -> tuple[complex, np.ndarray]:
    """Coefficient and complex row combinations of the calibration form over the real coframe."""
    rows = calabi.complex_coframe(n)
    return calabi.calibration_constant(n), np.vstack([rows[:n], rows[:n].conj()])


def bryant_salamon_coframe(space: bryant_salamon.BSSpace) -> CoframeField:
    """Coframe over a stereographic base chart with the induced bundle connection.

    At ``x = 0`` the base and bundle connection forms vanish, so the frame
    agrees with the closed-form evaluation point.
    """
    n, m = space.n, space.m
    table = bryant_salamon.f_matrix(space)

    def coframe(point):
        x, y = point[:n], point[n:]
        f, grad = stereographic_conformal(x)
        conn = np.zeros((n, n, n))
        for i in range(n):
            for j in range(n):
                conn[i, j, i] += grad[j]
                conn[i, j, j] -= grad[i]
        bundle = bryant_salamon.induced_bundle_connection(space, conn, table)
        st = bryant_salamon.alpha_beta(space, float(y @ y))
        out = np.zeros((n + m, n + m))
        out[:n, :n] = st.alpha * np.exp(f) / np.sqrt(space.kappa) * np.eye(n)
        out[n:, :n] = st.beta * np.einsum("mnk,n->mk", bundle, y)
        out[n:, n:] = st.beta * np.eye(m)
        return out

    return coframe


def form_field(coframe: CoframeField, coefficient, rows: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Coordinate components of ``coefficient * (rows @ E)[0] ^ ...`` as a dense tensor (real part)."""

    def field(x):
        mat = coframe(x)
        return (coefficient * dense_monomial(rows @ mat, mat.shape[0])).real

    return field


def frame_curvature_fd(coframe: CoframeField, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """FD Riemann tensor at ``x`` expressed in the orthonormal frame of ``coframe``."""
    x = np.asarray(x, dtype=float)
    return to_frame(riemann_fd(metric_from_coframe(coframe), x, h), coframe(x))

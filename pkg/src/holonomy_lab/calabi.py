"""Calabi hyper-Kähler metric on the cotangent bundle of complex projective space.

Complex unitary coframe ``xi^mu`` (``mu = 0..2n-1``, 0-based) is stored over
the real orthonormal coframe by ``xi^mu = omega^{2 mu} + i omega^{2 mu + 1}``.
Block order: ``xi^0`` (radial-horizontal), ``xi^1..xi^{n-1}`` (horizontal),
``xi^n`` (radial) and ``xi^{n+1}..xi^{2n-1}`` (vertical).  The real
horizontal space is spanned by ``omega^0..omega^{2n-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NumericError, StructureError
from .form_derivatives import GradientTerm, HessianTerm, outer_term
from .riemann import FrameIndexSet, RiemannSample
from .stenzel import DiagonalHessian

R_MAX = 300.0


def _check_dimension(n: int) -> None:
    if int(n) != n or n < 1:
        raise StructureError("n >= 1 required")


def _check_radius(r: float) -> None:
    if not np.isfinite(r) or r < 0:
        raise DomainError(f"radius must be finite and non-negative, got {r}")
    if r > R_MAX:
        raise NumericError(f"radius {r} exceeds the overflow cap {R_MAX}")


def coefficients(r):
    """``(a, b, c, f, h)`` at fiber radius ``r`` (scalars or arrays)."""
    r = np.asarray(r, dtype=float)
    c = np.sqrt(np.cosh(2.0 * r))
    return np.sinh(r), np.cosh(r), c, np.sinh(2.0 * r) / (2.0 * c), c


@lru_cache(maxsize=4096)
def rho_of_r(r: float) -> float:
    """Distance ``rho = int_0^r sqrt(cosh 2u) du`` from the zero section."""
    _check_radius(r)
    value, _ = quad(lambda u: np.sqrt(np.cosh(2.0 * u)), 0.0, r, epsabs=0.0, epsrel=1e-13, limit=200)
    return value


def rho_of_r_array(r) -> np.ndarray:
    """Vectorised :func:`rho_of_r` via 40-point Gauss–Legendre (smooth integrand)."""
    r = np.asarray(r, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(40)
    u = 0.5 * r[..., None] * (nodes + 1.0)
    return 0.5 * r * (weights * np.sqrt(np.cosh(2.0 * u))).sum(axis=-1)


@dataclass
class CalabiRadialState:
    """Coefficient functions at one fiber radius."""

    n: int
    r: float
    rho: float
    a: float
    b: float
    c: float
    f: float
    h: float


def radial_state(r: float, n: int) -> CalabiRadialState:
    """Closed-form coefficients and ``rho`` by quadrature."""
    _check_dimension(n)
    _check_radius(r)
    a, b, c, f, h = (float(x) for x in coefficients(r))
    return CalabiRadialState(n, float(r), rho_of_r(float(r)), a, b, c, f, h)


HK_RELATIONS = ("d(a^2) - 2hf", "d(b^2) - 2hf", "d(c^2) - 4hf", "a^2 + b^2 - c^2", "d(ab) - hc", "d(fc) - hc", "ab - fc")


def _closed_form_derivatives(r: float) -> dict[str, float]:
    s2, c2 = np.sinh(2.0 * r), np.cosh(2.0 * r)
    return {"a2": s2, "b2": s2, "c2": 2.0 * s2, "ab": c2, "fc": c2}


def _fd_derivatives(r: float, step: float) -> dict[str, float]:
    def products(x):
        a, b, c, f, _ = coefficients(x)
        return {"a2": a * a, "b2": b * b, "c2": c * c, "ab": a * b, "fc": f * c}

    plus, minus = products(r + step), products(r - step)
    return {k: float((plus[k] - minus[k]) / (2.0 * step)) for k in plus}


def hk_system_residual(state: CalabiRadialState, h_fd: float | None = None) -> np.ndarray:
    """Residuals of the seven hyper-Kähler relations, in :data:`HK_RELATIONS` order.

    Derivatives are closed form, or central differences with step ``h_fd``
    when given.  Each residual is divided by ``max(1, |reference term|)``.
    """
    r = state.r
    if h_fd is None:
        deriv = _closed_form_derivatives(r)
    else:
        if r - h_fd < 0:
            raise DomainError("finite-difference step reaches r < 0")
        deriv = _fd_derivatives(r, h_fd)
    a, b, c, f, h = state.a, state.b, state.c, state.f, state.h
    pairs = [
        (deriv["a2"], 2 * h * f),
        (deriv["b2"], 2 * h * f),
        (deriv["c2"], 4 * h * f),
        (a * a + b * b, c * c),
        (deriv["ab"], h * c),
        (deriv["fc"], h * c),
        (a * b, f * c),
    ]
    return np.array([abs(x - y) / max(1.0, abs(y)) for x, y in pairs])


# --- complex coframe helpers -------------------------------------------------


def complex_coframe(n: int) -> np.ndarray:
    """Rows ``xi^mu`` as complex covectors over the real orthonormal coframe."""
    dim = 4 * n
    rows = np.zeros((2 * n, dim), dtype=complex)
    for mu in range(2 * n):
        rows[mu, 2 * mu] = 1.0
        rows[mu, 2 * mu + 1] = 1j
    return rows


def complex_structure(n: int) -> np.ndarray:
    """``J e_{2 mu} = e_{2 mu + 1}`` on the real frame (column ``k`` is ``J e_k``)."""
    dim = 4 * n
    jmat = np.zeros((dim, dim))
    for mu in range(2 * n):
        jmat[2 * mu + 1, 2 * mu] = 1.0
        jmat[2 * mu, 2 * mu + 1] = -1.0
    return jmat


def _wedge(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    return np.outer(first, second) - np.outer(second, first)


def curvature_forms(r: float, n: int) -> np.ndarray:
    """Curvature 2-forms ``Rf[upper, lower]`` as antisymmetric real-frame matrices.

    Only the listed forms are entered; the rest follow by skew-Hermitian
    completion.
    """
    _, _, c, _, _ = (float(x) for x in coefficients(r))
    xi = complex_coframe(n)
    xib = xi.conj()
    size = 2 * n
    dim = 4 * n
    radial = n
    horiz = range(1, n)

    def pair(p, q):
        return _wedge(xi[p], xib[q])

    forms = np.zeros((size, size, dim, dim), dtype=complex)
    filled = np.zeros((size, size), dtype=bool)

    def put(up, low, value):
        forms[up, low] = value
        filled[up, low] = True

    trace_part = sum((pair(j, j) - pair(n + j, n + j) for j in horiz), np.zeros((dim, dim), dtype=complex))
    first = 2.0 / c**6 * (pair(0, 0) - pair(radial, radial)) + 1.0 / c**4 * trace_part
    put(0, 0, first)
    put(radial, radial, -first)
    for j in horiz:
        value = 1.0 / c**4 * (pair(j, 0) - pair(radial, n + j))
        put(j, 0, value)
        put(radial, n + j, -value)
        value = -1.0 / c**4 * (pair(n + j, 0) + pair(radial, j))
        put(n + j, 0, value)
        put(radial, j, value)
    put(radial, 0, -2.0 / c**6 * pair(radial, 0))
    for j in horiz:
        for k in horiz:
            put(n + k, j, -1.0 / c**2 * (pair(n + j, k) + pair(n + k, j)))
            value = 1.0 / c**2 * (pair(k, j) - pair(n + j, n + k))
            if j == k:
                value = value + 1.0 / c**4 * (pair(0, 0) - pair(radial, radial)) + 1.0 / c**2 * trace_part
            put(k, j, value)
            put(n + j, n + k, -value)
    for up in range(size):
        for low in range(size):
            if not filled[up, low] and filled[low, up]:
                forms[up, low] = -forms[low, up].conj()
    return forms


def hermitian_violation(forms: np.ndarray) -> float:
    """``max |F[mu, nu] + conj(F[nu, mu])|`` for a matrix of complex forms."""
    return float(np.abs(forms + np.swapaxes(forms, 0, 1).conj()).max())


def real_components(forms: np.ndarray) -> np.ndarray:
    """Real 4-index tensor from complex curvature 2-forms.

    ``R[2m, 2v] = Re F[m, v]``, ``R[2m+1, 2v] = Im F[m, v]``,
    ``R[2m+1, 2v+1] = Re F[m, v]``, ``R[2m, 2v+1] = -Im F[m, v]``.
    """
    size = forms.shape[0]
    dim = forms.shape[-1]
    out = np.zeros((dim,) * 4)
    for m in range(size):
        for v in range(size):
            out[2 * m, 2 * v] = forms[m, v].real
            out[2 * m + 1, 2 * v] = forms[m, v].imag
            out[2 * m + 1, 2 * v + 1] = forms[m, v].real
            out[2 * m, 2 * v + 1] = -forms[m, v].imag
    return out


def curvature(state: CalabiRadialState) -> RiemannSample:
    """Real curvature table with the complex structure attached."""
    forms = curvature_forms(state.r, state.n)
    if hermitian_violation(forms) > 1e-12:
        raise StructureError("curvature forms are not skew-Hermitian")
    n = state.n
    return RiemannSample(real_components(forms), complex_structure(n), FrameIndexSet(2 * n, 2 * n))


@dataclass
class ConnectionSample:
    """Hermitian connection forms ``xi^mu_nu`` over the real coframe.

    ``forms[mu, nu]`` is a complex covector of length ``4n`` with
    ``d xi^mu = -xi^mu_nu ^ xi^nu``.  Entries flagged in
    ``gauge_dependent`` omit the pulled-back base connection and gauge
    derivative, so only their radial part is populated.
    """

    forms: np.ndarray
    gauge_dependent: np.ndarray
    singular: bool = False


def connection_sample(state: CalabiRadialState) -> ConnectionSample:
    """Populate the radial connection components of the Calabi metric."""
    n, r = state.n, state.r
    if r == 0.0:
        raise DomainError("connection has a 1/f singularity at r = 0")
    a, b, c, f = state.a, state.b, state.c, state.f
    xi = complex_coframe(n)
    im_radial = xi[n].imag.astype(complex)
    size = 2 * n
    forms = np.zeros((size, size, 4 * n), dtype=complex)
    known = np.zeros((size, size), dtype=bool)
    gauge = np.zeros((size, size), dtype=bool)

    def put(up, low, value):
        forms[up, low] = value
        known[up, low] = True

    put(0, 0, 1j * (2 * f / c**2 - 1.0 / f) * im_radial)
    put(n, n, -forms[0, 0])
    put(0, n, 2 * f / c**2 * xi[0])
    for j in range(1, n):
        put(j, n, f / b**2 * xi[j])
        put(0, n + j, f / b**2 * xi[j])
        put(n + j, n, f / a**2 * xi[n + j])
        put(0, j, -f / a**2 * xi[n + j])
        for k in range(1, n):
            put(j, n + k, np.zeros(4 * n, dtype=complex))
            radial_part = 1j * f / b**2 * im_radial if j == k else np.zeros(4 * n, dtype=complex)
            put(k, j, radial_part)
            put(n + j, n + k, -radial_part)
            gauge[k, j] = gauge[n + j, n + k] = True
    for up in range(size):
        for low in range(size):
            if not known[up, low] and known[low, up]:
                forms[up, low] = -forms[low, up].conj()
                gauge[up, low] = gauge[low, up]
    return ConnectionSample(forms, gauge)


def hessian_psi(state: CalabiRadialState) -> DiagonalHessian:
    """Hessian of ``psi = rho^2`` in the real frame (diagonal)."""
    n = state.n
    labels = []
    for mu in range(2 * n):
        labels += [f"re xi^{mu + 1}", f"im xi^{mu + 1}"]
    if state.r == 0.0:
        # horizontal entries vanish; every vertical entry tends to 2
        entries = np.concatenate([np.zeros(2 * n), np.full(2 * n, 2.0)])
        return DiagonalHessian(entries, labels, limit=True)
    rho, a, b, c, f = state.rho, state.a, state.b, state.c, state.f
    entries = np.empty(4 * n)
    entries[0:2] = 2 * rho * 2 * f / c**2
    entries[2 : 2 * n] = 2 * rho * f / b**2
    entries[2 * n] = 2.0
    entries[2 * n + 1] = 2 * rho * (1.0 / f - 2 * f / c**2)
    entries[2 * n + 2 :] = 2 * rho * f / a**2
    return DiagonalHessian(entries, labels)


@dataclass
class UnitaryGauge:
    """Unitary matrix with first row ``z/|z|``."""

    T: np.ndarray


def unitary_gauge(z) -> UnitaryGauge:
    """Complex Householder gauge; ``T T^* = I`` and ``T[0] = z/|z|``."""
    z = np.asarray(z, dtype=complex)
    norm = np.linalg.norm(z)
    if norm == 0:
        raise DomainError("gauge undefined at z = 0")
    return UnitaryGauge(complex_householder(z / norm))


def complex_householder(unit: np.ndarray) -> np.ndarray:
    """Unitary matrix whose first row equals ``unit``."""
    conj = unit.conj()
    dim = unit.shape[0]
    first = np.zeros(dim, dtype=complex)
    first[0] = 1.0
    phase = conj[0] / abs(conj[0]) if abs(conj[0]) > 1e-300 else 1.0
    w = conj - phase * first
    if np.linalg.norm(w) < 1e-14:
        mat = phase * np.eye(dim)
    else:
        mat = phase * (np.eye(dim) - 2.0 * np.outer(w, w.conj()) / (w.conj() @ w))
    return mat.conj().T


def calibration_constant(n: int) -> complex:
    """``k_n`` normalising ``xi^1 ^ ... ^ xi^n ^ conj(...)`` to the real volume form."""
    return (-1) ** (n * (n - 1) // 2) * (0.5j) ** n


# --- derivatives of the calibration form ------------------------------------


def omega_terms(n: int, r) -> tuple[list[GradientTerm], list[HessianTerm]]:
    """Gradient and Hessian terms of the calibration form with their conjugates.

    ``r`` may be a scalar or an array over samples.  The sum of each list
    is real.
    """
    _check_dimension(n)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("calibration-form derivatives are evaluated for r > 0")
    a, b, c, f, h = coefficients(r)
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    g1 = sh / ch**1.5
    g1p = (2 - sh**2) / ch**2.5
    g2 = np.tanh(r) / np.sqrt(ch)
    g2p = (1 + np.tanh(r) ** 2 - 2 * np.sinh(r) ** 2) / ch**1.5
    rows = complex_coframe(n)
    bars = rows.conj()

    def x(mu):
        return rows[mu - 1]

    def xb(mu):
        return bars[mu - 1]

    re_radial = rows[n].real.astype(complex)
    im_radial = rows[n].imag.astype(complex)
    const = calibration_constant(n)
    js = range(2, n + 1)

    def xi_block(bar=False):
        src = xb if bar else x
        return [(1, [src(j) for j in js])]

    def xi_minus(j, bar=False):
        src = xb if bar else x
        return [((-1) ** j, [src(k) for k in js if k != j])]

    def wedge(*parts):
        out = [(1, [])]
        for part in parts:
            if isinstance(part, np.ndarray):
                part = [(1, [part])]
            out = [(s1 * s2, l1 + l2) for s1, l1 in out for s2, l2 in part]
        return out

    grads = []
    hess = []

    def add_grad(coef, d, form):
        grads.extend((coef * s, d, rws) for s, rws in form)

    def add_hess(coef, d1, d2, form):
        hess.extend((coef * s, d1, d2, rws) for s, rws in form)

    add_grad(-const * g1, x(1), wedge(x(n + 1), xi_block(), xb(1), xi_block(True)))
    for j in js:
        add_grad(-const * a / (b * c), x(j), wedge(x(n + j), xi_block(), xb(1), xi_block(True)))
        add_grad(-const * g2, x(j), wedge(x(1), x(n + 1), xi_minus(j), xb(1), xi_block(True)))

    base_form = wedge(x(n + 1), xi_block(), xb(1), xi_block(True))
    # radial-horizontal block
    add_hess(4 * f**2 / c**4, xb(1), x(1), wedge(x(1), xi_block(), xb(1), xi_block(True)) + [(-s, rw) for s, rw in wedge(x(n + 1), xi_block(), xb(n + 1), xi_block(True))])
    radial_terms = [(g1p / h, re_radial, x(1)), (1j * g1 * (g1 - 1 / f), im_radial, x(1)), (-4 * f**2 / c**4, x(1), x(n + 1))]
    radial_terms += [(2 * b**2 / c**4, x(n + j), x(j)) for j in js] + [(-2 * a**2 / c**4, x(j), x(n + j)) for j in js]
    for coef, d1, d2 in radial_terms:
        add_hess(coef, d1, d2, base_form)
    for j in js:
        add_hess(2 * b**2 / c**4, xb(n + j), x(1), wedge(x(n + j), xi_block(), xb(1), xi_block(True)))
        add_hess(-2 * a**2 / c**4, xb(j), x(1), wedge(x(n + 1), xi_block(), xb(n + j), xi_block(True)))
        add_hess(2 * b**2 / c**4, xb(n + j), x(1), wedge(x(1), x(n + 1), xi_minus(j), xb(1), xi_block(True)))
        add_hess(-2 * a**2 / c**4, xb(j), x(1), wedge(x(n + 1), xi_block(), xb(1), xb(n + 1), xi_minus(j, True)))

    def horizontal_terms(j):
        return [(g2p / h, re_radial, x(j)), (1j * g2 * (g1 - 1 / f), im_radial, x(j)), (-1 / c**2, xb(n + j), x(1)), (-(f**2) / b**4, x(j), x(n + 1))]

    # vertical-horizontal block
    for j in js:
        add_hess(f**2 / b**4, xb(j), x(j), wedge(x(1), xi_block(), xb(1), xi_block(True)))
        add_hess(-1 / c**2, x(n + j), x(j), base_form)
        for coef, d1, d2 in horizontal_terms(j):
            add_hess(coef, d1, d2, wedge(x(n + j), xi_block(), xb(1), xi_block(True)))
        add_hess(-2 * a**2 / c**4, xb(1), x(j), wedge(x(n + j), xi_block(), xb(n + 1), xi_block(True)))
        for k in js:
            add_hess(-(f**2) / b**4, xb(k), x(j), wedge(x(n + j), xi_block(), xb(n + k), xi_block(True)))
            add_hess(1 / c**2, xb(n + k), x(j), wedge(x(1), x(n + j), xi_minus(k), xb(1), xi_block(True)))
            add_hess(f**2 / b**4, x(k), x(j), wedge(x(n + 1), x(n + j), xi_minus(k), xb(1), xi_block(True)))
            add_hess(-(f**2) / b**4, xb(k), x(j), wedge(x(n + j), xi_block(), xb(1), xb(n + 1), xi_minus(k, True)))
    # mixed block
    for j in js:
        add_hess(f**2 / b**4, xb(j), x(j), wedge(x(1), xi_block(), xb(1), xi_block(True)))
        add_hess(-1 / c**2, x(n + j), x(j), base_form)
        for coef, d1, d2 in horizontal_terms(j):
            add_hess(coef, d1, d2, wedge(x(1), x(n + 1), xi_minus(j), xb(1), xi_block(True)))
        for k in js:
            add_hess(f**2 / b**4, x(k), x(j), wedge(x(n + 1), x(n + k), xi_minus(j), xb(1), xi_block(True)))
            add_hess(1 / c**2, xb(n + k), x(j), wedge(x(1), x(n + k), xi_minus(j), xb(1), xi_block(True)))
            add_hess(-(f**2) / b**4, xb(k), x(j), wedge(x(1), x(n + 1), xi_minus(j), xb(n + k), xi_block(True)))
            add_hess(-(f**2) / b**4, xb(k), x(j), wedge(x(1), x(n + 1), xi_minus(j), xb(1), xb(n + 1), xi_minus(k, True)))
        add_hess(-2 * a**2 / c**4, xb(1), x(j), wedge(x(1), x(n + 1), xi_minus(j), xb(n + 1), xi_block(True)))

    hess = [(-const * coef, d1, d2, rws) for coef, d1, d2, rws in hess]
    hess += [(np.conj(coef), d1.conj(), d2.conj(), [rw.conj() for rw in rws]) for coef, d1, d2, rws in hess]
    grads += [(np.conj(coef), d.conj(), [rw.conj() for rw in rws]) for coef, d, rws in grads]
    grad_terms = [GradientTerm(coef, d, np.array(rws)) for coef, d, rws in grads]
    hess_terms = [outer_term(coef, d1, d2, np.array(rws)) for coef, d1, d2, rws in hess]
    return grad_terms, hess_terms


def state_terms(state: CalabiRadialState):
    """:func:`omega_terms` at one radial state."""
    return omega_terms(state.n, state.r)

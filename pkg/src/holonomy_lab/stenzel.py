"""Stenzel Ricci-flat Kähler metric on the cotangent bundle of the n-sphere.

The metric has cohomogeneity one: in the adapted orthonormal coframe
``omega^0`` (radial-horizontal), ``omega^1..omega^{n-1}`` (horizontal),
``omega^n`` (radial) and ``omega^{n+1}..omega^{2n-1}`` (vertical), every
geometric quantity depends only on the fiber radius ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NumericError, StructureError
from .form_derivatives import GradientTerm, HessianTerm, outer_term
from .forms import coordinate_rows, sort_sign
from .riemann import FrameIndexSet, RiemannSample, close_under_symmetries, complex_structure_matrix, j_action_split

R_MAX = 300.0
QUAD_EPSREL = 1e-13
QUAD_LIMIT = 200


def _check_dimension(n: int) -> None:
    if int(n) != n or n < 2:
        raise StructureError("n > 1 required")


def _check_radius(r: float) -> None:
    if not np.isfinite(r) or r < 0:
        raise DomainError(f"radius must be finite and non-negative, got {r}")
    if r > R_MAX:
        raise NumericError(f"radius {r} exceeds the overflow cap {R_MAX}")


def _quad(func, lo, hi, epsrel=QUAD_EPSREL):
    value, err, info = quad(func, lo, hi, epsabs=0.0, epsrel=epsrel, limit=QUAD_LIMIT, full_output=True)[:3]
    if not np.isfinite(value):
        raise NumericError("quadrature returned a non-finite value")
    return value, err


def _kernel_integrals(r: float, n: int) -> tuple[float, float, float]:
    """``J``, ``K_A`` and ``K_C`` integrals over ``u`` in ``[0, r]``.

    ``J = int (sinh 2u / sinh 2r)^(n-1) du``; ``K_A`` and ``K_C`` weight the
    same kernel by ``2 sinh^2 u`` and ``2 sinh(r+u) sinh(r-u)``.  The kernel
    is written in the shifted variable ``t = r - u`` so that it never
    overflows.
    """
    denom = -np.expm1(-4.0 * r)

    def kernel(t):
        u = r - t
        return (np.exp(-2.0 * t) * (-np.expm1(-4.0 * u)) / denom) ** (n - 1)

    jval, _ = _quad(kernel, 0.0, r)
    kval_a, _ = _quad(lambda t: kernel(t) * 2.0 * np.sinh(r - t) ** 2, 0.0, r)
    kval_c, _ = _quad(lambda t: kernel(t) * 2.0 * np.sinh(2.0 * r - t) * np.sinh(t), 0.0, r)
    return jval, kval_a, kval_c


def hprime(r: float, n: int) -> tuple[float, float, float]:
    """First three derivatives of the Kähler potential.

    ``(h')^n = 2^{n+1} n int_0^r sinh(2u)^{n-1} du``, then ``h''`` and
    ``h'''`` follow by differentiating this relation.

    Returns
    -------
    tuple of float
        ``(h', h'', h''')``.  At ``r = 0`` the limits ``(0, 4, 0)`` are returned.
    """
    _check_dimension(n)
    _check_radius(r)
    if r == 0.0:
        return 0.0, 4.0, 0.0
    jval, _, _ = _kernel_integrals(r, n)
    return _h_from_kernel(r, n, jval)


def _h_from_kernel(r: float, n: int, jval: float) -> tuple[float, float, float]:
    sr = np.sinh(2.0 * r)
    hp = (2.0 ** (n + 1) * n * jval) ** (1.0 / n) * sr ** ((n - 1.0) / n)
    hpp = hp / (n * jval)
    hppp = hpp * (n - 1) * (2.0 / np.tanh(2.0 * r) - hpp / hp)
    return hp, hpp, hppp


def _c_coefficient(u: float, n: int) -> float:
    if u == 0.0:
        return 1.0
    return float(np.sqrt(hprime(u, n)[1] / 4.0))


def rho_segment(r0: float, r1: float, n: int) -> float:
    """Geodesic length ``int_{r0}^{r1} c(u) du`` along a radial line."""
    value, _ = _quad(lambda u: _c_coefficient(u, n), r0, r1, epsrel=1e-12)
    return value


@lru_cache(maxsize=4096)
def rho_of_r(r: float, n: int) -> float:
    """Distance ``rho(r)`` from the zero section."""
    _check_dimension(n)
    _check_radius(r)
    return 0.0 if r == 0.0 else rho_segment(0.0, r, n)


def r_of_rho(rho: float, n: int, tol: float = 1e-13, max_iter: int = 100) -> float:
    """Invert ``rho(r)`` by bracketed Newton with a bisection fallback.

    ``c >= 1`` makes ``rho`` strictly increasing with ``rho(r) >= r``, so
    ``[0, rho]`` always brackets the root.
    """
    _check_dimension(n)
    if not np.isfinite(rho) or rho < 0:
        raise DomainError(f"rho must be finite and non-negative, got {rho}")
    if rho == 0.0:
        return 0.0
    lo, rho_lo = 0.0, 0.0
    hi = min(rho, R_MAX)
    rho_hi = rho_of_r(hi, n)
    if rho_hi < rho:
        raise NumericError(f"rho {rho} is beyond the radius cap")
    current = lo + (rho - rho_lo) / (rho_hi - rho_lo) * (hi - lo)
    for _ in range(max_iter):
        value = rho_lo + rho_segment(lo, current, n)
        miss = value - rho
        if abs(miss) <= tol * max(1.0, rho):
            return current
        if miss < 0:
            lo, rho_lo = current, value
        else:
            hi, rho_hi = current, value
        proposal = current - miss / _c_coefficient(current, n)
        if not lo < proposal < hi:
            proposal = 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * max(1.0, hi):
            return current
        current = proposal
    raise NumericError(f"rho inversion did not converge for rho = {rho}")


@dataclass
class StenzelRadialState:
    """All radial coefficient functions at one fiber radius.

    Attributes
    ----------
    n : int
    r : float
        Fiber radius.
    rho : float
        Distance from the zero section (``nan`` when not requested).
    hp, hpp, hppp : float
        ``h'``, ``h''``, ``h'''``.
    a, b, c : float
        Metric coefficients.
    A, B, C : float
        Connection scalars; ``B`` is ``-inf`` at ``r = 0``.
    Adot, Bdot, Cdot : float
        Derivatives with respect to ``rho``.
    """

    n: int
    r: float
    rho: float
    hp: float
    hpp: float
    hppp: float
    a: float
    b: float
    c: float
    A: float
    B: float
    C: float
    Adot: float
    Bdot: float
    Cdot: float
    limit: bool = False
    kernel: tuple = field(default=(), repr=False)


def _derivatives(n, coef_a, coef_b, coef_c):
    total = coef_a + coef_b + coef_c
    return (
        -n * coef_b * coef_c + coef_a * total,
        -n * coef_a * coef_c + coef_b * total,
        -2.0 * coef_a * coef_b + (n - 1) * coef_c * total,
    )


def radial_state(r: float, n: int, with_rho: bool = True) -> StenzelRadialState:
    """Evaluate every radial coefficient at fiber radius ``r``.

    At ``r = 0`` only the limits ``a = c = 1``, ``b = 0``, ``A = C = 0`` are
    returned, with ``limit=True``.
    """
    _check_dimension(n)
    _check_radius(r)
    if r == 0.0:
        adot = -n / (n + 2.0)
        return StenzelRadialState(n, 0.0, 0.0, 0.0, 4.0, 0.0, 1.0, 0.0, 1.0, 0.0, -np.inf, 0.0, adot, np.inf, -2.0 / (n + 2.0), limit=True)
    jval, kval_a, kval_c = _kernel_integrals(r, n)
    hp, hpp, hppp = _h_from_kernel(r, n, jval)
    sr = np.sinh(2.0 * r)
    root = np.sqrt(hpp)
    coef_a = -(2.0 * kval_a / (sr * jval)) / root
    coef_b = -(hpp / hp + 2.0 / sr) / root
    coef_c = -(2.0 * kval_c / (sr * jval)) / root
    adot, bdot, cdot = _derivatives(n, coef_a, coef_b, coef_c)
    return StenzelRadialState(
        n=n,
        r=float(r),
        rho=rho_of_r(float(r), n) if with_rho else float("nan"),
        hp=hp,
        hpp=hpp,
        hppp=hppp,
        a=float(np.sqrt(hp / np.tanh(r) / 4.0)),
        b=float(np.sqrt(hp * np.tanh(r) / 4.0)),
        c=float(np.sqrt(hpp / 4.0)),
        A=coef_a,
        B=coef_b,
        C=coef_c,
        Adot=adot,
        Bdot=bdot,
        Cdot=cdot,
        kernel=(jval, kval_a, kval_c),
    )


def identity_residuals(state: StenzelRadialState) -> dict[str, float]:
    """Residuals of the metric-coefficient, ODE and pairwise-sum identities.

    The ODE residuals use closed-form ``r``-derivatives of ``a, b, c`` from
    ``h'', h'''`` divided by ``c`` (chain rule to ``rho``).
    """
    if state.limit:
        raise DomainError("identities are evaluated for r > 0")
    n, r = state.n, state.r
    a, b, c, A, B, C = state.a, state.b, state.c, state.A, state.B, state.C
    sr = np.sinh(2.0 * r)
    dlog_a = 0.5 * (state.hpp / state.hp - 2.0 / sr)
    dlog_b = 0.5 * (state.hpp / state.hp + 2.0 / sr)
    dlog_c = 0.5 * state.hppp / state.hpp
    scale = 2.0 * a * b * c
    return {
        "a_squared": abs(a * a - state.hp / np.tanh(r) / 4.0) / max(1.0, a * a),
        "b_squared": abs(b * b - state.hp * np.tanh(r) / 4.0) / max(1.0, b * b),
        "c_squared": abs(c * c - state.hpp / 4.0) / max(1.0, c * c),
        "A_ratio": abs(A - (a * a - b * b - c * c) / scale) / max(1.0, abs(A)),
        "B_ratio": abs(B - (b * b - a * a - c * c) / scale) / max(1.0, abs(B)),
        "C_ratio": abs(C - (c * c - a * a - b * b) / scale) / max(1.0, abs(C)),
        "ode_a": abs(dlog_a / c + A) / max(1.0, abs(A)),
        "ode_b": abs(dlog_b / c + B) / max(1.0, abs(B)),
        "ode_c": abs(dlog_c / c + (n - 1) * C) / max(1.0, abs(C)),
        "sum_BC": abs(B + C + a / (b * c)) / max(1.0, a / (b * c)),
        "sum_CA": abs(C + A + b / (a * c)) / max(1.0, b / (a * c)),
        "sum_AB": abs(A + B + c / (a * b)) / max(1.0, c / (a * b)),
    }


@dataclass
class ConnectionScalarReport:
    """Empirical bounds of ``|A|/rho``, ``|C|/rho`` and ``|B| rho`` on a grid."""

    n: int
    rho: np.ndarray
    r: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    all_negative: bool
    k_emp: float
    limit_errors: dict

    @property
    def ratios(self) -> dict[str, np.ndarray]:
        return {"A_over_rho": np.abs(self.A) / self.rho, "C_over_rho": np.abs(self.C) / self.rho, "B_times_rho": np.abs(self.B) * self.rho}

    def passed(self, limit_tol: float = 0.01) -> bool:
        return self.all_negative and np.isfinite(self.k_emp) and max(self.limit_errors.values()) < limit_tol


def connection_scalar_sweep(n: int, grid) -> ConnectionScalarReport:
    """Sign and two-sided bounds of the connection scalars on a ``rho`` grid in (0, 1).

    The limit errors compare the ratios at the smallest grid point with
    ``n/(n+2)``, ``2/(n+2)`` and ``1``.
    """
    _check_dimension(n)
    rho = np.sort(np.asarray(grid, dtype=float))
    if rho.size == 0 or rho[0] <= 0 or rho[-1] >= 1:
        raise DomainError("grid must lie inside (0, 1)")
    radii = np.array([r_of_rho(float(p), n) for p in rho])
    states = [radial_state(float(r), n, with_rho=False) for r in radii]
    coef_a = np.array([s.A for s in states])
    coef_b = np.array([s.B for s in states])
    coef_c = np.array([s.C for s in states])
    ratios = np.concatenate([np.abs(coef_a) / rho, np.abs(coef_c) / rho, np.abs(coef_b) * rho])
    k_emp = float(max(ratios.max(), 1.0 / ratios.min()))
    limits = {
        "A_over_rho": abs(abs(coef_a[0]) / rho[0] / (n / (n + 2.0)) - 1.0),
        "C_over_rho": abs(abs(coef_c[0]) / rho[0] / (2.0 / (n + 2.0)) - 1.0),
        "B_times_rho": abs(abs(coef_b[0]) * rho[0] - 1.0),
    }
    negative = bool(np.all(coef_a < 0) and np.all(coef_b < 0) and np.all(coef_c < 0))
    return ConnectionScalarReport(n, rho, radii, coef_a, coef_b, coef_c, negative, k_emp, limits)


@dataclass
class RhoDerivativeResidual:
    """Finite-difference check of the ``rho``-derivatives of ``A, B, C``.

    Residuals are relative: ``|fd - formula| / max(1, |formula|)``.
    """

    residuals: tuple[float, float, float]
    finite_difference: tuple[float, float, float]
    formula: tuple[float, float, float]
    step: float
    warnings: list[str]

    @property
    def max_residual(self) -> float:
        return float(max(self.residuals))


def rho_derivative_residual(state: StenzelRadialState, h_fd: float = 1e-4) -> RhoDerivativeResidual:
    """Compare ``dA/drho`` etc. from central differences with the closed-form derivatives.

    The difference is taken in ``r`` with step ``h_fd * min(1, r)`` and
    converted to ``rho`` by dividing by ``c(r)``.
    """
    if state.limit:
        raise DomainError("the finite-difference check needs r > 0")
    step = h_fd * min(1.0, state.r)
    warnings = []
    if h_fd < 1e-6:
        warnings.append(f"step {h_fd:.1e} is small enough for cancellation to dominate")
    if state.r - step <= 0:
        raise DomainError("step reaches r = 0")
    plus = radial_state(state.r + step, state.n, with_rho=False)
    minus = radial_state(state.r - step, state.n, with_rho=False)
    fd = tuple((getattr(plus, k) - getattr(minus, k)) / (2.0 * step) / state.c for k in ("A", "B", "C"))
    formula = (state.Adot, state.Bdot, state.Cdot)
    residuals = tuple(abs(x - y) / max(1.0, abs(y)) for x, y in zip(fd, formula))
    return RhoDerivativeResidual(residuals, fd, formula, step, warnings)


def curvature(state: StenzelRadialState) -> RiemannSample:
    """Curvature table in the adapted orthonormal frame, closed under all symmetries."""
    n = state.n
    coef_a, coef_b, coef_c = state.A, state.B, state.C
    if state.limit:
        # products AB, BC tend to finite limits; A = C = 0
        ab, bc, ca = n / (n + 2.0), 2.0 / (n + 2.0), 0.0
    else:
        ab, bc, ca = coef_a * coef_b, coef_b * coef_c, coef_c * coef_a
    entries = {}
    cross = (n - 1) * (ca + bc) - 2.0 * ab
    entries[(0, n, 0, n)] = (n - 1) * cross
    for j in range(1, n):
        entries[(0, j, 0, j)] = ab + bc - n * ca
        entries[(0, n + j, 0, n + j)] = ab + ca - n * bc
        entries[(0, n, n + j, j)] = cross
    delta = lambda p, q: float(p == q)  # noqa: E731
    for i in range(1, n):
        for k in range(1, n):
            for j in range(1, n):
                for l in range(1, n):
                    mixed = -ab * (delta(i, j) * delta(k, l) + delta(i, l) * delta(j, k)) + (bc + ca) * delta(i, k) * delta(j, l)
                    if mixed != 0:
                        entries[(i, n + k, j, n + l)] = mixed
                    flat = (ab + bc + ca) * (delta(i, j) * delta(k, l) - delta(i, l) * delta(j, k))
                    if flat != 0:
                        entries[(i, k, j, l)] = flat
    table = close_under_symmetries(entries, 2 * n, j_action_split(n))
    return RiemannSample(table, complex_structure_matrix(n), FrameIndexSet(n, n))


@dataclass
class DiagonalHessian:
    """Frame-diagonal Hessian with labels; ``limit`` marks the ``r = 0`` limit."""

    entries: np.ndarray
    labels: list[str]
    limit: bool = False

    @property
    def min_eigenvalue(self) -> float:
        return float(self.entries.min())


def hessian_psi(state: StenzelRadialState) -> DiagonalHessian:
    """Hessian of ``psi = rho^2`` in the adapted frame."""
    n = state.n
    labels = ["w^1"] + [f"w^{j}" for j in range(2, n + 1)] + [f"w^{n + 1}"] + [f"w^{n + j}" for j in range(2, n + 1)]
    if state.limit:
        entries = np.array([0.0] * n + [2.0] * n)
        return DiagonalHessian(entries, labels, limit=True)
    rho = state.rho
    if not np.isfinite(rho):
        rho = rho_of_r(state.r, n)
    entries = np.array(
        [-2.0 * rho * (n - 1) * state.C]
        + [-2.0 * rho * state.A] * (n - 1)
        + [2.0]
        + [-2.0 * rho * state.B] * (n - 1)
    )
    return DiagonalHessian(entries, labels)


@dataclass
class SphericalGauge:
    """Rotation completing ``y/|y|`` to an oriented orthonormal basis (rows)."""

    T: np.ndarray


def spherical_gauge(y) -> SphericalGauge:
    """Householder gauge with first row ``y/|y|``, flipped to lie in SO(n)."""
    y = np.asarray(y, dtype=float)
    norm = np.linalg.norm(y)
    if norm == 0:
        raise DomainError("gauge undefined at y = 0")
    return SphericalGauge(householder_rotation(y / norm))


def householder_rotation(unit: np.ndarray) -> np.ndarray:
    """Orthogonal matrix with first row ``unit`` and determinant +1."""
    dim = unit.shape[0]
    first = np.zeros(dim)
    first[0] = 1.0
    diff = first - unit
    size = np.linalg.norm(diff)
    if size < 1e-300:
        mat = np.eye(dim)
    else:
        w = diff / size
        mat = np.eye(dim) - 2.0 * np.outer(w, w)
    if np.linalg.det(mat) < 0:
        mat[-1] *= -1.0
    return mat


# --- derivatives of the calibration form ------------------------------------


@lru_cache(maxsize=None)
def _term_structure(n: int):
    """Symbolic gradient and Hessian terms as ``(key, const, d, labels)`` tuples."""
    o1, on1 = 0, n
    oj = lambda j: j - 1  # noqa: E731
    onj = lambda j: n + j - 1  # noqa: E731
    js = range(2, n + 1)
    phi = [(1, tuple(oj(j) for j in js))]

    def phi_j(j):
        return [((-1) ** j, tuple(oj(k) for k in js if k != j))]

    def phi_jk(j, k):
        if j == k:
            return []
        rest = tuple(oj(l) for l in js if l not in (j, k))
        return [((-1) ** (j + k) if k < j else (-1) ** (j + k + 1), rest)]

    omega = [(1, tuple(range(n)))]

    def wedge(pre, form):
        return [(s, tuple(pre) + lab) for s, lab in form]

    grad = []

    def add_grad(key, const, d, form):
        for s, lab in form:
            grad.append((key, const * s, d, lab))

    add_grad("C", n - 1, o1, wedge([on1], phi))
    for j in js:
        add_grad("A", 1, oj(j), wedge([onj(j)], phi))
        add_grad("C", -1, o1, wedge([o1, onj(j)], phi_j(j)))
        add_grad("A", 1, oj(j), wedge([o1, on1], phi_j(j)))

    hess = []

    def add_hess(key, const, d1, d2, form):
        for s, lab in form:
            hess.append((key, const * s, d1, d2, lab))

    # derivative of the C-coefficient block, weighted by n - 1
    weight = n - 1
    add_hess("C2", -(n - 1) * weight, o1, o1, omega)
    for j in js:
        add_hess("BC", -weight, onj(j), o1, wedge([onj(j)], phi) + wedge([o1, on1], phi_j(j)))
    dc_terms = [("Cdot", 1, on1, o1)] + [("BC", -1, onj(j), oj(j)) for j in js] + [("C2", n - 1, o1, on1)] + [("AC", 1, oj(j), onj(j)) for j in js]
    for key, const, d1, d2 in dc_terms:
        add_hess(key, const * weight, d1, d2, wedge([on1], phi))
    for j in js:
        add_hess("C2", -weight, o1, o1, wedge([on1, onj(j)], phi_j(j)))
    # derivative of the A-coefficient vertical block
    for j in js:
        add_hess("A2", -1, oj(j), oj(j), omega)
        add_hess("AB", 1, onj(j), oj(j), wedge([on1], phi))
        for k in js:
            add_hess("AB", 1, onj(k), oj(j), wedge([onj(j), o1], phi_j(k)))
        da_terms = [("Adot", 1, on1, oj(j)), ("A2", 1, oj(j), on1), ("AB", 1, onj(j), o1), ("AC", -1, o1, onj(j))]
        for key, const, d1, d2 in da_terms:
            add_hess(key, const, d1, d2, wedge([onj(j)], phi))
        for k in js:
            add_hess("AC", -1, o1, oj(j), wedge([onj(j), onj(k)], phi_j(k)))
            add_hess("A2", 1, oj(k), oj(j), wedge([onj(j), on1], phi_j(k)))
    # derivative of the mixed C block
    add_hess("C2", -(n - 1), o1, o1, omega)
    for j in js:
        add_hess("C2", -(n - 1), o1, o1, wedge([on1, onj(j)], phi_j(j)))
        for k in js:
            add_hess("C2", 1, o1, o1, wedge([o1, onj(j), onj(k)], phi_jk(j, k)))
    for key, const, d1, d2 in dc_terms:
        for k in js:
            add_hess(key, -const, d1, d2, wedge([o1, onj(k)], phi_j(k)))
    for j in js:
        for k in js:
            add_hess("AC", -1, oj(k), o1, wedge([onj(k), onj(j)], phi_j(j)) + wedge([o1, onj(j), on1], phi_jk(j, k)))
        add_hess("BC", -1, onj(j), o1, wedge([onj(j)], phi) + wedge([o1, on1], phi_j(j)))
    # derivative of the mixed A block
    for j in js:
        add_hess("A2", -1, oj(j), oj(j), omega)
        for k in js:
            add_hess("A2", 1, oj(k), oj(j), wedge([onj(k), on1], phi_j(j)))
        da_terms = [("Adot", 1, on1, oj(j)), ("A2", 1, oj(j), on1), ("AB", 1, onj(j), o1), ("AC", -1, o1, onj(j))]
        for key, const, d1, d2 in da_terms:
            add_hess(key, const, d1, d2, wedge([o1, on1], phi_j(j)))
        add_hess("AB", 1, onj(j), oj(j), wedge([on1], phi))
        for k in js:
            add_hess("AB", -1, onj(k), oj(j), wedge([o1, onj(k)], phi_j(j)))
            add_hess("AC", -1, o1, oj(j), wedge([o1, on1, onj(k)], phi_jk(j, k)))
    return _canonical(grad), _canonical(hess)


def _canonical(terms):
    out = []
    for term in terms:
        *head, labels = term
        sign, ordered = sort_sign(labels)
        if sign == 0:
            continue
        key, const = head[0], head[1] * sign
        out.append((key, const, *head[2:], ordered))
    return tuple(out)


def _coefficients(n, coef_a, coef_b, coef_c):
    adot, _, cdot = _derivatives(n, coef_a, coef_b, coef_c)
    return {
        "A": coef_a,
        "C": coef_c,
        "C2": coef_c * coef_c,
        "BC": coef_b * coef_c,
        "AC": coef_a * coef_c,
        "A2": coef_a * coef_a,
        "AB": coef_a * coef_b,
        "Adot": adot,
        "Cdot": cdot,
    }


def omega_terms(n: int, coef_a, coef_b, coef_c) -> tuple[list[GradientTerm], list[HessianTerm]]:
    """Gradient and Hessian terms of the calibration form.

    ``coef_a, coef_b, coef_c`` may be scalars or arrays over samples.
    """
    _check_dimension(n)
    dim = 2 * n
    eye = np.eye(dim)
    cf = _coefficients(n, np.asarray(coef_a, float), np.asarray(coef_b, float), np.asarray(coef_c, float))
    grad_struct, hess_struct = _term_structure(n)
    grads = [GradientTerm(cf[key] * const, eye[d], coordinate_rows(labels, dim)) for key, const, d, labels in grad_struct]
    hessians = [outer_term(cf[key] * const, eye[d1], eye[d2], coordinate_rows(labels, dim)) for key, const, d1, d2, labels in hess_struct]
    return grads, hessians


def state_terms(state: StenzelRadialState):
    """:func:`omega_terms` for one radial state (``A = C = 0`` at the limit)."""
    if state.limit:
        raise DomainError("the calibration-form derivatives are evaluated for r > 0")
    return omega_terms(state.n, state.A, state.B, state.C)

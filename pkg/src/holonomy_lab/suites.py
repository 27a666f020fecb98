"""Per-family invariant suites shared by the command line and the acceptance tests.

Every check reports the measured value, the tolerance it is compared with and
whether it passed, so callers can print or serialise the outcome directly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import bryant_salamon, calabi, certify, oracle, stenzel
from .forms import comass_check
from .planes import linear_estimate_suite, random_graphical_basis, split_plane
from .riemann import FrameIndexSet, check_riemann_symmetries, ricci_contract

CLOSED_FORM_TOL = 1e-10
FD_TOL = 1e-6
RICCI_TOL = 1e-8
ORACLE_TOL = 1e-4


@dataclass
class CheckResult:
    """One measured quantity against its acceptance threshold."""

    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"[{status}] {self.name}: {self.value:.3e} (tol {self.tolerance:.1e}){extra}"


def below(name: str, value: float, tolerance: float, detail: str = "") -> CheckResult:
    value = float(value)
    return CheckResult(name, value, tolerance, bool(np.isfinite(value) and value < tolerance), detail)


def holds(name: str, condition: bool, value: float = 0.0, tolerance: float = 0.0, detail: str = "") -> CheckResult:
    return CheckResult(name, float(value), tolerance, bool(condition), detail)


@dataclass
class SuiteReport:
    family: str
    label: str
    checks: list[CheckResult] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def lines(self) -> list[str]:
        return [f"{self.family} {self.label}"] + ["  " + check.line() for check in self.checks]


@dataclass
class SuiteOptions:
    """Sizes and tolerances of a suite run."""

    grid_points: int = 100
    closed_form_tol: float = CLOSED_FORM_TOL
    curvature_points: int = 9
    fd_step: float = 1e-4
    oracle_step: float = 1e-3
    planes: int = 10_000
    estimate_planes: int = 2_000
    certify_samples: int = 2_000
    seed: int = 0
    include_oracle: bool = True
    include_certificate: bool = True


# --- pieces shared by all families -----------------------------------------------


def curvature_checks(samples, frame: FrameIndexSet) -> list[CheckResult]:
    ricci = max(float(np.abs(ricci_contract(sample)).max()) for sample in samples)
    symmetry = max(check_riemann_symmetries(sample).max_violation for sample in samples)
    return [
        below(f"Ricci contraction at {len(samples)} points", ricci, RICCI_TOL),
        below("Riemann symmetries", symmetry, 1e-9),
    ]


def oracle_curvature_check(coframe, point, closed_form: np.ndarray, step: float) -> list[CheckResult]:
    """Relative FD error of the frame curvature and its halving ratio."""

    def error(h):
        return oracle.relative_error(oracle.frame_curvature_fd(coframe, point, h), closed_form)

    report = oracle.richardson_check(error, step, levels=2)
    return [
        below("finite-difference curvature vs closed form (relative)", report.errors[-1], ORACLE_TOL, f"h={report.steps[-1]:g}"),
        holds("Richardson order of the FD curvature", report.second_order(), report.order, 2.0, f"ratio={report.ratios[-1]:.2f}"),
    ]


def comass_and_estimate_checks(frame: FrameIndexSet, options: SuiteOptions) -> list[CheckResult]:
    """Comass bound on Haar planes, linear pairing estimates, and the tilt/Omega relation."""
    rng = np.random.default_rng(options.seed)
    comass = comass_check(frame, options.planes, rng)
    estimates_ok = True
    worst_ratio = 0.0
    worst_tilt = 0.0
    for index in range(options.estimate_planes):
        tilt = 10.0 ** rng.uniform(-3, 0.5)
        split = split_plane(random_graphical_basis(frame, rng, tilt), frame)
        report = linear_estimate_suite(split, trials=1 + (index % 4 == 0), rng=rng)
        estimates_ok &= report.passed
        for line in report.lines:
            if line.bound > 0:
                worst_ratio = max(worst_ratio, line.lhs / line.bound)
        deficit = 1.0 - split.star_omega
        if deficit < 0.5:
            worst_tilt = max(worst_tilt, split.s_frak / (2.0 * np.sqrt(max(deficit, 1e-300))))
    return [
        holds(f"Omega(L) <= 1 + 1e-12 on {comass.samples} planes", comass.passed, comass.max_value, 1.0 + 1e-12),
        holds(f"linear pairing estimates on {options.estimate_planes} planes", estimates_ok, worst_ratio, 1.0, "value = worst lhs/bound"),
        holds("tilt below 2 sqrt(eps) whenever *Omega > 1 - eps", worst_tilt < 1.0, worst_tilt, 1.0, "value = worst s/(2 sqrt(1 - *Omega))"),
    ]


def certificate_checks(cert: certify.BoundCertificate) -> list[CheckResult]:
    worst = max(cert.validation_max.values())
    return [
        holds(
            f"derivative bounds with K_emp = {cert.k_emp:.4g} on {cert.samples} validation samples",
            cert.passed,
            worst,
            cert.k_emp,
            "value = largest required K on the validation set",
        ),
        below("imaginary residue of the form derivatives", cert.imag_residue, 1e-10),
    ]


# --- Stenzel ---------------------------------------------------------------------


def stenzel_suite(n: int, options: SuiteOptions | None = None) -> SuiteReport:
    options = options or SuiteOptions()
    start = time.perf_counter()
    report = SuiteReport("stenzel", f"n={n}")
    radii = np.geomspace(1e-2, 5.0, options.grid_points)
    states = [stenzel.radial_state(float(r), n) for r in radii]
    identity = max(max(stenzel.identity_residuals(s).values()) for s in states)
    fd = max(stenzel.rho_derivative_residual(s, options.fd_step).max_residual for s in states)
    report.checks += [
        below(f"metric/ODE/sum identities on {len(states)} radii", identity, options.closed_form_tol),
        below("finite-difference derivatives of A, B, C", fd, FD_TOL),
    ]
    sample_radii = np.geomspace(0.05, 3.0, options.curvature_points)
    report.checks += curvature_checks([stenzel.curvature(stenzel.radial_state(float(r), n)) for r in sample_radii], FrameIndexSet(n, n))
    hess_radii = np.linspace(0.0, 2.0, options.grid_points + 1)[1:]
    hessians = [stenzel.hessian_psi(stenzel.radial_state(float(r), n)) for r in hess_radii]
    vertical = {float(h.entries[n]) for h in hessians}
    report.checks += [
        holds("Hess psi positive on (0, 2]", min(h.min_eigenvalue for h in hessians) > 0, min(h.min_eigenvalue for h in hessians), 0.0, "value = smallest eigenvalue"),
        holds("fixed vertical Hessian entry equals 2", vertical == {2.0}, max(abs(v - 2.0) for v in vertical), 0.0),
    ]
    sweep = stenzel.connection_scalar_sweep(n, np.geomspace(1e-3, 0.999, options.grid_points))
    report.checks += [
        holds("A, B, C negative on rho in (0, 1)", sweep.all_negative),
        below("small-rho limits n/(n+2), 2/(n+2), 1", max(sweep.limit_errors.values()), 0.01, f"band [1/K, K] with K = {sweep.k_emp:.4g}"),
    ]
    if options.include_oracle and n == 2:
        point = np.array([0.3, -0.2, 0.5, 0.4])
        closed = stenzel.curvature(stenzel.radial_state(float(np.linalg.norm(point[n:])), n)).components
        report.checks += oracle_curvature_check(oracle.stenzel_coframe(n), point, closed, options.oracle_step)
    report.checks += comass_and_estimate_checks(FrameIndexSet(n, n), options)
    if options.include_certificate:
        report.checks += certificate_checks(certify.certify_stenzel(n, options.certify_samples, options.seed))
    report.elapsed = time.perf_counter() - start
    return report


# --- Calabi ----------------------------------------------------------------------


def calabi_connection_check(n: int, point: np.ndarray, step: float) -> CheckResult:
    """Closed-form connection forms against FD on the gauge-independent entries."""
    coframe = oracle.calabi_coframe(n)
    conn = oracle.connection_forms_fd(coframe, point, step)
    z_radius = calabi_fiber_radius(n, point)
    sample = calabi.connection_sample(calabi.radial_state(z_radius, n))
    size = 2 * n
    worst = 0.0
    for mu in range(size):
        for nu in range(size):
            if sample.gauge_dependent[mu, nu]:
                continue
            fd = conn[2 * mu, 2 * nu] + 1j * conn[2 * mu + 1, 2 * nu]
            worst = max(worst, float(np.abs(fd - sample.forms[mu, nu]).max()))
    return below("finite-difference connection forms (gauge-independent entries)", worst, 1e-6)


def calabi_fiber_radius(n: int, point: np.ndarray) -> float:
    w = point[:n] + 1j * point[n : 2 * n]
    p = point[2 * n : 3 * n] + 1j * point[3 * n :]
    s = 1.0 + float((w.conj() @ w).real)
    herm = (s * np.eye(n) - np.outer(w.conj(), w)) / s**2
    upper = np.linalg.cholesky(herm.T).conj().T
    return float(np.linalg.norm(p @ np.linalg.inv(upper)))


def calabi_suite(n: int, options: SuiteOptions | None = None) -> SuiteReport:
    options = options or SuiteOptions()
    start = time.perf_counter()
    report = SuiteReport("calabi", f"n={n}")
    radii = np.geomspace(1e-3, 3.0, options.grid_points)
    states = [calabi.radial_state(float(r), n) for r in radii]
    closed = max(float(calabi.hk_system_residual(s).max()) for s in states)
    fd = max(float(calabi.hk_system_residual(s, options.fd_step * min(1.0, s.r)).max()) for s in states)
    report.checks += [
        below(f"hyper-Kaehler relations on {len(states)} radii", closed, options.closed_form_tol),
        below("hyper-Kaehler relations with FD derivatives", fd, FD_TOL),
    ]
    sample_radii = np.geomspace(0.05, 3.0, options.curvature_points)
    report.checks += curvature_checks([calabi.curvature(calabi.radial_state(float(r), n)) for r in sample_radii], FrameIndexSet(2 * n, 2 * n))
    hess_radii = np.linspace(0.0, 2.0, options.grid_points + 1)[1:]
    hessians = [calabi.hessian_psi(calabi.radial_state(float(r), n)) for r in hess_radii]
    vertical = {float(h.entries[2 * n]) for h in hessians}
    report.checks += [
        holds("Hess psi positive on (0, 2]", min(h.min_eigenvalue for h in hessians) > 0, min(h.min_eigenvalue for h in hessians), 0.0, "value = smallest eigenvalue"),
        holds("fixed vertical Hessian entry equals 2", vertical == {2.0}, max(abs(v - 2.0) for v in vertical), 0.0),
    ]
    if options.include_oracle and n == 1:
        point = np.array([0.3, -0.2, 0.5, 0.4])
        closed_curv = calabi.curvature(calabi.radial_state(calabi_fiber_radius(n, point), n)).components
        report.checks += oracle_curvature_check(oracle.calabi_coframe(n), point, closed_curv, options.oracle_step)
        report.checks.append(calabi_connection_check(n, point, options.fd_step))
    report.checks += comass_and_estimate_checks(FrameIndexSet(2 * n, 2 * n), options)
    if options.include_certificate:
        report.checks += certificate_checks(certify.certify_calabi(n, options.certify_samples, options.seed))
    report.elapsed = time.perf_counter() - start
    return report


# --- Bryant–Salamon --------------------------------------------------------------


def bryant_salamon_suite(space_id: str, kappa: float = 1.0, options: SuiteOptions | None = None) -> SuiteReport:
    options = options or SuiteOptions()
    start = time.perf_counter()
    space = bryant_salamon.make_space(space_id, kappa)
    report = SuiteReport("bryant_salamon", f"{space.id} kappa={kappa:g}")
    grid = np.linspace(0.0, 5.0, options.grid_points)
    relations = bryant_salamon.relation_checks(space, grid, h_fd=options.fd_step * 0.1)
    report.checks += [
        below(f"ratio law and radial ODE on {grid.size} values of s", relations.max_closed_form, options.closed_form_tol),
        below("(beta/alpha^2)' identity by finite differences", relations.max_fd, FD_TOL),
        holds("alpha' > 0 and beta > 2 s |beta'|", relations.alpha_p_positive and relations.beta_condition),
    ]
    rng = np.random.default_rng(options.seed)
    fibers = [np.sqrt(s) * _unit(rng, space.m) for s in np.geomspace(0.01, 4.0, options.curvature_points)]
    report.checks += curvature_checks([bryant_salamon.curvature(space, y) for y in fibers], space.frame)
    s_values = np.linspace(0.0, 5.0, options.grid_points + 1)[1:]
    hessians = [bryant_salamon.hessian_s(space, np.sqrt(s) * _unit(rng, space.m)) for s in s_values]
    report.checks += [
        holds("Hess s positive on (0, 5]", min(h.min_eigenvalue for h in hessians) > 0, min(h.min_eigenvalue for h in hessians), 0.0, "value = smallest eigenvalue"),
        holds("Hess s above its lower bound", all(h.bound_holds for h in hessians)),
    ]
    residual = bryant_salamon.nabla_AF_residual(space)
    report.checks.append(holds("nabla_A F at the geodesic frame is exactly zero", residual == 0.0, residual, 0.0))
    if options.include_oracle:
        y = np.array([0.5, -0.3, 0.4, 0.2][: space.m])
        point = np.concatenate([np.zeros(space.n), y])
        coframe = oracle.bryant_salamon_coframe(space)
        conn = oracle.connection_forms_fd(coframe, point, options.fd_step)
        expected = bryant_salamon.connection_sample(space, y).forms
        report.checks.append(below("finite-difference connection forms", float(np.abs(conn - expected).max()), 1e-6))
        if space.id == "spinor_S3":
            closed = bryant_salamon.curvature(space, y).components
            report.checks += oracle_curvature_check(coframe, point, closed, options.oracle_step)
    report.checks += comass_and_estimate_checks(space.frame, options)
    if options.include_certificate:
        report.checks += certificate_checks(certify.certify_bryant_salamon(space, options.certify_samples, options.seed))
    report.elapsed = time.perf_counter() - start
    return report


def _unit(rng: np.random.Generator, size: int) -> np.ndarray:
    vec = rng.standard_normal(size)
    return vec / np.linalg.norm(vec)

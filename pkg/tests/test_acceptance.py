"""Acceptance suite: one test per primary criterion, each at its required tolerance.

Every test records a single PASS/FAIL line (printed in the pytest terminal
summary) before asserting, so a failing criterion is still reported.
"""

import time

import numpy as np

from holonomy_lab import bryant_salamon, calabi, certify, mcf, oracle, stenzel, suites
from holonomy_lab.riemann import FrameIndexSet, ricci_contract
from holonomy_lab.suites import CheckResult, below, holds

STENZEL_DIMENSIONS = (2, 3, 4)
CALABI_DIMENSIONS = (1, 2, 3)
GRID_POINTS = 100
CURVATURE_POINTS = 9
RANDOM_SAMPLES = 10_000


def conclude(record_criterion, number: int, title: str, checks: list[CheckResult], elapsed: float, limit: float | None = None) -> None:
    if limit is not None:
        checks = checks + [holds(f"runtime below {limit:g} s", elapsed < limit, elapsed, limit)]
    failed = [check for check in checks if not check.passed]
    status = "PASS" if not failed else "FAIL"
    budget = f", limit {limit:g} s" if limit is not None else ""
    record_criterion(number, f"criterion {number} [{status}] {title} ({len(checks)} checks, {elapsed:.1f} s{budget})")
    assert not failed, "\n".join(check.line() for check in failed)


def fiber_vectors(space, s_values, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for s in s_values:
        y = rng.standard_normal(space.m)
        out.append(np.sqrt(s) * y / np.linalg.norm(y))
    return out


def spaces(kappa=1.0):
    return [bryant_salamon.make_space(space_id, kappa) for space_id in bryant_salamon.SPACE_IDS]


def test_criterion_1_algebraic_identities(record_criterion):
    start = time.perf_counter()
    checks = []
    for n in STENZEL_DIMENSIONS:
        states = [stenzel.radial_state(float(r), n) for r in np.geomspace(1e-2, 5.0, GRID_POINTS)]
        closed = max(max(stenzel.identity_residuals(state).values()) for state in states)
        fd = max(stenzel.rho_derivative_residual(state, 1e-4).max_residual for state in states)
        checks += [below(f"Stenzel n={n} closed-form identities", closed, 1e-10), below(f"Stenzel n={n} FD derivative identities", fd, 1e-6)]
    for n in CALABI_DIMENSIONS:
        states = [calabi.radial_state(float(r), n) for r in np.geomspace(1e-3, 3.0, GRID_POINTS)]
        closed = max(float(calabi.hk_system_residual(state).max()) for state in states)
        fd = max(float(calabi.hk_system_residual(state, 1e-4 * min(1.0, state.r)).max()) for state in states)
        checks += [below(f"Calabi n={n} closed-form relations", closed, 1e-10), below(f"Calabi n={n} FD relations", fd, 1e-6)]
    for space in spaces():
        report = bryant_salamon.relation_checks(space, np.linspace(0.0, 5.0, GRID_POINTS), h_fd=1e-5)
        checks += [below(f"{space.id} closed-form relations", report.max_closed_form, 1e-10), below(f"{space.id} FD relation", report.max_fd, 1e-6)]
    conclude(record_criterion, 1, "algebraic identity suite", checks, time.perf_counter() - start, limit=10.0)


def test_criterion_2_ricci_flatness(record_criterion):
    start = time.perf_counter()
    checks = []
    radii = np.geomspace(0.05, 3.0, CURVATURE_POINTS)
    for n in STENZEL_DIMENSIONS:
        worst = max(float(np.abs(ricci_contract(stenzel.curvature(stenzel.radial_state(float(r), n)))).max()) for r in radii)
        checks.append(below(f"Stenzel n={n} Ricci", worst, 1e-8))
    for n in CALABI_DIMENSIONS:
        worst = max(float(np.abs(ricci_contract(calabi.curvature(calabi.radial_state(float(r), n)))).max()) for r in radii)
        checks.append(below(f"Calabi n={n} Ricci", worst, 1e-8))
    for kappa in (1.0, 2.0):
        for space in spaces(kappa):
            fibers = fiber_vectors(space, np.concatenate([[0.0], np.geomspace(0.01, 4.0, CURVATURE_POINTS - 1)]))
            worst = max(float(np.abs(ricci_contract(bryant_salamon.curvature(space, y))).max()) for y in fibers)
            checks.append(below(f"{space.id} kappa={kappa:g} Ricci", worst, 1e-8))
    conclude(record_criterion, 2, "Ricci-flatness of closed-form curvature", checks, time.perf_counter() - start, limit=30.0)


def test_criterion_3_oracle_equivalence(record_criterion):
    start = time.perf_counter()
    checks = []
    point = np.array([0.3, -0.2, 0.5, 0.4])
    closed = stenzel.curvature(stenzel.radial_state(float(np.linalg.norm(point[2:])), 2)).components
    checks += suites.oracle_curvature_check(oracle.stenzel_coframe(2), point, closed, 1e-3)
    closed = calabi.curvature(calabi.radial_state(suites.calabi_fiber_radius(1, point), 1)).components
    checks += suites.oracle_curvature_check(oracle.calabi_coframe(1), point, closed, 1e-3)
    space = bryant_salamon.make_space("spinor_S3", 1.0)
    y = np.array([0.5, -0.3, 0.4, 0.2])
    closed = bryant_salamon.curvature(space, y).components
    checks += suites.oracle_curvature_check(oracle.bryant_salamon_coframe(space), np.concatenate([np.zeros(3), y]), closed, 1e-3)
    conclude(record_criterion, 3, "closed-form curvature equals finite-difference curvature", checks, time.perf_counter() - start, limit=120.0)


def test_criterion_4_hessian_positivity(record_criterion):
    start = time.perf_counter()
    checks = []
    radii = np.linspace(0.0, 2.0, GRID_POINTS + 1)[1:]
    for name, module, dims, vertical in (("Stenzel", stenzel, STENZEL_DIMENSIONS, lambda n: n), ("Calabi", calabi, CALABI_DIMENSIONS, lambda n: 2 * n)):
        for n in dims:
            hessians = [module.hessian_psi(module.radial_state(float(r), n)) for r in radii]
            smallest = min(h.min_eigenvalue for h in hessians)
            entries = {float(h.entries[vertical(n)]) for h in hessians}
            checks += [
                holds(f"{name} n={n} Hess psi positive on (0, 2]", smallest > 0, smallest),
                holds(f"{name} n={n} fixed vertical entry is exactly 2", entries == {2.0}, max(abs(v - 2.0) for v in entries)),
            ]
    s_values = np.linspace(0.0, 5.0, GRID_POINTS + 1)[1:]
    for space in spaces():
        hessians = [bryant_salamon.hessian_s(space, y) for y in fiber_vectors(space, s_values)]
        smallest = min(h.min_eigenvalue for h in hessians)
        checks += [
            holds(f"{space.id} Hess s positive on (0, 5]", smallest > 0, smallest),
            holds(f"{space.id} Hess s above its lower bound", all(h.bound_holds for h in hessians)),
        ]
    conclude(record_criterion, 4, "Hessian positivity of the squared distance", checks, time.perf_counter() - start)


def test_criterion_5_connection_scalar_sweep(record_criterion):
    start = time.perf_counter()
    checks = []
    for n in STENZEL_DIMENSIONS:
        sweep = stenzel.connection_scalar_sweep(n, np.geomspace(1e-3, 0.999, 200))
        in_band = all(np.all((ratios <= sweep.k_emp) & (ratios >= 1 / sweep.k_emp)) for ratios in sweep.ratios.values())
        checks += [
            holds(f"n={n} A, B, C negative on (0, 1)", sweep.all_negative),
            holds(f"n={n} scaled scalars inside [1/K, K], K = {sweep.k_emp:.4g}", in_band, sweep.k_emp),
            below(f"n={n} small-rho limits", max(sweep.limit_errors.values()), 0.01),
        ]
    conclude(record_criterion, 5, "sign and scaling of the Stenzel connection scalars", checks, time.perf_counter() - start)


FRAMES = {
    "Stenzel n=2 / Calabi n=1": FrameIndexSet(2, 2),
    "Stenzel n=3": FrameIndexSet(3, 3),
    "Calabi n=2 / neg_spinor_S4": FrameIndexSet(4, 4),
    "spinor_S3": FrameIndexSet(3, 4),
    "asd_S4 / asd_CP2": FrameIndexSet(4, 3),
}


def test_criterion_6_comass_and_linear_estimates(record_criterion):
    start = time.perf_counter()
    options = suites.SuiteOptions(planes=RANDOM_SAMPLES, estimate_planes=RANDOM_SAMPLES)
    checks = []
    for label, frame in FRAMES.items():
        for check in suites.comass_and_estimate_checks(frame, options):
            check.name = f"{label}: {check.name}"
            checks.append(check)
    conclude(record_criterion, 6, f"comass one and linear estimates on {RANDOM_SAMPLES} planes per frame", checks, time.perf_counter() - start)


def test_criterion_7_derivative_bounds(record_criterion):
    start = time.perf_counter()
    certificates = [certify.certify_stenzel(n, RANDOM_SAMPLES) for n in (2, 3)]
    certificates += [certify.certify_calabi(n, RANDOM_SAMPLES) for n in (1, 2)]
    certificates += [certify.certify_bryant_salamon(space, RANDOM_SAMPLES) for space in spaces()]
    checks = []
    for cert in certificates:
        for check in suites.certificate_checks(cert):
            check.name = f"{cert.family} {cert.label}: {check.name}"
            checks.append(check)
    constants = ", ".join(f"{cert.family} {cert.label}: {cert.k_emp:.3g}" for cert in certificates)
    conclude(record_criterion, 7, f"gradient and trace bounds, K_emp per family [{constants}]", checks, time.perf_counter() - start)


def test_criterion_8_bundle_curvature_is_parallel(record_criterion):
    start = time.perf_counter()
    checks = []
    for scale in (1.0, 2.0):
        for space in spaces(scale):
            residual = bryant_salamon.nabla_AF_residual(space)
            checks.append(holds(f"{space.id} kappa={scale:g} residual is exactly zero", residual == 0.0, residual))
    conclude(record_criterion, 8, "covariant derivative of the bundle curvature vanishes", checks, time.perf_counter() - start)


def test_criterion_9_flow_stability(record_criterion):
    start = time.perf_counter()
    config = mcf.FlowConfig(eps=0.05, mesh_level=4)
    report = mcf.run_stability_experiment(config)
    flow_elapsed = time.perf_counter() - start
    psi = np.array([row[2] for row in report.rows])
    checks = [
        holds("flow completed without failure", report.failure is None, detail=report.failure or ""),
        holds("psi_max non-increasing (1e-8 per step)", report.psi_monotone, float(np.max(np.diff(psi), initial=0.0)), config.monotone_tol),
        holds("min(*Omega - K0 psi) non-decreasing in the admissible regime", report.stability_monotone),
        below(f"terminal psi_max at t = {config.t_end:g}", psi[-1], config.psi_threshold),
        holds("exponential decay fit R^2 > 0.99", report.fit is not None and report.fit.r_squared > 0.99, report.fit.r_squared if report.fit else 0.0, 0.99, f"rate {report.fit.rate:.4g}" if report.fit else ""),
        holds("flow runtime below 600 s", flow_elapsed < 600.0, flow_elapsed, 600.0),
    ]
    sphere = mcf.shrinking_sphere_validation(level=3, t_end=0.1)
    checks += [
        below("Euclidean shrinking sphere radius (relative)", sphere.max_relative_error, 0.01),
        below("Euclidean sphere |H| = 2/R (relative)", sphere.initial_mean_curvature_error, 0.01),
    ]
    conclude(record_criterion, 9, f"mean curvature flow stability, level {config.mesh_level}, eps {config.eps:g}", checks, time.perf_counter() - start)

"""Command line entry point: ``verify``, ``sweep``, ``flow`` and ``report``.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage or configuration
error, 3 numerical failure.  ``HOLONOMY_LAB_THREADS`` caps the BLAS/OpenMP
thread pools; it is applied before numpy is imported.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import DomainError, FlowError, NumericError, StructureError

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
THREAD_VARIABLES = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS")
FAMILIES = {"stenzel": "stenzel", "calabi": "calabi", "bs": "bryant_salamon", "bryant_salamon": "bryant_salamon", "euclidean": "euclidean"}
SWEEP_QUANTITIES = {"abc": ("stenzel",), "hessian": ("stenzel", "calabi", "bryant_salamon"), "relation": ("bryant_salamon",)}
CSV_HELP = """CSV columns:
  sweep abc       rho, r, A, B, C, A_over_rho, C_over_rho, B_times_rho
  sweep hessian   r (or s), min_eigenvalue, then one column per frame direction
  sweep relation  s, ratio_residual, derivative_residual, ode_residual
  flow            step, t, psi_max, star_omega_min, stability_min, A2_max, volume
Config files hold key=value lines (keys as the long flags, '-' or '_'); flags override them."""

CONFIG_KEYS = {
    "command": str,
    "family": str,
    "n": int,
    "space": str,
    "kappa": float,
    "grid": str,
    "tol": float,
    "fd_step": float,
    "mesh_level": int,
    "eps": float,
    "k0": float,
    "dt": float,
    "t_end": float,
    "seed": int,
    "out": str,
    "mode": str,
    "samples": int,
    "quantity": str,
    "quick": bool,
}


class UsageError(Exception):
    """Invalid command line or configuration."""


def apply_thread_cap(environ=os.environ) -> None:
    """Copy ``HOLONOMY_LAB_THREADS`` into the thread variables of the numeric libraries."""
    cap = environ.get("HOLONOMY_LAB_THREADS")
    if cap is None:
        return
    if not cap.isdigit() or int(cap) < 1:
        raise UsageError(f"HOLONOMY_LAB_THREADS must be a positive integer, got {cap!r}")
    for name in THREAD_VARIABLES:
        environ[name] = cap


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_config(path: str) -> dict:
    """Parse a ``key=value`` file; blank lines and ``#`` comments are skipped.

    Raises
    ------
    UsageError
        On unreadable files, malformed lines, unknown keys or bad values.
    """
    try:
        with open(path) as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    config = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{number}: unknown key {key!r}")
        kind = CONFIG_KEYS[key]
        try:
            config[key] = _parse_bool(value) if kind is bool else kind(value)
        except ValueError as exc:
            raise UsageError(f"{path}:{number}: bad value for {key}: {value!r}") from exc
    return config


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file; flags given on the command line win")
    parser.add_argument("--family", help="stenzel, calabi, bs (Bryant-Salamon) or euclidean (flow validation)")
    parser.add_argument("--n", type=int, help="Stenzel/Calabi dimension parameter")
    parser.add_argument("--space", help="spinor_S3, asd_S4, asd_CP2 or neg_spinor_S4")
    parser.add_argument("--kappa", type=float, help="base curvature scale (default 1)")
    parser.add_argument("--grid", help="grid size N or lo:hi:N")
    parser.add_argument("--tol", type=float, help="closed-form residual tolerance (default 1e-10)")
    parser.add_argument("--fd-step", type=float, help="finite-difference step (default 1e-4)")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--samples", type=int, help="random samples per certification set")
    parser.add_argument("--out", help="output path (CSV or JSON; flow uses it as a prefix)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holonomy-lab", description=__doc__, epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify", help="run a family's invariant suite", epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    verify.add_argument("family_arg", nargs="?", metavar="FAMILY")
    verify.add_argument("--quick", action="store_true", default=None, help="smaller samples, skip the empirical constant")
    _add_common(verify)
    sweep = sub.add_parser("sweep", help="emit a quantity-vs-parameter CSV", epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sweep.add_argument("family_arg", nargs="?", metavar="FAMILY")
    sweep.add_argument("quantity_arg", nargs="?", metavar="QUANTITY", help="abc, hessian or relation")
    _add_common(sweep)
    flow = sub.add_parser("flow", help="run the mean curvature flow stability experiment", epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_common(flow)
    flow.add_argument("--mesh-level", type=int, help="icosphere subdivision level (default 4)")
    flow.add_argument("--eps", type=float, help="initial section amplitude (default 0.05)")
    flow.add_argument("--k0", type=float, help="stability functional constant (default 10)")
    flow.add_argument("--dt", type=float, help="time step (default 0.9 * CFL limit)")
    flow.add_argument("--t-end", type=float, help="final time (default 0.8)")
    flow.add_argument("--mode", help="uniform_frame_field, low_harmonic or random_seeded")
    report = sub.add_parser("report", help="summarise a JSON report written by verify or flow")
    report.add_argument("path")
    return parser


def _merge(args: argparse.Namespace) -> dict:
    settings = read_config(args.config) if getattr(args, "config", None) else {}
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        if key.endswith("_arg"):
            key = key[: -len("_arg")]
        settings[key] = value
    return settings


def _family(settings: dict) -> str:
    name = settings.get("family")
    if name is None:
        raise UsageError("a family is required (stenzel, calabi or bs)")
    key = name.lower()
    if key not in FAMILIES:
        raise UsageError(f"unknown family {name!r}")
    return FAMILIES[key]


def parse_grid(text, default_range: tuple[float, float], default_count: int = 100):
    """``N`` or ``lo:hi:N`` to ``(lo, hi, N)``."""
    import numpy as np

    if text is None:
        return np.linspace(default_range[0], default_range[1], default_count)
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            lo, hi, count = default_range[0], default_range[1], int(parts[0])
        elif len(parts) == 3:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        else:
            raise ValueError
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}; expected N or lo:hi:N") from exc
    if count < 1 or not hi > lo:
        raise UsageError(f"bad grid {text!r}; need N >= 1 and hi > lo")
    return np.linspace(lo, hi, count)


def _write_text(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as handle:
            handle.write(text)


# --- commands -----------------------------------------------------------------------


def run_verify(settings: dict) -> int:
    from . import suites

    family = _family(settings)
    options = suites.SuiteOptions(seed=settings.get("seed", 0))
    if "fd_step" in settings:
        options.fd_step = settings["fd_step"]
    if "samples" in settings:
        options.certify_samples = settings["samples"]
    if "grid" in settings:
        options.grid_points = int(parse_grid(settings["grid"], (0.0, 1.0)).size)
    if "tol" in settings:
        options.closed_form_tol = settings["tol"]
    if settings.get("quick"):
        options.planes, options.estimate_planes, options.include_certificate = 2000, 200, False
    if family == "stenzel":
        report = suites.stenzel_suite(settings.get("n", 2), options)
    elif family == "calabi":
        report = suites.calabi_suite(settings.get("n", 1), options)
    elif family == "bryant_salamon":
        if "space" not in settings:
            raise UsageError("--space is required for the Bryant-Salamon family")
        report = suites.bryant_salamon_suite(settings["space"], settings.get("kappa", 1.0), options)
    else:
        raise UsageError("verify supports stenzel, calabi and bs")
    print("\n".join(report.lines()))
    print(f"{'PASS' if report.passed else 'FAIL'} ({report.elapsed:.1f} s)")
    if "out" in settings:
        payload = {
            "kind": "verify",
            "family": report.family,
            "label": report.label,
            "passed": report.passed,
            "config": settings,
            "checks": [vars(check) for check in report.checks],
        }
        with open(settings["out"], "w") as handle:
            json.dump(payload, handle, indent=2)
    return EXIT_PASS if report.passed else EXIT_FAIL


def run_sweep(settings: dict) -> int:
    from . import sweeps

    family = _family(settings)
    quantity = settings.get("quantity")
    if quantity not in SWEEP_QUANTITIES:
        raise UsageError(f"unknown quantity {quantity!r}; expected one of {', '.join(SWEEP_QUANTITIES)}")
    if family not in SWEEP_QUANTITIES[quantity]:
        raise UsageError(f"quantity {quantity!r} is not defined for family {family}")
    grid_text = settings.get("grid")
    if quantity == "abc":
        table = sweeps.abc_sweep(settings.get("n", 2), parse_grid(grid_text, (1e-3, 0.999), 200))
    elif quantity == "relation":
        table = sweeps.relation_sweep(settings["space"] if "space" in settings else _missing("space"), settings.get("kappa", 1.0), parse_grid(grid_text, (0.0, 5.0), 200))
    elif family == "bryant_salamon":
        table = sweeps.bs_hessian_sweep(settings["space"] if "space" in settings else _missing("space"), settings.get("kappa", 1.0), parse_grid(grid_text, (0.025, 5.0), 200), settings.get("seed", 0))
    else:
        default_n = 2 if family == "stenzel" else 1
        table = sweeps.hessian_sweep(family, settings.get("n", default_n), parse_grid(grid_text, (0.01, 2.0), 200))
    _write_text(table.to_csv(), settings.get("out"))
    return EXIT_PASS if table.passed else EXIT_FAIL


def _missing(key: str):
    raise UsageError(f"--{key} is required for this sweep")


def run_flow(settings: dict) -> int:
    from . import mcf

    family = settings.get("family", "stenzel").lower()
    if family == "euclidean":
        result = mcf.shrinking_sphere_validation(settings.get("mesh_level", 3), t_end=settings.get("t_end", 0.1))
        passed = result.max_relative_error < 0.01 and result.initial_mean_curvature_error < 0.01
        print(f"shrinking sphere: radius error {result.max_relative_error:.3e}, |H| error {result.initial_mean_curvature_error:.3e}")
        return EXIT_PASS if passed else EXIT_FAIL
    if family != "stenzel":
        raise UsageError("flow runs in the Stenzel ambient (family stenzel) or the euclidean validation mode")
    if settings.get("n", 2) != 2:
        raise UsageError("the flow is implemented for n = 2 only")
    config = mcf.FlowConfig()
    for key in ("eps", "k0", "mesh_level", "dt", "t_end", "mode", "seed"):
        if key in settings:
            setattr(config, key, settings[key])
    try:
        report = mcf.run_stability_experiment(config)
    except mcf.NotGraphicalError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_USAGE
    prefix = settings.get("out", "flow")
    mcf.write_csv(report, prefix + ".csv")
    payload = report.to_json()
    payload["kind"] = "flow"
    with open(prefix + ".json", "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
    summary = payload["terminal"]
    fit = payload["decay_fit"]
    print(f"steps {payload['steps']}, terminal psi_max {summary['psi_max']:.3e}, converged {report.converged}")
    if fit:
        print(f"decay rate {fit['rate']:.4g}, R^2 {fit['r_squared']:.4f}")
    if report.failure:
        print(f"flow failure: {report.failure}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_PASS if report.verdict else EXIT_FAIL


def run_report(path: str) -> int:
    try:
        with open(path) as handle:
            payload = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read report {path}: {exc}") from exc
    kind = payload.get("kind")
    if kind == "verify":
        for check in payload["checks"]:
            print(f"[{'PASS' if check['passed'] else 'FAIL'}] {check['name']}: {check['value']:.3e}")
        return EXIT_PASS if payload["passed"] else EXIT_FAIL
    if kind == "flow":
        for key in ("verdict", "converged", "psi_monotone", "stability_monotone", "volume_monotone", "steps", "failure"):
            print(f"{key}: {payload.get(key)}")
        if payload.get("decay_fit"):
            print(f"decay_rate: {payload['decay_fit']['rate']:.6g}  r_squared: {payload['decay_fit']['r_squared']:.6f}")
        return EXIT_PASS if payload["verdict"] else EXIT_FAIL
    raise UsageError(f"{path} is not a verify or flow report")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    try:
        apply_thread_cap()
        if args.command == "report":
            return run_report(args.path)
        settings = _merge(args)
        runner = {"verify": run_verify, "sweep": run_sweep, "flow": run_flow}[args.command]
        return runner(settings)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StructureError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, FlowError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

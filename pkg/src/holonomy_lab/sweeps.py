"""Quantity-vs-parameter tables for the command line ``sweep`` command."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import bryant_salamon, calabi, stenzel
from .errors import DomainError


@dataclass
class SweepTable:
    """Column names, numeric rows and the sweep's own pass criterion."""

    columns: tuple[str, ...]
    rows: np.ndarray
    passed: bool

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([repr(float(v)) for v in row])
        return buffer.getvalue()


def abc_sweep(n: int, rho_grid) -> SweepTable:
    """Connection scalars ``A, B, C`` and their scaled ratios against ``rho``; passes when all are negative."""
    report = stenzel.connection_scalar_sweep(n, rho_grid)
    ratios = report.ratios
    rows = np.column_stack([report.rho, report.r, report.A, report.B, report.C, ratios["A_over_rho"], ratios["C_over_rho"], ratios["B_times_rho"]])
    columns = ("rho", "r", "A", "B", "C", "A_over_rho", "C_over_rho", "B_times_rho")
    return SweepTable(columns, rows, report.all_negative)


def hessian_sweep(family: str, n: int, radii) -> SweepTable:
    """Diagonal Hessian of ``psi`` against the fiber radius; passes when every row is positive."""
    module = stenzel if family == "stenzel" else calabi
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise DomainError("the Hessian sweep needs r > 0")
    hessians = [module.hessian_psi(module.radial_state(float(r), n)) for r in radii]
    entries = np.array([h.entries for h in hessians])
    labels = tuple(label.replace(" ", "_") for label in hessians[0].labels)
    rows = np.column_stack([radii, entries.min(axis=1), entries])
    return SweepTable(("r", "min_eigenvalue") + labels, rows, bool(np.all(entries.min(axis=1) > 0)))


def bs_hessian_sweep(space_id: str, kappa: float, s_grid, seed: int = 0) -> SweepTable:
    """Eigenvalues of ``Hess s`` along random fiber directions; passes when positive and above the bound."""
    space = bryant_salamon.make_space(space_id, kappa)
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(s_grid <= 0):
        raise DomainError("the Hessian sweep needs s > 0")
    rng = np.random.default_rng(seed)
    rows, ok = [], True
    for s in s_grid:
        direction = rng.standard_normal(space.m)
        hess = bryant_salamon.hessian_s(space, np.sqrt(s) * direction / np.linalg.norm(direction))
        eigen = np.linalg.eigvalsh(hess.matrix)
        ok &= hess.min_eigenvalue > 0 and hess.bound_holds
        rows.append([s, hess.min_eigenvalue, hess.bound_horizontal, hess.bound_vertical, float(hess.bound_holds), *eigen])
    columns = ("s", "min_eigenvalue", "bound_horizontal", "bound_vertical", "bound_holds") + tuple(f"eig_{k + 1}" for k in range(space.n + space.m))
    return SweepTable(columns, np.array(rows), bool(ok))


def relation_sweep(space_id: str, kappa: float, s_grid, closed_form_tol: float = 1e-12) -> SweepTable:
    """Ratio-law, derivative and ODE residuals; passes when the closed-form columns stay below ``closed_form_tol``."""
    space = bryant_salamon.make_space(space_id, kappa)
    report = bryant_salamon.relation_checks(space, s_grid)
    rows = np.column_stack([report.s, report.ratio_residual, report.derivative_residual, report.ode_residual])
    return SweepTable(("s", "ratio_residual", "derivative_residual", "ode_residual"), rows, report.max_closed_form < closed_form_tol)

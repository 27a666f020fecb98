"""Mean curvature flow of sections of the Stenzel space T*S^2 on a triangulated sphere.

Vertices live in one of two stereographic charts of the base sphere together
with the fiber components ``y`` in the chart's orthonormal base coframe, so a
vertex is a point ``(x1, x2, y1, y2)``.  The mean curvature vector at a vertex
is ``Delta F + Gamma(P)``, where ``Delta`` is the cotangent Laplacian of the
one-ring measured with the ambient metric at the vertex and ``P`` is the
tangential projector; only its normal part drives the flow.  A flat ambient
of any dimension is supported for validation against the shrinking sphere.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, FlowError, NotGraphicalError
from .oracle import christoffel_fd_batch

CSV_COLUMNS = ("step", "t", "psi_max", "star_omega_min", "stability_min", "A2_max", "volume")
CHART_SWITCH_RADIUS = 1.2
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(40)


# --- mesh ---------------------------------------------------------------------


def icosphere(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit icosphere with outward-oriented faces after ``level`` subdivisions."""
    if level < 0:
        raise DomainError("mesh level must be non-negative")
    phi = (1 + 5**0.5) / 2
    verts = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0), (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi), (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]  # fmt: skip
    points = [np.asarray(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                mid = points[i] + points[j]
                points.append(mid / np.linalg.norm(mid))
                cache[key] = len(points) - 1
            return cache[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = refined
    vertices = np.array(points)
    faces_arr = np.array(faces, dtype=np.int64)
    normal = np.cross(vertices[faces_arr[:, 1]] - vertices[faces_arr[:, 0]], vertices[faces_arr[:, 2]] - vertices[faces_arr[:, 0]])
    inward = np.einsum("fi,fi->f", normal, vertices[faces_arr[:, 0]]) < 0
    faces_arr[inward] = faces_arr[inward][:, [0, 2, 1]]
    return vertices, faces_arr


@dataclass
class SurfaceMesh:
    """Vertex positions in chart coordinates, oriented faces and per-vertex chart ids."""

    positions: np.ndarray
    faces: np.ndarray
    charts: np.ndarray

    def copy(self) -> SurfaceMesh:
        return SurfaceMesh(self.positions.copy(), self.faces.copy(), self.charts.copy())


# --- stereographic atlas on S^2 ------------------------------------------------

_FLIP = np.array([1.0, -1.0])


def sphere_to_chart(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Chart 0 projects from the south pole, chart 1 is its holomorphic inversion."""
    charts = (points[:, 2] < 0).astype(np.int64)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(charts[:, None] == 0, points[:, :2] / (1 + points[:, 2:3]), points[:, :2] * _FLIP / (1 - points[:, 2:3]))
    return x, charts


def chart_frame(x: np.ndarray, charts: np.ndarray) -> np.ndarray:
    """Orthonormal frame vectors ``e^{-f} d/dx_i`` of each chart as vectors in R^3, shape (V, 2, 3)."""
    q = 1 + np.einsum("vi,vi->v", x, x)
    sign = np.where(charts == 0, 1.0, -1.0)
    out = np.empty((x.shape[0], 2, 3))
    for i in range(2):
        # derivative of the inverse projection, times e^{-f} = q / 2
        direction = np.zeros((x.shape[0], 3))
        direction[:, i] = 2.0
        direction[:, 2] = -2.0 * sign * x[:, i]
        if i == 1:
            direction[:, 1] *= np.where(charts == 0, 1.0, -1.0)
        point = np.column_stack([2 * x[:, 0], 2 * x[:, 1] * np.where(charts == 0, 1.0, -1.0), sign * (1 - np.einsum("vi,vi->v", x, x))])
        deriv = direction / q[:, None] - point * (2 * x[:, i] / q**2)[:, None]
        out[:, i] = deriv * (q / 2)[:, None]
    return out


def chart_to_sphere(x: np.ndarray, charts: np.ndarray) -> np.ndarray:
    q = 1 + np.einsum("vi,vi->v", x, x)
    sign = np.where(charts == 0, 1.0, -1.0)
    return np.column_stack([2 * x[:, 0], 2 * x[:, 1] * sign, sign * (1 - (q - 1))]) / q[:, None]


# --- ambient spaces --------------------------------------------------------------

_SINH_OVER_R = np.array([1.0 / math.factorial(2 * k + 1) for k in range(6)])
_TANH_OVER_R = np.array([1.0, -1.0 / 3, 2.0 / 15, -17.0 / 315, 62.0 / 2835, -1382.0 / 155925])
_COSH = np.array([1.0 / math.factorial(2 * k) for k in range(6)])
# Taylor coefficients in r^2 of b^2/r^2 and (c^2 - b^2/r^2)/r^2 for the n = 2 Stenzel metric
_K1_SERIES = np.polynomial.polynomial.polymul(_SINH_OVER_R, _TANH_OVER_R)[:6]
_K2_SERIES = (_COSH - _K1_SERIES)[1:6]
_SERIES_RADIUS = 0.1


def _fiber_coefficients(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``b^2/r^2`` and ``(c^2 - b^2/r^2)/r^2`` with a series near ``r = 0``."""
    small = r < _SERIES_RADIUS
    safe = np.where(small, 1.0, r)
    k1 = np.sinh(safe) * np.tanh(safe) / safe**2
    k2 = (np.cosh(safe) - k1) / safe**2
    r2 = r**2
    k1 = np.where(small, np.polynomial.polynomial.polyval(r2, _K1_SERIES), k1)
    k2 = np.where(small, np.polynomial.polynomial.polyval(r2, _K2_SERIES), k2)
    return k1, k2


def stenzel2_rho(r) -> np.ndarray:
    """``rho = int_0^r sqrt(cosh u) du`` (40-point Gauss–Legendre; exact to rounding for r <= 3)."""
    r = np.asarray(r, dtype=float)
    nodes = 0.5 * r[..., None] * (_GAUSS_NODES + 1)
    return 0.5 * r * np.sum(_GAUSS_WEIGHTS * np.sqrt(np.cosh(nodes)), axis=-1)


class StenzelSurfaceAmbient:
    """The Stenzel metric on T*S^2 in the two-chart atlas.

    With ``h' = 4 sinh r`` the coefficients are ``a^2 = c^2 = cosh r`` and
    ``b^2 = sinh r tanh r``, so the metric is gauge free:
    ``cosh r |theta|^2 + Dy^T (b^2/r^2 + (c^2 - b^2/r^2) y y^T / r^2) Dy``.
    """

    dim = 4
    has_charts = True

    def metric(self, points: np.ndarray) -> np.ndarray:
        x, y = points[:, :2], points[:, 2:]
        q = 1 + np.einsum("vi,vi->v", x, x)
        conformal = 2 / q
        grad = -2 * x / q[:, None]
        r = np.linalg.norm(y, axis=1)
        k1, k2 = _fiber_coefficients(r)
        count = points.shape[0]
        dy = np.zeros((count, 2, 4))
        dy[:, :, :2] = -grad[:, :, None] * y[:, None, :] + _dot(y, grad)[:, None, None] * np.eye(2)
        dy[:, 0, 2] = dy[:, 1, 3] = 1.0
        fiber = k1[:, None, None] * np.eye(2) + k2[:, None, None] * (y[:, :, None] * y[:, None, :])
        out = np.swapaxes(dy, 1, 2) @ (fiber @ dy)
        base = np.cosh(r) * conformal**2
        out[:, 0, 0] += base
        out[:, 1, 1] += base
        return out

    def christoffel(self, points: np.ndarray) -> np.ndarray:
        return christoffel_fd_batch(self.metric, points)

    def transition(self, points: np.ndarray) -> np.ndarray:
        """Change of chart; the map is an involution."""
        x, y = points[:, :2], points[:, 2:]
        norm2 = np.einsum("vi,vi->v", x, x)
        unit = x / np.sqrt(norm2)[:, None]
        new_x = x * _FLIP / norm2[:, None]
        reflect = y - 2 * np.einsum("vi,vi->v", unit, y)[:, None] * unit
        return np.column_stack([new_x, reflect * _FLIP])

    def chart_radius(self, points: np.ndarray) -> np.ndarray:
        return np.linalg.norm(points[:, :2], axis=1)

    def psi(self, points: np.ndarray) -> np.ndarray:
        return stenzel2_rho(np.linalg.norm(points[:, 2:], axis=1)) ** 2

    def rho(self, points: np.ndarray) -> np.ndarray:
        return stenzel2_rho(np.linalg.norm(points[:, 2:], axis=1))

    def star_omega(self, points: np.ndarray, tangent: np.ndarray) -> np.ndarray:
        """``Omega = cosh(r) e^{2f} dx1 ^ dx2`` on g-orthonormal tangent pairs (V, 2, 4)."""
        q = 1 + np.einsum("vi,vi->v", points[:, :2], points[:, :2])
        density = np.cosh(np.linalg.norm(points[:, 2:], axis=1)) * (2 / q) ** 2
        return density * (tangent[:, 0, 0] * tangent[:, 1, 1] - tangent[:, 0, 1] * tangent[:, 1, 0])


class EuclideanAmbient:
    """Flat ambient ``R^dim`` in a single chart (validation mode)."""

    has_charts = False

    def __init__(self, dim: int = 3):
        self.dim = dim

    def metric(self, points: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.eye(self.dim), (points.shape[0], self.dim, self.dim))

    def christoffel(self, points: np.ndarray) -> np.ndarray | None:
        return None


# --- discrete geometry -------------------------------------------------------------


@dataclass
class VertexGeometry:
    """Per-vertex discrete quantities of a mesh state."""

    mean_curvature: np.ndarray  # (V, D) normal part
    tangent: np.ndarray  # (V, 2, D) g-orthonormal, oriented
    area: np.ndarray  # (V,)
    volume: float
    a2_proxy: np.ndarray  # (V,)
    min_edge: float


def _corners(faces: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return faces.reshape(-1), faces[:, [1, 2, 0]].reshape(-1), faces[:, [2, 0, 1]].reshape(-1)


def _dot(u, w):
    return np.sum(u * w, axis=-1)


def _scatter_add(index: np.ndarray, values: np.ndarray, count: int) -> np.ndarray:
    return np.stack([np.bincount(index, weights=values[:, k], minlength=count) for k in range(values.shape[1])], axis=1)


def vertex_geometry(ambient, mesh: SurfaceMesh) -> VertexGeometry:
    """Cotangent Laplacian, tangent planes and normal mean curvature of every vertex."""
    pos, charts = mesh.positions, mesh.charts
    centre, nxt, prv = _corners(mesh.faces)
    count, dim = pos.shape
    metric = np.ascontiguousarray(ambient.metric(pos))
    p_centre, p_next, p_prev = pos[centre], pos[nxt].copy(), pos[prv].copy()
    if ambient.has_charts:
        for other, idx in ((p_next, nxt), (p_prev, prv)):
            cross = charts[idx] != charts[centre]
            if np.any(cross):
                other[cross] = ambient.transition(other[cross])
    # edges in g-orthonormal coordinates at the corner vertex: w = C^T e with g = C C^T
    chol = np.linalg.cholesky(metric)
    chol_t = np.swapaxes(chol, 1, 2)
    chol_t_c = chol_t[centre]
    w1 = (chol_t_c @ (p_next - p_centre)[..., None])[..., 0]
    w2 = (chol_t_c @ (p_prev - p_centre)[..., None])[..., 0]
    w3 = w2 - w1
    n11, n22, n33 = _dot(w1, w1), _dot(w2, w2), _dot(w3, w3)
    d12, d13, d23 = _dot(w1, w2), _dot(w1, w3), _dot(w2, w3)
    twice_area = np.sqrt(np.maximum(n11 * n22 - d12**2, 0.0))
    if np.any(twice_area < 2e-12):
        raise FlowError("degenerate triangle (area < 1e-12); remeshing required")
    cot_next = -d13 / twice_area
    cot_prev = d23 / twice_area
    contrib = 0.5 * (cot_prev[:, None] * w1 + cot_next[:, None] * w2)
    lap_w = _scatter_add(centre, contrib, count)
    # mixed Voronoi area
    face_area = 0.5 * twice_area
    corner_area = (n11 * cot_prev + n22 * cot_next) / 8.0
    obtuse_here = d12 < 0
    obtuse_other = (cot_next < 0) | (cot_prev < 0)
    corner_area = np.where(obtuse_here, 0.5 * face_area, np.where(obtuse_other, 0.25 * face_area, corner_area))
    area = np.bincount(centre, weights=corner_area, minlength=count)
    lap_w /= area[:, None]

    wedge = w1[:, :, None] * w2[:, None, :]
    bivector = _scatter_add(centre, (wedge - np.swapaxes(wedge, 1, 2)).reshape(-1, dim * dim), count).reshape(count, dim, dim)
    left, _, _ = np.linalg.svd(bivector)
    frame = left[:, :, :2].copy()
    flip = _dot(frame[:, :, 0], (bivector @ frame[:, :, 1:2])[..., 0]) < 0
    frame[flip, :, 1] *= -1.0
    # coordinate vectors t = C^{-T} u
    tangent = np.swapaxes(np.linalg.solve(chol_t, frame), 1, 2)

    velocity_w = lap_w
    gamma = ambient.christoffel(pos)
    if gamma is not None:
        projector = np.swapaxes(tangent, 1, 2) @ tangent
        trace = (gamma.reshape(count, dim, dim * dim) @ projector.reshape(count, dim * dim, 1))[..., 0]
        velocity_w = velocity_w + (chol_t @ trace[..., None])[..., 0]
    normal_w = velocity_w - (frame @ (np.swapaxes(frame, 1, 2) @ velocity_w[..., None]))[..., 0]
    normal = np.linalg.solve(chol_t, normal_w[..., None])[..., 0]

    frame_c = frame[centre]
    edge_normal = w1 - (frame_c @ (np.swapaxes(frame_c, 1, 2) @ w1[..., None]))[..., 0]
    curvature = 2 * np.sqrt(_dot(edge_normal, edge_normal)) / n11
    a2 = np.zeros(count)
    np.maximum.at(a2, centre, curvature**2)
    return VertexGeometry(normal, tangent, area, float(np.sum(twice_area) / 6.0), a2, float(np.sqrt(n11.min())))


# --- initial sections ----------------------------------------------------------------

INITIAL_MODES = ("uniform_frame_field", "low_harmonic", "random_seeded")


def _tangent_project(points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return vectors - np.einsum("vi,vi->v", vectors, points)[:, None] * points


def _polynomial_gradient(points: np.ndarray, coefficients: dict) -> np.ndarray:
    """Ambient gradient of ``sum c * p^alpha`` at ``points``."""
    out = np.zeros_like(points)
    for alpha, coef in coefficients.items():
        for axis in range(3):
            if alpha[axis] == 0:
                continue
            reduced = list(alpha)
            reduced[axis] -= 1
            out[:, axis] += coef * alpha[axis] * np.prod(points ** np.array(reduced), axis=1)
    return out


def section_field(points: np.ndarray, mode: str, seed: int = 0) -> np.ndarray:
    """Unit-sup tangent vector field on S^2 used as the shape of the initial section."""
    if mode == "uniform_frame_field":
        field_ = _tangent_project(points, np.broadcast_to(np.array([0.0, 0.0, 1.0]), points.shape))
    elif mode == "low_harmonic":
        grad = _tangent_project(points, _polynomial_gradient(points, {(1, 1, 0): 1.0}))
        co_grad = np.cross(points, _tangent_project(points, _polynomial_gradient(points, {(0, 0, 1): 1.0})))
        field_ = grad + 0.5 * co_grad
    elif mode == "random_seeded":
        rng = np.random.default_rng(seed)
        monomials = [(i, j, k) for i in range(4) for j in range(4) for k in range(4) if 1 <= i + j + k <= 3]
        first = {alpha: rng.standard_normal() for alpha in monomials}
        second = {alpha: rng.standard_normal() for alpha in monomials}
        field_ = _tangent_project(points, _polynomial_gradient(points, first)) + np.cross(points, _tangent_project(points, _polynomial_gradient(points, second)))
    else:
        raise DomainError(f"unknown initial mode {mode!r}; expected one of {', '.join(INITIAL_MODES)}")
    peak = np.linalg.norm(field_, axis=1).max()
    return field_ / peak


@dataclass
class InitialReport:
    """Measured closeness to the zero section."""

    star_omega_min: float
    rho_max: float
    hypothesis_margin: float  # sup over vertices of rho + 1 - *Omega


def initial_section(level: int, eps: float, mode: str = "low_harmonic", seed: int = 0, min_star_omega: float = 0.5) -> tuple[SurfaceMesh, InitialReport]:
    """Graph of ``eps`` times a smooth section over the icosphere.

    Raises
    ------
    NotGraphicalError
        If the measured minimum of ``*Omega`` is not above ``min_star_omega``.
    """
    if eps < 0:
        raise DomainError("eps must be non-negative")
    points, faces = icosphere(level)
    x, charts = sphere_to_chart(points)
    frame = chart_frame(x, charts)
    vectors = eps * section_field(points, mode, seed)
    y = np.einsum("vij,vj->vi", frame, vectors)
    mesh = SurfaceMesh(np.column_stack([x, y]), faces, charts)
    ambient = StenzelSurfaceAmbient()
    geometry = vertex_geometry(ambient, mesh)
    star = ambient.star_omega(mesh.positions, geometry.tangent)
    rho = ambient.rho(mesh.positions)
    report = InitialReport(float(star.min()), float(rho.max()), float(np.max(rho + 1 - star)))
    if not report.star_omega_min > min_star_omega:
        raise NotGraphicalError(f"initial section rejected: min *Omega = {report.star_omega_min:.4f} <= {min_star_omega}")
    return mesh, report


# --- time stepping --------------------------------------------------------------------


@dataclass
class Monitors:
    psi_max: float
    star_omega_min: float
    stability_min: float
    a2_max: float
    volume: float


def _switch_charts(ambient, mesh: SurfaceMesh) -> None:
    if not ambient.has_charts:
        return
    far = ambient.chart_radius(mesh.positions) > CHART_SWITCH_RADIUS
    if np.any(far):
        mesh.positions[far] = ambient.transition(mesh.positions[far])
        mesh.charts[far] = 1 - mesh.charts[far]


def step(ambient, mesh: SurfaceMesh, dt: float, cfl: float = 0.2, geometry: VertexGeometry | None = None) -> SurfaceMesh:
    """One explicit RK4 step of the normal mean curvature velocity.

    Raises
    ------
    FlowError
        If ``dt`` exceeds ``cfl * h_min^2``.
    """
    first = vertex_geometry(ambient, mesh) if geometry is None else geometry
    limit = cfl * first.min_edge**2
    if dt > limit * (1 + 1e-12):
        raise FlowError(f"time step {dt:.3e} violates the CFL limit {limit:.3e}")
    stages = [first.mean_curvature]
    for factor in (0.5, 0.5, 1.0):
        trial = SurfaceMesh(mesh.positions + factor * dt * stages[-1], mesh.faces, mesh.charts)
        stages.append(vertex_geometry(ambient, trial).mean_curvature)
    increment = (stages[0] + 2 * stages[1] + 2 * stages[2] + stages[3]) / 6.0
    out = SurfaceMesh(mesh.positions + dt * increment, mesh.faces, mesh.charts.copy())
    _switch_charts(ambient, out)
    return out


def monitors(ambient, mesh: SurfaceMesh, geometry: VertexGeometry, k0: float) -> Monitors:
    psi = ambient.psi(mesh.positions)
    star = ambient.star_omega(mesh.positions, geometry.tangent)
    return Monitors(float(psi.max()), float(star.min()), float(np.min(star - k0 * psi)), float(geometry.a2_proxy.max()), geometry.volume)


# --- experiment ------------------------------------------------------------------------


@dataclass
class FlowConfig:
    """Inputs of a stability run."""

    eps: float = 0.05
    k0: float = 10.0
    mesh_level: int = 4
    dt: float | None = None
    cfl: float = 0.2
    t_end: float = 0.8
    mode: str = "low_harmonic"
    seed: int = 0
    psi_threshold: float = 1e-4
    monotone_tol: float = 1e-8
    min_star_omega: float = 0.5
    fit_start_fraction: float = 0.2


@dataclass
class DecayFit:
    rate: float
    intercept: float
    r_squared: float


@dataclass
class FlowReport:
    config: FlowConfig
    initial: InitialReport | None
    rows: list = field(default_factory=list)
    psi_monotone: bool = True
    stability_monotone: bool = True
    converged: bool = False
    volume_monotone: bool = True
    fit: DecayFit | None = None
    failure: str | None = None

    @property
    def verdict(self) -> bool:
        return self.failure is None and self.psi_monotone and self.stability_monotone and self.converged

    def to_json(self) -> dict:
        return {
            "config": asdict(self.config),
            "initial": asdict(self.initial) if self.initial else None,
            "verdict": bool(self.verdict),
            "converged": bool(self.converged),
            "psi_monotone": bool(self.psi_monotone),
            "stability_monotone": bool(self.stability_monotone),
            "volume_monotone": bool(self.volume_monotone),
            "decay_fit": asdict(self.fit) if self.fit else None,
            "terminal": dict(zip(CSV_COLUMNS, self.rows[-1])) if self.rows else None,
            "steps": len(self.rows) - 1,
            "failure": self.failure,
        }


def fit_exponential_decay(times: np.ndarray, values: np.ndarray, start_fraction: float = 0.2) -> DecayFit | None:
    """Least-squares fit ``log v = intercept - rate * t`` over the tail of the run."""
    times, values = np.asarray(times), np.asarray(values)
    keep = (times >= start_fraction * times[-1]) & (values > 0)
    if keep.sum() < 3:
        return None
    slope, intercept = np.polyfit(times[keep], np.log(values[keep]), 1)
    logs = np.log(values[keep])
    residual = logs - (intercept + slope * times[keep])
    total = np.sum((logs - logs.mean()) ** 2)
    r_squared = 1.0 - np.sum(residual**2) / total if total > 0 else 1.0
    return DecayFit(float(-slope), float(intercept), float(r_squared))


def run_stability_experiment(config: FlowConfig, progress: Callable[[int, float, Monitors], None] | None = None) -> FlowReport:
    """Flow an ``eps``-section of T*S^2 and check the monitored quantities."""
    ambient = StenzelSurfaceAmbient()
    if config.eps == 0:
        mesh, initial = initial_section(config.mesh_level, 0.0, config.mode, config.seed, config.min_star_omega)
        geometry = vertex_geometry(ambient, mesh)
        mon = monitors(ambient, mesh, geometry, config.k0)
        report = FlowReport(config, initial, [(0, 0.0, *asdict(mon).values())], converged=bool(mon.psi_max < config.psi_threshold))
        return report
    mesh, initial = initial_section(config.mesh_level, config.eps, config.mode, config.seed, config.min_star_omega)
    report = FlowReport(config, initial)
    geometry = vertex_geometry(ambient, mesh)
    dt = config.dt if config.dt is not None else 0.9 * config.cfl * geometry.min_edge**2
    steps = int(math.ceil(config.t_end / dt - 1e-9))
    time = 0.0
    previous: Monitors | None = None
    for index in range(steps + 1):
        mon = monitors(ambient, mesh, geometry, config.k0)
        report.rows.append((index, time, mon.psi_max, mon.star_omega_min, mon.stability_min, mon.a2_max, mon.volume))
        if progress is not None:
            progress(index, time, mon)
        if mon.star_omega_min <= 0:
            report.failure = f"graphicality lost at step {index}"
            break
        if previous is not None:
            if mon.psi_max > previous.psi_max + config.monotone_tol:
                report.psi_monotone = False
            if previous.stability_min > 1 - config.eps and mon.stability_min < previous.stability_min - config.monotone_tol:
                report.stability_monotone = False
            if mon.volume > previous.volume * (1 + 1e-12):
                report.volume_monotone = False
        previous = mon
        if index == steps:
            break
        try:
            mesh = step(ambient, mesh, dt, config.cfl, geometry)
            geometry = vertex_geometry(ambient, mesh)
        except FlowError as exc:
            report.failure = str(exc)
            break
        if not np.all(np.isfinite(mesh.positions)):
            report.failure = f"non-finite positions at step {index + 1}"
            break
        time = (index + 1) * dt
    table = np.array([row[:3] for row in report.rows])
    report.converged = bool(report.failure is None and table[-1, 2] < config.psi_threshold)
    report.fit = fit_exponential_decay(table[:, 1], table[:, 2], config.fit_start_fraction)
    return report


def write_csv(report: FlowReport, path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in report.rows:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def write_json(report: FlowReport, path) -> None:
    with open(path, "w") as handle:
        json.dump(report.to_json(), handle, indent=2, sort_keys=True)


# --- Euclidean validation -------------------------------------------------------------------


@dataclass
class ShrinkingSphereReport:
    times: np.ndarray
    radii: np.ndarray
    exact: np.ndarray
    initial_mean_curvature_error: float

    @property
    def max_relative_error(self) -> float:
        return float(np.max(np.abs(self.radii - self.exact) / self.exact))


def shrinking_sphere_validation(level: int = 3, radius: float = 1.0, t_end: float = 0.1, cfl: float = 0.1) -> ShrinkingSphereReport:
    """Flow a round sphere in flat R^3 and compare with ``R(t) = sqrt(R0^2 - 4t)``."""
    if 4 * t_end >= radius**2:
        raise DomainError("t_end must precede the extinction time R0^2/4")
    points, faces = icosphere(level)
    mesh = SurfaceMesh(radius * points, faces, np.zeros(points.shape[0], dtype=np.int64))
    ambient = EuclideanAmbient(3)
    geometry = vertex_geometry(ambient, mesh)
    magnitude = np.linalg.norm(geometry.mean_curvature, axis=1)
    h_error = float(np.max(np.abs(magnitude - 2 / radius)) / (2 / radius))
    final_radius = math.sqrt(radius**2 - 4 * t_end)
    dt = cfl * (geometry.min_edge * final_radius / radius) ** 2
    steps = int(math.ceil(t_end / dt))
    dt = t_end / steps
    times, radii = [0.0], [float(np.linalg.norm(mesh.positions, axis=1).mean())]
    for index in range(steps):
        mesh = step(ambient, mesh, dt, cfl=1.0, geometry=geometry)
        geometry = vertex_geometry(ambient, mesh)
        times.append((index + 1) * dt)
        radii.append(float(np.linalg.norm(mesh.positions, axis=1).mean()))
    times_arr = np.array(times)
    return ShrinkingSphereReport(times_arr, np.array(radii), np.sqrt(radius**2 - 4 * times_arr), h_error)

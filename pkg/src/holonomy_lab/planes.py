"""Singular-angle decomposition of graphical tangent planes and the linear estimates.

A positively oriented n-plane ``L`` in ``R^{n+m}`` (orthonormal frame,
horizontal coordinates first) with ``Omega(L) > 0`` is the graph of a linear
map ``S`` from the horizontal to the vertical space.  The singular value
decomposition of ``S`` gives orthonormal ``u_j`` (horizontal), ``v_mu``
(vertical) and angles ``theta_j = arctan(sigma_j)`` such that
``e_j = cos(theta_j) u_j + sin(theta_j) v_j`` is an orthonormal basis of ``L``
and ``e_{n+mu} = -sin(theta_mu) u_mu + cos(theta_mu) v_mu`` one of ``L^perp``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import subspace_angles

from .errors import NotGraphicalError, StructureError
from .riemann import FrameIndexSet

GRAPHICAL_THRESHOLD = 1e-12


@dataclass
class TangentPlaneSplit:
    """Singular-angle data of an oriented graphical plane.

    Attributes
    ----------
    frame : FrameIndexSet
    theta : ndarray, shape (n,)
        Angles in ``[0, pi/2)``, sorted by decreasing ``|sin theta|``.
    u : tuple of ndarray or None, length max(n, m)
        Horizontal unit vectors; ``None`` for indices beyond ``n``.
    v : tuple of ndarray or None, length max(n, m)
        Vertical unit vectors; ``None`` for indices beyond ``m``.
    e : ndarray, shape (n, N)
        Orthonormal, positively oriented basis of the plane (rows).
    e_perp : ndarray, shape (m, N)
        Orthonormal basis of the normal space (rows).
    s_frak : float
        ``max_j |sin theta_j|``.
    """

    frame: FrameIndexSet
    theta: np.ndarray
    u: tuple
    v: tuple
    e: np.ndarray
    e_perp: np.ndarray
    s_frak: float
    omega_value: float = field(default=float("nan"))

    @property
    def star_omega(self) -> float:
        """``prod_j cos(theta_j)``, the value of Omega on the plane."""
        return float(np.prod(np.cos(self.theta)))


def _as_basis(basis, frame: FrameIndexSet) -> np.ndarray:
    arr = np.asarray(basis, dtype=float)
    if arr.shape != (frame.n, frame.dim):
        raise StructureError(f"expected {frame.n} basis vectors of length {frame.dim}, got shape {arr.shape}")
    return arr


def split_plane(basis, frame: FrameIndexSet) -> TangentPlaneSplit:
    """Singular-angle decomposition of the oriented plane spanned by ``basis``.

    Parameters
    ----------
    basis : array_like, shape (n, n + m)
        Rows span the plane; their order fixes the orientation.
    frame : FrameIndexSet

    Returns
    -------
    TangentPlaneSplit

    Raises
    ------
    NotGraphicalError
        If ``Omega`` of the oriented unit plane is at most 1e-12.
    """
    n, m, dim = frame.n, frame.m, frame.dim
    rows = _as_basis(basis, frame)
    q, r = np.linalg.qr(rows.T)
    orientation = np.sign(np.prod(np.diag(r)))
    if orientation == 0:
        raise NotGraphicalError("basis vectors are linearly dependent")
    q = q.copy()
    q[:, -1] *= orientation
    omega_value = float(np.linalg.det(q[:n, :]))
    if not omega_value > GRAPHICAL_THRESHOLD:
        raise NotGraphicalError(f"plane not graphical: Omega = {omega_value:.3e}")
    slope = q[n:, :] @ np.linalg.inv(q[:n, :])
    left, sigma, right_t = np.linalg.svd(slope, full_matrices=True)
    right = right_t.T
    k = min(n, m)
    sig_full = np.zeros(n)
    sig_full[:k] = sigma[:k]
    order = np.argsort(-sig_full, kind="stable")
    right = right[:, order]
    sig_full = sig_full[order]
    left_cols = list(range(m))
    paired = [int(j) for j in order if j < k]
    left = left[:, paired + [c for c in left_cols if c not in paired]]
    if np.linalg.det(right) < 0:
        right[:, -1] *= -1.0
        if n - 1 < m:
            left[:, n - 1] *= -1.0
    theta = np.arctan(sig_full)
    size = max(n, m)
    u_vecs, v_vecs = [], []
    for j in range(size):
        if j < n:
            vec = np.zeros(dim)
            vec[:n] = right[:, j]
            u_vecs.append(vec)
        else:
            u_vecs.append(None)
        if j < m:
            vec = np.zeros(dim)
            vec[n:] = left[:, j]
            v_vecs.append(vec)
        else:
            v_vecs.append(None)
    e = np.empty((n, dim))
    for j in range(n):
        e[j] = np.cos(theta[j]) * u_vecs[j]
        if v_vecs[j] is not None:
            e[j] += np.sin(theta[j]) * v_vecs[j]
    e_perp = np.empty((m, dim))
    for mu in range(m):
        e_perp[mu] = np.cos(theta[mu]) * v_vecs[mu] if mu < n else v_vecs[mu]
        if mu < n:
            e_perp[mu] -= np.sin(theta[mu]) * u_vecs[mu]
    s_frak = float(np.max(np.abs(np.sin(theta)))) if n else 0.0
    return TangentPlaneSplit(
        frame=frame,
        theta=theta,
        u=tuple(u_vecs),
        v=tuple(v_vecs),
        e=e,
        e_perp=e_perp,
        s_frak=s_frak,
        omega_value=omega_value,
    )


def reconstruct(split: TangentPlaneSplit) -> np.ndarray:
    """Rebuild the plane basis ``e_j = cos(theta_j) u_j + sin(theta_j) v_j``."""
    n = split.frame.n
    out = np.empty((n, split.frame.dim))
    for j in range(n):
        out[j] = np.cos(split.theta[j]) * split.u[j]
        if split.v[j] is not None:
            out[j] += np.sin(split.theta[j]) * split.v[j]
    return out


def max_principal_angle(basis_a, basis_b) -> float:
    """Largest principal angle between the row spans of two bases."""
    return float(np.max(subspace_angles(np.asarray(basis_a).T, np.asarray(basis_b).T)))


def graph_basis(slope: np.ndarray, horizontal_gauge: np.ndarray | None = None) -> np.ndarray:
    """Rows ``(g_j, slope @ g_j)`` for the columns ``g_j`` of a horizontal gauge."""
    m, n = slope.shape
    gauge = np.eye(n) if horizontal_gauge is None else horizontal_gauge
    return np.hstack([gauge.T, (slope @ gauge).T])


def random_graphical_basis(frame: FrameIndexSet, rng: np.random.Generator, tilt: float) -> np.ndarray:
    """Basis of a random graphical plane with slope matrix of spectral size ~``tilt``.

    The horizontal gauge is a random rotation so bases are not aligned with
    the coframe.
    """
    n, m = frame.n, frame.m
    slope = tilt * rng.standard_normal((m, n)) / np.sqrt(max(n, m))
    gauge, _ = np.linalg.qr(rng.standard_normal((n, n)))
    if np.linalg.det(gauge) < 0:
        gauge[:, 0] *= -1.0
    return graph_basis(slope, gauge)


@dataclass
class EstimateLine:
    name: str
    lhs: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.bound * (1.0 + 1e-12) + 1e-12


@dataclass
class LinearEstimateReport:
    lines: list[EstimateLine]

    @property
    def passed(self) -> bool:
        return all(line.holds for line in self.lines)

    def worst(self) -> dict:
        return {line.name: (line.lhs, line.bound) for line in self.lines}


@lru_cache(maxsize=None)
def _minor_indices(n: int, m: int) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Row/column index sets of every minor entering the pairing estimates.

    Rows index the coframe (``0..n-1`` horizontal, ``n..`` vertical); columns
    index the stacked vectors ``[e; e_perp]``.  Each entry is a pair of
    integer arrays of shape ``(K, n)``.
    """
    hor = list(range(n))
    drop = lambda seq, *idx: [v for k, v in enumerate(seq) if k not in idx]  # noqa: E731
    sets: dict[str, tuple[list, list]] = {key: ([], []) for key in ("perp1", "vert1", "vert1perp", "perp2", "vert2")}

    def add(key, rows, cols):
        sets[key][0].append(rows)
        sets[key][1].append(cols)

    for mu in range(m):
        for i in range(n):
            rows = [n + mu] + drop(hor, i)
            add("perp1", hor, [n + mu] + drop(hor, i))
            add("vert1", rows, hor)
            for nu in range(m):
                for j in range(n):
                    add("vert1perp", rows, [n + nu] + drop(hor, j))
    if n >= 2:
        for mu, nu in itertools.product(range(m), repeat=2):
            for i, j in itertools.combinations(range(n), 2):
                add("perp2", hor, [n + mu, n + nu] + drop(hor, i, j))
                add("vert2", [n + mu, n + nu] + drop(hor, i, j), hor)
    return {key: (np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp)) for key, (rows, cols) in sets.items() if rows}


def _estimate_lines(e: np.ndarray, e_perp: np.ndarray, coframe: np.ndarray, n: int, m: int, s: float):
    hor = coframe[:n]
    ver = coframe[n:]
    he = hor @ e.T
    ve = ver @ e.T
    lines = [
        EstimateLine("sum_i |w^j(e_i) w^k(e_i)|", float(np.abs(np.einsum("ji,ki->jki", he, he)).sum(axis=2).max()), float(n)),
        EstimateLine(
            "sum_i |w^(n+mu)(e_i) w^j(e_i)|",
            float(np.abs(np.einsum("ai,ji->aji", ve, he)).sum(axis=2).max()),
            n * s,
        ),
    ]
    gram = coframe @ np.vstack([e, e_perp]).T
    worst = {k: 0.0 for k in ("perp1", "perp2", "vert1", "vert1perp", "vert2")}
    for key, (rows, cols) in _minor_indices(n, m).items():
        worst[key] = float(np.abs(np.linalg.det(gram[rows[:, :, None], cols[:, None, :]])).max())
    lines += [
        EstimateLine("|Omega(e_(n+mu), e without e_i)|", worst["perp1"], s),
        EstimateLine("|Omega(e_(n+mu), e_(n+nu), e without e_i, e_j)|", worst["perp2"], s * s),
        EstimateLine("|(w^(n+mu) ^ Omega without w^i)(e)|", worst["vert1"], n * s),
        EstimateLine("|(w^(n+mu) ^ Omega without w^i)(e_(n+nu), e without e_j)|", worst["vert1perp"], 1.0),
        EstimateLine("|(w^(n+mu) ^ w^(n+nu) ^ Omega without w^i, w^j)(e)|", worst["vert2"], n * (n - 1) * s * s),
    ]
    return lines


def random_block_gauge(frame: FrameIndexSet, rng: np.random.Generator) -> np.ndarray:
    """Random orthonormal coframe adapted to the horizontal/vertical split.

    Horizontal block in SO(n) (keeps Omega), vertical block in O(m).
    """
    n, m = frame.n, frame.m
    hor, _ = np.linalg.qr(rng.standard_normal((n, n)))
    if np.linalg.det(hor) < 0:
        hor[:, 0] *= -1.0
    ver, _ = np.linalg.qr(rng.standard_normal((m, m)))
    gauge = np.zeros((frame.dim, frame.dim))
    gauge[:n, :n] = hor
    gauge[n:, n:] = ver
    return gauge


def linear_estimate_suite(split: TangentPlaneSplit, trials: int = 1, rng: np.random.Generator | None = None) -> LinearEstimateReport:
    """Evaluate every left-hand side of the linear pairing estimates.

    The first evaluation uses the frame's own coframe; each further trial
    re-evaluates in a random orthonormal coframe adapted to the
    horizontal/vertical split.  Each reported ``lhs`` is the maximum over
    all index choices and trials.
    """
    n, m = split.frame.n, split.frame.m
    rng = np.random.default_rng(0) if rng is None else rng
    coframes = [np.eye(split.frame.dim)] + [random_block_gauge(split.frame, rng) for _ in range(max(trials - 1, 0))]
    merged: dict[str, EstimateLine] = {}
    for coframe in coframes:
        for line in _estimate_lines(split.e, split.e_perp, coframe, n, m, split.s_frak):
            if line.name not in merged or line.lhs > merged[line.name].lhs:
                merged[line.name] = line
    return LinearEstimateReport(list(merged.values()))

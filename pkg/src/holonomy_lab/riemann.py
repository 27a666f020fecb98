"""Frame-indexed curvature tensors and their algebraic checks.

Convention used throughout the package: for an orthonormal frame ``e``,
``R[x, y, z, w] = <R(e_z, e_w) e_y, e_x>`` with
``R(Z, W) = nabla_Z nabla_W - nabla_W nabla_Z - nabla_[Z, W]``.  With this
choice the sectional curvature of the plane ``e_x ^ e_y`` is ``R[x, y, x, y]``
and the Ricci tensor is ``Ric[x, y] = sum_k R[x, k, y, k]``, so the unit round
sphere ``S^n`` has ``Ric = (n - 1) I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import StructureError

IndexTuple = tuple[int, int, int, int]


@dataclass(frozen=True)
class FrameIndexSet:
    """Horizontal/vertical split of an orthonormal frame.

    Indices are 0-based: ``0..n-1`` are horizontal codirections and
    ``n..n+m-1`` are vertical ones.

    Parameters
    ----------
    n : int
        Base dimension (number of horizontal directions).
    m : int
        Fiber rank (number of vertical directions).
    """

    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise StructureError(f"frame needs n >= 1 and m >= 1, got n={self.n}, m={self.m}")

    @property
    def dim(self) -> int:
        return self.n + self.m

    @property
    def horizontal(self) -> range:
        return range(self.n)

    @property
    def vertical(self) -> range:
        return range(self.n, self.n + self.m)


@dataclass
class RiemannSample:
    """Curvature components in an orthonormal frame.

    Parameters
    ----------
    components : ndarray, shape (N, N, N, N)
        ``R[x, y, z, w]`` in the package convention.
    complex_structure : ndarray, shape (N, N), optional
        Matrix of the complex structure; column ``k`` holds ``J e_k``.
    frame : FrameIndexSet, optional
        Horizontal/vertical split of the frame, when meaningful.
    """

    components: np.ndarray
    complex_structure: np.ndarray | None = None
    frame: FrameIndexSet | None = None

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        if comps.ndim != 4 or len(set(comps.shape)) != 1:
            raise StructureError(f"curvature must be a 4-index square array, got shape {comps.shape}")
        self.components = comps
        if self.complex_structure is not None:
            jmat = np.asarray(self.complex_structure, dtype=float)
            if jmat.shape != (self.dim, self.dim):
                raise StructureError(f"complex structure shape {jmat.shape} does not match dimension {self.dim}")
            self.complex_structure = jmat
        if self.frame is not None and self.frame.dim != self.dim:
            raise StructureError(f"frame dimension {self.frame.dim} does not match tensor dimension {self.dim}")

    @property
    def dim(self) -> int:
        return self.components.shape[0]


@dataclass
class SymmetryReport:
    """Maximum violation of each algebraic curvature identity."""

    first_pair: float
    last_pair: float
    pair_swap: float
    bianchi: float
    j_invariance: float | None = None
    tol: float = 1e-9
    extra: dict = field(default_factory=dict)

    @property
    def max_violation(self) -> float:
        vals = [self.first_pair, self.last_pair, self.pair_swap, self.bianchi]
        if self.j_invariance is not None:
            vals.append(self.j_invariance)
        return float(max(vals))

    @property
    def passed(self) -> bool:
        return self.max_violation < self.tol


def check_riemann_symmetries(sample: RiemannSample, tol: float = 1e-9) -> SymmetryReport:
    """Measure how far a curvature table is from an algebraic curvature tensor.

    Parameters
    ----------
    sample : RiemannSample
        Curvature table to check.
    tol : float
        Threshold used by :attr:`SymmetryReport.passed`.

    Returns
    -------
    SymmetryReport
        Max absolute violation per symmetry class.
    """
    if not isinstance(sample, RiemannSample):
        sample = RiemannSample(sample)
    r = sample.components
    report = SymmetryReport(
        first_pair=float(np.abs(r + r.transpose(1, 0, 2, 3)).max()),
        last_pair=float(np.abs(r + r.transpose(0, 1, 3, 2)).max()),
        pair_swap=float(np.abs(r - r.transpose(2, 3, 0, 1)).max()),
        bianchi=float(np.abs(r + np.einsum("abcd->acdb", r) + np.einsum("abcd->adbc", r)).max()),
        tol=tol,
    )
    if sample.complex_structure is not None:
        jmat = sample.complex_structure
        rotated = np.einsum("abpq,pc,qd->abcd", r, jmat, jmat)
        report.j_invariance = float(np.abs(r - rotated).max())
    return report


def ricci_contract(sample: RiemannSample | np.ndarray) -> np.ndarray:
    """Return ``Ric[x, y] = sum_k R[x, k, y, k]``."""
    comps = sample.components if isinstance(sample, RiemannSample) else np.asarray(sample)
    if comps.ndim != 4:
        raise StructureError(f"expected a 4-index array, got shape {comps.shape}")
    return np.einsum("xkyk->xy", comps)


def space_form(dim: int, curvature: float = 1.0) -> RiemannSample:
    """Curvature of a space form ``R = K (g ^ g)`` in an orthonormal frame."""
    eye = np.eye(dim)
    comps = curvature * (np.einsum("xz,yw->xyzw", eye, eye) - np.einsum("xw,yz->xyzw", eye, eye))
    return RiemannSample(comps)


def mixed_block_violation(sample: RiemannSample, n: int) -> float:
    """Largest ``|R(H, V, V, V)|`` or ``|R(V, H, H, H)|`` over frame indices."""
    r = sample.components
    h, v = slice(0, n), slice(n, r.shape[0])
    return float(max(np.abs(r[h, v, v, v]).max(initial=0.0), np.abs(r[v, h, h, h]).max(initial=0.0)))


def index_images(idx: IndexTuple, j_action: Callable[[int], tuple[int, int]] | None = None):
    """Symmetry images of a component index with the sign relating their values."""
    a, b, c, d = idx
    images = [((b, a, c, d), -1.0), ((a, b, d, c), -1.0), ((c, d, a, b), 1.0)]
    if j_action is not None:
        (jc, sc), (jd, sd) = j_action(c), j_action(d)
        images.append(((a, b, jc, jd), float(sc * sd)))
    return images


def close_under_symmetries(
    entries: Mapping[IndexTuple, float],
    dim: int,
    j_action: Callable[[int], tuple[int, int]] | None = None,
    conflict_tol: float = 1e-12,
) -> np.ndarray:
    """Complete a table of canonical components using the curvature symmetries.

    Parameters
    ----------
    entries : mapping
        Canonical components ``{(x, y, z, w): value}``.
    dim : int
        Frame dimension.
    j_action : callable, optional
        ``k -> (index of J e_k, sign)`` for Kähler ambients; adds
        ``R(X, Y, JZ, JW) = R(X, Y, Z, W)`` to the propagation.
    conflict_tol : float
        Relative tolerance for two derivations of the same component.

    Returns
    -------
    ndarray, shape (dim, dim, dim, dim)
        Closed table; components not reachable from ``entries`` are zero.

    Raises
    ------
    StructureError
        If two derivations of a component disagree.
    """
    known: dict[IndexTuple, float] = {}
    stack = list(entries.items())
    while stack:
        key, value = stack.pop()
        if key in known:
            if abs(known[key] - value) > conflict_tol * (1.0 + abs(value)):
                raise StructureError(f"inconsistent curvature component {key}: {known[key]} vs {value}")
            continue
        known[key] = value
        for image, sign in index_images(key, j_action):
            stack.append((image, sign * value))
    table = np.zeros((dim,) * 4)
    for key, value in known.items():
        table[key] = value
    return table


def complex_structure_matrix(n: int) -> np.ndarray:
    """Matrix of ``J e_k = e_{n+k}``, ``J e_{n+k} = -e_k`` on ``R^{2n}``."""
    jmat = np.zeros((2 * n, 2 * n))
    for k in range(n):
        jmat[n + k, k] = 1.0
        jmat[k, n + k] = -1.0
    return jmat


def j_action_split(n: int) -> Callable[[int], tuple[int, int]]:
    """Index action of :func:`complex_structure_matrix`."""

    def act(k: int) -> tuple[int, int]:
        return (n + k, 1) if k < n else (k - n, -1)

    return act

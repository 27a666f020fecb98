"""Exterior-algebra helpers over an orthonormal coframe.

A monomial is a stack of 1-forms ``rows`` (shape ``(k, N)``, real or complex
coefficients in the orthonormal coframe); its value on vectors ``v_1..v_k``
(columns of ``V``) is ``det(rows @ V)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import StructureError
from .riemann import FrameIndexSet


def sort_sign(labels) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``labels`` and the sorted tuple.

    Returns ``(0, ())`` if a label repeats (the wedge product vanishes).
    """
    labels = list(labels)
    if len(set(labels)) < len(labels):
        return 0, ()
    sign = 1
    for i in range(len(labels)):
        for j in range(len(labels) - 1 - i):
            if labels[j] > labels[j + 1]:
                labels[j], labels[j + 1] = labels[j + 1], labels[j]
                sign = -sign
    return sign, tuple(labels)


def omit(labels, *dropped) -> tuple[int, ...]:
    """``labels`` with the entries in ``dropped`` removed (order preserved)."""
    return tuple(lab for lab in labels if lab not in dropped)


def monomial_value(rows: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Evaluate ``rows[0] ^ ... ^ rows[k-1]`` on ``k`` vectors.

    Parameters
    ----------
    rows : ndarray, shape (k, N)
        Coefficients of the 1-forms in the orthonormal coframe.
    vectors : ndarray, shape (..., N, k)
        Frame components of the vectors (as columns); leading axes broadcast.
    """
    rows = np.asarray(rows)
    vectors = np.asarray(vectors)
    if rows.shape[0] != vectors.shape[-1] or rows.shape[1] != vectors.shape[-2]:
        raise StructureError(f"cannot evaluate a {rows.shape} monomial on vectors of shape {vectors.shape}")
    if rows.shape[0] == 0:
        return np.ones(vectors.shape[:-2], dtype=rows.dtype)
    return np.linalg.det(rows @ vectors)


@lru_cache(maxsize=None)
def _combinations(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(dim), degree))


def basis_components(rows: np.ndarray) -> np.ndarray:
    """Components of a monomial in the basis ``omega^I`` (``I`` increasing).

    The squared norm of the form is the sum of squared moduli of these
    components.
    """
    rows = np.asarray(rows)
    k, dim = rows.shape
    combos = _combinations(dim, k)
    if k == 0:
        return np.ones(1, dtype=rows.dtype)
    blocks = np.stack([rows[:, list(c)] for c in combos])
    return np.linalg.det(blocks)


def coordinate_rows(labels, dim: int) -> np.ndarray:
    """Stack of coframe 1-forms ``omega^l`` for ``l`` in ``labels``."""
    eye = np.eye(dim)
    return eye[list(labels)] if len(labels) else np.zeros((0, dim))


@dataclass(frozen=True)
class CalibrationForm:
    """``Omega = omega^0 ^ ... ^ omega^{n-1}`` and its interior products.

    ``interior(j)`` is the (n-1)-form with ``omega^j`` removed together with
    the sign making ``omega^j ^ interior(j) = Omega``; ``interior(j, k)``
    likewise satisfies ``omega^j ^ omega^k ^ interior(j, k) = Omega``.
    """

    frame: FrameIndexSet

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(self.frame.horizontal)

    def interior(self, *removed: int) -> tuple[int, tuple[int, ...]]:
        """Signed monomial obtained by stripping ``removed`` from the front of Omega."""
        if len(set(removed)) < len(removed):
            return 0, ()
        rest = omit(self.labels, *removed)
        sign, _ = sort_sign(tuple(removed) + rest)
        return sign, rest

    def evaluate(self, vectors: np.ndarray) -> np.ndarray:
        """``Omega(v_1, ..., v_n)`` for vectors stored as columns."""
        return monomial_value(coordinate_rows(self.labels, self.frame.dim), vectors)


def random_orthonormal_frames(dim: int, k: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random orthonormal k-frames in ``R^dim``, shape ``(count, dim, k)``."""
    gauss = rng.standard_normal((count, dim, k))
    q, r = np.linalg.qr(gauss)
    signs = np.sign(np.diagonal(r, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


@dataclass
class ComassReport:
    """Outcome of evaluating Omega on random orthonormal frames."""

    samples: int
    max_value: float
    near_one_max_sine: float
    passed: bool


def comass_check(
    frame: FrameIndexSet,
    count: int,
    rng: np.random.Generator,
    tol: float = 1e-12,
    near_one: float = 1e-12,
    sine_tol: float | None = None,
) -> ComassReport:
    """Check ``|Omega(L)| <= 1`` on random frames, with equality only for horizontal planes.

    Frames are drawn Haar-uniformly; additionally half of them are tilted
    copies of the horizontal plane so that values close to 1 are exercised.
    Since ``Omega(L) <= cos(theta_max) <= 1 - s^2 / 2``, a value above
    ``1 - near_one`` forces ``s < sqrt(2 near_one)``; that is the default
    ``sine_tol`` (with a relative slack of 1e-3 for rounding).
    """
    if sine_tol is None:
        sine_tol = np.sqrt(2.0 * near_one) * (1.0 + 1e-3)
    n, dim = frame.n, frame.dim
    haar = random_orthonormal_frames(dim, n, count - count // 2, rng)
    tilted = _near_horizontal_frames(frame, count // 2, rng)
    frames = np.concatenate([haar, tilted])
    values = np.linalg.det(frames[:, :n, :])
    vertical_part = frames[:, n:, :]
    sines = np.linalg.norm(vertical_part, ord=2, axis=(1, 2))
    near = values >= 1.0 - near_one
    near_sine = float(sines[near].max(initial=0.0))
    passed = bool(values.max() <= 1.0 + tol and near_sine < sine_tol)
    return ComassReport(samples=len(values), max_value=float(values.max()), near_one_max_sine=near_sine, passed=passed)


def _near_horizontal_frames(frame: FrameIndexSet, count: int, rng: np.random.Generator) -> np.ndarray:
    n, m = frame.n, frame.m
    out = np.empty((count, frame.dim, n))
    scales = 10.0 ** rng.uniform(-9, 0, size=count)
    for idx in range(count):
        slope = scales[idx] * rng.standard_normal((m, n))
        graph = np.vstack([np.eye(n), slope])
        q, r = np.linalg.qr(graph)
        out[idx] = q * np.sign(np.diag(r))
    return out

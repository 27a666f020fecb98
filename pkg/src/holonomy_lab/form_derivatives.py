"""Batched evaluation of first and second covariant derivatives of a calibration form.

Each family expresses its derivative formulas as lists of terms over the
orthonormal coframe:

* gradient term ``(coef, d, rows)`` stands for ``coef * d (x) (rows[0] ^ ... )``,
  where ``d`` is the differentiation covector;
* Hessian term ``(coef, q, rows)`` stands for ``coef * q (x) (rows[0] ^ ...)``
  where ``q`` is a 2-tensor (an ``(N, N)`` matrix, or ``outer(d1, d2)``).

Coefficients and tensors may carry a leading sample axis so one call
evaluates thousands of (point, plane) samples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .forms import basis_components


@dataclass
class GradientTerm:
    coef: np.ndarray | complex | float
    direction: np.ndarray  # (N,) or (S, N)
    rows: np.ndarray  # (k, N)


@dataclass
class HessianTerm:
    coef: np.ndarray | complex | float
    tensor: np.ndarray  # (N, N) or (S, N, N)
    rows: np.ndarray  # (k, N)


def outer_term(coef, first, second, rows) -> HessianTerm:
    """Hessian term ``coef * (first (x) second) (x) rows``."""
    return HessianTerm(coef, np.multiply.outer(first, second) if np.ndim(first) == 1 else np.einsum("si,sj->sij", first, second), np.asarray(rows))


def _as_samples(value, count: int) -> np.ndarray:
    arr = np.asarray(value)
    if arr.ndim == 0:
        return np.full(count, arr.item(), dtype=np.result_type(arr, float))
    return arr


class _MonomialCache:
    """Caches ``det(rows @ e^T)`` per distinct monomial for a batch of planes."""

    def __init__(self, planes: np.ndarray):
        self.planes = planes
        self.store: dict[bytes, np.ndarray] = {}

    def value(self, rows: np.ndarray) -> np.ndarray:
        key = rows.tobytes() + str(rows.dtype).encode()
        if key not in self.store:
            mats = np.einsum("kn,sjn->skj", rows, self.planes)
            self.store[key] = np.linalg.det(mats)
        return self.store[key]


def trace_on_planes(terms: list[HessianTerm], planes: np.ndarray) -> np.ndarray:
    """``sum_k (nabla^2_{e_k, e_k} Omega)(e_1, ..., e_n)`` for each sample.

    Parameters
    ----------
    terms : list of HessianTerm
    planes : ndarray, shape (S, n, N)
        Orthonormal plane bases (rows) in frame components.

    Returns
    -------
    ndarray, shape (S,)
        Complex in general; real families return a real-valued result up to
        rounding.
    """
    count = planes.shape[0]
    gram = np.einsum("skn,skm->snm", planes, planes)
    cache = _MonomialCache(planes)
    total = np.zeros(count, dtype=complex)
    for term in terms:
        tensor = np.asarray(term.tensor)
        if tensor.ndim == 2:
            paired = np.einsum("snm,nm->s", gram, tensor)
        else:
            paired = np.einsum("snm,snm->s", gram, tensor)
        total += _as_samples(term.coef, count) * paired * cache.value(np.asarray(term.rows))
    return total


def hessian_on_plane(terms: list[HessianTerm], first: np.ndarray, second: np.ndarray, planes: np.ndarray) -> np.ndarray:
    """``(nabla^2_{X, Y} Omega)(e_1, ..., e_n)`` for per-sample vectors ``X``, ``Y``."""
    count = planes.shape[0]
    cache = _MonomialCache(planes)
    total = np.zeros(count, dtype=complex)
    for term in terms:
        tensor = np.asarray(term.tensor)
        if tensor.ndim == 2:
            paired = np.einsum("sn,nm,sm->s", first, tensor, second)
        else:
            paired = np.einsum("sn,snm,sm->s", first, tensor, second)
        total += _as_samples(term.coef, count) * paired * cache.value(np.asarray(term.rows))
    return total


def gradient_operator(terms: list[GradientTerm], count: int, dim: int) -> np.ndarray:
    """Matrix ``G[s, x, I]`` with ``(nabla_X Omega)_I = sum_x X^x G[s, x, I]``.

    ``I`` runs over increasing index tuples, so the metric norm of
    ``nabla_X Omega`` is the Euclidean norm of ``X @ G[s]``.
    """
    grouped: dict[bytes, list] = {}
    for term in terms:
        rows = np.asarray(term.rows)
        direction = np.asarray(term.direction)
        key = rows.tobytes() + str(rows.dtype).encode()
        grouped.setdefault(key, [rows, []])[1].append((term.coef, direction))
    width = None
    out = None
    for rows, items in grouped.values():
        comps = basis_components(rows)
        if out is None:
            width = comps.shape[0]
            out = np.zeros((count, dim, width), dtype=complex)
        weighted = np.zeros((count, dim), dtype=complex)
        for coef, direction in items:
            coef = _as_samples(coef, count)
            if direction.ndim == 1:
                weighted += coef[:, None] * direction[None, :]
            else:
                weighted += coef[:, None] * direction
        out += weighted[:, :, None] * comps[None, None, :]
    return out


def gradient_on_plane(terms: list[GradientTerm], vectors: np.ndarray, planes: np.ndarray) -> np.ndarray:
    """``(nabla_X Omega)(e_1, ..., e_n)`` for per-sample vectors ``X`` of shape (S, N)."""
    count = planes.shape[0]
    cache = _MonomialCache(planes)
    total = np.zeros(count, dtype=complex)
    for term in terms:
        direction = np.asarray(term.direction)
        paired = vectors @ direction if direction.ndim == 1 else np.einsum("sn,sn->s", vectors, direction)
        total += _as_samples(term.coef, count) * paired * cache.value(np.asarray(term.rows))
    return total


def gradient_sup_norm(terms: list[GradientTerm], count: int, dim: int) -> tuple[np.ndarray, float]:
    """Sup over unit ``X`` of ``|nabla_X Omega|`` per sample and the max imaginary residue."""
    gmat = gradient_operator(terms, count, dim)
    imag = float(np.abs(gmat.imag).max(initial=0.0))
    norms = np.linalg.norm(gmat.real, ord=2, axis=(1, 2))
    return norms, imag


def dense_gradient(terms: list[GradientTerm], dim: int, degree: int) -> np.ndarray:
    """Fully antisymmetrised ``D[x, a_1, ..., a_k]`` for a single sample (oracle comparisons)."""
    out = np.zeros((dim,) + (dim,) * degree, dtype=complex)
    for term in terms:
        block = dense_monomial(np.asarray(term.rows), dim)
        out += complex(np.asarray(term.coef).reshape(-1)[0]) * np.multiply.outer(np.asarray(term.direction).reshape(-1)[-dim:], block)
    return out


def dense_hessian(terms: list[HessianTerm], dim: int, degree: int) -> np.ndarray:
    """Fully antisymmetrised ``D[x, y, a_1, ..., a_k]`` for a single sample."""
    out = np.zeros((dim, dim) + (dim,) * degree, dtype=complex)
    cache: dict[bytes, np.ndarray] = {}
    for term in terms:
        rows = np.asarray(term.rows)
        key = rows.tobytes() + str(rows.dtype).encode()
        if key not in cache:
            cache[key] = dense_monomial(rows, dim)
        tensor = np.asarray(term.tensor)
        if tensor.ndim == 3:
            tensor = tensor[0]
        out += complex(np.asarray(term.coef).reshape(-1)[0]) * np.multiply.outer(tensor, cache[key])
    return out


def dense_monomial(rows: np.ndarray, dim: int) -> np.ndarray:
    """Antisymmetric tensor of ``rows[0] ^ ... ^ rows[k-1]`` (determinant normalisation)."""
    degree = rows.shape[0]
    out = np.zeros((dim,) * degree, dtype=complex)
    perms = list(itertools.permutations(range(degree)))
    perm_signs = [np.linalg.det(np.eye(degree)[list(p)]) for p in perms]
    for combo in itertools.combinations(range(dim), degree):
        value = np.linalg.det(rows[:, list(combo)])
        if value == 0:
            continue
        for perm, sign in zip(perms, perm_signs):
            out[tuple(combo[p] for p in perm)] = value * sign
    return out

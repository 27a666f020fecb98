"""Empirical constants for the first and second derivative bounds of the calibration form.

For a sample (point, plane) with distance scale ``d`` (``rho`` or ``sqrt(s)``),
tilt ``s_frak`` and trace value ``v`` the bounds read

    |nabla_X Omega| <= K d |X|,      -K (d^2 + s_frak^2) < v < K s_frak^2 - d^2 / K.

Each sample fixes the smallest admissible ``K``; the certified constant is a
safety factor times the maximum over a seeded certification set, and is then
checked on an independent validation set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bryant_salamon, calabi, stenzel
from .form_derivatives import gradient_sup_norm, trace_on_planes
from .riemann import FrameIndexSet

SAFETY_FACTOR = 2.0
DEFAULT_SAMPLES = 10_000
CHUNK = 1000


@dataclass
class PlaneBatch:
    """Oriented orthonormal plane bases with their tilt data."""

    planes: np.ndarray  # (S, n, N)
    s_frak: np.ndarray  # (S,)
    omega: np.ndarray  # (S,)


def random_planes(frame: FrameIndexSet, count: int, rng: np.random.Generator, tilt_range=(1e-3, 3.0)) -> PlaneBatch:
    """Graphical planes with log-uniform slope size and random horizontal gauge."""
    n, m = frame.n, frame.m
    tilts = np.exp(rng.uniform(np.log(tilt_range[0]), np.log(tilt_range[1]), count))
    slopes = tilts[:, None, None] * rng.standard_normal((count, m, n)) / np.sqrt(max(n, m))
    gauges, _ = np.linalg.qr(rng.standard_normal((count, n, n)))
    flip = np.linalg.det(gauges) < 0
    gauges[flip, :, 0] *= -1.0
    rows = np.concatenate([np.swapaxes(gauges, 1, 2), np.swapaxes(slopes @ gauges, 1, 2)], axis=2)
    q, r = np.linalg.qr(np.swapaxes(rows, 1, 2))
    signs = np.sign(np.diagonal(r, axis1=1, axis2=2))
    q = q * signs[:, None, :]
    planes = np.swapaxes(q, 1, 2)
    sing = np.linalg.svd(slopes, compute_uv=False)
    s_frak = np.sin(np.arctan(sing[:, 0]))
    omega = np.linalg.det(planes[:, :, :n])
    return PlaneBatch(planes, s_frak, omega)


def required_constant(grad_norm, trace, scale, s_frak) -> dict[str, np.ndarray]:
    """Smallest ``K`` each sample admits for the gradient, lower and upper bounds."""
    grad_norm, trace, scale, s_frak = (np.asarray(v, dtype=float) for v in (grad_norm, trace, scale, s_frak))
    s2 = s_frak**2
    lower = -trace / (scale**2 + s2)
    upper = np.empty_like(trace)
    tilted = s2 > 0
    t, q, d2 = trace[tilted], s2[tilted], scale[tilted] ** 2
    root = np.sqrt(t**2 + 4 * q * d2)
    # positive root of q K^2 - t K - d2, in the form that avoids cancellation
    upper[tilted] = np.where(t >= 0, (t + root) / (2 * q), 2 * d2 / np.maximum(root - t, 1e-300))
    flat = ~tilted
    with np.errstate(divide="ignore"):
        upper[flat] = np.where(trace[flat] < 0, scale[flat] ** 2 / -trace[flat], np.inf)
    return {"gradient": grad_norm / scale, "lower": lower, "upper": upper}


@dataclass
class SampleSet:
    scale: np.ndarray
    s_frak: np.ndarray
    grad_norm: np.ndarray
    trace: np.ndarray
    imag_residue: float

    def required(self) -> dict[str, np.ndarray]:
        return required_constant(self.grad_norm, self.trace, self.scale, self.s_frak)


@dataclass
class BoundCertificate:
    """Certified constant and its validation."""

    family: str
    label: str
    k_emp: float
    certification_max: dict[str, float]
    validation_max: dict[str, float]
    samples: int
    imag_residue: float
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        finite = all(np.isfinite(v) for v in self.certification_max.values())
        return finite and all(v < self.k_emp for v in self.validation_max.values())


def _evaluate(terms_for_chunk, frame: FrameIndexSet, planes: PlaneBatch, index: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    grads, hess = terms_for_chunk(index)
    count = index.shape[0]
    norms, imag_g = gradient_sup_norm(grads, count, frame.dim)
    trace = trace_on_planes(hess, planes.planes[index])
    imag_t = float(np.abs(trace.imag).max())
    return norms, trace.real, max(imag_g, imag_t)


def _collect(terms_for_chunk, frame, planes: PlaneBatch, scale: np.ndarray) -> SampleSet:
    count = scale.shape[0]
    norms = np.empty(count)
    trace = np.empty(count)
    imag = 0.0
    for start in range(0, count, CHUNK):
        index = np.arange(start, min(count, start + CHUNK))
        g, t, im = _evaluate(terms_for_chunk, frame, planes, index)
        norms[index], trace[index] = g, t
        imag = max(imag, im)
    return SampleSet(scale, planes.s_frak, norms, trace, imag)


def _certificate(family: str, label: str, make_set, seed: int, samples: int, extras=None) -> BoundCertificate:
    cert = make_set(np.random.default_rng(seed), samples)
    valid = make_set(np.random.default_rng(seed + 1_000_003), samples)
    cert_max = {k: float(v.max()) for k, v in cert.required().items()}
    k_emp = SAFETY_FACTOR * max(max(cert_max.values()), 1.0)
    valid_max = {k: float(v.max()) for k, v in valid.required().items()}
    return BoundCertificate(family, label, k_emp, cert_max, valid_max, samples, max(cert.imag_residue, valid.imag_residue), extras or {})


def _log_uniform_scale(rng: np.random.Generator, count: int, low: float = 1e-3, high: float = 0.999) -> np.ndarray:
    return np.exp(rng.uniform(np.log(low), np.log(high), count))


def _stenzel_pool(n: int, pool: int, rng: np.random.Generator, low: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Log-spaced radii with a random sub-step offset, and their exact ``rho`` (all below 1)."""
    r_top = stenzel.r_of_rho(0.999, n)
    log_step = (np.log(r_top) - np.log(low)) / pool
    radii = np.exp(np.log(low) + log_step * (np.arange(pool) + rng.uniform(0.0, 1.0)))
    radii = radii[radii < r_top]
    segments = [stenzel.rho_segment(a, b, n) for a, b in zip(np.concatenate([[0.0], radii[:-1]]), radii)]
    return radii, np.cumsum(segments)


def certify_stenzel(n: int, samples: int = DEFAULT_SAMPLES, seed: int = 0, pool: int = 250) -> BoundCertificate:
    """Gradient/trace constant for the Stenzel calibration form with ``rho < 1``.

    The frame data depends only on the radius, so a pool of ``pool``
    log-spaced radii is built and each sample pairs a random pool radius with
    a random plane.
    """
    frame = FrameIndexSet(n, n)

    def make_set(rng, count):
        radii, rhos = _stenzel_pool(n, pool, rng)
        coefs = np.empty((radii.shape[0], 3))
        for i, r in enumerate(radii):
            state = stenzel.radial_state(float(r), n, with_rho=False)
            coefs[i] = state.A, state.B, state.C
        which = rng.integers(0, radii.shape[0], count)
        planes = random_planes(frame, count, rng)

        def terms(index):
            picked = coefs[which[index]]
            return stenzel.omega_terms(n, picked[:, 0], picked[:, 1], picked[:, 2])

        return _collect(terms, frame, planes, rhos[which])

    return _certificate("stenzel", f"n={n}", make_set, seed, samples)


def certify_calabi(n: int, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> BoundCertificate:
    """Gradient/trace constant for the Calabi calibration form with ``rho < 1``."""
    frame = FrameIndexSet(2 * n, 2 * n)
    grid_r = np.linspace(0.0, 1.2, 4001)
    grid_rho = calabi.rho_of_r_array(grid_r)

    def make_set(rng, count):
        rhos = _log_uniform_scale(rng, count)
        radii = np.interp(rhos, grid_rho, grid_r)
        scale = calabi.rho_of_r_array(radii)
        planes = random_planes(frame, count, rng)

        def terms(index):
            return calabi.omega_terms(n, radii[index])

        return _collect(terms, frame, planes, scale)

    return _certificate("calabi", f"n={n}", make_set, seed, samples)


def certify_bryant_salamon(space: bryant_salamon.BSSpace, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> BoundCertificate:
    """Gradient/trace constant with scale ``sqrt(s)`` and ``s < 1``."""
    frame = space.frame

    def make_set(rng, count):
        roots = _log_uniform_scale(rng, count)
        direction = rng.standard_normal((count, space.m))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        y = roots[:, None] * direction
        planes = random_planes(frame, count, rng)

        def terms(index):
            return bryant_salamon.omega_terms(space, y[index])

        return _collect(terms, frame, planes, roots)

    return _certificate("bryant_salamon", f"{space.id} kappa={space.kappa:g}", make_set, seed, samples)

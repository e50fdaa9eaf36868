"""Closed-contour integrals of ``H(s, w) = G(s) / (s + i w)`` in the right half-plane.

The path runs up the imaginary axis from ``-iR`` to ``iR``, detouring into
the right half-plane around the pole ``s0 = -i w`` on a small semicircle of
radius ``eps`` (counterclockwise about ``s0``), and closes with the large
semicircle ``|s| = R`` traversed from ``theta = pi/2`` to ``-pi/2``. For a
transform analytic on the closed right half-plane the four pieces sum to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .quadrature import DEFAULT_CONFIG, QuadratureConfig, graded_edges, quad_complex

Transform = Callable[[complex], complex]


class ContourGeometryError(ValueError):
    """Contour parameters violate the path layout."""


class PoleEvaluationError(ZeroDivisionError):
    """``H`` was evaluated exactly at its pole."""


@dataclass(frozen=True)
class ContourSpec:
    """Path parameters.

    Besides ``R > eps > 0`` the small detour must stay in the inner half of
    the large arc: ``|omega| + eps <= R / 2``.
    """

    omega: float
    radius_R: float
    epsilon: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.omega, self.radius_R, self.epsilon)):
            raise ContourGeometryError("contour parameters must be finite")
        if not self.radius_R > self.epsilon > 0:
            raise ContourGeometryError(
                f"need R > eps > 0, got R={self.radius_R}, eps={self.epsilon}")
        if abs(self.omega) + self.epsilon > 0.5 * self.radius_R:
            raise ContourGeometryError(
                f"|omega| + eps = {abs(self.omega) + self.epsilon} exceeds R/2 = "
                f"{0.5 * self.radius_R}; the pole detour would crowd the large arc")


@dataclass(frozen=True)
class ContourBreakdown:
    segment_lower: complex
    segment_upper: complex
    small_arc: complex
    large_arc: complex
    errors: tuple[float, float, float, float]

    @property
    def total(self) -> complex:
        return self.segment_lower + self.segment_upper + self.small_arc + self.large_arc

    @property
    def error_budget(self) -> float:
        """Sum of quadrature error estimates plus a floating-point floor."""
        parts = (self.segment_lower, self.segment_upper, self.small_arc, self.large_arc)
        return sum(self.errors) + 64 * np.finfo(float).eps * sum(abs(p) for p in parts)

    def closes(self, factor: float = 10.0) -> bool:
        return abs(self.total) <= factor * self.error_budget


def integrand_H(laplace: Transform, s: complex, omega: float) -> complex:
    s = complex(s)
    den = s + 1j * omega
    if den == 0:
        raise PoleEvaluationError(f"H evaluated at its pole s = {-1j * omega}")
    return complex(laplace(s)) / den


def _line(laplace, omega, y0, y1, cfg, pole_side):
    """Integral of H along s = i y, y from y0 to y1 (ds = i dy)."""
    def f(y):
        return integrand_H(laplace, 1j * y, omega) * 1j

    # refine toward the end that sits next to the pole
    edges = graded_edges(y0, y1, pole_side, depth=40)
    total, err = 0j, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = quad_complex(f, a, b, cfg)
        total += v
        err += e
    return total, err


def _small_arc(laplace, omega, eps, cfg):
    s0 = -1j * omega

    def f(phi):
        z = eps * np.exp(1j * phi)
        return integrand_H(laplace, s0 + z, omega) * 1j * z

    return quad_complex(f, -math.pi / 2, math.pi / 2, cfg)


def _angle_edges(depth: int = 30) -> list[float]:
    """Angles in [-pi/2, pi/2] graded toward both ends of the large arc."""
    right = graded_edges(0.0, math.pi / 2, "right", depth=depth)
    return sorted({*(-x for x in right), *right})


def _large_arc(laplace, omega, R, cfg):
    def f(theta):
        z = R * np.exp(1j * theta)
        return integrand_H(laplace, z, omega) * 1j * z

    total, err = 0j, 0.0
    edges = _angle_edges()
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = quad_complex(f, a, b, cfg)
        total += v
        err += e
    # the arc runs from +pi/2 down to -pi/2
    return -total, err


def integrate_contour(laplace: Transform, spec: ContourSpec,
                      cfg: QuadratureConfig = DEFAULT_CONFIG) -> ContourBreakdown:
    w, R, eps = spec.omega, spec.radius_R, spec.epsilon
    lower, e1 = _line(laplace, w, -R, -w - eps, cfg, "right")
    upper, e2 = _line(laplace, w, -w + eps, R, cfg, "left")
    small, e3 = _small_arc(laplace, w, eps, cfg)
    large, e4 = _large_arc(laplace, w, R, cfg)
    return ContourBreakdown(segment_lower=lower, segment_upper=upper, small_arc=small,
                            large_arc=large, errors=(e1, e2, e3, e4))


def small_arc_limit(laplace: Transform, omega: float, epsilon_sequence: Sequence[float],
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> list[complex]:
    """Deviation of the small-arc integral from ``i*pi*G(-i w)`` for each radius."""
    eps = [float(e) for e in epsilon_sequence]
    if not eps or eps[-1] <= 0 or any(b >= a for a, b in zip(eps[:-1], eps[1:])):
        raise ValueError("epsilon_sequence must be positive and decreasing")
    target = 1j * math.pi * complex(laplace(-1j * omega))
    return [_small_arc(laplace, omega, e, cfg)[0] - target for e in eps]


def large_arc_decay(laplace: Transform, omega: float, R_sequence: Sequence[float],
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> list[float]:
    """Magnitude of the large-arc integral for each radius."""
    Rs = [float(r) for r in R_sequence]
    if any(b <= a for a, b in zip(Rs[:-1], Rs[1:])):
        raise ValueError("R_sequence must be increasing")
    if any(r <= 2 * abs(omega) for r in Rs):
        raise ContourGeometryError("every R must exceed 2|omega|")
    return [abs(_large_arc(laplace, omega, r, cfg)[0]) for r in Rs]


def kernel_ratio(omega: float, R: float, theta) -> np.ndarray:
    """``|s / (s + i w)|`` at ``s = R exp(i theta)``."""
    s = R * np.exp(1j * np.asarray(theta, dtype=float))
    return np.abs(s / (s + 1j * omega))


def kernel_threshold(omega: float, ell: float) -> float:
    """Radius beyond which ``|s/(s + i w)| <= ell`` on the whole right half-circle."""
    return ell * abs(omega) / (ell - 1)


def kernel_bound_check(omega: float, ell: float, R: float,
                       theta_samples: Sequence[float]) -> bool:
    """True iff ``|s/(s + i w)| <= ell`` at every sampled ``s = R exp(i theta)``.

    A relative slack of 1e-12 absorbs rounding at the threshold radius, where
    the bound is attained in the limit ``theta -> -sign(w) pi/2``.
    """
    if not ell > 1:
        raise ValueError("ell must exceed 1")
    th = np.asarray(theta_samples, dtype=float)
    if np.any(np.abs(th) >= math.pi / 2):
        raise ValueError("theta samples must lie in (-pi/2, pi/2)")
    return bool(np.all(kernel_ratio(omega, R, th) <= ell * (1 + 1e-12)))

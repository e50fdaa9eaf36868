"""Quadrature helpers shared by the transform and contour code.

Complex integrands are handled by QUADPACK (``scipy.integrate.quad``) on a
list of cells; the caller decides where the cells go (support edges, graded
meshes toward singular endpoints, half-periods of an oscillation).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    """Raised when an integral cannot be brought under its error budget."""


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 500
    truncation_time: Optional[float] = None

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.truncation_time is not None and not self.truncation_time > 0:
            raise ValueError("truncation_time must be positive")


DEFAULT_CONFIG = QuadratureConfig()


def quad_complex(f: Callable[[float], complex], a: float, b: float,
                 cfg: QuadratureConfig = DEFAULT_CONFIG,
                 points: Optional[Sequence[float]] = None) -> tuple[complex, float]:
    """Integrate a complex scalar function over ``[a, b]``.

    Returns ``(value, abserr)``. Integration warnings from QUADPACK are turned
    into :class:`QuadratureError` when the reported error exceeds the budget.
    """
    if a == b:
        return 0j, 0.0
    kw = dict(epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions,
              complex_func=True, full_output=True)
    if points is not None:
        inner = [p for p in points if a < p < b]
        if inner:
            kw["points"] = inner
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, _info = integrate.quad(f, a, b, **kw)
    # complex_func=True reports the real and imaginary error estimates as a complex
    abserr = math.hypot(complex(err).real, complex(err).imag)
    if not np.isfinite(value):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]")
    budget = max(cfg.abs_tol, cfg.rel_tol * abs(value))
    if abserr > 100 * budget:
        raise QuadratureError(
            f"quadrature on [{a}, {b}] did not converge: error {abserr:.3e} "
            f"vs budget {budget:.3e}")
    return complex(value), abserr


def integrate_cells(f: Callable[[float], complex], edges: Iterable[float],
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> tuple[complex, float]:
    """Sum :func:`quad_complex` over consecutive cells given by ``edges``."""
    edges = list(edges)
    total = 0j
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = quad_complex(f, a, b, cfg)
        total += v
        err += e
    return total, err


def graded_edges(a: float, b: float, toward: str, depth: int = 60,
                 ratio: float = 0.5) -> list[float]:
    """Cell edges on ``[a, b]`` refined geometrically toward one endpoint.

    ``toward`` is ``"left"`` or ``"right"``. The innermost cell has width
    ``(b - a) * ratio**depth``; it is kept, so the edges still cover ``[a, b]``.
    """
    width = b - a
    offsets = [width * ratio ** k for k in range(depth + 1)] + [0.0]
    if toward == "left":
        return sorted({a + o for o in offsets})
    if toward == "right":
        return sorted({b - o for o in offsets})
    raise ValueError("toward must be 'left' or 'right'")


# Gauss-Legendre composite rule, used where thousands of cells are needed
# (integrability probes over [0, 1e6]) and per-cell QUADPACK calls are too slow.
_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def composite_gauss(f: Callable[[np.ndarray], np.ndarray], edges: np.ndarray,
                    order: int = 20, chunk: int = 200_000) -> float:
    """Fixed-order Gauss-Legendre over every cell in ``edges``; ``f`` is vectorized."""
    x, w = _gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    total = 0.0
    ncell = len(edges) - 1
    step = max(1, chunk // order)
    for start in range(0, ncell, step):
        lo = edges[start:start + step]
        hi = edges[start + 1:start + step + 1]
        n = min(len(lo), len(hi))
        lo, hi = lo[:n], hi[:n]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes = mid[:, None] + half[:, None] * x[None, :]
        with np.errstate(over="ignore", invalid="ignore"):
            vals = f(nodes)
            total += float(np.sum(half[:, None] * w[None, :] * vals))
    return total


def aitken(seq: Sequence[complex]) -> list[complex]:
    """One Aitken delta-squared pass; the output is two elements shorter."""
    out = []
    for x0, x1, x2 in zip(seq[:-2], seq[1:-1], seq[2:]):
        denom = x2 - 2 * x1 + x0
        if denom == 0:
            out.append(x2)
        else:
            out.append(x2 - (x2 - x1) ** 2 / denom)
    return out


def iterated_aitken(partial_sums: Sequence[complex], passes: int = 4) -> tuple[complex, float]:
    """Extrapolate the limit of a slowly converging sequence of partial sums.

    Runs up to ``passes`` Aitken sweeps (fewer if the sequence runs short).
    The error estimate is the spread of the last two extrapolants.
    """
    seq = list(partial_sums)
    if len(seq) < 4:
        raise ValueError("need at least four partial sums")
    for _ in range(passes):
        if len(seq) < 4:
            break
        seq = aitken(seq)
    return seq[-1], abs(seq[-1] - seq[-2])

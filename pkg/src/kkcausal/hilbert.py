"""Kramers-Kronig reconstruction with two independent Hilbert-transform engines.

For the spectrum ``G(w) = G'(w) + i G''(w)`` of a causal, absolutely
integrable response::

    G'(w)  =  (1/pi) P int G''(nu) / (nu - w) dnu
    G''(w) = -(1/pi) P int G'(nu)  / (nu - w) dnu

:func:`pv_hilbert` evaluates ``(1/pi) P int g(nu) / (nu - w) dnu`` by
singularity subtraction on the sampled grid plus an analytic tail;
:func:`spectral_hilbert` applies a signum multiplier in the conjugate (time)
domain with FFTs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate, signal as sps, special
from scipy.interpolate import CubicSpline

from .catalog import CausalSignal
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .spectra import NO_TAIL, RATIONAL_1, FrequencyGrid, Spectrum, TailModel
from .transforms import NotAbsolutelyIntegrable, fourier_transform


class Engine(str, Enum):
    PV = "PV"
    SPECTRAL = "Spectral"


class Direction(str, Enum):
    REAL_FROM_IMAG = "RealFromImag"
    IMAG_FROM_REAL = "ImagFromReal"


class KKVerdict(str, Enum):
    CONSISTENT = "Consistent"
    INCONSISTENT = "Inconsistent"
    INCONCLUSIVE = "Inconclusive"


class TailModelError(ValueError):
    """No tail model was given but the truncated tail is not negligible."""


class DegenerateSpectrum(ValueError):
    """The spectrum is identically zero."""


@dataclass(frozen=True)
class Thresholds:
    consistent_below: float = 0.05
    inconsistent_above: float = 0.25

    def __post_init__(self):
        if not 0 < self.consistent_below <= self.inconsistent_above:
            raise ValueError("need 0 < consistent_below <= inconsistent_above")

    def classify(self, residual: float) -> KKVerdict:
        if not math.isfinite(residual):
            return KKVerdict.INCONCLUSIVE
        if residual < self.consistent_below:
            return KKVerdict.CONSISTENT
        if residual > self.inconsistent_above:
            return KKVerdict.INCONSISTENT
        return KKVerdict.INCONCLUSIVE


DEFAULT_THRESHOLDS = Thresholds()


# ---------------------------------------------------------------------------
# tail model


@dataclass(frozen=True)
class TailFit:
    order: Optional[float]
    c_left: float
    c_right: float
    misfit: float


def fit_tail(omegas: np.ndarray, g: np.ndarray, tail: TailModel) -> TailFit:
    """Least-squares ``c`` for ``g ~ c / |nu|**order`` on each outer strip.

    ``misfit`` is the worse of the two strips' relative RMS deviations.
    """
    if tail.is_none:
        return TailFit(None, 0.0, 0.0, 0.0)
    lo, hi = omegas[0], omegas[-1]
    if not lo < 0 < hi:
        raise ValueError("a rational tail model needs a grid straddling omega = 0")
    m = max(2, int(math.ceil(tail.fit_fraction * len(omegas))))
    out = []
    for sl in (slice(0, m), slice(len(omegas) - m, None)):
        u = np.abs(omegas[sl]) ** (-tail.order)
        y = g[sl]
        c = float(y @ u / (u @ u))
        scale = math.sqrt(float(y @ y) / len(y))
        miss = math.sqrt(float(np.mean((y - c * u) ** 2))) / scale if scale > 0 else 0.0
        out.append((c, miss))
    return TailFit(tail.order, out[0][0], out[1][0], max(out[0][1], out[1][1]))


def _tail_integral_right(order, edge, w):
    """``int_edge^inf nu**-order / (nu - w) dnu`` for ``edge > 0`` and ``w < edge``.

    Expanding ``1/(nu - w)`` in powers of ``w/nu`` gives
    ``edge**-order / order * 2F1(1, order; order + 1; w / edge)``, which
    reduces to ``-log(1 - x) / (x edge)`` for order 1. At ``w = edge`` the
    integral diverges and ``inf`` is returned.
    """
    x = np.asarray(w, dtype=float) / edge
    with np.errstate(divide="ignore", invalid="ignore"):
        val = special.hyp2f1(1.0, order, order + 1.0, np.minimum(x, 1.0))
    val = np.where(x >= 1.0, np.inf, val)
    return val * edge ** (-order) / order


def tail_pv(fit: TailFit, lo: float, hi: float, w) -> np.ndarray:
    """``(1/pi)`` times the PV integral of the fitted tails, at frequencies ``w``.

    Right side: ``c_R int_hi^inf nu^-p / (nu - w)``. Left side, with
    ``mu = -nu``: ``-c_L int_|lo|^inf mu^-p / (mu + w)``.
    """
    w = np.asarray(w, dtype=float)
    if fit.order is None:
        return np.zeros_like(w)
    right = fit.c_right * _tail_integral_right(fit.order, hi, w)
    left = -fit.c_left * _tail_integral_right(fit.order, -lo, -w)
    return (right + left) / math.pi


# ---------------------------------------------------------------------------
# principal-value engine

Component = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def _pv_samples(g: np.ndarray, grid: FrequencyGrid, w: np.ndarray, fit: TailFit,
                chunk: int = 256) -> np.ndarray:
    nu = grid.omegas
    spline = CubicSpline(nu, g)
    g_w = spline(w)
    dg_w = spline(w, 1)
    # trapezoid weights on the uniform grid
    wts = np.full(len(nu), grid.spacing)
    wts[0] = wts[-1] = 0.5 * grid.spacing
    out = np.empty(len(w))
    for start in range(0, len(w), chunk):
        ws = w[start:start + chunk, None]
        diff = nu[None, :] - ws
        with np.errstate(divide="ignore", invalid="ignore"):
            k = (g[None, :] - g_w[start:start + chunk, None]) / diff
        hit = diff == 0
        if np.any(hit):
            rows, cols = np.nonzero(hit)
            k[rows, cols] = dg_w[start + rows]
        out[start:start + chunk] = k @ wts
    log_term = g_w * np.log((grid.omega_max - w) / (w - grid.omega_min))
    return (out + log_term) / math.pi + tail_pv(fit, grid.omega_min, grid.omega_max, w)


def _pv_callable(g: Callable, grid: FrequencyGrid, w: np.ndarray, fit: TailFit,
                 cfg: QuadratureConfig) -> np.ndarray:
    lo, hi = grid.omega_min, grid.omega_max
    out = np.empty(len(w))
    for i, wi in enumerate(w):
        gw = float(g(np.array(wi)))

        def k(nu):
            return (float(g(np.array(nu))) - gw) / (nu - wi)

        a, _ = integrate.quad(k, lo, wi, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                              limit=cfg.max_subdivisions)
        b, _ = integrate.quad(k, wi, hi, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                              limit=cfg.max_subdivisions)
        out[i] = (a + b + gw * math.log((hi - wi) / (wi - lo))) / math.pi
    return out + tail_pv(fit, lo, hi, w)


def pv_hilbert(component: Component, omega, grid: FrequencyGrid,
               tail: TailModel = RATIONAL_1, tail_tol: float = 1e-3,
               cfg: QuadratureConfig = DEFAULT_CONFIG):
    """``(1/pi) P int g(nu) / (nu - omega) dnu`` by singularity subtraction.

    ``component`` is either samples on ``grid`` or a vectorized callable (in
    which case ``grid`` only supplies the integration span and the strips used
    to fit the tail). Over the span the regular integrand
    ``(g(nu) - g(omega)) / (nu - omega)`` is integrated (trapezoid rule for
    samples, adaptive quadrature for callables), the subtracted pole gives
    ``g(omega) log((max - omega)/(omega - min))``, and the tail model supplies
    the rest of the real line.

    With ``tail=NO_TAIL`` a :class:`TailModelError` is raised when the
    contribution a Rational(1) tail would have made exceeds ``tail_tol``.
    """
    scalar = np.ndim(omega) == 0
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(w <= grid.omega_min) or np.any(w >= grid.omega_max):
        raise ValueError("omega must lie strictly inside the grid")
    nu = grid.omegas
    samples = np.asarray(component(nu) if callable(component) else component, dtype=float)
    if samples.shape != nu.shape:
        raise ValueError(f"expected {len(nu)} samples, got shape {samples.shape}")
    if tail.is_none:
        fit = TailFit(None, 0.0, 0.0, 0.0)
        if grid.omega_min < 0 < grid.omega_max:
            probe = fit_tail(nu, samples, RATIONAL_1)
            est = np.max(np.abs(tail_pv(probe, grid.omega_min, grid.omega_max, w)))
        else:
            est = max(abs(samples[0]), abs(samples[-1]))
        if est > tail_tol:
            raise TailModelError(
                f"truncated tail contributes about {est:.3e} > {tail_tol:.1e}; supply a tail model")
    else:
        fit = fit_tail(nu, samples, tail)
    if callable(component):
        out = _pv_callable(component, grid, w, fit, cfg)
    else:
        out = _pv_samples(samples, grid, w, fit)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# spectral engine


def lattice_kernel(L: int) -> np.ndarray:
    """Circular layout of the discrete PV kernel ``(1 - (-1)^d) / (pi d)``.

    Lags run over ``|d| < L/2``; the kernel vanishes at ``d = 0`` and at every
    even lag.
    """
    d = np.arange(L)
    d = np.where(d < L // 2, d, d - L).astype(float)
    h = np.zeros(L)
    odd = np.abs(d) % 2 == 1
    h[odd] = 2.0 / (math.pi * d[odd])
    return h


def hilbert_multiplier(L: int) -> np.ndarray:
    """Conjugate-domain multiplier of length ``L``: a smoothed ``-i sgn(k)``.

    It is the DFT of :func:`lattice_kernel`, whose transform on the infinite
    lattice is exactly ``-i sgn(k)``. Using it instead of the bare signum
    makes the circular product reproduce the non-periodic lattice sum for
    every lag below ``L/2``, rather than the ``cot`` kernel of a periodic
    transform that drifts from ``1/d`` at long range.
    """
    if L % 2:
        raise ValueError("multiplier length must be even")
    return np.fft.fft(lattice_kernel(L))


def _fft_hilbert(g: np.ndarray, taper: float, pad_factor: int) -> np.ndarray:
    """Standard discrete Hilbert transform ``(1/pi) P sum g / (w - nu)`` via FFT."""
    n = len(g)
    L = pad_factor * n
    x = np.zeros(L)
    x[:n] = g * sps.windows.tukey(n, taper) if taper > 0 else g
    return np.fft.ifft(np.fft.fft(x) * hilbert_multiplier(L)).real[:n]


def _rational1_model(fit: TailFit, w: np.ndarray, half_width: float, spacing: float):
    """Smooth stand-in sharing the fitted ``1/|nu|`` tails, and its PV transform.

    With ``A = (c_R - c_L)/2`` and ``E = (c_R + c_L)/2`` the model is
    ``A nu/(nu^2 + a^2) + E / sqrt(nu^2 + a^2)``, whose transform
    ``(1/pi) P int m(nu)/(nu - w)`` is
    ``A a/(w^2 + a^2) - (2E/pi) asinh(w/a) / sqrt(w^2 + a^2)``.
    """
    a = max(half_width / 25, 4 * spacing)
    A = 0.5 * (fit.c_right - fit.c_left)
    E = 0.5 * (fit.c_right + fit.c_left)
    r2 = w * w + a * a
    model = A * w / r2 + E / np.sqrt(r2)
    transform = A * a / r2 - (2 * E / math.pi) * np.arcsinh(w / a) / np.sqrt(r2)
    return model, transform


def spectral_hilbert(component: np.ndarray, direction: Direction,
                     omega: Optional[np.ndarray] = None, tail: TailModel = NO_TAIL,
                     taper: float = 0.1, pad_factor: int = 4) -> np.ndarray:
    """FFT-based Kramers-Kronig reconstruction of one spectrum component.

    The samples are tapered with a Tukey window (``taper`` is the tapered
    fraction), zero-padded to ``pad_factor`` times their length and
    multiplied by the signum multiplier of :func:`hilbert_multiplier` in the
    conjugate domain. That yields the standard transform ``(1/pi) P int g(nu) / (w - nu) dnu``; the real part
    is minus it applied to the imaginary part, the imaginary part is plus it
    applied to the real part.

    Without ``omega`` the samples are transformed as they stand. With
    ``omega`` (the uniform sample frequencies) and a rational ``tail``:

    * order 1: a smooth function with the same fitted ``1/|nu|`` tails and a
      closed-form transform is subtracted first and its transform added
      back, so the FFT only sees a remainder that decays faster;
    * other orders: the tail beyond the grid is added analytically.
    """
    g = np.asarray(component, dtype=float)
    if pad_factor < 2:
        raise ValueError("pad_factor must be at least 2 to keep the lattice sum from wrapping")
    direction = Direction(direction)
    sign = 1.0 if direction is Direction.REAL_FROM_IMAG else -1.0
    if omega is None:
        if not tail.is_none:
            raise ValueError("a tail model needs the sample frequencies")
        return -sign * _fft_hilbert(g, taper, pad_factor)
    w = np.asarray(omega, dtype=float)
    if w.shape != g.shape:
        raise ValueError("omega and component lengths differ")
    d = np.diff(w)
    if np.max(np.abs(d - d[0])) > 1e-9 * abs(d[0]):
        raise ValueError("spectral engine needs a uniform grid")
    if tail.is_none:
        return -sign * _fft_hilbert(g, taper, pad_factor)
    fit = fit_tail(w, g, tail)
    if fit.order == 1.0:
        model, model_t = _rational1_model(fit, w, 0.5 * (w[-1] - w[0]), d[0])
        pv = -_fft_hilbert(g - model, taper, pad_factor) + model_t
    else:
        pv = -_fft_hilbert(g, taper, pad_factor) + tail_pv(fit, w[0], w[-1], w)
    return sign * pv


# ---------------------------------------------------------------------------
# consistency checks


@dataclass(frozen=True)
class KKReport:
    engine: Engine
    residual_rel_l2_real: float
    residual_rel_l2_imag: float
    max_abs_real: float
    max_abs_imag: float
    verdict: KKVerdict
    thresholds: Thresholds
    residual_rel_l2_combined: float
    tail_model: str = "None"
    tail_misfit: float = 0.0
    reconstructed_real: np.ndarray = field(default=None, repr=False, compare=False)
    reconstructed_imag: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def residual(self) -> float:
        """The larger of the two relative residuals (drives the verdict)."""
        return max(self.residual_rel_l2_real, self.residual_rel_l2_imag)

    def to_dict(self) -> dict:
        return {
            "engine": self.engine.value,
            "residual_rel_l2_real": self.residual_rel_l2_real,
            "residual_rel_l2_imag": self.residual_rel_l2_imag,
            "max_abs_real": self.max_abs_real,
            "max_abs_imag": self.max_abs_imag,
            "residual_rel_l2_combined": self.residual_rel_l2_combined,
            "tail_model": self.tail_model,
            "tail_misfit": self.tail_misfit,
            "thresholds": {"consistent_below": self.thresholds.consistent_below,
                           "inconsistent_above": self.thresholds.inconsistent_above},
            "verdict": self.verdict.value,
        }


def reconstruct(spectrum: Spectrum, engine: Engine = Engine.PV) -> tuple[np.ndarray, np.ndarray]:
    """Rebuild (real, imag) from (imag, real). End points are NaN for the PV engine."""
    engine = Engine(engine)
    grid = spectrum.grid
    w = grid.omegas
    re, im = spectrum.real, spectrum.imag
    inner = w[1:-1]
    if engine is Engine.PV:
        rec_re = np.full(len(w), np.nan)
        rec_im = np.full(len(w), np.nan)
        rec_re[1:-1] = pv_hilbert(im, inner, grid, spectrum.tail_model)
        rec_im[1:-1] = -pv_hilbert(re, inner, grid, spectrum.tail_model)
        return rec_re, rec_im
    rec_re = spectral_hilbert(im, Direction.REAL_FROM_IMAG, w, spectrum.tail_model)
    rec_im = spectral_hilbert(re, Direction.IMAG_FROM_REAL, w, spectrum.tail_model)
    return rec_re, rec_im


def _rel(diff, given, whole):
    ng = float(np.linalg.norm(given))
    denom = ng if ng > 0 else float(np.linalg.norm(whole))
    return float(np.linalg.norm(diff)) / denom


def kk_check(spectrum: Spectrum, engine: Engine = Engine.PV,
             thresholds: Thresholds = DEFAULT_THRESHOLDS) -> KKReport:
    """Reconstruct each component from the other and compare.

    Residuals are relative L2 norms over the interior grid points (the PV
    engine cannot evaluate at the grid ends). A component that is zero on
    the grid is measured against the norm of the whole spectrum instead.
    An all-zero spectrum yields an Inconclusive report.
    """
    engine = Engine(engine)
    tail_name = str(spectrum.tail_model)
    inner = slice(1, -1)
    re, im = spectrum.real[inner], spectrum.imag[inner]
    whole = spectrum.values[inner]
    if not np.any(spectrum.values):
        nan = float("nan")
        return KKReport(engine, nan, nan, nan, nan, KKVerdict.INCONCLUSIVE, thresholds,
                        nan, tail_name, 0.0, None, None)
    misfit = 0.0
    if not spectrum.tail_model.is_none:
        w = spectrum.omegas
        misfit = max(fit_tail(w, spectrum.real, spectrum.tail_model).misfit,
                     fit_tail(w, spectrum.imag, spectrum.tail_model).misfit)
    rec_re, rec_im = reconstruct(spectrum, engine)
    d_re = rec_re[inner] - re
    d_im = rec_im[inner] - im
    r_re = _rel(d_re, re, whole)
    r_im = _rel(d_im, im, whole)
    verdict = thresholds.classify(max(r_re, r_im))
    # sqrt(|dRe|^2 + |dIm|^2) / |G| over the evaluated points
    combined = math.sqrt(float(d_re @ d_re + d_im @ d_im)) / float(np.linalg.norm(whole))
    return KKReport(engine, r_re, r_im, float(np.max(np.abs(d_re))),
                    float(np.max(np.abs(d_im))), verdict, thresholds, combined, tail_name,
                    misfit, rec_re, rec_im)


def convolution_form_residual(spectrum: Spectrum) -> float:
    """``|chi * P(1/w) + i pi chi| / |chi|`` with a discrete PV kernel.

    The convolution uses taps ``1/k`` (``Delta w / (k Delta w)``) with the
    singular tap set to zero, plus the spectrum's tail model for the part of
    the real line outside the grid. Norms are taken over interior points.
    """
    chi = spectrum.values
    if not np.any(chi):
        raise DegenerateSpectrum("the spectrum is identically zero")
    n = len(chi)
    k = np.arange(-(n - 1), n, dtype=float)
    kernel = np.zeros_like(k)
    nz = k != 0
    kernel[nz] = 1.0 / k[nz]
    conv = sps.fftconvolve(chi, kernel)[n - 1:2 * n - 1][1:-1]
    grid = spectrum.grid
    w = grid.omegas
    # beyond the grid: int g(nu)/(w - nu) dnu = -pi * tail_pv
    for part, unit in ((spectrum.real, 1.0), (spectrum.imag, 1j)):
        fit = fit_tail(w, part, spectrum.tail_model)
        conv = conv - unit * math.pi * tail_pv(fit, grid.omega_min, grid.omega_max, w[1:-1])
    r = conv + 1j * math.pi * chi[1:-1]
    return float(np.linalg.norm(r) / np.linalg.norm(chi[1:-1]))


def spectrum_from_signal(signal: CausalSignal, grid: FrequencyGrid,
                         cfg: QuadratureConfig = DEFAULT_CONFIG) -> Spectrum:
    """Sample the Fourier transform of an L1 catalog signal on ``grid``.

    The tail model follows the signal's known high-frequency decay
    (``Rational(1)`` for a ``1/w`` decay).
    """
    values = fourier_transform(signal, grid.omegas, cfg)
    order = signal.fourier_decay_order
    tail = TailModel.rational(order) if order is not None else NO_TAIL
    return Spectrum(grid, values, tail)


def control_spectrum(signal: CausalSignal, grid: FrequencyGrid,
                     tail: TailModel = RATIONAL_1) -> Spectrum:
    """Formal spectrum of a negative-control signal (constant, sign, step)."""
    if signal.formal_spectrum is None:
        raise NotAbsolutelyIntegrable(f"{signal.id} has no formal spectrum")
    return Spectrum(grid, signal.formal_spectrum(grid.omegas), tail)

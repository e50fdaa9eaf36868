"""Registry of test signals and numerical L1/L2 membership probes.

Every signal is defined in code with its ground-truth metadata: whether it is
causal, whether it is absolutely / square integrable, where its Laplace
integral starts converging, and closed forms of its transforms when they
exist. The catalog contains well-behaved causal responses, the two classical
counterexamples separating L1 from L2, and three negative controls (the
Heaviside step, a constant and the sign function).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy import optimize, special

from .quadrature import composite_gauss


class Membership(str, Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "Unknown"


class Verdict(str, Enum):
    YES = "Yes"
    NO = "No"
    INCONCLUSIVE = "Inconclusive"


class CatalogError(ValueError):
    """Unknown catalog id or inadmissible parameters."""


class IntegrationFailure(RuntimeError):
    """Non-finite integrand away from the declared singular points."""


# value returned by inv-sqrt-pulse for 0 <= t < SINGULAR_CLAMP
SINGULAR_CLAMP = 1e-300

DEFAULT_SCHEDULE = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class CausalSignal:
    """A time-domain signal together with what is known about it analytically.

    ``evaluate`` is vectorized over numpy arrays. The remaining optional fields
    drive the numerics: ``log_abs`` gives ``log|f|`` without underflow (needed
    when probing exponentially weighted integrals), ``breakpoints`` are points where the signal or its
    derivative jumps, ``singular_points`` are integrable (or not) blow-ups that
    quadrature must approach on a graded mesh, ``half_period`` aligns cells
    with the zeros of an oscillating factor, and ``tail_bound(T, sigma)``
    bounds ``int_T^inf exp(-sigma t) |f(t)| dt``.
    """

    id: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    causal: bool
    l1_membership: Membership
    l2_membership: Membership
    lambda0: Optional[float] = None
    closed_form_laplace: Optional[Callable[[complex], complex]] = None
    closed_form_fourier: Optional[Callable[[float], complex]] = None
    parameters: Mapping[str, float] = field(default_factory=dict)
    support: tuple[float, float] = (0.0, math.inf)
    breakpoints: tuple[float, ...] = ()
    singular_points: tuple[float, ...] = ()
    half_period: Optional[float] = None
    tail_bound: Optional[Callable[[float, float], float]] = None
    fourier_decay_order: Optional[float] = None
    formal_spectrum: Optional[Callable[[np.ndarray], np.ndarray]] = None
    negative_control: bool = False
    log_abs: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, t):
        return self.evaluate(t)

    @property
    def compact(self) -> bool:
        return math.isfinite(self.support[1]) and math.isfinite(self.support[0])


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares fit of partial integrals to a + b*((T/T_ref)**c - 1)/c."""

    exponent: float
    coefficient: float
    offset: float
    log_slope: float
    rel_rms: float


@dataclass(frozen=True)
class IntegrabilityVerdict:
    l1: Verdict
    l2: Verdict
    l1_partial_integral: float
    l2_partial_integral: float
    t_max_probed: float
    l1_partials: tuple[float, ...] = ()
    l2_partials: tuple[float, ...] = ()
    l1_fit: Optional[GrowthFit] = None
    l2_fit: Optional[GrowthFit] = None


# ---------------------------------------------------------------------------
# signal constructors


def _theta(t):
    return np.where(t >= 0, 1.0, 0.0)


def _exp_decay(alpha: float) -> CausalSignal:
    def f(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            return np.where(t >= 0, np.exp(-alpha * np.maximum(t, 0.0)), 0.0)

    return CausalSignal(
        id="exp-decay", evaluate=f, causal=True,
        l1_membership=Membership.YES, l2_membership=Membership.YES,
        lambda0=-alpha,
        closed_form_laplace=lambda s: 1.0 / (s + alpha),
        closed_form_fourier=lambda w: 1.0 / (alpha - 1j * w),
        parameters=MappingProxyType({"alpha": alpha}),
        tail_bound=lambda T, sig: math.exp(-(sig + alpha) * T) / (sig + alpha),
        fourier_decay_order=1.0,
        log_abs=lambda t: np.where(np.asarray(t) >= 0, -alpha * np.asarray(t), -np.inf),
    )


def _log_abs_damped(t, alpha, omega0):
    with np.errstate(divide="ignore"):
        return np.where(t >= 0, -alpha * t + np.log(np.abs(np.sin(omega0 * t))), -np.inf)


def _damped_oscillator(alpha: float, omega0: float) -> CausalSignal:
    def f(t):
        t = np.asarray(t, dtype=float)
        tp = np.maximum(t, 0.0)
        return np.where(t >= 0, np.exp(-alpha * tp) * np.sin(omega0 * tp), 0.0)

    return CausalSignal(
        id="damped-oscillator", evaluate=f, causal=True,
        l1_membership=Membership.YES, l2_membership=Membership.YES,
        lambda0=-alpha,
        closed_form_laplace=lambda s: omega0 / ((s + alpha) ** 2 + omega0 ** 2),
        closed_form_fourier=lambda w: omega0 / ((alpha - 1j * w) ** 2 + omega0 ** 2),
        parameters=MappingProxyType({"alpha": alpha, "omega0": omega0}),
        half_period=math.pi / omega0,
        tail_bound=lambda T, sig: math.exp(-(sig + alpha) * T) / (sig + alpha),
        fourier_decay_order=2.0,
        log_abs=lambda t: _log_abs_damped(np.asarray(t, dtype=float), alpha, omega0),
    )


def _rect_laplace(s):
    s = complex(s)
    if abs(s) < 1e-8:
        return 1.0 - s / 2 + s * s / 6
    return -np.expm1(-s) / s


def _rect_pulse() -> CausalSignal:
    def f(t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= 0) & (t <= 1), 1.0, 0.0)

    return CausalSignal(
        id="rect-pulse", evaluate=f, causal=True,
        l1_membership=Membership.YES, l2_membership=Membership.YES,
        lambda0=-math.inf,
        closed_form_laplace=_rect_laplace,
        closed_form_fourier=lambda w: _rect_laplace(-1j * w),
        support=(0.0, 1.0), breakpoints=(1.0,),
        tail_bound=lambda T, sig: 0.0,
        fourier_decay_order=1.0,
    )


def _inv_t_tail() -> CausalSignal:
    def f(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 1, 1.0 / np.maximum(t, 1.0), 0.0)

    def tail(T, sig):
        if sig <= 0:
            return math.inf
        return math.exp(-sig * T) / (sig * T)

    return CausalSignal(
        id="inv-t-tail", evaluate=f, causal=True,
        l1_membership=Membership.NO, l2_membership=Membership.YES,
        lambda0=0.0,
        closed_form_laplace=lambda s: complex(special.exp1(complex(s))),
        # L2 limit of the truncated transforms; defined for w != 0 only
        closed_form_fourier=lambda w: complex(special.exp1(complex(-1j * w))),
        support=(1.0, math.inf), breakpoints=(1.0,),
        tail_bound=tail,
    )


def _inv_sqrt_laplace(s):
    s = complex(s)
    if abs(s) < 1e-12:
        return 2.0 + 0j
    r = np.sqrt(s)
    return complex(math.sqrt(math.pi) * special.erf(r) / r)


def _inv_sqrt_pulse() -> CausalSignal:
    def f(t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0) & (t <= 1)
        return np.where(inside, 1.0 / np.sqrt(np.clip(t, SINGULAR_CLAMP, 1.0)), 0.0)

    return CausalSignal(
        id="inv-sqrt-pulse", evaluate=f, causal=True,
        l1_membership=Membership.YES, l2_membership=Membership.NO,
        lambda0=-math.inf,
        closed_form_laplace=_inv_sqrt_laplace,
        closed_form_fourier=lambda w: _inv_sqrt_laplace(-1j * w),
        support=(0.0, 1.0), breakpoints=(1.0,), singular_points=(0.0,),
        tail_bound=lambda T, sig: 0.0,
        fourier_decay_order=0.5,
    )


def _heaviside() -> CausalSignal:
    def tail(T, sig):
        if sig <= 0:
            return math.inf
        return math.exp(-sig * T) / sig

    return CausalSignal(
        id="heaviside", evaluate=lambda t: _theta(np.asarray(t, dtype=float)),
        causal=True,
        l1_membership=Membership.NO, l2_membership=Membership.NO,
        lambda0=0.0,
        closed_form_laplace=lambda s: 1.0 / s,
        tail_bound=tail,
        # principal-value part of the distributional transform (the delta is dropped)
        formal_spectrum=lambda w: 1j / np.asarray(w, dtype=float),
        negative_control=True,
    )


def _constant() -> CausalSignal:
    return CausalSignal(
        id="constant",
        evaluate=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        causal=False,
        l1_membership=Membership.NO, l2_membership=Membership.NO,
        support=(-math.inf, math.inf),
        # a flat spectrum, the constant "transform" that no regular function has
        formal_spectrum=lambda w: np.ones_like(np.asarray(w, dtype=float), dtype=complex),
        negative_control=True,
    )


def _sign() -> CausalSignal:
    return CausalSignal(
        id="sign",
        evaluate=lambda t: np.sign(np.asarray(t, dtype=float)),
        causal=False,
        l1_membership=Membership.NO, l2_membership=Membership.NO,
        support=(-math.inf, math.inf),
        formal_spectrum=lambda w: 2j / np.asarray(w, dtype=float),
        negative_control=True,
    )


def _positive(name):
    def check(v):
        if not (math.isfinite(v) and v > 0):
            raise CatalogError(f"parameter {name} must be finite and > 0, got {v}")
    return check


_REGISTRY: dict[str, tuple[Callable[..., CausalSignal], dict[str, float], dict]] = {
    "exp-decay": (_exp_decay, {"alpha": 1.0}, {"alpha": _positive("alpha")}),
    "damped-oscillator": (_damped_oscillator, {"alpha": 1.0, "omega0": 2.0},
                          {"alpha": _positive("alpha"), "omega0": _positive("omega0")}),
    "rect-pulse": (_rect_pulse, {}, {}),
    "inv-t-tail": (_inv_t_tail, {}, {}),
    "inv-sqrt-pulse": (_inv_sqrt_pulse, {}, {}),
    "heaviside": (_heaviside, {}, {}),
    "constant": (_constant, {}, {}),
    "sign": (_sign, {}, {}),
}

CATALOG_IDS = tuple(_REGISTRY)


def catalog_get(id: str, parameters: Optional[Mapping[str, float]] = None) -> CausalSignal:
    """Instantiate a registered signal; missing parameters take their defaults."""
    try:
        factory, defaults, checks = _REGISTRY[id]
    except KeyError:
        raise CatalogError(f"unknown signal id {id!r}; known: {', '.join(CATALOG_IDS)}") from None
    params = dict(defaults)
    for k, v in (parameters or {}).items():
        if k not in defaults:
            raise CatalogError(f"signal {id!r} has no parameter {k!r}")
        params[k] = float(v)
    for k, v in params.items():
        checks[k](v)
    return factory(**params)


def evaluate(signal: CausalSignal, t: float) -> float:
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    if signal.causal and t < 0:
        return 0.0
    return float(signal.evaluate(np.array(t)))


# ---------------------------------------------------------------------------
# integrability probes


def _piece_edges(a: float, b: float, half_period: Optional[float],
                 grade_from: Optional[float] = None) -> np.ndarray:
    """Cells for a smooth stretch [a, b] of a signal.

    Cells are unit width near the origin and grow geometrically away from it;
    ``grade_from`` (a singular point just outside [a, b]) grades them toward
    that end. An oscillating factor caps the width at one half-period, with
    edges on its zeros.
    """
    if b <= a:
        return np.array([a, b])
    if half_period is not None:
        k0 = math.ceil(a / half_period)
        k1 = math.floor(b / half_period)
        inner = np.arange(k0, k1 + 1, dtype=float) * half_period
        inner = inner[(inner > a) & (inner < b)]
        return np.concatenate(([a], inner, [b]))
    if grade_from is not None:
        # geometric in the distance to the singular point
        d0, d1 = a - grade_from, b - grade_from
        n = max(1, math.ceil(math.log2(d1 / d0)))
        return grade_from + np.geomspace(d0, d1, n + 1)
    edges = [a]
    x = a
    while x < b:
        step = max(1.0, 0.5 * abs(x))
        x = min(b, x + step)
        edges.append(x)
    return np.asarray(edges)


def _domain_pieces(signal: CausalSignal, T: float) -> list[tuple[float, float, Optional[float]]]:
    """Smooth pieces of the probe domain at horizon ``T``.

    The domain is [0, T] (or [-T, T] for non-causal signals) intersected
    with the support, with a (p - 1/T, p + 1/T) hole cut around each singular
    point p. Each piece carries the singular point it abuts, if any.
    """
    lo = 0.0 if signal.causal else -T
    lo = max(lo, signal.support[0])
    hi = min(T, signal.support[1])
    if hi <= lo:
        return []
    cut = 1.0 / T
    cuts = {lo, hi, *[p for p in signal.breakpoints if lo < p < hi]}
    if lo < 0 < hi:
        cuts.add(0.0)
    cuts = sorted(cuts)
    pieces = [(a, b, None) for a, b in zip(cuts[:-1], cuts[1:])]
    for p in signal.singular_points:
        out = []
        for a, b, g in pieces:
            if b <= p - cut or a >= p + cut:
                out.append((a, b, g))
                continue
            if a < p - cut:
                out.append((a, p - cut, p))
            if b > p + cut:
                out.append((p + cut, b, p))
        pieces = out
    return pieces


def _edges_between(signal: CausalSignal, T_prev: float, T: float) -> list[np.ndarray]:
    """Cell edges covering D(T) minus D(T_prev) (D(0) is empty)."""
    def pieces(Tk):
        return _domain_pieces(signal, Tk) if Tk > 0 else []

    new = pieces(T)
    old = pieces(T_prev)
    # subtract old pieces from new ones: both are unions of intervals
    result = []
    for a, b, g in new:
        segs = [(a, b)]
        for c, d, _ in old:
            nxt = []
            for x, y in segs:
                if d <= x or c >= y:
                    nxt.append((x, y))
                    continue
                if x < c:
                    nxt.append((x, c))
                if y > d:
                    nxt.append((d, y))
            segs = nxt
        for x, y in segs:
            if y - x <= 0:
                continue
            grade = None
            if g is not None:
                # grade toward the singular point when the stretch sits next to it
                grade = g if x >= g else None
                if y <= g:
                    mirrored = _piece_edges(-y, -x, signal.half_period, -g)
                    result.append(-mirrored[::-1])
                    continue
            result.append(_piece_edges(x, y, signal.half_period, grade))
    return result


def partial_integrals(signal: CausalSignal, schedule: Sequence[float], power: float = 1.0,
                      rate: float = 0.0) -> np.ndarray:
    """Cumulative integrals of ``exp(-rate t) |f(t)|**power`` over the probe domains.

    Overflow of the exponential weight yields ``inf`` rather than an error:
    an exploding weighted integrand is divergence, not a quadrature failure.
    """
    def integrand(t):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if rate == 0.0:
                return np.abs(signal.evaluate(t)) ** power
            if signal.log_abs is not None:
                log_f = signal.log_abs(t)
            else:
                log_f = np.log(np.abs(signal.evaluate(t)))
            return np.exp(power * log_f - rate * t)

    values = []
    acc = 0.0
    prev = 0.0
    for T in schedule:
        for edges in _edges_between(signal, prev, T):
            part = composite_gauss(integrand, edges)
            if math.isnan(part):
                if rate == 0.0:
                    raise IntegrationFailure(
                        f"non-finite integrand for {signal.id} on [{edges[0]}, {edges[-1]}]")
                part = math.inf
            acc += part
        values.append(acc)
        prev = T
    return np.asarray(values)


def _boxcox(T, T_ref, c):
    r = T / T_ref
    if abs(c) < 1e-9:
        return np.log(r)
    return np.expm1(c * np.log(r)) / c


def fit_growth(schedule: Sequence[float], values: Sequence[float]) -> GrowthFit:
    """Fit the last (up to) five partial integrals to a log and a power model.

    The power model ``a + b*((T/T_ref)**c - 1)/c`` contains the log model as
    ``c -> 0``; ``c < 0`` describes a convergent tail whose remaining mass past
    ``T_ref`` is ``b/|c|``.
    """
    T = np.asarray(schedule[-5:], dtype=float)
    y = np.asarray(values[-5:], dtype=float)
    T_ref = T[-1]
    scale = max(np.max(np.abs(y)), 1e-300)

    def solve(c):
        x = _boxcox(T, T_ref, c)
        A = np.column_stack([np.ones_like(x), x])
        coef, *_ = np.linalg.lstsq(A, y / scale, rcond=None)
        r = A @ coef - y / scale
        return float(r @ r), coef

    grid = np.linspace(-3.0, 3.0, 241)
    sse = [solve(c)[0] for c in grid]
    i = int(np.argmin(sse))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda c: solve(c)[0], bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-6})
        c = float(res.x) if res.fun <= sse[i] else float(grid[i])
    else:
        c = float(grid[i])
    err, (a, b) = solve(c)
    _, (_, b_log) = solve(0.0)
    return GrowthFit(exponent=c, coefficient=float(b * scale), offset=float(a * scale),
                     log_slope=float(b_log * scale),
                     rel_rms=math.sqrt(err / len(T)))


# exponents closer to zero than this count as logarithmic growth
_CONVERGENT_EXPONENT = -0.05


def growth_verdict(schedule: Sequence[float], values: Sequence[float], tol: float
                   ) -> tuple[Verdict, Optional[GrowthFit]]:
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        return Verdict.NO, None
    inc = np.diff(values)
    # plateau: the last increment is below tol and increments are no longer growing
    if len(inc) >= 2 and abs(inc[-1]) <= tol and abs(inc[-1]) <= abs(inc[-2]):
        return Verdict.YES, None
    if len(values) < 3:
        return Verdict.INCONCLUSIVE, None
    fit = fit_growth(schedule, values)
    if fit.exponent > _CONVERGENT_EXPONENT:
        if fit.coefficient > 10 * tol:
            return Verdict.NO, fit
        return Verdict.INCONCLUSIVE, fit
    if fit.coefficient > 0 and fit.rel_rms < 1e-2:
        return Verdict.YES, fit
    return Verdict.INCONCLUSIVE, fit


def classify_integrability(signal: CausalSignal, schedule: Sequence[float] = DEFAULT_SCHEDULE,
                           tol: float = DEFAULT_TOL) -> IntegrabilityVerdict:
    """Decide L1 and L2 membership from partial integrals over growing domains.

    For each horizon T the integrals of |f| and |f|^2 run over [0, T] (or
    [-T, T] for non-causal signals), excluding a 1/T neighbourhood of each
    declared singular point, so that blow-ups at finite t and slow decay at
    infinity are probed by the same schedule.
    """
    schedule = [float(T) for T in schedule]
    if not schedule:
        raise ValueError("schedule must be non-empty")
    if any(b <= a for a, b in zip(schedule[:-1], schedule[1:])) or schedule[0] <= 0:
        raise ValueError("schedule must be positive and strictly increasing")
    if not tol > 0:
        raise ValueError("tol must be positive")
    p1 = partial_integrals(signal, schedule, power=1.0)
    p2 = partial_integrals(signal, schedule, power=2.0)
    v1, f1 = growth_verdict(schedule, p1, tol)
    v2, f2 = growth_verdict(schedule, p2, tol)
    return IntegrabilityVerdict(
        l1=v1, l2=v2,
        l1_partial_integral=float(p1[-1]), l2_partial_integral=float(p2[-1]),
        t_max_probed=schedule[-1],
        l1_partials=tuple(float(v) for v in p1), l2_partials=tuple(float(v) for v in p2),
        l1_fit=f1, l2_fit=f2,
    )

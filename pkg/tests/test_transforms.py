import math
from types import MappingProxyType

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kkcausal.catalog import CausalSignal, Membership, catalog_get
from kkcausal.quadrature import QuadratureConfig
from kkcausal.transforms import (ComplexPoint, ConvergenceError, NotAbsolutelyIntegrable,
                                 bromwich_inverse, estimate_lambda0, fourier_transform,
                                 laplace_transform, riemann_lebesgue_probe,
                                 truncated_fourier_sequence)

L1_IDS = ["exp-decay", "damped-oscillator", "rect-pulse", "inv-sqrt-pulse"]
OMEGAS = (-10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0)


def test_laplace_examples():
    exp = catalog_get("exp-decay")
    assert abs(laplace_transform(exp, 1.0) - 0.5) < 1e-10
    assert abs(laplace_transform(exp, ComplexPoint(0.0, 0.0)) - 1.0) < 1e-10
    assert abs(laplace_transform(catalog_get("rect-pulse"), 0.0) - 1.0) < 1e-10


def test_laplace_matches_closed_forms_off_axis():
    for sid in L1_IDS:
        sig = catalog_get(sid)
        for s in (0.5 + 2j, 3 - 1j, 0.01 + 0.5j):
            val, err = laplace_transform(sig, s, full_output=True)
            ref = sig.closed_form_laplace(s)
            assert abs(val - ref) <= max(1e-9, 1e-7 * abs(ref)), sid
            assert err >= 0


def test_laplace_left_of_abscissa_rejected():
    with pytest.raises(ConvergenceError):
        laplace_transform(catalog_get("exp-decay"), -2.0)
    with pytest.raises(ConvergenceError):
        laplace_transform(catalog_get("constant"), 1.0)


def test_complex_point_must_be_finite():
    with pytest.raises(ValueError):
        ComplexPoint(math.inf, 0.0)


def test_inv_t_laplace_is_exponential_integral():
    # L[theta(t-1)/t](s) = E1(s); reference from mpmath
    sig = catalog_get("inv-t-tail")
    for s in (0.5, 2.0, 1 + 1j):
        assert abs(laplace_transform(sig, s) - complex(mpmath.expint(1, s))) < 1e-9


def test_lambda0_examples():
    est = estimate_lambda0(catalog_get("exp-decay"), (-2.0, 0.0))
    assert abs(est.value + 1.0) <= 1e-3 and not est.entire
    est = estimate_lambda0(catalog_get("heaviside"), (-1.0, 1.0))
    assert abs(est.value) <= 1e-3
    est = estimate_lambda0(catalog_get("rect-pulse"), (-5.0, 0.0))
    assert est.entire and est.value == -5.0


def test_lambda0_errors():
    with pytest.raises(ConvergenceError):
        estimate_lambda0(catalog_get("heaviside"), (-2.0, -1.0))
    with pytest.raises(ValueError):
        estimate_lambda0(catalog_get("exp-decay"), (0.0, -1.0))


def test_riemann_lebesgue_examples():
    got = riemann_lebesgue_probe(catalog_get("exp-decay"), 0.0, (1.0, 10.0, 100.0))
    assert np.allclose(got, [0.5, 1 / 11, 1 / 101], rtol=1e-9)
    got = riemann_lebesgue_probe(catalog_get("rect-pulse"), 0.0, (1.0, 10.0, 100.0))
    want = [(1 - math.exp(-s)) / s for s in (1.0, 10.0, 100.0)]
    assert np.allclose(got, want, rtol=1e-9)
    mags = riemann_lebesgue_probe(catalog_get("exp-decay"), 5.0)
    assert all(b < a for a, b in zip(mags[:-1], mags[1:]))
    assert mags[-1] < 1e-2 * mags[0]


@pytest.mark.parametrize("sid", ["exp-decay", "damped-oscillator", "rect-pulse"])
def test_riemann_lebesgue_default_sequence_drops(sid):
    mags = riemann_lebesgue_probe(catalog_get(sid), 0.0)
    assert mags[-1] < 1e-2 * mags[0]


def test_riemann_lebesgue_inv_sqrt_decays_like_inverse_root():
    # sqrt(pi/s) erf(sqrt(s)) only falls by sqrt(1000) over s' = 1 .. 1000
    sig = catalog_get("inv-sqrt-pulse")
    mags = riemann_lebesgue_probe(sig, 0.0)
    want = [abs(sig.closed_form_laplace(s)) for s in (1.0, 10.0, 100.0, 1000.0)]
    assert np.allclose(mags, want, rtol=1e-8)
    assert all(b < a for a, b in zip(mags[:-1], mags[1:]))
    assert mags[-1] * math.sqrt(1000.0) == pytest.approx(math.sqrt(math.pi), rel=1e-6)


def test_fourier_examples():
    exp = catalog_get("exp-decay")
    assert abs(fourier_transform(exp, 0.0) - 1.0) < 1e-10
    assert abs(fourier_transform(exp, 1.0) - (1 + 1j) / 2) < 1e-10
    assert abs(fourier_transform(catalog_get("damped-oscillator"), 0.0) - 0.4) < 1e-10


@pytest.mark.parametrize("sid", L1_IDS)
def test_fourier_identity_and_closed_form(sid):
    sig = catalog_get(sid)
    for w in OMEGAS:
        f = fourier_transform(sig, w)
        assert abs(f - laplace_transform(sig, -1j * w)) < 1e-12
        assert abs(f - sig.closed_form_fourier(w)) < 1e-7, (sid, w)


def test_fourier_vectorized_matches_scalar():
    sig = catalog_get("damped-oscillator")
    w = np.linspace(-20, 20, 33)
    vec = fourier_transform(sig, w)
    assert np.max(np.abs(vec - [sig.closed_form_fourier(x) for x in w])) < 1e-8


def test_fourier_rejects_non_l1():
    for sid in ("inv-t-tail", "heaviside"):
        with pytest.raises(NotAbsolutelyIntegrable):
            fourier_transform(catalog_get(sid), 1.0)


@settings(max_examples=25, deadline=None)
@given(w=st.floats(min_value=-30, max_value=30, allow_nan=False),
       sid=st.sampled_from(["exp-decay", "damped-oscillator", "rect-pulse"]))
def test_hermitian_symmetry(w, sid):
    sig = catalog_get(sid)
    assert abs(fourier_transform(sig, -w) - np.conj(fourier_transform(sig, w))) < 1e-9


@settings(max_examples=15, deadline=None)
@given(c1=st.floats(-3, 3), c2=st.floats(-3, 3),
       s=st.complex_numbers(max_magnitude=5).filter(lambda z: z.real > 0.05))
def test_linearity_on_combined_signal(c1, c2, s):
    exp = catalog_get("exp-decay")
    rect = catalog_get("rect-pulse")

    def f(t):
        return c1 * exp.evaluate(t) + c2 * rect.evaluate(t)

    combo = CausalSignal(
        id="combo", evaluate=f, causal=True,
        l1_membership=Membership.YES, l2_membership=Membership.YES, lambda0=-1.0,
        parameters=MappingProxyType({}), breakpoints=(1.0,),
        tail_bound=lambda T, sig: abs(c1) * math.exp(-(sig + 1) * T) / (sig + 1))
    cfg = QuadratureConfig()
    lhs, err = laplace_transform(combo, s, cfg, full_output=True)
    rhs = c1 * laplace_transform(exp, s, cfg) + c2 * laplace_transform(rect, s, cfg)
    tol = max(cfg.abs_tol, cfg.rel_tol * abs(rhs))
    assert abs(lhs - rhs) <= 2 * tol + 2 * err


def test_oscillatory_tail_acceleration_against_mpmath():
    # 1/(1+t)^2 has a slowly decaying envelope: at s' = 0 the transform needs
    # the half-period series plus Aitken extrapolation
    def f(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, 1.0 / (1.0 + np.maximum(t, 0.0)) ** 2, 0.0)

    sig = CausalSignal(
        id="inv-square", evaluate=f, causal=True,
        l1_membership=Membership.YES, l2_membership=Membership.YES,
        tail_bound=lambda T, sig: 1.0 / (1.0 + T) if sig <= 0 else
        math.exp(-sig * T) / (sig * (1 + T) ** 2))
    for w in (1.0, 3.0):
        ref = complex(mpmath.quadosc(lambda t: mpmath.exp(1j * w * t) / (1 + t) ** 2,
                                     [0, mpmath.inf], omega=w))
        got = fourier_transform(sig, w)
        assert abs(got - ref) < 1e-7


def test_truncated_sequence_examples():
    seq = truncated_fourier_sequence(catalog_get("inv-t-tail"), [10, 100, 1000], 1.0)
    d = [abs(b - a) for a, b in zip(seq[:-1], seq[1:])]
    assert d[1] < d[0]
    # the limit is E1(-i) = int_1^inf e^{it}/t dt
    ref = complex(mpmath.expint(1, -1j))
    assert abs(seq[-1] - ref) < 2e-3
    seq = truncated_fourier_sequence(catalog_get("exp-decay"), [10, 20], 0.0)
    assert all(abs(v - 1.0) < 1e-4 for v in seq)
    seq = truncated_fourier_sequence(catalog_get("heaviside"), [10, 100], 0.0)
    assert np.allclose(seq, [10.0, 100.0], rtol=1e-9)


def test_truncated_sequence_rejects_bad_n():
    with pytest.raises(ValueError):
        truncated_fourier_sequence(catalog_get("exp-decay"), [10, 5], 0.0)
    with pytest.raises(ValueError):
        truncated_fourier_sequence(catalog_get("exp-decay"), [0, 5], 0.0)


def test_bromwich_examples():
    F = catalog_get("exp-decay").closed_form_laplace
    for t in (0.5, 1.0, 2.0, 5.0):
        r = bromwich_inverse(F, -1.0, t, a=0.0, cutoff=1e4)
        assert abs(r.value - math.exp(-t)) < 1e-3
        assert abs(r.value - math.exp(-t)) <= r.truncation_error + r.quadrature_error + 1e-6
    assert abs(bromwich_inverse(F, -1.0, -1.0).value) < 1e-3


def test_bromwich_rejects_line_left_of_abscissa():
    with pytest.raises(ConvergenceError):
        bromwich_inverse(lambda s: 1 / (s - 1), 1.0, 1.0, a=0.5)
    with pytest.raises(ValueError):
        bromwich_inverse(lambda s: 1 / (s + 1), -1.0, 1.0, cutoff=0.0)


def test_bromwich_damped_oscillator_round_trip():
    sig = catalog_get("damped-oscillator")
    for t in (0.7, 2.0):
        r = bromwich_inverse(sig.closed_form_laplace, -1.0, t, a=0.5, cutoff=1e4)
        assert abs(r.value - float(sig.evaluate(np.array(t)))) < 1e-3

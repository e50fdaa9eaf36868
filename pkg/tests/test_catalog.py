import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kkcausal.catalog import (CATALOG_IDS, DEFAULT_SCHEDULE, CatalogError, Membership, Verdict,
                              catalog_get, classify_integrability, evaluate, fit_growth,
                              growth_verdict, partial_integrals)

CAUSAL_IDS = [i for i in CATALOG_IDS if catalog_get(i).causal]


def test_exp_decay_metadata():
    sig = catalog_get("exp-decay", {"alpha": 1.0})
    assert sig.lambda0 == -1.0
    assert sig.l1_membership is Membership.YES and sig.l2_membership is Membership.YES
    assert sig.closed_form_laplace(1.0) == pytest.approx(0.5)
    # independent high-precision quadrature of int_0^inf exp(-s t) exp(-t) dt
    for s in (0.3, 2.0, 1 + 3j):
        ref = complex(mpmath.quad(lambda t: mpmath.exp(-s * t) * mpmath.exp(-t), [0, mpmath.inf]))
        assert abs(sig.closed_form_laplace(s) - ref) < 1e-14


def test_counterexample_metadata():
    tail = catalog_get("inv-t-tail")
    assert (tail.l1_membership, tail.l2_membership) == (Membership.NO, Membership.YES)
    pulse = catalog_get("inv-sqrt-pulse")
    assert (pulse.l1_membership, pulse.l2_membership) == (Membership.YES, Membership.NO)


def test_negative_controls_flagged():
    for sid in ("heaviside", "constant", "sign"):
        sig = catalog_get(sid)
        assert sig.negative_control
        assert sig.l1_membership is Membership.NO
    assert not catalog_get("constant").causal
    assert not catalog_get("sign").causal


@pytest.mark.parametrize("sid,params", [("nope", {}), ("exp-decay", {"alpha": 0.0}),
                                         ("exp-decay", {"alpha": -1.0}),
                                         ("damped-oscillator", {"omega0": 0.0}),
                                         ("exp-decay", {"beta": 1.0}),
                                         ("exp-decay", {"alpha": math.nan})])
def test_catalog_get_rejects(sid, params):
    with pytest.raises(CatalogError):
        catalog_get(sid, params)


def test_evaluate_examples():
    exp = catalog_get("exp-decay")
    assert evaluate(exp, -3.0) == 0.0
    assert evaluate(exp, 0.0) == 1.0
    assert evaluate(catalog_get("inv-t-tail"), 2.0) == 0.5
    assert math.isfinite(evaluate(catalog_get("inv-sqrt-pulse"), 0.0))
    with pytest.raises(ValueError):
        evaluate(exp, math.inf)
    with pytest.raises(ValueError):
        evaluate(exp, math.nan)


def test_sign_and_constant_values():
    assert evaluate(catalog_get("sign"), -2.0) == -1.0
    assert evaluate(catalog_get("sign"), 2.0) == 1.0
    assert evaluate(catalog_get("constant"), -7.0) == 1.0


@settings(max_examples=60, deadline=None)
@given(t=st.floats(min_value=-1e6, max_value=-1e-300, allow_nan=False))
def test_causal_signals_vanish_for_negative_time(t):
    for sid in CAUSAL_IDS:
        assert evaluate(catalog_get(sid), t) == 0.0


@pytest.mark.parametrize("sid", [i for i in CATALOG_IDS
                                 if catalog_get(i).closed_form_fourier is not None])
def test_fourier_closed_form_is_laplace_at_minus_i_omega(sid):
    sig = catalog_get(sid)
    for w in (-10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0):
        if w == 0.0 and sid in ("heaviside", "inv-t-tail"):
            continue  # both forms are infinite at w = 0
        assert abs(sig.closed_form_fourier(w) - sig.closed_form_laplace(-1j * w)) < 1e-12


def test_lambda0_nonpositive_for_l1():
    for sid in CATALOG_IDS:
        sig = catalog_get(sid)
        if sig.l1_membership is Membership.YES and sig.lambda0 is not None:
            assert sig.lambda0 <= 0


@pytest.mark.parametrize("sid", CATALOG_IDS)
def test_classification_matches_ground_truth(sid):
    sig = catalog_get(sid)
    v = classify_integrability(sig)
    assert v.l1.value == sig.l1_membership.value
    assert v.l2.value == sig.l2_membership.value
    assert v.t_max_probed == DEFAULT_SCHEDULE[-1]
    for seq in (v.l1_partials, v.l2_partials):
        assert all(x >= 0 for x in seq)
        assert all(b >= a for a, b in zip(seq[:-1], seq[1:]))


def test_partial_integrals_exp_decay_closed_form():
    sig = catalog_get("exp-decay", {"alpha": 2.0})
    sched = (0.5, 1.0, 3.0, 10.0)
    got = partial_integrals(sig, sched, power=1.0)
    want = [(1 - math.exp(-2 * T)) / 2 for T in sched]
    assert np.allclose(got, want, rtol=1e-12, atol=1e-14)


def test_partial_integrals_inv_t_is_log():
    got = partial_integrals(catalog_get("inv-t-tail"), (10.0, 1e3), power=1.0)
    assert np.allclose(got, [math.log(10.0), math.log(1e3)], rtol=1e-10)


def test_heaviside_classified_divergent():
    v = classify_integrability(catalog_get("heaviside"))
    assert (v.l1, v.l2) == (Verdict.NO, Verdict.NO)


def test_growth_model_separates_log_from_convergent():
    T = np.array(DEFAULT_SCHEDULE)
    assert growth_verdict(T, 3 + np.log(T), 1e-6)[0] is Verdict.NO
    assert growth_verdict(T, 2 - 1 / T, 1e-6)[0] is Verdict.YES
    assert growth_verdict(T, np.sqrt(T), 1e-6)[0] is Verdict.NO
    fit = fit_growth(T, 1 + 0.5 * np.log(T))
    assert abs(fit.exponent) < 0.05


def test_classify_rejects_bad_schedule():
    sig = catalog_get("exp-decay")
    with pytest.raises(ValueError):
        classify_integrability(sig, schedule=())
    with pytest.raises(ValueError):
        classify_integrability(sig, schedule=(10.0, 5.0))
    with pytest.raises(ValueError):
        classify_integrability(sig, tol=0.0)


def test_signals_are_immutable():
    sig = catalog_get("exp-decay")
    with pytest.raises(Exception):
        sig.id = "x"
    with pytest.raises(TypeError):
        sig.parameters["alpha"] = 3.0

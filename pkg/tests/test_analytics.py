import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from pp84 import analytics as A
from pp84.alphabet import PrepState

HALF = math.pi / 2
Q = math.pi / 4
angle = st.floats(0, HALF)


# Frozen values, worked out by hand:
#   h(1/4)            = 2 - (3/4) log2 3            = 0.811278124...
#   d at x = pi/4     = 1/2 - (1 + 1/sqrt2)^2 / 8   = 0.135723305...
#   I_AE at x = pi/4  = 1 - h(3/4)                  = 0.188721876...
#   I_AB at x = pi/4  = 1 - h(3/4) / 2              = 0.594360938...
#   bound at pi/4     = 1 - h((2 + sqrt2) / 4)      = 0.399123963...
#   QDC, c=1/2, d=3/8 = (0.5 / 0.6875)^n
def test_frozen_values():
    assert A.binary_entropy(0.25) == pytest.approx(0.811278124459, abs=1e-11)
    assert A.d_balanced(Q) == pytest.approx(0.135723305, abs=1e-9)
    assert A.i_ae(Q, Q) == pytest.approx(0.188721876, abs=1e-9)
    assert A.i_ab(Q) == pytest.approx(0.594360938, abs=1e-9)
    assert A.i_ae_bound(Q) == pytest.approx(0.399123963, abs=1e-9)
    assert A.qdc_eavesdrop_success(0.5, 0.375, 8) == pytest.approx((8 / 11) ** 8, rel=1e-12)
    assert A.qdc_eavesdrop_success(0.5, 0.375, 8) == pytest.approx(0.0780, abs=5e-4)
    assert A.qdc_eavesdrop_success(0.5, 0.375, 16) == pytest.approx(0.0061, abs=5e-4)


def test_curve_endpoints():
    a, b = A.balanced_point(0.0), A.balanced_point(HALF)
    assert (a.d, a.i_ab, a.i_ae, a.i_ae_bound) == (0.0, 1.0, 0.0, 0.0)
    assert b.d == pytest.approx(0.375, abs=1e-15)
    assert b.i_ab == pytest.approx(0.5, abs=1e-12)
    assert b.i_ae == pytest.approx(1.0, abs=1e-12)


def test_curve_monotone():
    pts = A.curve(201)
    d = [p.d for p in pts]
    iae = [p.i_ae for p in pts]
    iab = [p.i_ab for p in pts]
    assert all(np.diff(d) >= 0) and all(np.diff(iae) >= 0) and all(np.diff(iab) <= 0)
    assert all(p.i_ae <= p.i_ae_bound + 1e-12 for p in pts)
    with pytest.raises(ValueError):
        A.curve(1)


def test_projective_intercept_matches_full_flip_values():
    # x = pi/2: Eve's forward ancillae are orthogonal, detection 3/8 like intercept-resend
    assert A.d_min(HALF, HALF) == pytest.approx(0.375)
    assert A.p_d_average(1, HALF, 0, 1, HALF, 0) == pytest.approx(0.375)


@settings(max_examples=200, deadline=None)
@given(angle, angle, angle, angle)
def test_pd_at_full_fidelity_is_dmin(x, y, xp, yp):
    assert abs(A.p_d_average(1, x, y, 1, xp, yp) - A.d_min(x, xp)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(angle)
def test_information_of_detection_roundtrip(x):
    d = A.d_balanced(x)
    assert abs(A.x_of_d(d) - x) < 1e-6 or abs(A.d_balanced(A.x_of_d(d)) - d) < 1e-12
    assert abs(A.i_ae_of_d(d) - A.i_ae(x, x)) < 1e-9


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), angle, angle, angle, angle)
def test_full_fidelity_minimizes_detection(f, fp, x, y, xp, yp):
    assert A.p_d_average(f, x, y, fp, xp, yp) >= A.p_d_average(1, x, y, 1, xp, yp) - 1e-12


@settings(max_examples=100, deadline=None)
@given(angle, angle)
def test_i_ab_general_symmetric_and_balanced(x, xp):
    assert A.i_ab_general(x, xp) == pytest.approx(A.i_ab_general(xp, x), abs=1e-15)
    assert A.i_ab(x) == A.i_ab_general(x, x)


def test_p_nd_forward_bases():
    assert A.p_nd_forward(PrepState.ONE, 0.7, 0.3, 0.2) == 0.7
    assert A.p_nd_forward(PrepState.PLUS, 1.0, HALF, 0.0) == pytest.approx(0.5)
    assert A.p_nd_forward(PrepState.MINUS, 0.0, HALF, 0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("kind,eve", [("incoherent", lambda t: A.i_ae(t, t)),
                                      ("bound", A.i_ae_bound)])
def test_threshold_against_scipy(kind, eve):
    th = A.security_threshold(kind)
    ref = brentq(lambda t: A.i_ab(t) - eve(t), 0.0, HALF, xtol=1e-14)
    assert abs(th.x - ref) <= 1e-10
    assert th.d == pytest.approx(A.d_balanced(ref), abs=1e-10)


def test_threshold_ranges():
    inc, bound = A.security_threshold("incoherent"), A.security_threshold("bound")
    assert 0.225 <= inc.d <= 0.235
    assert 0.180 <= bound.d <= 0.190
    assert bound.d < inc.d
    with pytest.raises(ValueError):
        A.security_threshold("coherent")


def test_bisect_rejects_unbracketed():
    with pytest.raises(ValueError):
        A.bisect(lambda t: t * t + 1, -1, 1)
    assert A.bisect(lambda t: t - 0.3, 0, 1) == pytest.approx(0.3, abs=1e-10)


def test_qdc_success_edge_cases():
    assert A.qdc_eavesdrop_success(0.5, 0.3, 0) == 1.0
    assert A.qdc_eavesdrop_success(0.0, 0.9, 10) == 1.0
    assert A.qdc_eavesdrop_success(0.5, 0.0, 10) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        A.qdc_eavesdrop_success(0.5, 0.3, -1)


def test_efficiency():
    assert A.efficiency(A.PP84_IDEAL) == (1.0, 1.0)
    assert A.efficiency(A.BB84_IDEAL)[0] == 0.25
    assert A.efficiency_crossover() == 0.25
    assert A.pp84_efficiency(0.25) == A.bb84_efficiency(0.25) == 0.0625
    assert A.pp84_efficiency(0.1) == pytest.approx(0.01)
    assert A.bb84_efficiency(0.1) == pytest.approx(0.025)
    assert A.pp84_efficiency(1.0) == 1.0 and A.bb84_efficiency(1.0) == 0.25
    with pytest.raises(ValueError):
        A.EfficiencyInput(1, 0, 0)


@pytest.mark.parametrize("d", [0.05, 0.1, 0.2, 0.3])
def test_lemma_balanced(d):
    pt = A.lemma_search(d)
    assert pt.balanced and pt.feasible > 10
    assert pt.i_ae <= pt.i_ae_balanced + 1e-9
    assert A.d_min(pt.x, pt.x_prime) == pytest.approx(d, abs=1e-9)


def test_input_validation():
    for bad in (lambda: A.binary_entropy(1.5), lambda: A.d_balanced(2.0),
                lambda: A.x_of_d(0.4), lambda: A.lemma_search(0.1, grid_size=10)):
        with pytest.raises(ValueError):
            bad()


def test_i_ab_at_detection_extremes():
    assert A.i_ab(A.x_of_d(0.0)) == pytest.approx(1.0, abs=1e-9)
    assert A.i_ab(A.x_of_d(0.375)) == pytest.approx(0.5, abs=1e-9)


def test_lemma_boundary_cases():
    top = A.lemma_search(0.375)
    assert top.feasible == 1 and top.x == pytest.approx(HALF) and top.x_prime == pytest.approx(HALF)
    low = A.lemma_search(1e-6)
    assert low.i_ae < 1e-3 and low.i_ae_balanced < 1e-3

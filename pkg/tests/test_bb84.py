import pytest

from pp84.attacks import AttackParams, IncoherentTwoAncilla, ProjectiveInterceptResend
from pp84.protocol import Bb84Stats, run_bb84_baseline


def test_honest_bb84():
    st = run_bb84_baseline(20000, seed=1)
    assert st.errors == 0
    assert abs(st.sift_fraction - 0.5) < 0.02
    assert st.efficiency <= 0.25 + 0.01


def test_intercept_resend_error_rate():
    st = run_bb84_baseline(100000, ProjectiveInterceptResend(), seed=2)
    rate, se = st.error_rate()
    assert abs(rate - 0.25) < 4 * se


def test_classical_bits_per_sifted_bit():
    st = run_bb84_baseline(50000, seed=3)
    assert st.classical_bits / st.sifted >= 1.9
    assert st.efficiency == pytest.approx(0.25, abs=0.01)


def test_loss_and_determinism():
    a = run_bb84_baseline(10000, seed=4, transmission_prob=0.5)
    assert a == run_bb84_baseline(10000, seed=4, transmission_prob=0.5)
    assert abs(a.received / a.qubits - 0.5) < 0.03
    assert a.merge(Bb84Stats(0, 0, 0, 0)) == a


def test_rejects_incoherent_attack():
    with pytest.raises(TypeError):
        run_bb84_baseline(10, IncoherentTwoAncilla(AttackParams()))
    with pytest.raises(ValueError):
        run_bb84_baseline(-1)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pp84.qmath import (X_BASIS, Z_BASIS, DimensionError, Isometry, MeasurementBasis,
                        StateVector, apply_isometry, born_probabilities, inner, ket, measure,
                        pick_outcome, tensor)

from conftest import SeqRng

S2 = 1 / math.sqrt(2)


def random_state(rng, dims):
    n = math.prod(dims)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return StateVector(v / np.linalg.norm(v), dims)


def test_kets_and_bases():
    assert ket("+").equiv(StateVector.from_amplitudes([S2, S2]))
    assert abs(inner(ket("0"), ket("+")) - S2) < 1e-12
    assert abs(inner(ket("+"), ket("-"))) < 1e-12
    np.testing.assert_allclose(born_probabilities(ket("0"), X_BASIS, 0), [0.5, 0.5])


def test_normalization_enforced():
    with pytest.raises(ValueError):
        StateVector(np.array([1.0, 1.0]), (2,))
    s = StateVector.from_amplitudes([3, 4j], normalize=True)
    assert abs(s.norm() - 1) < 1e-12


def test_dimension_checks():
    with pytest.raises(DimensionError):
        StateVector(np.ones(4) / 2, (2, 3))
    with pytest.raises(DimensionError):
        StateVector.basis(0, 128)
    with pytest.raises(DimensionError):
        inner(ket("0"), StateVector.basis(0, 4))


def test_global_phase_equivalence():
    s = ket("-")
    t = StateVector(np.exp(0.7j) * s.amplitudes, (2,))
    assert s.equiv(t)
    assert not s.equiv(ket("+"))


def test_isometry_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        Isometry(np.array([[1, 1], [0, 1]]), (2,), (2,))
    with pytest.raises(DimensionError):
        Isometry(np.eye(2), (2,), (4,))


def test_basis_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        MeasurementBasis(np.array([[1, 0], [1, 1]]), ("a", "b"))


def test_apply_isometry_targets_middle_subsystem(np_rng):
    # X on qubit 1 of a three-qubit product state
    a, b, c = ket("0"), ket("+"), ket("1")
    s = tensor(tensor(a, ket("0")), c)
    x = Isometry(np.array([[0, 1], [1, 0]]), (2,), (2,))
    out = apply_isometry(x, s, [1])
    assert out.equiv(tensor(tensor(a, ket("1")), c))
    assert b.dims == (2,)


def test_apply_isometry_appends_ancilla():
    # copy-in-Z isometry |k> -> |k>|k>
    m = np.zeros((4, 2))
    m[0, 0] = m[3, 1] = 1
    v = Isometry(m, (2,), (2, 2))
    s = tensor(ket("+"), ket("1"))
    out = apply_isometry(v, s, [0])
    assert out.dims == (2, 2, 2)
    expect = np.zeros(8, dtype=complex)
    expect[0b010] = expect[0b111] = S2  # axes: qubit, other, new ancilla
    assert out.equiv(StateVector(expect, (2, 2, 2)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_unitary_preserves_norm(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng, (2, 2, 2))
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    out = apply_isometry(Isometry(q, (2, 2), (2, 2)), s, [2, 0])
    assert abs(out.norm() - 1) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 2))
def test_born_rule_sums_to_one(seed, sub):
    rng = np.random.default_rng(seed)
    s = random_state(rng, (2, 4, 2))
    basis = Z_BASIS if s.dims[sub] == 2 else MeasurementBasis(np.eye(4), "abcd")
    p = born_probabilities(s, basis, sub)
    assert abs(p.sum() - 1) < 1e-9 and (p >= 0).all()


def test_pick_outcome_skips_zero_weight():
    probs = np.array([0.0, 0.5, 0.0, 0.5])
    assert pick_outcome(probs, 0.0) == 1
    assert pick_outcome(probs, 0.49) == 1
    assert pick_outcome(probs, 0.5) == 3
    assert pick_outcome(probs, 0.999999) == 3


def test_measure_collapses_entangled_pair():
    bell = StateVector(np.array([S2, 0, 0, S2]), (2, 2))
    label, post, p = measure(bell, Z_BASIS, 0, SeqRng(0.9))
    assert label == "1" and abs(p - 0.5) < 1e-12
    assert post.equiv(tensor(ket("1"), ket("1")))
    label, post, _ = measure(bell, X_BASIS, 1, SeqRng(0.1))
    assert label == "+"
    assert post.equiv(tensor(ket("+"), ket("+")))


def test_measure_frequencies(np_rng):
    s = StateVector.from_amplitudes([math.cos(0.3), math.sin(0.3)])
    hits = sum(measure(s, Z_BASIS, 0, np_rng)[0] == "0" for _ in range(20000))
    p = math.cos(0.3) ** 2
    assert abs(hits / 20000 - p) < 4 * math.sqrt(p * (1 - p) / 20000)

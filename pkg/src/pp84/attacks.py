"""Eavesdropping strategies on the two passes of a run.

Subsystem layout of the traveling state: index 0 is the qubit; the
forward (epsilon) ancilla is appended at E1 and the backward (eta)
ancilla at E2, so after both attack points the dims are ``(2, 4, 4)``.

The 4-dimensional ancilla realizes the required overlaps with real
vectors::

    eps00 = e1                     eps11 = cos x e1 + sin x e2
    eps01 = e3                     eps10 = cos y e3 + sin y e4

``eps_ab`` is the ancilla attached when the qubit entered as ``a`` and
left as ``b``.  No-flip states live in span{e1, e2}, flip states in
span{e3, e4}, so the two groups are orthogonal by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .alphabet import Basis, EncodingOp, label_bit
from .qmath import (Isometry, MeasurementBasis, StateVector, apply_isometry,
                    measure)
from .streams import EVE_BASIS, EVE_BWD, EVE_EPS, EVE_ETA, EVE_FWD, RunStream

HALF_PI = math.pi / 2
ANCILLA_DIM = 4
QUBIT, EPS, ETA = 0, 1, 2


@dataclass(frozen=True)
class AttackParams:
    f_fwd: float = 1.0
    x: float = HALF_PI
    y: float = HALF_PI
    f_bwd: float = 1.0
    x_prime: float = HALF_PI
    y_prime: float = HALF_PI

    def __post_init__(self):
        for name in ("f_fwd", "f_bwd"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} is not a probability")
        for name in ("x", "y", "x_prime", "y_prime"):
            value = getattr(self, name)
            if not 0.0 <= value <= HALF_PI + 1e-12:
                raise ValueError(f"angle {name}={value} outside [0, pi/2]")

    @property
    def d_fwd(self) -> float:
        return 1.0 - self.f_fwd

    @property
    def d_bwd(self) -> float:
        return 1.0 - self.f_bwd

    @classmethod
    def balanced(cls, x: float) -> "AttackParams":
        """F = F' = 1 and x = x' (y angles are then irrelevant)."""
        return cls(1.0, x, HALF_PI, 1.0, x, HALF_PI)


def ancilla_states(x: float, y: float) -> dict[str, np.ndarray]:
    """The four normalized ancilla vectors keyed by ``"00"``, ``"01"``, ``"10"``, ``"11"``."""
    e = np.eye(ANCILLA_DIM, dtype=complex)
    return {
        "00": e[0],
        "11": math.cos(x) * e[0] + math.sin(x) * e[1],
        "01": e[2],
        "10": math.cos(y) * e[2] + math.sin(y) * e[3],
    }


def _build_isometry(f: float, x: float, y: float) -> Isometry:
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"F={f} is not a probability")
    for name, angle in (("x", x), ("y", y)):
        if not 0.0 <= angle <= HALF_PI + 1e-12:
            raise ValueError(f"angle {name}={angle} outside [0, pi/2]")
    anc = ancilla_states(x, y)
    sf, sd = math.sqrt(f), math.sqrt(1.0 - f)
    zero, one = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    col0 = sf * np.kron(zero, anc["00"]) + sd * np.kron(one, anc["01"])
    col1 = sd * np.kron(zero, anc["10"]) + sf * np.kron(one, anc["11"])
    return Isometry(np.column_stack([col0, col1]), (2,), (2, ANCILLA_DIM))


def build_e1_isometry(f: float, x: float, y: float) -> Isometry:
    """Forward-pass interaction: qubit -> qubit (x) fresh epsilon ancilla."""
    return _build_isometry(f, x, y)


def build_e2_isometry(f_prime: float, x_prime: float, y_prime: float) -> Isometry:
    """Backward-pass interaction with a fresh eta ancilla."""
    return _build_isometry(f_prime, x_prime, y_prime)


def helstrom_basis(v0: StateVector, v1: StateVector) -> MeasurementBasis:
    """Minimum-error basis for telling ``v0`` from ``v1`` (equal priors).

    The first two vectors, labelled ``"0"`` and ``"1"``, lie in span{v0, v1};
    the remainder completes the basis and is labelled ``"c2"``, ``"c3"``...
    For overlap cos t the success probability is (1 + sin t) / 2.
    """
    a, b = v0.amplitudes, v1.amplitudes
    dim = a.size
    ov = np.vdot(a, b)
    if abs(ov.imag) > 1e-9 or ov.real < -1e-9:
        raise ValueError("overlap must be real and nonnegative")
    plus = a + b
    plus = plus / np.linalg.norm(plus)
    minus = a - b
    if np.linalg.norm(minus) < 1e-12:
        # identical states: any direction orthogonal to v0 will do
        minus = _orthogonal_direction(a)
    else:
        minus = minus / np.linalg.norm(minus)
    b0 = (plus + minus) / math.sqrt(2)
    b1 = (plus - minus) / math.sqrt(2)
    vectors = _complete_basis([b0, b1], dim)
    labels = ["0", "1"] + [f"c{k}" for k in range(2, dim)]
    return MeasurementBasis(np.array(vectors), tuple(labels))


def _orthogonal_direction(a: np.ndarray) -> np.ndarray:
    for k in range(a.size):
        e = np.zeros(a.size, dtype=complex)
        e[k] = 1.0
        w = e - np.vdot(a, e) * a
        if np.linalg.norm(w) > 1e-6:
            return w / np.linalg.norm(w)
    raise ValueError("no orthogonal direction in a one-dimensional space")


def _complete_basis(vectors: list[np.ndarray], dim: int) -> list[np.ndarray]:
    out = list(vectors)
    for k in range(dim):
        if len(out) == dim:
            break
        w = np.zeros(dim, dtype=complex)
        w[k] = 1.0
        for v in out:
            w = w - np.vdot(v, w) * v
        if np.linalg.norm(w) > 1e-6:
            out.append(w / np.linalg.norm(w))
    return out


def ancilla_basis(x: float, y: float) -> MeasurementBasis:
    """Eve's four-outcome ancilla measurement: subspace first, then Helstrom.

    Labels are ``"<group><bit>"``: group ``n`` (no flip, span{e1, e2}) or
    ``f`` (flip, span{e3, e4}); the bit is the inferred qubit value on the
    *output* side of the interaction for the epsilon ancilla.
    """
    anc = ancilla_states(x, y)
    sub = lambda v, idx: StateVector(v[idx], (2,))  # noqa: E731
    no_flip = helstrom_basis(sub(anc["00"], [0, 1]), sub(anc["11"], [0, 1]))
    # within the flip group the qubit left as 0 for eps10 and as 1 for eps01
    flip = helstrom_basis(sub(anc["10"], [2, 3]), sub(anc["01"], [2, 3]))
    vecs = np.zeros((ANCILLA_DIM, ANCILLA_DIM), dtype=complex)
    vecs[0, :2], vecs[1, :2] = no_flip.vectors[0], no_flip.vectors[1]
    vecs[2, 2:], vecs[3, 2:] = flip.vectors[0], flip.vectors[1]
    return MeasurementBasis(vecs, ("n0", "n1", "f0", "f1"))


# Reading an outcome as a Z label of the qubit.  For the epsilon ancilla
# Eve wants the value the qubit had *leaving* E1; for the eta ancilla the
# value it had *entering* E2.  eps_ab / eta_ab: a = entering, b = leaving.
#   n0 ~ 00 (in 0, out 0)   n1 ~ 11 (in 1, out 1)
#   f0 ~ 10 (in 1, out 0)   f1 ~ 01 (in 0, out 1)
EPS_LABEL_TO_BIT = {"n0": 0, "n1": 1, "f0": 0, "f1": 1}
ETA_LABEL_TO_BIT = {"n0": 0, "n1": 1, "f0": 1, "f1": 0}


@dataclass(frozen=True)
class EveRecord:
    eps_guess: int
    eta_guess: int
    op_guess: EncodingOp
    raw: tuple[str, str]


def infer_op(eps_guess: int, eta_guess: int) -> EncodingOp:
    return EncodingOp.I if eps_guess == eta_guess else EncodingOp.IY


def eve_measure_and_infer(state: StateVector, params: AttackParams, rng
                          ) -> tuple[EveRecord, StateVector]:
    """Measure both ancillae of a post-E2 state and guess Alice's operation.

    ``rng.random()`` is called twice, for the epsilon then the eta
    measurement.  The measurements act on the joint state, so they back-act
    on the qubit when it is entangled with the ancillae.
    """
    if state.dims[:3] != (2, ANCILLA_DIM, ANCILLA_DIM):
        raise ValueError(f"expected a post-E2 state, got dims {state.dims}")
    eps_label, state, _ = measure(state, ancilla_basis(params.x, params.y), EPS, rng)
    eta_label, state, _ = measure(state, ancilla_basis(params.x_prime, params.y_prime),
                                  ETA, rng)
    eps_bit, eta_bit = EPS_LABEL_TO_BIT[eps_label], ETA_LABEL_TO_BIT[eta_label]
    return EveRecord(eps_bit, eta_bit, infer_op(eps_bit, eta_bit), (eps_label, eta_label)), state


def projective_attack_step(s: StateVector, basis_choice: Basis, rng) -> tuple[str, StateVector]:
    """Measure the bare qubit in ``basis_choice`` and resend the eigenstate."""
    label, collapsed, _ = measure(s, basis_choice.measurement, QUBIT, rng)
    return label, collapsed


class NoAttack:
    kind = "none"

    def forward(self, state: StateVector, stream: RunStream):
        return state, None

    def backward(self, state: StateVector, stream: RunStream, memo):
        return state, memo

    def finish(self, state: StateVector, stream: RunStream, memo):
        return None, state

    def __repr__(self):
        return "NoAttack()"


class ProjectiveInterceptResend:
    """Measure-and-resend in one random basis, reused on both passes."""

    kind = "projective"

    def forward(self, state, stream):
        basis = Basis.Z if stream.uniform(EVE_BASIS) < 0.5 else Basis.X
        label, state = projective_attack_step(state, basis, stream.slot(EVE_FWD))
        return state, (basis, label)

    def backward(self, state, stream, memo):
        basis, fwd_label = memo
        label, state = projective_attack_step(state, basis, stream.slot(EVE_BWD))
        return state, (basis, fwd_label, label)

    def finish(self, state, stream, memo):
        if memo is None or len(memo) < 3:
            return None, state
        _, fwd_label, bwd_label = memo
        e, h = label_bit(fwd_label), label_bit(bwd_label)
        return EveRecord(e, h, infer_op(e, h), (fwd_label, bwd_label)), state

    def __repr__(self):
        return "ProjectiveInterceptResend()"


class IncoherentTwoAncilla:
    """Independent fresh-ancilla interactions on each pass.

    By default Eve measures both ancillae after E2.  With
    ``interleaved=True`` the epsilon ancilla is measured right after E1
    instead; since neither ancilla is touched again after its creating
    interaction, the two timings give the same statistics.
    """

    kind = "incoherent"

    def __init__(self, params: AttackParams, interleaved: bool = False):
        self.params = params
        self.interleaved = interleaved
        self.e1 = build_e1_isometry(params.f_fwd, params.x, params.y)
        self.e2 = build_e2_isometry(params.f_bwd, params.x_prime, params.y_prime)

    def forward(self, state, stream):
        state = apply_isometry(self.e1, state, [QUBIT])
        eps_label = None
        if self.interleaved:
            eps_label, state, _ = measure(state, ancilla_basis(self.params.x, self.params.y),
                                          EPS, stream.slot(EVE_EPS))
        return state, ("e1", eps_label)

    def backward(self, state, stream, memo):
        return apply_isometry(self.e2, state, [QUBIT]), ("e2", memo[1])

    def finish(self, state, stream, memo):
        if memo is None or memo[0] != "e2":
            return None, state
        if memo[1] is None:
            return eve_measure_and_infer(state, self.params, stream.slot(EVE_EPS, EVE_ETA))
        eta_label, state, _ = measure(
            state, ancilla_basis(self.params.x_prime, self.params.y_prime), ETA,
            stream.slot(EVE_ETA))
        e, h = EPS_LABEL_TO_BIT[memo[1]], ETA_LABEL_TO_BIT[eta_label]
        return EveRecord(e, h, infer_op(e, h), (memo[1], eta_label)), state

    def __repr__(self):
        return f"IncoherentTwoAncilla({self.params})"


AttackStrategy = Union[NoAttack, ProjectiveInterceptResend, IncoherentTwoAncilla]

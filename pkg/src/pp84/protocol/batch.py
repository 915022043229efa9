"""Vectorized run engine.

Simulates many runs at once on an ``(N, 2, A, B)`` amplitude array
(qubit, epsilon ancilla, eta ancilla; ancilla axes have length 1 when no
two-ancilla attack is active).  It consumes the same per-run random slots
as :func:`pp84.protocol.run.run_single` and applies the same inverse-CDF
outcome rule, so for a given seed the two engines yield identical
transcripts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .. import streams as S
from ..alphabet import I_Y, IDENTITY, PREP_LABELS, Basis, EncodingOp, PrepState
from ..attacks import (EPS_LABEL_TO_BIT, ETA_LABEL_TO_BIT, EveRecord, IncoherentTwoAncilla,
                       NoAttack, ProjectiveInterceptResend, ancilla_basis)
from ..qmath import X_BASIS, Z_BASIS
from ..stats import SessionStats
from .records import ControlBasis, DetectionOutcome, Mode, RunConfig, RunRecord

CHUNK = 1 << 15
NONE = -1

KETS = np.array([[1, 0], [0, 1], [1, 1], [1, -1]], dtype=complex)
KETS[2:] /= math.sqrt(2)
QUBIT_BASES = np.stack([Z_BASIS.vectors, X_BASIS.vectors])  # [basis, k, component]
OPS = np.stack([IDENTITY, I_Y])
_BASIS_LABELS = (("0", "1"), ("+", "-"))
_EPS_BITS = np.array([EPS_LABEL_TO_BIT[k] for k in ("n0", "n1", "f0", "f1")], dtype=np.int8)
_ETA_BITS = np.array([ETA_LABEL_TO_BIT[k] for k in ("n0", "n1", "f0", "f1")], dtype=np.int8)
_ANCILLA_LABELS = ("n0", "n1", "f0", "f1")


@dataclass
class RunBatch:
    """Columnar transcript.  Outcomes are stored as bits within the measured
    basis (0 for "0"/"+", 1 for "1"/"-"); ``-1`` marks an absent field."""

    run: np.ndarray
    prep: np.ndarray
    mode: np.ndarray
    alice_basis: np.ndarray
    alice_outcome: np.ndarray
    alice_op: np.ndarray
    bob_outcome: np.ndarray
    detection: np.ndarray
    lost_fwd: np.ndarray
    lost_bwd: np.ndarray
    eve_eps: np.ndarray
    eve_eta: np.ndarray
    eve_op: np.ndarray
    eve_raw_eps: np.ndarray
    eve_raw_eta: np.ndarray

    def __len__(self):
        return len(self.run)

    @classmethod
    def concat(cls, batches: list["RunBatch"]) -> "RunBatch":
        return cls(**{f.name: np.concatenate([getattr(b, f.name) for b in batches])
                      for f in fields(cls)})

    def take(self, idx) -> "RunBatch":
        return RunBatch(**{f.name: getattr(self, f.name)[idx] for f in fields(self)})

    @property
    def bob_bit(self) -> np.ndarray:
        """Bob's decoded bit (-1 where nothing came back)."""
        prep_bit = self.prep % 2
        return np.where(self.bob_outcome >= 0, self.bob_outcome ^ prep_bit, NONE)

    def stats(self) -> SessionStats:
        return stats_from_batch(self)

    def records(self) -> list[RunRecord]:
        return [self.record(i) for i in range(len(self))]

    def record(self, i: int) -> RunRecord:
        prep = PrepState(int(self.prep[i]))
        mode = None if self.mode[i] < 0 else Mode(int(self.mode[i]))
        basis = None if self.alice_basis[i] < 0 else Basis(int(self.alice_basis[i]))
        alice_outcome = None if basis is None else _BASIS_LABELS[basis][self.alice_outcome[i]]
        op = None if self.alice_op[i] < 0 else EncodingOp(int(self.alice_op[i]))
        bob = None if self.bob_outcome[i] < 0 else \
            _BASIS_LABELS[prep.basis][self.bob_outcome[i]]
        eve = None
        if self.eve_op[i] >= 0:
            raw = (_raw_label(self.eve_raw_eps[i]), _raw_label(self.eve_raw_eta[i]))
            eve = EveRecord(int(self.eve_eps[i]), int(self.eve_eta[i]),
                            EncodingOp(int(self.eve_op[i])), raw)
        return RunRecord(int(self.run[i]), prep, mode, basis, alice_outcome, op, bob,
                         DetectionOutcome(int(self.detection[i])), bool(self.lost_fwd[i]),
                         bool(self.lost_bwd[i]), eve)


def _raw_label(code) -> str:
    # codes 0..3: ancilla outcomes; 10/11: projective Z labels; 20/21: X labels
    code = int(code)
    if code < 4:
        return _ANCILLA_LABELS[code]
    return _BASIS_LABELS[code // 10 - 1][code % 10]


def stats_from_batch(b: RunBatch) -> SessionStats:
    arrived = ~b.lost_fwd
    delivered_enc = arrived & ~b.lost_bwd & (b.mode == Mode.ENCODING)
    pbasis = b.prep // 2
    control = b.mode == Mode.CONTROL
    st = SessionStats(runs=len(b))
    st.prep_counts = np.bincount(b.prep, minlength=4).astype(np.int64)
    st.mode_counts = np.bincount(b.mode[arrived], minlength=2).astype(np.int64)
    st.control_basis_counts = np.bincount(b.alice_basis[control], minlength=2).astype(np.int64)
    st.detection_counts = np.bincount(b.detection, minlength=4).astype(np.int64)
    st.lost_forward = int(b.lost_fwd.sum())
    st.lost_backward = np.bincount(b.mode[arrived & b.lost_bwd], minlength=2).astype(np.int64)
    idx = pbasis[delivered_enc] * 4 + b.alice_op[delivered_enc] * 2 + \
        b.bob_bit[delivered_enc]
    st.joint_ab = np.bincount(idx, minlength=8).astype(np.int64).reshape(2, 2, 2)
    with_eve = delivered_enc & (b.eve_op >= 0)
    idx = pbasis[with_eve] * 4 + b.alice_op[with_eve] * 2 + b.eve_op[with_eve]
    st.joint_ae = np.bincount(idx, minlength=8).astype(np.int64).reshape(2, 2, 2)
    return st


def _measure_axis(psi: np.ndarray, axis: int, bases: np.ndarray, u: np.ndarray):
    """Measure one axis of ``psi`` run by run.

    ``bases`` is ``(d, d)`` (shared) or ``(N, d, d)``, rows are basis vectors.
    Returns outcome indices and the collapsed array.
    """
    n = psi.shape[0]
    moved = np.moveaxis(psi, axis, 1)
    shape = moved.shape
    d = shape[1]
    flat = moved.reshape(n, d, -1)
    coeffs = np.matmul(bases.conj(), flat)
    probs = np.sum(coeffs.real ** 2 + coeffs.imag ** 2, axis=2)
    cdf = np.cumsum(probs, axis=1)
    k = np.argmax(cdf > (u * cdf[:, -1])[:, None], axis=1)
    rows = np.arange(n)
    c = coeffs[rows, k] / np.sqrt(probs[rows, k])[:, None]
    vec = bases[k] if bases.ndim == 2 else bases[rows, k]
    collapsed = (vec[:, :, None] * c[:, None, :]).reshape(shape)
    return k, np.moveaxis(collapsed, 1, axis)


def _select(mask: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(mask.reshape((-1,) + (1,) * (a.ndim - 1)), a, b)


def simulate_uniforms(config: RunConfig, u: np.ndarray, run_index: np.ndarray,
                      forced_bits: Optional[np.ndarray] = None) -> RunBatch:
    """Simulate the runs whose slot uniforms are the rows of ``u``."""
    n = u.shape[0]
    attack = config.attack
    prep = np.minimum((u[:, S.PREP] * 4).astype(np.int64), 3)
    pbasis = prep // 2
    lost_fwd = u[:, S.LOSS_FWD] >= config.transmission_prob

    psi = KETS[prep][:, :, None, None]
    raw_eps = np.full(n, NONE, dtype=np.int8)
    raw_eta = np.full(n, NONE, dtype=np.int8)
    eve_eps = np.full(n, NONE, dtype=np.int8)
    eve_eta = np.full(n, NONE, dtype=np.int8)

    if isinstance(attack, ProjectiveInterceptResend):
        eve_basis = (u[:, S.EVE_BASIS] >= 0.5).astype(np.int64)
        k, psi = _measure_axis(psi, 1, QUBIT_BASES[eve_basis], u[:, S.EVE_FWD])
        eve_eps = k.astype(np.int8)
    elif isinstance(attack, IncoherentTwoAncilla):
        m1 = attack.e1.matrix.reshape(2, 4, 2)
        psi = np.einsum("oaq,nq->noa", m1, psi[:, :, 0, 0])[:, :, :, None]
        if attack.interleaved:
            basis = ancilla_basis(attack.params.x, attack.params.y).vectors
            k, psi = _measure_axis(psi, 2, basis, u[:, S.EVE_EPS])
            raw_eps = k.astype(np.int8)
    elif not isinstance(attack, NoAttack):
        raise TypeError(f"unsupported attack {attack!r}")

    control = u[:, S.ALICE_MODE] < config.control_prob
    if config.control_basis is ControlBasis.PREPARED:
        alice_basis = pbasis
    else:
        alice_basis = (u[:, S.ALICE_BASIS] >= 0.5).astype(np.int64)
    k_alice, psi_ctrl = _measure_axis(psi, 1, QUBIT_BASES[alice_basis], u[:, S.ALICE_MEASURE])
    if forced_bits is None:
        bits = (u[:, S.ALICE_BIT] >= 0.5).astype(np.int64)
    else:
        bits = np.asarray(forced_bits, dtype=np.int64)
    psi_enc = np.einsum("nij,nj...->ni...", OPS[bits], psi)
    psi = _select(control, psi_ctrl, psi_enc)

    if isinstance(attack, ProjectiveInterceptResend):
        k, psi = _measure_axis(psi, 1, QUBIT_BASES[eve_basis], u[:, S.EVE_BWD])
        eve_eta = k.astype(np.int8)
        raw_eps = (10 * (eve_basis + 1) + eve_eps).astype(np.int8)
        raw_eta = (10 * (eve_basis + 1) + eve_eta).astype(np.int8)
    elif isinstance(attack, IncoherentTwoAncilla):
        m2 = attack.e2.matrix.reshape(2, 4, 2)
        psi = np.einsum("ohq,nqa->noah", m2, psi[:, :, :, 0])
        if not attack.interleaved:
            basis = ancilla_basis(attack.params.x, attack.params.y).vectors
            k, psi = _measure_axis(psi, 2, basis, u[:, S.EVE_EPS])
            raw_eps = k.astype(np.int8)
        basis = ancilla_basis(attack.params.x_prime, attack.params.y_prime).vectors
        k, psi = _measure_axis(psi, 3, basis, u[:, S.EVE_ETA])
        raw_eta = k.astype(np.int8)
        eve_eps = _EPS_BITS[raw_eps]
        eve_eta = _ETA_BITS[raw_eta]

    if config.return_prob_by_mode is None:
        p_back = np.full(n, config.transmission_prob)
    else:
        p_back = np.where(control, *config.return_prob_by_mode)
    lost_bwd = ~lost_fwd & (u[:, S.LOSS_BWD] >= p_back)
    k_bob, _ = _measure_axis(psi, 1, QUBIT_BASES[pbasis], u[:, S.BOB_MEASURE])

    # assemble the transcript, blanking what a lost qubit never produced
    arrived = ~lost_fwd
    is_ctrl = arrived & control
    is_enc = arrived & ~control
    mode = np.where(arrived, np.where(control, Mode.CONTROL, Mode.ENCODING), NONE)
    a_basis = np.where(is_ctrl, alice_basis, NONE)
    a_out = np.where(is_ctrl, k_alice, NONE)
    a_op = np.where(is_enc, bits, NONE)
    returned = arrived & ~lost_bwd
    bob = np.where(returned, k_bob, NONE)
    has_eve = arrived & (not isinstance(attack, NoAttack))
    eve_eps = np.where(has_eve, eve_eps, NONE)
    eve_eta = np.where(has_eve, eve_eta, NONE)
    eve_op = np.where(has_eve, eve_eps != eve_eta, NONE)

    matched = is_ctrl & returned & (alice_basis == pbasis)
    prep_bit = prep % 2
    detection = np.full(n, DetectionOutcome.NOT_APPLICABLE, dtype=np.int8)
    e1 = matched & (k_alice != prep_bit)
    e2 = matched & ~e1 & (k_bob != k_alice)
    detection[matched] = DetectionOutcome.PASS
    detection[e1] = DetectionOutcome.DETECT_E1
    detection[e2] = DetectionOutcome.DETECT_E2

    i8 = lambda a: np.asarray(a, dtype=np.int8)  # noqa: E731
    return RunBatch(
        run=np.asarray(run_index, dtype=np.int64), prep=prep, mode=i8(mode),
        alice_basis=i8(a_basis), alice_outcome=i8(a_out), alice_op=i8(a_op),
        bob_outcome=i8(bob), detection=detection, lost_fwd=lost_fwd,
        lost_bwd=lost_bwd, eve_eps=i8(eve_eps), eve_eta=i8(eve_eta), eve_op=i8(eve_op),
        eve_raw_eps=np.where(has_eve, raw_eps, NONE).astype(np.int8),
        eve_raw_eta=np.where(has_eve, raw_eta, NONE).astype(np.int8))


def simulate_runs(config: RunConfig, first_run: int, n_runs: int, stream: int = 0,
                  forced_bits: Optional[np.ndarray] = None) -> RunBatch:
    """Runs ``first_run .. first_run + n_runs - 1`` of stream ``stream``."""
    parts = []
    for start in range(first_run, first_run + n_runs, CHUNK):
        stop = min(start + CHUNK, first_run + n_runs)
        u = S.uniforms(config.seed, stream, start, stop - start)
        fb = None if forced_bits is None else forced_bits[start - first_run:stop - first_run]
        parts.append(simulate_uniforms(config, u, np.arange(start, stop), fb))
    return RunBatch.concat(parts) if len(parts) != 1 else parts[0]


def count_runs(config: RunConfig, n_runs: int, stream: int = 0) -> SessionStats:
    """Statistics of ``n_runs`` QKD runs without keeping the transcript."""
    total = SessionStats()
    for start in range(0, n_runs, CHUNK):
        stop = min(start + CHUNK, n_runs)
        u = S.uniforms(config.seed, stream, start, stop - start)
        total = total.merge(stats_from_batch(simulate_uniforms(config, u, np.arange(start, stop))))
    return total


__all__ = ["RunBatch", "simulate_runs", "simulate_uniforms", "count_runs", "stats_from_batch",
           "PREP_LABELS"]

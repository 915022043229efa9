"""Sessions: many runs under one configuration.

QKD runs a fixed number of runs and settles all control checks at the
end.  QDC feeds payload bits to the encoding runs in order and stops at
the first failed check.

Session ``k`` of a configuration draws its runs from stream ``k``; run
``i`` of that stream always sees the same randomness (see
:mod:`pp84.streams`), which is what lets the QDC code below simulate
sessions in vectorized blocks and still match the run-by-run loop.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import streams as S
from ..stats import SessionStats
from .batch import CHUNK, RunBatch, simulate_runs, simulate_uniforms, stats_from_batch
from .records import Mode, RunConfig, RunRecord, SessionMode
from .run import run_single

MAX_QDC_RUNS = 1 << 22


@dataclass
class SessionResult:
    mode: SessionMode
    stats: SessionStats
    transcript: Optional[RunBatch] = None
    # QKD: Alice's key bits and Bob's decoded bits on delivered encoding runs
    alice_bits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))
    bob_bits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))
    # QDC only
    payload_bits: int = 0
    bits_delivered: int = 0
    aborted: bool = False
    abort_run: Optional[int] = None

    @property
    def delivered(self) -> bool:
        """Whole payload reached Bob without a failed check (QDC)."""
        return not self.aborted and self.bits_delivered == self.payload_bits

    @property
    def records(self) -> list[RunRecord]:
        if self.transcript is None:
            raise ValueError("session was run without keeping its transcript")
        return self.transcript.records()


def run_session(config: RunConfig, payload: Optional[Sequence[int]] = None,
                runs: Optional[int] = None, stream: int = 0,
                keep_transcript: bool = True) -> SessionResult:
    """Run a QDC session (``payload`` bits) or a QKD session (``runs`` runs)."""
    if config.mode is SessionMode.QDC:
        if payload is None or runs is not None:
            raise ValueError("QDC sessions take a payload and no run count")
        return _qdc_session(config, np.asarray(payload, dtype=np.int64), stream)
    if runs is None or payload is not None:
        raise ValueError("QKD sessions take a run count and no payload")
    if runs < 0:
        raise ValueError("runs must be nonnegative")
    return _qkd_session(config, runs, stream, keep_transcript)


def _delivered_bits(b: RunBatch) -> tuple[np.ndarray, np.ndarray]:
    mask = (b.mode == Mode.ENCODING) & (b.bob_outcome >= 0)
    return b.alice_op[mask].astype(np.int8), b.bob_bit[mask].astype(np.int8)


def _qkd_session(config, runs, stream, keep_transcript) -> SessionResult:
    stats = SessionStats()
    parts, alice, bob = [], [], []
    for start in range(0, runs, CHUNK):
        b = simulate_runs(config, start, min(CHUNK, runs - start), stream)
        stats = stats.merge(stats_from_batch(b))
        a_bits, b_bits = _delivered_bits(b)
        alice.append(a_bits)
        bob.append(b_bits)
        if keep_transcript:
            parts.append(b)
    transcript = None
    if keep_transcript:
        transcript = RunBatch.concat(parts) if parts else simulate_runs(config, 0, 0, stream)
    cat = lambda xs: np.concatenate(xs) if xs else np.zeros(0, dtype=np.int8)  # noqa: E731
    return SessionResult(SessionMode.QKD, stats, transcript, cat(alice), cat(bob))


def _check_qdc(config: RunConfig, payload: np.ndarray) -> None:
    if payload.ndim != 1 or payload.size == 0:
        raise ValueError("QDC payload must be a nonempty bit sequence")
    if not np.isin(payload, (0, 1)).all():
        raise ValueError("payload must contain only bits")
    if config.control_prob >= 1.0:
        raise ValueError("QDC needs encoding runs: control_prob must be below 1")


def _qdc_session(config: RunConfig, payload: np.ndarray, stream: int) -> SessionResult:
    _check_qdc(config, payload)
    summary = qdc_sessions(config, payload, [stream], keep_transcripts=True)
    b = summary.transcripts[0]
    alice, bob = _delivered_bits(b)
    return SessionResult(SessionMode.QDC, stats_from_batch(b), b, alice, bob,
                         payload_bits=payload.size,
                         bits_delivered=int(summary.bits_delivered[0]),
                         aborted=bool(summary.aborted[0]),
                         abort_run=None if summary.abort_run[0] < 0 else int(summary.abort_run[0]))


@dataclass
class QdcSummary:
    """Per-session outcomes of many independent QDC sessions."""

    payload_bits: int
    streams: np.ndarray
    bits_delivered: np.ndarray
    aborted: np.ndarray
    abort_run: np.ndarray
    runs: np.ndarray
    # (sessions, payload_bits) decoded bits, -1 where nothing arrived
    bob_bits: Optional[np.ndarray] = None
    transcripts: Optional[list[RunBatch]] = None

    @property
    def delivered(self) -> np.ndarray:
        return ~self.aborted & (self.bits_delivered == self.payload_bits)

    def success_rate(self) -> tuple[float, float]:
        n = len(self.streams)
        p = float(self.delivered.mean())
        return p, float(np.sqrt(p * (1 - p) / n))


def qdc_sessions(config: RunConfig, payload: Sequence[int], streams: Sequence[int],
                 block: Optional[int] = None, keep_transcripts: bool = False) -> QdcSummary:
    """Run one QDC session per stream, vectorized across sessions.

    Each round simulates the next ``block`` runs of every unfinished
    session.  Which runs are encoding runs, and which of those return to
    Bob, depends only on the per-run uniforms, so the payload bit each run
    carries is known before the quantum part is simulated.
    """
    payload = np.asarray(payload, dtype=np.int64)
    _check_qdc(config, payload)
    n_bits = payload.size
    streams = np.asarray(streams, dtype=np.int64)
    m = len(streams)
    if block is None:
        block = 8
    p_back = config.return_prob_by_mode or (config.transmission_prob, config.transmission_prob)

    next_bit = np.zeros(m, dtype=np.int64)
    start = np.zeros(m, dtype=np.int64)
    done = np.zeros(m, dtype=bool)
    aborted = np.zeros(m, dtype=bool)
    abort_run = np.full(m, -1, dtype=np.int64)
    bob_bits = np.full((m, n_bits), -1, dtype=np.int8)
    pieces: list[list[RunBatch]] = [[] for _ in range(m)]

    while not done.all():
        active = np.flatnonzero(~done)
        if start[active].max() >= MAX_QDC_RUNS:
            raise RuntimeError("QDC session did not finish")
        u = np.concatenate([S.uniforms(config.seed, int(streams[j]), int(start[j]), block)
                            for j in active]).reshape(len(active), block, S.SLOTS)
        arrived = u[..., S.LOSS_FWD] < config.transmission_prob
        encoding = arrived & (u[..., S.ALICE_MODE] >= config.control_prob)
        completes = encoding & (u[..., S.LOSS_BWD] < p_back[1])
        bit_idx = next_bit[active, None] + np.cumsum(completes, axis=1) - completes
        forced = payload[np.minimum(bit_idx, n_bits - 1)]
        run_index = start[active, None] + np.arange(block)
        b = _simulate_chunked(config, u.reshape(-1, S.SLOTS), run_index.ravel(), forced.ravel())

        detected = (b.detection >= 2).reshape(len(active), block)
        finishing = completes & (bit_idx == n_bits - 1)
        first_det = np.where(detected.any(axis=1), detected.argmax(axis=1), block)
        first_fin = np.where(finishing.any(axis=1), finishing.argmax(axis=1), block)
        stop = np.minimum(first_det, first_fin)  # index of last run in this block, or block

        taken = np.minimum(stop + 1, block)
        within = np.arange(block) < taken[:, None]
        got = completes & within
        rows, cols = np.nonzero(got)
        bob_bits[active[rows], bit_idx[rows, cols]] = b.bob_bit.reshape(len(active), block)[rows, cols]
        next_bit[active] += got.sum(axis=1)
        if keep_transcripts:
            for row, j in enumerate(active):
                pieces[j].append(b.take(slice(row * block, row * block + taken[row])))
        finished = stop < block
        hit = finished & (first_det < first_fin)
        done[active[finished]] = True
        aborted[active[hit]] = True
        abort_run[active[hit]] = start[active[hit]] + stop[hit]
        start[active] += taken

    transcripts = [RunBatch.concat(p) for p in pieces] if keep_transcripts else None
    return QdcSummary(n_bits, streams, next_bit, aborted, abort_run, start, bob_bits, transcripts)


def _simulate_chunked(config, u, run_index, forced) -> RunBatch:
    parts = [simulate_uniforms(config, u[i:i + CHUNK], run_index[i:i + CHUNK], forced[i:i + CHUNK])
             for i in range(0, len(u), CHUNK)]
    return parts[0] if len(parts) == 1 else RunBatch.concat(parts)


def qdc_session_reference(config: RunConfig, payload: Sequence[int], stream: int = 0
                          ) -> tuple[list[RunRecord], int, Optional[int]]:
    """Run-by-run QDC loop on the scalar engine.

    Returns the transcript, the number of delivered bits and the index of
    the aborting run (None if the payload went through).
    """
    payload = list(payload)
    records, sent = [], 0
    for i in range(MAX_QDC_RUNS):
        rec = run_single(config, payload[sent], S.RunStream(config.seed, i, stream))
        records.append(rec)
        if rec.detection.detected:
            return records, sent, i
        if rec.mode is Mode.ENCODING and not rec.lost:
            sent += 1
            if sent == len(payload):
                return records, sent, None
    raise RuntimeError("QDC session did not finish")

"""Minimal one-way BB84 with sifting, for comparison.

Uses the same counter-based streams as the PP84 engine: Alice's state
from the preparation slot, Eve's basis and outcome from her forward
slots, Bob's basis and outcome from his own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .. import streams as S
from ..attacks import NoAttack, ProjectiveInterceptResend
from ..stats import proportion

_CHUNK = 1 << 16


@dataclass(frozen=True)
class Bb84Stats:
    qubits: int
    received: int
    sifted: int
    errors: int

    @property
    def classical_bits(self) -> int:
        # Bob announces one basis bit per received qubit
        return self.received

    def error_rate(self) -> tuple[float, float]:
        return proportion(self.errors, self.sifted)

    @property
    def sift_fraction(self) -> float:
        return self.sifted / self.received if self.received else math.nan

    @property
    def efficiency(self) -> float:
        """Sifted bits per transmitted qubit plus classical bit."""
        total = self.qubits + self.classical_bits
        return self.sifted / total if total else math.nan

    def merge(self, other: "Bb84Stats") -> "Bb84Stats":
        return Bb84Stats(self.qubits + other.qubits, self.received + other.received,
                         self.sifted + other.sifted, self.errors + other.errors)


def _chunk(u: np.ndarray, attack, transmission_prob: float) -> Bb84Stats:
    prep = np.minimum((u[:, S.PREP] * 4).astype(np.int64), 3)
    a_basis, a_bit = prep // 2, prep % 2
    received = u[:, S.LOSS_FWD] < transmission_prob
    state_basis, state_bit = a_basis, a_bit
    if isinstance(attack, ProjectiveInterceptResend):
        e_basis = (u[:, S.EVE_BASIS] >= 0.5).astype(np.int64)
        # same basis: Eve reads the bit; otherwise a fair coin
        coin = (u[:, S.EVE_FWD] >= 0.5).astype(np.int64)
        state_bit = np.where(e_basis == a_basis, a_bit, coin)
        state_basis = e_basis
    elif not isinstance(attack, NoAttack):
        raise TypeError(f"BB84 baseline supports no attack or intercept-resend, not {attack!r}")
    b_basis = (u[:, S.BB84_BOB_BASIS] >= 0.5).astype(np.int64)
    coin = (u[:, S.BOB_MEASURE] >= 0.5).astype(np.int64)
    b_bit = np.where(b_basis == state_basis, state_bit, coin)
    sifted = received & (b_basis == a_basis)
    return Bb84Stats(len(u), int(received.sum()), int(sifted.sum()),
                     int((sifted & (b_bit != a_bit)).sum()))


def run_bb84_baseline(n_qubits: int,
                      attack: Union[NoAttack, ProjectiveInterceptResend] = NoAttack(),
                      seed: int = 0, stream: int = 0,
                      transmission_prob: float = 1.0) -> Bb84Stats:
    """Send ``n_qubits`` BB84 qubits and sift.

    Measurements of a basis state in the conjugate basis are fair coins,
    so the qubit is tracked as a (basis, bit) pair instead of amplitudes.
    """
    if n_qubits < 0:
        raise ValueError("n_qubits must be nonnegative")
    if not 0.0 < transmission_prob <= 1.0:
        raise ValueError("transmission_prob must lie in (0, 1]")
    total = Bb84Stats(0, 0, 0, 0)
    for start in range(0, n_qubits, _CHUNK):
        u = S.uniforms(seed, stream, start, min(_CHUNK, n_qubits - start))
        total = total.merge(_chunk(u, attack, transmission_prob))
    return total

"""One PP84 run, simulated state by state with the qmath primitives.

This is the reference path.  :mod:`pp84.protocol.batch` simulates the
same runs vectorized and must reproduce these transcripts exactly.
"""
from __future__ import annotations

import dataclasses
from typing import Optional

from ..alphabet import Basis, EncodingOp, PrepState
from ..qmath import Isometry, apply_isometry, measure
from ..streams import (ALICE_BASIS, ALICE_BIT, ALICE_MEASURE, ALICE_MODE, BOB_MEASURE,
                       LOSS_BWD, LOSS_FWD, PREP, RunStream)
from .records import ControlBasis, Mode, RunConfig, RunRecord, detection_check

_OPS = {op: Isometry(op.matrix, (2,), (2,)) for op in EncodingOp}


def sample_prep(u: float) -> PrepState:
    return PrepState(min(int(u * 4), 3))


def run_single(config: RunConfig, forced_bit: Optional[int], rng: RunStream) -> RunRecord:
    """Simulate one run.

    ``forced_bit`` fixes Alice's operation if the run turns out to be an
    encoding run (QDC payload); otherwise her bit is drawn at random.
    The attack strategy is never told the mode Alice picked.
    """
    attack = config.attack
    prep = sample_prep(rng.uniform(PREP))
    if rng.uniform(LOSS_FWD) >= config.transmission_prob:
        return RunRecord(rng.run_index, prep, None, lost_forward=True)

    state = prep.ket
    state, memo = attack.forward(state, rng)

    alice_basis = alice_outcome = alice_op = None
    if rng.uniform(ALICE_MODE) < config.control_prob:
        mode = Mode.CONTROL
        if config.control_basis is ControlBasis.PREPARED:
            alice_basis = prep.basis
        else:
            alice_basis = Basis.Z if rng.uniform(ALICE_BASIS) < 0.5 else Basis.X
        alice_outcome, state, _ = measure(state, alice_basis.measurement, 0,
                                          rng.slot(ALICE_MEASURE))
    else:
        mode = Mode.ENCODING
        if forced_bit is None:
            bit = 0 if rng.uniform(ALICE_BIT) < 0.5 else 1
        else:
            bit = int(forced_bit)
        alice_op = EncodingOp(bit)
        state = apply_isometry(_OPS[alice_op], state, [0])

    state, memo = attack.backward(state, rng, memo)
    eve, state = attack.finish(state, rng, memo)

    record = RunRecord(rng.run_index, prep, mode, alice_basis, alice_outcome, alice_op, eve=eve)
    if rng.uniform(LOSS_BWD) >= config.return_prob(mode):
        return dataclasses.replace(record, lost_backward=True)

    bob_outcome, state, _ = measure(state, prep.basis.measurement, 0, rng.slot(BOB_MEASURE))
    record = dataclasses.replace(record, bob_outcome=bob_outcome)
    return dataclasses.replace(record, detection=detection_check(record))

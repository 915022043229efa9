"""Counter-based random streams.

A run is addressed by ``(seed, stream, run_index)``.  Every run owns a
fixed block of ``SLOTS`` uniforms drawn from a Philox generator keyed on
``(seed, stream)`` with the counter positioned at the run's offset, so a
run's randomness does not depend on how many runs came before it, nor on
whether the runs are simulated one at a time or as a vectorized batch.
"""
from __future__ import annotations

import threading

import numpy as np

SLOTS = 16
_BLOCKS_PER_RUN = SLOTS // 4  # Philox emits four 64-bit words per counter step
_MASK64 = (1 << 64) - 1

# slot assignment within a run
PREP = 0
LOSS_FWD = 1
EVE_BASIS = 2
EVE_FWD = 3
ALICE_MODE = 4
ALICE_BASIS = 5
ALICE_MEASURE = 6
ALICE_BIT = 7
EVE_BWD = 8
EVE_EPS = 9
EVE_ETA = 10
LOSS_BWD = 11
BOB_MEASURE = 12
BB84_BOB_BASIS = 13


def _to_unit(raw: np.ndarray) -> np.ndarray:
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


_local = threading.local()


def _generator(seed: int, stream: int, first_run: int) -> np.random.Philox:
    # Re-keying a cached generator is ~10x cheaper than building a new one,
    # which matters when thousands of short sessions each need a block.
    gen = getattr(_local, "gen", None)
    if gen is None:
        gen = _local.gen = np.random.Philox(0)
        _local.state = gen.state
    state = _local.state
    state["state"]["key"][:] = (seed & _MASK64, stream & _MASK64)
    state["state"]["counter"][:] = (first_run * _BLOCKS_PER_RUN, 0, 0, 0)
    state["buffer_pos"] = 4
    state["has_uint32"] = 0
    gen.state = state
    return gen


def uniforms(seed: int, stream: int, first_run: int, n_runs: int) -> np.ndarray:
    """``(n_runs, SLOTS)`` uniforms in [0, 1) for runs ``first_run ...``."""
    raw = _generator(seed, stream, first_run).random_raw(n_runs * SLOTS)
    return _to_unit(raw).reshape(n_runs, SLOTS)


class RunStream:
    """The slot-addressed randomness of one run."""

    def __init__(self, seed: int, run_index: int, stream: int = 0, values=None):
        self.seed = seed
        self.stream = stream
        self.run_index = run_index
        self._u = values if values is not None else uniforms(seed, stream, run_index, 1)[0]

    def uniform(self, slot: int) -> float:
        return float(self._u[slot])

    def slot(self, *slots: int) -> "FixedDraw":
        """A ``random()`` source replaying the given slots, for APIs that take an rng."""
        return FixedDraw(*(self.uniform(k) for k in slots))


class FixedDraw:
    def __init__(self, *values: float):
        self._values = iter(values)

    def random(self) -> float:
        return next(self._values)

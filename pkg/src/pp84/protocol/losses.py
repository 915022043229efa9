"""Loss accounting per mode.

Alice picks the mode only after the forward pass, so any loss that
depends on the mode shows up on the way back.  The test compares the
fraction of arrived control runs that never returned to Bob with the
same fraction for encoding runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

from ..stats import SessionStats

MIN_RUNS_PER_MODE = 100


@dataclass(frozen=True)
class LossReport:
    n_control: int
    lost_control: int
    n_encoding: int
    lost_encoding: int
    z: float
    p_value: float
    significance: float
    verdict: str  # "anomaly", "consistent" or "inconclusive"

    @property
    def rate_control(self) -> float:
        return self.lost_control / self.n_control if self.n_control else math.nan

    @property
    def rate_encoding(self) -> float:
        return self.lost_encoding / self.n_encoding if self.n_encoding else math.nan

    @property
    def anomaly(self) -> bool:
        return self.verdict == "anomaly"


def loss_anomaly_test(stats: SessionStats, significance: float = 0.05) -> LossReport:
    """Pooled two-sided two-proportion z-test on backward loss by mode."""
    if not 0.0 < significance < 1.0:
        raise ValueError("significance must lie in (0, 1)")
    n_e, n_c = (int(v) for v in stats.mode_counts)
    l_e, l_c = (int(v) for v in stats.lost_backward)
    if min(n_c, n_e) < MIN_RUNS_PER_MODE:
        return LossReport(n_c, l_c, n_e, l_e, math.nan, math.nan, significance, "inconclusive")
    pooled = (l_c + l_e) / (n_c + n_e)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n_c + 1 / n_e))
    diff = l_c / n_c - l_e / n_e
    if se == 0.0:
        # no losses at all, or every arrived qubit lost: rates agree exactly
        z = 0.0
    else:
        z = diff / se
    p_value = 2 * (1 - NormalDist().cdf(abs(z)))
    verdict = "anomaly" if p_value < significance else "consistent"
    return LossReport(n_c, l_c, n_e, l_e, z, p_value, significance, verdict)

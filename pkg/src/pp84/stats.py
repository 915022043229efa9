"""Session counters, Monte Carlo estimators and empirical-vs-analytic reports."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .analytics import binary_entropy


def _zeros(*shape):
    return field(default_factory=lambda: np.zeros(shape, dtype=np.int64))


@dataclass
class SessionStats:
    """Aggregated counts of a session.

    Index conventions: preparation 0..3 = 0, 1, +, -; mode 0 = encoding,
    1 = control; basis 0 = Z, 1 = X; detection 0..3 = not applicable,
    pass, detected at E1, detected at E2.  The joint tables are indexed
    ``[preparation basis, alice bit, other bit]`` and only count encoding
    runs whose qubit made it back to Bob.
    """

    runs: int = 0
    prep_counts: np.ndarray = _zeros(4)
    mode_counts: np.ndarray = _zeros(2)
    control_basis_counts: np.ndarray = _zeros(2)
    detection_counts: np.ndarray = _zeros(4)
    lost_forward: int = 0
    lost_backward: np.ndarray = _zeros(2)
    joint_ab: np.ndarray = _zeros(2, 2, 2)
    joint_ae: np.ndarray = _zeros(2, 2, 2)

    def merge(self, other: "SessionStats") -> "SessionStats":
        return SessionStats(**{f.name: getattr(self, f.name) + getattr(other, f.name)
                               for f in fields(self)})

    __add__ = merge

    def __eq__(self, other):
        if not isinstance(other, SessionStats):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name))
                   for f in fields(self))

    @property
    def applicable_checks(self) -> int:
        return int(self.detection_counts[1:].sum())

    @property
    def detections(self) -> int:
        return int(self.detection_counts[2:].sum())

    @property
    def encoding_delivered(self) -> int:
        return int(self.joint_ab.sum())

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.tolist() if isinstance(value, np.ndarray) else int(value)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SessionStats":
        kwargs = {}
        for f in fields(cls):
            value = data[f.name]
            kwargs[f.name] = np.asarray(value, dtype=np.int64) if isinstance(value, list) \
                else int(value)
        return cls(**kwargs)


def estimate_detection(stats: SessionStats) -> tuple[float, float]:
    """Detection rate over applicable control checks and its binomial standard error."""
    n = stats.applicable_checks
    if n == 0:
        raise ValueError("no applicable control checks")
    return proportion(stats.detections, n)


def proportion(successes: int, n: int) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("empty sample")
    p = successes / n
    return p, math.sqrt(p * (1.0 - p) / n)


def mutual_information_from_counts(joint) -> float:
    """Plug-in mutual information (bits) of a 2x2 contingency table."""
    joint = np.asarray(joint, dtype=float)
    total = joint.sum()
    if total <= 0:
        raise ValueError("empty table")
    p = joint / total
    pa = p.sum(axis=1, keepdims=True)
    pb = p.sum(axis=0, keepdims=True)
    mask = p > 0
    return float(np.sum(p[mask] * np.log2(p[mask] / (pa @ pb)[mask])))


def mutual_information_stderr(joint) -> float:
    """Rough standard error of the plug-in estimate for a binary symmetric table.

    Delta method on the agreement rate p, with the sampling spread of the
    estimator under independence (about 1/(N ln 2)) as a floor so that a
    zero-information channel does not get a zero error bar.
    """
    joint = np.asarray(joint, dtype=float)
    n = joint.sum()
    p, se = proportion(joint[0, 0] + joint[1, 1], int(n))
    p = min(max(p, 1e-12), 1 - 1e-12)
    slope = abs(math.log2(p / (1 - p)))
    return math.hypot(slope * se, 1.0 / (n * math.log(2)))


def agreement(joint) -> tuple[float, float]:
    """Fraction of a 2x2 table on the diagonal, with binomial standard error."""
    joint = np.asarray(joint)
    return proportion(int(joint[0, 0] + joint[1, 1]), int(joint.sum()))


@dataclass(frozen=True)
class ComparisonReport:
    quantity: str
    analytic: float
    empirical: float
    stderr: float
    z: float
    z_threshold: float
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        z = self.z if math.isfinite(self.z) else None
        return {"quantity": self.quantity, "analytic": self.analytic,
                "empirical": self.empirical, "stderr": self.stderr, "z": z,
                "verdict": self.verdict}


def compare(quantity: str, analytic: float, empirical: float, stderr: float,
            z_threshold: float = 4.0) -> ComparisonReport:
    """z-score an empirical estimate against its closed-form value."""
    diff = empirical - analytic
    if stderr > 0:
        z = diff / stderr
    elif abs(diff) <= 1e-12:
        z = 0.0
    else:
        z = math.copysign(math.inf, diff)
    verdict = "pass" if abs(z) <= z_threshold else "fail"
    return ComparisonReport(quantity, float(analytic), float(empirical), float(stderr),
                            float(z), z_threshold, verdict)


def i_ab_per_basis(stats: SessionStats) -> tuple[float, float, float]:
    """Alice-Bob information on Z- and X-prepared encoding runs and their average."""
    if stats.joint_ab[0].sum() == 0 or stats.joint_ab[1].sum() == 0:
        raise ValueError("need encoding runs prepared in both bases")
    i_z = mutual_information_from_counts(stats.joint_ab[0])
    i_x = mutual_information_from_counts(stats.joint_ab[1])
    return i_z, i_x, (i_z + i_x) / 2


def symmetric_channel_information(correct_rate: float) -> float:
    """1 - h(p): information of a binary symmetric channel with uniform input."""
    return 1.0 - binary_entropy(correct_rate)

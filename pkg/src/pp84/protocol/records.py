from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from ..alphabet import Basis, EncodingOp, PrepState, label_bit
from ..attacks import AttackStrategy, EveRecord, NoAttack


class Mode(enum.IntEnum):
    ENCODING = 0
    CONTROL = 1


class SessionMode(enum.Enum):
    QDC = "qdc"
    QKD = "qkd"


class DetectionOutcome(enum.IntEnum):
    NOT_APPLICABLE = 0
    PASS = 1
    DETECT_E1 = 2
    DETECT_E2 = 3

    @property
    def detected(self) -> bool:
        return self >= DetectionOutcome.DETECT_E1

    def __str__(self):
        return ("NotApplicable", "Pass", "DetectE1", "DetectE2")[self]


class ControlBasis(enum.Enum):
    # Alice picks Z or X uniformly (only matching runs are checkable)
    RANDOM = "random"
    # idealization: Alice's control basis always matches the preparation,
    # so every control run is a check
    PREPARED = "prepared"


@dataclass(frozen=True)
class RunConfig:
    control_prob: float = 0.5
    attack: AttackStrategy = field(default_factory=NoAttack)
    transmission_prob: float = 1.0
    mode: SessionMode = SessionMode.QKD
    seed: int = 0
    control_basis: ControlBasis = ControlBasis.RANDOM
    # (control, encoding) transmission on the return pass; simulates a
    # mode-dependent loss pattern for anomaly testing
    return_prob_by_mode: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if not 0.0 <= self.control_prob <= 1.0:
            raise ValueError(f"control_prob={self.control_prob} outside [0, 1]")
        if not 0.0 < self.transmission_prob <= 1.0:
            raise ValueError(f"transmission_prob={self.transmission_prob} outside (0, 1]")
        if self.return_prob_by_mode is not None:
            if len(self.return_prob_by_mode) != 2 or \
                    not all(0.0 < p <= 1.0 for p in self.return_prob_by_mode):
                raise ValueError("return_prob_by_mode needs two probabilities in (0, 1]")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def return_prob(self, mode: Mode) -> float:
        if self.return_prob_by_mode is None:
            return self.transmission_prob
        return self.return_prob_by_mode[0 if mode is Mode.CONTROL else 1]


@dataclass(frozen=True)
class RunRecord:
    run: int
    prep: PrepState
    mode: Optional[Mode]
    alice_basis: Optional[Basis] = None
    alice_outcome: Optional[str] = None
    alice_op: Optional[EncodingOp] = None
    bob_outcome: Optional[str] = None
    detection: DetectionOutcome = DetectionOutcome.NOT_APPLICABLE
    lost_forward: bool = False
    lost_backward: bool = False
    eve: Optional[EveRecord] = None

    @property
    def lost(self) -> bool:
        return self.lost_forward or self.lost_backward

    @property
    def bob_bit(self) -> Optional[int]:
        """Bob's decoded bit: 0 if the qubit came back as prepared."""
        if self.bob_outcome is None:
            return None
        return label_bit(self.bob_outcome) ^ label_bit(self.prep.label)

    @property
    def alice_bit(self) -> Optional[int]:
        return None if self.alice_op is None else self.alice_op.bit


def detection_check(record: RunRecord) -> DetectionOutcome:
    """Classify the double (forward and backward) correlation test of one run."""
    if record.lost or record.mode is not Mode.CONTROL:
        return DetectionOutcome.NOT_APPLICABLE
    if record.alice_basis is not record.prep.basis:
        return DetectionOutcome.NOT_APPLICABLE
    if record.alice_outcome != record.prep.label:
        return DetectionOutcome.DETECT_E1
    if record.bob_outcome != record.alice_outcome:
        return DetectionOutcome.DETECT_E2
    return DetectionOutcome.PASS

"""BB84 states, the two bases and the two encoding operations."""
from __future__ import annotations

import enum

import numpy as np

from .qmath import X_BASIS, Z_BASIS, MeasurementBasis, StateVector, ket


class Basis(enum.IntEnum):
    Z = 0
    X = 1

    @property
    def measurement(self) -> MeasurementBasis:
        return Z_BASIS if self is Basis.Z else X_BASIS


class PrepState(enum.IntEnum):
    ZERO = 0
    ONE = 1
    PLUS = 2
    MINUS = 3

    @property
    def basis(self) -> Basis:
        return Basis.Z if self < 2 else Basis.X

    @property
    def label(self) -> str:
        return PREP_LABELS[self]

    @property
    def ket(self) -> StateVector:
        return ket(self.label)

    @classmethod
    def from_label(cls, label: str) -> "PrepState":
        return cls(PREP_LABELS.index(label))


PREP_LABELS = ("0", "1", "+", "-")


class EncodingOp(enum.IntEnum):
    I = 0  # noqa: E741
    IY = 1

    @property
    def bit(self) -> int:
        return int(self)

    @property
    def matrix(self) -> np.ndarray:
        return IDENTITY if self is EncodingOp.I else I_Y

    def __str__(self):
        return "I" if self is EncodingOp.I else "iY"


IDENTITY = np.eye(2, dtype=complex)
# iY = ZX: |0> -> -|1>, |1> -> |0>
I_Y = np.array([[0, 1], [-1, 0]], dtype=complex)


def label_bit(label: str) -> int:
    """0 for the first eigenstate of a basis ("0" or "+"), 1 for the second."""
    return 0 if label in ("0", "+") else 1

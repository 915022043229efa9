"""Dense pure-state linear algebra for small composite systems.

Everything here is an immutable value: operations return new states.
Dimensions stay at or below 64, so plain dense numpy arrays are used
throughout and all tolerance checks are absolute at ``ATOL``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

ATOL = 1e-9
MAX_DIM = 64


class DimensionError(ValueError):
    pass


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        dims = tuple(int(d) for d in self.dims)
        if math.prod(dims) != amps.size:
            raise DimensionError(f"dims {dims} do not match {amps.size} amplitudes")
        if amps.size > MAX_DIM:
            raise DimensionError(f"dimension {amps.size} exceeds {MAX_DIM}")
        if abs(np.vdot(amps, amps).real - 1.0) > ATOL:
            raise ValueError("state is not normalized")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex], dims: Sequence[int] | None = None,
                        normalize: bool = False) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(amps, tuple(dims) if dims is not None else (amps.size,))

    @classmethod
    def basis(cls, index: int, dim: int) -> "StateVector":
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps, (dim,))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped with one axis per subsystem."""
        return self.amplitudes.reshape(self.dims)

    def equiv(self, other: "StateVector", atol: float = ATOL) -> bool:
        """Equality up to a global phase."""
        return self.dims == other.dims and abs(abs(inner(self, other)) - 1.0) <= atol

    def __repr__(self):
        return f"StateVector(dims={self.dims}, amplitudes={np.round(self.amplitudes, 6)})"


@dataclass(frozen=True, eq=False)
class Isometry:
    """Dense map from ``prod(in_dims)`` into ``prod(out_dims)`` with orthonormal columns.

    The output ordering is row-major over ``out_dims``; by convention the
    input subsystems come first in ``out_dims`` and any new subsystems
    (fresh ancillae) follow.
    """

    matrix: np.ndarray
    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]

    def __post_init__(self):
        m = _frozen(self.matrix)
        in_dims = tuple(int(d) for d in self.in_dims)
        out_dims = tuple(int(d) for d in self.out_dims)
        if m.shape != (math.prod(out_dims), math.prod(in_dims)):
            raise DimensionError(f"matrix shape {m.shape} does not match {in_dims} -> {out_dims}")
        if m.shape[0] < m.shape[1]:
            raise DimensionError("isometry output dimension smaller than input")
        gram = m.conj().T @ m
        if not np.allclose(gram, np.eye(m.shape[1]), rtol=0.0, atol=ATOL):
            raise ValueError("columns are not orthonormal")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "Isometry":
        n = math.prod(dims)
        return cls(np.eye(n), tuple(dims), tuple(dims))

    def gram(self) -> np.ndarray:
        return self.matrix.conj().T @ self.matrix


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Orthonormal basis of one subsystem; ``vectors[k]`` carries ``labels[k]``."""

    vectors: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        vecs = _frozen(np.atleast_2d(self.vectors))
        labels = tuple(str(lab) for lab in self.labels)
        if vecs.shape[0] != len(labels):
            raise ValueError("one label per basis vector required")
        if vecs.shape[0] != vecs.shape[1]:
            raise DimensionError("basis must span the subsystem")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct")
        if not np.allclose(vecs.conj() @ vecs.T, np.eye(len(labels)), rtol=0.0, atol=ATOL):
            raise ValueError("basis vectors are not orthonormal")
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def index(self, label: str) -> int:
        return self.labels.index(label)


def ket(label: str) -> StateVector:
    """One of |0>, |1>, |+>, |->."""
    s = 1 / math.sqrt(2)
    table = {"0": (1, 0), "1": (0, 1), "+": (s, s), "-": (s, -s)}
    return StateVector(np.array(table[label], dtype=complex), (2,))


Z_BASIS = MeasurementBasis(np.eye(2), ("0", "1"))
X_BASIS = MeasurementBasis(np.array([[1, 1], [1, -1]]) / math.sqrt(2), ("+", "-"))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    if a.dims != b.dims:
        raise DimensionError(f"cannot take inner product of {a.dims} and {b.dims}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply_isometry(v: Isometry, s: StateVector, targets: Sequence[int]) -> StateVector:
    """Apply ``v`` to subsystems ``targets`` of ``s``.

    The first ``len(targets)`` output subsystems of ``v`` take the places of
    the targets; any further output subsystems (fresh ancillae) are appended
    after all existing subsystems.
    """
    targets = list(targets)
    if len(set(targets)) != len(targets) or any(not 0 <= t < len(s.dims) for t in targets):
        raise DimensionError(f"bad target subsystems {targets}")
    if tuple(s.dims[t] for t in targets) != v.in_dims:
        raise DimensionError(f"isometry expects {v.in_dims}, targets have "
                             f"{tuple(s.dims[t] for t in targets)}")
    k, n_out = len(targets), len(v.out_dims)
    if n_out < k:
        raise DimensionError("isometry must keep one output subsystem per target")
    rest = [i for i in range(len(s.dims)) if i not in targets]
    psi = np.moveaxis(s.tensor(), targets, range(k)).reshape(math.prod(v.in_dims), -1)
    out = (v.matrix @ psi).reshape(list(v.out_dims) + [s.dims[i] for i in rest])
    order = [targets.index(i) if i in targets else n_out + rest.index(i)
             for i in range(len(s.dims))]
    order += list(range(k, n_out))
    out = np.transpose(out, order)
    return StateVector(out.ravel(), out.shape)


def born_probabilities(s: StateVector, basis: MeasurementBasis, subsystem: int) -> np.ndarray:
    if s.dims[subsystem] != basis.dim:
        raise DimensionError("basis does not match subsystem dimension")
    psi = np.moveaxis(s.tensor(), subsystem, 0).reshape(basis.dim, -1)
    coeffs = basis.vectors.conj() @ psi
    return np.sum(coeffs.real ** 2 + coeffs.imag ** 2, axis=1)


def pick_outcome(probs: np.ndarray, u: float) -> int:
    """Inverse-CDF selection; zero-weight outcomes are never chosen."""
    cdf = np.cumsum(probs)
    return int(np.argmax(cdf > u * cdf[-1]))


def measure(s: StateVector, basis: MeasurementBasis, subsystem: int, rng
            ) -> tuple[str, StateVector, float]:
    """Projective measurement of one subsystem.

    ``rng`` only needs a ``random()`` method returning a float in [0, 1).
    Returns the sampled label, the renormalized post-measurement state and
    the Born probability of that label.
    """
    probs = born_probabilities(s, basis, subsystem)
    k = pick_outcome(probs, rng.random())
    psi = np.moveaxis(s.tensor(), subsystem, 0)
    rest_shape = psi.shape[1:]
    coeff = (basis.vectors[k].conj() @ psi.reshape(basis.dim, -1)).reshape(rest_shape)
    collapsed = np.multiply.outer(basis.vectors[k], coeff / math.sqrt(probs[k]))
    collapsed = np.moveaxis(collapsed, 0, subsystem)
    return basis.labels[k], StateVector(collapsed.ravel(), s.dims), float(probs[k])

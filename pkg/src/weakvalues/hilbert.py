"""
Dense complex linear algebra over small, labeled Hilbert spaces.

Basis labels are plain strings (``"L"``, ``"D2"``) or, for composite
spaces, tuples of factor labels (``("R", "V")``).  Every vector and
operator carries its label tuple so that spaces can be checked for
compatibility and reports can talk about arms by name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import NotHermitian, SpaceMismatch, UnknownLabel, ZeroState

__all__ = [
    "StateVector",
    "Operator",
    "SpectralDecomposition",
    "basis_state",
    "state_from_amplitudes",
    "identity",
    "inner",
    "apply",
    "tensor",
    "projector",
    "label_projector",
    "spectral_decompose",
    "is_hermitian",
    "check_unitary",
    "label_str",
    "parse_label",
]

Label = Hashable
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
DEGENERACY_TOL = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.flags.writeable = False
    return arr


def _flatten_label(label) -> tuple:
    if isinstance(label, tuple):
        return label
    return (label,)


def label_str(label) -> str:
    """Render a label as text; composite labels are joined with commas."""
    if isinstance(label, tuple):
        return ",".join(str(part) for part in label)
    return str(label)


def parse_label(text: str):
    """Inverse of :func:`label_str`."""
    parts = text.split(",")
    return parts[0] if len(parts) == 1 else tuple(parts)


@dataclass(frozen=True, eq=False)
class StateVector:
    """A ket expressed in a labeled orthonormal basis."""

    labels: tuple
    amplitudes: np.ndarray = field(repr=False)
    normalized: bool = False

    def __post_init__(self):
        labels = tuple(self.labels)
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.shape[0] != len(labels):
            raise SpaceMismatch(
                f"{amps.shape[0]} amplitudes for {len(labels)} basis labels")
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels must be unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)
        if self.normalized and abs(self.norm_squared() - 1.0) > 1e-12:
            raise ValueError(
                f"state flagged normalized has norm^2 {self.norm_squared()!r}")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_squared()))

    def normalize(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ZeroState("cannot normalize the zero vector")
        return StateVector(self.labels, self.amplitudes / n, normalized=True)

    def amplitude(self, label) -> complex:
        try:
            return complex(self.amplitudes[self.labels.index(label)])
        except ValueError:
            raise UnknownLabel(label) from None

    def scaled(self, factor: complex) -> "StateVector":
        return StateVector(self.labels, factor * self.amplitudes)

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_space(self.labels, other.labels)
        return StateVector(self.labels, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _check_space(self.labels, other.labels)
        return StateVector(self.labels, self.amplitudes - other.amplitudes)

    def __rmul__(self, factor) -> "StateVector":
        return self.scaled(factor)

    def as_dict(self) -> dict:
        return {lab: complex(a) for lab, a in zip(self.labels, self.amplitudes)}


@dataclass(frozen=True, eq=False)
class Operator:
    """A square complex matrix acting on a labeled space."""

    labels: tuple
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        mat = _frozen(self.matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise SpaceMismatch(f"operator matrix must be square, got {mat.shape}")
        if mat.shape[0] != len(labels):
            raise SpaceMismatch(
                f"{mat.shape[0]}x{mat.shape[0]} matrix for {len(labels)} labels")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def dagger(self) -> "Operator":
        return Operator(self.labels, self.matrix.conj().T)

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_space(self.labels, other.labels)
        return Operator(self.labels, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        _check_space(self.labels, other.labels)
        return Operator(self.labels, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        _check_space(self.labels, other.labels)
        return Operator(self.labels, self.matrix - other.matrix)

    def __rmul__(self, factor) -> "Operator":
        return Operator(self.labels, factor * self.matrix)


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: tuple
    projectors: tuple

    def reconstruct(self) -> Operator:
        labels = self.projectors[0].labels
        mat = sum(s * p.matrix for s, p in zip(self.eigenvalues, self.projectors))
        return Operator(labels, mat)


def _check_space(a: Sequence, b: Sequence) -> None:
    if tuple(a) != tuple(b):
        raise SpaceMismatch(f"spaces differ: {tuple(a)} vs {tuple(b)}")


def basis_state(labels: Iterable[Label], label: Label) -> StateVector:
    labels = tuple(labels)
    if label not in labels:
        raise UnknownLabel(label)
    amps = np.zeros(len(labels), dtype=complex)
    amps[labels.index(label)] = 1.0
    return StateVector(labels, amps, normalized=True)


def state_from_amplitudes(labels: Iterable[Label],
                          amplitudes: Mapping[Label, complex]) -> StateVector:
    """Build a state from a sparse ``{label: amplitude}`` map."""
    labels = tuple(labels)
    amps = np.zeros(len(labels), dtype=complex)
    for lab, value in amplitudes.items():
        if lab not in labels:
            raise UnknownLabel(lab)
        amps[labels.index(lab)] = value
    return StateVector(labels, amps)


def identity(labels: Iterable[Label]) -> Operator:
    labels = tuple(labels)
    return Operator(labels, np.eye(len(labels), dtype=complex))


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, antilinear in the first slot."""
    _check_space(a.labels, b.labels)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply(op: Operator, v: StateVector) -> StateVector:
    _check_space(op.labels, v.labels)
    return StateVector(v.labels, op.matrix @ v.amplitudes)


def tensor(a: Union[StateVector, Operator],
           b: Union[StateVector, Operator]) -> Union[StateVector, Operator]:
    """Kronecker product; composite labels are flattened tuples ``(a..., b...)``."""
    labels = tuple(_flatten_label(x) + _flatten_label(y)
                   for x in a.labels for y in b.labels)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(labels, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(labels, np.kron(a.matrix, b.matrix))
    raise TypeError("tensor needs two states or two operators")


def projector(target: StateVector) -> Operator:
    """Rank-one projector |t><t| / <t|t>; the target need not be normalized."""
    n2 = target.norm_squared()
    if n2 == 0.0:
        raise ZeroState("projector onto the zero vector")
    v = target.amplitudes
    return Operator(target.labels, np.outer(v, v.conj()) / n2)


def label_projector(labels: Iterable[Label], keep: Iterable[Label]) -> Operator:
    """Diagonal projector onto the span of the basis vectors in ``keep``."""
    labels = tuple(labels)
    diag = np.zeros(len(labels))
    for lab in keep:
        if lab not in labels:
            raise UnknownLabel(lab)
        diag[labels.index(lab)] = 1.0
    return Operator(labels, np.diag(diag))


def is_hermitian(op: Operator, tol: float = HERMITIAN_TOL) -> bool:
    m = op.matrix
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def spectral_decompose(op: Operator, tol: float = DEGENERACY_TOL) -> SpectralDecomposition:
    """
    Eigen-decompose a Hermitian operator into eigenvalue/projector pairs.

    Eigenvalues closer than ``tol`` (absolute, chained in sorted order)
    are treated as one degenerate eigenvalue and share a projector.
    Eigenvalues within 1e-12 of an integer are snapped to it, which keeps
    projector-valued observables exact.
    """
    if not is_hermitian(op):
        raise NotHermitian("spectral decomposition needs a Hermitian operator")
    herm = 0.5 * (op.matrix + op.matrix.conj().T)
    vals, vecs = np.linalg.eigh(herm)

    groups: list[list[int]] = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])

    eigenvalues, projectors = [], []
    for idx in groups:
        s = float(np.mean(vals[idx]))
        if abs(s - round(s)) < 1e-12:
            s = float(round(s))
        v = vecs[:, idx]
        eigenvalues.append(s)
        projectors.append(Operator(op.labels, v @ v.conj().T))
    return SpectralDecomposition(tuple(eigenvalues), tuple(projectors))


def check_unitary(op: Operator, tol: float = UNITARY_TOL) -> bool:
    m = op.matrix
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(op.dim))) <= tol)

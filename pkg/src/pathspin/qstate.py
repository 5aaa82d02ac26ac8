"""Exact linear algebra for a spin-1/2 particle with a two-channel path degree of freedom.

Joint amplitudes are stored path-major in the order

    (p, up), (p, down), (q, up), (q, down)

where ``(p, q)`` is ``(psi1, psi2)`` for the ``IN`` basis (before the second
beam splitter) and ``(psi3, psi4)`` for the ``OUT`` basis (after it).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BasisError, DecompositionError, StateError

ATOL = 1e-12


class Basis(enum.Enum):
    IN = "in"    # (psi1, psi2)
    OUT = "out"  # (psi3, psi4)


def _frozen(a, shape) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    if arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite amplitude or matrix entry")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Spinor:
    """Spin amplitudes in the (|up>_z, |down>_z) basis."""

    up: complex
    down: complex

    def __post_init__(self):
        for v in (self.up, self.down):
            if not np.isfinite(complex(v)):
                raise ValueError("non-finite spinor amplitude")

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.up, self.down], dtype=complex)

    def norm2(self) -> float:
        return float(abs(self.up) ** 2 + abs(self.down) ** 2)


@dataclass(frozen=True)
class PathVec:
    c1: complex
    c2: complex
    basis: Basis

    def __post_init__(self):
        if not isinstance(self.basis, Basis):
            raise BasisError(f"path vector needs a Basis tag, got {self.basis!r}")
        for v in (self.c1, self.c2):
            if not np.isfinite(complex(v)):
                raise ValueError("non-finite path amplitude")

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.c1, self.c2], dtype=complex)

    def norm2(self) -> float:
        return float(abs(self.c1) ** 2 + abs(self.c2) ** 2)


SPIN_UP = Spinor(1, 0)
SPIN_DOWN = Spinor(0, 1)
PSI1 = PathVec(1, 0, Basis.IN)
PSI2 = PathVec(0, 1, Basis.IN)
PSI3 = PathVec(1, 0, Basis.OUT)
PSI4 = PathVec(0, 1, Basis.OUT)


@dataclass(frozen=True, eq=False)
class JointState:
    """Pure path x spin state. Normalization is checked, never repaired."""

    amps: np.ndarray
    basis: Basis
    normalized: bool = True

    def __post_init__(self):
        if not isinstance(self.basis, Basis):
            raise BasisError(f"joint state needs a Basis tag, got {self.basis!r}")
        object.__setattr__(self, "amps", _frozen(self.amps, (4,)))
        if self.normalized and abs(self.norm2() - 1.0) > ATOL:
            raise StateError(f"state flagged normalized has norm^2 {self.norm2()!r}")

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def as_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to [path, spin]."""
        return self.amps.reshape(2, 2)

    def allclose(self, other: JointState, atol: float = ATOL) -> bool:
        return self.basis == other.basis and np.allclose(self.amps, other.amps, rtol=0, atol=atol)


@dataclass(frozen=True, eq=False)
class Op2:
    """A 2x2 operator on either the path or the spin factor.

    ``domain``/``codomain`` are set only for path maps that change basis
    (the second beam splitter maps IN to OUT) or that are tied to one basis.
    Passing ``hermitian=True`` or ``unitary=True`` verifies the claim.
    """

    matrix: np.ndarray
    domain: Basis | None = None
    codomain: Basis | None = None
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix, (2, 2)))
        if (self.domain is None) != (self.codomain is None):
            raise BasisError("domain and codomain must be given together")
        if self.hermitian and not is_hermitian(self.matrix):
            raise ValueError("operator claimed Hermitian is not")
        if self.unitary and not is_unitary(self.matrix):
            raise ValueError("operator claimed unitary is not")

    def __matmul__(self, other: Op2) -> Op2:
        return Op2(self.matrix @ other.matrix)

    @property
    def dag(self) -> np.ndarray:
        return self.matrix.conj().T


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    return bool(np.allclose(m, m.conj().T, rtol=0, atol=atol))


def is_unitary(m: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), rtol=0, atol=atol))


I2 = Op2(np.eye(2), hermitian=True, unitary=True)
SIGMA_X = Op2([[0, 1], [1, 0]], hermitian=True, unitary=True)
SIGMA_Y = Op2([[0, -1j], [1j, 0]], hermitian=True, unitary=True)
SIGMA_Z = Op2([[1, 0], [0, -1]], hermitian=True, unitary=True)
PAULIS = (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)


def tensor(path: PathVec, spin: Spinor) -> JointState:
    """Product state |path>|spin>."""
    if not isinstance(path, PathVec) or not isinstance(path.basis, Basis):
        raise BasisError("path factor must be a PathVec with a basis tag")
    for name, n2 in (("path", path.norm2()), ("spin", spin.norm2())):
        if abs(n2 - 1.0) > ATOL:
            raise StateError(f"{name} factor is not normalized (norm^2 {n2!r})")
    return JointState(np.kron(path.vec, spin.vec), path.basis)


def _output_basis(op: Op2, s: JointState) -> Basis:
    if op.domain is None:
        return s.basis
    if op.domain != s.basis:
        raise BasisError(f"operator acts on {op.domain.name} basis, state is in {s.basis.name}")
    return op.codomain


def apply_path(op: Op2, s: JointState) -> JointState:
    """(op x I_spin) |s>; the result is normalized iff op is unitary."""
    basis = _output_basis(op, s)
    amps = op.matrix @ s.as_matrix()
    out = amps.reshape(4)
    return JointState(out, basis, normalized=abs(np.sum(np.abs(out) ** 2) - 1) <= ATOL)


def apply_spin(op: Op2, s: JointState) -> JointState:
    """(I_path x op) |s>."""
    if op.domain is not None:
        raise BasisError("spin operators carry no path basis")
    out = (s.as_matrix() @ op.matrix.T).reshape(4)
    return JointState(out, s.basis, normalized=abs(np.sum(np.abs(out) ** 2) - 1) <= ATOL)


def on_path(op: Op2) -> np.ndarray:
    """Embed a path operator in the joint space as op x I."""
    return np.kron(op.matrix, np.eye(2))


def on_spin(op: Op2) -> np.ndarray:
    return np.kron(np.eye(2), op.matrix)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def pauli_decompose(op: Op2 | np.ndarray) -> tuple[float, float, float, float]:
    """Real coefficients (a0, ax, ay, az) with op = a0 I + ax X + ay Y + az Z."""
    m = op.matrix if isinstance(op, Op2) else np.asarray(op, dtype=complex)
    if not is_hermitian(m):
        raise DecompositionError("Pauli decomposition needs a Hermitian operator")
    return tuple(float(np.real(np.trace(m @ p.matrix))) / 2 for p in PAULIS)


def pauli_reconstruct(coeffs) -> np.ndarray:
    return sum(c * p.matrix for c, p in zip(coeffs, PAULIS))

"""Spin observable sigma_theta, the path observables A_i and their pseudo-spin axes.

Note the half-angle: ``theta`` parameterizes the eigenvectors
``|up>_theta = cos(theta)|up> + sin(theta)|down>``, so the operator is
``cos(2 theta) sigma_z + sin(2 theta) sigma_x``. Every closed form in this
package is written in ``2 theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .interferometer import BeamSplitterParams, bs2_unitary
from .qstate import ATOL, SIGMA_Z, Basis, Op2, Spinor, commutator, on_path, on_spin


@dataclass(frozen=True)
class SpinAxis:
    """Measurement angle; canonicalized to [0, pi) since sigma_theta has period pi."""

    theta: float

    def __post_init__(self):
        t = float(self.theta)
        if not math.isfinite(t):
            raise ParameterError("theta must be finite")
        t = math.fmod(t, math.pi)
        if t < 0:
            t += math.pi
        if t >= math.pi:
            t = 0.0
        object.__setattr__(self, "theta", t)

    @classmethod
    def degrees(cls, deg: float) -> SpinAxis:
        return cls(math.radians(deg))

    def eigenstates(self) -> tuple[Spinor, Spinor]:
        """(|up>_theta, |down>_theta) with eigenvalues +1 and -1."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Spinor(c, s), Spinor(s, -c)


def as_axis(axis) -> SpinAxis:
    return axis if isinstance(axis, SpinAxis) else SpinAxis(axis)


def sigma_theta(axis: SpinAxis | float) -> Op2:
    up, down = as_axis(axis).eigenstates()
    m = np.outer(up.vec, up.vec.conj()) - np.outer(down.vec, down.vec.conj())
    return Op2(m, hermitian=True, unitary=True)


@dataclass(frozen=True, eq=False)
class PathObservable:
    """A_i = P(psi3) - P(psi4) together with its pseudo-spin axis in the IN basis."""

    op: Op2
    axis: tuple[float, float, float]
    bs: BeamSplitterParams

    def __post_init__(self):
        m = self.op.matrix
        if not np.allclose(m @ m, np.eye(2), atol=ATOL, rtol=0):
            raise ValueError("path observable must square to the identity")
        if abs(math.fsum(a * a for a in self.axis) - 1.0) > ATOL:
            raise ValueError("pseudo-spin axis must be a unit vector")

    def in_basis(self) -> Op2:
        """Representation on (psi1, psi2): U^dag diag(1, -1) U."""
        u = bs2_unitary(self.bs).matrix
        return Op2(u.conj().T @ self.op.matrix @ u, domain=Basis.IN, codomain=Basis.IN,
                   hermitian=True)


def path_observable(bs: BeamSplitterParams) -> PathObservable:
    op = Op2(SIGMA_Z.matrix, domain=Basis.OUT, codomain=Basis.OUT, hermitian=True)
    g, d = bs.gamma, bs.delta
    return PathObservable(op, (0.0, 2 * g * d, g * g - d * d), bs)


def path_matrix_closed_form(bs: BeamSplitterParams) -> np.ndarray:
    """The IN-basis matrix of A_i written out entrywise."""
    g, d = bs.gamma, bs.delta
    return np.array([[g * g - d * d, -2j * g * d], [2j * g * d, d * d - g * g]])


def commutator_norm(p: PathObservable, axis: SpinAxis | float) -> float:
    """Largest entry of |[(A x I), (I x sigma_theta)]| on the joint space."""
    c = commutator(on_path(p.op), on_spin(sigma_theta(axis)))
    return float(np.max(np.abs(c)))

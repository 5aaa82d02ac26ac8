"""Mach-Zehnder setup with a spin flipper in one arm.

Phase convention: a reflection picks up a factor ``i`` relative to the
transmitted amplitude, at both beam splitters. The flipper is ``sigma_x``
on the psi1 arm and the mirrors act as the identity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .qstate import (
    ATOL,
    I2,
    PSI1,
    PSI2,
    SIGMA_X,
    SPIN_UP,
    Basis,
    JointState,
    Op2,
    apply_path,
    tensor,
)


class Channel(enum.IntEnum):
    """Output channel; SG1 sits on psi3, SG2 on psi4."""

    SG1 = 0
    SG2 = 1


@dataclass(frozen=True)
class BeamSplitterParams:
    """Real reflection (gamma) and transmission (delta) amplitudes of BS2."""

    gamma: float
    delta: float

    def __post_init__(self):
        g, d = float(self.gamma), float(self.delta)
        if not (math.isfinite(g) and math.isfinite(d)):
            raise ParameterError("beam splitter amplitudes must be finite")
        if not (0.0 <= g <= 1.0 and 0.0 <= d <= 1.0):
            raise ParameterError(f"amplitudes must lie in [0, 1], got gamma={g}, delta={d}")
        if abs(g * g + d * d - 1.0) > ATOL:
            raise ParameterError(f"gamma^2 + delta^2 = {g * g + d * d!r}, expected 1")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "delta", d)

    @classmethod
    def from_gamma(cls, gamma: float) -> BeamSplitterParams:
        if not 0.0 <= gamma <= 1.0:
            raise ParameterError(f"gamma must lie in [0, 1], got {gamma}")
        return cls(gamma, math.sqrt(1.0 - gamma * gamma))

    @classmethod
    def from_angle(cls, chi: float) -> BeamSplitterParams:
        """gamma = cos(chi), delta = sin(chi) for chi in [0, pi/2]."""
        if not -ATOL <= chi <= math.pi / 2 + ATOL:
            raise ParameterError(f"chi must lie in [0, pi/2], got {chi}")
        # clamp so cos(pi/2) ~ 6e-17 style residue never goes negative
        return cls(min(max(math.cos(chi), 0.0), 1.0), min(max(math.sin(chi), 0.0), 1.0))

    @property
    def chi(self) -> float:
        return math.atan2(self.delta, self.gamma)


@dataclass(frozen=True)
class SourceParams:
    """BS1 reflectivity r; the paper's main setting is r = 1/2."""

    r: float = 0.5

    def __post_init__(self):
        r = float(self.r)
        if not (math.isfinite(r) and 0.0 <= r <= 1.0):
            raise ParameterError(f"BS1 reflectivity must lie in [0, 1], got {self.r!r}")
        object.__setattr__(self, "r", r)


HALF = SourceParams(0.5)
CONTEXT_A1 = BeamSplitterParams(1 / math.sqrt(2), 1 / math.sqrt(2))
CONTEXT_A2 = BeamSplitterParams(0.5, math.sqrt(3) / 2)


def _branch_projector(k: int) -> np.ndarray:
    p = np.zeros((2, 2))
    p[k, k] = 1.0
    return p


def prepare_state(src: SourceParams = HALF) -> JointState:
    """State entering BS2: sqrt(1-r)|psi1>|down> + i sqrt(r)|psi2>|up>."""
    if not isinstance(src, SourceParams):
        src = SourceParams(src)
    t, r = math.sqrt(1.0 - src.r), math.sqrt(src.r)
    # BS1: transmitted -> psi1, reflected -> i psi2; spin starts along +z
    split = tensor(PSI1, SPIN_UP).amps * t + tensor(PSI2, SPIN_UP).amps * 1j * r
    # flipper on the psi1 arm only
    flip = np.kron(_branch_projector(0), SIGMA_X.matrix) + np.kron(_branch_projector(1), I2.matrix)
    mirrors = np.eye(4)
    return JointState(mirrors @ flip @ split, Basis.IN)


def bs2_unitary(bs: BeamSplitterParams) -> Op2:
    """Path map psi1 -> i gamma psi3 + delta psi4, psi2 -> delta psi3 + i gamma psi4."""
    g, d = bs.gamma, bs.delta
    # columns are the images of psi1 and psi2 in the (psi3, psi4) basis
    m = np.array([[1j * g, d], [d, 1j * g]])
    return Op2(m, domain=Basis.IN, codomain=Basis.OUT, unitary=True)


def run_pipeline(src: SourceParams, bs: BeamSplitterParams) -> JointState:
    """State after BS2, in the OUT basis."""
    return apply_path(bs2_unitary(bs), prepare_state(src))


def channel_probability(src: SourceParams, bs: BeamSplitterParams, channel: Channel) -> float:
    """Closed form P(psi3) = (1-r) gamma^2 + r delta^2."""
    p3 = (1.0 - src.r) * bs.gamma**2 + src.r * bs.delta**2
    return p3 if Channel(channel) is Channel.SG1 else (1.0 - src.r) * bs.delta**2 + src.r * bs.gamma**2

"""Whole-ensemble and subensemble spin statistics, analytic and sampled.

Two normalizations are kept apart throughout:

* ``mean_sg*``: signed spin sum over one output channel divided by the
  *total* number of particles, so ``mean_sg1 + mean_sg2 == whole_mean``.
* ``cond_mean_sg*``: the same sum divided by the channel's own count. The
  fluctuation ``sqrt(1 - cond_mean**2)`` is taken over this conditional
  distribution.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ParameterError, StateError, UndefinedStatisticError
from .interferometer import (
    HALF,
    BeamSplitterParams,
    Channel,
    SourceParams,
    channel_probability,
    prepare_state,
    run_pipeline,
)
from .observables import SpinAxis, as_axis, sigma_theta
from .qstate import ATOL, Basis, JointState, on_spin

SPIN_VALUES = (1, -1)


@dataclass(frozen=True, eq=False)
class OutcomeTable:
    """Joint outcomes indexed ``[channel][spin]``: channel 0 = SG1, spin 0 = +1.

    Holds probabilities when ``n`` is None, integer counts summing to ``n`` otherwise.
    """

    table: np.ndarray
    n: int | None = None

    def __post_init__(self):
        t = np.array(self.table)
        if t.shape != (2, 2):
            t = t.reshape(2, 2)
        if self.n is None:
            t = t.astype(float)
            if np.any(t < -ATOL) or abs(t.sum() - 1.0) > ATOL:
                raise StateError(f"probabilities must be non-negative and sum to 1, got {t.ravel()}")
        else:
            t = t.astype(np.int64)
            if np.any(t < 0) or int(t.sum()) != self.n:
                raise ValueError(f"counts {t.ravel()} do not sum to n={self.n}")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def is_counts(self) -> bool:
        return self.n is not None

    @property
    def probs(self) -> np.ndarray:
        return self.table / self.n if self.is_counts else self.table

    def flat(self) -> tuple:
        """(SG1+, SG1-, SG2+, SG2-)."""
        return tuple(self.table.ravel().tolist())


@dataclass(frozen=True)
class SubensembleStats:
    n: int | None
    mean_sg1: float
    mean_sg2: float
    whole_mean: float
    p_sg1: float
    p_sg2: float
    # None marks an empty subensemble: conditional statistics are undefined there
    cond_mean_sg1: float | None
    cond_mean_sg2: float | None
    fluct_sg1: float | None
    fluct_sg2: float | None
    se_mean_sg1: float | None = None
    se_mean_sg2: float | None = None
    se_whole: float | None = None
    se_cond_sg1: float | None = None
    se_cond_sg2: float | None = None

    @property
    def sg1_defined(self) -> bool:
        return self.cond_mean_sg1 is not None

    @property
    def sg2_defined(self) -> bool:
        return self.cond_mean_sg2 is not None


@dataclass(frozen=True)
class SampleConfig:
    """Sampling setup. ``stream`` selects an independent substream of ``seed``."""

    n: int
    seed: int = 0
    chunk: int = 1 << 16
    stream: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"sample size must be a positive integer, got {self.n!r}")
        if int(self.chunk) != self.chunk or self.chunk < 1:
            raise ParameterError(f"chunk must be a positive integer, got {self.chunk!r}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        if self.stream < 0:
            raise ParameterError("stream must be non-negative")

    def chunk_sizes(self) -> list[int]:
        full, rest = divmod(self.n, self.chunk)
        return [self.chunk] * full + ([rest] if rest else [])

    def chunk_generators(self) -> list[np.random.Generator]:
        """One Philox generator per chunk, fixed by (seed, stream, chunk index)."""
        root = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return [np.random.Generator(np.random.Philox(s))
                for s in root.spawn(len(self.chunk_sizes()))]


def run_chunked(draw: Callable[[np.random.Generator, int], np.ndarray], cfg: SampleConfig,
                workers: int = 1) -> np.ndarray:
    """Sum integer count arrays produced chunk by chunk.

    Each chunk owns its generator, and integer addition is order-free, so any
    ``workers`` value yields bit-identical totals.
    """
    jobs = list(zip(cfg.chunk_generators(), cfg.chunk_sizes()))
    if workers <= 1:
        parts = [draw(g, k) for g, k in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: draw(*job), jobs))
    return np.sum(parts, axis=0, dtype=np.int64)


# --------------------------------------------------------------------------
# analytic statistics

def joint_probs(state: JointState, axis: SpinAxis | float) -> OutcomeTable:
    """Born-rule table |<channel, s_theta|state>|^2."""
    if state.basis is not Basis.OUT:
        raise StateError("joint_probs needs a state in the OUT (detector) basis")
    if not state.normalized or abs(state.norm2() - 1.0) > ATOL:
        raise StateError("joint_probs needs a normalized state")
    up, down = as_axis(axis).eigenstates()
    proj = np.array([up.vec.conj(), down.vec.conj()])  # rows: <up_theta|, <down_theta|
    amps = state.as_matrix() @ proj.T                  # [channel, spin]
    return OutcomeTable(np.abs(amps) ** 2)


def joint_probs_grid(state: JointState, thetas) -> np.ndarray:
    """Born-rule tables for many angles at once, shape (len(thetas), 2, 2)."""
    if state.basis is not Basis.OUT:
        raise StateError("joint_probs needs a state in the OUT (detector) basis")
    if not state.normalized or abs(state.norm2() - 1.0) > ATOL:
        raise StateError("joint_probs needs a normalized state")
    t = np.asarray(thetas, dtype=float)
    c, s = np.cos(t), np.sin(t)
    # eig[k, spin, component]: rows are <up_theta| and <down_theta| (real vectors)
    eig = np.stack([np.stack([c, s], -1), np.stack([s, -c], -1)], 1)
    amps = np.einsum("pi,ksi->kps", state.as_matrix(), eig)
    return np.abs(amps) ** 2


def qm_table(bs: BeamSplitterParams, axis: SpinAxis | float,
             src: SourceParams = HALF) -> OutcomeTable:
    return joint_probs(run_pipeline(src, bs), axis)


def subensemble_coefficients(bs: BeamSplitterParams, channel: Channel,
                             src: SourceParams = HALF) -> tuple[float, float]:
    """(c_cos, c_sin) with mean = c_cos cos(2 theta) + c_sin sin(2 theta).

    For r = 1/2: SG1 gives ((delta^2 - gamma^2)/2, gamma delta) and SG2 the negatives.
    """
    g, d, r = bs.gamma, bs.delta, src.r
    mix = 2 * g * d * math.sqrt(r * (1.0 - r))
    if Channel(channel) is Channel.SG1:
        return d * d * r - g * g * (1.0 - r), mix
    return g * g * r - d * d * (1.0 - r), -mix


def subensemble_mean_analytic(bs: BeamSplitterParams, axis: SpinAxis | float,
                              channel: Channel, src: SourceParams = HALF) -> float:
    """Closed-form subensemble mean (per total particle number)."""
    theta = as_axis(axis).theta
    c_cos, c_sin = subensemble_coefficients(bs, channel, src)
    return c_cos * math.cos(2 * theta) + c_sin * math.sin(2 * theta)


def subensemble_curve(bs: BeamSplitterParams, thetas, channel: Channel,
                      src: SourceParams = HALF) -> np.ndarray:
    """Closed-form subensemble mean over an array of angles."""
    t = np.asarray(thetas, dtype=float)
    c_cos, c_sin = subensemble_coefficients(bs, channel, src)
    return c_cos * np.cos(2 * t) + c_sin * np.sin(2 * t)


def subensemble_mean_born(bs: BeamSplitterParams, axis: SpinAxis | float,
                          channel: Channel, src: SourceParams = HALF) -> float:
    """Same quantity from the Born-rule table of the post-BS2 state."""
    p = qm_table(bs, axis, src).table[Channel(channel)]
    return float(p[0] - p[1])


def whole_ensemble_mean(src: SourceParams, axis: SpinAxis | float) -> float:
    """<Psi| I x sigma_theta |Psi> on the state before BS2; (2r - 1) cos(2 theta)."""
    psi = prepare_state(src).amps
    return float(np.real(psi.conj() @ on_spin(sigma_theta(axis)) @ psi))


def conditional_mean(bs: BeamSplitterParams, axis: SpinAxis | float, channel: Channel,
                     src: SourceParams = HALF) -> float:
    p = qm_table(bs, axis, src).table[Channel(channel)]
    total = p.sum()
    if total <= ATOL:
        raise UndefinedStatisticError(f"channel {Channel(channel).name} is empty")
    return float((p[0] - p[1]) / total)


def _spread(up: float, down: float) -> float:
    # sqrt(1 - m^2) with m = (up - down)/(up + down), without cancellation near |m| = 1
    return 2.0 * math.sqrt(up * down) / (up + down)


def conditional_fluctuation(bs: BeamSplitterParams, axis: SpinAxis | float, channel: Channel,
                            src: SourceParams = HALF) -> float:
    """sqrt(<s^2> - <s>^2) over one channel's own particles; <s^2> = 1."""
    p = qm_table(bs, axis, src).table[Channel(channel)]
    if p.sum() <= ATOL:
        raise UndefinedStatisticError(f"channel {Channel(channel).name} is empty")
    return _spread(float(p[0]), float(p[1]))


def contextuality_gap(bs_a: BeamSplitterParams, bs_b: BeamSplitterParams,
                      axis: SpinAxis | float, channel: Channel,
                      src: SourceParams = HALF) -> float:
    return abs(subensemble_mean_analytic(bs_a, axis, channel, src)
               - subensemble_mean_analytic(bs_b, axis, channel, src))


def fluctuation_gap(bs_a: BeamSplitterParams, bs_b: BeamSplitterParams,
                    axis: SpinAxis | float, channel: Channel,
                    src: SourceParams = HALF) -> float:
    return abs(conditional_fluctuation(bs_a, axis, channel, src)
               - conditional_fluctuation(bs_b, axis, channel, src))


def _theta_zeros(a: float, b: float) -> tuple[float, float]:
    """Both theta in [0, pi) where a cos(2 theta) + b sin(2 theta) = 0."""
    if math.hypot(a, b) <= ATOL:
        raise ParameterError("combination vanishes identically; zeros are not isolated")
    x0 = math.atan2(-a, b) % math.pi  # 2 theta, modulo pi
    return tuple(sorted(((x0 / 2) % math.pi, (x0 / 2 + math.pi / 2) % math.pi)))


def gap_zeros(bs_a: BeamSplitterParams, bs_b: BeamSplitterParams, channel: Channel,
              src: SourceParams = HALF) -> tuple[float, ...]:
    """Angles in [0, pi) where the two contexts give equal subensemble means."""
    ca, sa = subensemble_coefficients(bs_a, channel, src)
    cb, sb = subensemble_coefficients(bs_b, channel, src)
    return _theta_zeros(ca - cb, sa - sb)


def fluctuation_coincidences(bs_a: BeamSplitterParams, bs_b: BeamSplitterParams,
                             channel: Channel, src: SourceParams = HALF) -> tuple[float, ...]:
    """Angles in [0, pi) where the conditional fluctuations coincide (m_a = +-m_b)."""
    pa = channel_probability(src, bs_a, channel)
    pb = channel_probability(src, bs_b, channel)
    if min(pa, pb) <= ATOL:
        raise UndefinedStatisticError("fluctuation undefined for an empty channel")
    ca, sa = (c / pa for c in subensemble_coefficients(bs_a, channel, src))
    cb, sb = (c / pb for c in subensemble_coefficients(bs_b, channel, src))
    zeros = []
    for sign in (1, -1):
        try:
            zeros.extend(_theta_zeros(ca - sign * cb, sa - sign * sb))
        except ParameterError:
            continue
    return tuple(sorted(zeros))


# --------------------------------------------------------------------------
# sampling

def sample(state: JointState, axis: SpinAxis | float, cfg: SampleConfig,
           workers: int = 1) -> OutcomeTable:
    """Draw cfg.n detections from the Born-rule table; reproducible for fixed cfg."""
    if not isinstance(cfg, SampleConfig):
        raise ParameterError("sample needs a SampleConfig")
    pvals = joint_probs(state, axis).table.ravel()
    pvals = np.clip(pvals, 0.0, None)
    pvals = pvals / pvals.sum()

    def draw(gen, k):
        return gen.multinomial(k, pvals)

    counts = run_chunked(draw, cfg, workers)
    return OutcomeTable(counts.reshape(2, 2), cfg.n)


def estimate(t: OutcomeTable) -> SubensembleStats:
    """Subensemble statistics from counts (with standard errors) or from probabilities."""
    p = t.probs
    n = t.n
    chan = p.sum(axis=1)
    if n is None:
        means = p[:, 0] - p[:, 1]
        whole = float(means.sum())
    else:
        # integer differences first, so additivity is exact at the count level
        diffs = t.table[:, 0] - t.table[:, 1]
        means = diffs / n
        whole = float(diffs.sum() / n)

    cond, fluct, se_cond = [], [], []
    for k in range(2):
        size = t.table[k].sum() if n is not None else chan[k]
        if size <= (0 if n is not None else ATOL):
            cond.append(None)
            fluct.append(None)
            se_cond.append(None)
            continue
        m = float((t.table[k, 0] - t.table[k, 1]) / size)
        cond.append(m)
        fluct.append(_spread(float(t.table[k, 0]), float(t.table[k, 1])))
        se_cond.append(math.sqrt(max(0.0, 1.0 - m * m) / size) if n is not None else None)

    se_means = [None, None]
    se_whole = None
    if n is not None:
        # per-particle variable in {+1, -1, 0} for each channel
        se_means = [math.sqrt(max(0.0, chan[k] - means[k] ** 2) / n) for k in range(2)]
        se_whole = math.sqrt(max(0.0, 1.0 - whole * whole) / n)

    return SubensembleStats(
        n=n,
        mean_sg1=float(means[0]),
        mean_sg2=float(means[1]),
        whole_mean=whole,
        p_sg1=float(chan[0]),
        p_sg2=float(chan[1]),
        cond_mean_sg1=cond[0],
        cond_mean_sg2=cond[1],
        fluct_sg1=fluct[0],
        fluct_sg2=fluct[1],
        se_mean_sg1=se_means[0],
        se_mean_sg2=se_means[1],
        se_whole=se_whole,
        se_cond_sg1=se_cond[0],
        se_cond_sg2=se_cond[1],
    )


def binomial_stderr(p: np.ndarray, n: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.sqrt(p * (1.0 - p) / n)

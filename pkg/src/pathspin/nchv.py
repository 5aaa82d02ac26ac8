"""Hidden-variable analysis of the path-spin statistics.

Three pieces:

* the correlation E(gamma, theta) of the commuting pair (A_i, sigma_theta)
  and the CHSH combination built from it;
* the noncontextual polytope: every deterministic assignment of a +-1 value
  to each path setting and each spin setting, with an L1-distance LP
  deciding whether the quantum table is a mixture of them;
* a two-variable (lambda, mu) model: mu picks the output channel by a
  threshold, lambda the spin outcome.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import CapacityError, ParameterError, SolverError, UndefinedStatisticError
from .interferometer import HALF, BeamSplitterParams, Channel, SourceParams, channel_probability
from .observables import SpinAxis, as_axis
from .statistics import OutcomeTable, SampleConfig, qm_table, run_chunked

FEASIBILITY_TOL = 1e-9
MAX_STRATEGIES = 2**20
OUTCOME_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))  # (a, s); a = +1 is SG1
CHSH_SIGNS = ((-1, 1, 1, 1), (1, -1, 1, 1), (1, 1, -1, 1), (1, 1, 1, -1))  # E11 E12 E21 E22


# --------------------------------------------------------------------------
# correlations

def correlation(bs: BeamSplitterParams, axis: SpinAxis | float) -> float:
    """E = sum a s p(a, s) = (delta^2 - gamma^2) cos 2theta + 2 gamma delta sin 2theta."""
    t = as_axis(axis).theta
    g, d = bs.gamma, bs.delta
    return (d * d - g * g) * math.cos(2 * t) + 2 * g * d * math.sin(2 * t)


def correlation_from_table(p: OutcomeTable) -> float:
    q = p.probs
    return float(q[0, 0] - q[0, 1] - q[1, 0] + q[1, 1])


def chsh(gammas: Sequence[BeamSplitterParams], thetas: Sequence[SpinAxis | float]) -> float:
    """S = E11 + E12 + E21 - E22."""
    if len(gammas) != 2 or len(thetas) != 2:
        raise ParameterError("CHSH needs exactly two path and two spin settings")
    e = [[correlation(g, t) for t in thetas] for g in gammas]
    return e[0][0] + e[0][1] + e[1][0] - e[1][1]


def chsh_optimal_settings() -> tuple[tuple[BeamSplitterParams, ...], tuple[SpinAxis, ...]]:
    """Settings reaching S = 2 sqrt 2: pseudo-spin angles pi/4, 3pi/4 and theta = pi/4, pi/2."""
    gammas = (BeamSplitterParams.from_angle(math.pi / 8), BeamSplitterParams.from_angle(3 * math.pi / 8))
    return gammas, (SpinAxis(math.pi / 4), SpinAxis(math.pi / 2))


def maximize_chsh(grid: int = 9, seed: int | None = None):
    """Grid search then bounded local refinement of S over (chi1, chi2, theta1, theta2).

    Returns (S, gammas, thetas).
    """
    def neg_s(x):
        g = [BeamSplitterParams.from_angle(float(np.clip(c, 0, math.pi / 2))) for c in x[:2]]
        return -chsh(g, [float(x[2]), float(x[3])])

    chis = np.linspace(0, math.pi / 2, grid)
    ths = np.linspace(0, math.pi, grid, endpoint=False)
    best = min(itertools.product(chis, chis, ths, ths), key=neg_s)
    bounds = [(0, math.pi / 2)] * 2 + [(None, None)] * 2
    res = optimize.minimize(neg_s, np.array(best), method="L-BFGS-B", bounds=bounds,
                            options={"ftol": 1e-15, "gtol": 1e-12})
    x = res.x
    gammas = tuple(BeamSplitterParams.from_angle(float(np.clip(c, 0, math.pi / 2))) for c in x[:2])
    return -float(res.fun), gammas, (SpinAxis(float(x[2])), SpinAxis(float(x[3])))


# --------------------------------------------------------------------------
# noncontextual polytope

@dataclass(frozen=True)
class ContextSet:
    gammas: tuple[BeamSplitterParams, ...]
    thetas: tuple[SpinAxis, ...]
    src: SourceParams = HALF

    def __post_init__(self):
        gs = tuple(self.gammas)
        ts = tuple(as_axis(t) for t in self.thetas)
        if not gs or not ts:
            raise ParameterError("context set needs at least one path and one spin setting")
        object.__setattr__(self, "gammas", gs)
        object.__setattr__(self, "thetas", ts)

    @property
    def n_strategies(self) -> int:
        return 2 ** (len(self.gammas) + len(self.thetas))


@dataclass(frozen=True)
class ChshFacet:
    """The most violated CHSH inequality for one 2x2 sub-scenario."""

    gammas: tuple[int, int]
    thetas: tuple[int, int]
    signs: tuple[int, int, int, int]
    value: float

    @property
    def violation(self) -> float:
        return abs(self.value) - 2.0

    def describe(self) -> str:
        terms = [f"{'+' if s > 0 else '-'}E{i}{j}" for s, (i, j) in
                 zip(self.signs, [(a, b) for a in self.gammas for b in self.thetas])]
        return f"|{' '.join(terms)}| = {abs(self.value):.6f} > 2"


@dataclass(eq=False)
class FeasibilityResult:
    feasible: bool
    distance: float
    weights: np.ndarray
    certificate: ChshFacet | None
    trace: dict = field(default_factory=dict)


@dataclass(eq=False)
class StrategyPolytopeProblem:
    contexts: ContextSet
    target: np.ndarray      # [i, j, pair] with pair indexed by OUTCOME_PAIRS
    strategies: np.ndarray  # [strategy, k] with path values first, then spin values
    result: FeasibilityResult | None = None

    def strategy_matrix(self) -> np.ndarray:
        """0/1 matrix mapping strategy weights to the flattened target table."""
        k = len(self.contexts.gammas)
        m = len(self.contexts.thetas)
        rows = []
        for i, j, (a, s) in itertools.product(range(k), range(m), OUTCOME_PAIRS):
            rows.append((self.strategies[:, i] == a) & (self.strategies[:, k + j] == s))
        return np.array(rows, dtype=float)

    def correlators(self) -> np.ndarray:
        signs = np.array([a * s for a, s in OUTCOME_PAIRS])
        return self.target @ signs


def build_strategy_problem(ctx: ContextSet) -> StrategyPolytopeProblem:
    if ctx.n_strategies > MAX_STRATEGIES:
        raise CapacityError(f"{ctx.n_strategies} strategies exceed the limit of {MAX_STRATEGIES}")
    target = np.empty((len(ctx.gammas), len(ctx.thetas), 4))
    for i, g in enumerate(ctx.gammas):
        for j, t in enumerate(ctx.thetas):
            p = qm_table(g, t, ctx.src).table
            for n, (a, s) in enumerate(OUTCOME_PAIRS):
                target[i, j, n] = p[0 if a == 1 else 1, 0 if s == 1 else 1]
    width = len(ctx.gammas) + len(ctx.thetas)
    strategies = np.array(list(itertools.product((1, -1), repeat=width)), dtype=np.int8)
    return StrategyPolytopeProblem(ctx, target, strategies)


def most_violated_chsh(prob: StrategyPolytopeProblem) -> ChshFacet | None:
    e = prob.correlators()
    k, m = e.shape
    best = None
    for (i1, i2), (j1, j2) in itertools.product(itertools.combinations(range(k), 2),
                                                itertools.combinations(range(m), 2)):
        es = (e[i1, j1], e[i1, j2], e[i2, j1], e[i2, j2])
        for signs in CHSH_SIGNS:
            val = float(np.dot(signs, es))
            if best is None or abs(val) > abs(best.value):
                best = ChshFacet((i1, i2), (j1, j2), signs, val)
    return best if best is not None and best.violation > 0 else None


def nchv_feasible(prob: StrategyPolytopeProblem, tol: float = FEASIBILITY_TOL) -> FeasibilityResult:
    """Minimal L1 distance from the target table to the noncontextual polytope.

    LP: minimize sum(e+ + e-) s.t. D w + e+ - e- = target, sum w = 1, all >= 0.
    """
    d = prob.strategy_matrix()
    b = prob.target.ravel()
    n_t, n_s = d.shape
    c = np.concatenate([np.zeros(n_s), np.ones(2 * n_t)])
    a_eq = np.block([
        [d, np.eye(n_t), -np.eye(n_t)],
        [np.ones((1, n_s)), np.zeros((1, 2 * n_t))],
    ])
    b_eq = np.concatenate([b, [1.0]])
    res = optimize.linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    trace = {"status": res.status, "message": res.message, "nit": getattr(res, "nit", None)}
    if res.status != 0:
        raise SolverError(f"LP did not converge: {res.message}", trace)
    distance = float(res.fun)
    feasible = distance <= tol
    result = FeasibilityResult(
        feasible=feasible,
        distance=distance,
        weights=res.x[:n_s],
        certificate=None if feasible else most_violated_chsh(prob),
        trace=trace,
    )
    prob.result = result
    return result


def fine_feasible(prob: StrategyPolytopeProblem) -> bool:
    """Fine's criterion for two settings per side: all eight CHSH bounds |S| <= 2 hold."""
    e = prob.correlators()
    if e.shape != (2, 2):
        raise ParameterError("Fine's criterion applies to 2x2 context sets only")
    es = e.ravel()
    return all(abs(float(np.dot(signs, es))) <= 2.0 + FEASIBILITY_TOL for signs in CHSH_SIGNS)


# --------------------------------------------------------------------------
# lambda-mu model

def required_conditional_spin(bs: BeamSplitterParams, axis: SpinAxis | float, channel: Channel,
                              src: SourceParams = HALF) -> float:
    """P(lambda = +1 | channel) any lambda-mu model must reproduce."""
    p = qm_table(bs, axis, src).table[Channel(channel)]
    if p.sum() <= 1e-15:
        raise UndefinedStatisticError(f"channel {Channel(channel).name} is empty")
    return float(p[0] / p.sum())


LambdaLaw = Callable[[np.ndarray, BeamSplitterParams, SpinAxis], np.ndarray]


@dataclass(frozen=True)
class LambdaMuModel:
    """mu ~ U[0, 1); SG1 when mu < threshold(bs); P(lambda = +1) = lambda_law(mu, bs, axis).

    ``breakpoints`` lists mu values where the law may jump, other than the threshold.
    """

    lambda_law: LambdaLaw
    threshold: Callable[[BeamSplitterParams], float]
    name: str = "model"
    breakpoints: tuple[float, ...] = ()


def qm_threshold(src: SourceParams = HALF) -> Callable[[BeamSplitterParams], float]:
    """tau(gamma) = P_QM(SG1), so channel marginals match quantum mechanics exactly."""
    return lambda bs: channel_probability(src, bs, Channel.SG1)


def contextual_model(src: SourceParams = HALF) -> LambdaMuModel:
    """Lambda law recalibrated for every BS2 setting: reproduces the quantum table."""
    tau = qm_threshold(src)

    def law(mu, bs, axis):
        p1 = _safe_conditional(bs, axis, Channel.SG1, src)
        p2 = _safe_conditional(bs, axis, Channel.SG2, src)
        return np.where(mu < tau(bs), p1, p2)

    return LambdaMuModel(law, tau, "contextual")


def noncontextual_model(reference: BeamSplitterParams, src: SourceParams = HALF) -> LambdaMuModel:
    """Lambda law frozen at one reference BS2 setting; ignores the actual gamma."""
    tau = qm_threshold(src)
    tau_ref = tau(reference)

    def law(mu, bs, axis):
        p1 = _safe_conditional(reference, axis, Channel.SG1, src)
        p2 = _safe_conditional(reference, axis, Channel.SG2, src)
        return np.where(mu < tau_ref, p1, p2)

    return LambdaMuModel(law, tau, f"noncontextual(ref gamma={reference.gamma:.6g})", (tau_ref,))


def minimax_noncontextual_model(contexts: Sequence[BeamSplitterParams],
                                src: SourceParams = HALF) -> LambdaMuModel:
    """Best gamma-independent law for contexts sharing one channel threshold.

    With a common threshold the subensembles are the same mu-intervals in every
    context, so the law can only set one P(lambda = +1) per channel; the
    midpoint of the required values minimizes the worst-case deviation.
    """
    tau = qm_threshold(src)
    taus = {round(tau(bs), 12) for bs in contexts}
    if len(taus) != 1:
        raise ParameterError("minimax fit needs contexts with a common channel threshold")
    tau0 = taus.pop()

    def law(mu, bs, axis):
        out = []
        for ch in Channel:
            req = [_safe_conditional(c, axis, ch, src) for c in contexts]
            out.append((min(req) + max(req)) / 2)
        return np.where(mu < tau0, out[0], out[1])

    return LambdaMuModel(law, tau, "noncontextual(minimax)", (tau0,))


def _safe_conditional(bs, axis, channel, src) -> float:
    try:
        return required_conditional_spin(bs, axis, channel, src)
    except UndefinedStatisticError:
        return 0.5  # never sampled: the channel has zero weight


def _check_threshold(model: LambdaMuModel, bs: BeamSplitterParams) -> float:
    tau = float(model.threshold(bs))
    if not 0.0 <= tau <= 1.0:
        raise ParameterError(f"threshold {tau} outside [0, 1]")
    return tau


def simulate_lambda_mu(model: LambdaMuModel, bs: BeamSplitterParams, axis: SpinAxis | float,
                       cfg: SampleConfig, workers: int = 1) -> OutcomeTable:
    """Per-particle draw of (mu, lambda); counts indexed like the quantum table."""
    axis = as_axis(axis)
    tau = _check_threshold(model, bs)

    def draw(gen, k):
        mu = gen.random(k)
        u = gen.random(k)
        p_up = np.broadcast_to(np.asarray(model.lambda_law(mu, bs, axis), dtype=float), (k,))
        if np.any((p_up < 0) | (p_up > 1)):
            raise ParameterError("lambda law produced a probability outside [0, 1]")
        channel = (mu >= tau).astype(np.int64)
        spin_down = (u >= p_up).astype(np.int64)
        return np.bincount(2 * channel + spin_down, minlength=4)

    counts = run_chunked(draw, cfg, workers)
    return OutcomeTable(counts.reshape(2, 2), cfg.n)


def predict_lambda_mu(model: LambdaMuModel, bs: BeamSplitterParams,
                      axis: SpinAxis | float) -> OutcomeTable:
    """Exact outcome probabilities of a model by integrating its law over mu."""
    axis = as_axis(axis)
    tau = _check_threshold(model, bs)

    def p_up(mu):
        return float(np.asarray(model.lambda_law(np.array([mu]), bs, axis)).ravel()[0])

    table = np.zeros((2, 2))
    for ch, (lo, hi) in enumerate(((0.0, tau), (tau, 1.0))):
        if hi <= lo:
            continue
        pts = [b for b in model.breakpoints if lo < b < hi]
        up = integrate.quad(p_up, lo, hi, points=pts or None, limit=200, epsabs=1e-13)[0]
        table[ch] = (up, (hi - lo) - up)
    return OutcomeTable(table)

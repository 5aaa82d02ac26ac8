import math

import numpy as np
import pytest
from conftest import FLUCT_COINCIDENCES, GAP_ZEROS, THETA_GRID, circular_distance
from hypothesis import given
from hypothesis import strategies as st

from pathspin.errors import StateError, UndefinedStatisticError
from pathspin.interferometer import (
    CONTEXT_A1,
    CONTEXT_A2,
    HALF,
    BeamSplitterParams,
    Channel,
    SourceParams,
    run_pipeline,
)
from pathspin.qstate import Basis, JointState
from pathspin.statistics import (
    OutcomeTable,
    conditional_fluctuation,
    contextuality_gap,
    estimate,
    fluctuation_coincidences,
    fluctuation_gap,
    gap_zeros,
    joint_probs,
    prepare_state,
    qm_table,
    subensemble_mean_analytic,
    subensemble_mean_born,
    whole_ensemble_mean,
)

ATOL = 1e-12
S2 = 1 / math.sqrt(2)
chis = st.floats(0, math.pi / 2)
thetas = st.floats(0, math.pi)
rs = st.floats(0, 1)


def brute_force_table(g, d, theta):
    """Inner products of the written-out post-BS2 amplitudes (r = 1/2) with theta eigenvectors."""
    sg1 = np.array([1j * d, 1j * g]) / math.sqrt(2)
    sg2 = np.array([-g, d]) / math.sqrt(2)
    up = np.array([math.cos(theta), math.sin(theta)])
    down = np.array([math.sin(theta), -math.cos(theta)])
    return np.array([[abs(up @ sg1) ** 2, abs(down @ sg1) ** 2],
                     [abs(up @ sg2) ** 2, abs(down @ sg2) ** 2]])


def closed_form_table(g, d, theta):
    c, s = math.cos(theta), math.sin(theta)
    a, b = (d * c + g * s) ** 2 / 2, (d * s - g * c) ** 2 / 2
    return np.array([[a, b], [b, a]])


@pytest.mark.parametrize("bs, theta, expected", [
    (CONTEXT_A1, math.pi / 4, (0.5, 0, 0, 0.5)),
    (BeamSplitterParams(1, 0), 0.0, (0, 0.5, 0.5, 0)),
])
def test_joint_probs_examples(bs, theta, expected):
    t = joint_probs(run_pipeline(HALF, bs), theta)
    np.testing.assert_allclose(t.flat(), expected, atol=ATOL)
    np.testing.assert_allclose(brute_force_table(bs.gamma, bs.delta, theta).ravel(), expected, atol=ATOL)


@given(chis, thetas)
def test_joint_probs_matches_brute_force_and_closed_form(chi, theta):
    bs = BeamSplitterParams.from_angle(chi)
    t = qm_table(bs, theta).table
    np.testing.assert_allclose(t, brute_force_table(bs.gamma, bs.delta, theta), atol=ATOL)
    np.testing.assert_allclose(t, closed_form_table(bs.gamma, bs.delta, theta), atol=ATOL)
    assert t[0].sum() == pytest.approx(0.5, abs=ATOL)


def test_joint_probs_rejects_bad_states():
    with pytest.raises(StateError):
        joint_probs(prepare_state(), 0.0)  # IN basis
    with pytest.raises(StateError):
        joint_probs(JointState([1, 1, 0, 0], Basis.OUT, normalized=False), 0.0)


@pytest.mark.parametrize("bs, theta, expected", [
    (CONTEXT_A1, math.pi / 4, 0.5),
    (CONTEXT_A2, 0.0, 0.25),
    (CONTEXT_A2, math.pi / 6, 0.5),  # 1/8 + 3/8
])
def test_subensemble_mean_examples(bs, theta, expected):
    assert subensemble_mean_analytic(bs, theta, Channel.SG1) == pytest.approx(expected, abs=ATOL)
    assert subensemble_mean_born(bs, theta, Channel.SG1) == pytest.approx(expected, abs=ATOL)


@given(chis, thetas, rs)
def test_closed_form_equals_born_rule(chi, theta, r):
    bs = BeamSplitterParams.from_angle(chi)
    src = SourceParams(r)
    for ch in Channel:
        assert subensemble_mean_analytic(bs, theta, ch, src) == pytest.approx(
            subensemble_mean_born(bs, theta, ch, src), abs=ATOL)


@pytest.mark.parametrize("r, theta, expected", [
    (0.5, 0.3, 0.0),
    (0.5, 1.1, 0.0),
    (1.0, 0.4, math.cos(0.8)),
    (0.3, 0.0, -0.4),
])
def test_whole_ensemble_mean_examples(r, theta, expected):
    assert whole_ensemble_mean(SourceParams(r), theta) == pytest.approx(expected, abs=ATOL)


@given(rs, chis, thetas)
def test_additivity(r, chi, theta):
    src = SourceParams(r)
    bs = BeamSplitterParams.from_angle(chi)
    total = sum(subensemble_mean_analytic(bs, theta, ch, src) for ch in Channel)
    assert total == pytest.approx(whole_ensemble_mean(src, theta), abs=ATOL)
    assert total == pytest.approx((2 * r - 1) * math.cos(2 * theta), abs=ATOL)


@given(rs, thetas)
def test_whole_mean_independent_of_context(r, theta):
    src = SourceParams(r)
    wholes = [sum(subensemble_mean_born(BeamSplitterParams.from_angle(chi), theta, ch, src)
                  for ch in Channel) for chi in np.linspace(0, math.pi / 2, 19)]
    assert max(wholes) - min(wholes) <= ATOL


@pytest.mark.parametrize("bs, theta, expected", [
    (CONTEXT_A1, math.pi / 4, 0.0),
    (CONTEXT_A1, 0.0, 1.0),
    (BeamSplitterParams(1, 0), 0.0, 0.0),
])
def test_conditional_fluctuation_examples(bs, theta, expected):
    assert conditional_fluctuation(bs, theta, Channel.SG1) == pytest.approx(expected, abs=ATOL)


def test_conditional_fluctuation_empty_channel():
    # r = 0 and gamma = 0 sends every particle to psi4
    with pytest.raises(UndefinedStatisticError):
        conditional_fluctuation(BeamSplitterParams(0, 1), 0.0, Channel.SG1, SourceParams(0.0))


@pytest.mark.parametrize("a, b, theta, expected", [
    (CONTEXT_A1, CONTEXT_A2, math.pi / 4, abs(0.5 - math.sqrt(3) / 4)),
    (CONTEXT_A1, CONTEXT_A1, 0.7, 0.0),
    (CONTEXT_A1, CONTEXT_A2, 0.0, 0.25),
])
def test_contextuality_gap_examples(a, b, theta, expected):
    assert contextuality_gap(a, b, theta, Channel.SG1) == pytest.approx(expected, abs=ATOL)


def test_declared_zeros_match_library():
    for ch in Channel:
        np.testing.assert_allclose(gap_zeros(CONTEXT_A1, CONTEXT_A2, ch), GAP_ZEROS, atol=ATOL)
        np.testing.assert_allclose(fluctuation_coincidences(CONTEXT_A1, CONTEXT_A2, ch),
                                   FLUCT_COINCIDENCES, atol=ATOL)
    for z in GAP_ZEROS:
        assert contextuality_gap(CONTEXT_A1, CONTEXT_A2, z, Channel.SG1) <= ATOL
    for z in FLUCT_COINCIDENCES:
        assert fluctuation_gap(CONTEXT_A1, CONTEXT_A2, z, Channel.SG1) <= 1e-9


@pytest.mark.parametrize("channel", list(Channel))
def test_gap_positive_away_from_zeros(channel):
    for theta in THETA_GRID:
        if circular_distance(theta, GAP_ZEROS) >= 0.02:
            assert contextuality_gap(CONTEXT_A1, CONTEXT_A2, theta, channel) > 1e-6


@pytest.mark.parametrize("channel", list(Channel))
def test_fluctuation_depends_on_context(channel):
    for theta in THETA_GRID:
        if circular_distance(theta, FLUCT_COINCIDENCES) >= 0.02:
            assert fluctuation_gap(CONTEXT_A1, CONTEXT_A2, theta, channel) > 1e-6


@given(chis, chis, rs)
def test_gap_zeros_are_zeros(chi_a, chi_b, r):
    a, b = BeamSplitterParams.from_angle(chi_a), BeamSplitterParams.from_angle(chi_b)
    src = SourceParams(r)
    try:
        zs = gap_zeros(a, b, Channel.SG1, src)
    except ValueError:
        return  # identical contexts: no isolated zeros
    for z in zs:
        assert contextuality_gap(a, b, z, Channel.SG1, src) <= 1e-9


# --------------------------------------------------------------------------
# estimate

def test_estimate_counts_arithmetic():
    st_ = estimate(OutcomeTable([[2, 1], [1, 2]], 6))
    assert st_.mean_sg1 == pytest.approx(1 / 6)
    assert st_.mean_sg2 == pytest.approx(-1 / 6)
    assert st_.whole_mean == 0


def test_estimate_pure_subensembles():
    st_ = estimate(OutcomeTable([[3, 0], [0, 3]], 6))
    assert st_.cond_mean_sg1 == 1
    assert st_.fluct_sg1 == 0


def test_estimate_flags_empty_subensemble():
    st_ = estimate(OutcomeTable([[0, 0], [3, 3]], 6))
    assert not st_.sg1_defined
    assert st_.cond_mean_sg1 is None and st_.fluct_sg1 is None
    assert st_.sg2_defined and st_.cond_mean_sg2 == 0


def test_estimate_from_probabilities_matches_analytic():
    st_ = estimate(qm_table(CONTEXT_A2, 0.4))
    assert st_.mean_sg1 == pytest.approx(subensemble_mean_analytic(CONTEXT_A2, 0.4, Channel.SG1), abs=ATOL)
    assert st_.fluct_sg1 == pytest.approx(conditional_fluctuation(CONTEXT_A2, 0.4, Channel.SG1), abs=ATOL)
    assert st_.se_mean_sg1 is None


@given(st.lists(st.integers(0, 10**6), min_size=4, max_size=4).filter(lambda c: sum(c) > 0))
def test_estimate_additivity_exact_on_counts(c):
    n = sum(c)
    st_ = estimate(OutcomeTable(np.array(c).reshape(2, 2), n))
    assert st_.mean_sg1 == (c[0] - c[1]) / n
    assert st_.mean_sg2 == (c[2] - c[3]) / n
    assert st_.whole_mean == (c[0] - c[1] + c[2] - c[3]) / n
    for cm in (st_.cond_mean_sg1, st_.cond_mean_sg2):
        assert cm is None or abs(cm) <= 1
    for f in (st_.fluct_sg1, st_.fluct_sg2):
        assert f is None or 0 <= f <= 1


def test_outcome_table_validation():
    with pytest.raises(StateError):
        OutcomeTable([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ValueError):
        OutcomeTable([[1, 1], [1, 1]], 5)


@given(chis, st.lists(thetas, min_size=1, max_size=20))
def test_grid_routes_match_scalar_routes(chi, ths):
    from pathspin.statistics import joint_probs_grid, subensemble_curve
    bs = BeamSplitterParams.from_angle(chi)
    grid = joint_probs_grid(run_pipeline(HALF, bs), ths)
    for k, t in enumerate(ths):
        np.testing.assert_allclose(grid[k], qm_table(bs, t).table, atol=ATOL)
        assert subensemble_curve(bs, ths, Channel.SG2)[k] == pytest.approx(
            subensemble_mean_analytic(bs, t, Channel.SG2), abs=ATOL)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathspin.interferometer import CONTEXT_A1, CONTEXT_A2, BeamSplitterParams
from pathspin.observables import (
    SpinAxis,
    commutator_norm,
    path_matrix_closed_form,
    path_observable,
    sigma_theta,
)
from pathspin.qstate import SIGMA_X, SIGMA_Y, SIGMA_Z, commutator, pauli_decompose

ATOL = 1e-12
thetas = st.floats(-10, 10)
chis = st.floats(0, math.pi / 2)


def _eigen_outer(theta):
    # independent route: build the operator from the two eigenvectors directly
    up = np.array([math.cos(theta), math.sin(theta)])
    down = np.array([math.sin(theta), -math.cos(theta)])
    return np.outer(up, up) - np.outer(down, down)


@pytest.mark.parametrize("theta, expected", [
    (0.0, SIGMA_Z.matrix),
    (math.pi / 4, SIGMA_X.matrix),
    (math.pi / 6, 0.5 * SIGMA_Z.matrix + math.sqrt(3) / 2 * SIGMA_X.matrix),
])
def test_sigma_theta_examples(theta, expected):
    np.testing.assert_allclose(sigma_theta(theta).matrix, expected, atol=ATOL)
    np.testing.assert_allclose(_eigen_outer(theta), expected, atol=ATOL)


@given(thetas)
def test_sigma_theta_half_angle_form(theta):
    expected = math.cos(2 * theta) * SIGMA_Z.matrix + math.sin(2 * theta) * SIGMA_X.matrix
    np.testing.assert_allclose(sigma_theta(theta).matrix, expected, atol=1e-11)


@given(thetas)
def test_sigma_theta_squares_to_identity(theta):
    m = sigma_theta(theta).matrix
    np.testing.assert_allclose(m @ m, np.eye(2), atol=ATOL)


@pytest.mark.parametrize("theta", np.linspace(0, math.pi, 37))
def test_sigma_theta_eigenvectors(theta):
    m = sigma_theta(theta).matrix
    up, down = SpinAxis(theta).eigenstates()
    np.testing.assert_allclose(m @ up.vec, up.vec, atol=ATOL)
    np.testing.assert_allclose(m @ down.vec, -down.vec, atol=ATOL)


def test_spin_axis_canonicalized():
    assert SpinAxis(math.pi).theta == 0.0
    assert SpinAxis(-math.pi / 4).theta == pytest.approx(3 * math.pi / 4)
    assert SpinAxis.degrees(45).theta == pytest.approx(math.pi / 4)


@pytest.mark.parametrize("bs, in_matrix, axis", [
    (CONTEXT_A1, SIGMA_Y.matrix, (0, 1, 0)),
    (CONTEXT_A2, None, (0, math.sqrt(3) / 2, -0.5)),
    (BeamSplitterParams(1, 0), SIGMA_Z.matrix, (0, 0, 1)),
])
def test_path_observable_examples(bs, in_matrix, axis):
    a = path_observable(bs)
    np.testing.assert_allclose(a.axis, axis, atol=ATOL)
    np.testing.assert_allclose(a.op.matrix, np.diag([1, -1]), atol=ATOL)
    if in_matrix is not None:
        np.testing.assert_allclose(a.in_basis().matrix, in_matrix, atol=ATOL)


@given(chis)
def test_path_observable_in_basis_matches_closed_matrix(chi):
    bs = BeamSplitterParams.from_angle(chi)
    a = path_observable(bs)
    np.testing.assert_allclose(a.in_basis().matrix, path_matrix_closed_form(bs), atol=ATOL)
    m = a.in_basis().matrix
    np.testing.assert_allclose(m @ m, np.eye(2), atol=ATOL)


@given(chis)
def test_axis_consistency_via_pauli_decomposition(chi):
    bs = BeamSplitterParams.from_angle(chi)
    g, d = bs.gamma, bs.delta
    np.testing.assert_allclose(pauli_decompose(path_observable(bs).in_basis()),
                               (0, 0, 2 * g * d, g * g - d * d), atol=ATOL)


@given(chis, thetas)
def test_commutator_norm_vanishes(chi, theta):
    assert commutator_norm(path_observable(BeamSplitterParams.from_angle(chi)), theta) <= ATOL


def test_commutator_norm_control_case():
    assert commutator_norm(path_observable(CONTEXT_A1), math.pi / 4) == 0
    same_factor = commutator(SIGMA_X.matrix, SIGMA_Z.matrix)
    assert np.max(np.abs(same_factor)) == pytest.approx(2.0)

import math

import numpy as np
import pytest

# Angles where the A1/A2 subensemble means coincide (r = 1/2, either channel).
# The SG1 gap is |(1/2 - sqrt3/4) sin 2t - (1/4) cos 2t|, zero where
# tan 2t = 2 + sqrt3 = tan(5 pi/12).
GAP_ZEROS = (5 * math.pi / 24, 17 * math.pi / 24)
# Conditional fluctuations coincide where m_A1 = +-m_A2; the minus branch gives
# tan 2t = -(2 - sqrt3) = tan(-pi/12).
FLUCT_COINCIDENCES = (5 * math.pi / 24, 11 * math.pi / 24, 17 * math.pi / 24, 23 * math.pi / 24)

THETA_GRID = np.linspace(0.0, math.pi, 181)
CHI_GRID = np.linspace(0.0, math.pi / 2, 181)

ACCEPTANCE_RESULTS = []


def circular_distance(theta, points, period=math.pi):
    d = [abs((theta - p + period / 2) % period - period / 2) for p in points]
    return min(d)


@pytest.fixture
def theta_grid():
    return THETA_GRID


@pytest.fixture
def chi_grid():
    return CHI_GRID


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key, text, ok in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r[0].lstrip("AC"))):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {text}")

import math

import numpy as np
import pytest

from magctrb import model
from magctrb.controllability import conditions_hold

CANONICAL_J = (5.0, 4.0, 3.0)
CANONICAL_A = 7.0e6
CANONICAL_W0 = 1.078e-3

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def canonical_j():
    return model.InertiaTensor(*CANONICAL_J)


@pytest.fixture
def canonical_orbit():
    return model.OrbitConfig(omega0=CANONICAL_W0, a=CANONICAL_A, i_m=math.pi / 4)


def random_inertia(rng, lo=1.0, hi=10.0):
    return model.InertiaTensor(*rng.uniform(lo, hi, 3))


def random_orbit(rng, i_lo=0.05, i_hi=math.pi - 0.05):
    return model.OrbitConfig.circular(a=rng.uniform(6.6e6, 8.0e6),
                                      i_m=rng.uniform(i_lo, i_hi))


def conditioned_inertia(rng, margin=0.05, lo=1.0, hi=10.0):
    """Random inertia whose two analytic conditions hold with a relative margin."""
    while True:
        j = random_inertia(rng, lo, hi)
        c1 = j.j33 - j.j22
        c2 = j.j22 * (j.j11 - j.j22 + j.j33) - 6.0 * j.j33 * (j.j33 - j.j11)
        if abs(c1) >= margin * j.scale and abs(c2) >= margin * j.scale**2:
            assert all(conditions_hold(j))
            return j


def gravity_stable(j, omega0):
    """No eigenvalue of the linearized state matrix has a positive real part."""
    a = model.system_matrix(j, omega0).a_matrix
    return float(np.linalg.eigvals(a).real.max()) <= 1e-9 * omega0


@pytest.fixture
def report_criterion():
    def report(number, name, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name} -- {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest

from sggle.core import GLParams
from sggle.noise import JumpModel


@pytest.fixture
def params():
    return GLParams(alpha=0.5, beta=0.5, gamma=0.1, sigma=3.0,
                    lambda1=(0.02, 0.02j), lambda2=(0.02, 0.0))


@pytest.fixture
def linear_model():
    return JumpModel(nu=(1.0, 2.0), h=(0.3, 0.2), family="linear", c=0.5)


@pytest.fixture
def quad_model():
    return JumpModel(nu=(1.0, 2.0), h=(0.3, 0.2), family="quadratic", cap=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


PI = math.pi


ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion.

    Usage: ``criterion(number, ok, detail)``; the test still asserts.
    """
    def record(number: int, ok: bool, detail: str, elapsed: float, budget: float):
        ok = ok and elapsed < budget
        line = (f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}  "
                f"[{elapsed:.1f} s, budget {budget:g} s]")
        ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)

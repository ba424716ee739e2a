import math

import numpy as np
import pytest

from wlcar.model import WlParams, implied_relation

# strongly improper reference process used throughout the tests
REF_PARAMS = WlParams(0.99, math.pi / 6, 0.099, -math.pi / 4, 1.0)


@pytest.fixture
def ref_process():
    return REF_PARAMS, implied_relation(REF_PARAMS)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)`` for the end-of-run summary."""

    def record(number: int, passed: bool, detail: str):
        _ACCEPTANCE[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")

import pytest

from qnmlab.potential import PotentialSpec

# exact roots of s^3 + 12 s^2 + 60 s + 120 (constant potential W = 12)
W12_ROOT = complex(-3.6778146453739136, 3.5087619195674358)
# least-damped root for W = 30 + x
W30X_ROOT = complex(-4.725840152337244, 7.261257762501354)
W30X_ROOT2 = complex(-6.81551088251693, 3.54457247171337)

_criteria = {}


@pytest.fixture
def w30x():
    return PotentialSpec((30.0, 1.0))


@pytest.fixture
def w12():
    return PotentialSpec((12.0,))


@pytest.fixture
def record_criterion():
    def record(number, passed, detail):
        _criteria[number] = (bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok, detail = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

import pytest

from ctxbell import build_table

ACCEPTANCE_LINES = []


def hand_table_rows():
    """Four-run example table; row 4 measures A' and B."""
    return [
        {"A": "+", "B": "+"},
        {"A'": "+", "B'": "-"},
        {"A": "-", "B": "+"},
        {"A'": "-", "B": "-"},
    ]


def alt_rows():
    """The same four runs with row 4 measured at A', B' instead."""
    rows = hand_table_rows()
    rows[3] = {"A'": "-", "B'": "-"}
    return rows


@pytest.fixture
def hand_table():
    return build_table(hand_table_rows())


@pytest.fixture
def hand_table_alt():
    return build_table(alt_rows())


@pytest.fixture
def acceptance_log():
    def log(criterion, passed, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}".rstrip())
        return passed

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

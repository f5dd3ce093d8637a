import pytest

from hjlab import _accel


@pytest.fixture
def numpy_only():
    """Run the body with the pure-numpy kernels, restoring the flag after."""
    prev = _accel.use_numba()
    _accel.set_numba(False)
    yield
    _accel.set_numba(prev)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

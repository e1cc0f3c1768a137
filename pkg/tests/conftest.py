import pytest

from coneres import build_polygon_double, build_two_cone_surface

# one line per acceptance criterion, echoed after the run (see
# pytest_terminal_summary below); populated by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def two_cone():
    return build_two_cone_surface()


@pytest.fixture(scope="session")
def triangle_345():
    # right triangle, sides 3-4-5, hypotenuse is the unique longest side
    return build_polygon_double([(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)])


@pytest.fixture(scope="session")
def acceptance_log():
    def record(tag: str, name: str, passed: bool, detail: str) -> str:
        line = (f"ACCEPTANCE {tag} ({name}): "
                f"{'PASS' if passed else 'FAIL'} - {detail}")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

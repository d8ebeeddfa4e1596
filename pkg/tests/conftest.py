import pytest

from contractlab.groups import RAAG, CyclicFactor, DirectProduct, FreeGroup, FreeProduct, build_model

SQUARE = RAAG(("a", "b", "c", "d"), (("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")))


@pytest.fixture(scope="session")
def f2():
    return build_model(FreeGroup(2))


@pytest.fixture(scope="session")
def z2z3():
    return build_model(FreeProduct(CyclicFactor(2), CyclicFactor(3)))


@pytest.fixture(scope="session")
def f2f2():
    return build_model(FreeProduct(FreeGroup(2), FreeGroup(2)))


@pytest.fixture(scope="session")
def f2xf2():
    return build_model(DirectProduct(FreeGroup(2), FreeGroup(2)))


@pytest.fixture(scope="session")
def square():
    return build_model(SQUARE)


@pytest.fixture(scope="session")
def raag_f2():
    return build_model(RAAG(("a", "b"), ()))


@pytest.fixture(scope="session")
def path3():
    return build_model(RAAG(("a", "b", "c"), (("a", "b"), ("b", "c"))))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)

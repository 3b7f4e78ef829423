import pytest

from pnet import NetworkStructure, PossibilisticNetwork, StateDomain


@pytest.fixture
def abc():
    return StateDomain("V", ("a", "b", "c"))


@pytest.fixture
def xy_structure():
    X = StateDomain("X", ("x1", "x2"))
    Y = StateDomain("Y", ("y1", "y2"))
    return NetworkStructure((X, Y), (("X", "Y"),))


@pytest.fixture
def xy_net(xy_structure):
    return PossibilisticNetwork.from_arrays(
        xy_structure, {"X": [[1.0, 0.5]], "Y": [[1.0, 0.2], [0.7, 1.0]]}
    )


def chain_network(semantics="product"):
    X = StateDomain("X", ("x1", "x2"))
    Y = StateDomain("Y", ("y1", "y2"))
    Z = StateDomain("Z", ("z1", "z2"))
    structure = NetworkStructure((X, Y, Z), (("X", "Y"), ("Y", "Z")))
    return PossibilisticNetwork.from_arrays(
        structure,
        {"X": [[1.0, 0.6]], "Y": [[1.0, 0.3], [0.6, 1.0]], "Z": [[0.3, 1.0], [1.0, 0.6]]},
        semantics,
    )


@pytest.fixture
def chain_net():
    return chain_network()


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))
    elif report.when == "setup" and report.failed and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], "error"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")

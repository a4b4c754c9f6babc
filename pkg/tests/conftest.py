from fractions import Fraction

import pytest

from discrete_f2 import diffeo
from discrete_f2.certify import C1Action, PLAction
from discrete_f2.pingpong import AdmissibleWordPair, PingPongSystem, build_chain

_criteria: dict[str, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def thm1_200():
    return diffeo.build(200, 1.5)


@pytest.fixture(scope="session")
def thm1_action(thm1_200):
    return C1Action(thm1_200, 1.5, 0.01)


@pytest.fixture(scope="session")
def default_chain():
    return build_chain("default", 22)


@pytest.fixture(scope="session")
def system(default_chain):
    return PingPongSystem.build(default_chain)


@pytest.fixture(scope="session")
def pl_action(system):
    return PLAction(system, AdmissibleWordPair.default())


@pytest.fixture(scope="session")
def x0(system):
    return system.x0


@pytest.fixture(scope="session")
def half_A0(default_chain):
    a0, a1 = default_chain.A(0)
    return (a1 - a0) / 2


@pytest.fixture(scope="session")
def pl_norm0_cert(pl_action):
    from discrete_f2.certify import norm0_discreteness_certificate

    return norm0_discreteness_certificate(pl_action, Fraction(1, 20), 4)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        detail = ""
        if report.failed:
            detail = str(report.longrepr.reprcrash.message).splitlines()[0] if hasattr(report.longrepr, "reprcrash") else ""
        _criteria[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda s: int(s.split("_")[2])):
        status, detail = _criteria[name]
        line = f"{status}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)

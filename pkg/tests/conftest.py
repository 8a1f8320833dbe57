import sys
from pathlib import Path

import pytest

from dashbench.specs import parse_database_spec, parse_interaction_log, parse_interface_spec

FIXTURES = Path(__file__).parent / "fixtures"


def read_fixture(*parts: str) -> str:
    return (FIXTURES.joinpath(*parts)).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def covid_db():
    return parse_database_spec(read_fixture("covid", "database.json"))


@pytest.fixture(scope="session")
def covid_iface(covid_db):
    return parse_interface_spec(read_fixture("covid", "interface.json"), covid_db)


@pytest.fixture(scope="session")
def covid_events(covid_iface):
    return parse_interaction_log(read_fixture("covid", "interactions.jsonl"), covid_iface)


@pytest.fixture(scope="session")
def brush_iface(covid_db):
    return parse_interface_spec(read_fixture("covid_brush", "interface.json"), covid_db)


@pytest.fixture(scope="session")
def brush_events(brush_iface):
    return parse_interaction_log(read_fixture("covid_brush", "session.jsonl"), brush_iface)


@pytest.fixture(scope="session")
def tableau_db():
    return parse_database_spec(read_fixture("tableau", "database.json"))


@pytest.fixture(scope="session")
def tableau_iface(tableau_db):
    return parse_interface_spec(read_fixture("tableau", "interface.json"), tableau_db)


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        status = "PASS" if report.passed else "FAIL"
        sys.stderr.write(f"[{status}] {name}\n")
    elif report.when == "setup" and report.skipped:
        sys.stderr.write(f"[SKIP] {name}\n")

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from helpers import fixture_instances, install_witness_recheck  # noqa: E402

# must run before any test module imports find_morphism / brute_force
install_witness_recheck()


@pytest.fixture
def inst():
    P_ab, P_xy, P_xyz, P_b = fixture_instances()
    return {"P_ab": P_ab, "P_xy": P_xy, "P_xyz": P_xyz, "P_b": P_b}


def pytest_collection_modifyitems(items):
    # acceptance checks run last so the witness tally covers the whole suite
    items.sort(key=lambda it: os.path.basename(str(it.fspath)) == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

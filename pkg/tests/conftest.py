import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE = []


def record_acceptance(name, ok, seconds, detail=""):
    _ACCEPTANCE.append((name, bool(ok), float(seconds), str(detail)))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.ensure_newline()
    tr.section("acceptance checks")
    for name, ok, secs, detail in _ACCEPTANCE:
        line = "%-36s %s %7.2fs" % (name, "PASS" if ok else "FAIL", secs)
        if detail:
            line += "  " + detail
        tr.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)

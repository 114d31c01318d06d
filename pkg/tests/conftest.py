import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

import pytest

from frozen_edge import _jit

BACKENDS = ["numba", "numpy"] if _jit.HAVE_NUMBA else ["numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    with _jit.use_backend(request.param):
        yield request.param


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            for name, value in getattr(rep, "user_properties", []):
                if name == "acceptance":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

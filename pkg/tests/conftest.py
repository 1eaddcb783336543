import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def cross_grid():
    from stratlearn.pointcloud import SpaceSpec, covering_radius, generate_synthetic
    spec = SpaceSpec("cross2d", {"a": 1.5}, grid_spacing=0.1)
    U = generate_synthetic(spec)
    return spec, U, covering_radius(U, spec)

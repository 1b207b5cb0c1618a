import math

import numpy as np
import pytest
from hypothesis import settings

from zwitter import make_grid

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid64():
    return make_grid(64, 64, 16.0)


@pytest.fixture(scope="session")
def grid128():
    return make_grid(128, 128, 20.0)


def gaussian_wigner(grid, z0=0.0, p0=0.0, sigma=math.sqrt(0.5)):
    """Closed-form Wigner function of the Gaussian packet, unit phase-space integral."""
    z, p = grid.mesh()
    return 2.0 * np.exp(-((z - z0) ** 2) / (2 * sigma ** 2) - 2 * sigma ** 2 * (p - p0) ** 2 / grid.hbar ** 2)


def smooth_field(grid, rng, envelope=1.0):
    z, p = grid.mesh()
    poly = sum(rng.normal() * z ** a * p ** b for a in range(3) for b in range(3))
    zc, pc = rng.uniform(-1, 1, size=2)
    return poly * np.exp(-((z - zc) ** 2 + (p - pc) ** 2) / (2 * envelope ** 2))


ACCEPTANCE_ROWS = []


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance check, then one verdict line per criterion."""
    if not ACCEPTANCE_ROWS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    by_criterion = {}
    for row in ACCEPTANCE_ROWS:
        tr.write_line(row.line())
        by_criterion.setdefault(row.criterion, []).append(row)
    for crit in sorted(by_criterion):
        rows = by_criterion[crit]
        verdict = "PASS" if all(r.passed for r in rows) else "FAIL"
        label = f"criterion {crit:2d}" if crit else "double-well examples"
        tr.write_line(f"{verdict} {label} ({sum(r.passed for r in rows)}/{len(rows)} checks)")

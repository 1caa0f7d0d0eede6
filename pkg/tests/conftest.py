import numpy as np
import pytest

from leray_alpha.fields import SpectralVectorField, random_coeffs
from leray_alpha.grid import TorusGrid
from leray_alpha.spectral import leray_project


def single_mode(grid, kvec, amplitude):
    """Real field amplitude * cos(k.x), stored as two conjugate coefficients."""
    coeffs = np.zeros((grid.n,) + grid.shape, dtype=complex)
    amp = np.asarray(amplitude, dtype=float)
    idx = grid.mode_index(kvec)
    nidx = grid.mode_index([-c for c in kvec])
    if idx == nidx:
        coeffs[(slice(None),) + idx] = amp
    else:
        coeffs[(slice(None),) + idx] += amp / 2
        coeffs[(slice(None),) + nidx] += amp / 2
    return SpectralVectorField(grid, coeffs)


def random_divfree(grid, seed=0, sigma=1.0, kcut=None, scale=1.0):
    rng = np.random.default_rng(seed)
    c = random_coeffs(grid, sigma, rng, components=grid.n, kcut=kcut)
    c[(slice(None),) + (0,) * grid.n] = 0
    return leray_project(SpectralVectorField(grid, c * scale))


@pytest.fixture
def grid2():
    return TorusGrid(2, 16)


@pytest.fixture
def grid3():
    return TorusGrid(3, 8)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Recorder for acceptance criteria: one PASS/FAIL line each, echoed in the terminal summary."""

    def record(criterion: str, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

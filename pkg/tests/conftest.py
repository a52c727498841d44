import numpy as np
import pytest

from mixsim.constitutive import BoundaryCoeffs, MaterialModel
from mixsim.grid import BoundarySpec, FieldState, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def model():
    return MaterialModel(m_amp=0.3, rho0=0.5)


def random_simplex(rng, L, shape, floor=0.05):
    w = rng.random((L,) + shape) + floor
    return w / w.sum(axis=0)


def random_state(grid, rng, L=3, vortex=0.3):
    c = random_simplex(rng, L, grid.shape)
    e = 0.5 + 3.0 * rng.random(grid.shape)
    st = FieldState.at_rest(grid, c, e)
    if grid.dim == 2:
        psi = np.zeros((grid.nx + 1, grid.ny + 1))
        psi[1:-1, 1:-1] = vortex * rng.standard_normal((grid.nx - 1, grid.ny - 1)) * grid.hx
        st.u = (psi[:, 1:] - psi[:, :-1]) / grid.hy
        st.v = -(psi[1:, :] - psi[:-1, :]) / grid.hx
    st.phi = rng.standard_normal(grid.shape)
    return st


def open_boundary(grid, L=3, **kw):
    data = dict(theta_G=2.0, zeta_G=np.log(np.full(L, 1.0 / L)), phi_G=0.3, d=0.5, kappa_bar=1.0, lambda_G=1.0, gamma=0.5)
    data.update(kw)
    return BoundarySpec(grid, {s: BoundaryCoeffs(**data) for s in grid.segments}, L)


@pytest.fixture
def grid2():
    return Grid.rect(8, 6, 1.0, 0.75)


@pytest.fixture
def grid1():
    return Grid.line(16)


# acceptance reporting -------------------------------------------------------

import time  # noqa: E402

ACCEPTANCE = {}
SUITE_BUDGET_S = 300.0
_START = {}


def pytest_sessionstart(session):
    _START["t"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    elapsed = time.perf_counter() - _START.get("t", time.perf_counter())
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        ok, label, detail = ACCEPTANCE[key]
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {label} ({detail})")
    ok = elapsed <= SUITE_BUDGET_S
    tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion 10.walltime: full suite wall time ({elapsed:.1f} s <= {SUITE_BUDGET_S:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    if ACCEPTANCE and time.perf_counter() - _START.get("t", 0.0) > SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1

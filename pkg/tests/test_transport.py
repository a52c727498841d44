import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixsim.constitutive import MaterialModel, theta_of_e
from mixsim.errors import ConfigurationError, PositivityError, StateError, StepSizeError
from mixsim.grid import FieldState, Grid, div
from mixsim.transport import (
    CutoffParams,
    boundary_species_flux,
    cell_cutoff,
    cell_thermo,
    cutoff_T,
    diffusive_fluxes,
    heat_flux,
    species_fluxes,
    stable_dt,
    step_internal_energy,
    step_species,
    transport_update,
)

from .conftest import open_boundary, random_state


def test_cutoff_plateau():
    y = np.array([0.05, 0.15, 0.2, 1.0, 10.0, 15.0, 20.0, 25.0])
    assert cutoff_T(y, 0.1) == pytest.approx([0.0, 0.5, 1.0, 1.0, 1.0, 0.5, 0.0, 0.0], abs=1e-14)
    assert np.array_equal(cutoff_T(np.array([1e-300, 1e300]), 0.0), [1.0, 1.0])


def test_cutoff_params_validation():
    with pytest.raises(ConfigurationError):
        CutoffParams(delta=0.5)
    with pytest.raises(ConfigurationError):
        CutoffParams(epsilon=-1.0)


def test_cell_cutoff_inactive_away_from_thresholds():
    c = np.full((3, 4, 4), 1 / 3)
    assert np.array_equal(cell_cutoff(c, np.full((4, 4), 2.0), 1e-2), np.ones((4, 4)))


@given(st.integers(0, 2**31), st.sampled_from([0.0, 0.3]))
@settings(max_examples=25, deadline=None)
def test_species_fluxes_sum_to_zero_on_faces(seed, m_amp):
    rng = np.random.default_rng(seed)
    g = Grid.rect(6, 5)
    model = MaterialModel(m_amp=m_amp, L=3, z=(1.0, -2.0, 0.5))
    s = random_state(g, rng)
    qx, qy = species_fluxes(g, s, model)
    assert np.abs(qx.sum(axis=0)).max() <= 1e-13
    assert np.abs(qy.sum(axis=0)).max() <= 1e-13
    for q in boundary_species_flux(g, s, model, open_boundary(g)).values():
        assert np.abs(q.sum(axis=0)).max() <= 1e-13


def test_uniform_state_has_no_fluxes(grid2):
    s = FieldState.at_rest(grid2, np.full((3,) + grid2.shape, 1 / 3), np.full(grid2.shape, 2.0))
    model = MaterialModel(m_amp=0.5)
    qx, qy = species_fluxes(grid2, s, model)
    hx, hy = heat_flux(grid2, s, model)
    assert not qx.any() and not qy.any() and not hx.any() and not hy.any()


def test_thermodiffusion_drives_first_species_up_the_temperature_gradient():
    g = Grid.line(4)
    c = np.full((2, 4, 1), 0.5)
    e = np.array([1.0, 1.5, 2.0, 2.5])[:, None]
    s = FieldState.at_rest(g, c, e)
    qx, _ = species_fluxes(g, s, MaterialModel(L=2, z=(0.0, 0.0), m_amp=0.5))
    assert np.all(qx[0, 1:-1] > 0) and np.all(qx[1, 1:-1] < 0)


def test_heat_flows_down_the_temperature_gradient():
    g = Grid.line(4)
    s = FieldState.at_rest(g, np.full((2, 4, 1), 0.5), np.array([1.0, 1.5, 2.0, 2.5])[:, None])
    qx, _ = heat_flux(g, s, MaterialModel(L=2, z=(0.0, 0.0)))
    assert np.all(qx[1:-1] < 0)


def test_joule_heating_of_uniform_mixture():
    g = Grid.line(5)
    model = MaterialModel(L=2, z=(1.0, -1.0))
    s = FieldState.at_rest(g, np.full((2, 5, 1), 0.5), np.full((5, 1), 3.0), phi=np.linspace(0, 1, 5)[:, None])
    th = cell_thermo(g, s.c, s.e, model, CutoffParams())
    fl = diffusive_fluxes(g, th, model, s.phi)
    f = th.faces[0]
    # M w |P z|^2 |grad phi|^2 with |P z|^2 = 2
    expected = f.M * f.w * 2.0 * fl.gphi[0] ** 2
    assert fl.joule[0] == pytest.approx(expected, rel=1e-14)


@given(st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_production_densities_nonnegative(seed):
    rng = np.random.default_rng(seed)
    g = Grid.rect(5, 4)
    model = MaterialModel(m_amp=0.4)
    s = random_state(g, rng)
    th = cell_thermo(g, s.c, s.e, model, CutoffParams())
    fl = diffusive_fluxes(g, th, model, s.phi)
    for k in (0, 1):
        assert fl.p_cross[k].min() >= -1e-12
        assert fl.p_fourier[k].min() >= -1e-12


def _update(g, s, model, bc, dt, cut=CutoffParams()):
    th = cell_thermo(g, s.c, s.e, model, cut)
    return transport_update(g, s, th, model, bc, cut, s.phi, s.u, s.v, dt, np.zeros(g.shape))


def test_update_keeps_simplex_and_balances_boundary_flux(grid2, rng):
    model = MaterialModel(m_amp=0.2, rho0=0.5)
    bc = open_boundary(grid2)
    s = random_state(grid2, rng, vortex=0.05)
    dt = 0.5 * stable_dt(grid2, s.c, s.e, s.u, s.v, model, CutoffParams())
    rec = _update(grid2, s, model, bc, dt)
    assert np.abs(rec.c.sum(axis=0) - 1.0).max() <= 1e-14
    for i in range(3):
        out = grid2.boundary_integral({seg: rec.qc_b[seg][i] for seg in grid2.segments})
        lhs = grid2.integral(rec.c[i] - s.c[i])
        assert lhs == pytest.approx(-dt * out + dt * grid2.integral(rec.reaction[i]), abs=1e-15)


def test_oversized_step_rejected(grid2, rng):
    model = MaterialModel()
    s = random_state(grid2, rng)
    lim = stable_dt(grid2, s.c, s.e, s.u, s.v, model, CutoffParams())
    with pytest.raises(StepSizeError):
        step_species(grid2, s, model, open_boundary(grid2), CutoffParams(), s.u, s.v, 2 * lim)


def test_positivity_loss_reported(grid2, rng):
    model = MaterialModel()
    s = random_state(grid2, rng)
    with pytest.raises(PositivityError, match="delta"):
        step_species(grid2, s, model, open_boundary(grid2), CutoffParams(), s.u, s.v, 10.0, check_cfl=False)


def test_energy_clamped_under_cutoff():
    g = Grid.line(4)
    model = MaterialModel(L=2, z=(0.0, 0.0))
    s = FieldState.at_rest(g, np.full((2, 4, 1), 0.5), np.array([1e-3, 2.0, 2.0, 2.0])[:, None])
    bc = open_boundary(g, L=2, kappa_bar=0.0, d=0.0)
    cut = CutoffParams(delta=0.01)
    e = step_internal_energy(g, s, model, bc, cut, s.u, s.v, np.array([-1.0, 0, 0, 0])[:, None], 0.01, check_cfl=False)
    assert e.min() == 0.01
    with pytest.raises(PositivityError):
        step_internal_energy(g, s, model, bc, CutoffParams(), s.u, s.v, np.array([-1.0, 0, 0, 0])[:, None], 0.01, check_cfl=False)


def test_temperature_floor_under_cutoff():
    c = np.full((2, 3, 1), 0.5)
    e = np.array([1e-8, 1.0, 2.0])[:, None]
    th = cell_thermo(Grid.line(3), c, e, MaterialModel(L=2, z=(0, 0)), CutoffParams(delta=0.1))
    assert th.theta_clamped and th.theta.min() == pytest.approx(0.01)
    assert np.allclose(th.theta[1:], theta_of_e(e[1:]))


def test_inadmissible_state_rejected(grid2):
    with pytest.raises(StateError):
        cell_thermo(grid2, np.zeros((3,) + grid2.shape), np.ones(grid2.shape), MaterialModel(), CutoffParams())


def test_advection_conserves_totals(grid2, rng):
    model = MaterialModel(z=(0.0, 0.0, 0.0))
    bc = open_boundary(grid2, d=0.0, kappa_bar=0.0)
    s = random_state(grid2, rng, vortex=0.5)
    s.c[:] = 1 / 3
    s.e[:] = 2.0
    rec = _update(grid2, s, model, bc, 1e-3)
    assert np.allclose(rec.c, 1 / 3, rtol=0, atol=1e-15)
    assert grid2.integral(rec.e) == pytest.approx(grid2.integral(s.e), rel=1e-15)
    assert np.abs(div(grid2, s.u, s.v)).max() < 1e-12

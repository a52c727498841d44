"""Explicit non-Newtonian momentum step on the staggered grid.

The viscous operator is written in stress form. Normal stresses live at
cell centres, the shear stress at nodes; wall nodes carry the Navier slip
traction ``S_xy = -gamma v_tau`` (with the wall orientation folded in).
This makes the operator summation-by-parts exact::

    <div S, v> = -sum_cells vol * (S:D) - sum_walls area * gamma |v_tau|^2

Convection uses an energy-neutral divergence form multiplied by the
truncation factor ``xi_k(|v|^2)``; the Lorentz force is ``-Q grad(phi)``
with the face charge taken upwind, matching the advective charge flux.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConvectionTruncation:
    """Truncation level ``k`` of the convective term (``inf`` disables it)."""

    k: float = math.inf

    def __post_init__(self):
        if not self.k > 0:
            raise ConfigurationError(f"truncation level k must be positive, got {self.k}")

    def xi(self, y):
        """``xi(y/k)``: 1 on ``[0, k]``, 0 beyond ``2k``, cubic smoothstep between."""
        y = np.asarray(y, dtype=float)
        if math.isinf(self.k):
            return np.ones_like(y)
        t = np.clip(y / self.k - 1.0, 0.0, 1.0)
        return 1.0 - t * t * (3.0 - 2.0 * t)


def _avg4_nodes_to_cells(a):
    return 0.25 * (a[:-1, :-1] + a[1:, :-1] + a[:-1, 1:] + a[1:, 1:])


def _avg4_cells_to_nodes(a):
    """Mean of the four cells around every interior node, shape ``(nx-1, ny-1)``."""
    return 0.25 * (a[:-1, :-1] + a[1:, :-1] + a[:-1, 1:] + a[1:, 1:])


def _node_profile(gamma_faces):
    """Face-wise slip coefficient averaged onto the interior nodes of a wall."""
    return 0.5 * (gamma_faces[:-1] + gamma_faces[1:])


@dataclass
class ViscousTerms:
    fu: np.ndarray
    fv: np.ndarray
    dissipation: np.ndarray
    slip_power: float
    eta_max: float


def viscous_terms(grid, model, bc, c, theta, u, v):
    """Stress divergence, cell dissipation ``S:D`` and wall slip power."""
    hx, hy = grid.hx, grid.hy
    dxx, dyy, dxy = kernels.strain_rates(u, v, hx, hy)
    dxy_c = _avg4_nodes_to_cells(dxy)
    dn_c = np.sqrt(dxx**2 + dyy**2 + 2.0 * dxy_c**2)
    eta_c = model.viscosity(c, theta, dn_c)
    normal2 = dxx**2 + dyy**2
    dxy_in = dxy[1:-1, 1:-1]
    dn_n = np.sqrt(_avg4_cells_to_nodes(normal2) + 2.0 * dxy_in**2)
    c_n = np.stack([_avg4_cells_to_nodes(ci) for ci in c])
    eta_n = model.viscosity(c_n, _avg4_cells_to_nodes(theta), dn_n)
    sxx = eta_c * dxx
    syy = eta_c * dyy
    sxy = np.zeros_like(dxy)
    sxy[1:-1, 1:-1] = eta_n * dxy_in
    g_b = _node_profile(bc.face("bottom", "gamma"))
    g_t = _node_profile(bc.face("top", "gamma"))
    g_l = _node_profile(bc.face("left", "gamma"))
    g_r = _node_profile(bc.face("right", "gamma"))
    ub, ut = u[1:-1, 0], u[1:-1, -1]
    vl, vr = v[0, 1:-1], v[-1, 1:-1]
    sxy[1:-1, 0] = g_b * ub
    sxy[1:-1, -1] = -g_t * ut
    sxy[0, 1:-1] = g_l * vl
    sxy[-1, 1:-1] = -g_r * vr
    fu, fv = kernels.stress_divergence(sxx, syy, sxy, hx, hy)
    node_sd = np.zeros_like(dxy)
    node_sd[1:-1, 1:-1] = 2.0 * eta_n * dxy_in**2
    sd = eta_c * normal2 + _avg4_nodes_to_cells(node_sd)
    slip = hx * float(np.sum(g_b * ub**2) + np.sum(g_t * ut**2)) + hy * float(np.sum(g_l * vl**2) + np.sum(g_r * vr**2))
    return ViscousTerms(fu, fv, sd, slip, float(max(eta_c.max(), eta_n.max(initial=0.0))))


def dissipation_field(grid, state, model, bc, theta):
    """Cell field ``S:D`` of the current velocity (zero in 1D)."""
    if grid.dim == 1:
        return np.zeros(grid.shape)
    return viscous_terms(grid, model, bc, state.c, theta, state.u, state.v).dissipation


def convection_term(grid, u, v, trunc):
    return kernels.convection(np.ascontiguousarray(u), np.ascontiguousarray(v), grid.hx, grid.hy, float(trunc.k))


def lorentz_force(grid, q_cells, phi, u, v):
    """``-Q grad(phi)`` on interior faces with ``Q`` taken from the upwind cell."""
    fu = np.zeros_like(u)
    fv = np.zeros_like(v)
    ui = u[1:-1, :]
    qx = np.where(ui >= 0.0, q_cells[:-1, :], q_cells[1:, :])
    fu[1:-1, :] = -qx * (phi[1:, :] - phi[:-1, :]) / grid.hx
    vi = v[:, 1:-1]
    qy = np.where(vi >= 0.0, q_cells[:, :-1], q_cells[:, 1:])
    fv[:, 1:-1] = -qy * (phi[:, 1:] - phi[:, :-1]) / grid.hy
    return fu, fv


@dataclass
class MomentumPrep:
    """Potential-independent part of a momentum step."""

    u_base: np.ndarray
    v_base: np.ndarray
    viscous: ViscousTerms
    conv_u: np.ndarray
    conv_v: np.ndarray


@dataclass
class MomentumRecord:
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    prep: MomentumPrep
    lorentz_u: np.ndarray
    lorentz_v: np.ndarray


def prepare_momentum(grid, state, model, bc, trunc, theta, dt):
    visc = viscous_terms(grid, model, bc, state.c, theta, state.u, state.v)
    cu, cv = convection_term(grid, state.u, state.v, trunc)
    return MomentumPrep(
        state.u + dt * (visc.fu - cu),
        state.v + dt * (visc.fv - cv),
        visc,
        cu,
        cv,
    )


def finish_momentum(grid, prep, state, model, phi, dt, projector):
    q = np.tensordot(model.z_array, state.c, axes=(0, 0))
    lu, lv = lorentz_force(grid, q, phi, state.u, state.v)
    u_new, v_new, p = projector.project(prep.u_base + dt * lu, prep.v_base + dt * lv)
    return MomentumRecord(u_new, v_new, p / dt, prep, lu, lv)


def step_momentum(grid, state, model, bc, trunc, dt, theta, projector, phi=None):
    """One explicit momentum step followed by the pressure projection.

    Returns
    -------
    MomentumRecord
        New face velocities, kinematic pressure and the terms used.
    """
    prep = prepare_momentum(grid, state, model, bc, trunc, theta, dt)
    return finish_momentum(grid, prep, state, model, state.phi if phi is None else phi, dt, projector)

"""Species and heat fluxes, boundary exchange, reactions and the explicit
conservative updates of concentrations and internal energy.

Face quantities are built from cell values so that the discrete entropy
production is an exact sum of nonnegative face terms:

* inverse temperature at a face is the mean of the two cell values of
  ``1/theta``; the face temperature is its reciprocal;
* the thermodynamic force is ``X = grad(zeta) + z * (1/theta)_f * grad(phi)``;
* the cut-off factor of a face is the smaller of its two cells' factors.

With these choices ``-q_c.X + q_e.grad(1/theta)`` equals
``cut * (M |P X|^2 + kappa (grad theta)^2 / (theta_L theta_R))`` on every face.
"""
import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constitutive import dtheta_de, theta_of_e, zeta_regularized
from .errors import ConfigurationError, PositivityError, StateError, StepSizeError
from .grid import div, project_ell

logger = logging.getLogger(__name__)

CFL_FACTOR = 0.4


@dataclass(frozen=True)
class CutoffParams:
    """Cut-off level ``delta`` and entropy regularization ``epsilon``."""

    delta: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.delta < 0.5):
            raise ConfigurationError(f"delta must lie in [0, 1/2), got {self.delta}")
        if not (self.epsilon >= 0.0) or not np.isfinite(self.epsilon):
            raise ConfigurationError(f"epsilon must be finite and nonnegative, got {self.epsilon}")


def cutoff_T(y, delta):
    """Piecewise-linear plateau: 0 below ``delta``, 1 on ``[2 delta, 1/delta]``, 0 beyond ``2/delta``."""
    y = np.asarray(y, dtype=float)
    if delta == 0.0:
        return np.where(y > 0.0, 1.0, 0.0)
    up = np.clip((y - delta) / delta, 0.0, 1.0)
    down = np.clip((2.0 / delta - y) * delta, 0.0, 1.0)
    return np.minimum(up, down)


def cell_cutoff(c, e, delta):
    """Product ``prod_i T(c_i) * T(e)`` per cell."""
    if delta == 0.0:
        return np.ones(np.shape(e))
    return np.prod(cutoff_T(c, delta), axis=0) * cutoff_T(e, delta)


def _lr(a, axis):
    """Left/right neighbours of interior faces along the last-two axis ``axis`` (0 = x, 1 = y)."""
    if axis == 0:
        return a[..., :-1, :], a[..., 1:, :]
    return a[..., :, :-1], a[..., :, 1:]


def _embed(interior, grid, axis, lead=()):
    nx, ny = grid.shape
    if axis == 0:
        out = np.zeros(lead + (nx + 1, ny))
        out[..., 1:-1, :] = interior
    else:
        out = np.zeros(lead + (nx, ny + 1))
        out[..., :, 1:-1] = interior
    return out


@dataclass
class FaceCoeffs:
    """Potential-independent face coefficients along one direction (interior faces only)."""

    h: float
    cut: np.ndarray
    w: np.ndarray
    theta: np.ndarray
    M: np.ndarray
    m: np.ndarray
    kappa: np.ndarray
    gzeta: np.ndarray
    gtheta: np.ndarray
    ginv: np.ndarray


@dataclass
class CellThermo:
    """Cell thermodynamics of a state under the cut-off parameters."""

    zeta: np.ndarray
    theta: np.ndarray
    inv_theta: np.ndarray
    cut: np.ndarray
    faces: tuple
    theta_clamped: bool
    cut_active: bool


def cell_thermo(grid, c, e, model, cut):
    """Evaluate chemical potentials, temperature, cut-offs and face coefficients."""
    if np.any(~(c > 0.0)) or np.any(~(e > 0.0)):
        raise StateError("transport needs positive concentrations and internal energy")
    z = zeta_regularized(c, cut.epsilon)
    th = theta_of_e(e)
    clamped = False
    if cut.delta > 0.0:
        floor = cut.delta**2
        clamped = bool(np.any(th < floor))
        th = np.maximum(th, floor)
    inv = 1.0 / th
    cc = cell_cutoff(c, e, cut.delta)
    faces = []
    dims = (0, 1) if grid.dim == 2 else (0,)
    for axis in (0, 1):
        if axis not in dims:
            faces.append(None)
            continue
        h = grid.hx if axis == 0 else grid.hy
        cl, cr = _lr(cc, axis)
        il, ir = _lr(inv, axis)
        tl, tr = _lr(th, axis)
        zl, zr = _lr(z, axis)
        c_l, c_r = _lr(c, axis)
        w = 0.5 * (il + ir)
        tf = 1.0 / w
        cf = 0.5 * (c_l + c_r)
        faces.append(
            FaceCoeffs(
                h=h,
                cut=np.minimum(cl, cr),
                w=w,
                theta=tf,
                M=model.mobility_scalar(tf),
                m=model.thermo_vector(cf, tf),
                kappa=model.heat_conductivity(cf, tf),
                gzeta=(zr - zl) / h,
                gtheta=(tr - tl) / h,
                ginv=(ir - il) / h,
            )
        )
    return CellThermo(z, th, inv, cc, tuple(faces), clamped, bool(np.any(cc < 1.0)))


@dataclass
class DiffusiveFluxes:
    """Interior-face diffusive fluxes and their entropy and Joule densities, per direction."""

    qc: tuple
    qe: tuple
    p_cross: tuple
    p_fourier: tuple
    joule: tuple
    gphi: tuple


def diffusive_fluxes(grid, thermo, model, phi):
    """Assemble ``q_c`` (ell-orthogonal) and ``q_e`` on interior faces for a given potential."""
    zc = model.z_array[:, None, None]
    out = {k: [None, None] for k in ("qc", "qe", "p_cross", "p_fourier", "joule", "gphi")}
    for axis, f in enumerate(thermo.faces):
        if f is None:
            continue
        pl, pr = _lr(phi, axis)
        gphi = (pr - pl) / f.h
        X = f.gzeta + zc * (f.w * gphi)
        PX = project_ell(X, axis=0)
        qc = project_ell(-f.cut * (f.M * PX + f.m * f.ginv), axis=0)
        qe = -f.cut * (f.kappa * f.gtheta + np.sum(f.m * X, axis=0))
        out["qc"][axis] = qc
        out["qe"][axis] = qe
        out["p_cross"][axis] = f.cut * f.M * np.sum(PX * PX, axis=0)
        out["p_fourier"][axis] = -f.cut * f.kappa * f.gtheta * f.ginv
        out["joule"][axis] = -np.tensordot(model.z_array, qc, axes=(0, 0)) * gphi
        out["gphi"][axis] = gphi
    return DiffusiveFluxes(*(tuple(out[k]) for k in ("qc", "qe", "p_cross", "p_fourier", "joule", "gphi")))


def faces_to_cells(grid, per_face):
    """Split interior-face densities half-and-half onto the adjacent cells."""
    acc = np.zeros(grid.shape)
    for axis, val in enumerate(per_face):
        if val is None:
            continue
        if axis == 0:
            acc[:-1, :] += 0.5 * val
            acc[1:, :] += 0.5 * val
        else:
            acc[:, :-1] += 0.5 * val
            acc[:, 1:] += 0.5 * val
    return acc


def boundary_fluxes(grid, thermo, c, model, bc, phi):
    """Outward boundary fluxes ``(q_cG, q_eG)`` per segment.

    ``q_cG = cut * d P_ell (zeta - zeta_G + z (phi - phi_G) / theta_G)`` and
    ``q_eG = -cut * kappa_bar (1/theta - 1/theta_G)``, using the adjacent cell
    as the trace.
    """
    qc, qe = {}, {}
    zc = model.z_array[:, None]
    for seg in grid.segments:
        cut0 = grid.trace(thermo.cut, seg)
        th_g = bc.face(seg, "theta_G")
        drive = grid.trace(thermo.zeta, seg) - bc.face(seg, "zeta_G") + zc * (
            (grid.trace(phi, seg) - bc.face(seg, "phi_G")) / th_g
        )
        qc[seg] = project_ell(cut0 * bc.face(seg, "d") * project_ell(drive, axis=0), axis=0)
        qe[seg] = -cut0 * bc.face(seg, "kappa_bar") * (grid.trace(thermo.inv_theta, seg) - 1.0 / th_g)
    return qc, qe


def species_fluxes(grid, state, model, cut=None):
    """Face species fluxes ``(qx, qy)`` of shape ``(L, faces)``; boundary faces zero."""
    cut = cut or CutoffParams()
    th = cell_thermo(grid, state.c, state.e, model, cut)
    fl = diffusive_fluxes(grid, th, model, state.phi)
    L = model.L
    qx = _embed(fl.qc[0], grid, 0, (L,))
    qy = _embed(fl.qc[1], grid, 1, (L,)) if fl.qc[1] is not None else np.zeros((L,) + (grid.nx, grid.ny + 1))
    return qx, qy


def heat_flux(grid, state, model, cut=None):
    """Face heat flux ``(qx, qy)``; boundary faces zero."""
    cut = cut or CutoffParams()
    th = cell_thermo(grid, state.c, state.e, model, cut)
    fl = diffusive_fluxes(grid, th, model, state.phi)
    qx = _embed(fl.qe[0], grid, 0)
    qy = _embed(fl.qe[1], grid, 1) if fl.qe[1] is not None else np.zeros((grid.nx, grid.ny + 1))
    return qx, qy


def boundary_species_flux(grid, state, model, bc, cut=None):
    th = cell_thermo(grid, state.c, state.e, model, cut or CutoffParams())
    return boundary_fluxes(grid, th, state.c, model, bc, state.phi)[0]


def boundary_heat_flux(grid, state, model, bc, cut=None):
    th = cell_thermo(grid, state.c, state.e, model, cut or CutoffParams())
    return boundary_fluxes(grid, th, state.c, model, bc, state.phi)[1]


def effective_diffusivity(grid, c, e, model, cut):
    """Gershgorin bound on the diffusion matrix of ``(c, e)``, maximised over cells."""
    th = theta_of_e(e)
    if cut.delta > 0:
        th = np.maximum(th, cut.delta**2)
    cmin = c.min(axis=0)
    inv_c = 1.0 / cmin + cut.epsilon / cmin**2
    dth = dtheta_de(e)
    mv = np.abs(model.thermo_vector(c, th))
    dc = 2.0 * model.mobility_scalar(th) * inv_c + mv.max(axis=0) * dth / th**2
    de = model.heat_conductivity(c, th) * dth + mv.sum(axis=0) * inv_c
    return float(max(dc.max(), de.max()))


def stable_dt(grid, c, e, u, v, model, cut, viscosity_max=0.0):
    """Explicit limit ``0.4 min(h / |v|max, h^2 / (2 Dmax))``."""
    h = min(grid.hx, grid.hy) if grid.dim == 2 else grid.hx
    dmax = max(effective_diffusivity(grid, c, e, model, cut), viscosity_max)
    vmax = max(float(np.abs(u).max()), float(np.abs(v).max()))
    lim = h * h / (2.0 * dmax) if dmax > 0 else np.inf
    if vmax > 0:
        lim = min(lim, h / vmax)
    return CFL_FACTOR * lim


@dataclass
class TransportRecord:
    """Everything one transport update used, for diagnostics."""

    c: np.ndarray
    e: np.ndarray
    thermo: CellThermo
    fluxes: DiffusiveFluxes
    adv_x: np.ndarray
    adv_y: np.ndarray
    qc_b: dict
    qe_b: dict
    reaction: np.ndarray
    joule_cells: np.ndarray
    dissipation: np.ndarray
    e_clamped: float


def transport_update(grid, state, thermo, model, bc, cut, phi, u, v, dt, dissipation):
    """Advance ``c`` and ``e`` by one explicit step with fixed velocity and potential."""
    L = model.L
    fl = diffusive_fluxes(grid, thermo, model, phi)
    stacked = np.concatenate([state.c, state.e[None]], axis=0)
    adv_x, adv_y = kernels.upwind_fluxes(np.ascontiguousarray(stacked), np.ascontiguousarray(u), np.ascontiguousarray(v))
    fx = adv_x.copy()
    fy = adv_y.copy()
    fx[:L, 1:-1, :] += fl.qc[0]
    fx[L, 1:-1, :] += fl.qe[0]
    if fl.qc[1] is not None:
        fy[:L, :, 1:-1] += fl.qc[1]
        fy[L, :, 1:-1] += fl.qe[1]
    qc_b, qe_b = boundary_fluxes(grid, thermo, state.c, model, bc, phi)
    for seg in grid.segments:
        grid.set_outward_flux(fx[:L], fy[:L], seg, qc_b[seg])
        grid.set_outward_flux(fx[L], fy[L], seg, qe_b[seg])
    divs = kernels.divergence(fx, fy, grid.hx, grid.hy)
    r = thermo.cut * model.reaction(state.c, thermo.theta, thermo.zeta)
    joule = faces_to_cells(grid, fl.joule)
    c_new = state.c - dt * divs[:L] + dt * r
    e_new = state.e - dt * divs[L] + dt * (dissipation + joule)
    if np.any(c_new <= 0.0):
        k = np.unravel_index(int(np.argmin(c_new)), c_new.shape)
        hint = (
            "enable the cut-off (delta > 0) or the entropy regularization (epsilon > 0), or reduce dt"
            if cut.delta == 0.0 and cut.epsilon == 0.0
            else "reduce dt"
        )
        raise PositivityError(f"species update produced c[{k[0]}] = {c_new[k]:.3e} at cell {k[1:]}; {hint}")
    clamped = 0.0
    if np.any(e_new <= 0.0):
        if cut.delta > 0.0:
            low = e_new < cut.delta
            clamped = float(np.sum(cut.delta - e_new[low]) * grid.vol)
            e_new = np.where(low, cut.delta, e_new)
        else:
            k = np.unravel_index(int(np.argmin(e_new)), e_new.shape)
            raise PositivityError(
                f"energy update produced e = {e_new[k]:.3e} at cell {k}; enable the cut-off (delta > 0) or reduce dt"
            )
    return TransportRecord(c_new, e_new, thermo, fl, adv_x, adv_y, qc_b, qe_b, r, joule, dissipation, clamped)


def _check_dt(grid, state, model, cut, u, v, dt):
    lim = stable_dt(grid, state.c, state.e, u, v, model, cut)
    if dt > lim:
        raise StepSizeError(f"dt = {dt:.6g} exceeds the explicit stability limit {lim:.6g}")


def step_species(grid, state, model, bc, cut, u, v, dt, check_cfl=True):
    """Explicit flux-form update of the concentrations with velocity ``(u, v)``."""
    if check_cfl:
        _check_dt(grid, state, model, cut, u, v, dt)
    th = cell_thermo(grid, state.c, state.e, model, cut)
    return transport_update(grid, state, th, model, bc, cut, state.phi, u, v, dt, np.zeros(grid.shape)).c


def step_internal_energy(grid, state, model, bc, cut, u, v, dissipation, dt, check_cfl=True):
    """Explicit flux-form update of the internal energy with viscous and Joule sources."""
    if check_cfl:
        _check_dt(grid, state, model, cut, u, v, dt)
    th = cell_thermo(grid, state.c, state.e, model, cut)
    return transport_update(grid, state, th, model, bc, cut, state.phi, u, v, dt, np.asarray(dissipation, dtype=float)).e

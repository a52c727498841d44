"""Energies, entropy, entropy production and balance residuals of a run.

Every residual is ``LHS - RHS`` of a discrete balance over one step and is
computed from the fluxes the stepper actually used (the step record), so a
nonzero value measures time-discretization error or round-off, never a
mismatch between two discretizations.

Increments of entropy, kinetic and electrostatic energy are formed from
state differences (``log1p`` and polarization identities) so residuals of
order ``dt^2`` stay well above round-off even for tiny steps.
"""
import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .constitutive import entropy_c, entropy_c_increment, entropy_e, entropy_e_increment, zeta
from .errors import StateError
from .grid import face_inner, project_ell
from .transport import (
    _lr,
    cell_thermo,
    diffusive_fluxes,
    faces_to_cells,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "t", "E_total", "E_kin", "E_int", "E_elec", "S_total", "min_c", "min_e", "simplex_drift",
    "res_mass", "res_charge", "res_kinetic", "res_internal", "res_total_energy", "res_entropy",
    "P_visc", "P_react", "P_cross", "P_fourier", "picard_iters",
)
PRODUCTION_TERMS = ("P_visc", "P_react", "P_cross", "P_fourier")
RESIDUAL_TERMS = ("res_mass", "res_charge", "res_kinetic", "res_internal", "res_total_energy", "res_entropy")


@dataclass
class DiagnosticsReport:
    """Integrals of one state plus residuals and productions of the step that produced it.

    Residual fields hold absolute values; the signed values are kept in
    ``signed``. ``P_min`` holds the smallest per-cell value of each
    production term.
    """

    t: float
    E_kin: float
    E_int: float
    E_elec: float
    S_total: float
    min_c: float
    min_e: float
    simplex_drift: float
    res_mass: float = 0.0
    res_charge: float = 0.0
    res_kinetic: float = 0.0
    res_internal: float = 0.0
    res_total_energy: float = 0.0
    res_entropy: float = 0.0
    P_visc: float = 0.0
    P_react: float = 0.0
    P_cross: float = 0.0
    P_fourier: float = 0.0
    picard_iters: int = 0
    P_adv: float = 0.0
    boundary_entropy_flux: float = 0.0
    P_min: dict = field(default_factory=dict)
    signed: dict = field(default_factory=dict)
    species_residuals: np.ndarray = None
    apriori: dict = field(default_factory=dict)
    cutoff_active: bool = False
    div_max: float = 0.0

    @property
    def E_total(self):
        return self.E_kin + self.E_int + self.E_elec

    def row(self):
        return [getattr(self, k) for k in CSV_COLUMNS]


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


class ReportWriter:
    """Incremental CSV writer for the fixed diagnostics schema (flushes every row)."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(CSV_COLUMNS)
        self._fh.flush()

    def write(self, report):
        self._w.writerow([_fmt(x) for x in report.row()])
        self._fh.flush()

    def close(self):
        self._fh.close()


def write_reports_csv(path, reports):
    w = ReportWriter(path)
    try:
        for r in reports:
            w.write(r)
    finally:
        w.close()


def read_reports_csv(path):
    """Read a diagnostics CSV into a dict of column arrays."""
    with open(path) as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    return {k: np.array([float(r[i]) for r in body]) for i, k in enumerate(head)}


# state integrals ----------------------------------------------------------


def kinetic_energy(grid, u, v):
    if grid.dim == 1:
        return 0.0
    return 0.5 * face_inner(grid, u, v, u, v)


def electrostatic_energy(grid, phi):
    """``1/2 sum over interior faces vol * |grad phi|^2``."""
    gx = np.diff(phi, axis=0) / grid.hx
    gy = np.diff(phi, axis=1) / grid.hy
    return 0.5 * grid.vol * (float(np.sum(gx * gx)) + float(np.sum(gy * gy)))


def total_entropy(grid, state, cut):
    return float(grid.integral(entropy_e(state.e) + entropy_c(state.c, cut.epsilon)))


def state_integrals(grid, state, cut):
    """Energies, entropy and admissibility indicators of one state."""
    return dict(
        E_kin=kinetic_energy(grid, state.u, state.v),
        E_int=float(grid.integral(state.e)),
        E_elec=electrostatic_energy(grid, state.phi),
        S_total=total_entropy(grid, state, cut),
        min_c=float(state.c.min()),
        min_e=float(state.e.min()),
        simplex_drift=float(np.max(np.abs(state.c.sum(axis=0) - 1.0))),
    )


# entropy production -------------------------------------------------------


@dataclass
class ProductionBreakdown:
    """Per-cell densities and totals of the entropy production terms."""

    cells: dict
    totals: dict
    P_adv: float
    boundary_entropy_flux: float


def _advective_production(grid, thermo, adv_x, adv_y, L):
    """Numerical entropy production of the upwind fluxes (nonnegative for div-free v)."""
    total = 0.0
    for axis, F in ((0, adv_x), (1, adv_y)):
        if grid.dim == 1 and axis == 1:
            continue
        h = grid.hx if axis == 0 else grid.hy
        zl, zr = _lr(thermo.zeta, axis)
        il, ir = _lr(thermo.inv_theta, axis)
        Fi = F[:, 1:-1, :] if axis == 0 else F[:, :, 1:-1]
        dens = -np.sum(Fi[:L] * (zr - zl), axis=0) / h + Fi[L] * (ir - il) / h
        total += grid.vol * float(np.sum(dens))
    return total


def _boundary_entropy_flux(grid, thermo, qc_b, qe_b):
    """Entropy inflow ``sum_b area (zeta . q_cG - q_eG / theta)`` (outward fluxes)."""
    tot = 0.0
    for seg in grid.segments:
        z0 = grid.trace(thermo.zeta, seg)
        i0 = grid.trace(thermo.inv_theta, seg)
        tot += grid.face_area(seg) * float(np.sum(np.sum(z0 * qc_b[seg], axis=0) - i0 * qe_b[seg]))
    return tot


def productions(grid, thermo, fluxes, reaction, dissipation, adv_x, adv_y, qc_b, qe_b, L):
    cells = {
        "P_visc": dissipation * thermo.inv_theta,
        "P_react": -np.sum(thermo.zeta * reaction, axis=0),
        "P_cross": faces_to_cells(grid, fluxes.p_cross),
        "P_fourier": faces_to_cells(grid, fluxes.p_fourier),
    }
    totals = {k: float(grid.integral(v)) for k, v in cells.items()}
    return ProductionBreakdown(
        cells, totals, _advective_production(grid, thermo, adv_x, adv_y, L), _boundary_entropy_flux(grid, thermo, qc_b, qe_b)
    )


def entropy_production(grid, state, model, bc, cut):
    """Entropy production of a state at its own velocity and potential.

    Returns
    -------
    ProductionBreakdown
        ``cells`` maps ``P_visc, P_react, P_cross, P_fourier`` to cell
        densities; ``totals`` holds their integrals.
    """
    from . import kernels
    from .momentum import dissipation_field
    from .transport import boundary_fluxes

    state.validate(grid, model.L, simplex_tol=1e-8)
    th = cell_thermo(grid, state.c, state.e, model, cut)
    fl = diffusive_fluxes(grid, th, model, state.phi)
    r = th.cut * model.reaction(state.c, th.theta, th.zeta)
    sd = dissipation_field(grid, state, model, bc, th.theta)
    stacked = np.ascontiguousarray(np.concatenate([state.c, state.e[None]], axis=0))
    ax, ay = kernels.upwind_fluxes(stacked, np.ascontiguousarray(state.u), np.ascontiguousarray(state.v))
    qc_b, qe_b = boundary_fluxes(grid, th, state.c, model, bc, state.phi)
    return productions(grid, th, fl, r, sd, ax, ay, qc_b, qe_b, model.L)


# residuals ----------------------------------------------------------------


def balance_residuals(grid, prev, nxt, record, model, cut, potential):
    """Signed residuals of the discrete balances over one recorded step.

    Parameters
    ----------
    prev, nxt : FieldState
        Consecutive accepted states.
    record : StepRecord
        Fluxes and sources used by the step.
    potential : PotentialSolver
        Provides the boundary gradient of the potential.

    Returns
    -------
    dict
        ``species`` (per-species array), ``charge``, ``kinetic``, ``internal``,
        ``total_energy``, ``entropy`` and the production breakdown ``prod``.
    """
    if record is None:
        raise StateError("balance residuals need the step record")
    dt = record.dt
    tr = record.transport
    L = model.L
    zv = model.z_array
    area_sum = lambda vals: grid.boundary_integral(vals)  # noqa: E731

    dc = nxt.c - prev.c
    out_c = np.array([area_sum({s: tr.qc_b[s][i] for s in grid.segments}) for i in range(L)])
    species = grid.integral(dc) + dt * out_c - dt * grid.integral(tr.reaction)
    dq = np.tensordot(zv, dc, axes=(0, 0))
    charge = (
        float(grid.integral(dq))
        + dt * area_sum({s: zv @ tr.qc_b[s] for s in grid.segments})
        - dt * float(grid.integral(np.tensordot(zv, tr.reaction, axes=(0, 0))))
    )

    heat_out = area_sum(tr.qe_b)
    internal = float(grid.integral(nxt.e - prev.e)) + dt * heat_out - dt * float(grid.integral(tr.dissipation + tr.joule_cells))

    if grid.dim == 2:
        du, dv = nxt.u - prev.u, nxt.v - prev.v
        dke = face_inner(grid, du, dv, prev.u, prev.v) + 0.5 * face_inner(grid, du, dv, du, dv)
        mom = record.momentum
        visc = mom.prep.viscous
        work = -float(grid.integral(visc.dissipation)) - visc.slip_power + face_inner(
            grid, mom.lorentz_u, mom.lorentz_v, prev.u, prev.v
        )
        kinetic = dke - dt * work
        slip = visc.slip_power
    else:
        dke, kinetic, slip = 0.0, 0.0, 0.0

    q_prev = np.tensordot(zv, prev.c, axes=(0, 0))
    q_next = np.tensordot(zv, nxt.c, axes=(0, 0))
    dphi = nxt.phi - prev.phi
    phi_mid = 0.5 * (nxt.phi + prev.phi)
    dW = grid.vol * (
        float(np.sum(np.diff(dphi, axis=0) * np.diff(phi_mid, axis=0))) / grid.hx**2
        + float(np.sum(np.diff(dphi, axis=1) * np.diff(phi_mid, axis=1))) / grid.hy**2
    )
    gb_prev = potential.boundary_gradient(prev.phi, q_prev)
    gb_next = potential.boundary_gradient(nxt.phi, q_next)
    phi_b = {s: grid.trace(phi_mid, s) for s in grid.segments}
    b_pot = area_sum({s: phi_b[s] * (gb_next[s] - gb_prev[s]) for s in grid.segments})
    b_charge = area_sum({s: phi_b[s] * (zv @ tr.qc_b[s]) for s in grid.segments})
    dE = dke + float(grid.integral(nxt.e - prev.e)) + dW
    total_energy = dE - (dt * (-slip - heat_out - b_charge) + b_pot)

    prod = productions(
        grid, tr.thermo, tr.fluxes, tr.reaction, tr.dissipation, tr.adv_x, tr.adv_y, tr.qc_b, tr.qe_b, L
    )
    dS = float(grid.integral(entropy_e_increment(prev.e, nxt.e - prev.e) + entropy_c_increment(prev.c, dc, cut.epsilon)))
    entropy = dS - dt * (sum(prod.totals.values()) + prod.P_adv + prod.boundary_entropy_flux)
    return dict(
        species=species,
        charge=charge,
        kinetic=kinetic,
        internal=internal,
        total_energy=total_energy,
        entropy=entropy,
        prod=prod,
    )


# a priori quantities ------------------------------------------------------


def apriori_quantities(grid, state, model, bc, thermo, slip_power=0.0):
    """Instantaneous values of the quantities controlled by the energy and entropy estimates."""
    th = thermo.theta
    q = {}
    q["v_L2"] = math.sqrt(2.0 * kinetic_energy(grid, state.u, state.v))
    q["e_L1"] = float(grid.integral(np.abs(state.e)))
    q["theta_L1"] = float(grid.integral(th))
    lnt = np.log(th)
    tb = th ** (-0.5 * model.beta)
    q["grad_ln_theta_sq"] = grid.vol * (float(np.sum(np.diff(lnt, axis=0) ** 2)) / grid.hx**2 + float(np.sum(np.diff(lnt, axis=1) ** 2)) / grid.hy**2)
    q["grad_theta_mbeta2_sq"] = grid.vol * (float(np.sum(np.diff(tb, axis=0) ** 2)) / grid.hx**2 + float(np.sum(np.diff(tb, axis=1) ** 2)) / grid.hy**2)
    q["slip_dissipation"] = slip_power
    q["boundary_heat_dissipation"] = grid.boundary_integral(
        {s: bc.face(s, "kappa_bar") * grid.trace(th, s) ** -2 for s in grid.segments}
    )
    pz = project_ell(thermo.zeta, axis=0)
    q["boundary_species_dissipation"] = grid.boundary_integral(
        {s: bc.face(s, "d") * np.sum(grid.trace(pz, s) ** 2, axis=0) for s in grid.segments}
    )
    zt = zeta(state.c)
    zn = np.sqrt(np.sum(zt * zt, axis=0))
    pzn = np.sqrt(np.sum(project_ell(zt, axis=0) ** 2, axis=0))
    q["zeta_max"] = float(zt.max())
    q["zeta_times_c_max"] = float((np.abs(zt) * state.c).max())
    q["zeta_projected_ratio"] = float((zn / (1.0 + pzn)).max())
    return q


SUP_KEYS = ("v_L2", "e_L1", "theta_L1", "zeta_max", "zeta_times_c_max", "zeta_projected_ratio")
INTEGRATED_KEYS = (
    "P_visc", "P_cross", "grad_ln_theta_sq", "grad_theta_mbeta2_sq",
    "slip_dissipation", "boundary_heat_dissipation", "boundary_species_dissipation",
)


@dataclass
class MonitorRecord:
    """Suprema in time and time integrals of the monitored quantities."""

    sup: dict
    integral: dict

    @property
    def finite(self):
        return all(math.isfinite(v) for v in list(self.sup.values()) + list(self.integral.values()))


class Monitor:
    """Accumulates a priori quantities step by step."""

    def __init__(self):
        self.sup = {k: -math.inf for k in SUP_KEYS}
        self.integral = {k: 0.0 for k in INTEGRATED_KEYS}

    def update(self, report, dt):
        for k in SUP_KEYS:
            self.sup[k] = max(self.sup[k], report.apriori[k])
        if dt > 0:
            for k in INTEGRATED_KEYS:
                val = getattr(report, k) if k.startswith("P_") else report.apriori[k]
                self.integral[k] += dt * val

    def record(self):
        return MonitorRecord(dict(self.sup), dict(self.integral))


def apriori_monitor(history):
    """Monitor record from a list of reports (uses successive time differences)."""
    mon = Monitor()
    prev_t = None
    for rep in history:
        mon.update(rep, 0.0 if prev_t is None else rep.t - prev_t)
        prev_t = rep.t
    return mon.record()

"""Coupled time stepping, runs, and parameter and refinement studies.

One step iterates the loop potential -> momentum -> species -> energy to a
fixed point in the potential (Picard). The first pass uses the potential of
the old state, so a single pass is the decoupled scheme. The accepted state
carries the potential of its own charge, which keeps the discrete
electrostatic energy identity exact.
"""
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .constitutive import MaterialModel
from .diagnostics import (
    DiagnosticsReport,
    Monitor,
    ReportWriter,
    RESIDUAL_TERMS,
    apriori_quantities,
    balance_residuals,
    entropy_production,
    state_integrals,
)
from .errors import ConfigurationError, IterationError, StepSizeError
from .grid import BoundarySpec, FieldState, Grid, face_to_center, write_field_csv
from .momentum import ConvectionTruncation, finish_momentum, prepare_momentum
from .poisson import LinearSolveSettings, PotentialSolver, ProjectionSolver
from .transport import CutoffParams, cell_thermo, stable_dt, transport_update

logger = logging.getLogger(__name__)


@dataclass
class SimConfig:
    """Everything needed to run one simulation.

    ``steps`` fixes the number of steps; ``t_end`` is then ``steps * dt``.
    """

    grid: Grid
    model: MaterialModel
    bc: BoundarySpec
    initial: FieldState
    dt: float
    steps: int
    cut: CutoffParams = field(default_factory=CutoffParams)
    trunc: ConvectionTruncation = field(default_factory=ConvectionTruncation)
    picard_tol: float = 1e-8
    picard_max_iter: int = 50
    linear: LinearSolveSettings = field(default_factory=LinearSolveSettings)
    scenario: str = "custom"
    output_every: int = 1
    snapshot_every: int = 0
    check_cfl: bool = True

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ConfigurationError(f"steps must be a nonnegative integer, got {self.steps}")
        if not self.picard_tol > 0:
            raise ConfigurationError("Picard tolerance must be positive")
        if int(self.picard_max_iter) != self.picard_max_iter or self.picard_max_iter < 1:
            raise ConfigurationError("Picard max iterations must be a positive integer")
        if self.output_every < 1 or self.snapshot_every < 0:
            raise ConfigurationError("output cadence must be >= 1 and snapshot cadence >= 0")

    @property
    def t_end(self):
        return self.steps * self.dt


@dataclass
class StepRecord:
    """Fluxes and sources of one accepted step, consumed by the diagnostics."""

    dt: float
    transport: object
    momentum: object
    phi_used: np.ndarray
    picard_iters: int
    picard_trace: list
    cutoff_active: bool


def _rel_change(a, b):
    num = sum(float(np.sum((x - y) ** 2)) for x, y in zip(a, b))
    den = sum(float(np.sum(x * x)) for x in a)
    return math.sqrt(num / max(den, 1e-300))


class Stepper:
    """Owns the solvers of one configuration and advances states."""

    def __init__(self, config):
        self.cfg = config
        self.grid = config.grid
        self.potential = PotentialSolver(config.grid, config.bc, config.linear)
        self.projector = ProjectionSolver(config.grid, config.linear) if config.grid.dim == 2 else None

    def charge(self, c):
        return np.tensordot(self.cfg.model.z_array, c, axes=(0, 0))

    def initial_state(self):
        """Initial data with the potential solved from the initial charge."""
        st = self.cfg.initial.copy()
        st.t = 0.0
        st.validate(self.grid, self.cfg.model.L)
        st.phi = self.potential.solve(self.charge(st.c))
        return st

    def stable_dt(self, state, viscosity_max=0.0):
        return stable_dt(self.grid, state.c, state.e, state.u, state.v, self.cfg.model, self.cfg.cut, viscosity_max)

    def advance(self, state, step_index=None):
        """One coupled step; returns ``(new_state, StepRecord)``."""
        cfg, grid, model = self.cfg, self.grid, self.cfg.model
        dt = cfg.dt
        thermo = cell_thermo(grid, state.c, state.e, model, cfg.cut)
        prep = prepare_momentum(grid, state, model, cfg.bc, cfg.trunc, thermo.theta, dt) if grid.dim == 2 else None
        if cfg.check_cfl:
            lim = self.stable_dt(state, prep.viscous.eta_max if prep is not None else 0.0)
            if dt > lim:
                raise StepSizeError(f"dt = {dt:.6g} exceeds the explicit stability limit {lim:.6g} at t = {state.t:.6g}")
        sd = prep.viscous.dissipation if prep is not None else np.zeros(grid.shape)
        phi = state.phi
        prev = None
        trace = []
        for it in range(1, cfg.picard_max_iter + 1):
            if it > 1:
                phi = self.potential.solve(self.charge(tr.c))
            if prep is not None:
                mom = finish_momentum(grid, prep, state, model, phi, dt, self.projector)
                u, v = mom.u, mom.v
            else:
                mom, u, v = None, state.u, state.v
            tr = transport_update(grid, state, thermo, model, cfg.bc, cfg.cut, phi, u, v, dt, sd)
            cand = (tr.c, u, v, tr.e, phi)
            if not model.charged or cfg.picard_max_iter == 1:
                break
            if prev is not None:
                change = _rel_change(cand, prev)
                trace.append(change)
                if change <= cfg.picard_tol:
                    break
            prev = cand
        else:
            raise IterationError(
                f"Picard iteration did not converge in {cfg.picard_max_iter} iterations at t = {state.t:.6g}", trace
            )
        phi_new = self.potential.solve(self.charge(tr.c)) if model.charged else state.phi.copy()
        new = FieldState(
            c=tr.c,
            e=tr.e,
            u=u.copy(),
            v=v.copy(),
            p=mom.p if mom is not None else state.p.copy(),
            phi=phi_new,
            t=(step_index + 1) * dt if step_index is not None else state.t + dt,
        )
        active = thermo.cut_active or thermo.theta_clamped or tr.e_clamped > 0
        return new, StepRecord(dt, tr, mom, phi, it, trace, active)

    # reports

    def initial_report(self, state):
        cfg, grid = self.cfg, self.grid
        prod = entropy_production(grid, state, cfg.model, cfg.bc, cfg.cut)
        th = cell_thermo(grid, state.c, state.e, cfg.model, cfg.cut)
        rep = DiagnosticsReport(t=state.t, **state_integrals(grid, state, cfg.cut))
        for k, v in prod.totals.items():
            setattr(rep, k, v)
        rep.P_min = {k: float(v.min()) for k, v in prod.cells.items()}
        rep.P_adv = prod.P_adv
        rep.boundary_entropy_flux = prod.boundary_entropy_flux
        rep.species_residuals = np.zeros(cfg.model.L)
        rep.apriori = apriori_quantities(grid, state, cfg.model, cfg.bc, th)
        rep.cutoff_active = th.cut_active or th.theta_clamped
        return rep

    def step_report(self, prev, nxt, rec):
        cfg, grid = self.cfg, self.grid
        res = balance_residuals(grid, prev, nxt, rec, cfg.model, cfg.cut, self.potential)
        prod = res["prod"]
        rep = DiagnosticsReport(t=nxt.t, **state_integrals(grid, nxt, cfg.cut))
        rep.species_residuals = res["species"]
        rep.signed = {k: res[k] for k in ("charge", "kinetic", "internal", "total_energy", "entropy")}
        rep.res_mass = float(np.max(np.abs(res["species"])))
        rep.res_charge = abs(res["charge"])
        rep.res_kinetic = abs(res["kinetic"])
        rep.res_internal = abs(res["internal"])
        rep.res_total_energy = abs(res["total_energy"])
        rep.res_entropy = abs(res["entropy"])
        for k, v in prod.totals.items():
            setattr(rep, k, v)
        rep.P_min = {k: float(v.min()) for k, v in prod.cells.items()}
        rep.P_adv = prod.P_adv
        rep.boundary_entropy_flux = prod.boundary_entropy_flux
        rep.picard_iters = rec.picard_iters
        slip = rec.momentum.prep.viscous.slip_power if rec.momentum is not None else 0.0
        rep.apriori = apriori_quantities(grid, prev, cfg.model, cfg.bc, rec.transport.thermo, slip)
        rep.cutoff_active = rec.cutoff_active
        if grid.dim == 2:
            from .grid import div

            rep.div_max = float(np.abs(div(grid, nxt.u, nxt.v)).max())
        return rep


@dataclass
class RunResult:
    """Emitted reports, the full per-step series, the final state and the monitor."""

    reports: list
    steps: list
    final_state: FieldState
    monitor: object
    cutoff_ever_active: bool
    snapshots: list = field(default_factory=list)


SNAPSHOT_FIELDS = ("c", "e", "theta", "phi", "p", "vx", "vy")


def write_snapshot(out_dir, step, grid, state, cfg):
    from .constitutive import theta_of_e

    paths = []
    snap = Path(out_dir) / "snapshots"
    snap.mkdir(parents=True, exist_ok=True)
    fields = {f"c{i + 1}": state.c[i] for i in range(state.c.shape[0])}
    fields["e"] = state.e
    fields["theta"] = theta_of_e(state.e)
    fields["phi"] = state.phi
    fields["p"] = state.p
    if grid.dim == 2:
        vx, vy = face_to_center(state.u, state.v)
        fields["vx"], fields["vy"] = vx, vy
    for name, val in fields.items():
        p = snap / f"{name}_{step:06d}.csv"
        write_field_csv(p, name, state.t, grid, val)
        paths.append(p)
    return paths


def run(config, out_dir=None, keep_states=False):
    """Run a configuration to ``t_end``.

    Reports are emitted at ``t = 0`` and every ``output_every`` steps (and at
    the last step); each emitted residual is the largest absolute residual
    since the previous emitted row. With ``out_dir`` the diagnostics CSV is
    written row by row, so a failing run leaves its partial output behind.

    Returns
    -------
    RunResult
    """
    stepper = Stepper(config)
    state = stepper.initial_state()
    writer = None
    snapshots = []
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        writer = ReportWriter(Path(out_dir) / "diagnostics.csv")
    try:
        rep0 = stepper.initial_report(state)
        reports, steps = [rep0], [rep0]
        mon = Monitor()
        mon.update(rep0, 0.0)
        ever = rep0.cutoff_active
        if writer:
            writer.write(rep0)
            if config.snapshot_every or config.steps == 0:
                snapshots += write_snapshot(out_dir, 0, stepper.grid, state, config)
        pending = {k: 0.0 for k in RESIDUAL_TERMS}
        for n in range(config.steps):
            new, rec = stepper.advance(state, n)
            rep = stepper.step_report(state, new, rec)
            steps.append(rep)
            mon.update(rep, config.dt)
            ever = ever or rep.cutoff_active
            for k in RESIDUAL_TERMS:
                pending[k] = max(pending[k], getattr(rep, k))
            last = n + 1 == config.steps
            if (n + 1) % config.output_every == 0 or last:
                emitted = replace(rep, **pending)
                reports.append(emitted)
                pending = {k: 0.0 for k in RESIDUAL_TERMS}
                if writer:
                    writer.write(emitted)
            if writer and ((config.snapshot_every and (n + 1) % config.snapshot_every == 0) or last):
                snapshots += write_snapshot(out_dir, n + 1, stepper.grid, new, config)
            state = new
    finally:
        if writer:
            writer.close()
    return RunResult(reports, steps, state, mon.record(), ever, snapshots)


# studies ------------------------------------------------------------------


def state_distance(grid, a, b):
    """Discrete L2 distance between two states over ``(c, e, u, v, phi)``."""
    tot = float(np.sum((a.c - b.c) ** 2) + np.sum((a.e - b.e) ** 2) + np.sum((a.phi - b.phi) ** 2))
    tot += float(np.sum((a.u - b.u) ** 2) + np.sum((a.v - b.v) ** 2))
    return math.sqrt(grid.vol * tot)


def _workers():
    try:
        n = int(os.environ.get("MIXSIM_THREADS", "1"))
    except ValueError:
        raise ConfigurationError("MIXSIM_THREADS must be an integer") from None
    return max(1, n)


def _final(config):
    res = run(config)
    return res.final_state, res.cutoff_ever_active, res


def _map_runs(configs):
    nw = min(_workers(), len(configs))
    if nw <= 1:
        return [_final(c) for c in configs]
    with ProcessPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(_final, configs))


@dataclass
class CascadeRow:
    parameter: str
    value: float
    diff_prev: float
    cutoff_active: bool
    final_state: FieldState = field(repr=False, default=None)


def _sweep(config, name, values, make):
    configs = [make(v) for v in values]
    results = _map_runs(configs)
    rows = []
    prev = None
    for v, (st, active, _) in zip(values, results):
        d = math.nan if prev is None else state_distance(config.grid, st, prev)
        rows.append(CascadeRow(name, float(v), d, bool(active), st))
        prev = st
    return rows


def cascade_study(config, deltas=(), epsilons=(), ks=()):
    """Run the same configuration along sequences of ``delta``, ``epsilon`` and ``k``.

    Returns
    -------
    list of CascadeRow
        One row per run, with the L2 distance of its final state to the
        previous run of the same sweep and whether any cut-off ever acted.
    """
    rows = []
    if deltas:
        rows += _sweep(config, "delta", deltas, lambda d: replace(config, cut=CutoffParams(d, config.cut.epsilon)))
    if epsilons:
        rows += _sweep(config, "epsilon", epsilons, lambda e: replace(config, cut=CutoffParams(config.cut.delta, e)))
    if ks:
        rows += _sweep(config, "k", ks, lambda k: replace(config, trunc=ConvectionTruncation(k)))
    return rows


EXACT_FLOOR = 1e-11


def observed_orders(values, ratio=2.0):
    """``log_ratio(v_k / v_{k+1})``; ``inf`` when both values are at round-off."""
    out = []
    for a, b in zip(values[:-1], values[1:]):
        if a <= EXACT_FLOOR and b <= EXACT_FLOOR:
            out.append(math.inf)
        elif b <= 0:
            out.append(math.inf)
        else:
            out.append(math.log(a / b) / math.log(ratio))
    return out


@dataclass
class RefinementTable:
    """Cumulative absolute residuals per level and observed orders between levels."""

    dts: list
    residuals: dict
    orders: dict
    runs: list = field(repr=False, default_factory=list)


def dt_study(config, levels=3):
    """Halve ``dt`` (doubling the step count) and measure time-integrated residuals."""
    if levels < 2:
        raise ConfigurationError("a refinement study needs at least two levels")
    configs = [replace(config, dt=config.dt / 2**k, steps=config.steps * 2**k, output_every=1) for k in range(levels)]
    results = [r for _, _, r in _map_runs(configs)]
    cum = {k: [float(sum(getattr(s, k) for s in r.steps[1:])) for r in results] for k in RESIDUAL_TERMS}
    return RefinementTable([c.dt for c in configs], cum, {k: observed_orders(v) for k, v in cum.items()}, results)


def restrict_cells(field, fx, fy):
    """Block-average a cell field by ``(fx, fy)`` over its last two axes."""
    *lead, nx, ny = field.shape
    return field.reshape(*lead, nx // fx, fx, ny // fy, fy).mean(axis=(-3, -1))


@dataclass
class HRefinementTable:
    """Grid refinement: coarse-level distance of each final state to the next finer one."""

    sizes: list
    dts: list
    differences: list
    orders: list
    runs: list = field(repr=False, default_factory=list)


def h_study(make_config, levels=3):
    """Refine the grid by two per level with ``make_config(level)``.

    Final cell fields ``(c, e, phi)`` of each level are block-averaged onto
    the previous level and compared in discrete L2; the observed order uses
    successive differences.
    """
    if levels < 3:
        raise ConfigurationError("an h-refinement study needs at least three levels")
    configs = [make_config(k) for k in range(levels)]
    for a, b in zip(configs[:-1], configs[1:]):
        if b.grid.nx != 2 * a.grid.nx or (a.grid.dim == 2 and b.grid.ny != 2 * a.grid.ny):
            raise ConfigurationError("each h-refinement level must double the grid")
        if not math.isclose(a.t_end, b.t_end, rel_tol=1e-12):
            raise ConfigurationError("h-refinement levels must share t_end")
    results = _map_runs(configs)
    diffs = []
    for a, (sa, _, _), (sb, _, _) in zip(configs[:-1], results[:-1], results[1:]):
        fy = 2 if a.grid.dim == 2 else 1
        tot = 0.0
        for fa, fb in ((sa.c, sb.c), (sa.e, sb.e), (sa.phi, sb.phi)):
            tot += float(np.sum((fa - restrict_cells(fb, 2, fy)) ** 2))
        diffs.append(math.sqrt(a.grid.vol * tot))
    return HRefinementTable(
        [c.grid.nx for c in configs], [c.dt for c in configs], diffs, observed_orders(diffs), [r for _, _, r in results]
    )

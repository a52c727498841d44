"""Shipped scenarios: default config values plus initial-data builders.

A scenario fills every key it cares about; values from a config file
override them. ``build_config`` turns the merged values into a
:class:`~mixsim.stepper.SimConfig`.
"""
import math

import numpy as np

from .config import BC_SCHEMA, SCHEMA, parse_text
from .constitutive import BoundaryCoeffs, MaterialModel, SamplerConfig, e_of_theta
from .errors import ConfigurationError
from .grid import BoundarySpec, FieldState, Grid
from .momentum import ConvectionTruncation, prepare_momentum
from .poisson import LinearSolveSettings
from .transport import CutoffParams, cell_thermo, stable_dt


def _walls(gamma):
    return {f"bc.{s}.{k}": v for s in ("bottom", "top") for k, v in (("gamma", gamma), ("theta", 1.0))}


SCENARIOS = {
    "equilibrium": {
        "grid.dim": 2, "grid.nx": 16, "grid.ny": 16,
        "time.steps": 20,
        "model.L": 3, "model.z": (0.0, 0.0, 0.0), "model.m_amp": 0.2, "model.rho0": 0.5,
        "init.c": (1 / 3, 1 / 3, 1 / 3), "init.e": 4.0,
        **{f"bc.{s}.{k}": v for s in ("left", "right", "bottom", "top") for k, v in (
            ("theta", 5.0), ("c", (1 / 3, 1 / 3, 1 / 3)), ("d", 0.5), ("kappa", 1.0), ("lambda", 1.0), ("gamma", 0.5))},
    },
    "charged-channel": {
        "grid.dim": 2, "grid.nx": 32, "grid.ny": 32,
        "time.steps": 200,
        "model.L": 3, "model.z": (1.0, -1.0, 0.0), "model.g_visc": (0.2, 0.2, 0.2),
        "model.mobility0": 0.1, "model.kappa0": 0.5, "model.m_amp": 0.1, "model.rho0": 0.5,
        "init.c": (1 / 3, 1 / 3, 1 / 3), "init.amplitude": 0.05, "init.e": 2.0, "init.velocity": 0.05,
        "bc.left.phi": 0.5, "bc.left.lambda": 1.0, "bc.left.d": 0.5, "bc.left.kappa": 1.0,
        "bc.left.theta": 3.0, "bc.left.c": (0.35, 0.3, 0.35), "bc.left.gamma": 0.5,
        "bc.right.phi": -0.5, "bc.right.lambda": 1.0, "bc.right.d": 0.5, "bc.right.kappa": 1.0,
        "bc.right.theta": 3.5, "bc.right.c": (0.3, 0.35, 0.35), "bc.right.gamma": 0.5,
        **_walls(0.5),
    },
    "soret-1d": {
        "grid.dim": 1, "grid.nx": 32,
        "time.steps": 4000,
        "model.L": 2, "model.z": (0.0, 0.0), "model.m_amp": 0.5, "model.mobility0": 1.0,
        "init.c": (0.5, 0.5), "init.e": float(e_of_theta(3.0)),
        "bc.left.d": 1.0, "bc.left.c": (0.5, 0.5), "bc.left.theta": 2.0, "bc.left.kappa": 1.0, "bc.left.lambda": 1.0,
        "bc.right.d": 0.0, "bc.right.theta": 4.0, "bc.right.kappa": 1.0, "bc.right.lambda": 1.0,
    },
    "joule-1d": {
        "grid.dim": 1, "grid.nx": 32,
        "time.steps": 400,
        "model.L": 2, "model.z": (1.0, -1.0), "model.mobility0": 1.0, "model.kappa0": 0.2,
        "init.c": (0.5, 0.5), "init.e": 1.0,
        **{f"bc.{s}.{k}": v for s in ("left", "right") for k, v in (
            ("d", 0.5), ("c", (0.5, 0.5)), ("theta", 2.0), ("kappa", 0.2), ("lambda", 1.0))},
        "bc.left.phi": 1.0, "bc.right.phi": -1.0,
    },
    "uncharged-decay": {
        "grid.dim": 2, "grid.nx": 32, "grid.ny": 32,
        "time.steps": 200,
        "model.L": 3, "model.z": (0.0, 0.0, 0.0), "model.g_visc": (0.05, 0.05, 0.05), "model.r": 1.6,
        "model.mobility0": 0.1, "model.kappa0": 0.5,
        "init.c": (1 / 3, 1 / 3, 1 / 3), "init.amplitude": 0.05, "init.e": 2.0, "init.velocity": 0.5,
        **{f"bc.{s}.{k}": v for s in ("left", "right", "bottom", "top") for k, v in (
            ("theta", 3.0), ("lambda", 1.0), ("gamma", 0.5))},
    },
}


def scenario_names():
    return tuple(SCENARIOS)


def merged_values(overrides):
    """Documented defaults, then the scenario's values, then ``overrides``."""
    name = overrides.get("scenario", SCHEMA["scenario"][1])
    if name not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {name!r}; choose one of {', '.join(SCENARIOS)}")
    vals = {k: d for k, (_, d) in SCHEMA.items()}
    vals.update(SCENARIOS[name])
    vals.update(overrides)
    vals["scenario"] = name
    return vals


def build_grid(vals):
    if vals["grid.dim"] == 1:
        return Grid.line(vals["grid.nx"], vals["grid.lx"])
    return Grid.rect(vals["grid.nx"], vals["grid.ny"], vals["grid.lx"], vals["grid.ly"])


def build_model(vals):
    return MaterialModel(
        L=vals["model.L"],
        z=vals["model.z"],
        r_exponent=vals["model.r"],
        g_visc=vals["model.g_visc"],
        beta=vals["model.beta"],
        eps0=vals["model.eps0"],
        mobility0=vals["model.mobility0"],
        m_amp=vals["model.m_amp"],
        kappa0=vals["model.kappa0"],
        rho0=vals["model.rho0"],
    )


def build_bc(vals, grid, L):
    present = {k.split(".")[1] for k in vals if k.startswith("bc.")}
    stray = present - set(grid.segments)
    if stray:
        raise ConfigurationError(f"boundary keys for segments absent from a {grid.dim}D grid: {sorted(stray)}")
    segs = {}
    for seg in grid.segments:
        get = lambda f: vals.get(f"bc.{seg}.{f}", BC_SCHEMA[f][1])  # noqa: E731
        zeta_g, comp = get("zeta"), get("c")
        if zeta_g is not None and comp is not None:
            raise ConfigurationError(f"bc.{seg}: give either zeta or c, not both")
        if comp is not None:
            comp = np.array(comp)
            if comp.size != L or np.any(comp <= 0):
                raise ConfigurationError(f"bc.{seg}.c must hold {L} positive values")
            zeta_g = np.log(comp)
        elif zeta_g is not None and len(zeta_g) != L:
            raise ConfigurationError(f"bc.{seg}.zeta must hold {L} values")
        segs[seg] = BoundaryCoeffs(
            theta_G=get("theta"), zeta_G=zeta_g, phi_G=get("phi"), d=get("d"),
            kappa_bar=get("kappa"), lambda_G=get("lambda"), gamma=get("gamma"),
        )
    return BoundarySpec(grid, segs, L)


def build_initial(vals, grid, L):
    """Initial data: base composition with a charge-separating cosine mode,
    uniform internal energy and a discretely divergence-free vortex."""
    base = vals["init.c"] if vals["init.c"] is not None else (1.0 / L,) * L
    if len(base) != L:
        raise ConfigurationError(f"init.c must hold {L} values")
    base = np.array(base, dtype=float)
    if np.any(base <= 0) or abs(base.sum() - 1.0) > 1e-12:
        raise ConfigurationError("init.c must be positive and sum to one")
    X, Y = grid.mesh()
    mode = np.cos(math.pi * X / grid.lx) * (np.cos(math.pi * Y / grid.ly) if grid.dim == 2 else 1.0)
    a = vals["init.amplitude"]
    c = np.broadcast_to(base[:, None, None], (L,) + grid.shape).copy()
    c[0] += a * mode
    c[1] -= a * mode
    if np.any(c <= 0):
        raise ConfigurationError("init.amplitude makes a concentration non-positive")
    e = np.full(grid.shape, vals["init.e"], dtype=float)
    if not vals["init.e"] > 0:
        raise ConfigurationError("init.e must be positive")
    st = FieldState.at_rest(grid, c, e)
    amp = vals["init.velocity"]
    if grid.dim == 2 and amp:
        xn = np.arange(grid.nx + 1) * grid.hx
        yn = np.arange(grid.ny + 1) * grid.hy
        psi = amp / math.pi * np.outer(np.sin(math.pi * xn / grid.lx), np.sin(math.pi * yn / grid.ly))
        psi[0, :] = psi[-1, :] = psi[:, 0] = psi[:, -1] = 0.0
        st.u = (psi[:, 1:] - psi[:, :-1]) / grid.hy
        st.v = -(psi[1:, :] - psi[:-1, :]) / grid.hx
    return st


def suggest_dt(grid, model, bc, state, cut, trunc, safety):
    """``safety`` times the explicit limit of the initial state (viscous limit included)."""
    th = cell_thermo(grid, state.c, state.e, model, cut)
    eta = 0.0
    if grid.dim == 2:
        eta = prepare_momentum(grid, state, model, bc, trunc, th.theta, 1.0).viscous.eta_max
    return safety * stable_dt(grid, state.c, state.e, state.u, state.v, model, cut, eta)


def build_config(overrides=None):
    """Merge defaults, scenario and overrides into a SimConfig.

    Returns
    -------
    (SimConfig, dict)
        The configuration and the merged value dict it was built from.
    """
    from .stepper import SimConfig

    vals = merged_values(dict(overrides or {}))
    grid = build_grid(vals)
    model = build_model(vals)
    bc = build_bc(vals, grid, model.L)
    init = build_initial(vals, grid, model.L)
    cut = CutoffParams(vals["cutoff.delta"], vals["cutoff.epsilon"])
    trunc = ConvectionTruncation(vals["cutoff.k"])
    dt = vals["time.dt"]
    if dt == "auto":
        if not 0 < vals["time.safety"] <= 1:
            raise ConfigurationError("time.safety must lie in (0, 1]")
        dt = suggest_dt(grid, model, bc, init, cut, trunc, vals["time.safety"])
    steps = vals["time.steps"]
    if vals["time.t_end"] is not None:
        t_end = vals["time.t_end"]
        if t_end < 0:
            raise ConfigurationError("time.t_end must be nonnegative")
        if "time.steps" in (overrides or {}):
            raise ConfigurationError("give time.t_end or time.steps, not both")
        steps = int(math.ceil(t_end / dt - 1e-9))
        dt = t_end / steps if steps else dt
    cfg = SimConfig(
        grid=grid, model=model, bc=bc, initial=init, dt=float(dt), steps=steps, cut=cut, trunc=trunc,
        picard_tol=vals["picard.tol"], picard_max_iter=vals["picard.max_iter"],
        linear=LinearSolveSettings(vals["solver.method"], vals["solver.tol"], vals["solver.max_iter"]),
        scenario=vals["scenario"], output_every=vals["output.every"], snapshot_every=vals["output.snapshots"],
        check_cfl=vals["output.check_cfl"],
    )
    return cfg, vals


def sampler_from(vals, seed=0):
    return SamplerConfig(
        n_samples=vals["check.samples"], theta_min=vals["check.theta_min"], theta_max=vals["check.theta_max"], seed=seed
    )


def config_from_text(text):
    return build_config(parse_text(text))

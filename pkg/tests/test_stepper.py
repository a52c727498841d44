import filecmp
from dataclasses import replace

import numpy as np
import pytest

from mixsim.constitutive import theta_of_e
from mixsim.errors import ConfigurationError, IterationError, StepSizeError
from mixsim.grid import div
from mixsim.momentum import ConvectionTruncation, finish_momentum, prepare_momentum
from mixsim.scenarios import build_config
from mixsim.stepper import (
    EXACT_FLOOR,
    Stepper,
    cascade_study,
    dt_study,
    h_study,
    observed_orders,
    restrict_cells,
    run,
)
from mixsim.transport import cell_thermo, transport_update


def small(name, **kw):
    o = {"scenario": name}
    if name in ("charged-channel", "uncharged-decay", "equilibrium"):
        o.update({"grid.nx": 8, "grid.ny": 8})
    else:
        o["grid.nx"] = 8
    o["time.steps"] = 5
    o.update(kw)
    return build_config(o)[0]


def test_equilibrium_is_a_fixed_point():
    cfg = small("equilibrium")
    stp = Stepper(cfg)
    s0 = stp.initial_state()
    s1, rec = stp.advance(s0, 0)
    for name in ("c", "e", "u", "v", "phi"):
        assert np.array_equal(getattr(s1, name), getattr(s0, name)), name
    rep = stp.step_report(s0, s1, rec)
    for k in ("res_mass", "res_charge", "res_kinetic", "res_internal", "res_total_energy", "res_entropy"):
        assert getattr(rep, k) <= 1e-12


def test_single_pass_equals_decoupled_scheme():
    cfg = replace(small("charged-channel"), picard_max_iter=1)
    stp = Stepper(cfg)
    s0 = stp.initial_state()
    s1, rec = stp.advance(s0, 0)
    assert rec.picard_iters == 1
    g, m = cfg.grid, cfg.model
    th = cell_thermo(g, s0.c, s0.e, m, cfg.cut)
    prep = prepare_momentum(g, s0, m, cfg.bc, cfg.trunc, th.theta, cfg.dt)
    mom = finish_momentum(g, prep, s0, m, s0.phi, cfg.dt, stp.projector)
    tr = transport_update(g, s0, th, m, cfg.bc, cfg.cut, s0.phi, mom.u, mom.v, cfg.dt, prep.viscous.dissipation)
    assert np.array_equal(s1.c, tr.c) and np.array_equal(s1.e, tr.e)
    assert np.array_equal(s1.u, mom.u) and np.array_equal(s1.v, mom.v)


def test_picard_converges_and_reports_iterations():
    cfg = small("charged-channel")
    res = run(cfg)
    iters = [r.picard_iters for r in res.steps[1:]]
    assert all(1 < k < cfg.picard_max_iter for k in iters)


def test_picard_failure_carries_trace():
    cfg = replace(small("charged-channel"), picard_tol=1e-300, picard_max_iter=3)
    stp = Stepper(cfg)
    with pytest.raises(IterationError) as exc:
        stp.advance(stp.initial_state(), 0)
    assert len(exc.value.trace) == 2


def test_oversized_dt_rejected():
    cfg = small("uncharged-decay")
    cfg = replace(cfg, dt=cfg.dt * 10)
    with pytest.raises(StepSizeError):
        run(cfg)


def test_zero_steps_emit_initial_report_only(tmp_path):
    cfg = small("joule-1d", **{"time.steps": 0})
    res = run(cfg, out_dir=tmp_path)
    assert len(res.reports) == 1 and res.reports[0].t == 0.0
    assert len((tmp_path / "diagnostics.csv").read_text().splitlines()) == 2


def test_output_cadence_and_snapshots(tmp_path):
    cfg = replace(small("charged-channel", **{"time.steps": 7}), output_every=3, snapshot_every=5)
    res = run(cfg, out_dir=tmp_path)
    assert [round(r.t / cfg.dt) for r in res.reports] == [0, 3, 6, 7]
    emitted = res.reports[1].res_entropy
    assert emitted == max(s.res_entropy for s in res.steps[1:4])
    names = sorted(p.name for p in (tmp_path / "snapshots").iterdir())
    assert "c1_000005.csv" in names and "vy_000007.csv" in names and "c1_000003.csv" not in names


def test_accepted_states_are_admissible():
    cfg = small("charged-channel", **{"time.steps": 10})
    res = run(cfg)
    for r in res.steps:
        assert r.simplex_drift <= 1e-13 and r.min_c > 0 and r.min_e > 0
        assert r.div_max <= 1e-10
    assert np.abs(div(cfg.grid, res.final_state.u, res.final_state.v)).max() <= 1e-10


def test_charge_residual_is_contraction_of_species_residuals():
    cfg = small("joule-1d", **{"time.steps": 10})
    z = cfg.model.z_array
    for r in run(cfg).steps[1:]:
        assert abs(r.signed["charge"] - z @ r.species_residuals) <= 1e-13


def test_runs_are_bitwise_reproducible(tmp_path):
    cfg = small("charged-channel")
    run(cfg, out_dir=tmp_path / "a")
    run(cfg, out_dir=tmp_path / "b")
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
    assert files
    for f in files:
        assert filecmp.cmp(tmp_path / "a" / f, tmp_path / "b" / f, shallow=False), f


def test_soret_gradient_opposes_temperature_gradient():
    cfg = build_config({"scenario": "soret-1d", "grid.nx": 8, "time.t_end": 1.0, "output.every": 10**6})[0]
    st = run(cfg).final_state
    dc2 = np.diff(st.c[1, :, 0])
    dth = np.diff(theta_of_e(st.e)[:, 0])
    assert np.all(dth > 0)
    assert np.all(dc2 * dth < 0)


def test_cascade_with_inactive_cutoffs_is_exact():
    rows = cascade_study(small("charged-channel"), deltas=[1e-2, 1e-3])
    assert [r.value for r in rows] == [1e-2, 1e-3]
    assert np.isnan(rows[0].diff_prev) and rows[1].diff_prev == 0.0
    assert not any(r.cutoff_active for r in rows)


def test_cascade_single_point():
    rows = cascade_study(small("joule-1d"), epsilons=[0.0])
    assert len(rows) == 1 and np.isnan(rows[0].diff_prev)


def test_k_sweep_above_speed_is_exact():
    rows = cascade_study(small("uncharged-decay"), ks=[100.0, 1000.0, np.inf])
    assert [r.diff_prev for r in rows[1:]] == [0.0, 0.0]


def test_parallel_sweep_matches_serial(monkeypatch):
    cfg = small("joule-1d")
    serial = cascade_study(cfg, epsilons=[1e-2, 0.0])
    monkeypatch.setenv("MIXSIM_THREADS", "2")
    par = cascade_study(cfg, epsilons=[1e-2, 0.0])
    assert [r.diff_prev for r in par][1] == serial[1].diff_prev
    assert np.array_equal(par[1].final_state.c, serial[1].final_state.c)


def test_bad_thread_count(monkeypatch):
    monkeypatch.setenv("MIXSIM_THREADS", "many")
    with pytest.raises(ConfigurationError):
        cascade_study(small("joule-1d"), deltas=[0.0, 0.0])


def test_observed_orders():
    assert observed_orders([4.0, 2.0, 1.0]) == [1.0, 1.0]
    assert observed_orders([EXACT_FLOOR / 2, EXACT_FLOOR / 4]) == [np.inf]


def test_dt_study_orders():
    tab = dt_study(small("joule-1d", **{"time.steps": 8}), levels=3)
    assert tab.dts[0] == 2 * tab.dts[1] == 4 * tab.dts[2]
    assert all(o >= 0.9 for o in tab.orders["res_entropy"])
    with pytest.raises(ConfigurationError):
        dt_study(small("joule-1d"), levels=1)


def test_h_study_levels_must_double():
    base = small("joule-1d")
    with pytest.raises(ConfigurationError):
        h_study(lambda k: base, levels=3)


def test_restrict_cells():
    a = np.arange(16.0).reshape(4, 4)
    assert restrict_cells(a, 2, 2).tolist() == [[2.5, 4.5], [10.5, 12.5]]


def test_config_invariants():
    cfg = small("joule-1d")
    for bad in ({"dt": 0.0}, {"steps": -1}, {"picard_tol": 0.0}, {"picard_max_iter": 0}, {"output_every": 0}):
        with pytest.raises(ConfigurationError):
            replace(cfg, **bad)
    assert replace(cfg, steps=4).t_end == 4 * cfg.dt
    assert ConvectionTruncation().k == np.inf

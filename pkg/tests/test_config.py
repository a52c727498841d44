import math

import numpy as np
import pytest

from mixsim.config import SCHEMA, dump, load, parse_text
from mixsim.errors import ConfigurationError
from mixsim.scenarios import SCENARIOS, build_config, config_from_text, scenario_names


def test_parse_types_and_comments():
    v = parse_text(
        """
        # comment
        grid.nx = 12   # trailing
        model.z = 1, -1, 0
        time.dt = auto
        cutoff.k = inf
        output.check_cfl = no
        bc.left.c = 0.2, 0.3, 0.5
        """
    )
    assert v == {
        "grid.nx": 12,
        "model.z": (1.0, -1.0, 0.0),
        "time.dt": "auto",
        "cutoff.k": math.inf,
        "output.check_cfl": False,
        "bc.left.c": (0.2, 0.3, 0.5),
    }


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("grid.nxx = 3", "unknown configuration key"),
        ("bc.front.d = 1", "unknown configuration key"),
        ("bc.left.mu = 1", "unknown configuration key"),
        ("grid.nx = 3\ngrid.nx = 4", "duplicate"),
        ("grid.nx", "key = value"),
        ("grid.nx = 2.5", "grid.nx"),
        ("model.beta = abc", "model.beta"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(ConfigurationError, match=fragment):
        parse_text(text)


def test_every_schema_key_has_a_default():
    assert all(len(entry) == 2 for entry in SCHEMA.values())


def test_missing_file_names_path(tmp_path):
    p = tmp_path / "absent.cfg"
    with pytest.raises(ConfigurationError, match="absent.cfg"):
        load(p)


def test_dump_round_trips(tmp_path):
    vals = {"grid.nx": 8, "model.beta": 1 / 3, "model.z": (1.0, -1.0, 0.1), "scenario": "joule-1d"}
    p = tmp_path / "x.cfg"
    p.write_text(dump(vals))
    assert load(p) == vals


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_every_scenario_builds(name):
    cfg, vals = build_config({"scenario": name})
    assert cfg.scenario == name and cfg.dt > 0
    cfg.initial.validate(cfg.grid, cfg.model.L)
    assert set(cfg.bc.segments) == set(cfg.grid.segments)


def test_scenario_names():
    assert scenario_names() == ("equilibrium", "charged-channel", "soret-1d", "joule-1d", "uncharged-decay")


def test_overrides_win():
    cfg, _ = build_config({"scenario": "joule-1d", "grid.nx": 10, "time.dt": 1e-6, "time.steps": 3})
    assert cfg.grid.nx == 10 and cfg.dt == 1e-6 and cfg.steps == 3


def test_t_end_sets_step_count():
    cfg, _ = build_config({"scenario": "joule-1d", "time.dt": 0.001, "time.t_end": 0.0105})
    assert cfg.steps == 11 and cfg.t_end == pytest.approx(0.0105)
    cfg, _ = build_config({"scenario": "joule-1d", "time.t_end": 0.0})
    assert cfg.steps == 0


@pytest.mark.parametrize(
    "overrides",
    [
        {"scenario": "nope"},
        {"scenario": "soret-1d", "bc.top.d": 1.0},
        {"model.kappa0": -1.0},
        {"init.c": (0.5, 0.5, 0.5)},
        {"init.amplitude": 0.5},
        {"bc.left.c": (0.5, 0.5)},
        {"bc.left.c": (0.2, 0.3, 0.5), "bc.left.zeta": (0.0, 0.0, 0.0)},
        {"time.t_end": 1.0, "time.steps": 3},
        {"time.safety": 2.0},
        {"cutoff.delta": 0.7},
        {"solver.method": "lu"},
    ],
)
def test_invalid_configs_rejected(overrides):
    with pytest.raises(ConfigurationError):
        build_config(overrides)


def test_config_from_text():
    cfg, vals = config_from_text("scenario = joule-1d\ngrid.nx = 6\n")
    assert cfg.grid.nx == 6 and vals["model.L"] == 2
    assert np.all(cfg.initial.c == 0.5)

"""Flat ``key = value`` configuration files.

Lines are ``key = value``; ``#`` starts a comment. Keys belong to the
sections ``grid``, ``time``, ``model``, ``cutoff``, ``picard``, ``solver``,
``bc.<segment>``, ``init``, ``output`` and ``check``, plus the top-level
``scenario``. Unknown keys and repeated keys are errors.
"""
import math
from pathlib import Path

from .errors import ConfigurationError

SEGMENT_NAMES = ("left", "right", "bottom", "top")
BC_FIELDS = ("theta", "zeta", "c", "phi", "d", "kappa", "lambda", "gamma")


def _float(s):
    try:
        v = float(s)
    except ValueError:
        raise ConfigurationError(f"expected a number, got {s!r}") from None
    if math.isnan(v):
        raise ConfigurationError("NaN is not a valid value")
    return v


def _int(s):
    try:
        return int(s)
    except ValueError:
        raise ConfigurationError(f"expected an integer, got {s!r}") from None


def _floats(s):
    return tuple(_float(x) for x in str(s).replace(",", " ").split())


def _dt(s):
    return "auto" if str(s).strip().lower() == "auto" else _float(s)


def _str(s):
    return str(s).strip()


def _bool(s):
    t = str(s).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"expected a boolean, got {s!r}")


# key -> (parser, documented default)
SCHEMA = {
    "scenario": (_str, "charged-channel"),
    "grid.dim": (_int, 2),
    "grid.nx": (_int, 32),
    "grid.ny": (_int, 32),
    "grid.lx": (_float, 1.0),
    "grid.ly": (_float, 1.0),
    "time.dt": (_dt, "auto"),
    "time.steps": (_int, 100),
    "time.t_end": (_float, None),
    "time.safety": (_float, 0.5),
    "model.L": (_int, 3),
    "model.z": (_floats, (1.0, -1.0, 0.0)),
    "model.r": (_float, 2.0),
    "model.g_visc": (_floats, None),
    "model.beta": (_float, 1.5),
    "model.eps0": (_float, 0.25),
    "model.mobility0": (_float, 1.0),
    "model.m_amp": (_float, 0.0),
    "model.kappa0": (_float, 1.0),
    "model.rho0": (_float, 0.0),
    "cutoff.delta": (_float, 0.0),
    "cutoff.epsilon": (_float, 0.0),
    "cutoff.k": (_float, math.inf),
    "picard.tol": (_float, 1e-8),
    "picard.max_iter": (_int, 50),
    "solver.method": (_str, "direct"),
    "solver.tol": (_float, 1e-12),
    "solver.max_iter": (_int, 10000),
    "init.c": (_floats, None),
    "init.amplitude": (_float, 0.0),
    "init.e": (_float, 2.0),
    "init.velocity": (_float, 0.0),
    "output.every": (_int, 1),
    "output.snapshots": (_int, 0),
    "output.check_cfl": (_bool, True),
    "check.samples": (_int, 10000),
    "check.theta_min": (_float, 1e-3),
    "check.theta_max": (_float, 1e3),
}

BC_SCHEMA = {
    "theta": (_float, 1.0),
    "zeta": (_floats, None),
    "c": (_floats, None),
    "phi": (_float, 0.0),
    "d": (_float, 0.0),
    "kappa": (_float, 0.0),
    "lambda": (_float, 0.0),
    "gamma": (_float, 0.0),
}


def parser_for(key):
    if key in SCHEMA:
        return SCHEMA[key][0]
    parts = key.split(".")
    if len(parts) == 3 and parts[0] == "bc" and parts[1] in SEGMENT_NAMES and parts[2] in BC_SCHEMA:
        return BC_SCHEMA[parts[2]][0]
    raise ConfigurationError(f"unknown configuration key {key!r}")


def parse_text(text, source="<string>"):
    """Parse config text into a dict of typed values (only the keys present)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
        key, val = (x.strip() for x in line.split("=", 1))
        if key in out:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            out[key] = parser_for(key)(val)
        except ConfigurationError as exc:
            raise ConfigurationError(f"{source}:{lineno}: {key}: {exc}") from None
    return out


def load(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {p}")
    return parse_text(p.read_text(), str(p))


def dump(values):
    """Render a value dict back to config text (17 significant digits)."""
    lines = []
    for k in sorted(values):
        v = values[k]
        if v is None:
            continue
        if isinstance(v, tuple):
            s = ", ".join(f"{x:.17g}" for x in v)
        elif isinstance(v, float):
            s = f"{v:.17g}"
        else:
            s = str(v)
        lines.append(f"{k} = {s}")
    return "\n".join(lines) + "\n"

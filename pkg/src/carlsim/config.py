"""Line-oriented key = value files for parameters, scenarios and sweeps.

Values are numbers or ``*``-products of numbers and the symbols ``2pi``,
``pi`` and ``kappa`` (``2pi*22e3``, ``9*kappa``). Two keywords exist:
``delta_c = locked`` ties the detuning to ``n_atoms * u0``, and
``cavity_power(W)`` sets a pump rate by the intracavity power it sustains.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .dynamics import EVENT_NAMES, Event, ScenarioConfig
from .params import AMU, SystemParams, pump_rate_for_cavity_power

PARAM_KEYS = (
    "kappa", "fsr", "lambda", "mirror_T", "u0", "delta_c", "n_atoms",
    "mass_amu", "eta_plus", "eta_minus", "gamma_fric",
)
SCENARIO_KEYS = (
    "initial_distribution", "temperature", "seed", "t_end", "dt", "sample_every",
    "probe_seed_amplitude", "n_particles", "chunk", "window",
    "protocol", "participation", "tolerance",
)
SWEEP_KEYS = ("parameter", "values", "params", "scenario", "output")
SWEEP_PARAMETERS = ("eta_plus", "n_atoms", "gamma_fric")
PROTOCOLS = ("switch_off", "molasses")

_POWER = re.compile(r"^cavity_power\(\s*([^)]+)\s*\)$")


class ConfigError(ValueError):
    """A file that does not parse or violates a contract."""


@dataclass(frozen=True)
class Line:
    lineno: int
    key: str
    value: str


def _lines(text: str, source: str):
    """Yield ``(section, lineno, raw)`` for non-blank, non-comment lines."""
    section = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        raw = raw.split("#", 1)[0].strip()
        if not raw:
            continue
        if raw.startswith("[") and raw.endswith("]"):
            section = raw[1:-1].strip()
            if section != "events":
                raise ConfigError(f"{source}:{lineno}: unknown section [{section}]")
            continue
        yield section, lineno, raw


def _key_values(text: str, source: str, allowed, allow_events=False):
    values: dict[str, Line] = {}
    events: list[Line] = []
    for section, lineno, raw in _lines(text, source):
        if section == "events":
            if not allow_events:
                raise ConfigError(f"{source}:{lineno}: [events] not allowed here")
            events.append(Line(lineno, "", raw))
            continue
        if "=" not in raw:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in raw.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = Line(lineno, key, value)
    return values, events


def evaluate(expr: str, kappa: Optional[float] = None) -> float:
    """Evaluate a ``*``-product of numbers, ``2pi``, ``pi`` and ``kappa``."""
    result = 1.0
    for factor in expr.replace(" ", "").split("*"):
        if factor == "2pi":
            result *= 2.0 * math.pi
        elif factor == "pi":
            result *= math.pi
        elif factor == "kappa":
            if kappa is None:
                raise ValueError("'kappa' is not available here")
            result *= kappa
        else:
            result *= float(factor)
    return result


def _number(line: Line, source: str, kappa=None) -> float:
    try:
        return evaluate(line.value, kappa)
    except ValueError as exc:
        raise ConfigError(f"{source}:{line.lineno}: bad value for {line.key!r}: {line.value!r} ({exc})") from None


def parse_params(text: str, source: str = "<params>") -> SystemParams:
    values, _ = _key_values(text, source, PARAM_KEYS)
    defaults = SystemParams()
    kw = {}
    kappa = _number(values["kappa"], source) if "kappa" in values else defaults.kappa
    kw["kappa"] = kappa
    plain = {"fsr": "fsr", "lambda": "wavelength", "mirror_T": "mirror_T", "u0": "u0",
             "n_atoms": "n_atoms", "gamma_fric": "gamma_fric"}
    for key, attr in plain.items():
        if key in values:
            kw[attr] = _number(values[key], source, kappa)
    if "mass_amu" in values:
        kw["mass"] = _number(values["mass_amu"], source, kappa) * AMU
    if "delta_c" in values:
        line = values["delta_c"]
        kw["delta_c"] = None if line.value == "locked" else _number(line, source, kappa)
    powers = {}
    for key in ("eta_plus", "eta_minus"):
        if key in values:
            m = _POWER.match(values[key].value)
            if m:
                powers[key] = (values[key], m.group(1))
            else:
                kw[key] = _number(values[key], source, kappa)
    try:
        p = SystemParams(**kw)
        for key, (line, watts) in powers.items():
            try:
                power = evaluate(watts)
            except ValueError:
                raise ConfigError(f"{source}:{line.lineno}: bad power in {line.value!r}") from None
            p = p.replace(**{key: pump_rate_for_cavity_power(power, p)})
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return p


@dataclass(frozen=True)
class Scenario:
    """A parsed scenario file: the run config plus comparison settings."""

    config: ScenarioConfig
    protocol: Optional[str] = None
    participation: float = 1.0
    tolerance: Optional[float] = None


def parse_scenario(text: str, source: str = "<scenario>", params: Optional[SystemParams] = None) -> Scenario:
    values, event_lines = _key_values(text, source, SCENARIO_KEYS, allow_events=True)
    kappa = params.kappa if params is not None else None
    kw = {}
    for key in ("temperature", "t_end", "dt", "window", "probe_seed_amplitude"):
        if key in values:
            kw[key] = _number(values[key], source, kappa)
    for key in ("seed", "sample_every", "n_particles", "chunk"):
        if key in values:
            line = values[key]
            try:
                kw[key] = int(line.value)
            except ValueError:
                raise ConfigError(f"{source}:{line.lineno}: {key!r} must be an integer, got {line.value!r}") from None
    if "initial_distribution" in values:
        kw["initial_distribution"] = values["initial_distribution"].value
    events = []
    for line in event_lines:
        parts = line.value.split()
        if len(parts) != 3:
            raise ConfigError(f"{source}:{line.lineno}: event needs 'time_s event_name value'")
        if parts[1] not in EVENT_NAMES:
            raise ConfigError(f"{source}:{line.lineno}: unknown event {parts[1]!r}")
        try:
            events.append(Event(evaluate(parts[0]), parts[1], evaluate(parts[2], kappa)))
        except ValueError as exc:
            raise ConfigError(f"{source}:{line.lineno}: bad event {line.value!r} ({exc})") from None
    kw["events"] = tuple(events)

    protocol = None
    if "protocol" in values:
        protocol = values["protocol"].value
        if protocol not in PROTOCOLS:
            raise ConfigError(f"{source}:{values['protocol'].lineno}: unknown protocol {protocol!r}")
    participation = _number(values["participation"], source) if "participation" in values else 1.0
    tolerance = _number(values["tolerance"], source) if "tolerance" in values else None
    try:
        cfg = ScenarioConfig(**kw)
        return Scenario(cfg, protocol, participation, tolerance)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    params_path: Path
    scenario_path: Path
    output: Path

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMETERS}, got {self.parameter!r}")
        if len(self.values) < 2:
            raise ConfigError("a sweep needs at least two values")


def parse_sweep(text: str, source: str = "<sweep>", base: Path = Path("."),
                kappa: Optional[float] = None) -> SweepSpec:
    """Parse a sweep file; ``params`` and ``scenario`` are relative to ``base``.

    ``output`` is taken as given (relative paths resolve against the working
    directory). ``kappa`` enables the ``kappa`` symbol in the values list.
    """
    values, _ = _key_values(text, source, SWEEP_KEYS)
    missing = [k for k in SWEEP_KEYS if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing keys {missing}")
    raw = values["values"]
    try:
        points = tuple(evaluate(v, kappa) for v in raw.value.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"{source}:{raw.lineno}: bad values list {raw.value!r} ({exc})") from None
    return SweepSpec(
        parameter=values["parameter"].value,
        values=points,
        params_path=base / values["params"].value,
        scenario_path=base / values["scenario"].value,
        output=Path(values["output"].value),
    )


def load_params(path) -> SystemParams:
    path = Path(path)
    return parse_params(path.read_text(), str(path))


def load_scenario(path, params: Optional[SystemParams] = None) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), str(path), params)


def load_sweep(path) -> SweepSpec:
    path = Path(path)
    text = path.read_text()
    values, _ = _key_values(text, str(path), SWEEP_KEYS)
    kappa = None
    if "params" in values:
        params_path = path.parent / values["params"].value
        if params_path.exists():
            kappa = load_params(params_path).kappa
    return parse_sweep(text, str(path), path.parent, kappa)


PRESET_DIR = Path(__file__).with_name("presets")


def preset(name: str) -> Path:
    """Path of a bundled config file, e.g. ``preset("switch_off_params.cfg")``."""
    path = PRESET_DIR / name
    if not path.exists():
        raise FileNotFoundError(f"no preset {name!r} in {PRESET_DIR}")
    return path

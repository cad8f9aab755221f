"""INI-style run configuration for the command line tools.

A configuration file is plain text with ``[section]`` headers and
``key = value`` lines; ``#`` and ``;`` start comments.  Every section and
every key is optional — anything omitted falls back to the packaged
defaults (the laboratory droop bank, its grid fixture, and the calibrated
boundary-map operating point).  Example::

    [droop]
    alpha = 6.67e-4
    beta  = 6.67e-4
    gamma = 750
    zeta  = 1500
    k     = 1

    [scenario]
    load  = 0:20000, 5:22800, 20:20000
    t_end = 40
    dt    = 1e-3

Recognised sections are ``[droop]``, ``[inertia]``, ``[grid]``,
``[scenario]``, ``[mpt]`` and ``[sweep]``.  The parser reports *all*
problems it finds, each tagged with the offending line number, rather
than stopping at the first one.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

from .droop import DroopBank
from .fixtures import (
    boundary_map_calibration,
    default_grid,
    default_inertia,
    default_scenario,
    default_sweep_spec,
    laboratory_bank,
)
from .mpt import DQ_POWER_FACTOR, MptCircuit, MptOperatingPoint, SweepSpec
from .sim import GridModel, InertiaParams, Scenario


class ConfigError(ValueError):
    """Invalid configuration text; ``problems`` lists every issue found."""

    def __init__(self, problems: Sequence[str]):
        self.problems = tuple(problems)
        super().__init__("\n".join(self.problems))


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved parameter set consumed by the CLI subcommands."""

    bank: DroopBank
    inertia: InertiaParams
    grid: GridModel
    scenario: Scenario
    mpt_circuit: MptCircuit
    mpt_op: MptOperatingPoint
    sweep: SweepSpec
    dq_power_factor: float = DQ_POWER_FACTOR


# Value kinds: how a raw string is converted and what range is accepted.
_POSITIVE = "positive"
_NONNEGATIVE = "nonnegative"
_FINITE = "finite"
_UNIT_INTERVAL = "unit_interval"
_OPEN_UNIT = "open_unit"
_POSITIVE_INT = "positive_int"
_LOAD = "load"

_DROOP_KEYS = {
    "alpha": _POSITIVE,
    "beta": _POSITIVE,
    "gamma": _POSITIVE,
    "zeta": _POSITIVE,
    "k": _POSITIVE,
    "v_ref": _POSITIVE,
}
_INERTIA_KEYS = {
    "j": _NONNEGATIVE,
    "d": _POSITIVE,
    "f_ref": _POSITIVE,
    "p_ref": _FINITE,
}
_GRID_KEYS = {
    "m_g": _POSITIVE,
    "d_g": _POSITIVE,
    "p_gen": _FINITE,
}
_SCENARIO_KEYS = {
    "load": _LOAD,
    "t_end": _POSITIVE,
    "dt": _POSITIVE,
    "soc0": _UNIT_INTERVAL,
    "e_rated": _POSITIVE,
}

_CIRCUIT_FIELDS = tuple(f.name for f in dataclasses.fields(MptCircuit))
_OP_FIELDS = tuple(f.name for f in dataclasses.fields(MptOperatingPoint))

_MPT_KEYS = {name: _POSITIVE for name in _CIRCUIT_FIELDS}
_MPT_KEYS.update({name: _NONNEGATIVE for name in ("k_ipr", "k_ip1", "k_ip2", "k_ip3")})
_MPT_KEYS.update(
    {
        name: _POSITIVE
        for name in ("d_vi", "d_grid", "v_gdr", "v_dcr", "v_dc", "v_p", "v_a", "v_s")
    }
)
_MPT_KEYS.update(
    {
        name: _FINITE
        for name in ("i_drref", "i_p", "i_a", "i_s", "i_pref", "i_aref", "i_sref")
    }
)
_MPT_KEYS.update({name: _OPEN_UNIT for name in ("duty_p", "duty_a", "duty_s")})

_SWEEP_KEYS = {
    "p_grid_min": _POSITIVE,
    "p_grid_max": _POSITIVE,
    "p_grid_points": _POSITIVE_INT,
    "c_dc2_min": _POSITIVE,
    "c_dc2_max": _POSITIVE,
    "c_dc2_points": _POSITIVE_INT,
    "dq_power_factor": _POSITIVE,
}

_SECTIONS = {
    "droop": _DROOP_KEYS,
    "inertia": _INERTIA_KEYS,
    "grid": _GRID_KEYS,
    "scenario": _SCENARIO_KEYS,
    "mpt": _MPT_KEYS,
    "sweep": _SWEEP_KEYS,
}

# Sentinel for lines that belong to an unrecognised section: the header has
# already been reported, so its keys are skipped without further noise.
_IGNORED = object()


def _strip_comment(line: str) -> str:
    for marker in ("#", ";"):
        pos = line.find(marker)
        if pos >= 0:
            line = line[:pos]
    return line.strip()


def _convert(kind, section: str, key: str, raw: str, lineno: int, problems: list):
    """Convert one raw value, appending to *problems* and returning None on failure."""
    where = f"line {lineno}: [{section}] {key}"
    if kind == _LOAD:
        return _parse_load(raw, where, problems)
    if kind == _POSITIVE_INT:
        try:
            number = int(raw, 10)
        except ValueError:
            problems.append(f"{where}: expected an integer, got {raw!r}")
            return None
        if number < 1:
            problems.append(f"{where}: must be a positive integer, got {number}")
            return None
        return number
    try:
        value = float(raw)
    except ValueError:
        problems.append(f"{where}: expected a number, got {raw!r}")
        return None
    if not math.isfinite(value):
        problems.append(f"{where}: must be finite, got {value}")
        return None
    if kind == _POSITIVE and value <= 0:
        problems.append(f"{where}: must be > 0, got {value}")
        return None
    if kind == _NONNEGATIVE and value < 0:
        problems.append(f"{where}: must be >= 0, got {value}")
        return None
    if kind == _UNIT_INTERVAL and not 0.0 <= value <= 1.0:
        problems.append(f"{where}: must lie in [0, 1], got {value}")
        return None
    if kind == _OPEN_UNIT and not 0.0 < value < 1.0:
        problems.append(f"{where}: must lie in (0, 1), got {value}")
        return None
    return value


def _parse_load(raw: str, where: str, problems: list):
    """Parse a load profile written as 'time:power' tokens.

    Tokens are separated by commas and/or whitespace, e.g.
    ``0:20000, 5:22800 20:20000``.
    """
    tokens = [tok for chunk in raw.split(",") for tok in chunk.split()]
    if not tokens:
        problems.append(f"{where}: no breakpoints given")
        return None
    profile = []
    bad = False
    for tok in tokens:
        if ":" not in tok:
            problems.append(f"{where}: expected a 'time:power' token, got {tok!r}")
            bad = True
            continue
        t_text, p_text = tok.split(":", 1)
        try:
            t, p = float(t_text), float(p_text)
        except ValueError:
            problems.append(f"{where}: expected numbers in 'time:power' token, got {tok!r}")
            bad = True
            continue
        if not (math.isfinite(t) and math.isfinite(p)):
            problems.append(f"{where}: breakpoint values must be finite, got {tok!r}")
            bad = True
            continue
        profile.append((t, p))
    if bad:
        return None
    if profile[0][0] != 0.0:
        problems.append(f"{where}: first breakpoint must be at time 0, got {profile[0][0]}")
        return None
    for (t_a, _), (t_b, _) in zip(profile, profile[1:]):
        if t_b <= t_a:
            problems.append(
                f"{where}: breakpoint times must be strictly increasing, got {t_a} then {t_b}"
            )
            return None
    return tuple(profile)


def _line_of(problem: str) -> float:
    """Sort key: the line number leading a problem message, if any."""
    if problem.startswith("line "):
        head = problem[5:].split(":", 1)[0]
        try:
            return int(head)
        except ValueError:
            pass
    return math.inf


def parse_config(text: str) -> RunConfig:
    """Parse configuration text into a RunConfig.

    Parameters
    ----------
    text : str
        Contents of a configuration file.

    Returns
    -------
    RunConfig
        Defaults overridden by whatever the text specifies.

    Raises
    ------
    ConfigError
        If the text has any problem; ``problems`` lists them all, each
        prefixed with its line number.
    """
    problems: list[str] = []
    section_lines: dict[str, int] = {}
    entries: dict[tuple, tuple] = {}  # (section, key) -> (lineno, value)
    section = None

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line)
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                problems.append(f"line {lineno}: malformed section header {line!r}")
                section = _IGNORED
                continue
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                known = ", ".join(sorted(_SECTIONS))
                problems.append(f"line {lineno}: unknown section [{name}]; expected one of {known}")
                section = _IGNORED
                continue
            if name in section_lines:
                problems.append(
                    f"line {lineno}: duplicate section [{name}];"
                    f" first defined on line {section_lines[name]}"
                )
            else:
                section_lines[name] = lineno
            section = name
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key_text, _, value_text = line.partition("=")
        key = key_text.strip().lower()
        value = value_text.strip()
        if section is _IGNORED:
            continue
        if section is None:
            problems.append(f"line {lineno}: key {key!r} appears outside any section")
            continue
        if key not in _SECTIONS[section]:
            problems.append(f"line {lineno}: [{section}] {key}: unknown key")
            continue
        if (section, key) in entries:
            first = entries[(section, key)][0]
            problems.append(
                f"line {lineno}: [{section}] {key}: duplicate key; first set on line {first}"
            )
            continue
        entries[(section, key)] = (lineno, value)

    # Convert raw strings, tracking which sections stay clean so that
    # cross-field checks below do not pile on spurious complaints.
    values: dict[tuple, object] = {}
    dirty = set()
    for (sec, key), (lineno, raw) in entries.items():
        converted = _convert(_SECTIONS[sec][key], sec, key, raw, lineno, problems)
        if converted is None:
            dirty.add(sec)
        else:
            values[(sec, key)] = converted

    def section_overrides(sec: str, rename=()) -> dict:
        renames = dict(rename)
        return {
            renames.get(key, key): value
            for (s, key), value in values.items()
            if s == sec
        }

    def build(sec: str, default, overrides: dict):
        if sec in dirty:
            return default
        try:
            return dataclasses.replace(default, **overrides)
        except ValueError as err:
            at = section_lines.get(sec)
            prefix = f"line {at}: " if at is not None else ""
            problems.append(f"{prefix}[{sec}]: {err}")
            return default

    bank = build("droop", laboratory_bank(), section_overrides("droop"))
    inertia = build("inertia", default_inertia(), section_overrides("inertia"))
    grid = build("grid", default_grid(), section_overrides("grid"))
    scenario = build(
        "scenario",
        default_scenario(),
        section_overrides("scenario", rename=(("load", "load_profile"),)),
    )

    mpt_overrides = section_overrides("mpt")
    circuit_default, op_default = boundary_map_calibration()
    circuit = build(
        "mpt", circuit_default,
        {k: v for k, v in mpt_overrides.items() if k in _CIRCUIT_FIELDS},
    )
    op = build(
        "mpt", op_default,
        {k: v for k, v in mpt_overrides.items() if k in _OP_FIELDS},
    )

    sweep_overrides = section_overrides(
        "sweep",
        rename=(("p_grid_points", "p_grid_n"), ("c_dc2_points", "c_dc2_n")),
    )
    dq_power_factor = sweep_overrides.pop("dq_power_factor", DQ_POWER_FACTOR)
    sweep = build("sweep", default_sweep_spec(), sweep_overrides)

    if problems:
        raise ConfigError(sorted(problems, key=_line_of))
    return RunConfig(
        bank=bank,
        inertia=inertia,
        grid=grid,
        scenario=scenario,
        mpt_circuit=circuit,
        mpt_op=op,
        sweep=sweep,
        dq_power_factor=dq_power_factor,
    )


def default_config() -> RunConfig:
    return parse_config("")


def load_config(path) -> RunConfig:
    """Read and parse the configuration file at *path*."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())

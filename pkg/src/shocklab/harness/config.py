"""Sectioned key-value run configuration.

The text format is INI as read by :mod:`configparser`.  Keys placed before
the first section header belong to the top level (only ``seed`` lives there).
Perturbation bumps are listed one per key in ``[perturbation]``::

    [perturbation]
    bump1 = v, gaussian, -20, 5, 0.05

with the fields ``target, shape, center, width, amplitude``.  Parsing never
stops at the first problem: every unknown key and every violated constraint
is collected and reported together.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields

from ..dynamics import Bump, PerturbationSpec
from ..errors import ConfigError, DomainError


TOP = "__top__"


@dataclass(frozen=True)
class ModelSection:
    alpha: float = 0.0


@dataclass(frozen=True)
class ShockSection:
    v_minus: float = 1.0
    u_minus: float = 0.0
    eps: float = 0.01
    family: str = "2"


@dataclass(frozen=True)
class WeightSection:
    lam: float = 0.1


@dataclass(frozen=True)
class NumericsSection:
    L: float = 2000.0
    N: int = 8001
    cfl: float = 0.4
    positivity_floor: float = 1e-6
    snapshot_cadence: float = 1.0
    well_balanced: bool = True


@dataclass(frozen=True)
class FunctionalsSection:
    delta3: float = 0.1
    delta0: float = 0.05


@dataclass(frozen=True)
class TimeSection:
    T: float = 10.0


@dataclass(frozen=True)
class SweepSection:
    nu_list: tuple = (1.0, 0.5, 0.25, 0.125)
    L: float = 200.0
    dx: float = 0.5


@dataclass(frozen=True)
class OutputSection:
    directory: str = "shocklab-out"
    formats: tuple = ("csv",)


@dataclass(frozen=True)
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    shock: ShockSection = field(default_factory=ShockSection)
    weight: WeightSection = field(default_factory=WeightSection)
    numerics: NumericsSection = field(default_factory=NumericsSection)
    functionals: FunctionalsSection = field(default_factory=FunctionalsSection)
    perturbation: PerturbationSpec = field(default_factory=PerturbationSpec)
    time: TimeSection = field(default_factory=TimeSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    output: OutputSection = field(default_factory=OutputSection)
    seed: int = 0


SECTIONS = {
    "model": ModelSection, "shock": ShockSection, "weight": WeightSection,
    "numerics": NumericsSection, "functionals": FunctionalsSection,
    "time": TimeSection, "sweep": SweepSection, "output": OutputSection,
}
# config keys that differ from the attribute name
KEY_ALIASES = {("weight", "lambda"): "lam"}
FORMATS = ("csv", "png")


def config_keys():
    """All ``(section, key)`` pairs accepted in a config file."""
    out = []
    for sec, cls in SECTIONS.items():
        rev = {v: k for (s, k), v in KEY_ALIASES.items() if s == sec}
        out += [(sec, rev.get(f.name, f.name)) for f in fields(cls)]
    out.append((TOP, "seed"))
    return out


# {{{ value parsing

def _as_float(s):
    return float(s)


def _as_int(s):
    f = float(s)
    if f != int(f):
        raise ValueError("not an integer")
    return int(f)


def _as_bool(s):
    t = s.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean")


def _as_floats(s):
    return tuple(float(x) for x in s.replace(";", ",").split(",") if x.strip())


def _as_words(s):
    return tuple(x.strip() for x in s.replace(";", ",").split(",") if x.strip())


def _converter(cls, name):
    default = next(f.default for f in fields(cls) if f.name == name)
    if isinstance(default, bool):
        return _as_bool
    if isinstance(default, int):
        return _as_int
    if isinstance(default, float):
        return _as_float
    if isinstance(default, tuple):
        return _as_floats if default and isinstance(default[0], float) else _as_words
    return lambda s: s.strip()


def parse_bump(text: str) -> Bump:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 5:
        raise ValueError("expected 'target, shape, center, width, amplitude'")
    target, shape = parts[0], parts[1]
    center, width, amp = (float(p) for p in parts[2:])
    return Bump(target, shape, center, width, amp)

# }}}


def _read(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    cp.read_string(f"[{TOP}]\n" + text)
    return cp


def parse_config(text: str = "", overrides: dict | None = None) -> RunConfig:
    """Validated :class:`RunConfig`, or :class:`ConfigError` listing every problem.

    ``overrides`` maps ``(section, key)`` to raw string values and takes
    precedence over the text (the top-level section is named ``"__top__"``).
    """
    problems: list[str] = []
    try:
        cp = _read(text)
    except configparser.Error as exc:
        raise ConfigError([f"malformed config: {exc}"]) from None
    raw: dict[tuple[str, str], str] = {}
    for sec in cp.sections():
        for key, val in cp.items(sec):
            raw[(sec, key)] = val
    for k, v in (overrides or {}).items():
        if v is not None:
            if k[0] == "perturbation" and not k[1].startswith("bump"):
                problems.append(f"unknown key '{k[0]}.{k[1]}'")
            raw[k] = str(v)

    values: dict[str, dict] = {sec: {} for sec in SECTIONS}
    seed = 0
    bumps = []
    for (sec, key), val in sorted(raw.items(), key=lambda kv: _key_order(kv[0])):
        label = key if sec == TOP else f"{sec}.{key}"
        if sec == TOP:
            if key != "seed":
                problems.append(f"unknown key '{label}'")
                continue
            try:
                seed = _as_int(val)
            except ValueError:
                problems.append(f"{label}: expected an integer, got {val!r}")
            continue
        if sec == "perturbation":
            if not key.startswith("bump"):
                problems.append(f"unknown key '{label}'")
                continue
            try:
                bumps.append(parse_bump(val))
            except (ValueError, DomainError) as exc:
                problems.append(f"{label}: {exc}")
            continue
        cls = SECTIONS.get(sec)
        if cls is None:
            problems.append(f"unknown section '{sec}' (key '{label}')")
            continue
        attr = KEY_ALIASES.get((sec, key), key)
        if attr not in {f.name for f in fields(cls)} or (sec, key) in _SHADOWED:
            problems.append(f"unknown key '{label}'")
            continue
        try:
            values[sec][attr] = _converter(cls, attr)(val)
        except ValueError:
            problems.append(f"{label}: cannot parse {val!r}")

    secs = {}
    for sec, cls in SECTIONS.items():
        try:
            secs[sec] = cls(**values[sec])
        except TypeError as exc:       # pragma: no cover - guarded above
            problems.append(f"{sec}: {exc}")
            secs[sec] = cls()
    cfg = RunConfig(perturbation=PerturbationSpec(tuple(bumps)), seed=seed, **secs)
    problems += validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


# the attribute name of an aliased key is not itself a valid key
_SHADOWED = {(s, v) for (s, _), v in KEY_ALIASES.items()}


def _key_order(k):
    sec, key = k
    if sec == "perturbation" and key.startswith("bump"):
        tail = key[4:]
        return (sec, 0, int(tail) if tail.isdigit() else math.inf, key)
    return (sec, 0, 0, key)


def validate(cfg: RunConfig) -> list[str]:
    """Cross-field constraints, re-checked at parse time."""
    out = []
    m, s, n = cfg.model, cfg.shock, cfg.numerics
    if not 0.0 <= m.alpha <= 1.0:
        out.append("model.alpha must lie in [0, 1]")
    if not s.v_minus > 0:
        out.append("shock.v_minus must be positive")
    if not s.eps > 0:
        out.append("shock.eps must be positive")
    elif s.v_minus > 0 and s.family.strip().lower() in ("2", "two") and s.eps >= 1.0 / s.v_minus:
        out.append("shock.eps: amplitude exceeds p(v_minus)")
    if s.family.strip().lower() not in ("1", "2", "one", "two"):
        out.append(f"shock.family must be 1 or 2, got {s.family!r}")
    if not 0.0 < cfg.weight.lam < 1.0:
        out.append("weight.lambda must lie in (0, 1)")
    if not n.L > 0:
        out.append("numerics.L must be positive")
    elif s.eps > 0 and s.eps * n.L < 20:
        out.append(f"numerics.L: eps*L = {s.eps * n.L:g} must be at least 20")
    if n.N < 16:
        out.append("numerics.N must be at least 16")
    if not 0.0 < n.cfl <= 1.0:
        out.append("numerics.cfl must lie in (0, 1]")
    if not n.positivity_floor > 0:
        out.append("numerics.positivity_floor must be positive")
    if not n.snapshot_cadence > 0:
        out.append("numerics.snapshot_cadence must be positive")
    if not cfg.functionals.delta3 > 0:
        out.append("functionals.delta3 must be positive")
    if not 0.0 < cfg.functionals.delta0 < 1.0:
        out.append("functionals.delta0 must lie in (0, 1)")
    if not cfg.time.T > 0:
        out.append("time.T must be positive")
    nus = cfg.sweep.nu_list
    if not nus or nus[0] != 1.0 or any(b >= a for a, b in zip(nus, nus[1:])) or min(nus) <= 0:
        out.append("sweep.nu_list must be positive, strictly decreasing and start at 1")
    if not (cfg.sweep.L > 0 and cfg.sweep.dx > 0):
        out.append("sweep.L and sweep.dx must be positive")
    bad = [f for f in cfg.output.formats if f not in FORMATS]
    if bad:
        out.append(f"output.formats: unknown format(s) {', '.join(bad)}")
    if n.L > 0:
        try:
            cfg.perturbation.check_support(n.L)
        except DomainError as exc:
            out.append(f"perturbation: {exc}")
    return out


def render_config(cfg: RunConfig) -> str:
    """Canonical text form; ``parse_config(render_config(c)) == c``."""
    lines = [f"seed = {cfg.seed}", ""]
    for sec, cls in SECTIONS.items():
        lines.append(f"[{sec}]")
        obj = getattr(cfg, sec)
        rev = {v: k for (s, k), v in KEY_ALIASES.items() if s == sec}
        for f in fields(cls):
            val = getattr(obj, f.name)
            if isinstance(val, tuple):
                txt = ", ".join(repr(x) if isinstance(x, float) else str(x) for x in val)
            elif isinstance(val, bool):
                txt = "true" if val else "false"
            elif isinstance(val, float):
                txt = repr(val)
            else:
                txt = str(val)
            lines.append(f"{rev.get(f.name, f.name)} = {txt}")
        lines.append("")
    lines.append("[perturbation]")
    for i, b in enumerate(cfg.perturbation.bumps, 1):
        lines.append(f"bump{i} = {b.target}, {b.shape}, {b.center!r}, {b.width!r}, {b.amplitude!r}")
    lines.append("")
    return "\n".join(lines)

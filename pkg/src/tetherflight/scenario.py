"""Scenario files: flat ``section.key = value`` text.

Every key is optional; anything missing is filled from the built-in nominal
defaults and the loaded :class:`Scenario` records where each value came from.
Unknown keys are rejected. Angles are radians, lengths metres.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .autopilot import ControllerConfig
from .disturbances import DisturbanceSchedule
from .errors import ParseError, ScenarioInvalid, ValidationError
from .ground import GroundStationParams
from .model import AttitudeModelParams
from .sim import SimConfig


@dataclass(frozen=True)
class ScenarioInfo:
    name: str = "nominal"
    takeoff_course: float = 0.0
    takeoff_course_noise: float = 0.0
    gs_origin: tuple = (0.0, 0.0, 0.0)

    def validate(self):
        if not self.name or any(c.isspace() for c in self.name):
            raise ValidationError("name", "must be a non-empty token without spaces")
        if not math.isfinite(self.takeoff_course):
            raise ValidationError("takeoff_course", "must be finite")
        if self.takeoff_course_noise < 0:
            raise ValidationError("takeoff_course_noise", "must be non-negative")
        if len(self.gs_origin) != 3:
            raise ValidationError("gs_origin", "must be a 3-vector")


SECTIONS = {
    "scenario": ScenarioInfo,
    "model": AttitudeModelParams,
    "ground": GroundStationParams,
    "controller": ControllerConfig,
    "sim": SimConfig,
    "disturbance": DisturbanceSchedule,
}


@dataclass(frozen=True)
class Scenario:
    info: ScenarioInfo = field(default_factory=ScenarioInfo)
    model: AttitudeModelParams = field(default_factory=AttitudeModelParams)
    ground: GroundStationParams = field(default_factory=GroundStationParams)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    disturbance: DisturbanceSchedule = field(default_factory=DisturbanceSchedule)
    provenance: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def name(self):
        return self.info.name

    def block(self, section):
        return self.info if section == "scenario" else getattr(self, section)

    def validate(self):
        for section in SECTIONS:
            try:
                self.block(section).validate()
            except ValidationError as exc:
                raise ValidationError(f"{section}.{exc.key}", str(exc).split(": ", 1)[-1]) from None
        if abs(self.controller.gravity - self.model.gravity) > 1e-12:
            raise ScenarioInvalid("controller.gravity and model.gravity differ")
        if self.controller.tether_max_length > self.ground.tether_max_length:
            raise ScenarioInvalid("controller.tether_max_length exceeds the real tether length")
        if self.ground.control_period != self.sim.control_period:
            raise ValidationError("ground.control_period", "must equal sim.control_period")
        return self

    def replace(self, **overrides):
        """Copy with flat-key overrides, e.g. ``replace(**{"sim.seed": 3})``."""
        blocks = {s: self.block(s) for s in SECTIONS}
        changes = {}
        for key, value in overrides.items():
            section, name = _split_key(key)
            changes.setdefault(section, {})[name] = value
        for section, kv in changes.items():
            blocks[section] = dataclasses.replace(blocks[section], **kv)
        prov = dict(self.provenance)
        prov.update({k: "override" for k in overrides})
        return Scenario(info=blocks["scenario"], model=blocks["model"], ground=blocks["ground"],
                        controller=blocks["controller"], sim=blocks["sim"],
                        disturbance=blocks["disturbance"], provenance=prov).validate()


def _split_key(key):
    if "." not in key:
        raise ValidationError(key, "keys look like section.name")
    section, name = key.split(".", 1)
    cls = SECTIONS.get(section)
    if cls is None or name not in {f.name for f in dataclasses.fields(cls)}:
        raise ValidationError(key, "unknown key")
    return section, name


def _field_defaults(cls):
    inst = cls()
    return {f.name: getattr(inst, f.name) for f in dataclasses.fields(cls)}


def _convert(key, text, default):
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            parts = [p for p in text.strip("()[]").split(",") if p.strip()]
            values = tuple(float(p) for p in parts)
            if len(values) != len(default):
                raise ValueError(f"expected {len(default)} comma-separated numbers")
            return values
        if isinstance(default, str):
            return text.strip('"').strip("'")
    except ValueError as exc:
        raise ValidationError(key, f"cannot parse {text!r}: {exc}") from None
    raise ValidationError(key, "unsupported type")


def parse_scenario(text):
    """Parse scenario text into a validated :class:`Scenario`."""
    values = {s: {} for s in SECTIONS}
    provenance = {}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(lineno, f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ParseError(lineno, "empty key or value")
        if key in seen:
            raise ParseError(lineno, f"duplicate key {key}")
        seen.add(key)
        section, name = _split_key(key)
        default = _field_defaults(SECTIONS[section])[name]
        values[section][name] = _convert(key, value, default)
        provenance[key] = "file"
    blocks = {}
    for section, cls in SECTIONS.items():
        for name in _field_defaults(cls):
            provenance.setdefault(f"{section}.{name}", "default")
        blocks[section] = cls(**values[section])
    return Scenario(info=blocks["scenario"], model=blocks["model"], ground=blocks["ground"],
                    controller=blocks["controller"], sim=blocks["sim"],
                    disturbance=blocks["disturbance"], provenance=provenance).validate()


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def serialize_scenario(scenario, only_changed=False):
    """Render a scenario as text that :func:`parse_scenario` reads back equal."""
    lines = []
    for section, cls in SECTIONS.items():
        defaults = _field_defaults(cls)
        block = scenario.block(section)
        chunk = []
        for name in defaults:
            value = getattr(block, name)
            if only_changed and value == defaults[name]:
                continue
            chunk.append(f"{section}.{name} = {_format(value)}")
        if chunk:
            lines.append(f"# {section}")
            lines.extend(chunk)
            lines.append("")
    return "\n".join(lines)


def nominal_scenario():
    return parse_scenario("")

"""Flat ``key = value`` scenario files.

Every model parameter must appear exactly once.  Initial conditions,
integration settings, ``disease_free`` and ``label`` are optional.  A ``#``
starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from importlib import resources

from .model import PARAM_NAMES, InvalidParamsError, ModelParams

INITIAL_KEYS = ("s0", "i0", "v0", "p0")
RUN_KEYS = ("t_end", "rtol", "atol", "output_stride")
ALL_KEYS = PARAM_NAMES + INITIAL_KEYS + RUN_KEYS + ("disease_free", "label")

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


class ConfigError(ValueError):
    def __init__(self, message: str, missing: tuple[str, ...] = ()):
        super().__init__(message)
        self.missing = missing


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    s0: float = 0.5
    i0: float = 0.5
    v0: float = 0.5
    p0: float = 0.5
    t_end: float = 500.0
    rtol: float = 1e-8
    atol: float = 1e-10
    output_stride: float = 1.0
    disease_free: bool = False
    label: str = ""

    @property
    def initial(self) -> tuple[float, ...]:
        if self.disease_free:
            return (self.s0, self.v0, self.p0)
        return (self.s0, self.i0, self.v0, self.p0)


def _number(key: str, text: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: malformed number for {key}: {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"line {lineno}: {key} must be finite")
    if value < 0:
        raise ConfigError(f"line {lineno}: {key} must be nonnegative, got {value}")
    return value


def parse_config(text: str) -> ScenarioConfig:
    raw: dict[str, float | bool | str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = key.strip(), value.strip()
        if key not in ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key == "label":
            raw[key] = value
        elif key == "disease_free":
            low = value.lower()
            if low not in _TRUE | _FALSE:
                raise ConfigError(f"line {lineno}: disease_free must be true or false, got {value!r}")
            raw[key] = low in _TRUE
        else:
            raw[key] = _number(key, value, lineno)

    missing = tuple(k for k in PARAM_NAMES if k not in raw)
    if missing:
        raise ConfigError(f"missing model parameter(s): {', '.join(missing)}", missing)
    try:
        params = ModelParams(**{k: raw.pop(k) for k in PARAM_NAMES})
    except InvalidParamsError as exc:
        raise ConfigError(str(exc)) from None

    if raw.get("disease_free") and raw.get("i0", 0.0) != 0.0:
        raise ConfigError("i0 must be 0 (or absent) for a disease-free scenario")
    if raw.get("disease_free") and "i0" not in raw:
        raw["i0"] = 0.0
    for key in ("rtol", "atol", "output_stride"):
        if key in raw and raw[key] == 0:
            raise ConfigError(f"{key} must be positive")
    return ScenarioConfig(params=params, **raw)


def format_config(cfg: ScenarioConfig) -> str:
    """Serialize so that ``parse_config(format_config(cfg)) == cfg``."""
    if "#" in cfg.label or "\n" in cfg.label or cfg.label != cfg.label.strip():
        raise ConfigError("label cannot contain '#', newlines or surrounding whitespace")
    lines = [f"{k} = {v!r}" for k, v in cfg.params.as_dict().items()]
    for f in fields(cfg):
        if f.name == "params":
            continue
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def fixture_text(name: str) -> str:
    """Contents of a shipped scenario (``eq31``, ``case_i`` or ``case_ii``)."""
    return resources.files("ecoepi").joinpath("fixtures", f"{name}.cfg").read_text(encoding="utf-8")


def load_fixture(name: str) -> ScenarioConfig:
    return parse_config(fixture_text(name))

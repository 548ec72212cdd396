"""Run configuration: a flat, versioned, human-editable key/value file.

Lines are ``key = value``; ``#`` starts a comment. Unknown keys are
errors so ablation typos cannot pass silently. Every field has a
default matching the base model; float fields also accept simple
fractions ("1/3"). The ``prompt = none`` ablation family defaults to
its own re-fitted decision threshold when ``theta`` is not set
explicitly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .decision import DeadTimeParams, DecisionParams, MomentumParams, PresaccadicParams
from .segfilter import FilterConfig, WeightConfig

CONFIG_VERSION = 1

GLOBAL_CUE_NAMES = ("appearance", "motion", "semantic")
PROMPT_MODES = ("semantic-oracle", "lowlevel", "file", "none")

# re-fitted decision threshold used by default when no prompt is available
NO_PROMPT_DEFAULT_THETA = 5.5


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything a reproducible simulation run depends on, minus the scene."""

    # decision stage
    theta: float = 4.0
    ddm_noise: float = 0.4
    u_min: float = 1.0 / 3.0
    f_min: float = 0.0
    sigma_s_dva: float = 7.0
    blur_sigma_dva: float = 1.0
    # extensions
    momentum_on: bool = False
    momentum_peak: float = 2.5
    momentum_floor: float = 0.85
    momentum_half_width_deg: float = 35.0
    presaccadic_on: bool = False
    presaccadic_trigger: float = 0.3
    deadtime_on: bool = False
    deadtime_ms: float = 50.0
    deadtime_theta: float = 3.5
    # segmentation filter
    n_particles: int = 50
    p_thresh: float = 0.5
    insert_fraction: float = 0.2
    epsilon_px: float = 1e-3
    id_discount: float = 0.7
    id_match_min: float = 0.05
    id_history_len: int = 10
    foveated_window_frac: float = 0.25
    alpha_appearance: float = 0.4
    alpha_motion: float = 0.05
    alpha_semantic: float = 1.0
    alpha_foveated: float = 0.6
    # cue preparation
    r_scale_other: float = 0.35
    r_scale_foveated: float = 1.0
    felz_k: float = 300.0
    felz_min_size: int = 20
    felz_k_motion: float = 8.0
    # ablation switches
    use_uncertainty: bool = True
    global_cues: tuple[str, ...] = GLOBAL_CUE_NAMES
    prompt: str = "semantic-oracle"
    gt_objects: bool = False
    # run bookkeeping
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    scenes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.prompt not in PROMPT_MODES:
            raise ConfigError(f"prompt must be one of {PROMPT_MODES}, got {self.prompt!r}")
        bad = [c for c in self.global_cues if c not in GLOBAL_CUE_NAMES]
        if bad:
            raise ConfigError(f"unknown global cues {bad}; valid: {GLOBAL_CUE_NAMES}")
        if not self.global_cues:
            raise ConfigError("at least one global cue is required")
        if not self.seeds:
            raise ConfigError("at least one seed is required")

    def decision_params(self) -> DecisionParams:
        return DecisionParams(
            threshold=self.theta,
            noise=self.ddm_noise,
            u_min=self.u_min,
            f_min=self.f_min,
            sigma_s_dva=self.sigma_s_dva,
            blur_sigma_dva=self.blur_sigma_dva,
            momentum=MomentumParams(
                enabled=self.momentum_on,
                peak=self.momentum_peak,
                floor=self.momentum_floor,
                half_width_deg=self.momentum_half_width_deg,
            ),
            presaccadic=PresaccadicParams(
                enabled=self.presaccadic_on,
                trigger_fraction=self.presaccadic_trigger,
            ),
            deadtime=DeadTimeParams(
                enabled=self.deadtime_on,
                duration_ms=self.deadtime_ms,
                threshold=self.deadtime_theta,
            ),
        )

    def filter_config(self) -> FilterConfig:
        return FilterConfig(
            n_particles=self.n_particles,
            p_thresh=self.p_thresh,
            insert_fraction=self.insert_fraction,
            epsilon_px=self.epsilon_px,
            id_discount=self.id_discount,
            id_match_min=self.id_match_min,
            id_history_len=self.id_history_len,
            foveated_window_frac=self.foveated_window_frac,
            weights=WeightConfig(
                alpha_appearance=self.alpha_appearance,
                alpha_motion=self.alpha_motion,
                alpha_semantic=self.alpha_semantic,
                alpha_foveated=self.alpha_foveated,
            ),
        )

    def to_text(self) -> str:
        """Canonical serialization: sorted keys, full effective values."""
        lines = [f"config_version = {CONFIG_VERSION}"]
        for name in sorted(f.name for f in fields(self)):
            lines.append(f"{name} = {_format_value(getattr(self, name))}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_float(raw: str, key: str) -> float:
    try:
        if "/" in raw:
            num, den = raw.split("/", 1)
            return float(num) / float(den)
        return float(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc


def _parse_str_tuple(raw: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in raw.split(",") if s.strip())


def _parse_int_tuple(raw: str, key: str) -> tuple[int, ...]:
    return tuple(_parse_int(s, key) for s in raw.split(",") if s.strip())


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse the key/value format into a RunConfig, rejecting unknown keys."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in stripped.split("=", 1))
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value

    version = raw.pop("config_version", None)
    if version is None:
        raise ConfigError(f"{source}: missing required key 'config_version'")
    if _parse_int(version, "config_version") != CONFIG_VERSION:
        raise ConfigError(
            f"{source}: unsupported config_version {version} (expected {CONFIG_VERSION})"
        )

    field_types = {f.name: f.type for f in fields(RunConfig)}
    values: dict[str, object] = {}
    for key, raw_value in raw.items():
        if key not in field_types:
            raise ConfigError(f"{source}: unknown key {key!r}")
        values[key] = _convert(key, raw_value)

    # the no-prompt ablation family was re-fitted; apply its threshold
    # default when theta is not pinned explicitly
    if values.get("prompt") == "none" and "theta" not in values:
        values["theta"] = NO_PROMPT_DEFAULT_THETA
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


_BOOL_KEYS = {
    "momentum_on",
    "presaccadic_on",
    "deadtime_on",
    "use_uncertainty",
    "gt_objects",
}
_INT_KEYS = {"n_particles", "id_history_len", "felz_min_size"}
_STR_KEYS = {"prompt"}
_STR_TUPLE_KEYS = {"global_cues", "scenes"}
_INT_TUPLE_KEYS = {"seeds"}


def _convert(key: str, raw: str):
    if key in _BOOL_KEYS:
        return _parse_bool(raw, key)
    if key in _INT_KEYS:
        return _parse_int(raw, key)
    if key in _STR_KEYS:
        return raw.strip()
    if key in _STR_TUPLE_KEYS:
        return _parse_str_tuple(raw)
    if key in _INT_TUPLE_KEYS:
        return _parse_int_tuple(raw, key)
    return _parse_float(raw, key)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Functional update helper used by the CLI and grid runner."""
    return replace(cfg, **overrides)

"""Scenario configuration: JSON loading, defaults, and strict validation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .bandit import ActionSpace
from .control import HopBudgets, SCHEMES, normalize_scheme, split_budget
from .traffic import TrafficConfig

DEFAULT_PRB_SPACE = tuple(range(10, 101, 10)) + (106,)
DEFAULT_GPU_SPACE = tuple(range(500, 1601, 100))
DEFAULT_BASE_DELAYS = (0.012, 0.009, 0.019)  # single-flow ul/edge/dl delays
DEFAULT_RATIOS = (5.0, 2.0, 3.0)
SUBINTERVAL = 0.2


class ConfigError(ValueError):
    """Configuration file failed validation."""


@dataclass(frozen=True)
class CalibrationConfig:
    """Physical constants of the pipeline; defaults reproduce single-flow
    delays of 12 ms uplink, 9 ms inference, and 19 ms downlink."""

    ul_full_rate: float = 22e6
    dl_full_rate: float = 44e6
    ul_fixed: float = 0.0055
    dl_fixed: float = 0.0179
    gpu_base: float = 0.009
    gpu_scaling_exponent: float = 1.0
    f_max: float = 1600.0
    prb_max: int = 106
    ul_frame_bits: float = 143333.0
    dl_frame_bits: float = 50000.0
    size_jitter: float = 0.0

    def __post_init__(self) -> None:
        if self.ul_frame_bits <= 0.0 or self.dl_frame_bits <= 0.0:
            raise ConfigError("calibration: frame sizes must be positive")
        if self.gpu_scaling_exponent <= 0.0:
            raise ConfigError("calibration: gpu_scaling_exponent must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    seed: int = 0
    traffic: TrafficConfig = field(default_factory=lambda: TrafficConfig(
        n_users=2, mean_on=300.0, mean_off=240.0, min_on=120.0, min_off=120.0))
    ul_space: ActionSpace = field(default_factory=lambda: ActionSpace(DEFAULT_PRB_SPACE))
    dl_space: ActionSpace = field(default_factory=lambda: ActionSpace(DEFAULT_PRB_SPACE))
    gpu_space: ActionSpace = field(default_factory=lambda: ActionSpace(DEFAULT_GPU_SPACE))
    q_c: float = 0.150
    budgets: HopBudgets = field(default_factory=lambda: split_budget(
        0.150, DEFAULT_BASE_DELAYS, DEFAULT_RATIOS))
    slot_len: float = 5.0
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    schemes: tuple[str, ...] = SCHEMES
    notes: str = ""

    def __post_init__(self) -> None:
        if self.q_c <= 0.0:
            raise ConfigError("q_c must be positive")
        if self.slot_len <= self.q_c:
            raise ConfigError("slot_len must exceed q_c")
        n_sub = self.slot_len / SUBINTERVAL
        if abs(n_sub - round(n_sub)) > 1e-9 or round(n_sub) < 1:
            raise ConfigError(f"slot_len must be a positive multiple of {SUBINTERVAL} s")
        if abs(self.budgets.total() - self.q_c) > 1e-9:
            raise ConfigError(
                f"budgets sum to {self.budgets.total():.6f}, expected q_c={self.q_c:.6f}")
        if not self.schemes:
            raise ConfigError("schemes must not be empty")
        for prb_space, label in ((self.ul_space, "ul_space"), (self.dl_space, "dl_space")):
            if prb_space.a_max > self.calibration.prb_max:
                raise ConfigError(f"{label} exceeds prb_max={self.calibration.prb_max}")
        if self.gpu_space.a_max > self.calibration.f_max:
            raise ConfigError(f"gpu_space exceeds f_max={self.calibration.f_max}")


def _require_keys(data: dict, allowed: set[str], where: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")


def _number(data: dict, key: str, default, where: str, integer: bool = False):
    value = data.get(key, default)
    if integer:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{where}.{key}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    return float(value)


def _traffic_from_dict(data: dict, seed: int) -> TrafficConfig:
    _require_keys(data, {"n_users", "mean_on", "mean_off", "min_on", "min_off",
                         "fps", "duration", "seed", "min_mode"}, "traffic")
    try:
        return TrafficConfig(
            n_users=_number(data, "n_users", 2, "traffic", integer=True),
            mean_on=_number(data, "mean_on", 300.0, "traffic"),
            mean_off=_number(data, "mean_off", 240.0, "traffic"),
            min_on=_number(data, "min_on", 0.0, "traffic"),
            min_off=_number(data, "min_off", 0.0, "traffic"),
            fps=_number(data, "fps", 30.0, "traffic"),
            duration=_number(data, "duration", 3600.0, "traffic"),
            seed=_number(data, "seed", seed, "traffic", integer=True) if "seed" in data else seed,
            min_mode=data.get("min_mode", "truncate"),
        )
    except ValueError as exc:
        raise ConfigError(f"traffic: {exc}") from exc


def _space_from_list(values, label: str) -> ActionSpace:
    if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise ConfigError(f"{label}: expected a list of numbers")
    try:
        return ActionSpace(values)
    except ValueError as exc:
        raise ConfigError(f"{label}: {exc}") from exc


def _calibration_from_dict(data: dict) -> CalibrationConfig:
    allowed = {"ul_full_rate", "dl_full_rate", "ul_fixed", "dl_fixed", "gpu_base",
               "gpu_scaling_exponent", "f_max", "prb_max", "ul_frame_bits",
               "dl_frame_bits", "size_jitter"}
    _require_keys(data, allowed, "calibration")
    kwargs = {}
    for key in allowed:
        if key in data:
            kwargs[key] = _number(data, key, None, "calibration", integer=(key == "prb_max"))
    try:
        return CalibrationConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"calibration: {exc}") from exc


def config_from_dict(data: dict, name: str = "scenario") -> ScenarioConfig:
    _require_keys(data, {"name", "seed", "traffic", "ul_space", "dl_space", "gpu_space",
                         "q_c", "budgets", "slot_len", "calibration", "schemes", "notes"},
                  "config")
    seed = _number(data, "seed", 0, "config", integer=True)
    q_c = _number(data, "q_c", 0.150, "config")
    traffic = _traffic_from_dict(data.get("traffic", {}), seed)
    calibration = _calibration_from_dict(data.get("calibration", {}))

    budgets_data = data.get("budgets", "auto")
    if budgets_data == "auto":
        try:
            budgets = split_budget(q_c, DEFAULT_BASE_DELAYS, DEFAULT_RATIOS)
        except ValueError as exc:
            raise ConfigError(f"budgets: {exc}") from exc
    elif isinstance(budgets_data, dict):
        _require_keys(budgets_data, {"ul", "edge", "dl"}, "budgets")
        try:
            budgets = HopBudgets(
                _number(budgets_data, "ul", None, "budgets"),
                _number(budgets_data, "edge", None, "budgets"),
                _number(budgets_data, "dl", None, "budgets"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"budgets: {exc}") from exc
    else:
        raise ConfigError('budgets: expected "auto" or an {ul, edge, dl} object')

    schemes_data = data.get("schemes", list(SCHEMES))
    if not isinstance(schemes_data, list) or not schemes_data:
        raise ConfigError("schemes: expected a non-empty list of scheme names")
    try:
        schemes = tuple(normalize_scheme(s) for s in schemes_data)
    except (AttributeError, ValueError) as exc:
        raise ConfigError(f"schemes: {exc}") from exc

    default_prb = list(DEFAULT_PRB_SPACE)
    try:
        return ScenarioConfig(
            name=str(data.get("name", name)),
            seed=seed,
            traffic=traffic,
            ul_space=_space_from_list(data.get("ul_space", default_prb), "ul_space"),
            dl_space=_space_from_list(data.get("dl_space", default_prb), "dl_space"),
            gpu_space=_space_from_list(data.get("gpu_space", list(DEFAULT_GPU_SPACE)), "gpu_space"),
            q_c=q_c,
            budgets=budgets,
            slot_len=_number(data, "slot_len", 5.0, "config"),
            calibration=calibration,
            schemes=schemes,
            notes=str(data.get("notes", "")),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario file; raises ConfigError with the offending field."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(data, name=path.stem)


def bundled_scenario_path(name: str) -> Path:
    """Path to a scenario file shipped with the package, e.g. "scenario1"."""
    candidate = resources.files("mecadapt").joinpath(f"scenarios/{name}.json")
    if not candidate.is_file():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return Path(str(candidate))

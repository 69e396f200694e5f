"""Configuration module: simulation constants, scenario controls and the YAML config file."""
import math
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from os import getenv
from pathlib import Path
from typing import Any, Optional, Union

import yaml
from dotenv import load_dotenv

APP_VERSION = "0.3.0"

BOLTZMANN = 1.380649e-23  # J/K

# sar_dl is not published alongside the other constants; this value is a placeholder
DEFAULT_SAR_DL = 0.005


class EmfNetError(Exception):
    """Base exception for planning and simulation errors"""
    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class ConfigError(EmfNetError):
    """Invalid configuration value; `key` names the offending entry."""
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class Architecture(str, Enum):
    BS_ONLY = "bs-only"
    FIXED_SC = "fixed-sc"
    GREEN_TUAV = "green-tuav"
    REGULAR_TUAV = "regular-tuav"
    SPECIAL_TUAV = "special-tuav"

    @property
    def has_tuavs(self) -> bool:
        return self in (Architecture.GREEN_TUAV, Architecture.REGULAR_TUAV, Architecture.SPECIAL_TUAV)


class Objective(str, Enum):
    MIN_EXPOSURE = "emf"
    MAX_RATE = "rate"


def to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def dbm_to_watt(p_dbm: float) -> float:
    return to_linear(p_dbm) / 1000.0


def watt_to_dbm(p_w: float) -> float:
    return to_db(p_w * 1000.0)


def _require_positive(section: str, obj: Any, names: tuple[str, ...]) -> None:
    for name in names:
        value = getattr(obj, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ConfigError(f"{section}.{name}", f"must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class SimParams:
    """Physical constants of the network and solver tolerances.

    Lengths are in metres, frequencies in Hz, powers in watts and angles in
    radians.
    """

    area_x: float = 1000.0
    area_y: float = 1000.0
    fc: float = 3.5e9
    c: float = 3e8
    bandwidth_B: float = 10e6
    a_env: float = 9.61
    b_env: float = 0.16
    eta_los_db: float = 1.6
    eta_nlos_db: float = 23.0
    alpha_los: float = 2.0
    alpha_nlos: float = 2.0
    p_max: float = 0.398
    t_max: float = 100.0
    theta_min: float = math.radians(31.0)
    h_bs: float = 25.0
    h_gs: float = 30.0
    w_tuav_max: int = 6
    w_bs_max: Optional[int] = None
    sar_voice: float = 0.0047
    sar_data: float = 0.0037
    sar_dl: float = DEFAULT_SAR_DL
    noise_temp: float = 290.0
    tol_delta: float = 1.0
    i_max: int = 50
    sr_candidates_2d: int = 8
    sr_radius_init: float = 250.0
    sr_radius_min: float = 2.0
    sr_candidates_3d: int = 14
    sr3d_radius_init: Optional[float] = None
    sr3d_radius_min: float = 0.5
    h_min: float = 1.0
    enum_budget: float = 1e7
    gs_polish: bool = True

    def __post_init__(self):
        _require_positive("sim", self, (
            "area_x", "area_y", "fc", "c", "bandwidth_B", "a_env", "b_env",
            "alpha_los", "alpha_nlos", "p_max", "t_max", "h_bs", "h_gs",
            "sar_voice", "sar_data", "sar_dl", "noise_temp", "tol_delta",
            "sr_radius_init", "sr_radius_min", "sr3d_radius_min", "h_min", "enum_budget",
        ))
        for name in ("eta_los_db", "eta_nlos_db"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ConfigError(f"sim.{name}", f"must be finite, got {value!r}")
        if not 0.0 < self.theta_min < math.pi / 2:
            raise ConfigError("sim.theta_min", f"must lie in (0, pi/2) radians, got {self.theta_min!r}")
        if not isinstance(self.w_tuav_max, int) or self.w_tuav_max < 1:
            raise ConfigError("sim.w_tuav_max", f"must be an integer >= 1, got {self.w_tuav_max!r}")
        if self.w_bs_max is not None and (not isinstance(self.w_bs_max, int) or self.w_bs_max < 0):
            raise ConfigError("sim.w_bs_max", f"must be null or an integer >= 0, got {self.w_bs_max!r}")
        if self.sr3d_radius_init is not None:
            _require_positive("sim", self, ("sr3d_radius_init",))
        if not isinstance(self.gs_polish, bool):
            raise ConfigError("sim.gs_polish", f"must be true or false, got {self.gs_polish!r}")
        for name in ("i_max", "sr_candidates_2d", "sr_candidates_3d"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"sim.{name}", f"must be an integer >= 1, got {value!r}")

    @property
    def sar_dl_is_placeholder(self) -> bool:
        return self.sar_dl == DEFAULT_SAR_DL

    @property
    def eta_los(self) -> float:
        return to_linear(self.eta_los_db)

    @property
    def eta_nlos(self) -> float:
        return to_linear(self.eta_nlos_db)

    @property
    def hover_altitude(self) -> float:
        """Altitude of a tUAV parked at the centre of its hovering area (theta = pi/2, T = t_max/2)."""
        return self.h_gs + self.t_max / 2.0

    @property
    def sr3d_radius_start(self) -> float:
        """First 3D shrink-and-realign radius; t_max/2 unless sr3d_radius_init is set."""
        return self.t_max / 2.0 if self.sr3d_radius_init is None else self.sr3d_radius_init


def noise_power(params: SimParams) -> float:
    """Thermal noise power k_B * T * B of one resource block, in watts."""
    return BOLTZMANN * params.noise_temp * params.bandwidth_B


@dataclass(frozen=True)
class ScenarioConfig:
    """Controls for random scenario generation."""

    n_residents: int = 120
    active_count: Optional[int] = None
    active_fraction: float = 0.25
    voice_fraction: float = 0.2
    rate_ul_voice: float = 5e6
    rate_ul_data: float = 50e6
    rate_dl_voice: float = 5e6
    rate_dl_data: float = 100e6
    n_tuavs: int = 4
    n_gs: int = 25
    architecture: Architecture = Architecture.GREEN_TUAV
    fixed_counts: bool = False
    cluster_count_mean: float = 4.0
    cluster_radius: float = 100.0
    ppp_share: float = 1.0 / 3.0
    cluster_share: float = 1.0 / 6.0

    def __post_init__(self):
        if isinstance(self.architecture, str) and not isinstance(self.architecture, Architecture):
            try:
                object.__setattr__(self, "architecture", Architecture(self.architecture))
            except ValueError:
                raise ConfigError("scenario.architecture", f"unknown architecture {self.architecture!r}")
        for name in ("n_residents", "n_tuavs", "n_gs"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ConfigError(f"scenario.{name}", f"must be an integer >= 0, got {value!r}")
        if self.active_count is not None and (not isinstance(self.active_count, int) or self.active_count < 0):
            raise ConfigError("scenario.active_count", f"must be null or an integer >= 0, got {self.active_count!r}")
        for name in ("active_fraction", "voice_fraction"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
                raise ConfigError(f"scenario.{name}", f"must lie in [0, 1], got {value!r}")
        for name in ("rate_ul_voice", "rate_ul_data", "rate_dl_voice", "rate_dl_data", "cluster_count_mean"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
                raise ConfigError(f"scenario.{name}", f"must be finite and >= 0, got {value!r}")
        _require_positive("scenario", self, ("cluster_radius",))
        for name in ("ppp_share", "cluster_share"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value >= 0):
                raise ConfigError(f"scenario.{name}", f"must be >= 0, got {value!r}")
        if self.architecture.has_tuavs and self.n_tuavs > self.n_gs:
            raise ConfigError("scenario.n_tuavs", f"{self.n_tuavs} tUAVs need as many ground stations, only {self.n_gs} configured")


ASSOCIATION_STRATEGIES = ("greedy", "random", "brute-force")
DEPLOYMENT_STRATEGIES = ("kmeans", "sr2d", "random", "brute-force")
POSITIONING_STRATEGIES = ("sr3d", "golden", "none", "grid")


@dataclass(frozen=True)
class StrategyConfig:
    """Algorithm selectors for the three planning stages."""

    association: str = "greedy"
    deployment: str = "kmeans"
    positioning: str = "sr3d"
    grid_resolution: float = 5.0
    alternate_rounds: int = 1
    objective: Objective = Objective.MIN_EXPOSURE
    sar_limit: float = 0.08

    def __post_init__(self):
        if isinstance(self.objective, str) and not isinstance(self.objective, Objective):
            try:
                object.__setattr__(self, "objective", Objective(self.objective))
            except ValueError:
                raise ConfigError("strategy.objective", f"must be 'emf' or 'rate', got {self.objective!r}")
        for name, allowed in (
            ("association", ASSOCIATION_STRATEGIES),
            ("deployment", DEPLOYMENT_STRATEGIES),
            ("positioning", POSITIONING_STRATEGIES),
        ):
            if getattr(self, name) not in allowed:
                raise ConfigError(f"strategy.{name}", f"must be one of {', '.join(allowed)}, got {getattr(self, name)!r}")
        if not isinstance(self.alternate_rounds, int) or self.alternate_rounds < 1:
            raise ConfigError("strategy.alternate_rounds", f"must be an integer >= 1, got {self.alternate_rounds!r}")
        _require_positive("strategy", self, ("grid_resolution", "sar_limit"))


_SECTIONS = {"sim": SimParams, "scenario": ScenarioConfig, "strategy": StrategyConfig}


def _coerce(section: str, cls: type, raw: Any) -> Any:
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(section, "must be a mapping")
    known = {f.name: f for f in fields(cls)}
    values = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"{section}.{key}", "unknown key")
        default = known[key].default
        # widen YAML ints where the field is a float
        if isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        values[key] = value
    try:
        return cls(**values)
    except TypeError as e:
        raise ConfigError(section, str(e))


@dataclass(frozen=True)
class AppConfig:
    """Configuration for a planning run: simulation constants, scenario controls and strategy."""

    sim: SimParams = field(default_factory=SimParams)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)

    @classmethod
    def from_dict(cls, raw: Optional[dict]) -> "AppConfig":
        raw = raw or {}
        if not isinstance(raw, dict):
            raise ConfigError("<root>", "config file must contain a mapping")
        for key in raw:
            if key not in _SECTIONS:
                raise ConfigError(key, "unknown section")
        return cls(**{name: _coerce(name, section_cls, raw.get(name)) for name, section_cls in _SECTIONS.items()})

    @classmethod
    def load(cls, path: Union[str, Path, None] = None) -> "AppConfig":
        """Load configuration from a YAML file.

        Args:
            path: Config file. When omitted, EMFNET_CONFIG is consulted; without
                either the defaults are returned.

        Returns:
            AppConfig: Validated configuration.

        Raises:
            ConfigError: If the file is unreadable or a key is unknown or invalid.
        """
        load_dotenv()

        if path is None:
            path = getenv("EMFNET_CONFIG")
        if not path:
            return cls()

        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = yaml.safe_load(f)
        except OSError as e:
            raise ConfigError(str(path), f"cannot read config file: {e}")
        except yaml.YAMLError as e:
            raise ConfigError(str(path), f"invalid YAML: {e}")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        out = {}
        for name in _SECTIONS:
            section = asdict(getattr(self, name))
            out[name] = {k: (v.value if isinstance(v, Enum) else v) for k, v in section.items()}
        return out

    def dump(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=False)

    def with_overrides(self, **sections: dict) -> "AppConfig":
        """Return a copy with per-section field overrides, e.g. scenario={"n_gs": 36}."""
        updated = {}
        for name, overrides in sections.items():
            if name not in _SECTIONS:
                raise ConfigError(name, "unknown section")
            if overrides:
                updated[name] = replace(getattr(self, name), **overrides)
        return replace(self, **updated)


def worker_count() -> int:
    """Number of Monte Carlo worker processes, capped by EMFNET_THREADS."""
    load_dotenv()

    raw = getenv("EMFNET_THREADS")
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError("EMFNET_THREADS", f"must be an integer, got {raw!r}")
    if value < 1:
        raise ConfigError("EMFNET_THREADS", f"must be >= 1, got {value}")
    return value

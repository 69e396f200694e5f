"""Domain records shared by every planning stage: users, gNBs, scenarios and reports."""
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np

from config import Architecture, EmfNetError, SimParams


class ScenarioError(EmfNetError):
    """Scenario violates a structural invariant"""


class Usage(str, Enum):
    VOICE = "voice"
    DATA = "data"


class GnbKind(str, Enum):
    BASE_STATION = "bs"
    TUAV = "tuav"
    SMALL_CELL = "sc"


def sar_for_usage(usage: Usage, params: SimParams) -> float:
    return params.sar_voice if usage is Usage.VOICE else params.sar_data


@dataclass(frozen=True)
class User:
    """A resident; `active` residents are the users that transmit."""

    id: int
    position: tuple[float, float, float]
    usage: Usage
    active: bool
    rate_req_ul: float
    rate_req_dl: float
    sar_ul: float

    def __post_init__(self):
        if self.rate_req_ul < 0 or self.rate_req_dl < 0:
            raise ScenarioError(f"user {self.id}: rate requirements must be >= 0")


@dataclass(frozen=True)
class Gnb:
    """A serving node. Id 0 is always the macro base station."""

    id: int
    kind: GnbKind
    position: tuple[float, float, float]
    capacity: int

    def __post_init__(self):
        if self.capacity < 0:
            raise ScenarioError(f"gNB {self.id}: capacity must be >= 0")


@dataclass(frozen=True, eq=False)
class UserArrays:
    """Column view of a set of active users, the form every numeric routine consumes."""

    ids: np.ndarray
    positions: np.ndarray
    sar_ul: np.ndarray
    rate_ul: np.ndarray
    rate_dl: np.ndarray

    @classmethod
    def from_users(cls, users: Sequence[User]) -> "UserArrays":
        return cls(
            ids=np.array([u.id for u in users], dtype=int),
            positions=np.array([u.position for u in users], dtype=float).reshape(-1, 3),
            sar_ul=np.array([u.sar_ul for u in users], dtype=float),
            rate_ul=np.array([u.rate_req_ul for u in users], dtype=float),
            rate_dl=np.array([u.rate_req_dl for u in users], dtype=float),
        )

    def __len__(self) -> int:
        return len(self.ids)

    def subset(self, index) -> "UserArrays":
        return UserArrays(
            ids=self.ids[index],
            positions=self.positions[index].reshape(-1, 3),
            sar_ul=self.sar_ul[index],
            rate_ul=self.rate_ul[index],
            rate_dl=self.rate_dl[index],
        )


@dataclass(frozen=True, eq=False)
class Scenario:
    """A static snapshot: residents, gNBs, ground stations and the architecture under test."""

    params: SimParams
    residents: tuple[User, ...]
    gnbs: tuple[Gnb, ...]
    ground_stations: np.ndarray
    architecture: Architecture
    seed: int

    def __post_init__(self):
        stations = [g for g in self.gnbs if g.kind is GnbKind.BASE_STATION]
        if len(stations) != 1 or self.gnbs[0].kind is not GnbKind.BASE_STATION or self.gnbs[0].id != 0:
            raise ScenarioError("exactly one base station is required and it must be gNB 0")
        if self.architecture.has_tuavs and self.n_tuavs > len(self.ground_stations):
            raise ScenarioError(
                f"{self.n_tuavs} tUAVs but only {len(self.ground_stations)} ground stations"
            )
        for user in self.residents:
            if user.sar_ul != sar_for_usage(user.usage, self.params):
                raise ScenarioError(f"user {user.id}: SAR reference does not match {user.usage.value} usage")

    @cached_property
    def active_indices(self) -> np.ndarray:
        return np.array([i for i, u in enumerate(self.residents) if u.active], dtype=int)

    @cached_property
    def active(self) -> UserArrays:
        return UserArrays.from_users([u for u in self.residents if u.active])

    @cached_property
    def resident_positions(self) -> np.ndarray:
        return np.array([u.position for u in self.residents], dtype=float).reshape(-1, 3)

    @property
    def bs_position(self) -> np.ndarray:
        return np.asarray(self.gnbs[0].position, dtype=float)

    @property
    def n_tuavs(self) -> int:
        return sum(1 for g in self.gnbs if g.kind is GnbKind.TUAV)

    @cached_property
    def gnb_positions(self) -> np.ndarray:
        return np.array([g.position for g in self.gnbs], dtype=float)

    @cached_property
    def capacities(self) -> np.ndarray:
        return np.array([g.capacity for g in self.gnbs], dtype=int)


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    """Per-user power and rate plus the population exposure of a planned network.

    per_user_* arrays follow the order of Scenario.active.
    """

    ei_ul: float
    ei_dl: float
    per_user_power: np.ndarray
    per_user_rate: np.ndarray
    per_user_exposure: np.ndarray
    satisfied_ratio: float
    sum_rate_ul: float

    @property
    def ei_total(self) -> float:
        return self.ei_ul + self.ei_dl

    @property
    def mean_rate_ul(self) -> float:
        if len(self.per_user_rate) == 0:
            return 0.0
        return self.sum_rate_ul / len(self.per_user_rate)

    @property
    def max_user_exposure(self) -> float:
        if len(self.per_user_exposure) == 0:
            return 0.0
        return float(np.max(self.per_user_exposure))

    def metrics(self) -> dict[str, float]:
        return {
            "ei_ul": self.ei_ul,
            "ei_dl": self.ei_dl,
            "ei_total": self.ei_total,
            "satisfied_ratio": self.satisfied_ratio,
            "sum_rate_ul": self.sum_rate_ul,
            "mean_rate_ul": self.mean_rate_ul,
            "max_user_exposure": self.max_user_exposure,
            "n_active": float(len(self.per_user_rate)),
        }


METRICS = ("ei_ul", "ei_dl", "ei_total", "satisfied_ratio", "sum_rate_ul", "mean_rate_ul", "max_user_exposure", "n_active")


def even_grid(count: int, area_x: float, area_y: float) -> np.ndarray:
    """Cell centres of a near-square grid covering the area, row-major, first `count` cells.

    A perfect square count gives the sqrt(count) x sqrt(count) grid; other counts
    use ceil(sqrt(count)) columns and drop the trailing cells of the last row.
    """
    if count <= 0:
        return np.zeros((0, 2))
    cols = math.ceil(math.sqrt(count))
    rows = math.ceil(count / cols)
    xs = (np.arange(cols) + 0.5) * area_x / cols
    ys = (np.arange(rows) + 0.5) * area_y / rows
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])[:count]

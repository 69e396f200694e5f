"""Exposure index and transmit-power allocation.

UL exposure is the SAR-weighted sum of the users' transmit powers. DL exposure
sums, over every resident (users and non-users) and every gNB, the received
power density weighted by the DL SAR reference. Received density is obtained
from the received power through the isotropic effective aperture
A_eff = c^2 / (4 pi fc^2), so W/m^2 and the path-loss model stay consistent
without introducing antenna gains:

  - a user's own serving link contributes that link's DL power;
  - every other (resident, gNB) pair sees the gNB's total DL power.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from channel import path_loss_matrix, required_power
from config import EmfNetError, SimParams, noise_power
from models import User, UserArrays

if TYPE_CHECKING:
    from association import Association
    from models import Scenario

# absolute slack when comparing achieved and required rates, in bps
RATE_EPSILON = 1.0


class PowerMode(str, Enum):
    PRIMAL_RATE_TARGET = "primal"
    DUAL_SAR_CAP = "dual"


@dataclass(frozen=True)
class PowerPolicy:
    mode: PowerMode = PowerMode.PRIMAL_RATE_TARGET
    sar_limit: float = 0.08

    def __post_init__(self):
        if self.mode is PowerMode.DUAL_SAR_CAP and not self.sar_limit > 0:
            raise EmfNetError(f"dual power policy needs a positive SAR limit, got {self.sar_limit}")

    @classmethod
    def primal(cls) -> "PowerPolicy":
        return cls(PowerMode.PRIMAL_RATE_TARGET)

    @classmethod
    def dual(cls, sar_limit: float) -> "PowerPolicy":
        return cls(PowerMode.DUAL_SAR_CAP, sar_limit)


def allocate_powers(sar_ul, rate_req_ul, L, policy: PowerPolicy, params: SimParams) -> np.ndarray:
    """Vectorised power rule. For a (K, J) loss matrix pass the per-user arrays as (K, 1) columns.

    Primal: the power meeting the rate target, clipped at p_max.
    Dual: the largest power keeping sar * P <= sar_limit, clipped at p_max.
    """
    sar_ul = np.asarray(sar_ul, dtype=float)
    L = np.asarray(L, dtype=float)
    if policy.mode is PowerMode.PRIMAL_RATE_TARGET:
        needed = required_power(rate_req_ul, L, params)
        return np.minimum(params.p_max, needed)

    cap = policy.sar_limit / sar_ul
    cap = np.where(sar_ul * cap > policy.sar_limit, np.nextafter(cap, 0.0), cap)
    return np.broadcast_to(np.minimum(params.p_max, cap), np.broadcast_shapes(cap.shape, L.shape)).copy()


def allocate_power(user: User, L: float, policy: PowerPolicy, params: SimParams) -> float:
    """Transmit power of one user over a link with loss L, in watts."""
    return float(allocate_powers(user.sar_ul, user.rate_req_ul, L, policy, params))


def dl_link_power(rate_req_dl, L, params: SimParams):
    """gNB transmit power needed to serve a DL rate over loss L."""
    return noise_power(params) * np.asarray(L, dtype=float) * (2.0 ** (np.asarray(rate_req_dl, dtype=float) / params.bandwidth_B) - 1.0)


def effective_aperture(params: SimParams) -> float:
    return params.c ** 2 / (4.0 * math.pi * params.fc ** 2)


def exposure_index_ul(assoc: "Association", powers, users: UserArrays) -> float:
    """Sum of SAR_k * P_k over the associated active users, in W/kg."""
    powers = np.asarray(powers, dtype=float)
    if len(powers) != len(users) or len(assoc.serving) != len(users):
        raise EmfNetError(f"need one power per associated user, got {len(powers)} for {len(users)} users")
    return float(np.sum(users.sar_ul * powers))


def exposure_index_dl(scenario: "Scenario", assoc: "Association", params: SimParams) -> float:
    """DL exposure of all residents from the gNBs serving DL in `assoc`, in W/kg."""
    users = scenario.active
    if len(users) == 0:
        return 0.0

    gnb_positions = assoc.gnb_positions
    n_gnbs = len(gnb_positions)
    rows = np.arange(len(users))
    loss_users = path_loss_matrix(users.positions, gnb_positions, params)
    link_power = dl_link_power(users.rate_dl, loss_users[rows, assoc.serving], params)
    gnb_power = np.bincount(assoc.serving, weights=link_power, minlength=n_gnbs)

    aperture = effective_aperture(params)
    loss_residents = path_loss_matrix(scenario.resident_positions, gnb_positions, params)
    density = gnb_power[None, :] / loss_residents / aperture
    resident_rows = scenario.active_indices
    density[resident_rows, assoc.serving] = link_power / loss_residents[resident_rows, assoc.serving] / aperture
    return float(params.sar_dl * np.sum(density))


def satisfied_ratio(achieved, required) -> float:
    """Fraction of users whose achieved rate meets the requirement (1 bps slack).

    Raises:
        EmfNetError: If there are no users or the lists differ in length.
    """
    achieved = np.asarray(achieved, dtype=float)
    required = np.asarray(required, dtype=float)
    if len(achieved) != len(required):
        raise EmfNetError(f"rate lists differ in length: {len(achieved)} vs {len(required)}")
    if len(achieved) == 0:
        raise EmfNetError("satisfied-users ratio is undefined without users")
    return float(np.count_nonzero(achieved >= required - RATE_EPSILON)) / len(achieved)

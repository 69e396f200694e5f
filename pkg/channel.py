"""Air-to-ground channel: probabilistic LoS, fading-averaged path loss and Shannon rate/power.

All gNBs, the ground base station included, are evaluated through the same
model. Rates are in bits per second (log base 2).
"""
import math
from dataclasses import dataclass

import numpy as np

from config import EmfNetError, SimParams, noise_power

LN2 = math.log(2.0)


class ChannelError(EmfNetError):
    """Degenerate link geometry"""


@dataclass(frozen=True)
class LinkGeometry:
    r: float
    d: float

    def __post_init__(self):
        if not self.r >= self.d >= 0:
            raise ChannelError(f"link needs r >= d >= 0, got r={self.r}, d={self.d}")

    @classmethod
    def between(cls, a, b) -> "LinkGeometry":
        delta = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        d = math.hypot(delta[0], delta[1])
        return cls(r=math.hypot(d, delta[2]), d=d)

    @property
    def elevation_deg(self) -> float:
        return math.degrees(math.atan2(math.sqrt(max(self.r * self.r - self.d * self.d, 0.0)), self.d))


def free_space_factor(params: SimParams) -> float:
    return (4.0 * math.pi * params.fc / params.c) ** 2


def los_from_elevation(elevation_deg, params: SimParams):
    a, b = params.a_env, params.b_env
    return 1.0 / (1.0 + a * np.exp(-b * (elevation_deg - a)))


def loss_from_distance(r, p_los, params: SimParams):
    return free_space_factor(params) * (
        params.eta_los * r ** params.alpha_los * p_los
        + params.eta_nlos * r ** params.alpha_nlos * (1.0 - p_los)
    )


def los_probability(link: LinkGeometry, params: SimParams) -> float:
    """LoS probability of a link; a zero horizontal distance counts as 90 degrees elevation."""
    return float(los_from_elevation(link.elevation_deg, params))


def avg_path_loss(link: LinkGeometry, params: SimParams) -> float:
    """Average path loss (linear factor) mixing LoS and NLoS by their probabilities.

    Raises:
        ChannelError: If the link has zero length.
    """
    if link.r <= 0:
        raise ChannelError("path loss undefined for a zero-length link")
    return float(loss_from_distance(link.r, los_probability(link, params), params))


def path_loss_matrix(user_positions: np.ndarray, gnb_positions: np.ndarray, params: SimParams) -> np.ndarray:
    """Average path loss between every user (rows) and every gNB (columns).

    Raises:
        ChannelError: If a user sits exactly on a gNB.
    """
    users = np.asarray(user_positions, dtype=float).reshape(-1, 3)
    gnbs = np.asarray(gnb_positions, dtype=float).reshape(-1, 3)
    delta = users[:, None, :] - gnbs[None, :, :]
    d = np.hypot(delta[..., 0], delta[..., 1])
    vertical = np.abs(delta[..., 2])
    r = np.hypot(d, vertical)
    if np.any(r <= 0):
        raise ChannelError("path loss undefined for a zero-length link")
    elevation = np.degrees(np.arctan2(vertical, d))
    return loss_from_distance(r, los_from_elevation(elevation, params), params)


def ul_rate(p_tx, L, params: SimParams):
    """Achievable rate B*log2(1 + p/(sigma^2 L)) in bps; accepts scalars or arrays."""
    snr = np.asarray(p_tx, dtype=float) / (noise_power(params) * np.asarray(L, dtype=float))
    rate = params.bandwidth_B * np.log1p(snr) / LN2
    return float(rate) if np.ndim(rate) == 0 else rate


def required_power(rate_req, L, params: SimParams):
    """Transmit power that achieves exactly `rate_req` over loss L; inverse of ul_rate."""
    exponent = np.asarray(rate_req, dtype=float) / params.bandwidth_B * LN2
    power = noise_power(params) * np.asarray(L, dtype=float) * np.expm1(exponent)
    return float(power) if np.ndim(power) == 0 else power

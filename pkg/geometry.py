"""Tether geometry: spherical coordinates around a ground station and the hovering cone.

A tUAV attached to a ground station (GS) can hover anywhere in the cone with
apex at the GS, elevation at least theta_min, capped by the sphere of radius
t_max. The cone is rotationally symmetric about the vertical axis, so the
nearest feasible point to any p lies in the vertical half-plane through p and
the axis; projections are worked out in that (rho, w) plane.
"""
import math
from dataclasses import dataclass

import numpy as np

from config import EmfNetError, SimParams

# slack on feasibility checks against floating point round-off
FEASIBILITY_TOL = 1e-9


class GeometryError(EmfNetError):
    """Point outside the reachable tether geometry"""


@dataclass(frozen=True)
class TuavPlacement:
    gs_index: int
    tether_T: float
    elevation_theta: float
    azimuth_phi: float

    def validate(self, params: SimParams) -> None:
        if not 0.0 <= self.tether_T <= params.t_max:
            raise GeometryError(f"tether length {self.tether_T} outside [0, {params.t_max}]")
        if not params.theta_min <= self.elevation_theta <= math.pi / 2:
            raise GeometryError(f"elevation {self.elevation_theta} outside [{params.theta_min}, pi/2]")
        if not 0.0 <= self.azimuth_phi < 2 * math.pi:
            raise GeometryError(f"azimuth {self.azimuth_phi} outside [0, 2pi)")


def default_placement(gs_index: int, params: SimParams) -> TuavPlacement:
    """Centre of the hovering area: vertical tether at half length."""
    return TuavPlacement(gs_index, params.t_max / 2.0, math.pi / 2, 0.0)


def from_spherical(gs, placement: TuavPlacement) -> np.ndarray:
    gs = np.asarray(gs, dtype=float)
    T, theta, phi = placement.tether_T, placement.elevation_theta, placement.azimuth_phi
    return np.array([
        gs[0] + T * math.cos(theta) * math.cos(phi),
        gs[1] + T * math.cos(theta) * math.sin(phi),
        gs[2] + T * math.sin(theta),
    ])


def to_spherical(gs, p) -> tuple[float, float, float]:
    """Inverse of from_spherical.

    Returns:
        (T, theta, phi) with phi in [0, 2pi); phi is 0 on the vertical axis.

    Raises:
        GeometryError: If p lies below the ground station.
    """
    gs = np.asarray(gs, dtype=float)
    p = np.asarray(p, dtype=float)
    dx, dy, dz = p - gs
    if dz < 0:
        raise GeometryError(f"point at z={p[2]:.3f} lies below its ground station at z={gs[2]:.3f}")
    rho = math.hypot(dx, dy)
    T = math.sqrt(rho * rho + dz * dz)
    if T == 0.0:
        return 0.0, math.pi / 2, 0.0
    theta = math.atan2(dz, rho)
    phi = math.atan2(dy, dx) % (2 * math.pi) if rho > 0 else 0.0
    if phi >= 2 * math.pi:
        phi = 0.0
    return T, theta, phi


def is_in_hover(gs, p, params: SimParams, tol: float = FEASIBILITY_TOL) -> bool:
    gs = np.asarray(gs, dtype=float)
    p = np.asarray(p, dtype=float)
    if p[2] < gs[2] - tol:
        return False
    T, theta, _ = to_spherical(gs, np.array([p[0], p[1], max(p[2], gs[2])]))
    if T <= tol:
        return True
    return T <= params.t_max + tol and theta >= params.theta_min - tol


def clamp_to_hover(gs, p, params: SimParams) -> np.ndarray:
    """Euclidean projection of p onto the hovering cone of the GS at `gs`."""
    gs = np.asarray(gs, dtype=float)
    p = np.asarray(p, dtype=float)
    dx, dy, w = p - gs
    rho = math.hypot(dx, dy)
    R = math.sqrt(rho * rho + w * w)
    if R == 0.0:
        return gs.copy()

    elevation = math.atan2(w, rho)
    if elevation >= params.theta_min:
        if R <= params.t_max:
            return p.copy()
        return gs + (p - gs) * (params.t_max / R)

    # outside the cone: project onto its boundary ray in the (rho, w) half-plane
    cos_t, sin_t = math.cos(params.theta_min), math.sin(params.theta_min)
    t = min(max(rho * cos_t + w * sin_t, 0.0), params.t_max)
    if t == 0.0:
        return gs.copy()
    ux, uy = (dx / rho, dy / rho) if rho > 0 else (1.0, 0.0)
    return gs + np.array([t * cos_t * ux, t * cos_t * uy, t * sin_t])


def hover_slice_radius(gs, altitude: float, params: SimParams) -> float:
    """Radius of the horizontal cross-section of the hovering cone at `altitude`; -1 if empty."""
    w = altitude - float(np.asarray(gs)[2])
    if w < 0 or w > params.t_max:
        return -1.0
    cone = w / math.tan(params.theta_min)
    sphere = math.sqrt(max(params.t_max * params.t_max - w * w, 0.0))
    return min(cone, sphere)


def clamp_to_slice(gs, xy, altitude: float, params: SimParams) -> np.ndarray:
    """Nearest point to (xy, altitude) within the cone cross-section at that altitude."""
    gs = np.asarray(gs, dtype=float)
    radius = hover_slice_radius(gs, altitude, params)
    if radius < 0:
        raise GeometryError(f"altitude {altitude:.3f} m is outside the hovering range of the GS")
    offset = np.asarray(xy, dtype=float)[:2] - gs[:2]
    dist = math.hypot(offset[0], offset[1])
    if dist > radius:
        offset = offset * (radius / dist)
    return np.array([gs[0] + offset[0], gs[1] + offset[1], altitude])


def placement_from_point(gs_index: int, gs, p, params: SimParams) -> TuavPlacement:
    """Spherical placement of a feasible point, snapped onto the exact constraint bounds.

    Raises:
        GeometryError: If p is outside the hovering cone by more than round-off.
    """
    if not is_in_hover(gs, p, params):
        raise GeometryError(f"point {np.round(p, 3).tolist()} lies outside the hovering area of GS {gs_index}")
    T, theta, phi = to_spherical(gs, np.array([p[0], p[1], max(p[2], np.asarray(gs)[2])]))
    T = min(max(T, 0.0), params.t_max)
    theta = min(max(theta, params.theta_min), math.pi / 2)
    return TuavPlacement(gs_index, T, theta, phi)

"""Height-map obstacle detection and distance-based speed reduction.

Each sweep is binned into a vehicle-centred grid; a cell counts as occupied
when the vertical spread of its points exceeds the height threshold. The
vehicle's expected corridor is projected from the current steering angle with
a bicycle model, and the closest occupied cell along it caps the commanded
speed at d/5 - 1 (full stop at maximum deceleration inside 5 m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from shuttlesim.lidar import LidarFrame
from shuttlesim.plant import VehicleParams, simulate_full_stop
from shuttlesim.twist import TwistCommand

PEDESTRIAN_SPEED = 1.4  # m/s, design walking speed for clearance analysis
SLOWDOWN_STOP_DISTANCE = 5.0  # m, commanded speed is zero inside this range
SLOWDOWN_SLOPE = 5.0  # v = d/SLOWDOWN_SLOPE - 1


@dataclass(frozen=True)
class GridParams:
    cell_size: float = 0.25
    # must cover the corridor's reach: 15 m ahead of the bumper, which sits
    # front_overhang beyond the grid's vehicle-centred origin
    extent: float = 20.0  # grid covers +-extent around the vehicle, m
    height_threshold: float = 0.07
    roof_height: float = 2.1  # points above this are overhead structure
    min_cell_points: float = 2  # a spread needs at least one point pair

    def __post_init__(self):
        if self.cell_size <= 0 or self.extent <= self.cell_size:
            raise ValueError("bad grid geometry")


@dataclass(frozen=True)
class OccupancyGrid:
    cell_size: float
    extent: float
    min_z: np.ndarray
    max_z: np.ndarray
    count: np.ndarray
    occupied: np.ndarray

    def occupied_cell_centers(self) -> np.ndarray:
        """(N, 2) vehicle-frame centres of occupied cells."""
        idx = np.argwhere(self.occupied)
        return (idx + 0.5) * self.cell_size - self.extent

    def occupied_cell_stats(self) -> list[tuple[float, float, float, float]]:
        """(x, y, min_z, max_z) per occupied cell, for grid dumps."""
        idx = np.argwhere(self.occupied)
        centers = (idx + 0.5) * self.cell_size - self.extent
        return [
            (float(cx), float(cy), float(self.min_z[i, j]), float(self.max_z[i, j]))
            for (i, j), (cx, cy) in zip(idx, centers)
        ]


def build_grid(frame: LidarFrame, params: GridParams = GridParams()) -> OccupancyGrid:
    """Bin a sweep into min/max height cells and flag tall spreads."""
    n = int(round(2 * params.extent / params.cell_size))
    min_z = np.full((n, n), np.inf)
    max_z = np.full((n, n), -np.inf)
    count = np.zeros((n, n), dtype=np.int32)

    if len(frame):
        pts = frame.points
        below_roof = pts[:, 2] <= params.roof_height
        pts = pts[below_roof]
        ij = np.floor((pts[:, :2] + params.extent) / params.cell_size).astype(int)
        ok = np.all((ij >= 0) & (ij < n), axis=1)
        ij = ij[ok]
        z = pts[ok, 2]
        np.minimum.at(min_z, (ij[:, 0], ij[:, 1]), z)
        np.maximum.at(max_z, (ij[:, 0], ij[:, 1]), z)
        np.add.at(count, (ij[:, 0], ij[:, 1]), 1)

    spread = np.where(count > 0, max_z - min_z, 0.0)
    occupied = (count >= params.min_cell_points) & (spread > params.height_threshold)
    return OccupancyGrid(params.cell_size, params.extent, min_z, max_z, count, occupied)


@dataclass(frozen=True)
class Corridor:
    """Swept region the vehicle will traverse, predicted from steering."""

    radius: float | None  # signed centreline radius; None means straight
    length: float  # checked distance ahead of the front bumper, m
    half_width: float
    front_overhang: float  # bumper position ahead of the rear axle, m


@dataclass(frozen=True)
class CorridorParams:
    length: float = 15.0
    clearance: float = 0.4  # lateral margin beyond the vehicle half width
    straight_steer_threshold: float = 0.01  # rad


def corridor_from_steering(
    steer_angle: float,
    vehicle: VehicleParams = VehicleParams(),
    params: CorridorParams = CorridorParams(),
) -> Corridor:
    """Predicted corridor for the current front-wheel angle."""
    if abs(steer_angle) > vehicle.max_steer + 1e-9:
        raise ValueError("steer angle beyond the steering limit")
    if abs(steer_angle) < params.straight_steer_threshold:
        radius = None
    else:
        radius = vehicle.wheelbase / math.tan(steer_angle)
    return Corridor(
        radius=radius,
        length=params.length,
        half_width=vehicle.half_width + params.clearance,
        front_overhang=vehicle.front_overhang,
    )


def corridor_coordinates(corridor: Corridor, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Arc length from the rear axle and lateral offset for (N, 2) points."""
    points = np.atleast_2d(points)
    x, y = points[:, 0], points[:, 1]
    if corridor.radius is None:
        return x.copy(), np.abs(y)
    r = corridor.radius
    # centre of the turning circle sits at (0, r) in the vehicle frame
    rho = np.hypot(x, y - r)
    lateral = np.abs(rho - abs(r))
    theta = np.arctan2(x, r - y) if r > 0 else np.arctan2(x, y - r)
    s = np.where(theta >= 0.0, abs(r) * theta, -1.0)
    return s, lateral


def contains(corridor: Corridor, points: np.ndarray) -> np.ndarray:
    """Boolean mask of points inside the corridor footprint."""
    s, lateral = corridor_coordinates(corridor, points)
    s_max = corridor.front_overhang + corridor.length
    return (s >= 0.0) & (s <= s_max) & (lateral <= corridor.half_width)


@dataclass(frozen=True)
class ObstacleReport:
    present: bool
    closest_distance: float = math.inf  # ahead of the front bumper, m
    cell_position: tuple[float, float] | None = None


def closest_in_corridor(grid: OccupancyGrid, corridor: Corridor) -> ObstacleReport:
    """Closest occupied cell along the corridor, measured from the bumper."""
    centers = grid.occupied_cell_centers()
    if len(centers) == 0:
        return ObstacleReport(present=False)
    s, lateral = corridor_coordinates(corridor, centers)
    s_max = corridor.front_overhang + corridor.length
    inside = (s >= 0.0) & (s <= s_max) & (lateral <= corridor.half_width)
    if not inside.any():
        return ObstacleReport(present=False)
    d = np.maximum(s[inside] - corridor.front_overhang, 0.0)
    k = int(np.argmin(d))
    cell = centers[inside][k]
    return ObstacleReport(True, float(d[k]), (float(cell[0]), float(cell[1])))


def speed_limit_for_distance(d: float, check_range: float = 15.0) -> float | None:
    """Speed cap for an obstacle ``d`` metres ahead; None beyond the range."""
    if d > check_range:
        return None
    if d <= SLOWDOWN_STOP_DISTANCE:
        return 0.0
    return d / SLOWDOWN_SLOPE - 1.0


def modify_speed(
    cmd: TwistCommand,
    grid: OccupancyGrid,
    corridor: Corridor,
    max_decel: float = VehicleParams().max_decel,
) -> tuple[TwistCommand, ObstacleReport]:
    """Cap the command's speed by the closest in-path obstacle."""
    report = closest_in_corridor(grid, corridor)
    if not report.present:
        return cmd, report
    limit = speed_limit_for_distance(report.closest_distance, corridor.length)
    if limit is None:
        return cmd, replace(report, present=False)
    if report.closest_distance <= SLOWDOWN_STOP_DISTANCE:
        return replace(cmd, linear_v=0.0, decel_limit=max_decel), report
    return replace(cmd, linear_v=min(cmd.linear_v, max(0.0, limit))), report


def required_side_clearance(
    speed: float, params: VehicleParams = VehicleParams(), dt: float = 0.02
) -> float:
    """Side clearance that keeps a crossing pedestrian outside the stop envelope.

    A pedestrian walking at 1.4 m/s perpendicular to the path covers
    1.4 * stop_time metres while the cart brakes to a halt.
    """
    if speed <= 0:
        raise ValueError("speed must be positive")
    _, stop_time = simulate_full_stop(speed, params, dt)
    return PEDESTRIAN_SPEED * stop_time

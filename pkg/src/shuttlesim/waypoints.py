"""Waypoint recording, compilation and following.

Waypoint files hold one "lat,lon,speed" triplet per line. Paths are recorded
by driving and sampling position every metre; compile_path then limits each
waypoint's speed so lateral acceleration stays at or below 0.5 m/s^2 using
the turn radius recovered from the recorded v and omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from shuttlesim.plant import VehicleState, normalize_angle
from shuttlesim.twist import TwistCommand

EARTH_RADIUS = 6378137.0
LATERAL_ACCEL_LIMIT = 0.5  # m/s^2
RECORD_SPACING = 1.0  # m between recorded waypoints
OMEGA_STRAIGHT = 1e-3  # below this yaw rate the radius is treated as infinite


class NoPathError(ValueError):
    """Raised when a follower is stepped without any waypoints."""


class PathFormatError(ValueError):
    """Raised on malformed waypoint or trace files."""


def to_local(origin: tuple[float, float], lat: float, lon: float) -> tuple[float, float]:
    """Equirectangular projection to metres east/north of ``origin``."""
    lat0, lon0 = origin
    x = EARTH_RADIUS * math.radians(lon - lon0) * math.cos(math.radians(lat0))
    y = EARTH_RADIUS * math.radians(lat - lat0)
    return x, y


def from_local(origin: tuple[float, float], x: float, y: float) -> tuple[float, float]:
    """Inverse of :func:`to_local`."""
    lat0, lon0 = origin
    lat = lat0 + math.degrees(y / EARTH_RADIUS)
    lon = lon0 + math.degrees(x / (EARTH_RADIUS * math.cos(math.radians(lat0))))
    return lat, lon


@dataclass(frozen=True)
class Waypoint:
    lat: float
    lon: float
    speed: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon}")
        if self.speed < 0:
            raise ValueError("waypoint speed must be non-negative")


@dataclass(frozen=True)
class WaypointList:
    waypoints: tuple[Waypoint, ...]
    target_index: int = 0
    origin: tuple[float, float] = (0.0, 0.0)
    finished: bool = False  # latched once the final waypoint has been reached

    def __post_init__(self):
        if self.waypoints and not 0 <= self.target_index < len(self.waypoints):
            raise ValueError("target_index out of range")

    def local_xy(self) -> np.ndarray:
        return np.asarray(
            [to_local(self.origin, w.lat, w.lon) for w in self.waypoints], dtype=float
        )


@dataclass(frozen=True)
class RecordedTrace:
    """Samples of (lat, lon, v, omega, t) logged while driving a path."""

    lat: np.ndarray
    lon: np.ndarray
    v: np.ndarray
    omega: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        if any(len(a) != n for a in (self.lat, self.lon, self.v, self.omega)):
            raise ValueError("trace arrays must have equal length")
        if n >= 2 and not np.all(np.diff(self.t) > 0):
            raise ValueError("trace timestamps must be strictly increasing")

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class FollowerParams:
    kp: float = 1.5  # heading error -> angular velocity
    switch_radius: float = 2.0  # advance to the next waypoint inside this range, m
    accel_limit: float = 1.0
    decel_limit: float = 1.2
    heading_bias: float = 0.0  # constant compass correction, rad


def follow_step(
    wlist: WaypointList, state: VehicleState, params: FollowerParams = FollowerParams()
) -> tuple[TwistCommand, WaypointList]:
    """Produce the twist command tracking the list's current target.

    Advances the target index past every waypoint closer than the switch
    radius (so stale near points are skipped after position jumps). The speed
    tapers into the final waypoint, and once the vehicle has closed within the
    switch radius of it the list latches finished and commands zero for good.
    """
    if not wlist.waypoints:
        raise NoPathError("waypoint list is empty")

    stop_cmd = TwistCommand(0.0, 0.0, params.accel_limit, params.decel_limit)
    if wlist.finished:
        return stop_cmd, wlist

    xy = wlist.local_xy()
    idx = wlist.target_index
    last = len(wlist.waypoints) - 1
    while idx < last and math.hypot(xy[idx, 0] - state.x, xy[idx, 1] - state.y) < params.switch_radius:
        idx += 1

    tx, ty = xy[idx]
    dist = math.hypot(tx - state.x, ty - state.y)
    if idx == last and dist < params.switch_radius:
        return stop_cmd, replace(wlist, target_index=idx, finished=True)

    # slow into the terminus so the cart does not sail past the list end
    remaining = dist + float(np.sum(np.hypot(*np.diff(xy[idx:], axis=0).T)))
    margin = max(remaining - params.switch_radius, 0.0)
    taper = math.sqrt(2.0 * params.decel_limit * margin) + 0.15
    speed = min(wlist.waypoints[idx].speed, taper)

    bearing = math.atan2(ty - state.y, tx - state.x)
    theta_error = normalize_angle(bearing - state.heading - params.heading_bias)
    cmd = TwistCommand(speed, params.kp * theta_error, params.accel_limit, params.decel_limit)
    return cmd, replace(wlist, target_index=idx)


def turn_radius(v: float, omega: float) -> float:
    """Turn radius from linear and angular velocity; infinite when straight."""
    if abs(omega) < OMEGA_STRAIGHT:
        return math.inf
    return abs(v) / abs(omega)


def compile_path(
    trace: RecordedTrace,
    target_speed: float,
    spacing: float = RECORD_SPACING,
) -> WaypointList:
    """Resample a driven trace at 1 m spacing and cap speeds by curvature.

    Each waypoint's speed is min(target_speed, sqrt(0.5 * r)) where r is the
    local turn radius, keeping lateral acceleration at or below 0.5 m/s^2.
    """
    if target_speed <= 0:
        raise ValueError("target_speed must be positive")
    if len(trace) < 2:
        raise ValueError("trace needs at least two samples")

    origin = (float(trace.lat[0]), float(trace.lon[0]))
    xy = np.asarray([to_local(origin, la, lo) for la, lo in zip(trace.lat, trace.lon)])
    seg = np.hypot(*np.diff(xy, axis=0).T)
    s = np.concatenate(([0.0], np.cumsum(seg)))
    if s[-1] <= 0.0:
        raise ValueError("trace has zero length")

    marks = np.arange(0.0, s[-1], spacing)
    if s[-1] - marks[-1] > 1e-9:
        marks = np.append(marks, s[-1])

    xs = np.interp(marks, s, xy[:, 0])
    ys = np.interp(marks, s, xy[:, 1])
    vs = np.interp(marks, s, trace.v)
    ws = np.interp(marks, s, trace.omega)

    waypoints = []
    for x, y, v, w in zip(xs, ys, vs, ws):
        r = turn_radius(v, w)
        v_max = math.sqrt(LATERAL_ACCEL_LIMIT * r) if math.isfinite(r) else math.inf
        lat, lon = from_local(origin, float(x), float(y))
        waypoints.append(Waypoint(lat, lon, min(target_speed, v_max)))
    return WaypointList(tuple(waypoints), 0, origin)


def cross_track_error(wlist: WaypointList, state: VehicleState) -> float:
    """Unsigned perpendicular distance from the vehicle to the nearest path segment."""
    if len(wlist.waypoints) < 2:
        raise ValueError("cross-track error needs at least two waypoints")
    xy = wlist.local_xy()
    p = np.array([state.x, state.y])
    a = xy[:-1]
    b = xy[1:]
    ab = b - a
    ap = p - a
    denom = np.einsum("ij,ij->i", ab, ab)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(denom > 0, np.einsum("ij,ij->i", ap, ab) / denom, 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return float(np.min(np.hypot(*(p - closest).T)))


def waypoint_filename(route: str, speed: float) -> str:
    return f"{route}_{speed:g}mps.waypoints"


def save_waypoints(wlist: WaypointList, path) -> None:
    lines = [f"{w.lat:.8f},{w.lon:.8f},{float(w.speed)!r}" for w in wlist.waypoints]
    Path(path).write_text("\n".join(lines) + "\n")


def load_waypoints(path, origin: tuple[float, float] | None = None) -> WaypointList:
    waypoints = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise PathFormatError(f"{path}:{lineno}: expected 'lat,lon,speed', got {line!r}")
        try:
            lat, lon, speed = (float(p) for p in parts)
            waypoints.append(Waypoint(lat, lon, speed))
        except ValueError as exc:
            raise PathFormatError(f"{path}:{lineno}: {exc}") from exc
    if not waypoints:
        raise PathFormatError(f"{path}: no waypoints found")
    if origin is None:
        origin = (waypoints[0].lat, waypoints[0].lon)
    return WaypointList(tuple(waypoints), 0, origin)


def save_trace(trace: RecordedTrace, path) -> None:
    lines = ["t,lat,lon,v,omega"]
    for t, la, lo, v, w in zip(trace.t, trace.lat, trace.lon, trace.v, trace.omega):
        lines.append(f"{float(t)!r},{la:.8f},{lo:.8f},{float(v)!r},{float(w)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_trace(path) -> RecordedTrace:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("t,"):
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise PathFormatError(f"{path}:{lineno}: expected 't,lat,lon,v,omega', got {line!r}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise PathFormatError(f"{path}:{lineno}: {exc}") from exc
    if len(rows) < 2:
        raise PathFormatError(f"{path}: trace needs at least two samples")
    arr = np.asarray(rows)
    return RecordedTrace(lat=arr[:, 1], lon=arr[:, 2], v=arr[:, 3], omega=arr[:, 4], t=arr[:, 0])

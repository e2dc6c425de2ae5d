"""Retroreflective sign detection from LiDAR sweeps.

Five filter stages run in order: field-of-view crop, minimum-intensity
threshold, radius outlier removal, statistical outlier removal, and RANSAC
plane segmentation with a facing check on the plane normal. A detected sign
yields a stop command whose deceleration limit is v^2 / (2 d) for the speed
and distance at detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from shuttlesim.lidar import LidarFrame
from shuttlesim.twist import TwistCommand


@dataclass(frozen=True)
class FilterParams:
    fov_side: float = 10.0  # lateral half-extent kept by the FOV crop, m
    min_intensity: float = 85.0
    ror_radius: float = 0.5
    ror_min_neighbors: int = 3
    sor_k: int = 8
    sor_stddev_mult: float = 1.0
    plane_dist_tol: float = 0.05
    normal_min_a: float = 0.9  # required x-component of the facing normal
    min_sign_points: int = 10
    ransac_iters: int = 200
    ransac_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.min_intensity <= 255.0:
            raise ValueError("min_intensity must be within [0, 255]")
        for name in ("fov_side", "ror_radius", "ror_min_neighbors", "sor_k",
                     "sor_stddev_mult", "plane_dist_tol", "normal_min_a",
                     "min_sign_points", "ransac_iters"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SignDetection:
    plane: tuple[float, float, float, float]  # ax + by + cz + d = 0, unit (a, b, c)
    inlier_points: np.ndarray
    distance: float  # range from the sensor to the nearest inlier, m
    point_count: int


def _mask_frame(frame: LidarFrame, mask: np.ndarray) -> LidarFrame:
    return LidarFrame(
        points=frame.points[mask],
        intensity=frame.intensity[mask],
        ring=frame.ring[mask],
        timestamp=frame.timestamp,
    )


def fov_filter(frame: LidarFrame, fov_side: float = 10.0) -> LidarFrame:
    """Stage 1: drop everything behind the vehicle or outside the side band."""
    mask = (frame.points[:, 0] > 0.0) & (np.abs(frame.points[:, 1]) <= fov_side)
    return _mask_frame(frame, mask)


def intensity_filter(frame: LidarFrame, min_intensity: float = 85.0) -> LidarFrame:
    """Stage 2: keep only returns bright enough to be retroreflective."""
    return _mask_frame(frame, frame.intensity >= min_intensity)


def radius_outlier_removal(
    points: np.ndarray, radius: float = 0.5, min_neighbors: int = 3
) -> np.ndarray:
    """Stage 3: keep points with at least ``min_neighbors`` others inside ``radius``."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return points
    tree = cKDTree(points)
    # counts include the query point itself
    neighbor_counts = tree.query_ball_point(points, r=radius, return_length=True)
    return points[neighbor_counts - 1 >= min_neighbors]


def statistical_outlier_removal(
    points: np.ndarray, k: int = 8, stddev_mult: float = 1.0
) -> np.ndarray:
    """Stage 4: drop points whose mean kNN distance exceeds mu + mult * sigma."""
    points = np.asarray(points, dtype=float)
    if len(points) <= k:
        return points
    tree = cKDTree(points)
    dists, _ = tree.query(points, k=k + 1)  # first neighbour is the point itself
    mean_dist = dists[:, 1:].mean(axis=1)
    threshold = mean_dist.mean() + stddev_mult * mean_dist.std()
    return points[mean_dist <= threshold]


def _fit_plane(points: np.ndarray) -> tuple[np.ndarray, float] | None:
    centroid = points.mean(axis=0)
    _, s, vt = np.linalg.svd(points - centroid, full_matrices=False)
    normal = vt[-1]
    norm = np.linalg.norm(normal)
    if norm == 0:
        return None
    normal = normal / norm
    return normal, float(-normal @ centroid)


def plane_segment(
    points: np.ndarray,
    dist_tol: float = 0.05,
    params: FilterParams = FilterParams(),
    sensor_origin: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> SignDetection | None:
    """Stage 5: RANSAC plane fit with a facing check on the recovered normal.

    Runs a fixed-seed RANSAC, refines the winning plane on its inliers, flips
    the normal so its x-component is non-negative, and accepts the plane only
    when that component reaches the facing threshold with enough support.
    When several planes exist the nearest accepted one wins.
    """
    points = np.asarray(points, dtype=float)
    rng = np.random.default_rng(params.ransac_seed)
    origin = np.asarray(sensor_origin, dtype=float)
    remaining = points
    accepted: list[SignDetection] = []

    for _ in range(3):  # at most a few plane extractions per frame
        if len(remaining) < params.min_sign_points:
            break
        best_inliers = None
        for _ in range(params.ransac_iters):
            idx = rng.choice(len(remaining), size=3, replace=False)
            p0, p1, p2 = remaining[idx]
            normal = np.cross(p1 - p0, p2 - p0)
            norm = np.linalg.norm(normal)
            if norm < 1e-12:
                continue
            normal = normal / norm
            dist = np.abs((remaining - p0) @ normal)
            inliers = dist <= dist_tol
            if best_inliers is None or inliers.sum() > best_inliers.sum():
                best_inliers = inliers
        if best_inliers is None or best_inliers.sum() < 3:
            break

        fit = _fit_plane(remaining[best_inliers])
        if fit is None:
            break
        normal, offset = fit
        dist = np.abs(remaining @ normal + offset)
        inliers = dist <= dist_tol
        if normal[0] < 0.0:
            normal, offset = -normal, -offset

        support = remaining[inliers]
        if len(support) >= params.min_sign_points and normal[0] >= params.normal_min_a:
            ranges = np.linalg.norm(support - origin, axis=1)
            accepted.append(
                SignDetection(
                    plane=(float(normal[0]), float(normal[1]), float(normal[2]), offset),
                    inlier_points=support,
                    distance=float(ranges.min()),
                    point_count=int(len(support)),
                )
            )
        remaining = remaining[~inliers]

    if not accepted:
        return None
    return min(accepted, key=lambda d: d.distance)


class SignDetector:
    """Runs the five-stage pipeline on vehicle-frame sweeps."""

    def __init__(self, params: FilterParams = FilterParams(),
                 sensor_origin: tuple[float, float, float] = (0.0, 0.0, 0.0)):
        self.params = params
        self.sensor_origin = sensor_origin

    def detect(self, frame: LidarFrame) -> SignDetection | None:
        p = self.params
        stage = fov_filter(frame, p.fov_side)
        stage = intensity_filter(stage, p.min_intensity)
        pts = radius_outlier_removal(stage.points, p.ror_radius, p.ror_min_neighbors)
        pts = statistical_outlier_removal(pts, p.sor_k, p.sor_stddev_mult)
        if len(pts) < p.min_sign_points:
            return None
        return plane_segment(pts, p.plane_dist_tol, p, self.sensor_origin)


def sign_speed_command(
    detection: SignDetection,
    v_at_detection: float,
    accel_limit: float = 1.0,
) -> TwistCommand:
    """Stop command decelerating at v^2 / (2 d) from the detection point."""
    if detection.distance <= 0.0:
        raise ValueError("detection distance must be positive")
    decel = v_at_detection**2 / (2.0 * detection.distance)
    return TwistCommand(0.0, 0.0, accel_limit, max(decel, 1e-9))

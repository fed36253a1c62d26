"""Ray-cast simulation of the dual-scanner platform yawing in place.

The virtual platform carries a vertically and a horizontally scanning
rangefinder plus an attitude sensor. Each simulated sweep ray-casts against
the scene's planar primitives; no-returns are written as range 0, which the
parser masks out. Points and segments are invisible to rays (measure zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import DEFAULT_ARC_LIMIT, Pose, rotation_about_z
from .ingest import ImuSample, LaserScan, ScanLog
from .scenes import (
    BoxPrimitive,
    CrossedPlanesPrimitive,
    RectanglePrimitive,
    SceneSpec,
)


@dataclass(frozen=True)
class DeviceParams:
    """Rangefinder geometry and timing; offsets hold the scanner extrinsics."""

    range_max: float = 30.0
    angle_min: float = -DEFAULT_ARC_LIMIT
    angle_inc: float = math.radians(0.25)
    rays_per_scan: int = 1081
    scan_period: float = 0.025
    vertical_offset: tuple = (0.0, 0.0, 0.0)
    horizontal_offset: tuple = (0.0, 0.0, 0.0)

    def bearings(self) -> np.ndarray:
        return self.angle_min + self.angle_inc * np.arange(self.rays_per_scan)


def _scene_rectangles(scene: SceneSpec) -> list[RectanglePrimitive]:
    rects: list[RectanglePrimitive] = []
    for prim in scene.primitives:
        if isinstance(prim, RectanglePrimitive):
            rects.append(prim)
        elif isinstance(prim, BoxPrimitive):
            rects.extend(prim.faces())
        elif isinstance(prim, CrossedPlanesPrimitive):
            for part in prim.parts():
                if isinstance(part, RectanglePrimitive):
                    rects.append(part)
                else:
                    rects.extend(part.faces())
    return rects


def _cast(origin: np.ndarray, dirs: np.ndarray,
          rects: list[RectanglePrimitive], range_max: float) -> np.ndarray:
    """Distance along each unit ray to the nearest rectangle, 0 for no hit."""
    best = np.full(len(dirs), np.inf)
    for rect in rects:
        u, v, n = rect.axes()
        center = np.asarray(rect.center, dtype=float)
        denom = dirs @ n
        facing = np.abs(denom) > 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(facing, ((center - origin) @ n) / denom, -1.0)
        rel = origin + t[:, None] * dirs - center
        hit = (
            facing
            & (t > 1e-9)
            & (np.abs(rel @ u) <= rect.width / 2.0)
            & (np.abs(rel @ v) <= rect.height / 2.0)
        )
        best = np.where(hit & (t < best), t, best)
    ranges = np.where(np.isfinite(best) & (best <= range_max), best, 0.0)
    return ranges


def scan_truth(
    station,
    n_scans: int,
    yaw_start: float = 0.0,
    yaw_span: float = 2.0 * math.pi,
    drift_per_scan=(0.0, 0.0, 0.0),
    scan_period: float = 0.025,
) -> list[dict]:
    """Ground-truth platform state per scan; fully determined by the arguments."""
    station = np.asarray(station, dtype=float)
    drift = np.asarray(drift_per_scan, dtype=float)
    step = yaw_span / n_scans if n_scans > 1 else 0.0
    truth = []
    for k in range(n_scans):
        truth.append({
            "timestamp": k * scan_period,
            "position": (station + k * drift).tolist(),
            "yaw": yaw_start + k * step,
        })
    return truth


def true_pose_track(truth: list[dict]) -> list[tuple[float, Pose]]:
    return [
        (rec["timestamp"],
         Pose(rotation_about_z(rec["yaw"]), np.asarray(rec["position"])))
        for rec in truth
    ]


def simulate_yaw_scan(
    scene: SceneSpec,
    station=(0.0, 0.0, 0.0),
    device: DeviceParams = DeviceParams(),
    n_scans: int = 72,
    yaw_start: float = 0.0,
    yaw_span: float = 2.0 * math.pi,
    drift_per_scan=(0.0, 0.0, 0.0),
    range_noise: float = 0.0,
    seed: int = 0,
) -> ScanLog:
    """Simulate a yaw sweep and return the scan log.

    One vertical scan, one horizontal scan and one attitude sample are
    emitted per step, all at the same timestamp. The attitude channel is the
    exact ground-truth yaw rotation; optional translation drift accumulates
    per scan. Ground truth for scoring comes from :func:`scan_truth` with the
    same arguments.
    """
    rng = np.random.default_rng(seed)
    rects = _scene_rectangles(scene)
    bearings = device.bearings()
    if abs(bearings[-1]) > DEFAULT_ARC_LIMIT + 1e-9 or abs(bearings[0]) > DEFAULT_ARC_LIMIT + 1e-9:
        raise ValueError("device bearings exceed the detection arc")

    # Local unit ray directions for the two scan planes.
    vertical_dirs = np.stack(
        [-np.cos(bearings), np.zeros_like(bearings), -np.sin(bearings)], axis=1
    )
    horizontal_dirs = np.stack(
        [-np.cos(bearings), -np.sin(bearings), np.zeros_like(bearings)], axis=1
    )

    vertical: list[LaserScan] = []
    horizontal: list[LaserScan] = []
    imu: list[ImuSample] = []
    for rec in scan_truth(station, n_scans, yaw_start, yaw_span,
                          drift_per_scan, device.scan_period):
        t = rec["timestamp"]
        rot = rotation_about_z(rec["yaw"])
        pos = np.asarray(rec["position"])
        for dirs, offset, out in (
            (vertical_dirs, device.vertical_offset, vertical),
            (horizontal_dirs, device.horizontal_offset, horizontal),
        ):
            origin = pos + rot @ np.asarray(offset, dtype=float)
            ranges = _cast(origin, dirs @ rot.T, rects, device.range_max)
            if range_noise > 0:
                hits = ranges > 0
                ranges = np.where(
                    hits, np.maximum(ranges + rng.normal(0, range_noise, len(ranges)),
                                     1e-6), ranges
                )
            kind = "vertical" if out is vertical else "horizontal"
            out.append(LaserScan(t, ranges, device.angle_min, device.angle_inc, kind))
        imu.append(ImuSample(t, rot))

    return ScanLog(vertical, horizontal, imu,
                   device.angle_min, device.angle_inc, device.range_max)

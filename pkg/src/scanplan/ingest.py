"""Scan-log parsing, pose-track estimation and single-station cloud assembly.

Log format (line-oriented ASCII, the contract between generators and the
pipeline):

    # angle_min <rad>
    # angle_inc <rad>
    # range_max <m>
    V <t> <r1> <r2> ... <rN>     vertical scan ranges, bearings implied
    H <t> <r1> ... <rN>          horizontal scan ranges
    I <t> <r11> <r12> ... <r33>  IMU rotation matrix, row-major

Range readings of 0 or beyond range_max are no-returns: they are kept in the
record but masked invalid at parse time. The rotation channel of the pose
track is the nearest IMU sample, untouched; the translation channel chains
2D scan matching between consecutive horizontal scans, each pre-rotated by
its IMU rotation so only translation is left to estimate. The vertical
translation component stays 0 (a horizontal scanner cannot observe it).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    EmptyLog,
    IcpDiverged,
    InsufficientOverlap,
    MalformedRecord,
    MissingPose,
    UnsortedTimestamps,
)
from .geometry import (
    DEFAULT_ARC_LIMIT,
    PointCloud,
    Pose,
    polar_to_local_arrays,
    validate_rotation,
)
from .registration import IcpConfig, RigidTransform2D, icp_align_2d, locked

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LaserScan:
    """One sweep: ranges at bearings angle_min + i * angle_inc, plus validity."""

    timestamp: float
    ranges: np.ndarray
    angle_min: float
    angle_inc: float
    kind: str                      # "vertical" | "horizontal"
    valid: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "ranges", np.asarray(self.ranges, dtype=float))
        if self.valid is None:
            # Range 0 is the no-return marker.
            object.__setattr__(self, "valid", self.ranges > 0)
        else:
            object.__setattr__(self, "valid", np.asarray(self.valid, dtype=bool))

    def bearings(self) -> np.ndarray:
        return self.angle_min + self.angle_inc * np.arange(len(self.ranges))


@dataclass(frozen=True)
class ImuSample:
    timestamp: float
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", validate_rotation(self.rotation))


@dataclass(frozen=True)
class ScanLog:
    vertical: list
    horizontal: list
    imu: list
    angle_min: float
    angle_inc: float
    range_max: float


@dataclass(frozen=True)
class PoseTrack:
    """(timestamp, Pose) pairs with strictly increasing timestamps."""

    entries: list

    def __post_init__(self):
        ts = [t for t, _ in self.entries]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise UnsortedTimestamps("pose track timestamps must strictly increase")

    def pose_at(self, timestamp: float) -> Pose:
        for t, pose in self.entries:
            if t == timestamp:
                return pose
        raise MissingPose(timestamp)


def _parse_float(token: str, line_no: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MalformedRecord(f"bad {what} {token!r}", line=line_no) from None
    if math.isnan(value):
        raise MalformedRecord(f"{what} is NaN", line=line_no)
    return value


def parse_scan_log(path, arc_limit: float = DEFAULT_ARC_LIMIT) -> ScanLog:
    """Read and validate a scan log.

    Raises:
        MalformedRecord: unknown record type, bad number, negative range,
            implied bearing outside the detection arc, missing header, or no
            IMU sample at or before the first scan.
        UnsortedTimestamps: a stream's timestamps fail to strictly increase.
        EmptyLog: no scan records at all.
    """
    header: dict[str, float] = {}
    vertical: list[LaserScan] = []
    horizontal: list[LaserScan] = []
    imu: list[ImuSample] = []

    with open(path, "r", encoding="ascii") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] in ("angle_min", "angle_inc", "range_max"):
                    header[parts[0]] = _parse_float(parts[1], line_no, parts[0])
                continue
            tokens = line.split()
            tag = tokens[0]
            if tag in ("V", "H"):
                for key in ("angle_min", "angle_inc", "range_max"):
                    if key not in header:
                        raise MalformedRecord(
                            f"scan record before header line '# {key} ...'", line=line_no
                        )
                if header["angle_inc"] <= 0:
                    raise MalformedRecord("angle_inc must be > 0", line=line_no)
                if len(tokens) < 3:
                    raise MalformedRecord("scan record needs a timestamp and ranges",
                                          line=line_no)
                t = _parse_float(tokens[1], line_no, "timestamp")
                if t < 0:
                    raise MalformedRecord("timestamp must be >= 0", line=line_no)
                ranges = np.array(
                    [_parse_float(tok, line_no, "range") for tok in tokens[2:]]
                )
                if np.any(ranges < 0):
                    raise MalformedRecord("negative range reading", line=line_no)
                last_bearing = header["angle_min"] + header["angle_inc"] * (len(ranges) - 1)
                if abs(header["angle_min"]) > arc_limit + 1e-12 or abs(last_bearing) > arc_limit + 1e-12:
                    raise MalformedRecord(
                        f"implied bearing outside the +-{arc_limit:.6f} rad arc",
                        line=line_no,
                    )
                valid = (ranges > 0) & (ranges <= header["range_max"])
                scan = LaserScan(
                    t, ranges, header["angle_min"], header["angle_inc"],
                    "vertical" if tag == "V" else "horizontal", valid,
                )
                (vertical if tag == "V" else horizontal).append(scan)
            elif tag == "I":
                if len(tokens) != 11:
                    raise MalformedRecord(
                        "IMU record needs a timestamp and 9 matrix entries", line=line_no
                    )
                t = _parse_float(tokens[1], line_no, "timestamp")
                entries = [_parse_float(tok, line_no, "rotation entry")
                           for tok in tokens[2:]]
                try:
                    sample = ImuSample(t, np.array(entries).reshape(3, 3))
                except ValueError as err:
                    raise MalformedRecord(str(err), line=line_no) from None
                imu.append(sample)
            else:
                raise MalformedRecord(f"unknown record type {tag!r}", line=line_no)

    if not vertical and not horizontal:
        raise EmptyLog(f"{path} contains no scan records")
    for name, stream in (("vertical", vertical), ("horizontal", horizontal), ("imu", imu)):
        ts = [s.timestamp for s in stream]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise UnsortedTimestamps(f"{name} stream timestamps must strictly increase")
    first_scan_t = min(s.timestamp for s in vertical + horizontal)
    if not imu or imu[0].timestamp > first_scan_t:
        raise MalformedRecord("no IMU sample at or before the first scan")

    return ScanLog(
        vertical, horizontal, imu,
        header["angle_min"], header["angle_inc"], header["range_max"],
    )


def write_scan_log(path, log: ScanLog) -> None:
    """Serialize a ScanLog in the format parse_scan_log reads (lossless)."""
    records = (
        [("V", s.timestamp, s) for s in log.vertical]
        + [("H", s.timestamp, s) for s in log.horizontal]
        + [("I", s.timestamp, s) for s in log.imu]
    )
    # Stable interleave by time; stream order V < H < I on equal stamps.
    order = {"V": 0, "H": 1, "I": 2}
    records.sort(key=lambda r: (r[1], order[r[0]]))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# angle_min {log.angle_min!r}\n")
        fh.write(f"# angle_inc {log.angle_inc!r}\n")
        fh.write(f"# range_max {log.range_max!r}\n")
        for tag, t, rec in records:
            if tag == "I":
                vals = " ".join(repr(float(v)) for v in rec.rotation.ravel())
            else:
                vals = " ".join(repr(float(v)) for v in rec.ranges)
            fh.write(f"{tag} {t!r} {vals}\n")


def _nearest_sample(timestamps: np.ndarray, t: float) -> int:
    """Index of the time-nearest sample; earlier sample wins ties."""
    diffs = np.abs(timestamps - t)
    return int(np.argmin(diffs))


def _horizontal_to_global_2d(scan: LaserScan, rotation: np.ndarray) -> np.ndarray:
    """Horizontal-scan returns pre-rotated by the IMU attitude, x-y only."""
    ranges = scan.ranges[scan.valid]
    bearings = scan.bearings()[scan.valid]
    local = np.zeros((len(ranges), 3))
    local[:, 0] = -ranges * np.cos(bearings)
    local[:, 1] = -ranges * np.sin(bearings)
    return (local @ rotation.T)[:, :2]


def estimate_pose_track(log: ScanLog, icp_cfg: IcpConfig = IcpConfig()) -> PoseTrack:
    """Pose per vertical-scan timestamp: IMU rotation + chained 2D scan matching.

    Consecutive horizontal scans are pre-rotated by their IMU attitude and
    aligned translation-only; the increments accumulate into the horizontal
    translation (z stays 0). Each vertical scan takes the nearest IMU
    rotation and the translation accumulated at its nearest horizontal scan.

    Raises:
        IcpDiverged / InsufficientOverlap: from a scan pair, index attached.
    """
    if len(log.horizontal) < 2:
        raise ValueError("pose-track estimation needs at least 2 horizontal scans")
    if not log.imu:
        raise ValueError("pose-track estimation needs IMU samples")
    imu_ts = np.array([s.timestamp for s in log.imu])

    def imu_for(t: float) -> np.ndarray:
        return log.imu[_nearest_sample(imu_ts, t)].rotation

    h_ts = np.array([s.timestamp for s in log.horizontal])
    cumulative = np.zeros((len(log.horizontal), 2))
    prev_points = _horizontal_to_global_2d(log.horizontal[0], imu_for(h_ts[0]))
    cfg = locked(icp_cfg)
    for i in range(1, len(log.horizontal)):
        cur_points = _horizontal_to_global_2d(log.horizontal[i], imu_for(h_ts[i]))
        try:
            delta = icp_align_2d(
                cur_points, prev_points, RigidTransform2D.identity(), cfg
            )
        except (IcpDiverged, InsufficientOverlap) as err:
            raise type(err)(str(err), pair_index=i - 1) from err
        cumulative[i] = cumulative[i - 1] + delta.translation
        prev_points = cur_points

    entries = []
    for scan in log.vertical:
        rotation = imu_for(scan.timestamp)
        xy = cumulative[_nearest_sample(h_ts, scan.timestamp)]
        entries.append(
            (scan.timestamp, Pose(rotation, np.array([xy[0], xy[1], 0.0])))
        )
    return PoseTrack(entries)


def build_cloud(log: ScanLog, track: PoseTrack) -> PointCloud:
    """Map every valid vertical-scan return through its scan pose.

    Points masked invalid at parse time (no-returns, beyond the range limit)
    are dropped; the drop count is logged. Output points carry the vertical
    scan index as source tag.

    Raises:
        MissingPose: the track lacks a vertical-scan timestamp.
    """
    parts = []
    tags = []
    dropped = 0
    for scan_index, scan in enumerate(log.vertical):
        pose = track.pose_at(scan.timestamp)
        mask = scan.valid & (scan.ranges <= log.range_max)
        dropped += int(np.count_nonzero(~mask))
        if not mask.any():
            continue
        local = polar_to_local_arrays(scan.ranges[mask], scan.bearings()[mask])
        parts.append(pose.apply(local))
        tags.append(np.full(int(mask.sum()), scan_index, dtype=np.int64))
    if dropped:
        logger.info("build_cloud dropped %d invalid/out-of-range returns", dropped)
    if not parts:
        return PointCloud.empty()
    return PointCloud(np.vstack(parts), np.concatenate(tags))

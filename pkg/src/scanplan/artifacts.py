"""Artifact file formats: clouds, surfaces, clusters, flight plans, stations.

Cloud files are ASCII ``x y z [tag]`` lines under a 2-line header (count,
comment). Floats are written with repr so every file round-trips bit-exact;
two runs with the same seeds produce byte-identical artifacts.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .clustering import Cluster
from .errors import MalformedRecord, NonPlanarEdit, SelfIntersectingPolygon
from .geometry import PointCloud, Pose
from .planning import FlightPlan
from .polygons import polygon_is_simple, shoelace_area
from .segmentation import PlanarSurface, PlaneModel, project_to_plane

SCHEMA_VERSION = 1


def _fmt(value: float) -> str:
    return repr(float(value))


# --- point clouds -----------------------------------------------------------

def write_cloud(path, cloud: PointCloud, comment: str = "x y z [tag]") -> None:
    lines = [str(len(cloud)), f"# {comment}"]
    if cloud.sources is None:
        for p in cloud.points:
            lines.append(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}")
    else:
        for p, tag in zip(cloud.points, cloud.sources):
            lines.append(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])} {int(tag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_cloud(path) -> PointCloud:
    text = Path(path).read_text(encoding="ascii").splitlines()
    if len(text) < 2:
        raise MalformedRecord("cloud file needs a 2-line header")
    try:
        count = int(text[0].strip())
    except ValueError:
        raise MalformedRecord(f"bad point count {text[0]!r}", line=1) from None
    pts = []
    tags = []
    for line_no, line in enumerate(text[2:], start=3):
        if not line.strip():
            continue
        tokens = line.split()
        if len(tokens) not in (3, 4):
            raise MalformedRecord("expected 'x y z [tag]'", line=line_no)
        try:
            pts.append([float(tokens[0]), float(tokens[1]), float(tokens[2])])
        except ValueError:
            raise MalformedRecord("bad coordinate", line=line_no) from None
        if len(tokens) == 4:
            tags.append(int(tokens[3]))
    if len(pts) != count:
        raise MalformedRecord(
            f"header promises {count} points, file holds {len(pts)}"
        )
    if tags and len(tags) != len(pts):
        raise MalformedRecord("source tags must cover every point or none")
    cloud_pts = np.array(pts) if pts else np.zeros((0, 3))
    return PointCloud(cloud_pts, np.array(tags) if tags else None)


# --- surfaces ----------------------------------------------------------------

def surfaces_to_dict(surfaces: list[PlanarSurface]) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "planes": [
            {
                "normal": [s.model.a, s.model.b, s.model.c],
                "d": s.model.d,
                "boundary": [[float(c) for c in v] for v in s.boundary],
                "area": float(s.area),
                "inlier_count": int(len(s.inliers)),
            }
            for s in surfaces
        ],
    }


def surfaces_from_dict(data: dict) -> list[PlanarSurface]:
    surfaces = []
    for entry in data["planes"]:
        a, b, c = entry["normal"]
        model = PlaneModel(float(a), float(b), float(c), float(entry["d"]))
        boundary = np.array(entry["boundary"], dtype=float)
        # Inlier indices are not part of the schema; file-loaded surfaces
        # carry an empty set and remain fully usable for planning.
        surfaces.append(
            PlanarSurface(model, np.zeros(0, dtype=np.int64), boundary,
                          float(entry["area"]))
        )
    return surfaces


def write_surfaces(path, surfaces: list[PlanarSurface]) -> None:
    _write_json(path, surfaces_to_dict(surfaces))


def read_surfaces(path) -> list[PlanarSurface]:
    return surfaces_from_dict(json.loads(Path(path).read_text(encoding="ascii")))


# --- clusters ------------------------------------------------------------------

def clusters_to_dict(clusters: list[Cluster], cloud: PointCloud) -> dict:
    entries = []
    for c in clusters:
        pts = cloud.points[c.indices]
        entries.append({
            "indices": [int(i) for i in c.indices],
            "bbox_min": [float(v) for v in pts.min(axis=0)],
            "bbox_max": [float(v) for v in pts.max(axis=0)],
        })
    return {"version": SCHEMA_VERSION, "clusters": entries}


def write_clusters(path, clusters: list[Cluster], cloud: PointCloud) -> None:
    _write_json(path, clusters_to_dict(clusters, cloud))


# --- flight plans ----------------------------------------------------------------

def plan_to_dict(plan: FlightPlan) -> dict:
    return {
        "stop_points": [
            {
                "position": [float(v) for v in s.position],
                "facing": [float(v) for v in s.facing],
                "row": s.row,
                "col": s.col,
            }
            for s in plan.stops
        ],
        "waypoints": [[float(v) for v in w] for w in plan.waypoints],
        "leg_costs": [float(c) for c in plan.leg_costs],
    }


def plans_to_dict(entries: list[dict]) -> dict:
    """Per-surface plan entries; failed surfaces carry status + error."""
    return {"version": SCHEMA_VERSION, "plans": entries}


def write_plans(path, entries: list[dict]) -> None:
    _write_json(path, plans_to_dict(entries))


def write_waypoints_csv(path, plan: FlightPlan) -> None:
    lines = [f"{_fmt(w[0])},{_fmt(w[1])},{_fmt(w[2])}" for w in plan.waypoints]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


# --- stations (multi-cloud registration input) ------------------------------------

def read_stations(path) -> list[tuple[str, Pose]]:
    """JSON list of {cloud: path, rotation: 3x3, translation: [x,y,z]}."""
    data = json.loads(Path(path).read_text(encoding="ascii"))
    stations = []
    for entry in data["stations"]:
        pose = Pose(np.array(entry["rotation"], dtype=float),
                    np.array(entry["translation"], dtype=float))
        stations.append((entry["cloud"], pose))
    return stations


def write_stations(path, entries: list[tuple[str, Pose]]) -> None:
    data = {
        "version": SCHEMA_VERSION,
        "stations": [
            {
                "cloud": str(name),
                "rotation": [[float(v) for v in row] for row in pose.rotation],
                "translation": [float(v) for v in pose.translation],
            }
            for name, pose in entries
        ],
    }
    _write_json(path, data)


# --- operator boundary editing -------------------------------------------------------

def export_boundary(surface: PlanarSurface, path) -> None:
    """Write one surface's plane + boundary for manual polygon edits."""
    data = {
        "version": SCHEMA_VERSION,
        "normal": [surface.model.a, surface.model.b, surface.model.c],
        "d": surface.model.d,
        "boundary": [[float(c) for c in v] for v in surface.boundary],
    }
    _write_json(path, data)


def import_boundary(
    surface: PlanarSurface, path, distance_threshold: float = 0.20
) -> PlanarSurface:
    """Replace a surface's boundary with the (possibly edited) polygon on file.

    The polygon must be simple and its vertices must lie on the surface's
    plane within ``distance_threshold``. Convexity is not required; the area
    is recomputed by the shoelace rule in the plane basis.

    Raises:
        SelfIntersectingPolygon, NonPlanarEdit.
    """
    data = json.loads(Path(path).read_text(encoding="ascii"))
    boundary = np.array(data["boundary"], dtype=float)
    if boundary.ndim != 2 or boundary.shape[1] != 3 or len(boundary) < 3:
        raise NonPlanarEdit("boundary must be at least 3 points of 3 coordinates")
    dists = surface.model.distance(boundary)
    if float(dists.max()) > distance_threshold:
        raise NonPlanarEdit(
            f"vertex {float(dists.max()):.3f} m off the plane exceeds the "
            f"{distance_threshold:.3f} m threshold"
        )
    coords, _ = project_to_plane(boundary, surface.model)
    if not polygon_is_simple(coords):
        raise SelfIntersectingPolygon("edited boundary intersects itself")
    area = abs(shoelace_area(coords))
    return PlanarSurface(surface.model, surface.inliers, boundary, area)


def _write_json(path, data: dict) -> None:
    Path(path).write_text(
        json.dumps(data, indent=1, sort_keys=True) + "\n", encoding="ascii"
    )

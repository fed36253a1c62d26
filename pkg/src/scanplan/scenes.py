"""Synthetic scene primitives and deterministic point-cloud sampling.

Scenes are built from a handful of primitives (point, segment, rectangle,
box, crossed-planes composite). Sampling is seeded and applies Gaussian
noise along each primitive's surface normal; points and segments have no
normal and stay noise-free so degenerate-geometry behavior is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import PointCloud


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero-length direction")
    return v / n


def _plane_axes(normal: np.ndarray, u_dir=None) -> tuple[np.ndarray, np.ndarray]:
    n = _unit(normal)
    if u_dir is None:
        e = np.zeros(3)
        e[int(np.argmin(np.abs(n)))] = 1.0
        u = e - (e @ n) * n
    else:
        u = np.asarray(u_dir, dtype=float)
        u = u - (u @ n) * n
    return _unit(u), np.cross(n, _unit(u))


@dataclass(frozen=True)
class PointPrimitive:
    position: tuple

    def sample(self, density, sigma, rng) -> np.ndarray:
        return np.asarray(self.position, dtype=float).reshape(1, 3)


@dataclass(frozen=True)
class SegmentPrimitive:
    start: tuple
    end: tuple

    def sample(self, density, sigma, rng) -> np.ndarray:
        a = np.asarray(self.start, dtype=float)
        b = np.asarray(self.end, dtype=float)
        # Linear density follows from the areal one: sqrt(density) points/m.
        n = max(2, round(math.sqrt(density) * float(np.linalg.norm(b - a))))
        ts = np.linspace(0.0, 1.0, n)
        return a + np.outer(ts, b - a)


@dataclass(frozen=True)
class RectanglePrimitive:
    """Planar patch: center, outward normal, width along u, height along v."""

    center: tuple
    normal: tuple
    width: float
    height: float
    u_dir: tuple | None = None

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        u, v = _plane_axes(np.asarray(self.normal, float), self.u_dir)
        return u, v, _unit(self.normal)

    def sample(self, density, sigma, rng) -> np.ndarray:
        u, v, n = self.axes()
        count = max(1, round(density * self.width * self.height))
        us = rng.uniform(-self.width / 2.0, self.width / 2.0, count)
        vs = rng.uniform(-self.height / 2.0, self.height / 2.0, count)
        pts = np.asarray(self.center, float) + np.outer(us, u) + np.outer(vs, v)
        if sigma > 0:
            pts = pts + np.outer(rng.normal(0.0, sigma, count), n)
        return pts


@dataclass(frozen=True)
class BoxPrimitive:
    """Axis-aligned hollow box sampled on its 6 faces."""

    center: tuple
    size: tuple

    def faces(self) -> list[RectanglePrimitive]:
        c = np.asarray(self.center, dtype=float)
        sx, sy, sz = np.asarray(self.size, dtype=float)
        return [
            RectanglePrimitive(tuple(c + [sx / 2, 0, 0]), (1, 0, 0), sy, sz),
            RectanglePrimitive(tuple(c - [sx / 2, 0, 0]), (-1, 0, 0), sy, sz),
            RectanglePrimitive(tuple(c + [0, sy / 2, 0]), (0, 1, 0), sz, sx),
            RectanglePrimitive(tuple(c - [0, sy / 2, 0]), (0, -1, 0), sz, sx),
            RectanglePrimitive(tuple(c + [0, 0, sz / 2]), (0, 0, 1), sx, sy),
            RectanglePrimitive(tuple(c - [0, 0, sz / 2]), (0, 0, -1), sx, sy),
        ]

    def sample(self, density, sigma, rng) -> np.ndarray:
        return np.vstack([f.sample(density, sigma, rng) for f in self.faces()])


@dataclass(frozen=True)
class CrossedPlanesPrimitive:
    """A cube with two large sheets crossing through its center.

    The sheets extend well past the cube faces, so standoff positions in
    front of every face are obstructed. ``span`` scales the sheet extent in
    cube edges.
    """

    center: tuple
    edge: float
    span: float = 3.0

    def parts(self) -> list:
        c = np.asarray(self.center, dtype=float)
        reach = self.span * self.edge
        return [
            BoxPrimitive(tuple(c), (self.edge, self.edge, self.edge)),
            RectanglePrimitive(tuple(c), (0, 1, 0), reach, reach),
            RectanglePrimitive(tuple(c), (1, 0, 0), reach, reach),
        ]

    def sample(self, density, sigma, rng) -> np.ndarray:
        return np.vstack([p.sample(density, sigma, rng) for p in self.parts()])


@dataclass(frozen=True)
class SceneSpec:
    """Primitives plus areal sampling density (points/m^2) and noise sigma (m)."""

    primitives: tuple
    density: float = 100.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError("density must be > 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        object.__setattr__(self, "primitives", tuple(self.primitives))


def generate_scene(spec: SceneSpec, seed: int = 0) -> PointCloud:
    """Deterministically sample a scene; same spec and seed, same cloud."""
    rng = np.random.default_rng(seed)
    parts = [p.sample(spec.density, spec.noise_sigma, rng) for p in spec.primitives]
    if not parts:
        return PointCloud.empty()
    return PointCloud(np.vstack(parts))


def preset_scene(name: str, density: float = 100.0, noise_sigma: float = 0.0) -> SceneSpec:
    """Built-in scenes used by the behavior tests and the demos.

    Names: point, line, surface, cube, crossed_planes, deck, room.
    """
    if name == "point":
        prims = (PointPrimitive((2.0, 0.5, 1.0)),)
    elif name == "line":
        prims = (SegmentPrimitive((-1.5, 2.0, 0.0), (1.5, 2.0, 3.0)),)
    elif name == "surface":
        prims = (RectanglePrimitive((0.0, 3.0, 1.5), (0, -1, 0), 4.0, 3.0),)
    elif name == "cube":
        prims = (BoxPrimitive((0.0, 0.0, 0.0), (2.0, 2.0, 2.0)),)
    elif name == "crossed_planes":
        prims = (CrossedPlanesPrimitive((0.0, 0.0, 0.0), 2.0),)
    elif name == "deck":
        prims = (RectanglePrimitive((11.0, 5.0, 0.0), (0, 0, 1), 22.0, 10.0,
                                    u_dir=(1, 0, 0)),)
    elif name == "room":
        # Four walls of an 8 x 8 m room, 3 m tall, around the origin.
        prims = (
            RectanglePrimitive((4.0, 0.0, 1.5), (-1, 0, 0), 8.0, 3.0),
            RectanglePrimitive((-4.0, 0.0, 1.5), (1, 0, 0), 8.0, 3.0),
            RectanglePrimitive((0.0, 4.0, 1.5), (0, -1, 0), 8.0, 3.0),
            RectanglePrimitive((0.0, -4.0, 1.5), (0, 1, 0), 8.0, 3.0),
        )
    else:
        raise ValueError(f"unknown preset scene {name!r}")
    return SceneSpec(prims, density=density, noise_sigma=noise_sigma)


def scene_to_dict(spec: SceneSpec) -> dict:
    prims = []
    for p in spec.primitives:
        if isinstance(p, PointPrimitive):
            prims.append({"type": "point", "position": list(map(float, p.position))})
        elif isinstance(p, SegmentPrimitive):
            prims.append({"type": "segment",
                          "start": list(map(float, p.start)),
                          "end": list(map(float, p.end))})
        elif isinstance(p, RectanglePrimitive):
            d = {"type": "rectangle",
                 "center": list(map(float, p.center)),
                 "normal": list(map(float, p.normal)),
                 "width": p.width, "height": p.height}
            if p.u_dir is not None:
                d["u_dir"] = list(map(float, p.u_dir))
            prims.append(d)
        elif isinstance(p, BoxPrimitive):
            prims.append({"type": "box",
                          "center": list(map(float, p.center)),
                          "size": list(map(float, p.size))})
        elif isinstance(p, CrossedPlanesPrimitive):
            prims.append({"type": "crossed_planes",
                          "center": list(map(float, p.center)),
                          "edge": p.edge, "span": p.span})
        else:
            raise TypeError(f"unknown primitive {type(p).__name__}")
    return {"version": 1, "density": spec.density,
            "noise_sigma": spec.noise_sigma, "primitives": prims}


def scene_from_dict(data: dict) -> SceneSpec:
    prims = []
    for d in data["primitives"]:
        kind = d["type"]
        if kind == "point":
            prims.append(PointPrimitive(tuple(d["position"])))
        elif kind == "segment":
            prims.append(SegmentPrimitive(tuple(d["start"]), tuple(d["end"])))
        elif kind == "rectangle":
            prims.append(RectanglePrimitive(
                tuple(d["center"]), tuple(d["normal"]),
                float(d["width"]), float(d["height"]),
                tuple(d["u_dir"]) if "u_dir" in d else None,
            ))
        elif kind == "box":
            prims.append(BoxPrimitive(tuple(d["center"]), tuple(d["size"])))
        elif kind == "crossed_planes":
            prims.append(CrossedPlanesPrimitive(
                tuple(d["center"]), float(d["edge"]), float(d.get("span", 3.0))
            ))
        else:
            raise ValueError(f"unknown primitive type {kind!r}")
    return SceneSpec(tuple(prims),
                     density=float(data.get("density", 100.0)),
                     noise_sigma=float(data.get("noise_sigma", 0.0)))

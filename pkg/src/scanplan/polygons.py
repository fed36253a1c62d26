"""Planar polygon predicates shared by segmentation, planning and editing."""

from __future__ import annotations

import numpy as np


def shoelace_area(polygon: np.ndarray) -> float:
    """Signed area of a simple polygon given as (K, 2) vertices in order."""
    p = np.asarray(polygon, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_in_polygon(point: np.ndarray, polygon: np.ndarray) -> bool:
    """Even-odd membership test; boundary points count as inside.

    Works for any simple polygon, convex or not, so manually edited
    boundaries need no special casing.
    """
    x, y = float(point[0]), float(point[1])
    p = np.asarray(polygon, dtype=float)
    n = len(p)
    inside = False
    for i in range(n):
        x1, y1 = p[i]
        x2, y2 = p[(i + 1) % n]
        # On-edge check (within a tiny band) counts as inside.
        if _on_segment(x, y, x1, y1, x2, y2):
            return True
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside


def _on_segment(x, y, x1, y1, x2, y2, tol=1e-12) -> bool:
    cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
    seg2 = (x2 - x1) ** 2 + (y2 - y1) ** 2
    if cross * cross > tol * max(seg2, tol):
        return False
    dot = (x - x1) * (x2 - x1) + (y - y1) * (y2 - y1)
    return -tol <= dot <= seg2 + tol


def segments_intersect(a0, a1, b0, b1) -> bool:
    """True when closed segments a0-a1 and b0-b1 share a point."""
    def orient(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        if v > 0:
            return 1
        if v < 0:
            return -1
        return 0

    def on_seg(p, q, r):
        return (
            min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
            and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])
        )

    o1 = orient(a0, a1, b0)
    o2 = orient(a0, a1, b1)
    o3 = orient(b0, b1, a0)
    o4 = orient(b0, b1, a1)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_seg(a0, a1, b0):
        return True
    if o2 == 0 and on_seg(a0, a1, b1):
        return True
    if o3 == 0 and on_seg(b0, b1, a0):
        return True
    if o4 == 0 and on_seg(b0, b1, a1):
        return True
    return False


def polygon_is_simple(polygon: np.ndarray) -> bool:
    """True when no two non-adjacent edges intersect."""
    p = np.asarray(polygon, dtype=float)
    n = len(p)
    if n < 3:
        return False
    edges = [(p[i], p[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if segments_intersect(edges[i][0], edges[i][1], edges[j][0], edges[j][1]):
                return False
    return True


def rect_intersects_polygon(
    rect_min: np.ndarray, rect_max: np.ndarray, polygon: np.ndarray
) -> bool:
    """True when the axis-aligned rectangle and the polygon share any point."""
    p = np.asarray(polygon, dtype=float)
    xmin, ymin = rect_min
    xmax, ymax = rect_max
    if np.any((p[:, 0] >= xmin) & (p[:, 0] <= xmax)
              & (p[:, 1] >= ymin) & (p[:, 1] <= ymax)):
        return True
    corners = [(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)]
    if any(point_in_polygon(np.array(c), p) for c in corners):
        return True
    rect_edges = [
        (corners[0], corners[1]),
        (corners[1], corners[2]),
        (corners[2], corners[3]),
        (corners[3], corners[0]),
    ]
    n = len(p)
    for i in range(n):
        e0, e1 = p[i], p[(i + 1) % n]
        for r0, r1 in rect_edges:
            if segments_intersect(e0, e1, r0, r1):
                return True
    return False

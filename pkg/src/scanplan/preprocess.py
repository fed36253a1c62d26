"""Outlier filtering and voxel-grid density equalization.

Sparse outliers get trimmed by comparing each point's mean distance to its
k nearest neighbors against the global mean of those statistics; density is
equalized by replacing every occupied voxel with the centroid of its points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CloudTooSmall
from .geometry import PointCloud
from .spatial import KdTree


@dataclass(frozen=True)
class OutlierFilterConfig:
    """k_neighbors nearest points per sample; keep band is mu +- d_t * sigma."""

    k_neighbors: int = 50
    d_t: float = 1.0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if not self.d_t > 0:
            raise ValueError("d_t must be > 0")


@dataclass(frozen=True)
class VoxelGridConfig:
    leaf_size: float = 0.05

    def __post_init__(self):
        if not self.leaf_size > 0:
            raise ValueError("leaf_size must be > 0")


def neighbor_mean_distances(cloud: PointCloud, k_neighbors: int) -> np.ndarray:
    """Per point, the mean distance to its k nearest neighbors (self excluded)."""
    if len(cloud) <= k_neighbors:
        raise CloudTooSmall(
            f"cloud of {len(cloud)} points cannot supply {k_neighbors} neighbors"
        )
    tree = KdTree(cloud.points)
    # k+1 because the closest hit of each query is the point itself.
    _, dists = tree.knearest(cloud.points, k=k_neighbors + 1)
    return dists[:, 1:].mean(axis=1)


def remove_statistical_outliers(
    cloud: PointCloud, cfg: OutlierFilterConfig = OutlierFilterConfig()
) -> tuple[PointCloud, int]:
    """Drop points whose neighborhood mean distance sits outside mu +- d_t * sigma.

    sigma is the population standard deviation of the per-point means; the
    keep interval is closed, so with sigma = 0 every point whose mean equals
    mu survives.

    Returns:
        (kept cloud, number of removed points).

    Raises:
        CloudTooSmall: not enough points to gather k neighbors.
    """
    means = neighbor_mean_distances(cloud, cfg.k_neighbors)
    mu = float(means.mean())
    sigma = float(means.std())
    keep = (means >= mu - cfg.d_t * sigma) & (means <= mu + cfg.d_t * sigma)
    kept = cloud.select(np.nonzero(keep)[0])
    return kept, int(len(cloud) - len(kept))


def voxel_downsample(
    cloud: PointCloud,
    cfg: VoxelGridConfig = VoxelGridConfig(),
    anchor: np.ndarray | None = None,
) -> PointCloud:
    """Replace each occupied voxel by the centroid of its points.

    The grid is anchored at the cloud's minimum corner unless ``anchor`` is
    given (a fixed anchor makes repeated application idempotent). Output is
    ordered by voxel index, so the result is deterministic and independent
    of input order. Source tags are dropped because points merge.
    """
    if len(cloud) == 0:
        return PointCloud.empty()
    pts = cloud.points
    origin = pts.min(axis=0) if anchor is None else np.asarray(anchor, dtype=float)
    idx = np.floor((pts - origin) / cfg.leaf_size).astype(np.int64)

    order = np.lexsort((idx[:, 2], idx[:, 1], idx[:, 0]))
    idx_sorted = idx[order]
    pts_sorted = pts[order]
    boundaries = np.nonzero(np.any(np.diff(idx_sorted, axis=0) != 0, axis=1))[0] + 1
    groups = np.split(np.arange(len(pts_sorted)), boundaries)
    centroids = np.array([pts_sorted[g].mean(axis=0) for g in groups])
    return PointCloud(centroids)

"""
Euclidean projection onto boxes, balls and halfspace intersections.
"""
from __future__ import annotations

import numpy as np

from .problem import ConvexRegionSpec

__all__ = ["Projector", "ProjectionError", "project", "contains", "sample"]

DYKSTRA_TOL = 1e-12
DYKSTRA_MAX_SWEEPS = 10_000
FEAS_TOL = 1e-15


class ProjectionError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3g})")
        self.residual = residual


def _halfspace_violation(region, v):
    return np.max(region.normals @ v - region.offsets, initial=-np.inf)


def _normalized_violation(region, v):
    scale = np.linalg.norm(region.normals, axis=1)
    return np.max((region.normals @ v - region.offsets) / scale, initial=-np.inf)


def _dykstra(region, v):
    normals, offsets = region.normals, region.offsets
    sq = np.einsum("ij,ij->i", normals, normals)
    x = v.copy()
    increments = np.zeros((len(offsets), v.size))
    change = np.inf
    for _ in range(DYKSTRA_MAX_SWEEPS):
        x_start = x.copy()
        for i in range(len(offsets)):
            y = x + increments[i]
            excess = normals[i] @ y - offsets[i]
            x_new = y - (max(excess, 0.0) / sq[i]) * normals[i]
            increments[i] = y - x_new
            x = x_new
        change = np.linalg.norm(x - x_start)
        scale = 1.0 + np.linalg.norm(x)
        # the sweep change alone can stop a hair outside the region, where a
        # second projection would move the point again
        if change <= DYKSTRA_TOL * scale and _normalized_violation(region, x) <= FEAS_TOL * scale:
            return x
    raise ProjectionError(f"Dykstra projection did not converge in {DYKSTRA_MAX_SWEEPS} sweeps",
                          max(change, _halfspace_violation(region, x)))


class Projector:
    """Nearest-point map onto a convex region."""

    def __init__(self, region: ConvexRegionSpec):
        self.region = region

    @property
    def dimension(self):
        return self.region.dimension

    def _check(self, v):
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if v.shape != (self.region.dimension,):
            raise ValueError(f"vector has shape {v.shape}, region dimension is {self.region.dimension}")
        return v

    def project(self, v) -> np.ndarray:
        v = self._check(v)
        r = self.region
        if r.kind == "box":
            return np.clip(v, r.lower, r.upper)
        if r.kind == "ball":
            offset = v - r.center
            dist = np.linalg.norm(offset)
            if dist <= r.radius:
                return v.copy()
            return r.center + offset * (r.radius / dist)
        if _halfspace_violation(r, v) <= 0.0:
            return v.copy()
        return _dykstra(r, v)

    def contains(self, v, tol: float = 1e-9) -> bool:
        v = self._check(v)
        r = self.region
        if r.kind == "box":
            return bool(np.all(v >= r.lower - tol) and np.all(v <= r.upper + tol))
        if r.kind == "ball":
            return bool(np.linalg.norm(v - r.center) <= r.radius + tol)
        scale = np.linalg.norm(r.normals, axis=1)
        return bool(np.all((r.normals @ v - r.offsets) / scale <= tol))


def project(pr: Projector, v) -> np.ndarray:
    return pr.project(v)


def contains(pr: Projector, v, tol: float = 1e-9) -> bool:
    return pr.contains(v, tol)


def sample(region: ConvexRegionSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random points of ``region``, shape ``(count, dimension)``.

    Uniform for boxes and balls; halfspace intersections get projected
    Gaussian points around the projection of the origin.
    """
    d = region.dimension
    if region.kind == "box":
        return rng.uniform(region.lower, region.upper, size=(count, d))
    if region.kind == "ball":
        directions = rng.standard_normal((count, d))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = region.radius * rng.uniform(size=(count, 1)) ** (1.0 / d)
        return region.center + radii * directions
    pr = Projector(region)
    anchor = pr.project(np.zeros(d))
    return np.array([pr.project(anchor + rng.standard_normal(d)) for _ in range(count)])

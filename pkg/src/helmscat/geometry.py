"""Annular computational domain and collocation point generation.

The domain is the annulus between a circular obstacle of radius ``a`` and the
artificial boundary circle of radius ``R`` (both centered at the origin).
Three point families are produced: a polar tensor grid strictly inside the
annulus, obstacle-boundary points with their outward unit normals (pointing
from the obstacle into the annulus), and artificial-boundary points at
exactly uniform angles, as required by the spectral quadrature of the
boundary operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AnnulusDomain:
    obstacle_radius: float
    tbc_radius: float

    def __post_init__(self):
        a, R = self.obstacle_radius, self.tbc_radius
        if not (0.0 < a < R) or not np.isfinite(a) or not np.isfinite(R):
            raise ValueError(
                f"invalid annulus: need 0 < obstacle_radius < tbc_radius, "
                f"got a={a}, R={R}"
            )


@dataclass(frozen=True)
class CollocationSet:
    """Immutable point families; arrays are row-per-point, shape (n, 2)."""

    interior: np.ndarray
    obstacle_points: np.ndarray
    obstacle_normals: np.ndarray
    tbc_points: np.ndarray
    tbc_angles: np.ndarray

    @property
    def n_interior(self) -> int:
        return self.interior.shape[0]

    @property
    def n_obstacle(self) -> int:
        return self.obstacle_points.shape[0]

    @property
    def n_tbc(self) -> int:
        return self.tbc_points.shape[0]

    def all_points(self) -> np.ndarray:
        """Interior, obstacle and artificial-boundary points stacked in
        canonical order (the order every loss and design matrix uses)."""
        return np.concatenate([self.interior, self.obstacle_points, self.tbc_points])


def _uniform_angles(count: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(count) / count


def generate_collocation(
    domain: AnnulusDomain,
    n_radial: int,
    n_angular: int,
    n_obstacle: int,
    n_tbc: int,
) -> CollocationSet:
    """Deterministic collocation families on the annulus.

    Interior points form a polar tensor grid: ``n_radial`` cell-midpoint
    radii in (a, R) times ``n_angular`` uniform angles, so no interior point
    ever touches either boundary. Obstacle and artificial-boundary points
    sit at exactly uniform angles; the latter set doubles as the quadrature
    grid of the boundary operator.
    """
    counts = {
        "n_radial": (n_radial, 2),
        "n_angular": (n_angular, 4),
        "n_obstacle": (n_obstacle, 4),
        "n_tbc": (n_tbc, 4),
    }
    for name, (value, minimum) in counts.items():
        if value != int(value) or value < minimum:
            raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")

    a, R = domain.obstacle_radius, domain.tbc_radius
    radii = a + (R - a) * (np.arange(n_radial) + 0.5) / n_radial
    theta = _uniform_angles(n_angular)
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    interior = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])

    phi = _uniform_angles(n_obstacle)
    normals = np.column_stack([np.cos(phi), np.sin(phi)])
    obstacle = a * normals

    psi = _uniform_angles(n_tbc)
    tbc = R * np.column_stack([np.cos(psi), np.sin(psi)])

    return CollocationSet(
        interior=interior,
        obstacle_points=obstacle,
        obstacle_normals=normals,
        tbc_points=tbc,
        tbc_angles=psi,
    )

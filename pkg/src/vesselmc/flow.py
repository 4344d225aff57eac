"""Axial velocity fields: uniform, analytic laminar, and cell-discretized laminar.

The laminar profile is v(r) = v_max * (1 - (r/R)^2), clamped at zero in the
prism corners where r exceeds the inscribed radius R. Velocity is purely
axial; there are no secondary flows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .geometry import Domain, VesselKind, VesselSpec, radial_distance

# Cross-sectional sub-prism counts for the built-in vessel classes.
PRESET_CELL_COUNTS: dict[VesselKind, int] = {
    VesselKind.CAPILLARY: 81,
    VesselKind.VENULE: 200,
    VesselKind.ARTERIOLE: 300,
}


@dataclass(frozen=True)
class Uniform:
    """Single axial speed v [m/s] everywhere in the domain."""

    v: float

    def __post_init__(self) -> None:
        if self.v < 0:
            raise ValueError(f"uniform speed must be >= 0, got {self.v}")


@dataclass(frozen=True)
class LaminarAnalytic:
    """Parabolic profile with centerline speed v_max [m/s] and radius R [m]."""

    v_max: float
    R: float

    def __post_init__(self) -> None:
        if self.v_max < 0:
            raise ValueError(f"v_max must be >= 0, got {self.v_max}")
        if self.R <= 0:
            raise ValueError(f"R must be > 0, got {self.R}")


@dataclass(frozen=True)
class VelocityGrid:
    """Cross-sectional tiling of the prism into n_y x n_z rectangular cells.

    Cells span the full axial length. speeds[iy, iz] holds the clamped
    analytic speed at the cell center. half_width is D/2 of the owning
    vessel; v_max and R are kept for reference.
    """

    n_y: int
    n_z: int
    half_width: float
    v_max: float
    R: float
    speeds: np.ndarray

    @property
    def cell_count(self) -> int:
        return self.n_y * self.n_z

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Center coordinates along y and z [m]."""
        dy = 2.0 * self.half_width / self.n_y
        dz = 2.0 * self.half_width / self.n_z
        ys = -self.half_width + dy * (np.arange(self.n_y) + 0.5)
        zs = -self.half_width + dz * (np.arange(self.n_z) + 0.5)
        return ys, zs


@dataclass(frozen=True)
class LaminarDiscretized:
    grid: VelocityGrid


FlowModel = Union[Uniform, LaminarAnalytic, LaminarDiscretized]


def most_square_factors(count: int) -> tuple[int, int]:
    """Factor count into (n_y, n_z) with n_y <= n_z minimizing aspect skew.

    n_y is the largest divisor of count not exceeding sqrt(count), so the
    requested cell count is honored exactly.
    """
    if count < 1:
        raise ValueError(f"cell count must be >= 1, got {count}")
    n_y = 1
    for d in range(1, int(math.isqrt(count)) + 1):
        if count % d == 0:
            n_y = d
    return n_y, count // n_y


def discretize(v_max: float, vessel: VesselSpec, cell_count: int) -> VelocityGrid:
    """Tile the cross-section into cell_count sub-prisms carrying center speeds."""
    if cell_count < 1:
        raise ValueError(f"cell count must be >= 1, got {cell_count}")
    n_y, n_z = most_square_factors(cell_count)
    hw = 0.5 * vessel.diameter_D
    R = vessel.radius
    dy = vessel.diameter_D / n_y
    dz = vessel.diameter_D / n_z
    ys = -hw + dy * (np.arange(n_y) + 0.5)
    zs = -hw + dz * (np.arange(n_z) + 0.5)
    r2 = ys[:, None] ** 2 + zs[None, :] ** 2
    speeds = np.maximum(0.0, v_max * (1.0 - r2 / (R * R)))
    return VelocityGrid(
        n_y=n_y, n_z=n_z, half_width=hw, v_max=v_max, R=R, speeds=speeds
    )


def _grid_lookup(grid: VelocityGrid, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    dy = 2.0 * grid.half_width / grid.n_y
    dz = 2.0 * grid.half_width / grid.n_z
    iy = np.clip(((y + grid.half_width) / dy).astype(int), 0, grid.n_y - 1)
    iz = np.clip(((z + grid.half_width) / dz).astype(int), 0, grid.n_z - 1)
    return grid.speeds[iy, iz]


def speed_at(flow: FlowModel, position: np.ndarray) -> np.ndarray | float:
    """Axial speed [m/s] at a position, without domain checking.

    Accepts a single (3,) position or an (..., 3) array.
    """
    p = np.asarray(position, dtype=float)
    if isinstance(flow, Uniform):
        out = np.broadcast_to(np.float64(flow.v), p[..., 0].shape)
        return float(flow.v) if p.ndim == 1 else np.array(out)
    if isinstance(flow, LaminarAnalytic):
        r2 = p[..., 1] ** 2 + p[..., 2] ** 2
        v = np.maximum(0.0, flow.v_max * (1.0 - r2 / (flow.R * flow.R)))
        return float(v) if v.ndim == 0 else v
    if isinstance(flow, LaminarDiscretized):
        v = _grid_lookup(flow.grid, np.atleast_1d(p[..., 1]), np.atleast_1d(p[..., 2]))
        return float(v[0]) if p.ndim == 1 else v.reshape(p[..., 0].shape)
    raise TypeError(f"unknown flow model {flow!r}")


def velocity_at(flow: FlowModel, position: np.ndarray, domain: Domain) -> float:
    """Axial speed [m/s] at a position inside the domain.

    Raises ValueError if the position lies outside the prism.
    """
    if not np.all(domain.contains(position)):
        raise ValueError(f"position {position!r} outside domain")
    v = speed_at(flow, position)
    return v


def mean_axial_speed(flow: FlowModel, vessel: VesselSpec) -> float:
    """Cross-sectional average axial speed [m/s].

    Uniform: v. LaminarAnalytic: v_max/2, the exact average of the parabolic
    profile over the inscribed disc. LaminarDiscretized: the average over
    cells whose centers lie inside the inscribed disc, where the profile is
    positive (corner cells sit in the clamped dead zone and are excluded so
    the discretized average converges to the analytic one).
    """
    if isinstance(flow, Uniform):
        return flow.v
    if isinstance(flow, LaminarAnalytic):
        return 0.5 * flow.v_max
    if isinstance(flow, LaminarDiscretized):
        grid = flow.grid
        ys, zs = grid.cell_centers()
        r2 = ys[:, None] ** 2 + zs[None, :] ** 2
        inside = r2 < grid.R * grid.R
        if not np.any(inside):
            return float(np.mean(grid.speeds))
        return float(np.mean(grid.speeds[inside]))
    raise TypeError(f"unknown flow model {flow!r}")

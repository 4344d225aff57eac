"""Vessel geometry: the simulation domain and its region labels.

A vessel segment is modeled as a rectangular prism. The x axis runs along the
vessel (flow direction), y and z span the square cross-section, centered on
the axis. All lengths are SI meters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# Near-wall band thickness as a fraction of vessel diameter.
NEAR_WALL_FRACTION = 0.1


class VesselKind(str, enum.Enum):
    CAPILLARY = "capillary"
    VENULE = "venule"
    ARTERIOLE = "arteriole"
    CUSTOM = "custom"


class RegionLabel(str, enum.Enum):
    CORE = "core"
    NEAR_WALL = "near_wall"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class VesselSpec:
    """Geometry and peak velocity of one microvessel segment.

    diameter_D: cross-section side length [m]
    length_L:   axial extent [m]
    v_max:      centerline speed [m/s]
    """

    kind: VesselKind
    diameter_D: float
    length_L: float
    v_max: float
    # Band thickness as a fraction of D. 0.1 reads the near-wall region as a
    # 10% thickness; 0.02566 approximates a 10% cross-section-area reading.
    near_wall_fraction: float = NEAR_WALL_FRACTION

    def __post_init__(self) -> None:
        if self.diameter_D <= 0 or self.length_L <= 0 or self.v_max <= 0:
            raise ValueError(
                "vessel dimensions and peak velocity must be positive, got "
                f"D={self.diameter_D}, L={self.length_L}, v_max={self.v_max}"
            )
        if not 0.0 < self.near_wall_fraction < 0.5:
            raise ValueError(
                "near_wall_fraction must lie in (0, 0.5), got "
                f"{self.near_wall_fraction}"
            )

    @property
    def radius(self) -> float:
        """Inscribed-cylinder radius R = D/2 [m]."""
        return 0.5 * self.diameter_D

    @property
    def delta(self) -> float:
        """Near-wall band thickness near_wall_fraction*D [m]."""
        return self.near_wall_fraction * self.diameter_D

    def domain(self) -> "Domain":
        return Domain(length_L=self.length_L, half_width=0.5 * self.diameter_D)


@dataclass(frozen=True)
class Domain:
    """Rectangular prism x in [0, L], y and z in [-half_width, +half_width]."""

    length_L: float
    half_width: float

    @property
    def extent(self) -> tuple[float, float, float]:
        """(L, H, W) with H = W = 2*half_width [m]."""
        return (self.length_L, 2.0 * self.half_width, 2.0 * self.half_width)

    def contains(self, position: np.ndarray) -> np.ndarray | bool:
        """True where position lies inside the prism (faces inclusive)."""
        p = np.asarray(position, dtype=float)
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        inside = (
            (x >= 0.0)
            & (x <= self.length_L)
            & (np.abs(y) <= self.half_width)
            & (np.abs(z) <= self.half_width)
        )
        return bool(inside) if inside.ndim == 0 else inside


# Representative values per vessel class: (D, L, v_max).
_PRESETS: dict[VesselKind, tuple[float, float, float]] = {
    VesselKind.CAPILLARY: (9e-6, 90e-6, 1e-3),
    VesselKind.VENULE: (20e-6, 200e-6, 2e-3),
    VesselKind.ARTERIOLE: (30e-6, 300e-6, 3e-3),
}


def preset(kind: VesselKind | str) -> VesselSpec:
    """Return the built-in vessel description for a named vessel class."""
    kind = VesselKind(kind)
    if kind not in _PRESETS:
        raise ValueError(f"no preset for vessel kind {kind.value!r}")
    D, L, v = _PRESETS[kind]
    return VesselSpec(kind=kind, diameter_D=D, length_L=L, v_max=v)


def radial_distance(position: np.ndarray, domain: Domain) -> np.ndarray | float:
    """Distance from the axial centerline, measured in the cross-section plane.

    Works on a single (3,) position or an (..., 3) array.
    """
    p = np.asarray(position, dtype=float)
    r = np.hypot(p[..., 1], p[..., 2])
    return float(r) if r.ndim == 0 else r


def wall_distance(position: np.ndarray, domain: Domain) -> np.ndarray | float:
    """Distance to the nearest lateral prism face (negative if outside it)."""
    p = np.asarray(position, dtype=float)
    d = np.minimum(
        domain.half_width - np.abs(p[..., 1]),
        domain.half_width - np.abs(p[..., 2]),
    )
    return float(d) if d.ndim == 0 else d


def classify_region(position: np.ndarray, vessel: VesselSpec) -> RegionLabel:
    """Label a position as core, near_wall, or outside.

    near_wall means inside the prism with the nearest lateral face at most
    delta = 0.1*D away. The axial faces do not count as walls.
    """
    domain = vessel.domain()
    if not domain.contains(position):
        return RegionLabel.OUTSIDE
    if wall_distance(position, domain) <= vessel.delta:
        return RegionLabel.NEAR_WALL
    return RegionLabel.CORE


def near_wall_area_fraction(vessel: VesselSpec) -> float:
    """Fraction of the square cross-section lying within delta of a lateral face.

    1 - (1 - 2*delta/D)^2; equals 0.36 for delta = 0.1*D.
    """
    core_side = vessel.diameter_D - 2.0 * vessel.delta
    return 1.0 - (core_side / vessel.diameter_D) ** 2


def corner_area_fraction(vessel: VesselSpec) -> float:
    """Fraction of the square cross-section outside the inscribed disc (1 - pi/4)."""
    return 1.0 - math.pi / 4.0

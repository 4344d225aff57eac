"""Initial particle placement.

Two strategies: a deterministic three-point layout per species on the
centerline (optionally jittered), and region-based placement where a
fraction M of nanomachines starts in the near-wall band and the rest,
like all biomarkers, start uniformly over the cross-section.

Sampling draws from the caller's random generator in a documented order
(per particle: axial coordinate, then lateral rejection attempts), so
independent implementations can reproduce positions exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError
from .geometry import VesselSpec, wall_distance
from .kinetics import Role, SpeciesSpec

# Centerline layout: biomarker release points at these axial offsets [m],
# nanomachine points CROSS_SPECIES_GAP downstream of each.
_BIO_OFFSETS_M = (9e-6, 26.5e-6, 44e-6)
CROSS_SPECIES_GAP_M = 12.5e-6
SAME_SPECIES_RANGE_M = (15e-6, 20e-6)
CROSS_SPECIES_RANGE_M = (10e-6, 15e-6)

_EPS = 1e-12


@dataclass(frozen=True)
class Points:
    """Fixed release points per species, shape (n, 3) each."""

    biomarker_points: np.ndarray
    nanomachine_points: np.ndarray

    def __post_init__(self) -> None:
        for name, pts in (
            ("biomarker", self.biomarker_points),
            ("nanomachine", self.nanomachine_points),
        ):
            arr = np.asarray(pts, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
                raise ConfigurationError(f"{name} points must be a non-empty (n, 3) array")
        _validate_spacing(self.biomarker_points, self.nanomachine_points)


@dataclass(frozen=True)
class Regions:
    """Margination-parameterized release over an inlet slab of the vessel.

    Both species seed the slab x in [0, axial_fraction*L] so they traverse
    the remaining length; nanomachines additionally split between the
    near-wall band and the full cross-section according to margination_M.
    """

    margination_M: float
    axial_fraction: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 <= self.margination_M <= 1.0:
            raise ConfigurationError(
                f"margination ratio must be in [0, 1], got {self.margination_M}"
            )
        if not 0.0 < self.axial_fraction <= 1.0:
            raise ConfigurationError(
                f"axial release fraction must be in (0, 1], got {self.axial_fraction}"
            )


Strategy = Union[Points, Regions]


@dataclass(frozen=True)
class ReleasePlan:
    strategy: Strategy
    jitter_radius: float = 0.0

    def __post_init__(self) -> None:
        if self.jitter_radius < 0:
            raise ConfigurationError(
                f"jitter radius must be >= 0, got {self.jitter_radius}"
            )


@dataclass(frozen=True)
class InitialState:
    """Sampled starting positions for one trial."""

    biomarker_positions: np.ndarray
    nanomachine_positions: np.ndarray

    @property
    def counts(self) -> tuple[int, int]:
        return len(self.biomarker_positions), len(self.nanomachine_positions)


def _validate_spacing(bio_pts: np.ndarray, nano_pts: np.ndarray) -> None:
    """Check the layout against the release-geometry constraints.

    Consecutive same-species points (ordered along the axis) must be
    15-20 um apart; each biomarker point's paired nanomachine point (same
    index) must be 10-15 um away. The paired reading is the only
    satisfiable one: with same-species spacing above 15 um and both
    species interleaved on one line, some biomarker always has an
    unpaired nanomachine nearer than 10 um.
    """
    lo_s, hi_s = SAME_SPECIES_RANGE_M
    lo_x, hi_x = CROSS_SPECIES_RANGE_M
    for name, pts in (("biomarker", bio_pts), ("nanomachine", nano_pts)):
        pts = np.asarray(pts, dtype=float)
        if len(pts) < 2:
            continue
        ordered = pts[np.argsort(pts[:, 0])]
        gaps = np.linalg.norm(np.diff(ordered, axis=0), axis=1)
        if np.any(gaps < lo_s - _EPS) or np.any(gaps > hi_s + _EPS):
            raise ConfigurationError(
                f"consecutive {name} release points must be "
                f"{lo_s * 1e6:.0f}-{hi_s * 1e6:.0f} um apart, got "
                f"{np.round(gaps * 1e6, 3).tolist()} um"
            )
    bio = np.asarray(bio_pts, dtype=float)
    nano = np.asarray(nano_pts, dtype=float)
    if len(bio) != len(nano):
        raise ConfigurationError(
            f"each biomarker release point pairs with one nanomachine "
            f"point, got {len(bio)} and {len(nano)}"
        )
    paired = np.linalg.norm(bio - nano, axis=1)
    if np.any(paired < lo_x - _EPS) or np.any(paired > hi_x + _EPS):
        raise ConfigurationError(
            f"each biomarker point needs its paired nanomachine point "
            f"{lo_x * 1e6:.0f}-{hi_x * 1e6:.0f} um away, got "
            f"{np.round(paired * 1e6, 3).tolist()} um"
        )


def default_points(vessel: VesselSpec) -> ReleasePlan:
    """Three biomarker points on the centerline with nanomachine points
    12.5 um downstream of each.

    Biomarkers sit at x = 9, 26.5, 44 um; nanomachines at 21.5, 39, 56.5 um.
    Downstream placement lets biomarkers, which advect at the full fluid
    speed, overtake the slower nanomachines. The jitter radius defaults to
    D/2 so release spreads across streamlines. Requires L >= 60 um.
    """
    max_x = _BIO_OFFSETS_M[-1] + CROSS_SPECIES_GAP_M  # 56.5 um
    if vessel.length_L < 60e-6:
        raise ConfigurationError(
            f"vessel length {vessel.length_L * 1e6:.1f} um cannot host the "
            f"three-point layout (needs >= 60 um, last point at "
            f"{max_x * 1e6:.1f} um)"
        )
    bio = np.array([[x, 0.0, 0.0] for x in _BIO_OFFSETS_M])
    nano = bio.copy()
    nano[:, 0] += CROSS_SPECIES_GAP_M
    return ReleasePlan(
        strategy=Points(biomarker_points=bio, nanomachine_points=nano),
        jitter_radius=0.5 * vessel.diameter_D,
    )


def _open_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    """Uniform draw on the open interval (lo, hi)."""
    while True:
        v = lo + (hi - lo) * rng.random()
        if lo < v < hi:
            return v


def _strictly_inside(x: float, y: float, z: float, L: float, hw: float) -> bool:
    return 0.0 < x < L and abs(y) < hw and abs(z) < hw


def _sample_points(
    plan: ReleasePlan,
    points: np.ndarray,
    count: int,
    vessel: VesselSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """Round-robin assignment to points, each jittered within a ball.

    Zero jitter consumes no randomness. Otherwise each particle draws
    triples uniform on [-1, 1]^3 until one lands in the unit ball and the
    jittered position is strictly inside the domain.
    """
    pts = np.asarray(points, dtype=float)
    out = np.empty((count, 3))
    L, hw = vessel.length_L, 0.5 * vessel.diameter_D
    jr = plan.jitter_radius
    for i in range(count):
        base = pts[i % len(pts)]
        if jr == 0.0:
            out[i] = base
            continue
        while True:
            u = rng.uniform(-1.0, 1.0, 3)
            if u[0] * u[0] + u[1] * u[1] + u[2] * u[2] > 1.0:
                continue
            cand = base + jr * u
            if _strictly_inside(cand[0], cand[1], cand[2], L, hw):
                out[i] = cand
                break
    return out


def _sample_region(
    count: int,
    n_near_wall: int,
    vessel: VesselSpec,
    axial_fraction: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """The first n_near_wall particles go to the near-wall band, the rest
    anywhere in the cross-section; x is uniform over the axial extent."""
    L, hw, delta = vessel.length_L, 0.5 * vessel.diameter_D, vessel.delta
    x_hi = axial_fraction * L
    domain = vessel.domain()
    out = np.empty((count, 3))
    for i in range(count):
        x = _open_uniform(rng, 0.0, x_hi)
        want_wall = i < n_near_wall
        while True:
            y = _open_uniform(rng, -hw, hw)
            z = _open_uniform(rng, -hw, hw)
            if want_wall and wall_distance((x, y, z), domain) > delta:
                continue
            out[i] = (x, y, z)
            break
    return out


def round_half_up(x: float) -> int:
    """round(0.5) = 1 rounding, used for the near-wall particle count."""
    return int(np.floor(x + 0.5))


def sample_initial_positions(
    plan: ReleasePlan,
    species: SpeciesSpec,
    count: int,
    vessel: VesselSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample starting positions for one species, shape (count, 3)."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if count == 0:
        return np.empty((0, 3))
    strat = plan.strategy
    if isinstance(strat, Points):
        pts = (
            strat.biomarker_points
            if species.role is Role.BIOMARKER
            else strat.nanomachine_points
        )
        return _sample_points(plan, pts, count, vessel, rng)
    if isinstance(strat, Regions):
        if species.role is Role.BIOMARKER:
            n_wall = 0  # biomarkers are always uniform over the cross-section
        else:
            n_wall = round_half_up(strat.margination_M * count)
        return _sample_region(count, n_wall, vessel, strat.axial_fraction, rng)
    raise TypeError(f"unknown release strategy {strat!r}")


def initial_state(
    plan: ReleasePlan,
    biomarkers: SpeciesSpec,
    n_biomarkers: int,
    nanomachines: SpeciesSpec,
    n_nanomachines: int,
    vessel: VesselSpec,
    rng: np.random.Generator,
) -> InitialState:
    """Sample both species; biomarkers draw first, then nanomachines."""
    bio = sample_initial_positions(plan, biomarkers, n_biomarkers, vessel, rng)
    nano = sample_initial_positions(plan, nanomachines, n_nanomachines, vessel, rng)
    return InitialState(biomarker_positions=bio, nanomachine_positions=nano)


def realized_margination(positions: np.ndarray, vessel: VesselSpec) -> float:
    """Fraction of positions inside the near-wall band."""
    pts = np.asarray(positions, dtype=float)
    if pts.size == 0:
        raise ValueError("cannot compute margination of an empty position list")
    domain = vessel.domain()
    inside = domain.contains(pts)
    near = inside & (wall_distance(pts, domain) <= vessel.delta)
    return float(np.count_nonzero(near) / len(pts))

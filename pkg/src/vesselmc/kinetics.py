"""Species definitions and the stochastic per-step motion law.

Particles advect axially at a size-dependent fraction of the local fluid
speed and diffuse isotropically with the Stokes-Einstein coefficient.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import k as BOLTZMANN_K  # 1.380649e-23 J/K

from .flow import FlowModel, speed_at

# Default fluid conditions (blood at body temperature).
DEFAULT_TEMPERATURE_K = 310.0
DEFAULT_VISCOSITY_PA_S = 4e-3

# Biomarker radius default and the nanomachine size range map to margination.
DEFAULT_BIOMARKER_RADIUS_M = 25e-9
SIZE_MIN_M = 100e-9
SIZE_MAX_M = 2000e-9
MARGINATION_MIN = 0.05
MARGINATION_MAX = 0.60


class Role(str, enum.Enum):
    BIOMARKER = "biomarker"
    NANOMACHINE = "nanomachine"


def diffusion_coefficient(radius_a: float, T: float, mu: float) -> float:
    """Stokes-Einstein diffusivity kB*T / (6*pi*mu*a) [m^2/s]."""
    if radius_a <= 0 or T <= 0 or mu <= 0:
        raise ValueError(
            f"radius, temperature, and viscosity must be positive, got "
            f"a={radius_a}, T={T}, mu={mu}"
        )
    return BOLTZMANN_K * T / (6.0 * math.pi * mu * radius_a)


def velocity_cofactor(a_n: float, a_b: float) -> float:
    """Advection cofactor a_b / a_n for a nanomachine of radius a_n.

    The biomarker radius a_b is the normalization reference, so the result
    lies in (0, 1]; a_n below a_b would exceed 1 and is rejected.
    """
    if a_b <= 0:
        raise ValueError(f"reference radius must be positive, got {a_b}")
    if a_n < a_b:
        raise ValueError(
            f"nanomachine radius {a_n} below reference radius {a_b}; "
            "cofactor would exceed 1"
        )
    return a_b / a_n


def margination_for_size(
    a_n: float, a_min: float = SIZE_MIN_M, a_max: float = SIZE_MAX_M
) -> float:
    """Near-wall release fraction for a nanomachine radius, linear in radius.

    Maps [a_min, a_max] onto [0.05, 0.60].
    """
    if not a_min <= a_n <= a_max:
        raise ValueError(f"radius {a_n} outside [{a_min}, {a_max}]")
    if a_max == a_min:
        return MARGINATION_MIN
    frac = (a_n - a_min) / (a_max - a_min)
    return MARGINATION_MIN + (MARGINATION_MAX - MARGINATION_MIN) * frac


@dataclass(frozen=True)
class SpeciesSpec:
    """One particle class.

    radius_a [m] sets the Stokes-Einstein diffusivity D_diff [m^2/s];
    alpha_v in [0, 1] scales local fluid speed into advection. Biomarkers
    always carry alpha_v = 1.
    """

    role: Role
    radius_a: float
    alpha_v: float
    D_diff: float
    temperature_T: float = DEFAULT_TEMPERATURE_K
    viscosity_mu: float = DEFAULT_VISCOSITY_PA_S

    def __post_init__(self) -> None:
        if self.radius_a <= 0:
            raise ValueError(f"radius must be positive, got {self.radius_a}")
        if not 0.0 <= self.alpha_v <= 1.0:
            raise ValueError(f"alpha_v must be in [0, 1], got {self.alpha_v}")
        if self.role is Role.BIOMARKER and self.alpha_v != 1.0:
            raise ValueError("biomarkers always advect at the full fluid speed")
        expected = diffusion_coefficient(
            self.radius_a, self.temperature_T, self.viscosity_mu
        )
        if not math.isclose(self.D_diff, expected, rel_tol=1e-9):
            raise ValueError(
                f"D_diff {self.D_diff} does not match the Stokes-Einstein "
                f"value {expected} for this radius"
            )


def biomarker_species(
    radius: float = DEFAULT_BIOMARKER_RADIUS_M,
    T: float = DEFAULT_TEMPERATURE_K,
    mu: float = DEFAULT_VISCOSITY_PA_S,
) -> SpeciesSpec:
    return SpeciesSpec(
        role=Role.BIOMARKER,
        radius_a=radius,
        alpha_v=1.0,
        D_diff=diffusion_coefficient(radius, T, mu),
        temperature_T=T,
        viscosity_mu=mu,
    )


def nanomachine_species(
    radius: float,
    reference_radius: float = DEFAULT_BIOMARKER_RADIUS_M,
    alpha_v: float | None = None,
    T: float = DEFAULT_TEMPERATURE_K,
    mu: float = DEFAULT_VISCOSITY_PA_S,
) -> SpeciesSpec:
    """Nanomachine with the size-derived cofactor, or an explicit alpha_v."""
    if alpha_v is None:
        alpha_v = velocity_cofactor(radius, reference_radius)
    return SpeciesSpec(
        role=Role.NANOMACHINE,
        radius_a=radius,
        alpha_v=alpha_v,
        D_diff=diffusion_coefficient(radius, T, mu),
        temperature_T=T,
        viscosity_mu=mu,
    )


@dataclass(frozen=True)
class KineticParams:
    """Time step dt [s] and the Boltzmann constant [J/K]."""

    dt: float
    boltzmann_kB: float = BOLTZMANN_K

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")


def diffusion_step_std(species: SpeciesSpec, dt: float) -> float:
    """Per-axis Gaussian displacement std sqrt(2*D*dt) [m]."""
    return math.sqrt(2.0 * species.D_diff * dt)


def step(
    position: np.ndarray,
    species: SpeciesSpec,
    flow: FlowModel,
    params: KineticParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """One Euler-Maruyama step: axial advection plus isotropic diffusion.

    position may be a single (3,) vector or an (n, 3) array; one step is
    taken for every row. The returned positions are raw, before any
    boundary handling. Per particle, the three Gaussian increments are
    drawn in x, y, z order, and the update is evaluated as
    x + (alpha_v*dt)*v + sigma*noise so independent implementations can
    reproduce it bit for bit.
    """
    p = np.atleast_2d(np.asarray(position, dtype=float))
    v = np.atleast_1d(speed_at(flow, p))
    sigma = diffusion_step_std(species, params.dt)
    adv = species.alpha_v * params.dt
    noise = rng.standard_normal(p.shape)
    out = np.empty_like(p)
    out[:, 0] = p[:, 0] + adv * v + sigma * noise[:, 0]
    out[:, 1] = p[:, 1] + sigma * noise[:, 1]
    out[:, 2] = p[:, 2] + sigma * noise[:, 2]
    return out[0] if np.asarray(position).ndim == 1 else out

"""Trial execution and batch aggregation.

A trial steps all particles until the horizon elapses or every biomarker is
detected or washed out, recording unique-biomarker detections. A batch runs
seeded trials concurrently and pools them into a detection-probability
estimate with a Wilson interval.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .errors import ConfigurationError
from .flow import FlowModel, LaminarAnalytic, LaminarDiscretized, Uniform
from .geometry import Domain, VesselSpec
from .kinetics import Role, SpeciesSpec, diffusion_step_std
from .release import ReleasePlan, initial_state
from .seeding import mix64
from .stats import wilson_interval


class ParticleStatus(enum.IntEnum):
    ACTIVE = _kernel.ACTIVE
    EXITED = _kernel.EXITED
    DETECTED = _kernel.DETECTED


@dataclass(frozen=True)
class TrialConfig:
    """Complete input of one trial; seed fully determines its outcome."""

    vessel: VesselSpec
    flow: FlowModel
    biomarker_species: SpeciesSpec
    nanomachine_species: SpeciesSpec
    n_biomarkers: int
    n_nanomachines: int
    release: ReleasePlan
    dt: float
    t_max: float
    d_det: float
    seed: int
    detection_mode: str = "brute"  # "brute" or "grid"; never changes results

    def __post_init__(self) -> None:
        if self.d_det <= 0:
            raise ConfigurationError(f"d_det must be positive, got {self.d_det}")
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.t_max < self.dt:
            raise ConfigurationError(
                f"t_max {self.t_max} shorter than one step dt {self.dt}"
            )
        if self.n_biomarkers < 1 or self.n_nanomachines < 1:
            raise ConfigurationError(
                f"need at least one particle of each species, got "
                f"B={self.n_biomarkers}, N={self.n_nanomachines}"
            )
        if self.biomarker_species.role is not Role.BIOMARKER:
            raise ConfigurationError("biomarker_species must have the biomarker role")
        if self.nanomachine_species.role is not Role.NANOMACHINE:
            raise ConfigurationError(
                "nanomachine_species must have the nanomachine role"
            )
        if self.detection_mode not in ("brute", "grid"):
            raise ConfigurationError(
                f"detection_mode must be 'brute' or 'grid', got {self.detection_mode!r}"
            )

    @property
    def n_steps(self) -> int:
        return max(1, int(math.floor(self.t_max / self.dt + 1e-9)))


@dataclass(frozen=True)
class DetectionEvent:
    step: int
    nanomachine_id: int
    biomarker_id: int
    position: tuple[float, float, float]


@dataclass(frozen=True)
class TrialOutcome:
    detected: int
    total_biomarkers: int
    detection_times: tuple[float, ...]
    exited_biomarkers: int
    steps_run: int
    events: tuple[DetectionEvent, ...] = field(default=())

    def __post_init__(self) -> None:
        assert 0 <= self.detected <= self.total_biomarkers
        assert len(self.detection_times) == self.detected
        assert all(
            a <= b for a, b in zip(self.detection_times, self.detection_times[1:])
        )


@dataclass(frozen=True)
class BatchEstimate:
    p_d: float
    ci_low: float
    ci_high: float
    trials: int
    detected: int
    total: int


def contact_distance(
    biomarker: SpeciesSpec, nanomachine: SpeciesSpec, margin: float = 0.0
) -> float:
    """Physical-contact detection range a_n + a_b, plus an optional margin [m]."""
    return biomarker.radius_a + nanomachine.radius_a + margin


def detect_pairs(
    nanomachine_positions: np.ndarray,
    biomarker_positions: np.ndarray,
    d_det: float,
) -> list[tuple[int, int]]:
    """All (nanomachine id, biomarker id) detections by brute-force scan.

    Each biomarker appears at most once, claimed by the lowest-id
    nanomachine within d_det (inclusive).
    """
    nano = np.asarray(nanomachine_positions, dtype=float).reshape(-1, 3)
    bio = np.asarray(biomarker_positions, dtype=float).reshape(-1, 3)
    if len(nano) == 0 or len(bio) == 0:
        return []
    diff = nano[:, None, :] - bio[None, :, :]
    within = np.einsum("nbk,nbk->nb", diff, diff) <= d_det * d_det
    pairs = []
    for b in range(len(bio)):
        hits = np.nonzero(within[:, b])[0]
        if hits.size:
            pairs.append((int(hits[0]), b))
    return pairs


def detect_pairs_grid(
    nanomachine_positions: np.ndarray,
    biomarker_positions: np.ndarray,
    d_det: float,
) -> list[tuple[int, int]]:
    """Same contract as detect_pairs via a uniform hash grid of cell d_det."""
    nano = np.asarray(nanomachine_positions, dtype=float).reshape(-1, 3)
    bio = np.asarray(biomarker_positions, dtype=float).reshape(-1, 3)
    if len(nano) == 0 or len(bio) == 0:
        return []
    cells: dict[tuple[int, int, int], list[int]] = {}
    inv = 1.0 / d_det
    keys = np.floor(nano * inv).astype(np.int64)
    for j, key in enumerate(map(tuple, keys)):
        cells.setdefault(key, []).append(j)
    d2 = d_det * d_det
    pairs = []
    for b, p in enumerate(bio):
        kx, ky, kz = np.floor(p * inv).astype(np.int64)
        best = -1
        for ox in (kx - 1, kx, kx + 1):
            for oy in (ky - 1, ky, ky + 1):
                for oz in (kz - 1, kz, kz + 1):
                    for j in cells.get((ox, oy, oz), ()):
                        d = nano[j] - p
                        if d @ d <= d2 and (best < 0 or j < best):
                            best = j
        if best >= 0:
            pairs.append((best, b))
    return pairs


def _fold_scalar(u: float, h: float) -> float:
    if -h <= u <= h:
        return u
    m = (u + h) % (4.0 * h)
    if m > 2.0 * h:
        m = 4.0 * h - m
    return m - h


def apply_boundaries(
    position_before: np.ndarray,
    position_after: np.ndarray,
    domain: Domain,
) -> tuple[np.ndarray, ParticleStatus]:
    """Fold a raw step back into the domain, absorbing at the axial faces.

    Lateral overshoots reflect specularly (repeatedly, via the closed-form
    triangle fold). A step whose raw x leaves [0, L] exits at the linear
    interpolation to the crossed face, with the lateral coordinates of the
    crossing point folded.
    """
    x0, y0, z0 = (float(c) for c in np.asarray(position_before, dtype=float))
    x1, y1, z1 = (float(c) for c in np.asarray(position_after, dtype=float))
    L, hw = domain.length_L, domain.half_width
    if x1 < 0.0 or x1 > L:
        t = (0.0 - x0) / (x1 - x0) if x1 < 0.0 else (L - x0) / (x1 - x0)
        pos = np.array(
            [
                x0 + t * (x1 - x0),
                _fold_scalar(y0 + t * (y1 - y0), hw),
                _fold_scalar(z0 + t * (z1 - z0), hw),
            ]
        )
        return pos, ParticleStatus.EXITED
    return (
        np.array([x1, _fold_scalar(y1, hw), _fold_scalar(z1, hw)]),
        ParticleStatus.ACTIVE,
    )


def _flow_kernel_params(flow: FlowModel):
    """(kind, v0, vmax, R, grid_ny, grid_nz, grid_speeds) for the kernel."""
    dummy = np.zeros((1, 1))
    if isinstance(flow, Uniform):
        return 0, flow.v, 0.0, 1.0, 1, 1, dummy
    if isinstance(flow, LaminarAnalytic):
        return 1, 0.0, flow.v_max, flow.R, 1, 1, dummy
    if isinstance(flow, LaminarDiscretized):
        g = flow.grid
        return 2, 0.0, g.v_max, g.R, g.n_y, g.n_z, np.ascontiguousarray(g.speeds)
    raise TypeError(f"unknown flow model {flow!r}")


def run_trial(config: TrialConfig) -> TrialOutcome:
    """Execute one trial: release, step, detect, until horizon or no
    active biomarkers remain."""
    rng = np.random.default_rng(config.seed)
    state = initial_state(
        config.release,
        config.biomarker_species,
        config.n_biomarkers,
        config.nanomachine_species,
        config.n_nanomachines,
        config.vessel,
        rng,
    )
    B, N = config.n_biomarkers, config.n_nanomachines
    bio = np.ascontiguousarray(state.biomarker_positions, dtype=np.float64)
    nano = np.ascontiguousarray(state.nanomachine_positions, dtype=np.float64)
    bstat = np.zeros(B, dtype=np.int8)
    nstat = np.zeros(N, dtype=np.int8)
    det_step = np.full(B, -1, dtype=np.int64)
    det_nano = np.full(B, -1, dtype=np.int64)
    det_pos = np.zeros((B, 3), dtype=np.float64)
    kind, v0, vmax, R, gny, gnz, gspeeds = _flow_kernel_params(config.flow)
    L = config.vessel.length_L
    hw = 0.5 * config.vessel.diameter_D
    use_grid = 1 if config.detection_mode == "grid" else 0
    if use_grid:
        ngx, ngy, ngz = _kernel.detection_grid_dims(L, 2.0 * hw, config.d_det)
    else:
        ngx = ngy = ngz = 1
    starts = np.zeros(ngx * ngy * ngz + 1, dtype=np.int64)
    order = np.zeros(max(1, N), dtype=np.int64)
    steps_run = _kernel.run_trial_kernel(
        rng,
        bio,
        nano,
        bstat,
        nstat,
        diffusion_step_std(config.biomarker_species, config.dt),
        config.biomarker_species.alpha_v * config.dt,
        diffusion_step_std(config.nanomachine_species, config.dt),
        config.nanomachine_species.alpha_v * config.dt,
        kind,
        v0,
        vmax,
        R,
        L,
        hw,
        gny,
        gnz,
        gspeeds,
        config.d_det,
        config.n_steps,
        use_grid,
        ngx,
        ngy,
        ngz,
        starts,
        order,
        det_step,
        det_nano,
        det_pos,
    )
    detected_ids = np.nonzero(bstat == int(ParticleStatus.DETECTED))[0]
    events = tuple(
        sorted(
            (
                DetectionEvent(
                    step=int(det_step[i]),
                    nanomachine_id=int(det_nano[i]),
                    biomarker_id=int(i),
                    position=(
                        float(det_pos[i, 0]),
                        float(det_pos[i, 1]),
                        float(det_pos[i, 2]),
                    ),
                )
                for i in detected_ids
            ),
            key=lambda e: (e.step, e.biomarker_id),
        )
    )
    times = tuple(sorted((int(det_step[i]) + 1) * config.dt for i in detected_ids))
    return TrialOutcome(
        detected=int(detected_ids.size),
        total_biomarkers=B,
        detection_times=times,
        exited_biomarkers=int(np.count_nonzero(bstat == int(ParticleStatus.EXITED))),
        steps_run=int(steps_run),
        events=events,
    )


def trial_seed(master_seed: int, index: int) -> int:
    """Seed of trial `index` within a batch."""
    return mix64(master_seed, index)


def run_trials(
    config: TrialConfig,
    n_trials: int,
    master_seed: int,
    threads: int | None = None,
) -> list[TrialOutcome]:
    """Run seeded trials, in parallel, in trial-index order.

    Outcomes are bit-identical for any thread count: each trial's stream
    depends only on (master_seed, index).
    """
    if n_trials < 1:
        raise ValueError(f"need at least one trial, got {n_trials}")
    configs = [
        _with_seed(config, trial_seed(master_seed, i)) for i in range(n_trials)
    ]
    workers = threads if threads else min(32, os.cpu_count() or 1)
    if workers <= 1 or n_trials == 1:
        return [run_trial(c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_trial, configs))


def _with_seed(config: TrialConfig, seed: int) -> TrialConfig:
    return TrialConfig(
        vessel=config.vessel,
        flow=config.flow,
        biomarker_species=config.biomarker_species,
        nanomachine_species=config.nanomachine_species,
        n_biomarkers=config.n_biomarkers,
        n_nanomachines=config.n_nanomachines,
        release=config.release,
        dt=config.dt,
        t_max=config.t_max,
        d_det=config.d_det,
        seed=seed,
        detection_mode=config.detection_mode,
    )


def pool_outcomes(outcomes: list[TrialOutcome]) -> BatchEstimate:
    """Pool per-trial counts into one Bernoulli estimate."""
    detected = sum(o.detected for o in outcomes)
    total = sum(o.total_biomarkers for o in outcomes)
    p_d = detected / total
    low, high = wilson_interval(detected, total)
    return BatchEstimate(
        p_d=p_d,
        ci_low=low,
        ci_high=high,
        trials=len(outcomes),
        detected=detected,
        total=total,
    )


def run_batch(
    config: TrialConfig,
    n_trials: int,
    master_seed: int,
    threads: int | None = None,
) -> BatchEstimate:
    """p_d = total detected / total biomarkers over independent trials,
    with a 95% Wilson interval on the pooled counts."""
    return pool_outcomes(run_trials(config, n_trials, master_seed, threads))

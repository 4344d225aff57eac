"""Independent reference implementations used to cross-check the engine.

reference_trial re-derives one complete trial (release sampling, per-step
motion, boundary handling, detection) from a TrialConfig in plain Python
and numpy, following the documented draw order, so the compiled kernel can
be checked event for event and bit for bit. random_small_config builds
randomized small instances for that comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from vesselmc.engine import TrialConfig, TrialOutcome, contact_distance
from vesselmc.flow import LaminarAnalytic, LaminarDiscretized, Uniform, discretize
from vesselmc.geometry import VesselKind, VesselSpec
from vesselmc.kinetics import biomarker_species, nanomachine_species
from vesselmc.release import Points, Regions, ReleasePlan, default_points

ACTIVE, EXITED, DETECTED = 0, 1, 2


@dataclass
class ReferenceOutcome:
    detected: int
    exited_biomarkers: int
    steps_run: int
    detection_times: tuple[float, ...]
    events: tuple[tuple[int, int, int, tuple[float, float, float]], ...]


def _fold(u: float, h: float) -> float:
    """Reflect a lateral coordinate into [-h, h] (triangle wave, period 4h)."""
    if -h <= u <= h:
        return u
    m = (u + h) % (4.0 * h)
    if m > 2.0 * h:
        m = 4.0 * h - m
    return m - h


def _speed(flow, hw: float, y: float, z: float) -> float:
    if isinstance(flow, Uniform):
        return flow.v
    if isinstance(flow, LaminarAnalytic):
        f = 1.0 - (y * y + z * z) / (flow.R * flow.R)
        return flow.v_max * f if f > 0.0 else 0.0
    g = flow.grid
    dy = 2.0 * hw / g.n_y
    dz = 2.0 * hw / g.n_z
    iy = min(max(int((y + hw) / dy), 0), g.n_y - 1)
    iz = min(max(int((z + hw) / dz), 0), g.n_z - 1)
    return g.speeds[iy, iz]


def _open_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    while True:
        v = lo + (hi - lo) * rng.random()
        if lo < v < hi:
            return v


def _sample_points(plan, pts, count, vessel, rng):
    L, hw = vessel.length_L, 0.5 * vessel.diameter_D
    jr = plan.jitter_radius
    out = np.empty((count, 3))
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
            if 0.0 < cand[0] < L and abs(cand[1]) < hw and abs(cand[2]) < hw:
                out[i] = cand
                break
    return out


def _sample_regions(strat, count, n_wall, vessel, rng):
    L, hw, delta = vessel.length_L, 0.5 * vessel.diameter_D, vessel.delta
    x_hi = strat.axial_fraction * L
    out = np.empty((count, 3))
    for i in range(count):
        x = _open_uniform(rng, 0.0, x_hi)
        while True:
            y = _open_uniform(rng, -hw, hw)
            z = _open_uniform(rng, -hw, hw)
            if i < n_wall and min(hw - abs(y), hw - abs(z)) > delta:
                continue
            out[i] = (x, y, z)
            break
    return out


def _initial_positions(config: TrialConfig, rng: np.random.Generator):
    """Biomarker positions first, then nanomachines, off one generator."""
    strat = config.release.strategy
    vessel = config.vessel
    if isinstance(strat, Points):
        bio = _sample_points(
            config.release,
            np.asarray(strat.biomarker_points, dtype=float),
            config.n_biomarkers,
            vessel,
            rng,
        )
        nano = _sample_points(
            config.release,
            np.asarray(strat.nanomachine_points, dtype=float),
            config.n_nanomachines,
            vessel,
            rng,
        )
    elif isinstance(strat, Regions):
        bio = _sample_regions(strat, config.n_biomarkers, 0, vessel, rng)
        n_wall = int(math.floor(strat.margination_M * config.n_nanomachines + 0.5))
        nano = _sample_regions(strat, config.n_nanomachines, n_wall, vessel, rng)
    else:
        raise TypeError(f"unknown release strategy {strat!r}")
    return bio, nano


def reference_trial(config: TrialConfig) -> ReferenceOutcome:
    """Run one trial without the compiled kernel.

    Per step, three Gaussian increments are consumed per particle slot
    (biomarkers first, then nanomachines) whether or not the slot is still
    active, positions advance as x + (alpha_v*dt)*v + sigma*noise, lateral
    overshoots fold, axial overshoots exit at the interpolated crossing,
    and each surviving biomarker is claimed by the lowest-id active
    nanomachine within d_det.
    """
    rng = np.random.default_rng(config.seed)
    bio, nano = _initial_positions(config, rng)
    B, N = config.n_biomarkers, config.n_nanomachines
    L = config.vessel.length_L
    hw = 0.5 * config.vessel.diameter_D
    dt = config.dt
    sigma_b = math.sqrt(2.0 * config.biomarker_species.D_diff * dt)
    adv_b = config.biomarker_species.alpha_v * dt
    sigma_n = math.sqrt(2.0 * config.nanomachine_species.D_diff * dt)
    adv_n = config.nanomachine_species.alpha_v * dt
    d2 = config.d_det * config.d_det
    flow = config.flow
    bstat = [ACTIVE] * B
    nstat = [ACTIVE] * N
    events: list[tuple[int, int, int, tuple[float, float, float]]] = []
    active = B
    steps_run = 0
    n_steps = max(1, int(math.floor(config.t_max / dt + 1e-9)))
    for s in range(n_steps):
        if active == 0:
            break
        noise = rng.standard_normal((B + N, 3))
        for i in range(B):
            nx, ny, nz = noise[i, 0], noise[i, 1], noise[i, 2]
            if bstat[i] != ACTIVE:
                continue
            x, y, z = bio[i, 0], bio[i, 1], bio[i, 2]
            v = _speed(flow, hw, y, z)
            x1 = x + adv_b * v + sigma_b * nx
            y1 = y + sigma_b * ny
            z1 = z + sigma_b * nz
            if x1 < 0.0 or x1 > L:
                t = (0.0 - x) / (x1 - x) if x1 < 0.0 else (L - x) / (x1 - x)
                bio[i, 0] = x + t * (x1 - x)
                bio[i, 1] = _fold(y + t * (y1 - y), hw)
                bio[i, 2] = _fold(z + t * (z1 - z), hw)
                bstat[i] = EXITED
                active -= 1
            else:
                bio[i, 0] = x1
                bio[i, 1] = _fold(y1, hw)
                bio[i, 2] = _fold(z1, hw)
        for j in range(N):
            nx, ny, nz = noise[B + j, 0], noise[B + j, 1], noise[B + j, 2]
            if nstat[j] != ACTIVE:
                continue
            x, y, z = nano[j, 0], nano[j, 1], nano[j, 2]
            v = _speed(flow, hw, y, z)
            x1 = x + adv_n * v + sigma_n * nx
            y1 = y + sigma_n * ny
            z1 = z + sigma_n * nz
            if x1 < 0.0 or x1 > L:
                t = (0.0 - x) / (x1 - x) if x1 < 0.0 else (L - x) / (x1 - x)
                nano[j, 0] = x + t * (x1 - x)
                nano[j, 1] = _fold(y + t * (y1 - y), hw)
                nano[j, 2] = _fold(z + t * (z1 - z), hw)
                nstat[j] = EXITED
            else:
                nano[j, 0] = x1
                nano[j, 1] = _fold(y1, hw)
                nano[j, 2] = _fold(z1, hw)
        for i in range(B):
            if bstat[i] != ACTIVE:
                continue
            bx, by, bz = bio[i, 0], bio[i, 1], bio[i, 2]
            best = -1
            for j in range(N):
                if nstat[j] != ACTIVE:
                    continue
                dx = bx - nano[j, 0]
                dy = by - nano[j, 1]
                dz = bz - nano[j, 2]
                if dx * dx + dy * dy + dz * dz <= d2:
                    best = j
                    break
            if best >= 0:
                bstat[i] = DETECTED
                active -= 1
                events.append((s, best, i, (float(bx), float(by), float(bz))))
        steps_run = s + 1
    events.sort(key=lambda e: (e[0], e[2]))
    times = tuple(sorted((e[0] + 1) * dt for e in events))
    return ReferenceOutcome(
        detected=len(events),
        exited_biomarkers=sum(1 for v in bstat if v == EXITED),
        steps_run=steps_run,
        detection_times=times,
        events=tuple(events),
    )


def assert_trial_matches(outcome: TrialOutcome, ref: ReferenceOutcome) -> None:
    """Engine outcome must agree with the reference, bit for bit."""
    assert outcome.detected == ref.detected
    assert outcome.exited_biomarkers == ref.exited_biomarkers
    assert outcome.steps_run == ref.steps_run
    assert outcome.detection_times == ref.detection_times
    got = tuple(
        (e.step, e.nanomachine_id, e.biomarker_id, e.position)
        for e in outcome.events
    )
    assert got == ref.events


def random_small_config(rng: np.random.Generator) -> TrialConfig:
    """A randomized small instance spanning flow, release, and detection modes."""
    D = float(rng.uniform(6e-6, 30e-6))
    L = float(rng.uniform(61e-6, 150e-6))
    v_max = float(rng.uniform(5e-4, 3e-3))
    vessel = VesselSpec(kind=VesselKind.CUSTOM, diameter_D=D, length_L=L, v_max=v_max)
    pick = int(rng.integers(0, 3))
    if pick == 0:
        flow = Uniform(v_max)
    elif pick == 1:
        flow = LaminarAnalytic(v_max=v_max, R=vessel.radius)
    else:
        flow = LaminarDiscretized(discretize(v_max, vessel, int(rng.integers(4, 121))))
    bio = biomarker_species()
    nano = nanomachine_species(float(rng.uniform(100e-9, 2e-6)))
    if rng.random() < 0.5:
        release = default_points(vessel)
        if rng.random() < 0.25:
            release = ReleasePlan(strategy=release.strategy, jitter_radius=0.0)
    else:
        release = ReleasePlan(
            strategy=Regions(
                margination_M=float(rng.choice([0.0, 0.37, 1.0])),
                axial_fraction=float(rng.choice([0.1, 0.35])),
            )
        )
    steps = int(rng.integers(50, 501))
    d_det = (
        contact_distance(bio, nano)
        if rng.random() < 0.5
        else float(rng.uniform(0.5e-6, 2e-6))
    )
    return TrialConfig(
        vessel=vessel,
        flow=flow,
        biomarker_species=bio,
        nanomachine_species=nano,
        n_biomarkers=3,
        n_nanomachines=int(rng.integers(1, 51)),
        release=release,
        dt=1e-4,
        t_max=steps * 1e-4,
        d_det=d_det,
        seed=int(rng.integers(0, 2**63 - 1)),
        detection_mode="grid" if rng.random() < 0.5 else "brute",
    )

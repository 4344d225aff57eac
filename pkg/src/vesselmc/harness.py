"""Declarative experiment sweeps, design-table search, and result files.

A sweep derives one trial configuration per (vessel, variant, axis value)
cell, runs a seeded batch for each, and collects rows. All cells share the
master seed, so per-trial random streams are common across cells and
cell-to-cell comparisons see paired noise.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace

from . import __version__
from .config import (
    DEFAULT_COFACTOR_AXIS,
    DEFAULT_COUNT_AXIS,
    DEFAULT_MARGINATION_AXIS,
    DEFAULT_SIZE_AXIS,
    RunSettings,
    build_species,
    effective_margination,
    effective_t_max,
    flow_for,
    load_settings,
    parse_settings,
    release_plan_for,
)
from .engine import BatchEstimate, TrialConfig, contact_distance, run_batch
from .errors import ConfigurationError
from .geometry import VesselKind, VesselSpec, preset
from .kinetics import margination_for_size, velocity_cofactor
from .release import Regions, ReleasePlan
from .seeding import mix64

RESULTS_HEADER = "vessel,variant,axis_name,axis_value,p_d,ci_low,ci_high,trials,master_seed"
DESIGN_HEADER = "vessel,a_n,target,N,p_d,trials,master_seed"

AXIS_NAMES = {
    "count_sweep": "N",
    "cofactor_sweep": "alpha_v",
    "margination_sweep": "M",
    "size_sweep": "a_n",
}

_DEFAULT_AXES = {
    "count_sweep": DEFAULT_COUNT_AXIS,
    "cofactor_sweep": DEFAULT_COFACTOR_AXIS,
    "margination_sweep": DEFAULT_MARGINATION_AXIS,
    "size_sweep": DEFAULT_SIZE_AXIS,
}

_DEFAULT_VARIANTS = {
    "count_sweep": ("uniform", "laminar"),
    "cofactor_sweep": ("uniform", "laminar"),
    "margination_sweep": ("laminar",),
    "size_sweep": ("simplified", "realistic"),
}

FIGURE_IDS = ("fig4", "fig5", "fig6", "fig7", "fig8", "table3")

_ALL_VESSELS = ("capillary", "venule", "arteriole")


@dataclass(frozen=True)
class SweepSpec:
    """One declarative experiment: a kind, its axis, and model variants."""

    kind: str
    base: TrialConfig
    axis: tuple[float, ...]
    variants: tuple[str, ...]
    vessels: tuple[str, ...]
    settings: RunSettings
    trials: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.kind not in (*AXIS_NAMES, "design_table"):
            raise ConfigurationError(f"unknown sweep kind {self.kind!r}")
        if self.kind != "design_table":
            if not self.axis:
                raise ConfigurationError("sweep axis must be non-empty")
            if any(b <= a for a, b in zip(self.axis, self.axis[1:])):
                raise ConfigurationError(
                    f"sweep axis must be strictly increasing, got {self.axis}"
                )
            _validate_axis(self.kind, self.axis)
        if not self.variants or not self.vessels:
            raise ConfigurationError("sweep needs at least one variant and vessel")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be at least 1, got {self.trials}")

    @property
    def axis_name(self) -> str:
        return AXIS_NAMES.get(self.kind, "N")


@dataclass(frozen=True)
class SweepRow:
    vessel: str
    variant: str
    axis_name: str
    axis_value: float
    p_d: float
    ci_low: float
    ci_high: float
    trials: int
    master_seed: int


@dataclass(frozen=True)
class SweepResult:
    spec_kind: str
    rows: tuple[SweepRow, ...]

    def __post_init__(self) -> None:
        assert all(0.0 <= r.p_d <= 1.0 for r in self.rows)


@dataclass(frozen=True)
class DesignRow:
    """Smallest nanomachine count reaching a target detection probability.

    estimated_N is None when no count within the search cap reaches the
    target; achieved_p_d is the batch estimate at the accepted count.
    """

    vessel: str
    radius_a_n: float
    target_p_d: float
    estimated_N: int | None
    achieved_p_d: float | None
    trials: int
    master_seed: int
    evaluations: tuple[tuple[int, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.estimated_N is not None and self.estimated_N < 1:
            raise ValueError(f"estimated_N must be positive, got {self.estimated_N}")


def _validate_axis(kind: str, axis: tuple[float, ...]) -> None:
    if kind == "count_sweep":
        for v in axis:
            if v < 1 or v != int(v):
                raise ConfigurationError(
                    f"count_sweep axis values must be positive integers, got {v}"
                )
    elif kind == "cofactor_sweep":
        for v in axis:
            if not 0.0 < v <= 1.0:
                raise ConfigurationError(
                    f"cofactor_sweep axis values must lie in (0, 1], got {v}"
                )
    elif kind == "margination_sweep":
        for v in axis:
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(
                    f"margination_sweep axis values must lie in [0, 1], got {v}"
                )
    elif kind == "size_sweep":
        for v in axis:
            if v <= 0:
                raise ConfigurationError(
                    f"size_sweep axis values must be positive lengths, got {v}"
                )


def base_trial_config(settings: RunSettings) -> TrialConfig:
    """The fully resolved single-run configuration for these settings."""
    vessel = settings.vessel
    bio, nano = build_species(settings)
    d_det = settings.d_det
    if d_det is None:
        d_det = contact_distance(bio, nano, settings.margin)
    return TrialConfig(
        vessel=vessel,
        flow=flow_for(settings, vessel),
        biomarker_species=bio,
        nanomachine_species=nano,
        n_biomarkers=settings.n_biomarkers,
        n_nanomachines=settings.n_nanomachines,
        release=release_plan_for(settings, vessel),
        dt=settings.dt,
        t_max=effective_t_max(settings, vessel),
        d_det=d_det,
        seed=settings.master_seed,
        detection_mode=settings.detection_mode,
    )


def sweep_spec_from_settings(settings: RunSettings) -> SweepSpec:
    """SweepSpec with per-kind defaults filled in."""
    kind = settings.sweep_kind
    axis = settings.sweep_axis
    if axis is None:
        axis = _DEFAULT_AXES.get(kind, DEFAULT_COUNT_AXIS)
    variants = settings.sweep_variants or _DEFAULT_VARIANTS.get(kind, ("laminar",))
    vessels = settings.sweep_vessels or (settings.vessel.kind.value,)
    if kind == "margination_sweep" and settings.release_strategy == "points":
        raise ConfigurationError(
            "margination_sweep seeds nanomachines by near-wall fraction and "
            "needs release.strategy of regions or auto"
        )
    return SweepSpec(
        kind=kind,
        base=base_trial_config(settings),
        axis=tuple(axis),
        variants=tuple(variants),
        vessels=tuple(vessels),
        settings=settings,
        trials=settings.trials,
        master_seed=settings.master_seed,
    )


def load_config(path: str) -> SweepSpec:
    """Parse a config file into a validated sweep description."""
    return sweep_spec_from_settings(load_settings(path))


def parse_config(text: str, source: str = "<config>") -> SweepSpec:
    return sweep_spec_from_settings(parse_settings(text, source))


def _vessel_for(settings: RunSettings, name: str) -> VesselSpec:
    kind = VesselKind(name)
    if kind is settings.vessel.kind:
        return settings.vessel
    if kind is VesselKind.CUSTOM:
        raise ConfigurationError(
            "sweep.vessels may name custom only when the configured vessel "
            "is custom"
        )
    base = preset(kind)
    return VesselSpec(
        kind=kind,
        diameter_D=base.diameter_D,
        length_L=base.length_L,
        v_max=base.v_max,
        near_wall_fraction=settings.vessel.near_wall_fraction,
    )


def derive_cell_config(
    spec: SweepSpec, vessel_name: str, variant: str, axis_value: float
) -> TrialConfig:
    """TrialConfig for one sweep cell.

    Flow variants (uniform, laminar) swap only the flow model; model
    variants (simplified, realistic) additionally pin the cofactor and
    margination as a package: simplified is uniform flow with alpha_v = 1
    and M = 0, realistic is laminar flow with the size-derived cofactor
    and margination.
    """
    s = spec.settings
    vessel = _vessel_for(s, vessel_name)
    kind = spec.kind
    n_nano = s.n_nanomachines
    a_n = s.nano_radius
    alpha = s.alpha_v
    margination: float | None = None
    # Flow-comparison experiments (count, cofactor) default to the fixed
    # three-point chase geometry; margination and size experiments need the
    # region mechanism that places particles by ratio.
    prefer_points = kind in ("count_sweep", "cofactor_sweep")

    if kind == "count_sweep":
        n_nano = int(axis_value)
    elif kind == "cofactor_sweep":
        alpha = axis_value
    elif kind == "margination_sweep":
        margination = axis_value
    elif kind == "size_sweep":
        a_n = axis_value
        if a_n <= s.bio_radius:
            raise ConfigurationError(
                f"size_sweep radius {a_n} must exceed the biomarker radius "
                f"{s.bio_radius}"
            )
    else:
        raise ConfigurationError(
            f"{kind} cells have no single-axis trial configuration"
        )

    if variant == "simplified":
        alpha = 1.0
        margination = 0.0
        flow = flow_for(s, vessel, "uniform")
    elif variant == "realistic":
        alpha = velocity_cofactor(a_n, s.bio_radius)
        try:
            margination = margination_for_size(a_n)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        flow = flow_for(s, vessel, "laminar")
    elif variant in ("uniform", "laminar"):
        flow = flow_for(s, vessel, variant)
    else:
        raise ConfigurationError(f"unknown variant {variant!r}")

    bio, nano = build_species(s, nano_radius=a_n, alpha_v=alpha)
    d_det = s.d_det
    if d_det is None:
        d_det = contact_distance(bio, nano, s.margin)
    if kind == "margination_sweep" or variant in ("simplified", "realistic"):
        release = ReleasePlan(
            strategy=Regions(
                margination_M=float(margination), axial_fraction=s.extent
            )
        )
    else:
        M = margination if margination is not None else effective_margination(s, a_n)
        release = release_plan_for(
            s, vessel, margination=M, prefer_points=prefer_points
        )
    return TrialConfig(
        vessel=vessel,
        flow=flow,
        biomarker_species=bio,
        nanomachine_species=nano,
        n_biomarkers=s.n_biomarkers,
        n_nanomachines=n_nano,
        release=release,
        dt=s.dt,
        t_max=effective_t_max(s, vessel),
        d_det=d_det,
        seed=spec.master_seed,
        detection_mode=s.detection_mode,
    )


def run_sweep(spec: SweepSpec, threads: int | None = None) -> SweepResult:
    """Run a batch per cell, in deterministic (vessel, variant, axis) order."""
    if spec.kind == "design_table":
        raise ConfigurationError(
            "design_table has no sweep axis; use run_design or the "
            "design-table command"
        )
    rows = []
    for vessel_name in spec.vessels:
        for variant in spec.variants:
            for value in spec.axis:
                config = derive_cell_config(spec, vessel_name, variant, value)
                est = run_batch(config, spec.trials, spec.master_seed, threads)
                rows.append(
                    SweepRow(
                        vessel=vessel_name,
                        variant=variant,
                        axis_name=spec.axis_name,
                        axis_value=float(value),
                        p_d=est.p_d,
                        ci_low=est.ci_low,
                        ci_high=est.ci_high,
                        trials=spec.trials,
                        master_seed=spec.master_seed,
                    )
                )
    return SweepResult(spec_kind=spec.kind, rows=tuple(rows))


def _design_eval_config(
    settings: RunSettings, vessel: VesselSpec, radius: float, n: int, seed: int
) -> TrialConfig:
    """Realistic-variant configuration for one design-table evaluation."""
    alpha = velocity_cofactor(radius, settings.bio_radius)
    margination = margination_for_size(radius)
    bio, nano = build_species(settings, nano_radius=radius, alpha_v=alpha)
    d_det = settings.d_det
    if d_det is None:
        d_det = contact_distance(bio, nano, settings.margin)
    return TrialConfig(
        vessel=vessel,
        flow=flow_for(settings, vessel, "laminar"),
        biomarker_species=bio,
        nanomachine_species=nano,
        n_biomarkers=settings.n_biomarkers,
        n_nanomachines=n,
        release=ReleasePlan(
            strategy=Regions(
                margination_M=margination, axial_fraction=settings.extent
            )
        ),
        dt=settings.dt,
        t_max=effective_t_max(settings, vessel),
        d_det=d_det,
        seed=seed,
        detection_mode=settings.detection_mode,
    )


def design_table(
    vessel: VesselSpec,
    radius: float,
    target_p_d: float,
    tolerance: float = 0.02,
    trial_budget: int = 200,
    *,
    settings: RunSettings | None = None,
    master_seed: int = 1,
    max_n: int = 100_000,
    threads: int | None = None,
) -> DesignRow:
    """Smallest N with batch p_d reaching target_p_d, by doubling then bisection.

    Doubles N from 10 until the estimate reaches the target, then bisects
    the bracket. A count is accepted when its estimate is within tolerance
    of the target or the bracket narrows to one. Every evaluation of a
    count N draws its trial seeds from a per-count seed, so re-evaluating
    the same count reproduces the same estimate. p_d is assumed monotone
    in N; the evaluated points are checked for contradictions beyond
    paired interval noise.
    """
    if settings is None:
        settings = RunSettings(vessel=vessel)
    if not 0.0 <= target_p_d < 1.0:
        raise ConfigurationError(
            f"target_p_d must lie in [0, 1), got {target_p_d}"
        )
    if tolerance <= 0:
        raise ConfigurationError(f"tolerance must be positive, got {tolerance}")
    if trial_budget < 1:
        raise ConfigurationError(
            f"trial_budget must be at least 1, got {trial_budget}"
        )
    name = vessel.kind.value
    if target_p_d == 0.0:
        return DesignRow(
            vessel=name,
            radius_a_n=radius,
            target_p_d=0.0,
            estimated_N=1,
            achieved_p_d=None,
            trials=trial_budget,
            master_seed=master_seed,
        )

    evaluated: dict[int, BatchEstimate] = {}

    def evaluate(n: int) -> BatchEstimate:
        if n not in evaluated:
            config = _design_eval_config(
                settings, vessel, radius, n, mix64(master_seed, n)
            )
            evaluated[n] = run_batch(config, trial_budget, mix64(master_seed, n), threads)
        return evaluated[n]

    def row(n: int | None, p: float | None) -> DesignRow:
        points = tuple(sorted((k, est.p_d) for k, est in evaluated.items()))
        _check_monotone(points, evaluated)
        return DesignRow(
            vessel=name,
            radius_a_n=radius,
            target_p_d=target_p_d,
            estimated_N=n,
            achieved_p_d=p,
            trials=trial_budget,
            master_seed=master_seed,
            evaluations=points,
        )

    lo, hi = 0, None  # p_d(lo) < target <= p_d(hi); lo=0 is the empty system
    n = min(10, max_n)
    while True:
        est = evaluate(n)
        if abs(est.p_d - target_p_d) <= tolerance:
            return row(n, est.p_d)
        if est.p_d >= target_p_d:
            hi = n
            break
        lo = n
        if n >= max_n:
            return row(None, None)
        n = min(2 * n, max_n)

    while hi - lo > 1:
        mid = (lo + hi) // 2
        est = evaluate(mid)
        if abs(est.p_d - target_p_d) <= tolerance:
            return row(mid, est.p_d)
        if est.p_d >= target_p_d:
            hi = mid
        else:
            lo = mid
    return row(hi, evaluated[hi].p_d)


def _check_monotone(
    points: tuple[tuple[int, float], ...], evaluated: dict[int, BatchEstimate]
) -> None:
    """p_d over evaluated counts must not fall by more than the pooled
    interval half-widths of the two estimates."""
    for (n1, p1), (n2, p2) in zip(points, points[1:]):
        slack = 0.5 * (
            evaluated[n1].ci_high
            - evaluated[n1].ci_low
            + evaluated[n2].ci_high
            - evaluated[n2].ci_low
        )
        if p2 < p1 - slack:
            raise RuntimeError(
                f"detection probability fell from {p1:.3f} at N={n1} to "
                f"{p2:.3f} at N={n2}, beyond interval noise; the monotone "
                "search assumption does not hold for this configuration"
            )


def run_design(
    spec: SweepSpec, threads: int | None = None
) -> list[DesignRow]:
    """Design rows for every (vessel, radius, target) combination."""
    s = spec.settings
    rows = []
    for vessel_name in spec.vessels:
        vessel = _vessel_for(s, vessel_name)
        for radius in s.design_radii:
            for target in s.design_targets:
                rows.append(
                    design_table(
                        vessel,
                        radius,
                        target,
                        s.design_tolerance,
                        s.design_trial_budget,
                        settings=s,
                        master_seed=spec.master_seed,
                        max_n=s.design_max_n,
                        threads=threads,
                    )
                )
    return rows


def _fmt(value: float) -> str:
    """Shortest decimal that round-trips; integral values print as integers."""
    f = float(value)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def write_results(result: SweepResult, path: str) -> None:
    """Emit rows as CSV under the fixed header, newline-terminated."""
    lines = [RESULTS_HEADER]
    for r in result.rows:
        lines.append(
            ",".join(
                (
                    r.vessel,
                    r.variant,
                    r.axis_name,
                    _fmt(r.axis_value),
                    _fmt(r.p_d),
                    _fmt(r.ci_low),
                    _fmt(r.ci_high),
                    str(r.trials),
                    str(r.master_seed),
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_results(path: str) -> SweepResult:
    """Re-read a results CSV; rows round-trip exactly."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != RESULTS_HEADER:
        raise ConfigurationError(
            f"{path}:1: results header must be {RESULTS_HEADER!r}"
        )
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 9:
            raise ConfigurationError(f"{path}:{i}: expected 9 fields")
        rows.append(
            SweepRow(
                vessel=parts[0],
                variant=parts[1],
                axis_name=parts[2],
                axis_value=float(parts[3]),
                p_d=float(parts[4]),
                ci_low=float(parts[5]),
                ci_high=float(parts[6]),
                trials=int(parts[7]),
                master_seed=int(parts[8]),
            )
        )
    kind = {v: k for k, v in AXIS_NAMES.items()}.get(
        rows[0].axis_name if rows else "N", "count_sweep"
    )
    return SweepResult(spec_kind=kind, rows=tuple(rows))


def write_design_rows(rows: list[DesignRow], path: str) -> None:
    lines = [DESIGN_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                (
                    r.vessel,
                    _fmt(r.radius_a_n),
                    _fmt(r.target_p_d),
                    "unattainable" if r.estimated_N is None else str(r.estimated_N),
                    "" if r.achieved_p_d is None else _fmt(r.achieved_p_d),
                    str(r.trials),
                    str(r.master_seed),
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary(
    path: str, *, command: str, config_digest: str, wall_time_s: float, rows: int
) -> None:
    """Run metadata alongside a results file."""
    payload = {
        "tool_version": __version__,
        "command": command,
        "config_digest": config_digest,
        "wall_time_s": round(wall_time_s, 3),
        "rows": rows,
        "written_at_unix": int(time.time()),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def settings_digest(settings: RunSettings) -> str:
    """Stable digest of the fully resolved parameter set."""
    blob = repr(settings).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def reproduce_spec(figure_id: str, settings: RunSettings) -> SweepSpec:
    """The preset sweep behind one result figure or the design table."""
    if figure_id not in FIGURE_IDS:
        raise ConfigurationError(
            f"unknown figure id {figure_id!r}; expected one of "
            f"{', '.join(FIGURE_IDS)}"
        )
    if figure_id == "fig4":
        s = replace(
            settings,
            sweep_kind="count_sweep",
            sweep_axis=settings.sweep_axis or DEFAULT_COUNT_AXIS,
            sweep_variants=("uniform", "laminar"),
            sweep_vessels=_ALL_VESSELS,
        )
    elif figure_id == "fig5":
        s = replace(
            settings,
            sweep_kind="cofactor_sweep",
            sweep_axis=settings.sweep_axis or DEFAULT_COFACTOR_AXIS,
            sweep_variants=("uniform", "laminar"),
            sweep_vessels=("capillary",),
        )
    elif figure_id == "fig6":
        s = replace(
            settings,
            sweep_kind="cofactor_sweep",
            sweep_axis=settings.sweep_axis or DEFAULT_COFACTOR_AXIS,
            sweep_variants=("laminar",),
            sweep_vessels=_ALL_VESSELS,
        )
    elif figure_id == "fig7":
        s = replace(
            settings,
            sweep_kind="margination_sweep",
            sweep_axis=settings.sweep_axis or DEFAULT_MARGINATION_AXIS,
            sweep_variants=("laminar",),
            sweep_vessels=_ALL_VESSELS,
        )
    elif figure_id == "fig8":
        s = replace(
            settings,
            sweep_kind="size_sweep",
            sweep_axis=settings.sweep_axis or DEFAULT_SIZE_AXIS,
            sweep_variants=("simplified", "realistic"),
            sweep_vessels=_ALL_VESSELS,
        )
    else:  # table3
        s = replace(
            settings,
            sweep_kind="design_table",
            sweep_vessels=_ALL_VESSELS,
        )
    return sweep_spec_from_settings(s)

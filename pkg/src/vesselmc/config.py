"""Configuration file parsing and resolution.

Grammar: UTF-8 text, one `key = value` pair per line, dotted section keys,
`#` starts a comment, blank lines ignored. Quantity values take a unit
suffix (9um, 1mm_per_s, 0.1ms); dimensionless values are bare numbers.
List values are comma-separated. Unknown or duplicate keys are rejected
with the offending file and line.

All resolved values are strict SI (m, s, m/s, K, Pa s).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation

from .errors import ConfigurationError
from .flow import (
    PRESET_CELL_COUNTS,
    FlowModel,
    LaminarAnalytic,
    LaminarDiscretized,
    Uniform,
    discretize,
)
from .geometry import NEAR_WALL_FRACTION, VesselKind, VesselSpec, preset
from .kinetics import (
    DEFAULT_BIOMARKER_RADIUS_M,
    DEFAULT_TEMPERATURE_K,
    DEFAULT_VISCOSITY_PA_S,
    SpeciesSpec,
    biomarker_species,
    margination_for_size,
    nanomachine_species,
)
from .release import Regions, ReleasePlan, default_points

# Decimal exponent to SI for recognized unit suffixes, longest suffix first.
_UNIT_SUFFIXES: tuple[tuple[str, int], ...] = (
    ("um_per_s", -6),
    ("mm_per_s", -3),
    ("m_per_s", 0),
    ("nm", -9),
    ("um", -6),
    ("mm", -3),
    ("us", -6),
    ("ms", -3),
    ("m", 0),
    ("s", 0),
)

_FLOW_MODELS = ("uniform", "laminar", "laminar_discretized")
_STRATEGIES = ("auto", "points", "regions")
_DETECTION_MODES = ("brute", "grid")
_SWEEP_KINDS = (
    "count_sweep",
    "cofactor_sweep",
    "margination_sweep",
    "size_sweep",
    "design_table",
)
_FLOW_VARIANTS = ("uniform", "laminar")
_MODEL_VARIANTS = ("simplified", "realistic")

# Default sweep axes, spanning the documented parameter ranges.
DEFAULT_COUNT_AXIS = (20.0, 50.0, 100.0, 200.0, 500.0, 1000.0)
DEFAULT_COFACTOR_AXIS = (0.0125, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0)
DEFAULT_MARGINATION_AXIS = (0.0, 0.05, 0.1, 0.25, 0.5, 0.6)
DEFAULT_SIZE_AXIS = (100e-9, 250e-9, 500e-9, 1000e-9, 1500e-9, 2000e-9)
DEFAULT_DESIGN_RADII = (500e-9, 1000e-9, 2000e-9)
DEFAULT_DESIGN_TARGETS = (0.25, 0.5)

_AXIS_UNITS: dict[str, str | None] = {
    "count_sweep": None,
    "cofactor_sweep": None,
    "margination_sweep": None,
    "size_sweep": "length",
}

_KNOWN_KEYS: dict[str, str] = {
    "vessel.kind": "capillary, venule, arteriole, or custom",
    "vessel.diameter": "cross-section side length, e.g. 9um",
    "vessel.length": "segment length, e.g. 90um",
    "vessel.v_max": "peak axial speed, e.g. 1mm_per_s",
    "vessel.near_wall_fraction": "near-wall band thickness as a fraction of D",
    "flow.model": "uniform, laminar, or laminar_discretized",
    "flow.cells": "cell count for the discretized profile",
    "species.biomarker.radius": "biomarker radius, e.g. 25nm",
    "species.nanomachine.radius": "nanomachine radius, e.g. 1um",
    "species.nanomachine.alpha_v": "velocity cofactor in (0,1], or auto",
    "physics.temperature": "absolute temperature in K",
    "physics.viscosity": "dynamic viscosity in Pa s",
    "kinetics.dt": "integration time step, e.g. 0.1ms",
    "counts.biomarkers": "biomarkers per trial",
    "counts.nanomachines": "nanomachines per trial",
    "release.strategy": "points, regions, or auto",
    "release.margination": "near-wall release fraction in [0,1], or auto",
    "release.jitter": "point-release jitter radius, or auto",
    "release.extent": "axial fraction of the vessel seeded by regions release",
    "detection.d_det": "detection range: contact or an explicit length",
    "detection.margin": "additive sensing margin on top of contact range",
    "detection.mode": "brute or grid (identical results)",
    "sim.t_max": "observation horizon: auto or an explicit duration",
    "sim.trials": "trials per batch",
    "sim.master_seed": "64-bit master seed",
    "sweep.kind": "count_sweep, cofactor_sweep, margination_sweep, size_sweep,"
    " or design_table",
    "sweep.axis": "comma-separated axis values, strictly increasing",
    "sweep.variants": "comma-separated variants for the sweep kind",
    "sweep.vessels": "comma-separated vessel kinds",
    "design.targets": "target detection probabilities in (0,1)",
    "design.radii": "nanomachine radii for the design table",
    "design.tolerance": "absolute p_d acceptance tolerance",
    "design.trial_budget": "trials per design-table evaluation",
    "design.max_n": "search cap on the nanomachine count",
}


@dataclass(frozen=True)
class RunSettings:
    """Fully resolved configuration, SI units, with auto markers kept as None."""

    vessel: VesselSpec
    flow_model: str = "laminar"
    flow_cells: int | None = None  # None: preset count for the vessel kind
    bio_radius: float = DEFAULT_BIOMARKER_RADIUS_M
    nano_radius: float = 1e-6
    alpha_v: float | None = None  # None: derived from the radii
    temperature: float = DEFAULT_TEMPERATURE_K
    viscosity: float = DEFAULT_VISCOSITY_PA_S
    dt: float = 1e-4
    n_biomarkers: int = 3
    n_nanomachines: int = 100
    release_strategy: str = "auto"  # auto: regions (points for count/cofactor sweeps)
    margination: float | None = 0.0  # None: size-derived
    jitter: float | None = None  # None: half the vessel diameter
    extent: float = 0.1  # inlet slab, as a fraction of vessel length
    d_det: float | None = None  # None: contact range
    margin: float = 0.0
    detection_mode: str = "brute"
    t_max: float | None = None  # None: 4*L/v_max
    trials: int = 100
    master_seed: int = 1
    sweep_kind: str = "count_sweep"
    sweep_axis: tuple[float, ...] | None = None
    sweep_variants: tuple[str, ...] | None = None
    sweep_vessels: tuple[str, ...] | None = None
    design_targets: tuple[float, ...] = DEFAULT_DESIGN_TARGETS
    design_radii: tuple[float, ...] = DEFAULT_DESIGN_RADII
    design_tolerance: float = 0.02
    design_trial_budget: int = 200
    design_max_n: int = 100_000


def parse_quantity(text: str, key: str, where: str) -> float:
    """A number with an optional unit suffix, converted to SI.

    Scaling happens in decimal, so 1000nm and 1um resolve to the same
    float.
    """
    raw = text.strip()
    for suffix, exponent in _UNIT_SUFFIXES:
        if raw.endswith(suffix):
            body = raw[: -len(suffix)].strip()
            if body:
                try:
                    return float(Decimal(body).scaleb(exponent))
                except InvalidOperation:
                    break
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(
            f"{where}: key {key!r} needs a number with an optional unit "
            f"suffix, got {text!r}"
        ) from None


def parse_pairs(text: str, source: str) -> dict[str, tuple[str, int]]:
    """Raw key -> (value, line number) pairs from config text."""
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(
                f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}"
            )
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigurationError(
                f"{source}:{lineno}: unknown key {key!r}"
            )
        if not value:
            raise ConfigurationError(f"{source}:{lineno}: key {key!r} has no value")
        if key in pairs:
            raise ConfigurationError(
                f"{source}:{lineno}: duplicate key {key!r} "
                f"(first set on line {pairs[key][1]})"
            )
        pairs[key] = (value, lineno)
    return pairs


def _where(source: str, lineno: int) -> str:
    return f"{source}:{lineno}"


def _parse_int(value: str, key: str, where: str) -> int:
    try:
        n = int(value, 0)
    except ValueError:
        raise ConfigurationError(
            f"{where}: key {key!r} needs an integer, got {value!r}"
        ) from None
    return n

def _parse_float(value: str, key: str, where: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigurationError(
            f"{where}: key {key!r} needs a number, got {value!r}"
        ) from None


def _parse_choice(value: str, choices: tuple[str, ...], key: str, where: str) -> str:
    if value not in choices:
        raise ConfigurationError(
            f"{where}: key {key!r} must be one of {', '.join(choices)}, "
            f"got {value!r}"
        )
    return value


def _parse_list(
    value: str, key: str, where: str, unit: str | None
) -> tuple[float, ...]:
    items = [v.strip() for v in value.split(",") if v.strip()]
    if not items:
        raise ConfigurationError(f"{where}: key {key!r} needs at least one value")
    if unit == "length":
        return tuple(parse_quantity(v, key, where) for v in items)
    return tuple(_parse_float(v, key, where) for v in items)


def resolve_settings(
    pairs: dict[str, tuple[str, int]], source: str = "<config>"
) -> RunSettings:
    """Validate raw pairs and fill defaults into a RunSettings."""

    def take(key: str) -> tuple[str, str] | None:
        if key in pairs:
            value, lineno = pairs[key]
            return value, _where(source, lineno)
        return None

    kind_entry = take("vessel.kind")
    kind_name = kind_entry[0] if kind_entry else "capillary"
    try:
        kind = VesselKind(kind_name)
    except ValueError:
        raise ConfigurationError(
            f"{kind_entry[1] if kind_entry else source}: key 'vessel.kind' must "
            f"be one of capillary, venule, arteriole, custom, got {kind_name!r}"
        ) from None

    dims: dict[str, float] = {}
    for key, name in (
        ("vessel.diameter", "diameter_D"),
        ("vessel.length", "length_L"),
        ("vessel.v_max", "v_max"),
    ):
        entry = take(key)
        if entry:
            dims[name] = parse_quantity(entry[0], key, entry[1])

    frac = NEAR_WALL_FRACTION
    entry = take("vessel.near_wall_fraction")
    if entry:
        frac = _parse_float(entry[0], "vessel.near_wall_fraction", entry[1])
        if not 0.0 < frac < 0.5:
            raise ConfigurationError(
                f"{entry[1]}: key 'vessel.near_wall_fraction' must lie in "
                f"(0, 0.5), got {entry[0]}"
            )

    if kind is VesselKind.CUSTOM:
        missing = [
            k
            for k, n in (
                ("vessel.diameter", "diameter_D"),
                ("vessel.length", "length_L"),
                ("vessel.v_max", "v_max"),
            )
            if n not in dims
        ]
        if missing:
            raise ConfigurationError(
                f"{source}: custom vessels need {', '.join(missing)}"
            )
        vessel = VesselSpec(kind=kind, near_wall_fraction=frac, **dims)
    else:
        base = preset(kind)
        vessel = VesselSpec(
            kind=kind,
            diameter_D=dims.get("diameter_D", base.diameter_D),
            length_L=dims.get("length_L", base.length_L),
            v_max=dims.get("v_max", base.v_max),
            near_wall_fraction=frac,
        )

    settings = RunSettings(vessel=vessel)

    entry = take("flow.model")
    if entry:
        settings = replace(
            settings,
            flow_model=_parse_choice(entry[0], _FLOW_MODELS, "flow.model", entry[1]),
        )
    entry = take("flow.cells")
    if entry:
        cells = _parse_int(entry[0], "flow.cells", entry[1])
        if cells < 1:
            raise ConfigurationError(
                f"{entry[1]}: key 'flow.cells' must be positive, got {cells}"
            )
        settings = replace(settings, flow_cells=cells)

    for key, attr in (
        ("species.biomarker.radius", "bio_radius"),
        ("species.nanomachine.radius", "nano_radius"),
    ):
        entry = take(key)
        if entry:
            value = parse_quantity(entry[0], key, entry[1])
            if value <= 0:
                raise ConfigurationError(
                    f"{entry[1]}: key {key!r} must be positive, got {entry[0]}"
                )
            settings = replace(settings, **{attr: value})
    entry = take("detection.margin")
    if entry:
        value = parse_quantity(entry[0], "detection.margin", entry[1])
        if value < 0:
            raise ConfigurationError(
                f"{entry[1]}: key 'detection.margin' must be non-negative, "
                f"got {entry[0]}"
            )
        settings = replace(settings, margin=value)

    entry = take("species.nanomachine.alpha_v")
    if entry and entry[0] != "auto":
        alpha = _parse_float(entry[0], "species.nanomachine.alpha_v", entry[1])
        if not 0.0 < alpha <= 1.0:
            raise ConfigurationError(
                f"{entry[1]}: key 'species.nanomachine.alpha_v' must lie in "
                f"(0, 1], got {alpha}"
            )
        settings = replace(settings, alpha_v=alpha)

    for key, attr, positive in (
        ("physics.temperature", "temperature", True),
        ("physics.viscosity", "viscosity", True),
        ("release.extent", "extent", True),
        ("design.tolerance", "design_tolerance", True),
    ):
        entry = take(key)
        if entry:
            value = _parse_float(entry[0], key, entry[1])
            if positive and value <= 0:
                raise ConfigurationError(
                    f"{entry[1]}: key {key!r} must be positive, got {value}"
                )
            settings = replace(settings, **{attr: value})
    if settings.extent > 1.0:
        raise ConfigurationError(
            f"{source}: key 'release.extent' must lie in (0, 1], got "
            f"{settings.extent}"
        )

    entry = take("kinetics.dt")
    if entry:
        dt = parse_quantity(entry[0], "kinetics.dt", entry[1])
        if dt <= 0:
            raise ConfigurationError(
                f"{entry[1]}: key 'kinetics.dt' must be positive, got {entry[0]}"
            )
        settings = replace(settings, dt=dt)

    for key, attr in (
        ("counts.biomarkers", "n_biomarkers"),
        ("counts.nanomachines", "n_nanomachines"),
        ("sim.trials", "trials"),
        ("design.trial_budget", "design_trial_budget"),
        ("design.max_n", "design_max_n"),
    ):
        entry = take(key)
        if entry:
            n = _parse_int(entry[0], key, entry[1])
            if n < 1:
                raise ConfigurationError(
                    f"{entry[1]}: key {key!r} must be at least 1, got {n}"
                )
            settings = replace(settings, **{attr: n})

    entry = take("sim.master_seed")
    if entry:
        seed = _parse_int(entry[0], "sim.master_seed", entry[1])
        if seed < 0:
            raise ConfigurationError(
                f"{entry[1]}: key 'sim.master_seed' must be non-negative, "
                f"got {seed}"
            )
        settings = replace(settings, master_seed=seed)

    entry = take("release.strategy")
    if entry:
        settings = replace(
            settings,
            release_strategy=_parse_choice(
                entry[0], _STRATEGIES, "release.strategy", entry[1]
            ),
        )
    entry = take("release.margination")
    if entry:
        if entry[0] == "auto":
            settings = replace(settings, margination=None)
        else:
            m = _parse_float(entry[0], "release.margination", entry[1])
            if not 0.0 <= m <= 1.0:
                raise ConfigurationError(
                    f"{entry[1]}: key 'release.margination' must lie in [0, 1],"
                    f" got {m}"
                )
            settings = replace(settings, margination=m)
    entry = take("release.jitter")
    if entry and entry[0] != "auto":
        jitter = parse_quantity(entry[0], "release.jitter", entry[1])
        if jitter < 0:
            raise ConfigurationError(
                f"{entry[1]}: key 'release.jitter' must be non-negative, "
                f"got {entry[0]}"
            )
        settings = replace(settings, jitter=jitter)

    entry = take("detection.d_det")
    if entry and entry[0] != "contact":
        d = parse_quantity(entry[0], "detection.d_det", entry[1])
        if d <= 0:
            raise ConfigurationError(
                f"{entry[1]}: key 'detection.d_det' must be positive or "
                f"'contact', got {entry[0]}"
            )
        settings = replace(settings, d_det=d)
    entry = take("detection.mode")
    if entry:
        settings = replace(
            settings,
            detection_mode=_parse_choice(
                entry[0], _DETECTION_MODES, "detection.mode", entry[1]
            ),
        )

    entry = take("sim.t_max")
    if entry and entry[0] != "auto":
        t = parse_quantity(entry[0], "sim.t_max", entry[1])
        if t <= 0:
            raise ConfigurationError(
                f"{entry[1]}: key 'sim.t_max' must be positive or 'auto', "
                f"got {entry[0]}"
            )
        settings = replace(settings, t_max=t)

    entry = take("sweep.kind")
    if entry:
        settings = replace(
            settings,
            sweep_kind=_parse_choice(entry[0], _SWEEP_KINDS, "sweep.kind", entry[1]),
        )
    entry = take("sweep.axis")
    if entry:
        axis = _parse_list(
            entry[0], "sweep.axis", entry[1], _AXIS_UNITS.get(settings.sweep_kind)
        )
        settings = replace(settings, sweep_axis=axis)
    entry = take("sweep.variants")
    if entry:
        names = tuple(v.strip() for v in entry[0].split(",") if v.strip())
        allowed = (
            _MODEL_VARIANTS if settings.sweep_kind == "size_sweep" else _FLOW_VARIANTS
        )
        for name in names:
            if name not in allowed:
                raise ConfigurationError(
                    f"{entry[1]}: key 'sweep.variants' for {settings.sweep_kind}"
                    f" must draw from {', '.join(allowed)}, got {name!r}"
                )
        if not names:
            raise ConfigurationError(
                f"{entry[1]}: key 'sweep.variants' needs at least one value"
            )
        settings = replace(settings, sweep_variants=names)
    entry = take("sweep.vessels")
    if entry:
        names = tuple(v.strip() for v in entry[0].split(",") if v.strip())
        for name in names:
            if name not in ("capillary", "venule", "arteriole", "custom"):
                raise ConfigurationError(
                    f"{entry[1]}: key 'sweep.vessels' has unknown vessel "
                    f"kind {name!r}"
                )
        if not names:
            raise ConfigurationError(
                f"{entry[1]}: key 'sweep.vessels' needs at least one value"
            )
        settings = replace(settings, sweep_vessels=names)

    entry = take("design.targets")
    if entry:
        targets = _parse_list(entry[0], "design.targets", entry[1], None)
        for t in targets:
            if not 0.0 < t < 1.0:
                raise ConfigurationError(
                    f"{entry[1]}: key 'design.targets' values must lie in "
                    f"(0, 1), got {t}"
                )
        settings = replace(settings, design_targets=targets)
    entry = take("design.radii")
    if entry:
        radii = _parse_list(entry[0], "design.radii", entry[1], "length")
        for r in radii:
            if r <= 0:
                raise ConfigurationError(
                    f"{entry[1]}: key 'design.radii' values must be positive,"
                    f" got {r}"
                )
        settings = replace(settings, design_radii=radii)

    return settings


def parse_settings(text: str, source: str = "<config>") -> RunSettings:
    return resolve_settings(parse_pairs(text, source), source)


def load_settings(path: str) -> RunSettings:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from None
    return parse_settings(text, source=path)


def apply_overrides(
    settings_pairs: dict[str, tuple[str, int]], overrides: list[str]
) -> dict[str, tuple[str, int]]:
    """Merge `key=value` override strings over file pairs; overrides win."""
    merged = dict(settings_pairs)
    for i, item in enumerate(overrides, start=1):
        if "=" not in item:
            raise ConfigurationError(
                f"override #{i}: expected key=value, got {item!r}"
            )
        key, _, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigurationError(f"override #{i}: unknown key {key!r}")
        if not value:
            raise ConfigurationError(f"override #{i}: key {key!r} has no value")
        merged[key] = (value, -i)
    return merged


def effective_t_max(settings: RunSettings, vessel: VesselSpec) -> float:
    """Observation horizon: explicit, or four centerline transit times."""
    if settings.t_max is not None:
        return settings.t_max
    return 4.0 * vessel.length_L / vessel.v_max


def default_cell_count(vessel: VesselSpec) -> int:
    return PRESET_CELL_COUNTS.get(vessel.kind, 100)


def flow_for(
    settings: RunSettings, vessel: VesselSpec, variant: str | None = None
) -> FlowModel:
    """Flow model for a vessel, optionally forced by a sweep variant.

    Uniform flow is a plug at the vessel's quoted representative speed, the
    same value the laminar profile takes at the centerline.
    """
    model = settings.flow_model
    if variant == "uniform" or (variant is None and model == "uniform"):
        return Uniform(vessel.v_max)
    if model == "laminar_discretized":
        cells = settings.flow_cells or default_cell_count(vessel)
        return LaminarDiscretized(discretize(vessel.v_max, vessel, cells))
    return LaminarAnalytic(v_max=vessel.v_max, R=vessel.radius)


def build_species(
    settings: RunSettings,
    nano_radius: float | None = None,
    alpha_v: float | None = None,
) -> tuple[SpeciesSpec, SpeciesSpec]:
    """(biomarker, nanomachine) species from settings plus overrides."""
    a_n = nano_radius if nano_radius is not None else settings.nano_radius
    alpha = alpha_v if alpha_v is not None else settings.alpha_v
    bio = biomarker_species(
        settings.bio_radius, T=settings.temperature, mu=settings.viscosity
    )
    nano = nanomachine_species(
        a_n,
        reference_radius=settings.bio_radius,
        alpha_v=alpha,
        T=settings.temperature,
        mu=settings.viscosity,
    )
    return bio, nano


def effective_margination(settings: RunSettings, a_n: float) -> float:
    if settings.margination is not None:
        return settings.margination
    return margination_for_size(a_n)


def release_plan_for(
    settings: RunSettings,
    vessel: VesselSpec,
    margination: float | None = None,
    prefer_points: bool = False,
) -> ReleasePlan:
    """Release plan from the configured strategy.

    Strategy "auto" resolves to regions, or to the paired downstream points
    when the caller prefers them (fixed-geometry chase sweeps).
    """
    strategy = settings.release_strategy
    if strategy == "auto":
        strategy = "points" if prefer_points else "regions"
    if strategy == "points":
        plan = default_points(vessel)
        if settings.jitter is not None:
            plan = ReleasePlan(strategy=plan.strategy, jitter_radius=settings.jitter)
        return plan
    M = (
        margination
        if margination is not None
        else effective_margination(settings, settings.nano_radius)
    )
    return ReleasePlan(
        strategy=Regions(margination_M=M, axial_fraction=settings.extent),
        jitter_radius=0.0,
    )

"""Config grammar, resolution, and derived run components."""

import re

import pytest

from vesselmc.config import (
    RunSettings,
    apply_overrides,
    build_species,
    default_cell_count,
    effective_margination,
    effective_t_max,
    flow_for,
    load_settings,
    parse_pairs,
    parse_quantity,
    parse_settings,
    release_plan_for,
    resolve_settings,
)
from vesselmc.errors import ConfigurationError
from vesselmc.flow import LaminarAnalytic, LaminarDiscretized, Uniform
from vesselmc.geometry import VesselKind, preset
from vesselmc.kinetics import margination_for_size, velocity_cofactor
from vesselmc.release import Points, Regions

CAP = preset(VesselKind.CAPILLARY)


def test_defaults():
    s = parse_settings("")
    assert s.vessel == CAP
    assert s.flow_model == "laminar"
    assert s.flow_cells is None
    assert s.bio_radius == 25e-9
    assert s.nano_radius == 1e-6
    assert s.alpha_v is None
    assert s.temperature == 310.0
    assert s.viscosity == 4e-3
    assert s.dt == 1e-4
    assert (s.n_biomarkers, s.n_nanomachines) == (3, 100)
    assert s.release_strategy == "auto"
    assert s.margination == 0.0
    assert s.jitter is None
    assert s.extent == 0.1
    assert s.d_det is None
    assert s.margin == 0.0
    assert s.detection_mode == "brute"
    assert s.t_max is None
    assert s.trials == 100
    assert s.master_seed == 1
    assert s.sweep_kind == "count_sweep"
    assert s.sweep_axis is None and s.sweep_variants is None
    assert s.design_targets == (0.25, 0.5)
    assert s.design_radii == (500e-9, 1000e-9, 2000e-9)
    assert s.design_tolerance == 0.02
    assert s.design_trial_budget == 200
    assert s.design_max_n == 100_000


def test_parse_quantity_units():
    where = "f:1"
    assert parse_quantity("1000nm", "k", where) == 1e-6
    assert parse_quantity("1um", "k", where) == 1e-6
    assert parse_quantity("1000nm", "k", where) == parse_quantity("1um", "k", where)
    assert parse_quantity("0.1ms", "k", where) == 1e-4
    assert parse_quantity("1mm_per_s", "k", where) == 1e-3
    assert parse_quantity("250um_per_s", "k", where) == 2.5e-4
    assert parse_quantity("9um", "k", where) == 9e-6
    assert parse_quantity("25nm", "k", where) == 2.5e-8
    assert parse_quantity("1us", "k", where) == 1e-6
    assert parse_quantity("2mm", "k", where) == 2e-3
    assert parse_quantity("1m", "k", where) == 1.0
    assert parse_quantity("0.5s", "k", where) == 0.5
    assert parse_quantity("310", "k", where) == 310.0
    assert parse_quantity(" 2.5 ", "k", where) == 2.5
    assert parse_quantity("3e-6", "k", where) == 3e-6


def test_parse_quantity_errors():
    with pytest.raises(ConfigurationError, match=r"f:3.*'kinetics\.dt'"):
        parse_quantity("fast", "kinetics.dt", "f:3")
    with pytest.raises(ConfigurationError):
        parse_quantity("um", "k", "f:1")
    with pytest.raises(ConfigurationError):
        parse_quantity("", "k", "f:1")


def test_parse_pairs():
    text = (
        "vessel.kind = venule\n"
        "# full-line comment\n"
        "\n"
        "sim.trials = 7  # inline comment\n"
    )
    pairs = parse_pairs(text, "run.cfg")
    assert pairs == {"vessel.kind": ("venule", 1), "sim.trials": ("7", 4)}


def test_parse_pairs_errors():
    with pytest.raises(ConfigurationError, match=r"run\.cfg:1: unknown key 'bogus'"):
        parse_pairs("bogus = 1", "run.cfg")
    with pytest.raises(ConfigurationError, match="expected 'key = value'"):
        parse_pairs("vessel.kind venule", "run.cfg")
    with pytest.raises(ConfigurationError, match="has no value"):
        parse_pairs("sim.trials =", "run.cfg")
    dup = "sim.trials = 5\nvessel.kind = venule\nsim.trials = 9\n"
    with pytest.raises(
        ConfigurationError,
        match=r"run\.cfg:3: duplicate key 'sim\.trials' \(first set on line 1\)",
    ):
        parse_pairs(dup, "run.cfg")


def test_vessel_resolution():
    s = parse_settings("vessel.kind = venule\nvessel.v_max = 5mm_per_s")
    assert s.vessel.kind is VesselKind.VENULE
    assert s.vessel.diameter_D == 20e-6
    assert s.vessel.length_L == 200e-6
    assert s.vessel.v_max == 5e-3

    s = parse_settings(
        "vessel.kind = custom\n"
        "vessel.diameter = 8um\n"
        "vessel.length = 64um\n"
        "vessel.v_max = 2mm_per_s\n"
    )
    assert s.vessel.diameter_D == 8e-6
    assert s.vessel.length_L == 64e-6

    with pytest.raises(ConfigurationError, match="custom vessels need"):
        parse_settings("vessel.kind = custom\nvessel.diameter = 8um")
    with pytest.raises(ConfigurationError, match="vessel.kind"):
        parse_settings("vessel.kind = artery")


def test_near_wall_fraction_key():
    s = parse_settings("vessel.near_wall_fraction = 0.25")
    assert s.vessel.near_wall_fraction == 0.25
    # 0.02566 approximates a 10% area reading of the near-wall region.
    s = parse_settings("vessel.near_wall_fraction = 0.02566")
    assert s.vessel.delta == pytest.approx(0.02566 * 9e-6, rel=1e-12)
    with pytest.raises(ConfigurationError, match="near_wall_fraction"):
        parse_settings("vessel.near_wall_fraction = 0.5")
    with pytest.raises(ConfigurationError, match="near_wall_fraction"):
        parse_settings("vessel.near_wall_fraction = 0")


def test_flow_keys():
    assert parse_settings("flow.model = uniform").flow_model == "uniform"
    assert parse_settings("flow.cells = 50").flow_cells == 50
    with pytest.raises(ConfigurationError, match="must be one of uniform, laminar"):
        parse_settings("flow.model = plug")
    with pytest.raises(ConfigurationError, match="flow.cells"):
        parse_settings("flow.cells = 0")


def test_species_keys():
    s = parse_settings(
        "species.biomarker.radius = 30nm\nspecies.nanomachine.radius = 500nm"
    )
    assert s.bio_radius == 3e-8
    assert s.nano_radius == 5e-7
    assert parse_settings("species.nanomachine.alpha_v = auto").alpha_v is None
    assert parse_settings("species.nanomachine.alpha_v = 0.5").alpha_v == 0.5
    with pytest.raises(ConfigurationError, match="alpha_v"):
        parse_settings("species.nanomachine.alpha_v = 0")
    with pytest.raises(ConfigurationError, match="alpha_v"):
        parse_settings("species.nanomachine.alpha_v = 1.5")
    with pytest.raises(ConfigurationError, match="radius"):
        parse_settings("species.nanomachine.radius = -1um")


def test_release_keys():
    assert parse_settings("release.strategy = points").release_strategy == "points"
    assert parse_settings("release.margination = auto").margination is None
    assert parse_settings("release.margination = 0.37").margination == 0.37
    assert parse_settings("release.jitter = auto").jitter is None
    assert parse_settings("release.jitter = 2um").jitter == 2e-6
    assert parse_settings("release.extent = 1.0").extent == 1.0
    with pytest.raises(ConfigurationError, match="margination"):
        parse_settings("release.margination = 1.1")
    with pytest.raises(ConfigurationError, match="jitter"):
        parse_settings("release.jitter = -1um")
    with pytest.raises(ConfigurationError, match="extent"):
        parse_settings("release.extent = 0")
    with pytest.raises(ConfigurationError, match=re.escape("(0, 1]")):
        parse_settings("release.extent = 1.2")
    with pytest.raises(ConfigurationError, match="release.strategy"):
        parse_settings("release.strategy = ring")


def test_detection_and_sim_keys():
    assert parse_settings("detection.d_det = contact").d_det is None
    assert parse_settings("detection.d_det = 1.5um").d_det == 1.5e-6
    assert parse_settings("detection.margin = 100nm").margin == 1e-7
    assert parse_settings("detection.mode = grid").detection_mode == "grid"
    assert parse_settings("sim.t_max = auto").t_max is None
    assert parse_settings("sim.t_max = 0.5s").t_max == 0.5
    assert parse_settings("sim.trials = 7").trials == 7
    assert parse_settings("sim.master_seed = 0x10").master_seed == 16
    assert parse_settings("kinetics.dt = 0.05ms").dt == 5e-5
    with pytest.raises(ConfigurationError, match="d_det"):
        parse_settings("detection.d_det = -1um")
    with pytest.raises(ConfigurationError, match="margin"):
        parse_settings("detection.margin = -1nm")
    with pytest.raises(ConfigurationError, match="mode"):
        parse_settings("detection.mode = kd_tree")
    with pytest.raises(ConfigurationError, match="t_max"):
        parse_settings("sim.t_max = 0s")
    with pytest.raises(ConfigurationError, match="at least 1"):
        parse_settings("sim.trials = 0")
    with pytest.raises(ConfigurationError, match="master_seed"):
        parse_settings("sim.master_seed = -1")
    with pytest.raises(ConfigurationError, match="dt"):
        parse_settings("kinetics.dt = 0ms")
    with pytest.raises(ConfigurationError, match="at least one particle|at least 1"):
        parse_settings("counts.biomarkers = 0")


def test_sweep_keys():
    s = parse_settings("sweep.kind = size_sweep\nsweep.axis = 100nm, 250nm, 1um")
    assert s.sweep_kind == "size_sweep"
    assert s.sweep_axis == (1e-7, 2.5e-7, 1e-6)
    s = parse_settings("sweep.axis = 20, 50, 100")
    assert s.sweep_axis == (20.0, 50.0, 100.0)
    s = parse_settings("sweep.variants = uniform, laminar")
    assert s.sweep_variants == ("uniform", "laminar")
    s = parse_settings("sweep.kind = size_sweep\nsweep.variants = simplified")
    assert s.sweep_variants == ("simplified",)
    s = parse_settings("sweep.vessels = capillary, arteriole")
    assert s.sweep_vessels == ("capillary", "arteriole")
    with pytest.raises(ConfigurationError, match="sweep.kind"):
        parse_settings("sweep.kind = pressure_sweep")
    with pytest.raises(ConfigurationError, match="must draw from uniform, laminar"):
        parse_settings("sweep.variants = simplified")
    with pytest.raises(ConfigurationError, match="must draw from simplified"):
        parse_settings("sweep.kind = size_sweep\nsweep.variants = uniform")
    with pytest.raises(ConfigurationError, match="unknown vessel"):
        parse_settings("sweep.vessels = vein")


def test_design_keys():
    s = parse_settings(
        "design.targets = 0.3, 0.6\n"
        "design.radii = 500nm, 1um\n"
        "design.tolerance = 0.05\n"
        "design.trial_budget = 50\n"
        "design.max_n = 5000\n"
    )
    assert s.design_targets == (0.3, 0.6)
    assert s.design_radii == (5e-7, 1e-6)
    assert s.design_tolerance == 0.05
    assert s.design_trial_budget == 50
    assert s.design_max_n == 5000
    with pytest.raises(ConfigurationError, match="design.targets"):
        parse_settings("design.targets = 1.0")
    with pytest.raises(ConfigurationError, match="design.targets"):
        parse_settings("design.targets = 0.5, 0")
    with pytest.raises(ConfigurationError, match="design.radii"):
        parse_settings("design.radii = -1um")
    with pytest.raises(ConfigurationError, match="design.tolerance"):
        parse_settings("design.tolerance = 0")
    with pytest.raises(ConfigurationError, match="design.trial_budget"):
        parse_settings("design.trial_budget = 0")


def test_apply_overrides():
    pairs = parse_pairs("sim.trials = 5\nvessel.kind = venule", "run.cfg")
    merged = apply_overrides(pairs, ["sim.trials=9", "flow.model = uniform"])
    s = resolve_settings(merged, "run.cfg")
    assert s.trials == 9
    assert s.vessel.kind is VesselKind.VENULE
    assert s.flow_model == "uniform"
    with pytest.raises(ConfigurationError, match="override #1: unknown key"):
        apply_overrides({}, ["bogus=1"])
    with pytest.raises(ConfigurationError, match="override #2: expected key=value"):
        apply_overrides({}, ["sim.trials=9", "nonsense"])
    with pytest.raises(ConfigurationError, match="has no value"):
        apply_overrides({}, ["sim.trials="])


def test_load_settings(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("sim.trials = 12\n", encoding="utf-8")
    assert load_settings(str(path)).trials == 12
    with pytest.raises(ConfigurationError, match="cannot read config"):
        load_settings(str(tmp_path / "absent.cfg"))
    (tmp_path / "bad.cfg").write_text("junk\n", encoding="utf-8")
    with pytest.raises(ConfigurationError, match=r"bad\.cfg:1"):
        load_settings(str(tmp_path / "bad.cfg"))


def test_load_settings_reports_path_and_line(tmp_path):
    path = tmp_path / "lines.cfg"
    path.write_text("sim.trials = 5\nsim.trials = 6\n", encoding="utf-8")
    with pytest.raises(ConfigurationError, match=r"lines\.cfg:2: duplicate"):
        load_settings(str(path))


def test_effective_t_max():
    s = parse_settings("")
    assert effective_t_max(s, s.vessel) == 4.0 * 90e-6 / 1e-3
    s = parse_settings("sim.t_max = 0.05s")
    assert effective_t_max(s, s.vessel) == 0.05
    ven = preset(VesselKind.VENULE)
    assert effective_t_max(parse_settings(""), ven) == 4.0 * ven.length_L / ven.v_max


def test_default_cell_count():
    assert default_cell_count(preset(VesselKind.CAPILLARY)) == 81
    assert default_cell_count(preset(VesselKind.VENULE)) == 200
    assert default_cell_count(preset(VesselKind.ARTERIOLE)) == 300
    custom = parse_settings(
        "vessel.kind = custom\nvessel.diameter = 8um\n"
        "vessel.length = 64um\nvessel.v_max = 2mm_per_s\n"
    ).vessel
    assert default_cell_count(custom) == 100


def test_flow_for():
    s = parse_settings("")
    flow = flow_for(s, s.vessel)
    assert flow == LaminarAnalytic(v_max=CAP.v_max, R=CAP.radius)
    assert flow_for(s, s.vessel, variant="uniform") == Uniform(CAP.v_max)
    assert flow_for(s, s.vessel, variant="laminar") == flow

    s = parse_settings("flow.model = uniform")
    assert flow_for(s, s.vessel) == Uniform(CAP.v_max)

    s = parse_settings("flow.model = laminar_discretized")
    disc = flow_for(s, s.vessel)
    assert isinstance(disc, LaminarDiscretized)
    assert disc.grid.cell_count == 81
    assert flow_for(s, s.vessel, variant="uniform") == Uniform(CAP.v_max)

    s = parse_settings("flow.model = laminar_discretized\nflow.cells = 50")
    assert flow_for(s, s.vessel).grid.cell_count == 50


def test_build_species():
    s = parse_settings("")
    bio, nano = build_species(s)
    assert bio.radius_a == 25e-9 and bio.alpha_v == 1.0
    assert nano.radius_a == 1e-6
    assert nano.alpha_v == velocity_cofactor(1e-6, 25e-9) == 0.025

    s = parse_settings("species.nanomachine.alpha_v = 0.5")
    assert build_species(s)[1].alpha_v == 0.5
    # Call-site overrides beat settings.
    assert build_species(s, alpha_v=0.3)[1].alpha_v == 0.3
    assert build_species(s, nano_radius=5e-7)[1].radius_a == 5e-7

    s = parse_settings("physics.temperature = 300\nphysics.viscosity = 1e-3")
    bio, nano = build_species(s)
    assert bio.temperature_T == 300.0 and nano.viscosity_mu == 1e-3


def test_effective_margination():
    s = parse_settings("")
    assert effective_margination(s, 1e-6) == 0.0
    s = parse_settings("release.margination = auto")
    assert effective_margination(s, 1e-6) == margination_for_size(1e-6)
    s = parse_settings("release.margination = 0.6")
    assert effective_margination(s, 2e-6) == 0.6


def test_release_plan_for():
    s = parse_settings("")
    plan = release_plan_for(s, s.vessel)
    assert isinstance(plan.strategy, Regions)
    assert plan.strategy.margination_M == 0.0
    assert plan.strategy.axial_fraction == 0.1
    assert plan.jitter_radius == 0.0

    plan = release_plan_for(s, s.vessel, prefer_points=True)
    assert isinstance(plan.strategy, Points)
    assert plan.jitter_radius == 0.5 * CAP.diameter_D

    s = parse_settings("release.jitter = 1um")
    assert release_plan_for(s, s.vessel, prefer_points=True).jitter_radius == 1e-6

    s = parse_settings("release.strategy = points")
    assert isinstance(release_plan_for(s, s.vessel).strategy, Points)

    s = parse_settings("release.strategy = regions\nrelease.extent = 0.35")
    plan = release_plan_for(s, s.vessel, margination=0.6)
    assert plan.strategy.margination_M == 0.6
    assert plan.strategy.axial_fraction == 0.35

    s = parse_settings("release.strategy = regions\nrelease.margination = auto")
    plan = release_plan_for(s, s.vessel)
    assert plan.strategy.margination_M == margination_for_size(1e-6)

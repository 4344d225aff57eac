"""Command-line interface: single runs, sweeps, design tables, reproductions.

Exit codes: 0 success, 2 configuration or usage error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace

from .config import RunSettings, apply_overrides, parse_pairs, resolve_settings
from .engine import TrialOutcome, pool_outcomes, run_trials
from .errors import ConfigurationError
from .harness import (
    FIGURE_IDS,
    base_trial_config,
    reproduce_spec,
    run_design,
    run_sweep,
    settings_digest,
    sweep_spec_from_settings,
    write_design_rows,
    write_results,
    write_summary,
)

EVENTS_HEADER = "trial,step,time_s,nanomachine_id,biomarker_id,x,y,z"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vesselmc",
        description="Monte Carlo nanomachine biomarker detection in "
        "microvascular segments.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="configuration file")
        p.add_argument(
            "--out", metavar="DIR", default=".", help="output directory"
        )
        p.add_argument(
            "--seed",
            metavar="U64",
            type=int,
            help="master seed (wins over config and overrides)",
        )
        p.add_argument(
            "--threads", metavar="N", type=int, help="worker thread cap"
        )
        p.add_argument(
            "--override",
            metavar="K=V",
            action="append",
            default=[],
            help="set a config key (repeatable, applied after the file)",
        )
        verbosity = p.add_mutually_exclusive_group()
        verbosity.add_argument(
            "--quiet", action="store_true", help="suppress the stdout summary"
        )
        verbosity.add_argument(
            "--verbose", action="store_true", help="progress notes on stderr"
        )

    p_run = sub.add_parser("run", help="one batch at the configured parameters")
    common(p_run)
    p_run.add_argument(
        "--events",
        action="store_true",
        help="write per-trial detection events to events.csv",
    )

    p_sweep = sub.add_parser("sweep", help="run the configured parameter sweep")
    common(p_sweep)

    p_design = sub.add_parser(
        "design-table",
        help="smallest nanomachine counts reaching the configured targets",
    )
    common(p_design)

    p_repro = sub.add_parser(
        "reproduce", help="run a preset sweep behind one result figure"
    )
    p_repro.add_argument("figure_id", choices=FIGURE_IDS)
    common(p_repro)

    p_validate = sub.add_parser(
        "validate", help="parse the config and print the resolved parameters"
    )
    common(p_validate)

    return parser


def _load(args: argparse.Namespace) -> RunSettings:
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigurationError(
                f"cannot read config {args.config!r}: {exc}"
            ) from None
        pairs = parse_pairs(text, args.config)
        source = args.config
    else:
        pairs, source = {}, "<defaults>"
    pairs = apply_overrides(pairs, args.override)
    if args.seed is not None:
        pairs["sim.master_seed"] = (str(args.seed), 0)
    return resolve_settings(pairs, source)


def _fmt_length(x: float) -> str:
    if x < 1e-6:
        return f"{x * 1e9:g} nm"
    if x < 1e-3:
        return f"{x * 1e6:g} um"
    if x < 1.0:
        return f"{x * 1e3:g} mm"
    return f"{x:g} m"


def _fmt_speed(v: float) -> str:
    if v < 1.0:
        return f"{v * 1e3:g} mm_per_s"
    return f"{v:g} m_per_s"


def describe_settings(settings: RunSettings) -> str:
    """The fully resolved parameter set, one key per line."""
    cfg = base_trial_config(settings)
    vessel = settings.vessel
    alpha = cfg.nanomachine_species.alpha_v
    lines = [
        f"vessel.kind = {vessel.kind.value}",
        f"vessel.diameter = {_fmt_length(vessel.diameter_D)}",
        f"vessel.length = {_fmt_length(vessel.length_L)}",
        f"vessel.v_max = {_fmt_speed(vessel.v_max)}",
        f"vessel.near_wall_fraction = {vessel.near_wall_fraction:g}",
        f"flow.model = {settings.flow_model}",
        f"species.biomarker.radius = {_fmt_length(settings.bio_radius)}",
        f"species.nanomachine.radius = {_fmt_length(settings.nano_radius)}",
        f"species.nanomachine.alpha_v = {alpha:g}"
        + (" (auto)" if settings.alpha_v is None else ""),
        f"physics.temperature = {settings.temperature:g} K",
        f"physics.viscosity = {settings.viscosity:g} Pa_s",
        f"kinetics.dt = {settings.dt:g} s",
        f"counts.biomarkers = {settings.n_biomarkers}",
        f"counts.nanomachines = {settings.n_nanomachines}",
        f"release.strategy = {settings.release_strategy}",
        "release.margination = "
        + ("auto" if settings.margination is None else f"{settings.margination:g}"),
        "release.jitter = "
        + ("auto" if settings.jitter is None else _fmt_length(settings.jitter)),
        f"release.extent = {settings.extent:g}",
        f"detection.d_det = {_fmt_length(cfg.d_det)}"
        + (" (contact)" if settings.d_det is None else ""),
        f"detection.margin = {_fmt_length(settings.margin) if settings.margin else '0 m'}",
        f"detection.mode = {settings.detection_mode}",
        f"sim.t_max = {cfg.t_max:g} s" + (" (auto)" if settings.t_max is None else ""),
        f"sim.trials = {settings.trials}",
        f"sim.master_seed = {settings.master_seed}",
        f"sweep.kind = {settings.sweep_kind}",
    ]
    if settings.flow_model == "laminar_discretized":
        from .config import default_cell_count

        cells = settings.flow_cells or default_cell_count(vessel)
        lines.insert(6, f"flow.cells = {cells}")
    return "\n".join(lines)


def _write_events(outcomes: list[TrialOutcome], dt: float, path: str) -> None:
    lines = [EVENTS_HEADER]
    for trial_index, outcome in enumerate(outcomes):
        for event in outcome.events:
            lines.append(
                ",".join(
                    (
                        str(trial_index),
                        str(event.step),
                        repr((event.step + 1) * dt),
                        str(event.nanomachine_id),
                        str(event.biomarker_id),
                        repr(event.position[0]),
                        repr(event.position[1]),
                        repr(event.position[2]),
                    )
                )
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    def note(message: str) -> None:
        if args.verbose:
            print(message, file=sys.stderr)

    try:
        settings = _load(args)
        started = time.monotonic()
        if args.subcommand == "validate":
            print(describe_settings(settings))
            return 0

        os.makedirs(args.out, exist_ok=True)
        if args.subcommand == "run":
            config = base_trial_config(settings)
            note(
                f"running {settings.trials} trials of "
                f"{config.n_nanomachines} nanomachines in "
                f"{settings.vessel.kind.value}"
            )
            outcomes = run_trials(
                config, settings.trials, settings.master_seed, args.threads
            )
            est = pool_outcomes(outcomes)
            if args.events:
                path = os.path.join(args.out, "events.csv")
                _write_events(outcomes, config.dt, path)
                note(f"wrote {path}")
            if not args.quiet:
                print(
                    f"p_d = {est.p_d:.6f} "
                    f"(95% CI {est.ci_low:.6f}, {est.ci_high:.6f}); "
                    f"detected {est.detected}/{est.total} biomarkers "
                    f"over {est.trials} trials"
                )
            return 0

        if args.subcommand == "reproduce":
            spec = reproduce_spec(args.figure_id, settings)
            stem = args.figure_id
        elif args.subcommand == "design-table":
            spec = sweep_spec_from_settings(
                replace(settings, sweep_kind="design_table")
            )
            stem = "design"
        else:
            spec = sweep_spec_from_settings(settings)
            stem = "results"

        csv_path = os.path.join(args.out, f"{stem}.csv")
        if spec.kind == "design_table":
            note("searching design table counts")
            rows = run_design(spec, args.threads)
            write_design_rows(rows, csv_path)
            n_rows = len(rows)
        else:
            note(
                f"sweeping {spec.kind} over {len(spec.axis)} values, "
                f"{len(spec.vessels)} vessel(s), {len(spec.variants)} variant(s)"
            )
            result = run_sweep(spec, args.threads)
            write_results(result, csv_path)
            n_rows = len(result.rows)
        write_summary(
            os.path.join(args.out, f"{stem}_summary.json"),
            command=" ".join(
                [args.subcommand]
                + ([args.figure_id] if args.subcommand == "reproduce" else [])
            ),
            config_digest=settings_digest(settings),
            wall_time_s=time.monotonic() - started,
            rows=n_rows,
        )
        if not args.quiet:
            print(f"wrote {csv_path} ({n_rows} rows)")
        return 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()

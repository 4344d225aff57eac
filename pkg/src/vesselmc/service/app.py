"""FastAPI application exposing runs, sweeps, and design tables over HTTP.

Endpoints accept the same config grammar as the files; a request body is
parsed, overridden, resolved, then executed synchronously. Configuration
problems map to 422 responses carrying the parser's message.
"""

from __future__ import annotations

from dataclasses import replace

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import apply_overrides, parse_pairs, resolve_settings, RunSettings
from ..engine import run_batch
from ..errors import ConfigurationError
from ..flow import PRESET_CELL_COUNTS
from ..geometry import VesselKind, preset
from ..harness import base_trial_config, run_design, run_sweep, sweep_spec_from_settings
from .schemas import (
    ConfigRequest,
    DesignResponse,
    DesignRowModel,
    EstimateResponse,
    HealthResponse,
    PresetModel,
    SweepResponse,
    SweepRowModel,
    ValidateResponse,
)


def _resolve(request: ConfigRequest) -> RunSettings:
    try:
        pairs = parse_pairs(request.config_text, "<request>")
        pairs = apply_overrides(pairs, request.overrides)
        if request.seed is not None:
            pairs["sim.master_seed"] = (str(request.seed), 0)
        return resolve_settings(pairs, "<request>")
    except ConfigurationError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def create_app() -> FastAPI:
    app = FastAPI(
        title="vesselmc",
        version=__version__,
        description="Monte Carlo nanomachine biomarker detection in "
        "microvascular segments.",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/presets", response_model=list[PresetModel])
    def presets() -> list[PresetModel]:
        rows = []
        for kind in (VesselKind.CAPILLARY, VesselKind.VENULE, VesselKind.ARTERIOLE):
            vessel = preset(kind)
            rows.append(
                PresetModel(
                    kind=kind.value,
                    diameter_m=vessel.diameter_D,
                    length_m=vessel.length_L,
                    v_max_m_per_s=vessel.v_max,
                    flow_cells=PRESET_CELL_COUNTS[kind],
                )
            )
        return rows

    @app.post("/validate", response_model=ValidateResponse)
    def validate(request: ConfigRequest) -> ValidateResponse:
        from ..cli import describe_settings

        settings = _resolve(request)
        parameters = {}
        for line in describe_settings(settings).splitlines():
            key, _, value = line.partition(" = ")
            parameters[key] = value
        return ValidateResponse(parameters=parameters)

    @app.post("/run", response_model=EstimateResponse)
    def run(request: ConfigRequest) -> EstimateResponse:
        settings = _resolve(request)
        config = base_trial_config(settings)
        est = run_batch(
            config, settings.trials, settings.master_seed, request.threads
        )
        return EstimateResponse(
            p_d=est.p_d,
            ci_low=est.ci_low,
            ci_high=est.ci_high,
            trials=est.trials,
            detected=est.detected,
            total=est.total,
        )

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(request: ConfigRequest) -> SweepResponse:
        settings = _resolve(request)
        spec = sweep_spec_from_settings(settings)
        if spec.kind == "design_table":
            raise HTTPException(
                status_code=422,
                detail="sweep.kind design_table belongs to /design-table",
            )
        result = run_sweep(spec, request.threads)
        return SweepResponse(
            kind=result.spec_kind,
            rows=[SweepRowModel(**row.__dict__) for row in result.rows],
        )

    @app.post("/design-table", response_model=DesignResponse)
    def design(request: ConfigRequest) -> DesignResponse:
        settings = replace(_resolve(request), sweep_kind="design_table")
        spec = sweep_spec_from_settings(settings)
        rows = run_design(spec, request.threads)
        return DesignResponse(
            rows=[
                DesignRowModel(
                    vessel=r.vessel,
                    a_n_m=r.radius_a_n,
                    target_p_d=r.target_p_d,
                    estimated_N=r.estimated_N,
                    achieved_p_d=r.achieved_p_d,
                    trials=r.trials,
                    master_seed=r.master_seed,
                )
                for r in rows
            ]
        )

    return app


app = create_app()

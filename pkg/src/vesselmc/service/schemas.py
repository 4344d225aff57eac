"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ConfigRequest(BaseModel):
    """A config document plus overrides, same grammar as the files."""

    config_text: str = ""
    overrides: list[str] = Field(default_factory=list)
    seed: int | None = None
    threads: int | None = Field(default=None, ge=1, le=256)


class HealthResponse(BaseModel):
    status: str
    version: str


class PresetModel(BaseModel):
    kind: str
    diameter_m: float
    length_m: float
    v_max_m_per_s: float
    flow_cells: int


class ValidateResponse(BaseModel):
    parameters: dict[str, str]


class EstimateResponse(BaseModel):
    p_d: float
    ci_low: float
    ci_high: float
    trials: int
    detected: int
    total: int


class SweepRowModel(BaseModel):
    vessel: str
    variant: str
    axis_name: str
    axis_value: float
    p_d: float
    ci_low: float
    ci_high: float
    trials: int
    master_seed: int


class SweepResponse(BaseModel):
    kind: str
    rows: list[SweepRowModel]


class DesignRowModel(BaseModel):
    vessel: str
    a_n_m: float
    target_p_d: float
    estimated_N: int | None
    achieved_p_d: float | None
    trials: int
    master_seed: int


class DesignResponse(BaseModel):
    rows: list[DesignRowModel]

"""Request and response models for the HTTP service.

The service runs next to the data it operates on, so requests carry
filesystem paths; heavyweight artifacts (audio, label CSVs, manifests) are
written server-side and responses return their locations plus summaries.
"""
from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class RenderConfigModel(BaseModel):
    target_sample_rate: int = 22050
    hop: int = 512
    fade_out_ms: float = 10.0
    normalization_peak: float = 0.891
    max_fret: int = 19
    master_seed: int = 0


class BankValidateRequest(BaseModel):
    manifest: str
    audio_root: Optional[str] = None
    excluded_effects: list[str] = Field(default_factory=lambda: ["delay"])
    tolerance_cents: float = 50.0
    max_fret: int = 19


class SampleCheckModel(BaseModel):
    id: str
    status: str
    expected_hz: float
    f0_hz: Optional[float] = None
    confidence: Optional[float] = None
    cents_off: Optional[float] = None
    detail: str = ""


class BankValidateResponse(BaseModel):
    checks: list[SampleCheckModel]
    coverage_gaps: list[tuple[int, int]]
    n_pass: int
    n_fail: int
    n_error: int
    passed: bool


class RenderRequest(BaseModel):
    tab_path: str
    bank_manifest: str
    bank_audio_root: Optional[str] = None
    excluded_effects: list[str] = Field(default_factory=lambda: ["delay"])
    config: RenderConfigModel = Field(default_factory=RenderConfigModel)
    seed: Optional[int] = None  # overrides config.master_seed
    out_audio: str
    out_labels: str
    out_log: Optional[str] = None


class RenderResponse(BaseModel):
    audio_path: str
    labels_path: str
    n_frames: int
    duration_s: float
    peak: float
    n_events: int
    warnings: list[str]


class BuildRequest(BaseModel):
    config: dict
    out_dir: str
    seed: Optional[int] = None
    jobs: int = 1


class BuildResponse(BaseModel):
    manifest_path: str
    out_dir: str
    n_tracks: int
    skipped_sources: list[dict]


class ScoreRequest(BaseModel):
    pred_dir: str
    gt_dir: str
    json_out: Optional[str] = None


class ScoreResponse(BaseModel):
    report: dict
    text: str
    n_scored: int


class StatsRequest(BaseModel):
    baseline_report: str
    candidate_report: str
    paired: bool = False
    baseline_name: str = "baseline"
    candidate_name: str = "candidate"
    json_out: Optional[str] = None


class StatsResponse(BaseModel):
    comparison: dict
    text: str


class PlotRequest(BaseModel):
    pred_labels: str
    gt_labels: str
    start: float
    end: float
    beat_times: list[float] = Field(default_factory=list)
    out_svg: Optional[str] = None


class PlotResponse(BaseModel):
    svg: str
    out_svg: Optional[str] = None


class EvalSetRequest(BaseModel):
    audio_dir: str


class EvalSetResponse(BaseModel):
    n_tracks: int
    total_s: float
    mean_s: float

"""FastAPI service wrapping the core toolkit.

Domain validation failures map to HTTP 422 and unreadable or malformed
inputs to HTTP 400, mirroring the CLI exit codes 1 and 2.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..audio import write_wav
from ..bank import scan_bank, validate_bank
from ..dataset import build_dataset, measure_eval_set
from ..errors import FormatError, ParseError, ValidationError
from ..labels import read_labels_csv, write_labels_csv
from ..render import RenderConfig, render_performance, track_seed_for
from ..scoring import (compare_report_docs, comparison_text, comparison_to_doc,
                       load_report_doc, report_text, report_to_doc,
                       score_directories)
from ..svgplot import plot_comparison
from ..tab import parse_note_annotations, parse_simple_tab
from . import schemas

app = FastAPI(title="tabsynth", version=__version__)


@app.exception_handler(ValidationError)
async def _validation_error(request: Request, exc: ValidationError):
    return JSONResponse(status_code=422,
                        content={"detail": str(exc), "kind": "validation"})


@app.exception_handler(ParseError)
async def _parse_error(request: Request, exc: ParseError):
    return JSONResponse(status_code=400,
                        content={"detail": str(exc), "kind": "format"})


@app.exception_handler(FormatError)
async def _format_error(request: Request, exc: FormatError):
    return JSONResponse(status_code=400,
                        content={"detail": str(exc), "kind": "format"})


@app.exception_handler(FileNotFoundError)
async def _missing_file(request: Request, exc: FileNotFoundError):
    return JSONResponse(status_code=400,
                        content={"detail": str(exc), "kind": "io"})


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/bank/validate", response_model=schemas.BankValidateResponse)
def bank_validate(req: schemas.BankValidateRequest) -> schemas.BankValidateResponse:
    index = scan_bank(req.manifest, audio_root=req.audio_root,
                      excluded_effects=frozenset(req.excluded_effects),
                      max_fret=req.max_fret)
    report = validate_bank(index, tolerance_cents=req.tolerance_cents,
                           max_fret=req.max_fret)
    return schemas.BankValidateResponse(
        checks=[schemas.SampleCheckModel(**dataclasses.asdict(c)) for c in report.checks],
        coverage_gaps=list(report.coverage_gaps),
        n_pass=report.n_pass, n_fail=report.n_fail, n_error=report.n_error,
        passed=report.passed)


def _load_tab(path: str, max_fret: int):
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        return parse_note_annotations(text, max_fret=max_fret)
    return parse_simple_tab(text, max_fret=max_fret, auto_truncate=True,
                            source_id=Path(path).stem)


@app.post("/render", response_model=schemas.RenderResponse)
def render(req: schemas.RenderRequest) -> schemas.RenderResponse:
    cfg_fields = req.config.model_dump()
    if req.seed is not None:
        cfg_fields["master_seed"] = req.seed
    cfg = RenderConfig(**cfg_fields)
    tab = _load_tab(req.tab_path, cfg.max_fret)
    bank = scan_bank(req.bank_manifest, audio_root=req.bank_audio_root,
                     excluded_effects=frozenset(req.excluded_effects),
                     max_fret=cfg.max_fret)
    seed = track_seed_for(cfg.master_seed, tab.source_id)
    result = render_performance(tab, bank, cfg, seed)

    Path(req.out_audio).parent.mkdir(parents=True, exist_ok=True)
    Path(req.out_labels).parent.mkdir(parents=True, exist_ok=True)
    write_wav(result.audio, req.out_audio)
    write_labels_csv(result.labels, req.out_labels)
    if req.out_log:
        doc = {"track_id": result.log.track_id, "track_seed": result.log.track_seed,
               "warnings": list(result.log.warnings),
               "events": [dataclasses.asdict(e) for e in result.log.entries]}
        Path(req.out_log).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    peak = float(abs(result.audio.samples).max()) if len(result.audio) else 0.0
    return schemas.RenderResponse(
        audio_path=req.out_audio, labels_path=req.out_labels,
        n_frames=result.labels.n_frames, duration_s=result.audio.duration,
        peak=peak, n_events=len(result.log.entries),
        warnings=list(result.log.warnings))


@app.post("/dataset/build", response_model=schemas.BuildResponse)
def dataset_build(req: schemas.BuildRequest) -> schemas.BuildResponse:
    result = build_dataset(req.config, req.out_dir, jobs=max(1, req.jobs),
                           seed=req.seed)
    return schemas.BuildResponse(
        manifest_path=str(result.manifest_path), out_dir=str(result.out_dir),
        n_tracks=len(result.manifest.entries),
        skipped_sources=list(result.manifest.skipped_sources))


@app.post("/score", response_model=schemas.ScoreResponse)
def score(req: schemas.ScoreRequest) -> schemas.ScoreResponse:
    report = score_directories(req.pred_dir, req.gt_dir)
    doc = report_to_doc(report)
    if req.json_out:
        Path(req.json_out).parent.mkdir(parents=True, exist_ok=True)
        Path(req.json_out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")
    return schemas.ScoreResponse(report=doc, text=report_text(report),
                                 n_scored=report.n_scored)


@app.post("/stats", response_model=schemas.StatsResponse)
def stats(req: schemas.StatsRequest) -> schemas.StatsResponse:
    baseline = load_report_doc(req.baseline_report)
    candidate = load_report_doc(req.candidate_report)
    comparison = compare_report_docs(baseline, candidate, paired=req.paired)
    doc = comparison_to_doc(comparison)
    if req.json_out:
        Path(req.json_out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")
    return schemas.StatsResponse(
        comparison=doc,
        text=comparison_text(comparison, req.baseline_name, req.candidate_name))


@app.post("/plot", response_model=schemas.PlotResponse)
def plot(req: schemas.PlotRequest) -> schemas.PlotResponse:
    pred = read_labels_csv(req.pred_labels)
    gt = read_labels_csv(req.gt_labels)
    svg = plot_comparison(pred, gt, (req.start, req.end),
                          beat_times=req.beat_times or None)
    if req.out_svg:
        Path(req.out_svg).parent.mkdir(parents=True, exist_ok=True)
        Path(req.out_svg).write_text(svg, encoding="utf-8")
    return schemas.PlotResponse(svg=svg, out_svg=req.out_svg)


@app.post("/eval-set/check", response_model=schemas.EvalSetResponse)
def eval_set_check(req: schemas.EvalSetRequest) -> schemas.EvalSetResponse:
    stats_ = measure_eval_set(req.audio_dir)
    return schemas.EvalSetResponse(n_tracks=stats_.n_tracks, total_s=stats_.total_s,
                                   mean_s=stats_.mean_s)

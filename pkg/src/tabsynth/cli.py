"""Thin command-line client for the tabsynth service.

All work happens server-side; each subcommand posts a request to a running
service (start one with `tabsynth serve`) and reports the response. Exit
codes: 0 success, 1 validation failure, 2 I/O or format problems (including
an unreachable server).
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

DEFAULT_SERVER = "http://127.0.0.1:8765"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _post(server: str, path: str, payload: dict) -> dict:
    try:
        response = httpx.post(server.rstrip("/") + path, json=payload, timeout=None)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach server at {server}: {exc}", err=True)
        sys.exit(EXIT_IO)
    if response.status_code == 200:
        return response.json()
    try:
        detail = response.json().get("detail", response.text)
        kind = response.json().get("kind", "")
    except ValueError:
        detail, kind = response.text, ""
    click.echo(f"error: {detail}", err=True)
    if response.status_code == 422 or kind == "validation":
        sys.exit(EXIT_VALIDATION)
    sys.exit(EXIT_IO)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    except json.JSONDecodeError as exc:
        click.echo(f"error: {path} is not valid JSON: {exc}", err=True)
        sys.exit(EXIT_IO)


@click.group()
@click.option("--server", envvar="TABSYNTH_SERVER", default=DEFAULT_SERVER,
              show_default=True, help="Base URL of the tabsynth service.")
@click.pass_context
def main(ctx, server):
    """Synthetic guitar dataset builder and transcription scorer (client)."""
    ctx.obj = server


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True, type=int)
def serve(host, port):
    """Run the tabsynth service."""
    import uvicorn

    from .service.app import app
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command("validate-bank")
@click.option("--manifest", required=True, help="Bank manifest CSV.")
@click.option("--audio-root", default=None, help="Root for relpath entries.")
@click.option("--exclude", "excluded", multiple=True, default=("delay",),
              show_default=True, help="Effect tags to exclude.")
@click.option("--tolerance-cents", default=50.0, show_default=True, type=float)
@click.pass_obj
def validate_bank_cmd(server, manifest, audio_root, excluded, tolerance_cents):
    """Pitch-check every bank sample and report coverage gaps."""
    doc = _post(server, "/bank/validate", {
        "manifest": manifest, "audio_root": audio_root,
        "excluded_effects": list(excluded), "tolerance_cents": tolerance_cents,
    })
    for check in doc["checks"]:
        if check["status"] != "pass":
            click.echo(f"{check['status'].upper()} {check['id']}: {check['detail']}")
    if doc["coverage_gaps"]:
        gaps = ", ".join(f"({s},{f})" for s, f in doc["coverage_gaps"])
        click.echo(f"coverage gaps: {gaps}")
    click.echo(f"{doc['n_pass']} pass, {doc['n_fail']} fail, {doc['n_error']} error, "
               f"{len(doc['coverage_gaps'])} uncovered positions")
    if not doc["passed"]:
        sys.exit(EXIT_VALIDATION)


@main.command()
@click.option("--tab", "tab_path", required=True, help="Annotation JSON or simple tab.")
@click.option("--bank-manifest", required=True)
@click.option("--audio-root", default=None)
@click.option("--config", "config_path", default=None, help="Render config JSON.")
@click.option("--seed", type=int, default=None, help="Master seed override.")
@click.option("--out-audio", required=True)
@click.option("--out-labels", required=True)
@click.option("--out-log", default=None)
@click.pass_obj
def render(server, tab_path, bank_manifest, audio_root, config_path, seed,
           out_audio, out_labels, out_log):
    """Render one tablature to audio plus frame labels."""
    payload = {
        "tab_path": tab_path, "bank_manifest": bank_manifest,
        "bank_audio_root": audio_root, "out_audio": out_audio,
        "out_labels": out_labels, "out_log": out_log, "seed": seed,
    }
    if config_path:
        payload["config"] = _read_json(config_path)
    doc = _post(server, "/render", payload)
    click.echo(f"rendered {doc['n_events']} events, {doc['duration_s']:.3f}s, "
               f"{doc['n_frames']} frames -> {doc['audio_path']}")
    for warning in doc["warnings"]:
        click.echo(f"warning: {warning}")


@main.command("build-dataset")
@click.option("--config", "config_path", required=True, help="Build config JSON.")
@click.option("--out", "out_dir", required=True, help="Output directory.")
@click.option("--seed", type=int, default=None, help="Master seed override.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.pass_obj
def build_dataset_cmd(server, config_path, out_dir, seed, jobs):
    """Render a full dataset and write its manifest."""
    doc = _post(server, "/dataset/build", {
        "config": _read_json(config_path), "out_dir": out_dir,
        "seed": seed, "jobs": jobs,
    })
    click.echo(f"built {doc['n_tracks']} tracks -> {doc['manifest_path']}")
    for item in doc["skipped_sources"]:
        click.echo(f"skipped {item['source']}: {item['reason']}")


@main.command()
@click.option("--pred", "pred_dir", required=True, help="Prediction CSV directory.")
@click.option("--gt", "gt_dir", required=True, help="Ground-truth CSV directory.")
@click.option("--json-out", default=None, help="Write the report document here.")
@click.pass_obj
def score(server, pred_dir, gt_dir, json_out):
    """Score predictions against ground truth, per track and aggregated."""
    doc = _post(server, "/score", {"pred_dir": pred_dir, "gt_dir": gt_dir,
                                   "json_out": json_out})
    click.echo(doc["text"], nl=False)
    if doc["n_scored"] == 0:
        sys.exit(EXIT_VALIDATION)


@main.command()
@click.option("--baseline", required=True, help="Baseline report JSON (from score).")
@click.option("--candidate", required=True, help="Candidate report JSON.")
@click.option("--paired", is_flag=True, default=False,
              help="Use a paired t-test instead of independent.")
@click.option("--baseline-name", default="baseline", show_default=True)
@click.option("--candidate-name", default="candidate", show_default=True)
@click.option("--json-out", default=None)
@click.pass_obj
def stats(server, baseline, candidate, paired, baseline_name, candidate_name, json_out):
    """Significance table comparing two scored prediction sets."""
    doc = _post(server, "/stats", {
        "baseline_report": baseline, "candidate_report": candidate,
        "paired": paired, "baseline_name": baseline_name,
        "candidate_name": candidate_name, "json_out": json_out,
    })
    click.echo(doc["text"], nl=False)


@main.command()
@click.option("--pred", "pred_labels", required=True, help="Prediction label CSV.")
@click.option("--gt", "gt_labels", required=True, help="Ground-truth label CSV.")
@click.option("--start", required=True, type=float)
@click.option("--end", required=True, type=float)
@click.option("--beats", default=None, help="Comma-separated beat times (s).")
@click.option("--out", "out_svg", required=True, help="Output SVG path.")
@click.pass_obj
def plot(server, pred_labels, gt_labels, start, end, beats, out_svg):
    """Write a two-panel SVG comparing prediction and ground truth."""
    beat_times = [float(b) for b in beats.split(",")] if beats else []
    doc = _post(server, "/plot", {
        "pred_labels": pred_labels, "gt_labels": gt_labels,
        "start": start, "end": end, "beat_times": beat_times, "out_svg": out_svg,
    })
    click.echo(f"wrote {doc['out_svg']}")


@main.command("check-eval-set")
@click.option("--audio-dir", required=True)
@click.pass_obj
def check_eval_set(server, audio_dir):
    """Report track count and durations for an evaluation audio directory."""
    doc = _post(server, "/eval-set/check", {"audio_dir": audio_dir})
    click.echo(f"{doc['n_tracks']} tracks, total {doc['total_s']:.1f}s, "
               f"mean {doc['mean_s']:.2f}s")


if __name__ == "__main__":
    main()

"""Directory-level scoring and two-system comparison tables.

Reports carry the seven columns of the evaluation protocol (multi-pitch
F1/P/R, tablature F1/P/R, TDR) per track and aggregated as mean plus sample
standard deviation. Comparisons run a per-column t-test between two systems
and mark cells "*" for p < 0.05 and "◇" for 0.05 <= p < 0.1, with a
normality check on the underlying per-track values where the sample allows.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import (DegenerateDataError, FormatError, GridMismatchError,
                     InsufficientDataError, ValidationError)
from .labels import read_labels_csv
from .metrics import MetricsReport, score_label_tensors
from .stats import (Aggregate, NormalityResult, TTestResult, aggregate,
                    dagostino_pearson, ttest_paired, ttest_two_sample)
from .tab import STANDARD_TUNING, Tuning

MARK_SIGNIFICANT = "*"
MARK_MARGINAL = "◇"

# column key -> table heading, in report order
COLUMNS = (
    ("mp_f1", "MP F1"),
    ("mp_p", "MP P"),
    ("mp_r", "MP R"),
    ("tab_f1", "Tab F1"),
    ("tab_p", "Tab P"),
    ("tab_r", "Tab R"),
    ("tdr", "TDR"),
)


def metric_values(report: MetricsReport) -> dict[str, Optional[float]]:
    return {
        "mp_f1": report.multipitch.f1,
        "mp_p": report.multipitch.precision,
        "mp_r": report.multipitch.recall,
        "tab_f1": report.tablature.f1,
        "tab_p": report.tablature.precision,
        "tab_r": report.tablature.recall,
        "tdr": report.tdr,
    }


@dataclass(frozen=True)
class TrackScore:
    track_id: str
    values: Optional[dict[str, Optional[float]]]
    error: Optional[str] = None


@dataclass(frozen=True)
class ScoreReport:
    tracks: tuple[TrackScore, ...]
    aggregates: dict[str, Optional[Aggregate]]
    unmatched_pred: tuple[str, ...]
    unmatched_gt: tuple[str, ...]

    @property
    def n_scored(self) -> int:
        return sum(1 for t in self.tracks if t.values is not None)


def significance_marker(p: Optional[float]) -> str:
    if p is None:
        return ""
    if p < 0.05:
        return MARK_SIGNIFICANT
    if p < 0.1:
        return MARK_MARGINAL
    return ""


def format_cell(mean: float, std: float, marker: str = "") -> str:
    return f"{mean:.3f}±{std:.3f}{marker}"


def score_directories(pred_dir, gt_dir,
                      tuning: Tuning = STANDARD_TUNING) -> ScoreReport:
    """Score every prediction CSV against the ground-truth CSV of the same name."""
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    pred_files = {p.stem: p for p in sorted(pred_dir.glob("*.csv"))}
    gt_files = {p.stem: p for p in sorted(gt_dir.glob("*.csv"))}
    if not gt_files:
        raise ValidationError(f"no ground-truth CSV files in {gt_dir}")
    common = sorted(set(pred_files) & set(gt_files))
    if not common:
        raise ValidationError("no matching track filenames between directories")

    tracks: list[TrackScore] = []
    for stem in common:
        try:
            pred = read_labels_csv(pred_files[stem])
            gt = read_labels_csv(gt_files[stem])
            report = score_label_tensors(pred, gt, tuning)
        except (FormatError, GridMismatchError, ValidationError) as exc:
            tracks.append(TrackScore(track_id=stem, values=None, error=str(exc)))
            continue
        tracks.append(TrackScore(track_id=stem, values=metric_values(report)))

    aggregates: dict[str, Optional[Aggregate]] = {}
    for key, _ in COLUMNS:
        values = [t.values[key] for t in tracks
                  if t.values is not None and t.values[key] is not None]
        try:
            aggregates[key] = aggregate(values)
        except InsufficientDataError:
            aggregates[key] = None
    return ScoreReport(tracks=tuple(tracks), aggregates=aggregates,
                       unmatched_pred=tuple(s for s in sorted(pred_files) if s not in gt_files),
                       unmatched_gt=tuple(s for s in sorted(gt_files) if s not in pred_files))


def report_to_doc(report: ScoreReport) -> dict:
    return {
        "columns": [key for key, _ in COLUMNS],
        "tracks": [
            {"track_id": t.track_id, "values": t.values, "error": t.error}
            for t in report.tracks
        ],
        "aggregate": {
            key: (None if agg is None
                  else {"mean": agg.mean, "std": agg.std, "n": agg.n})
            for key, agg in report.aggregates.items()
        },
        "unmatched_pred": list(report.unmatched_pred),
        "unmatched_gt": list(report.unmatched_gt),
    }


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.3f}"


def report_text(report: ScoreReport) -> str:
    """Aligned per-track table with a mean +/- std summary row."""
    headers = ["track"] + [h for _, h in COLUMNS]
    rows = []
    for t in report.tracks:
        if t.values is None:
            rows.append([t.track_id, f"error: {t.error}"] + [""] * (len(COLUMNS) - 1))
        else:
            rows.append([t.track_id] + [_fmt(t.values[k]) for k, _ in COLUMNS])
    summary = ["mean±std"] + [
        "-" if report.aggregates[k] is None
        else format_cell(report.aggregates[k].mean, report.aggregates[k].std)
        for k, _ in COLUMNS
    ]
    rows.append(summary)
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) for i in range(len(headers))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    for stem in report.unmatched_pred:
        lines.append(f"warning: prediction {stem!r} has no ground truth; excluded")
    for stem in report.unmatched_gt:
        lines.append(f"warning: ground truth {stem!r} has no prediction; excluded")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Two-system comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ColumnComparison:
    column: str
    baseline: Optional[Aggregate]
    candidate: Optional[Aggregate]
    ttest: Optional[TTestResult]
    marker: str
    note: str = ""
    normality_baseline: Optional[NormalityResult] = None
    normality_candidate: Optional[NormalityResult] = None


@dataclass(frozen=True)
class Comparison:
    columns: tuple[ColumnComparison, ...]
    paired: bool


def _column_values(doc: dict, key: str) -> list[float]:
    return [t["values"][key] for t in doc["tracks"]
            if t.get("values") and t["values"].get(key) is not None]


def compare_report_docs(baseline: dict, candidate: dict,
                        paired: bool = False) -> Comparison:
    """Per-column significance of candidate vs baseline from two report documents."""
    out = []
    for key, _ in COLUMNS:
        base_vals = _column_values(baseline, key)
        cand_vals = _column_values(candidate, key)
        agg_b = aggregate(base_vals) if len(base_vals) >= 2 else None
        agg_c = aggregate(cand_vals) if len(cand_vals) >= 2 else None
        ttest = None
        note = ""
        if agg_b is None or agg_c is None:
            note = "not enough tracks to compare"
        else:
            try:
                ttest = (ttest_paired(cand_vals, base_vals) if paired
                         else ttest_two_sample(cand_vals, base_vals))
            except (DegenerateDataError, InsufficientDataError) as exc:
                note = str(exc)
        marker = significance_marker(ttest.p if ttest else None)
        norm_b = norm_c = None
        if marker:
            try:
                norm_b = dagostino_pearson(base_vals)
                norm_c = dagostino_pearson(cand_vals)
            except (ValidationError, InsufficientDataError):
                note = (note + "; " if note else "") + "normality check skipped (n < 8)"
        out.append(ColumnComparison(column=key, baseline=agg_b, candidate=agg_c,
                                    ttest=ttest, marker=marker, note=note,
                                    normality_baseline=norm_b,
                                    normality_candidate=norm_c))
    return Comparison(columns=tuple(out), paired=paired)


def comparison_to_doc(comparison: Comparison) -> dict:
    cols = {}
    for c in comparison.columns:
        cols[c.column] = {
            "baseline": None if c.baseline is None
            else {"mean": c.baseline.mean, "std": c.baseline.std, "n": c.baseline.n},
            "candidate": None if c.candidate is None
            else {"mean": c.candidate.mean, "std": c.candidate.std, "n": c.candidate.n},
            "t": c.ttest.t if c.ttest else None,
            "df": c.ttest.df if c.ttest else None,
            "p": c.ttest.p if c.ttest else None,
            "marker": c.marker,
            "note": c.note,
            "normality": {
                "baseline": None if c.normality_baseline is None
                else {"k2": c.normality_baseline.k2, "p": c.normality_baseline.p},
                "candidate": None if c.normality_candidate is None
                else {"k2": c.normality_candidate.k2, "p": c.normality_candidate.p},
            },
        }
    return {"paired": comparison.paired, "columns": cols}


def comparison_text(comparison: Comparison, baseline_name: str = "baseline",
                    candidate_name: str = "candidate") -> str:
    """Two-row table in the report shape, plus a p-value row per column."""
    headers = [""] + [h for _, h in COLUMNS]
    base_row = [baseline_name]
    cand_row = [candidate_name]
    p_row = ["p-value"]
    for c in comparison.columns:
        base_row.append("-" if c.baseline is None
                        else format_cell(c.baseline.mean, c.baseline.std))
        cand_row.append("-" if c.candidate is None
                        else format_cell(c.candidate.mean, c.candidate.std, c.marker))
        p_row.append("-" if c.ttest is None else f"{c.ttest.p:.4f}")
    rows = [base_row, cand_row, p_row]
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) for i in range(len(headers))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for r in rows:
        lines.append("  ".join(x.ljust(w) for x, w in zip(r, widths)))
    lines.append(f"{MARK_SIGNIFICANT} p<0.05, {MARK_MARGINAL} 0.05≤p<0.1 "
                 f"({'paired' if comparison.paired else 'independent'} t-test)")
    notes = [f"note [{c.column}]: {c.note}" for c in comparison.columns if c.note]
    lines.extend(notes)
    return "\n".join(lines) + "\n"


def load_report_doc(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"cannot read report {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"report {path} is not valid JSON: {exc}") from exc
    if "tracks" not in doc:
        raise FormatError(f"report {path} lacks a 'tracks' array")
    return doc

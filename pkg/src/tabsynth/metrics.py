"""Frame-level transcription metrics.

Multi-pitch scores compare the multiset of sounding pitches per frame;
tablature scores compare (string, fret) pairs, so a right pitch on the wrong
string counts against them. Unisons are honoured: two strings sounding the
same pitch contribute two entries, and a prediction must supply both to get
both true positives. The disambiguation rate is the fraction of pitch true
positives whose position was also right.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import GridMismatchError
from .labels import LabelTensor
from .tab import N_STRINGS, STANDARD_TUNING, Tuning


@dataclass(frozen=True)
class FrameSet:
    """Per-frame sorted multisets of pitches and of (string, fret) pairs."""

    pitches: tuple[tuple[int, ...], ...]
    tabs: tuple[tuple[tuple[int, int], ...], ...]
    hop: int
    sample_rate: int

    @property
    def n_frames(self) -> int:
        return len(self.pitches)


def frames_from_labels(labels: LabelTensor,
                       tuning: Tuning = STANDARD_TUNING) -> FrameSet:
    pitches = []
    tabs = []
    for k in range(labels.n_frames):
        frame_pitches = []
        frame_tabs = []
        for s in range(1, N_STRINGS + 1):
            cls = int(labels.classes[s - 1, k])
            if cls > 0:
                fret = cls - 1
                frame_pitches.append(tuning.open_midi[s - 1] + fret)
                frame_tabs.append((s, fret))
        pitches.append(tuple(sorted(frame_pitches)))
        tabs.append(tuple(sorted(frame_tabs)))
    return FrameSet(pitches=tuple(pitches), tabs=tuple(tabs),
                    hop=labels.hop, sample_rate=labels.sample_rate)


def _require_aligned(pred: FrameSet, gt: FrameSet) -> None:
    if (pred.n_frames, pred.hop, pred.sample_rate) != (gt.n_frames, gt.hop, gt.sample_rate):
        raise GridMismatchError(
            f"frame grids differ: ({pred.n_frames} frames, hop {pred.hop}, "
            f"sr {pred.sample_rate}) vs ({gt.n_frames} frames, hop {gt.hop}, "
            f"sr {gt.sample_rate})")


def _multiset_tp(a: Sequence, b: Sequence) -> int:
    """Intersection size of two sorted multisets (two-pointer sweep)."""
    i = j = tp = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            tp += 1
            i += 1
            j += 1
        elif a[i] < b[j]:
            i += 1
        else:
            j += 1
    return tp


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MatchCounts:
    tp_pitch: int
    fp_pitch: int
    fn_pitch: int
    tp_tab: int


def _prf(tp: int, fp: int, fn: int) -> PRF:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2.0 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return PRF(precision=precision, recall=recall, f1=f1)


def _counts(pred_frames, gt_frames) -> tuple[int, int, int]:
    tp = fp = fn = 0
    for p, g in zip(pred_frames, gt_frames):
        frame_tp = _multiset_tp(p, g)
        tp += frame_tp
        fp += len(p) - frame_tp
        fn += len(g) - frame_tp
    return tp, fp, fn


def multipitch_prf(pred: FrameSet, gt: FrameSet) -> PRF:
    """Precision/recall/F1 over per-frame pitch multisets."""
    _require_aligned(pred, gt)
    return _prf(*_counts(pred.pitches, gt.pitches))


def tablature_prf(pred: FrameSet, gt: FrameSet) -> PRF:
    """Precision/recall/F1 over per-frame (string, fret) multisets."""
    _require_aligned(pred, gt)
    return _prf(*_counts(pred.tabs, gt.tabs))


def tdr(pred: FrameSet, gt: FrameSet) -> Optional[float]:
    """Position-correct fraction of pitch true positives; None when undefined."""
    _require_aligned(pred, gt)
    tp_pitch, _, _ = _counts(pred.pitches, gt.pitches)
    tp_tab, _, _ = _counts(pred.tabs, gt.tabs)
    if tp_pitch == 0:
        return None
    return tp_tab / tp_pitch


@dataclass(frozen=True)
class MetricsReport:
    multipitch: PRF
    tablature: PRF
    tdr: Optional[float]
    counts: MatchCounts


def score_frames(pred: FrameSet, gt: FrameSet) -> MetricsReport:
    """All seven metrics between a prediction and its ground truth."""
    _require_aligned(pred, gt)
    tp_p, fp_p, fn_p = _counts(pred.pitches, gt.pitches)
    tp_t, fp_t, fn_t = _counts(pred.tabs, gt.tabs)
    return MetricsReport(
        multipitch=_prf(tp_p, fp_p, fn_p),
        tablature=_prf(tp_t, fp_t, fn_t),
        tdr=(tp_t / tp_p) if tp_p else None,
        counts=MatchCounts(tp_pitch=tp_p, fp_pitch=fp_p, fn_pitch=fn_p, tp_tab=tp_t),
    )


def score_label_tensors(pred: LabelTensor, gt: LabelTensor,
                        tuning: Tuning = STANDARD_TUNING) -> MetricsReport:
    return score_frames(frames_from_labels(pred, tuning), frames_from_labels(gt, tuning))

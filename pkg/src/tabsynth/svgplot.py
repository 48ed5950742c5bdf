"""Two-panel SVG comparison of predicted and reference note tracks.

Each contiguous run of one fret class on a string becomes a horizontal bar
with the fret number in a circle at its onset; optional vertical lines mark
beats. Both panels share the same linear time-to-x mapping.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ValidationError
from .labels import LabelTensor, require_same_grid
from .tab import N_STRINGS

_WIDTH = 900
_PANEL_H = 170
_MARGIN_X = 48
_MARGIN_Y = 28
_GAP = 34


@dataclass(frozen=True)
class NoteBar:
    string: int
    fret: int
    t_start: float
    t_end: float


def label_segments(labels: LabelTensor) -> list[NoteBar]:
    """Contiguous equal-class runs per string, in seconds."""
    period = labels.frame_period
    bars = []
    for s in range(1, N_STRINGS + 1):
        row = labels.classes[s - 1]
        k = 0
        while k < labels.n_frames:
            cls = int(row[k])
            if cls == 0:
                k += 1
                continue
            start = k
            while k < labels.n_frames and int(row[k]) == cls:
                k += 1
            bars.append(NoteBar(string=s, fret=cls - 1,
                                t_start=start * period, t_end=k * period))
    return bars


def _clip(bars: list[NoteBar], t0: float, t1: float) -> list[NoteBar]:
    out = []
    for b in bars:
        if b.t_end <= t0 or b.t_start >= t1:
            continue
        out.append(NoteBar(b.string, b.fret, max(b.t_start, t0), min(b.t_end, t1)))
    return out


def _panel(bars: list[NoteBar], beats: Sequence[float], t0: float, t1: float,
           top: float, title: str) -> list[str]:
    span = t1 - t0
    plot_w = _WIDTH - 2 * _MARGIN_X

    def x(t: float) -> float:
        return _MARGIN_X + (t - t0) / span * plot_w

    def y(string: int) -> float:
        return top + string * _PANEL_H / (N_STRINGS + 1)

    parts = [f'<text x="{_MARGIN_X}" y="{top - 6:.1f}" class="title">{title}</text>']
    for s in range(1, N_STRINGS + 1):
        yy = y(s)
        parts.append(f'<line x1="{_MARGIN_X}" y1="{yy:.1f}" x2="{_WIDTH - _MARGIN_X}" '
                     f'y2="{yy:.1f}" class="string"/>')
        parts.append(f'<text x="{_MARGIN_X - 10}" y="{yy + 4:.1f}" class="label">{s}</text>')
    for t in beats:
        if t0 <= t <= t1:
            parts.append(f'<line x1="{x(t):.1f}" y1="{top:.1f}" x2="{x(t):.1f}" '
                         f'y2="{top + _PANEL_H:.1f}" class="beat"/>')
    for b in bars:
        yy = y(b.string)
        parts.append(f'<rect x="{x(b.t_start):.1f}" y="{yy - 3.5:.1f}" '
                     f'width="{max(x(b.t_end) - x(b.t_start), 1.0):.1f}" height="7" '
                     f'class="bar"/>')
        parts.append(f'<circle cx="{x(b.t_start):.1f}" cy="{yy:.1f}" r="9" class="note"/>')
        parts.append(f'<text x="{x(b.t_start):.1f}" y="{yy + 3.5:.1f}" '
                     f'class="fret">{b.fret}</text>')
    return parts


def plot_comparison(pred: LabelTensor, gt: LabelTensor, window: tuple[float, float],
                    beat_times: Optional[Sequence[float]] = None) -> str:
    """Render reference (top) and prediction (bottom) panels as an SVG document."""
    t0, t1 = window
    if not t1 > t0:
        raise ValidationError(f"empty plot window [{t0}, {t1}]")
    require_same_grid(pred, gt)
    duration = gt.n_frames * gt.frame_period
    if t0 < 0 or t0 >= duration:
        raise ValidationError(f"window start {t0} outside the track (0..{duration:.3f}s)")
    t1 = min(t1, duration)
    beats = list(beat_times or ())

    height = 2 * (_PANEL_H + _MARGIN_Y) + _GAP
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_WIDTH}" height="{height}" viewBox="0 0 {_WIDTH} {height}">',
        "<style>"
        ".string{stroke:#999;stroke-width:1}"
        ".beat{stroke:#bbb;stroke-width:1;stroke-dasharray:4 3}"
        ".bar{fill:#4477aa}"
        ".note{fill:#fff;stroke:#224466;stroke-width:1.5}"
        ".fret{font:10px sans-serif;text-anchor:middle;fill:#224466}"
        ".label{font:10px sans-serif;text-anchor:end;fill:#666}"
        ".title{font:12px sans-serif;fill:#333}"
        ".axis{font:10px sans-serif;fill:#666}"
        "</style>",
    ]
    top_gt = _MARGIN_Y
    top_pred = _MARGIN_Y + _PANEL_H + _GAP
    parts += _panel(_clip(label_segments(gt), t0, t1), beats, t0, t1, top_gt,
                    "ground truth")
    parts += _panel(_clip(label_segments(pred), t0, t1), beats, t0, t1, top_pred,
                    "prediction")
    parts.append(f'<text x="{_MARGIN_X}" y="{height - 8}" class="axis">'
                 f'{t0:.2f}s</text>')
    parts.append(f'<text x="{_WIDTH - _MARGIN_X}" y="{height - 8}" class="axis" '
                 f'text-anchor="end">{t1:.2f}s</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

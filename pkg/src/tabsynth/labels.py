"""Frame-aligned fret-class labels and their CSV serialization.

The class matrix has one row per string; entry 0 means silent and f+1 means
fret f is sounding. Files carry the frame grid in a comment line
(`# hop=<int> sr=<int> max_fret=<int>`) followed by a
`frame,string_1,...,string_6` header, so readers can verify that two tensors
live on the same grid before comparing them.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, GridMismatchError
from .tab import MAX_FRET, N_STRINGS


@dataclass(frozen=True)
class LabelTensor:
    """[6 x n_frames] integer classes on a fixed (hop, sample_rate) grid."""

    classes: np.ndarray
    hop: int
    sample_rate: int
    max_fret: int = MAX_FRET

    def __post_init__(self):
        arr = np.asarray(self.classes, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] != N_STRINGS:
            raise FormatError(f"classes must be [{N_STRINGS} x n_frames], got {arr.shape}")
        if self.hop < 1 or self.sample_rate <= 0:
            raise FormatError("hop and sample_rate must be positive")
        if arr.size and (arr.min() < 0 or arr.max() > self.max_fret + 1):
            raise FormatError(f"class values must lie in [0, {self.max_fret + 1}]")
        arr.setflags(write=False)
        object.__setattr__(self, "classes", arr)

    @property
    def n_frames(self) -> int:
        return self.classes.shape[1]

    @property
    def frame_period(self) -> float:
        return self.hop / self.sample_rate

    def same_grid(self, other: "LabelTensor") -> bool:
        return (self.hop == other.hop and self.sample_rate == other.sample_rate
                and self.max_fret == other.max_fret and self.n_frames == other.n_frames)


def require_same_grid(a: LabelTensor, b: LabelTensor) -> None:
    if not a.same_grid(b):
        raise GridMismatchError(
            f"frame grids differ: (hop={a.hop}, sr={a.sample_rate}, "
            f"max_fret={a.max_fret}, n_frames={a.n_frames}) vs "
            f"(hop={b.hop}, sr={b.sample_rate}, max_fret={b.max_fret}, "
            f"n_frames={b.n_frames})")


_HEADER = "frame," + ",".join(f"string_{s}" for s in range(1, N_STRINGS + 1))


def labels_to_csv(labels: LabelTensor) -> str:
    lines = [f"# hop={labels.hop} sr={labels.sample_rate} max_fret={labels.max_fret}",
             _HEADER]
    for k in range(labels.n_frames):
        lines.append(f"{k}," + ",".join(str(int(v)) for v in labels.classes[:, k]))
    return "\n".join(lines) + "\n"


def write_labels_csv(labels: LabelTensor, path) -> None:
    Path(path).write_text(labels_to_csv(labels), encoding="utf-8")


def parse_labels_csv(text: str) -> LabelTensor:
    """Parse a label/prediction CSV; the grid comment line is mandatory."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise FormatError("missing grid comment line '# hop=... sr=... max_fret=...'")
    meta: dict[str, int] = {}
    for token in lines[0].lstrip("#").split():
        key, _, value = token.partition("=")
        try:
            meta[key] = int(value)
        except ValueError as exc:
            raise FormatError(f"bad grid token {token!r}") from exc
    for key in ("hop", "sr", "max_fret"):
        if key not in meta:
            raise FormatError(f"grid comment missing {key!r}")
    if len(lines) < 2 or lines[1] != _HEADER:
        raise FormatError(f"expected column header {_HEADER!r}")

    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        fields = line.split(",")
        if len(fields) != N_STRINGS + 1:
            raise FormatError(f"line {lineno}: expected {N_STRINGS + 1} columns")
        try:
            frame = int(fields[0])
            values = [int(v) for v in fields[1:]]
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        if frame != len(rows):
            raise FormatError(f"line {lineno}: frame index {frame}, expected {len(rows)}")
        rows.append(values)

    classes = (np.array(rows, dtype=np.int64).T if rows
               else np.zeros((N_STRINGS, 0), dtype=np.int64))
    return LabelTensor(classes=classes, hop=meta["hop"], sample_rate=meta["sr"],
                       max_fret=meta["max_fret"])


def read_labels_csv(path) -> LabelTensor:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return parse_labels_csv(text)

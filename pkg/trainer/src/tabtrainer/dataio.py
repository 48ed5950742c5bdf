"""Readers and writers for the dataset interchange files.

Everything here speaks the tabsynth on-disk formats directly (manifest JSON,
16-bit PCM mono WAV, label/prediction CSV with a grid comment line); this
package never imports the producer.
"""
from __future__ import annotations

import json
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

N_STRINGS = 6


@dataclass(frozen=True)
class ManifestEntry:
    track_id: str
    audio_path: Path
    labels_path: Path
    fold: int
    origin: str


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]
    sample_rate: int
    hop: int
    max_fret: int
    master_seed: int


def load_manifest(path) -> Manifest:
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    base = path.parent
    entries = tuple(
        ManifestEntry(track_id=e["track_id"],
                      audio_path=base / e["audio_path"],
                      labels_path=base / e["labels_path"],
                      fold=int(e["fold"]), origin=e["origin"])
        for e in doc["entries"]
    )
    cfg = doc["render_config"]
    return Manifest(entries=entries,
                    sample_rate=int(cfg["target_sample_rate"]),
                    hop=int(cfg["hop"]), max_fret=int(cfg["max_fret"]),
                    master_seed=int(doc["master_seed"]))


def training_entries(manifest: Manifest, fold: int) -> list[ManifestEntry]:
    """Everything outside the hold-out fold; external synth joins every split."""
    return [e for e in manifest.entries
            if e.origin == "synth_external" or e.fold != fold]


def read_wav_mono(path) -> tuple[np.ndarray, int]:
    with wave.open(str(path), "rb") as fh:
        if fh.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM")
        sample_rate = fh.getframerate()
        raw = fh.readframes(fh.getnframes())
        data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32767.0
        if fh.getnchannels() == 2:
            data = data.reshape(-1, 2).mean(axis=1)
    return data, sample_rate


def read_labels(path) -> tuple[np.ndarray, dict[str, int]]:
    """Label CSV -> ([6 x n_frames] classes, grid metadata)."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
             if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing grid comment line")
    meta = {}
    for token in lines[0].lstrip("#").split():
        key, _, value = token.partition("=")
        meta[key] = int(value)
    rows = [[int(v) for v in ln.split(",")[1:]] for ln in lines[2:]]
    classes = (np.array(rows, dtype=np.int64).T if rows
               else np.zeros((N_STRINGS, 0), dtype=np.int64))
    return classes, meta


def write_predictions(classes: np.ndarray, meta: dict[str, int], path) -> None:
    """Prediction CSV in the scorer's format, grid comment included."""
    header = "frame," + ",".join(f"string_{s}" for s in range(1, N_STRINGS + 1))
    lines = [f"# hop={meta['hop']} sr={meta['sr']} max_fret={meta['max_fret']}",
             header]
    for k in range(classes.shape[1]):
        lines.append(f"{k}," + ",".join(str(int(v)) for v in classes[:, k]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

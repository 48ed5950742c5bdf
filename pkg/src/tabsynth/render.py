"""Deterministic rendering of a tablature into audio plus frame labels.

Each note pulls a random sample for its (string, fret) from the bank, is
resampled to the target rate if needed, truncated to the annotated duration
plus a short linear fade, and summed into the mix at its onset sample.
Notes whose source sample is shorter than the annotated duration simply ring
out; the label still spans the full annotated duration. The mix is peak
normalized only when it exceeds the configured ceiling.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audio import AudioBuffer, read_wav
from .bank import BankIndex, select_sample
from .errors import CoverageError, ValidationError
from .labels import LabelTensor
from .resample import resample
from .tab import MAX_FRET, N_STRINGS, Tablature, validate_tablature


@dataclass(frozen=True)
class RenderConfig:
    target_sample_rate: int = 22050
    hop: int = 512
    fade_out_ms: float = 10.0
    normalization_peak: float = 0.891  # -1 dBFS
    max_fret: int = MAX_FRET
    master_seed: int = 0

    def __post_init__(self):
        if self.target_sample_rate <= 0:
            raise ValidationError("target_sample_rate must be positive")
        if self.hop < 1:
            raise ValidationError("hop must be >= 1")
        if not 0.0 < self.normalization_peak <= 1.0:
            raise ValidationError("normalization_peak must be in (0, 1]")
        if self.fade_out_ms < 0:
            raise ValidationError("fade_out_ms must be >= 0")


@dataclass(frozen=True)
class RenderLogEntry:
    event_index: int
    sample_id: str
    onset_sample: int
    rendered_length: int


@dataclass(frozen=True)
class RenderLog:
    track_id: str
    track_seed: int
    entries: tuple[RenderLogEntry, ...]
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class RenderResult:
    audio: AudioBuffer
    labels: LabelTensor
    log: RenderLog


def track_seed_for(master_seed: int, source_id: str) -> int:
    """Stable 64-bit per-track seed so render order cannot affect output."""
    digest = hashlib.blake2b(f"{master_seed}:{source_id}".encode("utf-8"),
                             digest_size=8).digest()
    return int.from_bytes(digest, "big")


def make_frame_labels(tab: Tablature, n_frames: int, cfg: RenderConfig) -> LabelTensor:
    """Label frame k on string s with fret+1 iff an event spans time k*hop/rate.

    Frames are classified by their start time: k*hop/rate in [onset, offset).
    """
    rate, hop = cfg.target_sample_rate, cfg.hop
    grid_end = n_frames * hop / rate
    classes = np.zeros((N_STRINGS, n_frames), dtype=np.int64)
    times = np.arange(n_frames) * hop / rate
    for e in tab.events:
        if e.offset > grid_end:
            raise ValidationError(
                f"event on string {e.string} ends at {e.offset}s, past the "
                f"{n_frames}-frame grid ({grid_end}s)")
        mask = (times >= e.onset) & (times < e.offset)
        classes[e.string - 1, mask] = e.fret + 1
    return LabelTensor(classes=classes, hop=hop, sample_rate=rate,
                       max_fret=cfg.max_fret)


def _frames_needed(tab: Tablature, cfg: RenderConfig) -> int:
    """Smallest n_frames whose grid covers every event under the [onset, offset) rule."""
    rate, hop = cfg.target_sample_rate, cfg.hop
    needed = 0
    for e in tab.events:
        k = max(0, math.ceil(e.offset * rate / hop))
        while (k * hop) / rate < e.offset:  # match make_frame_labels' float compare
            k += 1
        needed = max(needed, k)
    return needed


def _load_segment(sample_path, target_rate: int, cache: Optional[dict]) -> np.ndarray:
    key = str(sample_path)
    if cache is not None and key in cache:
        return cache[key]
    audio = resample(read_wav(sample_path), target_rate)
    if cache is not None:
        cache[key] = audio.samples
    return audio.samples


def render_performance(tab: Tablature, bank: BankIndex, cfg: RenderConfig,
                       track_seed: int,
                       sample_cache: Optional[dict] = None) -> RenderResult:
    """Render one track; output depends only on (tab, bank, cfg, track_seed)."""
    violations = validate_tablature(tab, max_fret=cfg.max_fret)
    if violations:
        raise ValidationError("tablature invalid: "
                              + "; ".join(v.message for v in violations))
    missing = bank.missing_positions(tab.positions)
    if missing:
        raise CoverageError(missing)

    rate, hop = cfg.target_sample_rate, cfg.hop
    fade_n = int(round(cfg.fade_out_ms / 1000.0 * rate))
    rng = np.random.default_rng(track_seed)
    warnings: list[str] = []

    n_samples = int(round(tab.total_duration * rate))
    min_cover = _frames_needed(tab, cfg)
    if min_cover > 0:
        n_samples = max(n_samples, (min_cover - 1) * hop + 1)
    mix = np.zeros(n_samples, dtype=np.float64)

    entries: list[RenderLogEntry] = []
    for idx, event in enumerate(tab.events):
        tone = select_sample(bank, event.string, event.fret, rng)
        source = _load_segment(tone.path, rate, sample_cache)
        limit = int(round((event.duration + cfg.fade_out_ms / 1000.0) * rate))
        segment = np.array(source[:min(len(source), limit)], dtype=np.float64)
        if fade_n > 0 and len(segment):
            ramp_n = min(fade_n, len(segment))
            segment[-ramp_n:] *= np.linspace(1.0, 0.0, ramp_n)
        onset_sample = int(round(event.onset * rate))
        end = onset_sample + len(segment)
        if end > len(mix):
            warnings.append(f"event {idx} extends {end - len(mix)} samples past "
                            "total_duration; buffer grown to fit")
            mix = np.concatenate([mix, np.zeros(end - len(mix))])
        mix[onset_sample:end] += segment
        entries.append(RenderLogEntry(event_index=idx, sample_id=tone.id,
                                      onset_sample=onset_sample,
                                      rendered_length=len(segment)))

    peak = float(np.max(np.abs(mix))) if len(mix) else 0.0
    if peak > cfg.normalization_peak:
        mix = (mix / peak) * cfg.normalization_peak

    n_frames = math.ceil(len(mix) / hop) if len(mix) else 0
    labels = make_frame_labels(tab, n_frames, cfg)
    log = RenderLog(track_id=tab.source_id, track_seed=track_seed,
                    entries=tuple(entries), warnings=tuple(warnings))
    return RenderResult(audio=AudioBuffer(mix, rate), labels=labels, log=log)

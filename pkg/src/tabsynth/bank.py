"""Tone bank: indexing single-note recordings by fretboard position.

A bank is described by a CSV manifest (`id,relpath,string,fret,effect,source,
sample_rate`). Scanning builds an immutable index keyed by (string, fret),
dropping rows whose effect tag is excluded. Selection is uniform over the
candidates at a position, driven by a caller-owned generator so sequences
are reproducible. Validation re-estimates the pitch of every sample and
reports positions with no coverage.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .audio import AudioBuffer, probe_wav, read_wav
from .errors import CoverageError, FormatError, ParseError, ValidationError
from .tab import MAX_FRET, N_STRINGS, STANDARD_TUNING, Tuning

DEFAULT_EXCLUDED_EFFECTS = frozenset({"delay"})

_MANIFEST_FIELDS = ["id", "relpath", "string", "fret", "effect", "source", "sample_rate"]


def midi_to_hz(midi: int) -> float:
    """A440 equal temperament; octaves are exact doublings by construction."""
    octave, semitone = divmod(midi - 69, 12)
    return 440.0 * (2.0 ** octave) * (2.0 ** (semitone / 12.0))


@dataclass(frozen=True)
class ToneSample:
    """One catalogued single-note recording."""

    id: str
    path: Path
    string: int
    fret: int
    effect_tag: str
    source_tag: str
    sample_rate: int
    n_samples: int


@dataclass(frozen=True)
class BankIndex:
    """Immutable catalog; candidate ids per position are sorted for reproducibility."""

    samples: tuple[ToneSample, ...]
    by_position: dict[tuple[int, int], tuple[str, ...]]
    excluded_effects: frozenset[str]
    _by_id: dict[str, ToneSample] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {s.id: s for s in self.samples})

    def sample(self, sample_id: str) -> ToneSample:
        return self._by_id[sample_id]

    def candidates(self, string: int, fret: int) -> tuple[str, ...]:
        return self.by_position.get((string, fret), ())

    def missing_positions(self, positions) -> list[tuple[int, int]]:
        return sorted(p for p in set(positions) if not self.by_position.get(p))


def scan_bank(manifest_path, audio_root=None,
              excluded_effects=DEFAULT_EXCLUDED_EFFECTS,
              max_fret: int = MAX_FRET) -> BankIndex:
    """Build a BankIndex from a CSV manifest, probing each referenced WAV."""
    manifest_path = Path(manifest_path)
    root = Path(audio_root) if audio_root is not None else manifest_path.parent
    excluded = frozenset(excluded_effects)

    try:
        text = manifest_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read manifest {manifest_path}: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or list(reader.fieldnames) != _MANIFEST_FIELDS:
        raise ParseError(f"manifest header must be {','.join(_MANIFEST_FIELDS)}, "
                         f"got {reader.fieldnames}")

    samples: list[ToneSample] = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        where = f"manifest row {lineno} (id={row.get('id')!r})"
        if any(row.get(k) in (None, "") for k in _MANIFEST_FIELDS):
            raise ParseError(f"{where}: missing fields")
        sample_id = row["id"]
        if sample_id in seen:
            raise ValidationError(f"{where}: duplicate id")
        seen.add(sample_id)
        try:
            string, fret = int(row["string"]), int(row["fret"])
            declared_rate = int(row["sample_rate"])
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from exc
        if not 1 <= string <= N_STRINGS:
            raise ValidationError(f"{where}: string {string} out of range 1..{N_STRINGS}")
        if not 0 <= fret <= max_fret:
            raise ValidationError(f"{where}: fret {fret} out of range 0..{max_fret}")
        if row["effect"] in excluded:
            continue
        path = root / row["relpath"]
        if not path.is_file():
            raise ValidationError(f"{where}: audio file not found: {path}")
        rate, n_frames = probe_wav(path)
        if rate != declared_rate:
            raise ValidationError(f"{where}: declared rate {declared_rate} != file rate {rate}")
        if n_frames <= 0:
            raise ValidationError(f"{where}: empty audio file")
        if not 8000 <= rate <= 192000:
            raise ValidationError(f"{where}: sample rate {rate} outside 8000..192000")
        samples.append(ToneSample(id=sample_id, path=path, string=string, fret=fret,
                                  effect_tag=row["effect"], source_tag=row["source"],
                                  sample_rate=rate, n_samples=n_frames))

    by_position: dict[tuple[int, int], tuple[str, ...]] = {}
    for s in samples:
        key = (s.string, s.fret)
        by_position[key] = tuple(sorted(by_position.get(key, ()) + (s.id,)))
    return BankIndex(samples=tuple(samples), by_position=by_position,
                     excluded_effects=excluded)


def select_sample(index: BankIndex, string: int, fret: int,
                  rng: np.random.Generator) -> ToneSample:
    """Uniformly random candidate at (string, fret); always advances the generator."""
    ids = index.candidates(string, fret)
    if not ids:
        raise CoverageError([(string, fret)])
    return index.sample(ids[int(rng.integers(len(ids)))])


# ---------------------------------------------------------------------------
# Pitch estimation and bank validation
# ---------------------------------------------------------------------------

MIN_F0_SAMPLES = 4096
RELIABLE_CONFIDENCE = 0.5


@dataclass(frozen=True)
class F0Estimate:
    f0_hz: float
    confidence: float

    @property
    def reliable(self) -> bool:
        return self.confidence >= RELIABLE_CONFIDENCE


def estimate_f0(audio: AudioBuffer, f_min: float = 50.0, f_max: float = 1500.0,
                window: int = MIN_F0_SAMPLES) -> F0Estimate:
    """Dominant periodicity via normalized autocorrelation.

    A centered window is scanned over lags for f_max..f_min; the first local
    maximum within 10% of the global maximum is taken (avoids octave-down
    picks) and refined by parabolic interpolation. Confidence is the peak
    normalized autocorrelation, clipped to [0, 1].
    """
    if len(audio) < MIN_F0_SAMPLES:
        raise ValidationError(f"need at least {MIN_F0_SAMPLES} samples, got {len(audio)}")
    sr = audio.sample_rate
    n = min(len(audio), window)
    start = (len(audio) - n) // 2
    x = audio.samples[start:start + n] - np.mean(audio.samples[start:start + n])

    max_lag = min(int(sr / f_min), n - 2)
    min_lag = max(2, int(round(sr / f_max)))
    if min_lag >= max_lag:
        raise ValidationError("f0 search range is empty for this sample rate")

    nfft = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(x, nfft)
    raw = np.fft.irfft(spectrum * np.conj(spectrum))[:max_lag + 2]
    # normalize each lag by the energies of the two overlapping segments
    csum = np.concatenate([[0.0], np.cumsum(x * x)])
    lags = np.arange(max_lag + 2)
    energy = np.sqrt(csum[n - lags] * (csum[n] - csum[lags]))
    r = np.divide(raw, np.maximum(energy, 1e-300), where=energy > 0,
                  out=np.zeros_like(raw))

    seg = r[min_lag:max_lag + 1]
    global_max = float(seg.max())
    lag = None
    if global_max > 0:
        interior = (seg[1:-1] >= seg[:-2]) & (seg[1:-1] > seg[2:]) & \
                   (seg[1:-1] >= 0.9 * global_max)
        hits = np.nonzero(interior)[0]
        if hits.size:
            lag = int(hits[0]) + 1 + min_lag
    if lag is None:
        lag = int(np.argmax(seg)) + min_lag

    a, b, c = r[lag - 1], r[lag], r[lag + 1]
    denom = a - 2.0 * b + c
    delta = float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5)) if denom != 0 else 0.0
    confidence = float(np.clip(r[lag], 0.0, 1.0))
    return F0Estimate(f0_hz=sr / (lag + delta), confidence=confidence)


@dataclass(frozen=True)
class SampleCheck:
    """Outcome of validating one bank sample against its labelled pitch."""

    id: str
    status: str  # "pass" | "fail" | "error"
    expected_hz: float
    f0_hz: Optional[float] = None
    confidence: Optional[float] = None
    cents_off: Optional[float] = None
    detail: str = ""


@dataclass(frozen=True)
class BankReport:
    checks: tuple[SampleCheck, ...]
    coverage_gaps: tuple[tuple[int, int], ...]

    @property
    def n_pass(self) -> int:
        return sum(1 for c in self.checks if c.status == "pass")

    @property
    def n_fail(self) -> int:
        return sum(1 for c in self.checks if c.status == "fail")

    @property
    def n_error(self) -> int:
        return sum(1 for c in self.checks if c.status == "error")

    @property
    def passed(self) -> bool:
        return self.n_fail == 0 and self.n_error == 0


def validate_bank(index: BankIndex, tuning: Tuning = STANDARD_TUNING,
                  tolerance_cents: float = 50.0,
                  max_fret: int = MAX_FRET) -> BankReport:
    """Pitch-check every sample and list uncovered (string, fret) positions."""
    checks: list[SampleCheck] = []
    for s in index.samples:
        expected = midi_to_hz(tuning.open_for(s.string) + s.fret)
        try:
            est = estimate_f0(read_wav(s.path))
        except (FormatError, ValidationError, OSError) as exc:
            checks.append(SampleCheck(id=s.id, status="error", expected_hz=expected,
                                      detail=str(exc)))
            continue
        cents = 1200.0 * np.log2(est.f0_hz / expected)
        ok = est.reliable and abs(cents) <= tolerance_cents
        detail = "" if ok else (
            "unreliable pitch estimate" if not est.reliable
            else f"off by {cents:+.1f} cents (tolerance {tolerance_cents})")
        checks.append(SampleCheck(id=s.id, status="pass" if ok else "fail",
                                  expected_hz=expected, f0_hz=est.f0_hz,
                                  confidence=est.confidence, cents_off=float(cents),
                                  detail=detail))
    gaps = tuple((s, f) for s in range(1, N_STRINGS + 1) for f in range(max_fret + 1)
                 if not index.by_position.get((s, f)))
    return BankReport(checks=tuple(checks), coverage_gaps=gaps)

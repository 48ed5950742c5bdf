"""Dataset builds: render a directory of symbolic sources into a manifest.

Two modes. `reproduce` renders one synthetic track per source annotation and
carries the original's fold; `external` draws a seeded uniform sample of N
tabs and marks every rendered track as training material for all folds
(origin "synth_external"; its fold field is stored as 0 and ignored by
consumers). All paths inside a manifest are relative to the manifest's
directory, and entries are sorted, so re-running a build with the same
config and seed is byte-identical regardless of worker count.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .audio import probe_wav, write_wav
from .bank import scan_bank
from .errors import CoverageError, FormatError, ParseError, ValidationError
from .labels import write_labels_csv
from .render import (RenderConfig, RenderLog, render_performance, track_seed_for)
from .tab import (STANDARD_TUNING, Tablature, parse_note_annotations,
                  parse_simple_tab)

ORIGIN_REAL = "real"
ORIGIN_REPRODUCED = "synth_reproduced"
ORIGIN_EXTERNAL = "synth_external"

N_FOLDS = 6


@dataclass(frozen=True)
class ManifestEntry:
    track_id: str
    source_path: str
    audio_path: str
    labels_path: str
    render_log_path: Optional[str]
    fold: int
    origin: str


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    cfg_snapshot: RenderConfig
    master_seed: int
    skipped_sources: tuple[dict, ...] = ()

    def to_json(self) -> str:
        doc = {
            "master_seed": self.master_seed,
            "render_config": asdict(self.cfg_snapshot),
            "entries": [asdict(e) for e in self.entries],
            "skipped_sources": list(self.skipped_sources),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        doc = json.loads(text)
        cfg = RenderConfig(**doc["render_config"])
        entries = tuple(ManifestEntry(**e) for e in doc["entries"])
        _check_entries(entries)
        return cls(entries=entries, cfg_snapshot=cfg,
                   master_seed=doc["master_seed"],
                   skipped_sources=tuple(doc.get("skipped_sources", [])))


def _check_entries(entries) -> None:
    ids = [e.track_id for e in entries]
    if len(set(ids)) != len(ids):
        raise ValidationError("manifest track_ids are not unique")
    for e in entries:
        if not 0 <= e.fold < N_FOLDS:
            raise ValidationError(f"track {e.track_id}: fold {e.fold} outside 0..{N_FOLDS - 1}")
        if e.origin not in (ORIGIN_REAL, ORIGIN_REPRODUCED, ORIGIN_EXTERNAL):
            raise ValidationError(f"track {e.track_id}: unknown origin {e.origin!r}")
        if e.origin != ORIGIN_REAL and e.render_log_path is None:
            raise ValidationError(f"track {e.track_id}: synthetic entry lacks a render log")


def player_prefix(track_id: str) -> str:
    """GuitarSet-style grouping key: the id segment before the first underscore."""
    return track_id.split("_", 1)[0]


def make_folds(track_ids, group_key: Callable[[str], str] = player_prefix) -> dict[str, int]:
    """Assign each track the index of its group among the 6 sorted group labels."""
    groups = sorted({group_key(t) for t in track_ids})
    if len(groups) != N_FOLDS:
        raise ValidationError(f"expected exactly {N_FOLDS} groups, got {len(groups)}: {groups}")
    index = {g: i for i, g in enumerate(groups)}
    return {t: index[group_key(t)] for t in track_ids}


# ---------------------------------------------------------------------------
# Build configuration
# ---------------------------------------------------------------------------

_CONFIG_DEFAULTS = {
    "mode": None,                      # "reproduce" | "external"
    "sources_dir": None,
    "source_format": None,             # default depends on mode
    "bank_manifest": None,
    "bank_audio_root": None,           # default: manifest directory
    "excluded_effects": ["delay"],
    "n_tracks": None,                  # external mode only
    "folds": "by-player",              # "by-player" or an integer 0..5
    "render": {},
}

_RENDER_KEYS = {"target_sample_rate", "hop", "fade_out_ms", "normalization_peak",
                "max_fret", "master_seed"}


def resolve_config(config: dict, seed: Optional[int] = None) -> dict:
    """Apply defaults and validate the build config; returns the resolved copy."""
    unknown = set(config) - set(_CONFIG_DEFAULTS)
    if unknown:
        raise ParseError(f"unknown config keys: {sorted(unknown)}")
    resolved = {**_CONFIG_DEFAULTS, **config}
    if resolved["mode"] not in ("reproduce", "external"):
        raise ParseError("config 'mode' must be 'reproduce' or 'external'")
    for key in ("sources_dir", "bank_manifest"):
        if not resolved[key]:
            raise ParseError(f"config '{key}' is required")
    if resolved["source_format"] is None:
        resolved["source_format"] = ("annotations" if resolved["mode"] == "reproduce"
                                     else "simple-tab")
    if resolved["source_format"] not in ("annotations", "simple-tab"):
        raise ParseError("config 'source_format' must be 'annotations' or 'simple-tab'")
    if resolved["mode"] == "external":
        n = resolved["n_tracks"]
        if not isinstance(n, int) or n < 1:
            raise ParseError("external mode requires a positive integer 'n_tracks'")
    folds = resolved["folds"]
    if folds != "by-player" and not (isinstance(folds, int) and 0 <= folds < N_FOLDS):
        raise ParseError("config 'folds' must be 'by-player' or an integer 0..5")
    unknown_render = set(resolved["render"]) - _RENDER_KEYS
    if unknown_render:
        raise ParseError(f"unknown render config keys: {sorted(unknown_render)}")
    render = dict(resolved["render"])
    if seed is not None:
        render["master_seed"] = int(seed)
    resolved["render"] = asdict(RenderConfig(**render))
    return resolved


def _list_sources(sources_dir: Path, source_format: str) -> list[Path]:
    suffixes = {".json"} if source_format == "annotations" else {".tab", ".txt"}
    files = sorted(p for p in sources_dir.iterdir()
                   if p.is_file() and p.suffix in suffixes)
    if not files:
        raise ValidationError(f"no {source_format} sources found in {sources_dir}")
    return files


def _parse_source(path: Path, source_format: str, max_fret: int) -> Tablature:
    text = path.read_text(encoding="utf-8")
    if source_format == "annotations":
        tab = parse_note_annotations(text, max_fret=max_fret)
    else:
        tab = parse_simple_tab(text, max_fret=max_fret, auto_truncate=True,
                               source_id=path.stem)
    if not tab.source_id:
        tab = Tablature(tab.events, tab.tuning, tab.total_duration, path.stem)
    return tab


@dataclass(frozen=True)
class BuildResult:
    manifest: DatasetManifest
    manifest_path: Path
    out_dir: Path


def _render_log_json(log: RenderLog) -> str:
    doc = {
        "track_id": log.track_id,
        "track_seed": log.track_seed,
        "warnings": list(log.warnings),
        "events": [asdict(e) for e in log.entries],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def build_dataset(config: dict, out_dir, jobs: int = 1,
                  seed: Optional[int] = None) -> BuildResult:
    """Render every selected source and write audio, labels, logs and manifest."""
    resolved = resolve_config(config, seed=seed)
    cfg = RenderConfig(**resolved["render"])
    out_dir = Path(out_dir)
    mode = resolved["mode"]

    bank = scan_bank(resolved["bank_manifest"],
                     audio_root=resolved["bank_audio_root"],
                     excluded_effects=frozenset(resolved["excluded_effects"]),
                     max_fret=cfg.max_fret)

    sources = _list_sources(Path(resolved["sources_dir"]), resolved["source_format"])
    tabs: list[tuple[Path, Tablature]] = []
    skipped: list[dict] = []
    for path in sources:
        tab = _parse_source(path, resolved["source_format"], cfg.max_fret)
        if tab.tuning.open_midi != STANDARD_TUNING.open_midi:
            skipped.append({"source": path.name, "reason": "non-standard tuning"})
            continue
        tabs.append((path, tab))
    if not tabs:
        raise ValidationError("all sources were skipped; nothing to render")

    if mode == "external":
        n = resolved["n_tracks"]
        if len(tabs) < n:
            raise ValidationError(f"external mode needs {n} sources, "
                                  f"only {len(tabs)} usable")
        rng = np.random.default_rng(cfg.master_seed)
        chosen = sorted(rng.choice(len(tabs), size=n, replace=False).tolist())
        tabs = [tabs[i] for i in chosen]
        folds = {tab.source_id: 0 for _, tab in tabs}  # ignored for synth_external
        origin = ORIGIN_EXTERNAL
    else:
        if resolved["folds"] == "by-player":
            folds = make_folds([tab.source_id for _, tab in tabs])
        else:
            folds = {tab.source_id: int(resolved["folds"]) for _, tab in tabs}
        origin = ORIGIN_REPRODUCED

    # fail on coverage before producing any audio
    union_positions = set()
    for _, tab in tabs:
        union_positions |= tab.positions
    missing = bank.missing_positions(union_positions)
    if missing:
        raise CoverageError(missing)

    (out_dir / "audio").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)
    (out_dir / "render_logs").mkdir(parents=True, exist_ok=True)

    cache: dict = {}

    def render_one(item: tuple[Path, Tablature]) -> ManifestEntry:
        source_path, tab = item
        track_seed = track_seed_for(cfg.master_seed, tab.source_id)
        result = render_performance(tab, bank, cfg, track_seed, sample_cache=cache)
        audio_rel = f"audio/{tab.source_id}.wav"
        labels_rel = f"labels/{tab.source_id}.csv"
        log_rel = f"render_logs/{tab.source_id}.json"
        write_wav(result.audio, out_dir / audio_rel)
        write_labels_csv(result.labels, out_dir / labels_rel)
        (out_dir / log_rel).write_text(_render_log_json(result.log), encoding="utf-8")
        return ManifestEntry(track_id=tab.source_id,
                             source_path=str(source_path),
                             audio_path=audio_rel, labels_path=labels_rel,
                             render_log_path=log_rel,
                             fold=folds[tab.source_id], origin=origin)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(render_one, tabs))
    else:
        entries = [render_one(item) for item in tabs]
    entries.sort(key=lambda e: e.track_id)
    _check_entries(entries)

    manifest = DatasetManifest(entries=tuple(entries), cfg_snapshot=cfg,
                               master_seed=cfg.master_seed,
                               skipped_sources=tuple(skipped))
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(manifest.to_json(), encoding="utf-8")
    (out_dir / "config.resolved.json").write_text(
        json.dumps(resolved, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return BuildResult(manifest=manifest, manifest_path=manifest_path, out_dir=out_dir)


def check_manifest_files(manifest: DatasetManifest, base_dir) -> list[str]:
    """Verify every referenced audio file exists, parses, and is at the target rate."""
    base_dir = Path(base_dir)
    problems = []
    for e in manifest.entries:
        path = base_dir / e.audio_path
        if not path.is_file():
            problems.append(f"{e.track_id}: missing audio {e.audio_path}")
            continue
        try:
            rate, _ = probe_wav(path)
        except FormatError as exc:
            problems.append(f"{e.track_id}: unreadable audio ({exc})")
            continue
        if rate != manifest.cfg_snapshot.target_sample_rate:
            problems.append(f"{e.track_id}: sample rate {rate} != "
                            f"{manifest.cfg_snapshot.target_sample_rate}")
        if not (base_dir / e.labels_path).is_file():
            problems.append(f"{e.track_id}: missing labels {e.labels_path}")
    return problems


@dataclass(frozen=True)
class EvalSetStats:
    n_tracks: int
    total_s: float
    mean_s: float


def measure_eval_set(audio_dir) -> EvalSetStats:
    """Durations of all WAVs in a directory, for checking an evaluation set."""
    files = sorted(Path(audio_dir).glob("*.wav"))
    if not files:
        raise ValidationError(f"no WAV files in {audio_dir}")
    durations = []
    for path in files:
        rate, n = probe_wav(path)
        durations.append(n / rate)
    total = math.fsum(durations)
    return EvalSetStats(n_tracks=len(files), total_s=total,
                        mean_s=total / len(files))

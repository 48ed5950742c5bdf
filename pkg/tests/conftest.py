"""Shared fixtures: synthetic sine-tone banks, annotation sources, live server."""
from __future__ import annotations

import csv
import json
import socket
import threading
import time
from pathlib import Path

import numpy as np
import pytest

from tabsynth.audio import AudioBuffer, write_wav
from tabsynth.bank import midi_to_hz
from tabsynth.tab import STANDARD_TUNING


def sine_tone(midi: int, sample_rate: int = 22050, duration: float = 1.5,
              amplitude: float = 0.9) -> AudioBuffer:
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    return AudioBuffer(amplitude * np.sin(2 * np.pi * midi_to_hz(midi) * t),
                       sample_rate)


def build_sine_bank(root: Path, sample_rate: int = 22050, duration: float = 1.5,
                    amplitude: float = 0.9, max_fret: int = 19,
                    extra_rows=()) -> Path:
    """Write a full-coverage bank of pure sine tones plus a manifest CSV."""
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    for string in range(1, 7):
        for fret in range(max_fret + 1):
            midi = STANDARD_TUNING.open_midi[string - 1] + fret
            rel = f"s{string}f{fret:02d}.wav"
            write_wav(sine_tone(midi, sample_rate, duration, amplitude), root / rel)
            rows.append({"id": f"s{string}f{fret:02d}", "relpath": rel,
                         "string": string, "fret": fret, "effect": "clean",
                         "source": "sine", "sample_rate": sample_rate})
    rows.extend(extra_rows)
    manifest = root / "bank.csv"
    with manifest.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["id", "relpath", "string", "fret",
                                                "effect", "source", "sample_rate"])
        writer.writeheader()
        writer.writerows(rows)
    return manifest


@pytest.fixture(scope="session")
def sine_bank(tmp_path_factory) -> Path:
    """Manifest path of a session-wide full-coverage 22050 Hz sine bank."""
    return build_sine_bank(tmp_path_factory.mktemp("sine_bank"))


def annotation_doc(source_id: str, notes, total_duration: float) -> str:
    """notes: iterable of (string, time, duration, midi)."""
    doc = {"source_id": source_id, "total_duration": total_duration,
           "tuning": list(STANDARD_TUNING.open_midi)}
    for s in range(1, 7):
        doc[f"string_{s}"] = [
            {"time": t, "duration": d, "midi": m}
            for (string, t, d, m) in notes if string == s
        ]
    return json.dumps(doc, indent=2)


def write_annotation_sources(directory: Path, n_players: int = 6,
                             pieces_per_player: int = 1) -> list[Path]:
    """GuitarSet-style annotation files named <player>_<piece>_solo.json."""
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for player in range(n_players):
        for piece in range(pieces_per_player):
            source_id = f"{player:02d}_piece{piece}_solo"
            string = (player + piece) % 6 + 1
            notes = [
                (string, 0.1, 0.4, STANDARD_TUNING.open_midi[string - 1] + 2),
                (string, 0.7, 0.5, STANDARD_TUNING.open_midi[string - 1] + 5),
            ]
            path = directory / f"{source_id}.json"
            path.write_text(annotation_doc(source_id, notes, 1.5), encoding="utf-8")
            paths.append(path)
    return paths


# Twelve-track fixture set with controlled per-track error counts (out of 100
# frames): the candidate improves position errors massively (tab/TDR columns
# significant) and pitch errors slightly (multi-pitch columns marginal).
BASELINE_WRONG_PITCH = (30, 32, 34, 36, 28, 30, 32, 34, 36, 28, 31, 33)
BASELINE_WRONG_POS = (20, 22, 18, 24, 20, 22, 18, 24, 21, 19, 23, 17)
CANDIDATE_WRONG_PITCH = tuple(x - 2 for x in BASELINE_WRONG_PITCH)
CANDIDATE_WRONG_POS = (5, 6, 4, 7, 5, 6, 4, 7, 5, 6, 4, 7)

_N_FIX_FRAMES = 100


def _fixture_tensor(wrong_pitch: int, wrong_pos: int):
    from tabsynth.labels import LabelTensor

    classes = np.zeros((6, _N_FIX_FRAMES), dtype=np.int64)
    classes[5, :] = 6  # string 6 fret 5 = midi 45 everywhere
    if wrong_pos or wrong_pitch:
        classes[5, :wrong_pos] = 0
        classes[4, :wrong_pos] = 1  # string 5 fret 0 = midi 45: right pitch, wrong spot
        classes[5, wrong_pos:wrong_pos + wrong_pitch] = 10  # fret 9: wrong pitch
    return LabelTensor(classes, hop=512, sample_rate=22050, max_fret=19)


def write_marker_fixtures(gt_dir: Path, baseline_dir: Path, candidate_dir: Path):
    """Label CSVs for 12 tracks realizing the error counts above."""
    from tabsynth.labels import write_labels_csv

    for d in (gt_dir, baseline_dir, candidate_dir):
        d.mkdir(parents=True, exist_ok=True)
    for i in range(12):
        name = f"track{i:02d}.csv"
        write_labels_csv(_fixture_tensor(0, 0), gt_dir / name)
        write_labels_csv(_fixture_tensor(BASELINE_WRONG_PITCH[i],
                                         BASELINE_WRONG_POS[i]),
                         baseline_dir / name)
        write_labels_csv(_fixture_tensor(CANDIDATE_WRONG_PITCH[i],
                                         CANDIDATE_WRONG_POS[i]),
                         candidate_dir / name)


@pytest.fixture(scope="session")
def server_url():
    """A live uvicorn instance of the service, for CLI round trips."""
    import uvicorn

    from tabsynth.service.app import app

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.02)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)

"""Trainer test fixtures.

The producer service is driven strictly through its external surfaces: the
`tabsynth` console entry point run as a subprocess and its HTTP endpoints.
Audio/manifest fixtures are written here with the stdlib so this package
never imports the producer.
"""
from __future__ import annotations

import csv
import json
import socket
import subprocess
import sys
import time
import wave
from pathlib import Path

import httpx
import numpy as np
import pytest

OPEN_MIDI = (64, 59, 55, 50, 45, 40)
SAMPLE_RATE = 22050


def midi_hz(midi: int) -> float:
    return 440.0 * 2.0 ** ((midi - 69) / 12.0)


def write_sine_wav(path: Path, midi: int, duration: float = 1.5,
                   amplitude: float = 0.9, sample_rate: int = SAMPLE_RATE):
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    samples = amplitude * np.sin(2 * np.pi * midi_hz(midi) * t)
    pcm = np.round(np.clip(samples, -1, 1) * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(sample_rate)
        fh.writeframes(pcm.tobytes())


def write_bank(root: Path, max_fret: int = 19) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    for string in range(1, 7):
        for fret in range(max_fret + 1):
            rel = f"s{string}f{fret:02d}.wav"
            write_sine_wav(root / rel, OPEN_MIDI[string - 1] + fret)
            rows.append({"id": f"s{string}f{fret:02d}", "relpath": rel,
                         "string": string, "fret": fret, "effect": "clean",
                         "source": "sine", "sample_rate": SAMPLE_RATE})
    manifest = root / "bank.csv"
    with manifest.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["id", "relpath", "string", "fret",
                                                "effect", "source", "sample_rate"])
        writer.writeheader()
        writer.writerows(rows)
    return manifest


def write_annotation(path: Path, source_id: str, notes, total: float):
    doc = {"source_id": source_id, "total_duration": total,
           "tuning": list(OPEN_MIDI)}
    for s in range(1, 7):
        doc[f"string_{s}"] = [{"time": t, "duration": d, "midi": m}
                              for (string, t, d, m) in notes if string == s]
    path.write_text(json.dumps(doc), encoding="utf-8")


@pytest.fixture(scope="session")
def server_url():
    """`tabsynth serve` as a subprocess; yields its base URL."""
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    proc = subprocess.Popen([sys.executable, "-m", "tabsynth", "serve",
                             "--port", str(port)],
                            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    url = f"http://127.0.0.1:{port}"
    try:
        for _ in range(150):
            try:
                if httpx.get(url + "/health", timeout=1).status_code == 200:
                    break
            except httpx.HTTPError:
                time.sleep(0.1)
        else:
            raise RuntimeError("producer service did not come up")
        yield url
    finally:
        proc.terminate()
        proc.wait(timeout=10)


@pytest.fixture(scope="session")
def ten_second_dataset(server_url, tmp_path_factory):
    """One 10 s synthetic track built through the producer's build endpoint."""
    root = tmp_path_factory.mktemp("ten_second")
    bank = write_bank(root / "bank")
    sources = root / "sources"
    sources.mkdir()
    rng = np.random.default_rng(3)
    notes = []
    cursor = 0.1
    while cursor < 9.0:
        string = int(rng.integers(1, 7))
        fret = int(rng.integers(0, 12))
        duration = float(rng.uniform(0.4, 0.8))
        notes.append((string, round(cursor, 3), round(duration, 3),
                      OPEN_MIDI[string - 1] + fret))
        cursor += duration + float(rng.uniform(0.05, 0.15))
    write_annotation(sources / "00_overfit_solo.json", "00_overfit_solo",
                     notes, 10.0)
    config = {"mode": "reproduce", "sources_dir": str(sources),
              "bank_manifest": str(bank), "folds": 0,
              "render": {"master_seed": 1}}
    response = httpx.post(server_url + "/dataset/build",
                          json={"config": config, "out_dir": str(root / "ds")},
                          timeout=None)
    assert response.status_code == 200, response.text
    return {"root": root, "manifest": root / "ds" / "manifest.json",
            "audio": root / "ds" / "audio" / "00_overfit_solo.wav",
            "labels_dir": root / "ds" / "labels",
            "track_id": "00_overfit_solo"}

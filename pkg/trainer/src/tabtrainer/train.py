"""Training and prediction over tabsynth dataset manifests."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .dataio import (Manifest, load_manifest, read_labels, training_entries,
                     write_predictions)
from .features import CONTEXT, HOP, N_BINS, SAMPLE_RATE, context_windows, extract_features
from .model import FretNet

BATCH_SIZE = 64


def _seed_everything(seed: int) -> torch.Generator:
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True)
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator


def _assemble(entries, max_fret: int) -> tuple[torch.Tensor, torch.Tensor]:
    patches = []
    targets = []
    for entry in entries:
        block = extract_features(entry.audio_path)
        classes, meta = read_labels(entry.labels_path)
        if meta["hop"] != HOP or meta["sr"] != SAMPLE_RATE:
            raise ValueError(f"{entry.track_id}: label grid "
                             f"(hop={meta['hop']}, sr={meta['sr']}) unsupported")
        if classes.shape[1] != block.n_frames:
            raise ValueError(f"{entry.track_id}: {block.n_frames} feature frames "
                             f"vs {classes.shape[1]} label frames")
        patches.append(context_windows(block))
        targets.append(classes.T)  # [n_frames x 6]
    x = torch.from_numpy(np.concatenate(patches, axis=0))
    y = torch.from_numpy(np.concatenate(targets, axis=0))
    if int(y.max()) > max_fret + 1:
        raise ValueError("label class outside the configured fret range")
    return x, y


def _config_hash(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def train(manifest_path, fold: int, epochs: int, seed: int, out_dir,
          learning_rate: float = 1e-3) -> dict:
    """Train on every entry outside `fold` and save a checkpoint directory."""
    manifest: Manifest = load_manifest(manifest_path)
    entries = training_entries(manifest, fold)
    if not entries:
        raise ValueError(f"fold {fold}: empty training split")

    generator = _seed_everything(seed)
    n_classes = manifest.max_fret + 2
    x, y = _assemble(entries, manifest.max_fret)

    model = FretNet(n_classes)
    optimizer = torch.optim.Adam(model.parameters(), lr=learning_rate)
    loss_fn = nn.CrossEntropyLoss()

    model.train()
    final_loss = float("nan")
    for _epoch in range(epochs):
        order = torch.randperm(x.shape[0], generator=generator)
        epoch_loss = 0.0
        for start in range(0, x.shape[0], BATCH_SIZE):
            batch = order[start:start + BATCH_SIZE]
            optimizer.zero_grad()
            logits = model(x[batch])
            loss = loss_fn(logits.reshape(-1, n_classes), y[batch].reshape(-1))
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * batch.shape[0]
        final_loss = epoch_loss / x.shape[0]

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = {
        "fold": fold, "epochs": epochs, "seed": seed,
        "learning_rate": learning_rate, "n_classes": n_classes,
        "n_bins": N_BINS, "context": CONTEXT, "hop": HOP, "sr": SAMPLE_RATE,
        "max_fret": manifest.max_fret,
        "n_train_tracks": len(entries), "final_loss": final_loss,
    }
    config["config_hash"] = _config_hash(
        {k: v for k, v in config.items() if k != "final_loss"})
    torch.save(model.state_dict(), out_dir / "model.pt")
    (out_dir / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True),
                                         encoding="utf-8")
    return config


def load_model(checkpoint_dir) -> tuple[FretNet, dict]:
    checkpoint_dir = Path(checkpoint_dir)
    config = json.loads((checkpoint_dir / "config.json").read_text(encoding="utf-8"))
    model = FretNet(config["n_classes"])
    model.load_state_dict(torch.load(checkpoint_dir / "model.pt",
                                     weights_only=True))
    model.eval()
    return model, config


def predict(checkpoint_dir, audio_path, out_path) -> np.ndarray:
    """Argmax classes per string per frame, written in the scorer's CSV format."""
    model, config = load_model(checkpoint_dir)
    block = extract_features(audio_path)
    x = torch.from_numpy(context_windows(block))
    outputs = []
    with torch.no_grad():
        for start in range(0, x.shape[0], 256):
            logits = model(x[start:start + 256])
            outputs.append(logits.argmax(dim=2).numpy())
    classes = (np.concatenate(outputs, axis=0).T if outputs
               else np.zeros((6, 0), dtype=np.int64))
    write_predictions(classes,
                      {"hop": config["hop"], "sr": config["sr"],
                       "max_fret": config["max_fret"]},
                      out_path)
    return classes

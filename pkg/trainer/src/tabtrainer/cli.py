"""Command-line entry points for training and prediction."""
from __future__ import annotations

import click

from . import train as train_mod


@click.group()
def main():
    """Desk-scale fret classifier over tabsynth dataset manifests."""


@main.command()
@click.option("--manifest", required=True, help="Dataset manifest JSON.")
@click.option("--fold", type=int, default=0, show_default=True,
              help="Hold-out fold; training uses everything else.")
@click.option("--epochs", type=int, default=30, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", required=True, help="Checkpoint directory.")
@click.option("--learning-rate", type=float, default=1e-3, show_default=True)
def train(manifest, fold, epochs, seed, out_dir, learning_rate):
    """Train the classifier and save a checkpoint."""
    config = train_mod.train(manifest, fold, epochs, seed, out_dir,
                             learning_rate=learning_rate)
    click.echo(f"trained {config['n_train_tracks']} tracks, "
               f"final loss {config['final_loss']:.4f} -> {out_dir}")


@main.command()
@click.option("--model", "checkpoint_dir", required=True)
@click.option("--audio", "audio_path", required=True)
@click.option("--out", "out_path", required=True, help="Prediction CSV path.")
def predict(checkpoint_dir, audio_path, out_path):
    """Write frame predictions for one track."""
    classes = train_mod.predict(checkpoint_dir, audio_path, out_path)
    sounding = int((classes > 0).sum())
    click.echo(f"wrote {classes.shape[1]} frames ({sounding} sounding cells) "
               f"-> {out_path}")


if __name__ == "__main__":
    main()

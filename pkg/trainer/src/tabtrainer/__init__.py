"""tabtrainer: small fret-classification harness for tabsynth datasets."""

__version__ = "0.1.0"

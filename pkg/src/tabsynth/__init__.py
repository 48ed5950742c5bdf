"""tabsynth: synthetic solo-guitar dataset building and transcription scoring."""

__version__ = "0.1.0"

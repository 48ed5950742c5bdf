"""Mono audio buffers plus 16-bit PCM WAV reading and writing.

The reader walks RIFF chunks directly so that truncated or malformed files
surface as FormatError rather than as garbage samples. Supported payloads:
16-bit integer PCM and 32-bit float, mono or stereo (stereo is downmixed by
averaging the channels on load). The writer always emits 16-bit PCM mono.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError

_PCM = 1
_IEEE_FLOAT = 3


@dataclass(frozen=True)
class AudioBuffer:
    """Immutable mono signal; samples are float64 amplitudes, nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValidationError(f"audio must be 1-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("audio contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValidationError(f"sample rate must be positive, got {self.sample_rate}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


def write_wav(audio: AudioBuffer, path) -> None:
    """Write 16-bit PCM mono; input is clipped to [-1, 1] before quantization."""
    clipped = np.clip(audio.samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype("<i2")
    data = pcm.tobytes()
    sr = audio.sample_rate
    block_align = 2
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    fmt = struct.pack("<4sIHHIIHH", b"fmt ", 16, _PCM, 1, sr, sr * block_align,
                      block_align, 16)
    Path(path).write_bytes(header + fmt + b"data" + struct.pack("<I", len(data)) + data)


def _iter_chunks(blob: bytes):
    if len(blob) < 12:
        raise FormatError("file too short for a RIFF header")
    if blob[0:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE file")
    pos = 12
    while pos < len(blob):
        if pos + 8 > len(blob):
            raise FormatError("truncated chunk header")
        cid = blob[pos:pos + 4]
        (size,) = struct.unpack_from("<I", blob, pos + 4)
        body_start = pos + 8
        if body_start + size > len(blob):
            raise FormatError(f"truncated {cid!r} chunk")
        yield cid, blob[body_start:body_start + size]
        pos = body_start + size + (size & 1)  # chunks are word aligned


def _parse_fmt(body: bytes) -> tuple[int, int, int, int]:
    if len(body) < 16:
        raise FormatError("fmt chunk too short")
    code, channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", body)
    if code not in (_PCM, _IEEE_FLOAT):
        raise FormatError(f"unsupported format code {code}")
    if code == _PCM and bits != 16:
        raise FormatError(f"unsupported PCM bit depth {bits}")
    if code == _IEEE_FLOAT and bits != 32:
        raise FormatError(f"unsupported float bit depth {bits}")
    if channels not in (1, 2):
        raise FormatError(f"unsupported channel count {channels}")
    if sample_rate <= 0:
        raise FormatError("non-positive sample rate")
    return code, channels, sample_rate, bits


def _decode(data: bytes, code: int, channels: int) -> np.ndarray:
    if code == _PCM:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32767.0
    else:
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
        samples = np.clip(samples, -1.0, 1.0)
    if channels == 2:
        if samples.size % 2:
            raise FormatError("stereo data chunk has an odd sample count")
        samples = samples.reshape(-1, 2).mean(axis=1)
    return samples


def read_wav(path) -> AudioBuffer:
    """Read a PCM/float WAV file into a mono AudioBuffer."""
    blob = Path(path).read_bytes()
    fmt = None
    data = None
    for cid, body in _iter_chunks(blob):
        if cid == b"fmt " and fmt is None:
            fmt = _parse_fmt(body)
        elif cid == b"data" and data is None:
            data = body
    if fmt is None:
        raise FormatError("missing fmt chunk")
    if data is None:
        raise FormatError("missing data chunk")
    code, channels, sample_rate, bits = fmt
    frame_size = channels * bits // 8
    if len(data) % frame_size:
        raise FormatError("data chunk size is not a whole number of frames")
    return AudioBuffer(_decode(data, code, channels), sample_rate)


def probe_wav(path) -> tuple[int, int]:
    """Return (sample_rate, n_frames) from the headers without decoding audio."""
    blob = Path(path).read_bytes()
    fmt = None
    data_len = None
    for cid, body in _iter_chunks(blob):
        if cid == b"fmt " and fmt is None:
            fmt = _parse_fmt(body)
        elif cid == b"data" and data_len is None:
            data_len = len(body)
    if fmt is None or data_len is None:
        raise FormatError("missing fmt or data chunk")
    code, channels, sample_rate, bits = fmt
    frame_size = channels * bits // 8
    if data_len % frame_size:
        raise FormatError("data chunk size is not a whole number of frames")
    return sample_rate, data_len // frame_size

"""Log-magnitude constant-Q-style spectrogram features.

192 bins at 24 per octave upward from the low open E string, computed as a
triangular filterbank over an 8192-point STFT with hop 512 at 22050 Hz.
Frame k is centered on sample k*hop and the frame count is ceil(n/hop), so
features line up one-to-one with the dataset's label tensors. Bins whose
center exceeds Nyquist stay at the log floor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import read_wav_mono

SAMPLE_RATE = 22050
HOP = 512
N_BINS = 192
BINS_PER_OCTAVE = 24
F_MIN = 440.0 * 2.0 ** ((40 - 69) / 12.0)  # low E (midi 40)
N_FFT = 8192
CONTEXT = 9  # context window width in frames
LOG_FLOOR = 1e-6


@dataclass(frozen=True)
class FeatureBlock:
    values: np.ndarray  # [N_BINS x n_frames]
    bin_layout: str
    context: int = CONTEXT

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def _filterbank(sample_rate: int) -> np.ndarray:
    centers = F_MIN * 2.0 ** (np.arange(-1, N_BINS + 1) / BINS_PER_OCTAVE)
    fft_freqs = np.fft.rfftfreq(N_FFT, d=1.0 / sample_rate)
    nyquist = sample_rate / 2.0
    bank = np.zeros((N_BINS, fft_freqs.size))
    for k in range(N_BINS):
        lo, center, hi = centers[k], centers[k + 1], centers[k + 2]
        if center >= nyquist:
            continue
        rising = (fft_freqs - lo) / (center - lo)
        falling = (hi - fft_freqs) / (hi - center)
        tri = np.clip(np.minimum(rising, falling), 0.0, None)
        if not tri.any():  # band narrower than the FFT grid: take nearest bin
            tri[np.argmin(np.abs(fft_freqs - center))] = 1.0
        bank[k] = tri / tri.sum()
    return bank


_BANK_CACHE: dict[int, np.ndarray] = {}


def _stft_magnitudes(samples: np.ndarray, n_frames: int) -> np.ndarray:
    half = N_FFT // 2
    padded = np.pad(samples, half, mode="reflect")
    window = np.hanning(N_FFT)
    frames = np.empty((n_frames, N_FFT // 2 + 1))
    for k in range(n_frames):
        chunk = padded[k * HOP: k * HOP + N_FFT]
        if chunk.shape[0] < N_FFT:
            chunk = np.pad(chunk, (0, N_FFT - chunk.shape[0]))
        frames[k] = np.abs(np.fft.rfft(chunk * window))
    return frames


def extract_features(audio_path) -> FeatureBlock:
    """Features for one track; the file must already be at 22050 Hz."""
    samples, sample_rate = read_wav_mono(audio_path)
    if sample_rate != SAMPLE_RATE:
        raise ValueError(f"{audio_path}: sample rate {sample_rate}, "
                         f"expected {SAMPLE_RATE} (no silent resampling)")
    n_frames = int(np.ceil(len(samples) / HOP)) if len(samples) else 0
    if sample_rate not in _BANK_CACHE:
        _BANK_CACHE[sample_rate] = _filterbank(sample_rate)
    magnitudes = _stft_magnitudes(samples, n_frames)
    cqt = magnitudes @ _BANK_CACHE[sample_rate].T  # [n_frames x N_BINS]
    values = 20.0 * np.log10(cqt + LOG_FLOOR)
    # per-track standardization keeps training numerically stable
    std = values.std()
    if std > 0:
        values = (values - values.mean()) / std
    return FeatureBlock(values=values.T.astype(np.float32),
                        bin_layout=f"{N_BINS}bins_{BINS_PER_OCTAVE}per_octave_"
                                   f"from_{F_MIN:.2f}Hz")


def context_windows(block: FeatureBlock) -> np.ndarray:
    """[n_frames x 1 x N_BINS x CONTEXT] patches, edges clamped."""
    half = CONTEXT // 2
    n = block.n_frames
    idx = np.clip(np.arange(n)[:, None] + np.arange(-half, half + 1)[None, :],
                  0, max(n - 1, 0))
    patches = block.values[:, idx]            # [N_BINS x n x CONTEXT]
    return np.ascontiguousarray(patches.transpose(1, 0, 2))[:, None, :, :]

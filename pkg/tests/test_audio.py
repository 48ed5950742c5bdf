import struct

import numpy as np
import pytest

from tabsynth.audio import AudioBuffer, probe_wav, read_wav, write_wav
from tabsynth.errors import FormatError, ValidationError


def make_sine(n=22050, sr=22050, amp=0.8, freq=440.0):
    t = np.arange(n) / sr
    return AudioBuffer(amp * np.sin(2 * np.pi * freq * t), sr)


class TestAudioBuffer:
    def test_immutable_samples(self):
        buf = make_sine(100)
        with pytest.raises(ValueError):
            buf.samples[0] = 1.0

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            AudioBuffer(np.array([0.0, np.nan]), 22050)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValidationError):
            AudioBuffer(np.zeros(4), 0)

    def test_duration(self):
        assert make_sine(11025).duration == pytest.approx(0.5)


class TestWavRoundTrip:
    def test_quantization_bound(self, tmp_path):
        buf = make_sine()
        path = tmp_path / "sine.wav"
        write_wav(buf, path)
        back = read_wav(path)
        assert back.sample_rate == buf.sample_rate
        assert len(back) == len(buf)
        assert np.max(np.abs(back.samples - buf.samples)) <= 2.0 ** -15

    def test_second_round_trip_is_exact(self, tmp_path):
        buf = make_sine()
        first = tmp_path / "a.wav"
        second = tmp_path / "b.wav"
        write_wav(buf, first)
        write_wav(read_wav(first), second)
        a = read_wav(first)
        b = read_wav(second)
        assert np.array_equal(a.samples, b.samples)

    def test_write_clips_out_of_range(self, tmp_path):
        buf = AudioBuffer(np.array([1.5, -2.0, 0.5]), 22050)
        path = tmp_path / "clip.wav"
        write_wav(buf, path)
        back = read_wav(path)
        assert back.samples[0] == pytest.approx(1.0)
        assert back.samples[1] == pytest.approx(-1.0)
        assert back.samples[2] == pytest.approx(0.5, abs=1e-4)

    def test_probe_matches_read(self, tmp_path):
        path = tmp_path / "p.wav"
        write_wav(make_sine(1234), path)
        rate, n = probe_wav(path)
        assert (rate, n) == (22050, 1234)


class TestWavErrors:
    def test_truncated_file(self, tmp_path):
        path = tmp_path / "t.wav"
        write_wav(make_sine(1000), path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(FormatError):
            read_wav(path)

    def test_not_riff(self, tmp_path):
        path = tmp_path / "x.wav"
        path.write_bytes(b"OGGS" + b"\x00" * 64)
        with pytest.raises(FormatError):
            read_wav(path)

    def test_too_short(self, tmp_path):
        path = tmp_path / "s.wav"
        path.write_bytes(b"RIFF")
        with pytest.raises(FormatError):
            read_wav(path)

    def test_missing_data_chunk(self, tmp_path):
        fmt = struct.pack("<4sIHHIIHH", b"fmt ", 16, 1, 1, 22050, 44100, 2, 16)
        blob = b"RIFF" + struct.pack("<I", 4 + len(fmt)) + b"WAVE" + fmt
        path = tmp_path / "nodata.wav"
        path.write_bytes(blob)
        with pytest.raises(FormatError, match="data"):
            read_wav(path)

    def test_unsupported_bit_depth(self, tmp_path):
        fmt = struct.pack("<4sIHHIIHH", b"fmt ", 16, 1, 1, 22050, 44100 * 3 // 2, 3, 24)
        data = b"data" + struct.pack("<I", 0)
        blob = b"RIFF" + struct.pack("<I", 4 + len(fmt) + len(data)) + b"WAVE" + fmt + data
        path = tmp_path / "b24.wav"
        path.write_bytes(blob)
        with pytest.raises(FormatError, match="bit depth"):
            read_wav(path)


def _write_raw_wav(path, code, channels, sr, bits, payload: bytes):
    block = channels * bits // 8
    fmt = struct.pack("<4sIHHIIHH", b"fmt ", 16, code, channels, sr, sr * block,
                      block, bits)
    body = fmt + b"data" + struct.pack("<I", len(payload)) + payload
    path.write_bytes(b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body)


class TestWavVariants:
    def test_float32_payload(self, tmp_path):
        values = np.array([0.25, -0.5, 1.0, -1.0], dtype="<f4")
        path = tmp_path / "f32.wav"
        _write_raw_wav(path, 3, 1, 48000, 32, values.tobytes())
        buf = read_wav(path)
        assert buf.sample_rate == 48000
        assert np.allclose(buf.samples, values.astype(float))

    def test_float32_clipped_to_unit_range(self, tmp_path):
        values = np.array([2.0, -3.0], dtype="<f4")
        path = tmp_path / "f32big.wav"
        _write_raw_wav(path, 3, 1, 22050, 32, values.tobytes())
        buf = read_wav(path)
        assert buf.samples.tolist() == [1.0, -1.0]

    def test_stereo_downmix_averages(self, tmp_path):
        left = np.array([10000, 0, -10000], dtype="<i2")
        right = np.array([0, 20000, -10000], dtype="<i2")
        interleaved = np.empty(6, dtype="<i2")
        interleaved[0::2] = left
        interleaved[1::2] = right
        path = tmp_path / "st.wav"
        _write_raw_wav(path, 1, 2, 22050, 16, interleaved.tobytes())
        buf = read_wav(path)
        expected = (left.astype(float) + right.astype(float)) / 2 / 32767.0
        assert np.allclose(buf.samples, expected)

"""Mono waveforms, 16-bit PCM WAV I/O and RMS levels."""
import wave
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError

SAMPLE_RATE = 16000
PCM_SCALE = 32768.0


@dataclass
class Waveform:
    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ConfigurationError("waveform must be a non-empty 1-D signal")
        if self.sample_rate <= 0:
            raise ConfigurationError(f"sample rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ConfigurationError("waveform contains NaN or Inf")

    def __len__(self):
        return self.samples.size

    def scaled(self, gain):
        return Waveform(self.samples * gain, self.sample_rate)


def to_pcm16(samples):
    """Quantise to int16: round half away from zero, then clamp."""
    x = np.asarray(samples, dtype=np.float64) * PCM_SCALE
    q = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return np.clip(q, -32768, 32767).astype("<i2")


def from_pcm16(ints):
    return np.asarray(ints, dtype=np.float64) / PCM_SCALE


def read_wav(path):
    """Read a mono 16-bit PCM WAV file into a Waveform scaled by 1/32768."""
    try:
        with wave.open(str(path), "rb") as f:
            channels, width, rate = f.getnchannels(), f.getsampwidth(), f.getframerate()
            comptype = f.getcomptype()
            n = f.getnframes()
            raw = f.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise DataError(f"{path}: malformed or unsupported WAV ({exc})") from exc
    except OSError as exc:
        raise DataError(f"{path}: cannot read ({exc})") from exc
    if comptype != "NONE" or width != 2:
        raise DataError(f"{path}: only 16-bit PCM is supported (sample width {8 * width} bits)")
    if channels != 1:
        raise DataError(f"{path}: only mono is supported, file has {channels} channels")
    ints = np.frombuffer(raw, dtype="<i2")
    if ints.size == 0:
        raise DataError(f"{path}: no audio frames")
    return Waveform(from_pcm16(ints), rate)


def write_wav(w, path):
    """Write a Waveform as mono 16-bit PCM; values outside [-1, 1) are clamped."""
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(int(w.sample_rate))
        f.writeframes(to_pcm16(w.samples).tobytes())


def rms(w):
    x = w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=np.float64)
    return float(np.sqrt(np.mean(np.square(x))))


def normalize_rms(w, target=0.06):
    """Scale ``w`` so its RMS equals ``target``. Silent input is an error."""
    level = rms(w)
    if level == 0.0:
        raise DataError("cannot RMS-normalise a silent signal")
    return w.scaled(target / level)

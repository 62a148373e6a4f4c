"""Segmental SNR, SSNR gain and MAE over (clean, noisy, enhanced) triples."""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .audio import Waveform
from .errors import ConfigurationError, DataError
from .model import forward


@dataclass(frozen=True)
class SSNRConfig:
    """Rectangular 32 ms frames with 50 % overlap at 16 kHz, per-frame SNR clamped to [-10, 35] dB."""

    frame_length: int = 512
    hop: int = 256
    clamp_low: float = -10.0
    clamp_high: float = 35.0

    def __post_init__(self):
        if not 0 < self.hop <= self.frame_length:
            raise ConfigurationError(f"need 0 < hop <= frame_length, got {self.hop}, {self.frame_length}")
        if not self.clamp_low < self.clamp_high:
            raise ConfigurationError("clamp_low must be below clamp_high")


def _samples(w):
    return w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=np.float64)


def frame_snrs(clean, degraded, cfg=SSNRConfig()):
    """Clamped per-frame SNRs in dB; frames with a silent reference are left out."""
    c = _samples(clean).astype(np.float64)
    d = _samples(degraded).astype(np.float64)
    if c.shape != d.shape:
        raise ConfigurationError(f"length mismatch: {c.shape} vs {d.shape}")
    if c.size < cfg.frame_length:
        raise ConfigurationError(
            f"signal of {c.size} samples is shorter than one {cfg.frame_length}-sample frame")
    starts = np.arange(0, c.size - cfg.frame_length + 1, cfg.hop)
    idx = starts[:, None] + np.arange(cfg.frame_length)
    signal = np.sum(c[idx] ** 2, axis=1)
    error = np.sum((c[idx] - d[idx]) ** 2, axis=1)
    keep = signal > 0
    with np.errstate(divide="ignore"):
        snr = 10.0 * np.log10(signal[keep] / error[keep])
    return np.clip(snr, cfg.clamp_low, cfg.clamp_high)


def ssnr(clean, degraded, cfg=SSNRConfig()):
    """Segmental SNR of ``degraded`` against the reference ``clean`` (argument order matters)."""
    snrs = frame_snrs(clean, degraded, cfg)
    if snrs.size == 0:
        raise DataError("every frame of the clean reference is silent")
    return float(np.mean(snrs))


def snr_gain(clean, noisy, enhanced, cfg=SSNRConfig()):
    return ssnr(clean, enhanced, cfg) - ssnr(clean, noisy, cfg)


def mae(clean, enhanced):
    return float(np.mean(np.abs(_samples(clean).astype(np.float64) - _samples(enhanced))))


def snr(clean, degraded):
    """Whole-signal SNR in dB."""
    c = _samples(clean)
    e = c - _samples(degraded)
    return 10.0 * math.log10(np.sum(c ** 2) / np.sum(e ** 2))


@dataclass(frozen=True)
class UtteranceMetrics:
    utterance: str
    ssnr_noisy: float
    ssnr_enhanced: float
    snr_gain_db: float
    mae: float


COLUMNS = ("ssnr_noisy", "ssnr_enhanced", "snr_gain_db", "mae")


@dataclass
class MetricsReport:
    rows: list = field(default_factory=list)

    def mean(self, column):
        return float(np.mean([getattr(r, column) for r in self.rows]))

    @property
    def means(self):
        return {c: self.mean(c) for c in COLUMNS}

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(("utterance",) + COLUMNS)
            for r in self.rows:
                w.writerow((r.utterance,) + tuple(f"{getattr(r, c):.6f}" for c in COLUMNS))
            means = self.means
            w.writerow(("MEAN",) + tuple(f"{means[c]:.6f}" for c in COLUMNS))


def score(clean, noisy, enhanced, name="", cfg=SSNRConfig()):
    s_noisy = ssnr(clean, noisy, cfg)
    s_enh = ssnr(clean, enhanced, cfg)
    return UtteranceMetrics(name, s_noisy, s_enh, s_enh - s_noisy, mae(clean, enhanced))


def evaluate(pairs, params, config, names=None, cfg=SSNRConfig()):
    """Enhance every ``(noisy, clean)`` pair and score it."""
    if not pairs:
        raise ConfigurationError("nothing to evaluate")
    names = names if names is not None else [str(i) for i in range(len(pairs))]
    report = MetricsReport()
    for name, (noisy, clean) in zip(names, pairs):
        noisy = _samples(noisy)
        clean = _samples(clean)
        enhanced = forward(noisy, params, config).astype(np.float64)
        report.rows.append(score(clean, noisy, enhanced, name, cfg))
    return report

"""Noisy-mixture synthesis and manifests.

A manifest is a tab-separated text file, one mixture per line::

    clean_path <TAB> noise_path <TAB> snr_db <TAB> noise_offset <TAB> seed

Blank lines and ``#`` comments are ignored, except ``# split: train|test``
which tags the manifest. Relative paths resolve against the manifest's
directory. A negative ``noise_offset`` means "draw the offset from ``seed``".
"""
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import Waveform, read_wav, rms
from .errors import ConfigurationError, DataError

TARGET_RMS = 0.06
TRAIN_SNRS = (0.0, 5.0, 10.0, 15.0)
TEST_SNRS = (2.5, 7.5, 12.5, 17.5)


def snr_gain(clean, noise, snr_db):
    """Gain ``g`` such that ``20 log10(rms(clean) / rms(g * noise)) == snr_db``."""
    return (rms(clean) / rms(noise)) * 10.0 ** (-snr_db / 20.0)


def measured_snr(clean, noise):
    return 20.0 * math.log10(rms(clean) / rms(noise))


def mix_at_snr(clean, noise, snr_db):
    """Return ``(noisy, scaled_noise)`` with the noise scaled to ``snr_db``.

    No clipping protection: the mixture may leave [-1, 1].
    """
    if len(clean) != len(noise):
        raise ConfigurationError(f"length mismatch: clean {len(clean)}, noise {len(noise)}")
    if clean.sample_rate != noise.sample_rate:
        raise ConfigurationError(
            f"sample rate mismatch: clean {clean.sample_rate}, noise {noise.sample_rate}")
    if not math.isfinite(snr_db):
        raise ConfigurationError(f"SNR must be finite, got {snr_db}")
    if rms(clean) == 0.0 or rms(noise) == 0.0:
        raise DataError("cannot mix at an SNR with a silent clean or noise signal")
    scaled = noise.scaled(snr_gain(clean, noise, snr_db))
    return Waveform(clean.samples + scaled.samples, clean.sample_rate), scaled


@dataclass(frozen=True)
class MixtureSpec:
    clean_path: str
    noise_path: str
    snr_db: float
    noise_offset: int = 0
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise ConfigurationError(f"SNR must be finite, got {self.snr_db}")


@dataclass
class Manifest:
    specs: list = field(default_factory=list)
    split: str = "train"
    base_dir: Path = Path(".")

    def __post_init__(self):
        if self.split not in ("train", "test"):
            raise ConfigurationError(f"split must be 'train' or 'test', got {self.split!r}")

    def __len__(self):
        return len(self.specs)

    def __iter__(self):
        return iter(self.specs)

    def resolve(self, path):
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def parse_manifest(text, base_dir=".", source="<manifest>"):
    specs, split = [], "train"
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, _, value = stripped[1:].partition(":")
            if key.strip() == "split":
                split = value.strip()
                if split not in ("train", "test"):
                    raise DataError(f"{source}:{lineno}: unknown split {split!r}")
            continue
        parts = line.rstrip("\r\n").split("\t")
        if len(parts) != 5:
            raise DataError(f"{source}:{lineno}: expected 5 tab-separated fields, got {len(parts)}")
        try:
            spec = MixtureSpec(parts[0], parts[1], float(parts[2]), int(parts[3]), int(parts[4]))
        except (ValueError, ConfigurationError) as exc:
            raise DataError(f"{source}:{lineno}: {exc}") from exc
        specs.append(spec)
    return Manifest(specs, split, Path(base_dir))


def read_manifest(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    return parse_manifest(text, path.parent, str(path))


def format_manifest(manifest):
    lines = [f"# split: {manifest.split}"]
    for s in manifest.specs:
        lines.append(f"{s.clean_path}\t{s.noise_path}\t{s.snr_db!r}\t{s.noise_offset}\t{s.seed}")
    return "\n".join(lines) + "\n"


def write_manifest(manifest, path):
    Path(path).write_text(format_manifest(manifest))


def noise_segment(noise, length, offset, seed=0):
    """Cut ``length`` samples starting at ``offset``, wrapping around if needed."""
    n = len(noise)
    if offset < 0:
        offset = int(np.random.default_rng(seed).integers(0, n))
    idx = (offset + np.arange(length)) % n
    return Waveform(noise.samples[idx], noise.sample_rate)


def realize(spec, base_dir=".", target_rms=TARGET_RMS):
    """Build the ``(noisy, clean)`` training pair described by ``spec``.

    Both signals are scaled by the one gain that brings the noisy mixture to
    ``target_rms``, so ``noisy - clean`` is still exactly the scaled noise.
    """
    base = Path(base_dir)

    def load(p):
        p = Path(p)
        return read_wav(p if p.is_absolute() else base / p)

    clean = load(spec.clean_path)
    noise = load(spec.noise_path)
    if noise.sample_rate != clean.sample_rate:
        raise DataError(
            f"sample rate mismatch: {spec.clean_path} is {clean.sample_rate} Hz, "
            f"{spec.noise_path} is {noise.sample_rate} Hz")
    segment = noise_segment(noise, len(clean), spec.noise_offset, spec.seed)
    noisy, _ = mix_at_snr(clean, segment, spec.snr_db)
    gain = target_rms / rms(noisy)
    return noisy.scaled(gain), clean.scaled(gain)


def realize_manifest(manifest):
    return [realize(spec, manifest.base_dir) for spec in manifest]

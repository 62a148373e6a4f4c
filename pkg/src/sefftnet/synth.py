"""Synthetic speech-like signals and coloured noise for licence-free corpora.

The "speech" is a harmonic series on a gliding pitch contour, gated by a
syllable-rate envelope with pauses. It has the long-range periodic structure
the dilated stack is meant to exploit; it is not intelligible speech.
"""
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .audio import SAMPLE_RATE, Waveform, write_wav
from .data import TEST_SNRS, TRAIN_SNRS, Manifest, MixtureSpec, write_manifest


def speech_like(n_samples, sample_rate=SAMPLE_RATE, seed=0, peak=0.5):
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / sample_rate
    f0_base = rng.uniform(100.0, 220.0)
    # slow pitch glide plus vibrato-like wobble
    f0 = f0_base * (1.0 + 0.15 * np.sin(2 * np.pi * rng.uniform(0.3, 1.0) * t + rng.uniform(0, 2 * np.pi))
                    + 0.02 * np.sin(2 * np.pi * 5.0 * t))
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate
    n_harm = int(sample_rate / 2 // (f0_base * 1.3))
    n_harm = max(1, min(n_harm, 12))
    formant = rng.uniform(400.0, 900.0)
    x = np.zeros(n_samples)
    for k in range(1, n_harm + 1):
        amp = 1.0 / k * np.exp(-((k * f0_base - formant) / 800.0) ** 2) + 0.05 / k
        x += amp * np.sin(k * phase + rng.uniform(0, 2 * np.pi))
    # syllables at ~4 Hz with random gaps
    rate = rng.uniform(3.0, 5.0)
    env = np.clip(np.sin(2 * np.pi * rate * t + rng.uniform(0, 2 * np.pi)), 0, None) ** 0.7
    n_syll = int(np.ceil(t[-1] * rate)) + 1 if n_samples else 1
    gates = rng.random(n_syll) > 0.2
    env *= gates[np.minimum((t * rate).astype(int), n_syll - 1)]
    env = lfilter([0.01], [1, -0.99], env)
    x *= env
    m = np.max(np.abs(x))
    if m > 0:
        x *= peak / m
    else:
        x = peak * np.sin(2 * np.pi * f0_base * t)
    return Waveform(x, sample_rate)


def colored_noise(n_samples, sample_rate=SAMPLE_RATE, seed=0, pole=0.0, peak=0.5):
    """White noise through a one-pole filter; ``pole`` in [0, 1) tilts it towards low frequencies."""
    rng = np.random.default_rng(seed)
    x = lfilter([1.0], [1.0, -pole], rng.standard_normal(n_samples))
    return Waveform(x * (peak / np.max(np.abs(x))), sample_rate)


NOISE_POLES = (0.0, 0.5, 0.9, -0.5)


def make_corpus(out_dir, n_train=8, n_test=4, seconds=1.0, seed=0, sample_rate=SAMPLE_RATE):
    """Write clean/noise WAVs plus ``train.tsv`` and ``test.tsv`` manifests into ``out_dir``.

    Train mixtures cycle through the training SNRs, test mixtures through the
    held-out test SNRs. Returns the two manifest paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = int(round(seconds * sample_rate))
    rng = np.random.default_rng(seed)
    paths = {}
    for split, count, snrs in (("train", n_train, TRAIN_SNRS), ("test", n_test, TEST_SNRS)):
        specs = []
        for i in range(count):
            clean_name = f"{split}_clean_{i:03d}.wav"
            noise_name = f"{split}_noise_{i:03d}.wav"
            s_seed, n_seed, m_seed = (int(v) for v in rng.integers(0, 2**31, size=3))
            write_wav(speech_like(n, sample_rate, s_seed), out / clean_name)
            pole = NOISE_POLES[i % len(NOISE_POLES)]
            write_wav(colored_noise(2 * n, sample_rate, n_seed, pole), out / noise_name)
            specs.append(MixtureSpec(clean_name, noise_name, snrs[i % len(snrs)], -1, m_seed))
        path = out / f"{split}.tsv"
        write_manifest(Manifest(specs, split, out), path)
        paths[split] = path
    return paths["train"], paths["test"]

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sefftnet.audio import Waveform, rms, write_wav
from sefftnet.data import (
    TARGET_RMS,
    Manifest,
    MixtureSpec,
    format_manifest,
    measured_snr,
    mix_at_snr,
    noise_segment,
    parse_manifest,
    read_manifest,
    realize,
    snr_gain,
    write_manifest,
)
from sefftnet.errors import ConfigurationError, DataError
from sefftnet.synth import colored_noise, make_corpus, speech_like


def test_snr_gain_examples():
    c = Waveform(np.array([1.0, -1.0, 1.0, -1.0]))
    assert snr_gain(c, c, 0.0) == 1.0
    assert snr_gain(c, c, 20.0) == pytest.approx(0.1, rel=1e-15)


def test_identical_signals_at_zero_db():
    c = speech_like(500, seed=1)
    noisy, noise = mix_at_snr(c, c, 0.0)
    np.testing.assert_array_equal(noisy.samples, 2 * c.samples)
    np.testing.assert_array_equal(noise.samples, c.samples)


@settings(max_examples=60, deadline=None)
@given(st.floats(-10, 40), st.integers(0, 10_000), st.sampled_from([0.0, 0.5, 0.9, -0.5]))
def test_mixture_snr_remeasures_exactly(snr, seed, pole):
    c = speech_like(800, seed=seed)
    n = colored_noise(800, seed=seed + 1, pole=pole)
    noisy, scaled = mix_at_snr(c, n, snr)
    assert abs(measured_snr(c, scaled) - snr) < 1e-9
    assert abs(measured_snr(c, Waveform(noisy.samples - c.samples)) - snr) < 1e-6


def test_mix_errors():
    c = speech_like(100, seed=0)
    with pytest.raises(ConfigurationError):
        mix_at_snr(c, speech_like(99, seed=0), 0.0)
    with pytest.raises(ConfigurationError):
        mix_at_snr(c, Waveform(c.samples, 8000), 0.0)
    with pytest.raises(ConfigurationError):
        mix_at_snr(c, c, float("inf"))
    with pytest.raises(DataError):
        mix_at_snr(c, Waveform(np.zeros(100)), 5.0)


def test_noise_segment_wraps():
    n = Waveform(np.arange(5.0))
    np.testing.assert_array_equal(noise_segment(n, 7, 3).samples, [3, 4, 0, 1, 2, 3, 4])
    a = noise_segment(n, 4, -1, seed=9).samples
    np.testing.assert_array_equal(a, noise_segment(n, 4, -1, seed=9).samples)


@pytest.fixture
def corpus(tmp_path):
    write_wav(speech_like(1600, seed=3), tmp_path / "clean.wav")
    write_wav(colored_noise(3000, seed=4, pole=0.5), tmp_path / "noise.wav")
    return tmp_path


def test_realize_shared_gain(corpus):
    spec = MixtureSpec("clean.wav", "noise.wav", 5.0, 100, 0)
    noisy, clean = realize(spec, corpus)
    assert abs(rms(noisy) - TARGET_RMS) <= 1e-6
    assert abs(measured_snr(clean, Waveform(noisy.samples - clean.samples)) - 5.0) <= 0.01
    noisy2, clean2 = realize(spec, corpus)
    np.testing.assert_array_equal(noisy.samples, noisy2.samples)
    np.testing.assert_array_equal(clean.samples, clean2.samples)


def test_realize_seeded_offsets(corpus):
    a = realize(MixtureSpec("clean.wav", "noise.wav", 5.0, -1, 1), corpus)[0]
    b = realize(MixtureSpec("clean.wav", "noise.wav", 5.0, -1, 2), corpus)[0]
    assert not np.array_equal(a.samples, b.samples)


def test_realize_sample_rate_mismatch(corpus):
    write_wav(Waveform(np.full(100, 0.1), 8000), corpus / "n8k.wav")
    with pytest.raises(DataError):
        realize(MixtureSpec("clean.wav", "n8k.wav", 5.0), corpus)


def test_manifest_parse_and_roundtrip(tmp_path):
    text = "# a comment\n# split: test\n\na.wav\tn.wav\t2.5\t0\t7\nb.wav\tn.wav\t-3\t-1\t8\n"
    m = parse_manifest(text)
    assert m.split == "test" and len(m) == 2
    assert m.specs[0] == MixtureSpec("a.wav", "n.wav", 2.5, 0, 7)
    assert m.specs[1].noise_offset == -1
    write_manifest(m, tmp_path / "m.tsv")
    back = read_manifest(tmp_path / "m.tsv")
    assert back.specs == m.specs and back.split == "test" and back.base_dir == tmp_path
    assert format_manifest(back) == format_manifest(m)


@pytest.mark.parametrize("bad,line", [
    ("a.wav\tn.wav\t5\t0\t1\na.wav\tn.wav\tfive\t0\t1\n", 2),
    ("a.wav\tn.wav\t5\t0\n", 1),
    ("# x\na.wav n.wav 5 0 1\n", 2),
    ("a.wav\tn.wav\tnan\t0\t1\n", 1),
    ("a.wav\tn.wav\t5\t0.5\t1\n", 1),
    ("# split: dev\n", 1),
])
def test_manifest_errors_name_the_line(bad, line):
    with pytest.raises(DataError, match=f":{line}:"):
        parse_manifest(bad)


def test_manifest_split_validation():
    with pytest.raises(ConfigurationError):
        Manifest([], "dev")


def test_make_corpus(tmp_path):
    train, test = make_corpus(tmp_path, 3, 2, 0.25, seed=1)
    tr, te = read_manifest(train), read_manifest(test)
    assert (len(tr), tr.split, len(te), te.split) == (3, "train", 2, "test")
    assert {s.snr_db for s in tr} <= {0.0, 5.0, 10.0, 15.0}
    assert {s.snr_db for s in te} <= {2.5, 7.5, 12.5, 17.5}
    noisy, clean = realize(tr.specs[0], tr.base_dir)
    assert len(noisy) == 4000
    again = tmp_path / "again"
    make_corpus(again, 3, 2, 0.25, seed=1)
    for f in sorted(tmp_path.glob("*.wav")):
        assert f.read_bytes() == (again / f.name).read_bytes()

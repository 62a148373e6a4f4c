import numpy as np
import pytest

from sefftnet import backend
from sefftnet.audio import rms
from sefftnet.data import TARGET_RMS, mix_at_snr
from sefftnet.synth import colored_noise, speech_like

BACKENDS = ["numpy"]
try:
    backend.load("cython")
    BACKENDS.append("cython")
except ImportError:
    pass


@pytest.fixture(params=BACKENDS)
def each_backend(request):
    previous = backend.NAME
    backend.use(request.param)
    yield request.param
    backend.use(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def synthetic_pair(n=4126, snr_db=10.0, pole=-0.5, clean_seed=10, noise_seed=20):
    """RMS-normalised (noisy, clean) arrays from the synthetic generators."""
    clean = speech_like(n, seed=clean_seed)
    noise = colored_noise(n, seed=noise_seed, pole=pole)
    noisy, _ = mix_at_snr(clean, noise, snr_db)
    g = TARGET_RMS / rms(noisy)
    return noisy.samples * g, clean.samples * g


@pytest.fixture
def pair():
    return synthetic_pair()


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)

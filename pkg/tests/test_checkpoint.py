import struct

import numpy as np
import pytest

from sefftnet import checkpoint
from sefftnet.errors import DataError
from sefftnet.model import ModelConfig, build, count_params, forward


@pytest.mark.parametrize("cfg", [
    ModelConfig((1,), 2),
    ModelConfig((8, 4, 2, 1), 5),
    ModelConfig((3, 1), 4, causal=True),
])
def test_roundtrip_is_bit_exact(tmp_path, cfg):
    params = build(cfg, 11)
    path = tmp_path / "m.seff"
    checkpoint.save(path, cfg, params)
    cfg2, params2 = checkpoint.load(path)
    assert cfg2 == cfg
    for (n1, a), (n2, b) in zip(params.named_arrays(), params2.named_arrays()):
        assert n1 == n2
        np.testing.assert_array_equal(a, b)
    assert checkpoint.dumps(cfg2, params2) == path.read_bytes()
    x = np.random.default_rng(0).standard_normal(64)
    np.testing.assert_array_equal(forward(x, params, cfg), forward(x, params2, cfg2))


def test_layout():
    cfg = ModelConfig((1,), 2)
    params = build(cfg, 0)
    blob = checkpoint.dumps(cfg, params)
    assert blob[:4] == b"SEFF"
    assert struct.unpack_from("<IIIII", blob, 4) == (1, 2, 0, 1, 1)
    assert len(blob) == 24 + 4 * 31
    values = np.frombuffer(blob, "<f4", offset=24)
    np.testing.assert_array_equal(values[:2], params.input_proj.weight.ravel())
    np.testing.assert_array_equal(values[-3:-1], params.final_fc.weight.ravel())


def test_float64_params_are_stored_as_float32():
    cfg = ModelConfig((2, 1), 3)
    p64 = build(cfg, 1, np.float64)
    _, back = checkpoint.loads(checkpoint.dumps(cfg, p64))
    assert back.dtype == np.float32
    np.testing.assert_array_equal(back.arrays()[3], p64.arrays()[3].astype(np.float32))


def _blob():
    cfg = ModelConfig((2, 1), 3)
    return checkpoint.dumps(cfg, build(cfg, 0))


@pytest.mark.parametrize("corrupt", [
    lambda b: b"",
    lambda b: b"NOPE" + b[4:],
    lambda b: b[:4] + struct.pack("<I", 2) + b[8:],
    lambda b: b[:12] + struct.pack("<I", 7) + b[16:],
    lambda b: b[:16] + struct.pack("<I", 0) + b[20:],
    lambda b: b[:16] + struct.pack("<I", 10**6) + b[20:],
    lambda b: b[:-1],
    lambda b: b + b"\0\0\0\0",
    lambda b: b[:22],
])
def test_corrupt_files_raise_data_error(corrupt):
    with pytest.raises(DataError):
        checkpoint.loads(corrupt(_blob()))


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        checkpoint.load(tmp_path / "absent.seff")


def test_header_size_matches_param_count():
    cfg = ModelConfig.se_fftnet(channels=4)
    params = build(cfg, 0)
    assert len(checkpoint.dumps(cfg, params)) == 20 + 4 * 30 + 4 * count_params(cfg)

"""Binary model checkpoints.

Layout (all integers little-endian u32)::

    b"SEFF"  version  channels  causal(0|1)  n_dilations  dilation * n
    float32 LE parameters, row-major, in ModelParams.named_arrays() order:
        input_proj.weight [1 x C], input_proj.bias [C],
        per block: tap_past.w/b, tap_present.w/b, tap_future.w/b (non-causal
        only), post.w/b,
        final_fc.weight [C x 1], final_fc.bias [1]
"""
import struct

import numpy as np

from .errors import DataError
from .model import ModelConfig, count_params, zeros

MAGIC = b"SEFF"
VERSION = 1


def dumps(config, params):
    head = struct.pack(
        f"<4sIIII{len(config.schedule)}I",
        MAGIC, VERSION, config.channels, int(config.causal), len(config.schedule),
        *config.schedule)
    body = b"".join(np.asarray(a, dtype="<f4").tobytes() for a in params.arrays())
    return head + body


def loads(blob):
    """Parse checkpoint bytes into ``(config, float32 params)``."""
    if len(blob) < 20 or blob[:4] != MAGIC:
        raise DataError("not an SEFF checkpoint (bad magic)")
    version, channels, causal, n = struct.unpack_from("<IIII", blob, 4)
    if version != VERSION:
        raise DataError(f"unsupported checkpoint version {version}")
    if causal not in (0, 1) or n == 0 or channels == 0:
        raise DataError("corrupt checkpoint header")
    offset = 20 + 4 * n
    if len(blob) < offset:
        raise DataError("truncated checkpoint header")
    schedule = struct.unpack_from(f"<{n}I", blob, 20)
    config = ModelConfig(schedule, channels, bool(causal))
    expected = count_params(config) * 4
    if len(blob) - offset != expected:
        raise DataError(
            f"checkpoint holds {len(blob) - offset} parameter bytes, config needs {expected}")
    values = np.frombuffer(blob, dtype="<f4", offset=offset)
    params = zeros(config, np.float32)
    pos = 0
    for a in params.arrays():
        a[...] = values[pos:pos + a.size].reshape(a.shape)
        pos += a.size
    return config, params


def save(path, config, params):
    with open(path, "wb") as f:
        f.write(dumps(config, params))


def load(path):
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except OSError as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc}") from exc
    return loads(blob)

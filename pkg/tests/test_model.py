import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sefftnet.errors import ConfigurationError
from sefftnet.gradcheck import gradcheck
from sefftnet.model import (
    FFTNET_DILATIONS,
    BlockParams,
    ModelConfig,
    block_forward,
    build,
    check_params,
    count_params,
    fftnet_schedule,
    forward,
    invfftnet_schedule,
    receptive_field,
    zeros,
)
from sefftnet.tensor import Conv1x1Params


def test_default_schedule():
    s = fftnet_schedule()
    assert len(s) == 30
    assert s[:10] == FFTNET_DILATIONS == (512, 256, 128, 64, 32, 16, 8, 4, 2, 1)
    assert s == FFTNET_DILATIONS * 3
    assert invfftnet_schedule() == tuple(reversed(s))
    assert fftnet_schedule(8, 2) == (8, 4, 2, 1, 8, 4, 2, 1)


@pytest.mark.parametrize("bad", [dict(schedule=()), dict(schedule=(4, 0)), dict(schedule=(1,), channels=0)])
def test_config_validation(bad):
    with pytest.raises(ConfigurationError):
        ModelConfig(**bad)


@pytest.mark.parametrize("schedule,causal,expected", [
    ((1,), False, (1, 1)),
    ((1,), True, (1, 0)),
    ((2, 1), False, (3, 3)),
    ((4, 2, 1), False, (7, 7)),
    ((4, 2, 1), True, (7, 0)),
    (fftnet_schedule(), False, (3069, 3069)),
    (invfftnet_schedule(), False, (3069, 3069)),
])
def test_receptive_field(schedule, causal, expected):
    assert receptive_field(ModelConfig(schedule, 4, causal)) == expected


def test_param_count_examples():
    assert count_params(ModelConfig((1,), 2)) == 31
    assert build(ModelConfig((1,), 2), 0).size() == 31
    assert count_params(ModelConfig.se_fftnet()) == 7_895_809
    assert count_params(ModelConfig.se_invfftnet()) == 7_895_809


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 64), min_size=1, max_size=6), st.integers(1, 9), st.booleans())
def test_param_count_closed_form(schedule, C, causal):
    cfg = ModelConfig(schedule, C, causal)
    taps = 2 if causal else 3
    expected = 2 * C + len(schedule) * (taps + 1) * (C * C + C) + (C + 1)
    assert count_params(cfg) == expected == build(cfg, 0).size()
    assert count_params(cfg.inverted()) == expected


def test_build_is_deterministic_and_seeded():
    cfg = ModelConfig((4, 2, 1), 8)
    a, b, c = build(cfg, 3), build(cfg, 3), build(cfg, 4)
    for (na, x), (_, y), (_, z) in zip(a.named_arrays(), b.named_arrays(), c.named_arrays()):
        np.testing.assert_array_equal(x, y)
        if na.endswith("weight"):
            assert not np.array_equal(x, z)
        else:
            assert not x.any()


def test_build_init_bounds():
    p = build(ModelConfig((2, 1), 16), 0)
    assert np.abs(p.input_proj.weight).max() <= 1.0
    for _, conv in p.convs()[1:]:
        assert np.abs(conv.weight).max() <= 1 / 4


def test_check_params_rejects_mismatch():
    p = build(ModelConfig((2, 1), 4), 0)
    with pytest.raises(ConfigurationError):
        check_params(p, ModelConfig((2, 1, 1), 4))
    with pytest.raises(ConfigurationError):
        check_params(p, ModelConfig((2, 1), 5))
    with pytest.raises(ConfigurationError):
        check_params(p, ModelConfig((2, 1), 4, causal=True))


def _scalar_block(wp, wc, wf, wq, bc=0.0, bq=0.0):
    def conv(w, b=0.0):
        return Conv1x1Params(np.array([[w]], float), np.array([b], float))
    return BlockParams(conv(wp), conv(wc, bc), None if wf is None else conv(wf), conv(wq, bq))


@pytest.mark.parametrize("block,expected", [
    (_scalar_block(1, 1, 1, 1), [4, 8, 8]),
    (_scalar_block(2, -1, 0.5, -1, bc=-1, bq=10), [11, 11.5, 13]),
    (_scalar_block(1, 1, None, 1), [2, 5, 8]),
    (_scalar_block(0, 0, 0, 0), [1, 2, 3]),
])
def test_block_hand_computed(each_backend, block, expected):
    x = np.array([[1.0], [2.0], [3.0]])
    out, _, _ = block_forward(x, block, 1)
    np.testing.assert_array_equal(out[:, 0], expected)


def test_zero_block_is_identity(each_backend, rng):
    cfg = ModelConfig((8, 1), 5)
    p = zeros(cfg)
    x = rng.standard_normal((40, 5)).astype(np.float32)
    for d, block in zip(cfg.schedule, p.blocks):
        np.testing.assert_array_equal(block_forward(x, block, d)[0], x)


def test_forward_zero_params_gives_final_bias(each_backend, rng):
    cfg = ModelConfig((2, 1), 3)
    p = zeros(cfg)
    p.final_fc.bias[0] = 0.25
    np.testing.assert_array_equal(forward(rng.standard_normal(11), p, cfg), np.full(11, 0.25, np.float32))


def test_forward_identity_path(each_backend, rng):
    cfg = ModelConfig((4, 2, 1), 3)
    p = zeros(cfg, np.float64)
    p.input_proj.weight[0, 0] = 1.0
    p.final_fc.weight[0, 0] = 1.0
    x = rng.standard_normal(20)
    np.testing.assert_array_equal(forward(x, p, cfg), x)
    np.testing.assert_array_equal(forward(x[:, None], p, cfg), x)


def test_forward_shapes_and_short_inputs(each_backend, rng):
    cfg = ModelConfig((8, 4, 2, 1), 4)
    p = build(cfg, 0)
    for T in (1, 2, 7, 30):
        y = forward(rng.standard_normal(T), p, cfg)
        assert y.shape == (T,) and y.dtype == np.float32
    with pytest.raises(ConfigurationError):
        forward(np.zeros(0), p, cfg)
    with pytest.raises(ConfigurationError):
        forward(np.zeros((4, 2)), p, cfg)


def _positive_model(cfg, seed):
    """Every weight, bias and input positive, so every ReLU passes and every path counts."""
    p = build(cfg, seed, np.float64)
    for a in p.arrays():
        a[...] = np.abs(a) + (0.01 if a.ndim == 1 else 0.0)
    return p


@pytest.mark.parametrize("schedule,causal", [((4, 2, 1), False), ((4, 2, 1), True), ((1, 3, 2), False)])
def test_output_depends_exactly_on_receptive_window(each_backend, schedule, causal):
    cfg = ModelConfig(schedule, 4, causal)
    r1, r2 = receptive_field(cfg)
    T = 2 * (r1 + r2) + 9
    p = _positive_model(cfg, 1)
    x = np.random.default_rng(2).uniform(0.1, 1.0, T)
    base = forward(x, p, cfg)
    for u in range(T):
        x2 = x.copy()
        x2[u] += 1.0
        changed = forward(x2, p, cfg) != base
        t = np.arange(T)
        inside = (t - r1 <= u) & (u <= t + r2)
        np.testing.assert_array_equal(changed, inside, err_msg=f"perturbing x[{u}]")


@pytest.mark.parametrize("causal", [False, True])
def test_outside_window_untouched_for_random_params(each_backend, causal):
    cfg = ModelConfig((4, 2, 1), 4, causal)
    r1, r2 = receptive_field(cfg)
    p = build(cfg, 7)
    rng = np.random.default_rng(3)
    x = rng.standard_normal(40).astype(np.float32)
    base = forward(x, p, cfg)
    t = np.arange(40)
    for u in range(40):
        x2 = x.copy()
        x2[u] = rng.standard_normal()
        changed = forward(x2, p, cfg) != base
        outside = ~((t - r1 <= u) & (u <= t + r2))
        assert not changed[outside].any()


def test_causal_output_ignores_future(each_backend, rng):
    cfg = ModelConfig((8, 4, 2, 1), 6, causal=True)
    p = build(cfg, 0)
    x = rng.standard_normal(200).astype(np.float32)
    full = forward(x, p, cfg)
    for k in (1, 2, 37, 150, 199):
        np.testing.assert_array_equal(forward(x[:k], p, cfg), full[:k])
    tail = x.copy()
    tail[120:] = rng.standard_normal(80)
    np.testing.assert_array_equal(forward(tail, p, cfg)[:120], full[:120])


@pytest.mark.parametrize("causal", [False, True])
@pytest.mark.parametrize("shift", [1, 5, 13])
def test_shift_equivariance(each_backend, causal, shift):
    cfg = ModelConfig((4, 2, 1), 5, causal)
    r1, r2 = receptive_field(cfg)
    p = build(cfg, 2)
    z = np.random.default_rng(shift).standard_normal(120).astype(np.float32)
    T = 100
    a = forward(z[shift:shift + T], p, cfg)
    b = forward(z[:T], p, cfg)
    # a[t] sees z[t + shift - r1 .. t + shift + r2]; b[t + shift] sees the same
    lo, hi = r1, T - shift - r2
    np.testing.assert_array_equal(a[lo:hi], b[lo + shift:hi + shift])


def test_backends_agree_on_forward(rng):
    from conftest import BACKENDS
    from sefftnet import backend
    cfg = ModelConfig((8, 4, 2, 1), 8)
    p = build(cfg, 0)
    x = rng.standard_normal(300).astype(np.float32)
    previous = backend.NAME
    outs = []
    try:
        for name in BACKENDS:
            backend.use(name)
            outs.append(forward(x, p, cfg))
    finally:
        backend.use(previous)
    for y in outs[1:]:
        np.testing.assert_array_equal(y, outs[0])


@pytest.mark.parametrize("causal", [False, True])
def test_gradients_wide(each_backend, causal):
    res = gradcheck(ModelConfig((2, 1), 3, causal), trials=4, precision="wide", length=10, seed=5)
    assert res.passed, res.summary()
    assert res.checked > 0.8 * (res.checked + res.skipped)


def test_gradients_standard(each_backend):
    res = gradcheck(ModelConfig((2, 1), 3), trials=4, precision="standard", length=10, seed=5)
    assert res.passed, res.summary()

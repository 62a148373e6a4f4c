"""``key = value`` run configuration files.

Schema (every key optional; unknown keys are rejected)::

    # model
    schedule            fftnet | invfftnet | fftnet:<max>x<repeats> |
                        invfftnet:<max>x<repeats> | comma list, e.g. 8,4,2,1
    channels            int   (256)
    causal              bool  (false)
    # training
    learning_rate       float (0.001)
    beta1, beta2        float (0.9, 0.999)
    epsilon             float (1e-8)
    target_field        int   (4096)
    batch_size          int   (1, the only supported value)
    max_steps           int   (1000)
    checkpoint_interval int   (0 = final checkpoint only)
    seed                int   ($SEFFT_SEED or 0)

``#`` starts a comment. Later assignments (e.g. command-line overrides)
replace earlier ones.
"""
import os
import re
from dataclasses import dataclass, field

from .errors import ConfigurationError
from .model import ModelConfig, fftnet_schedule, invfftnet_schedule
from .trainer import TrainConfig

_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def parse_bool(text):
    try:
        return _BOOL[text.strip().lower()]
    except KeyError:
        raise ConfigurationError(f"expected a boolean, got {text!r}") from None


def parse_schedule(text):
    text = text.strip()
    m = re.fullmatch(r"(fftnet|invfftnet)(?::(\d+)x(\d+))?", text)
    if m:
        make = fftnet_schedule if m.group(1) == "fftnet" else invfftnet_schedule
        if m.group(2):
            return make(int(m.group(2)), int(m.group(3)))
        return make()
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ConfigurationError(f"bad schedule {text!r}") from None


SCHEMA = {
    "schedule": parse_schedule,
    "channels": int,
    "causal": parse_bool,
    "learning_rate": float,
    "beta1": float,
    "beta2": float,
    "epsilon": float,
    "target_field": int,
    "batch_size": int,
    "max_steps": int,
    "checkpoint_interval": int,
    "seed": int,
}
MODEL_KEYS = ("schedule", "channels", "causal")


def default_seed():
    raw = os.environ.get("SEFFT_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"SEFFT_SEED must be an integer, got {raw!r}") from None


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def set(self, key, raw, source="override"):
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigurationError(f"{source}: unknown key {key!r}")
        try:
            self.values[key] = SCHEMA[key](raw.strip())
        except ValueError as exc:
            raise ConfigurationError(f"{source}: bad value for {key}: {exc}") from None

    def update_text(self, text, source="<config>"):
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
            self.set(key, value, f"{source}:{lineno}")

    def update_pairs(self, pairs):
        for item in pairs or ():
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigurationError(f"override {item!r} is not key=value")
            self.set(key, value)

    def model_config(self):
        v = self.values
        schedule = v.get("schedule", fftnet_schedule())
        return ModelConfig(schedule, v.get("channels", 256), v.get("causal", False))

    def train_config(self):
        kwargs = {k: v for k, v in self.values.items() if k not in MODEL_KEYS}
        kwargs.setdefault("seed", default_seed())
        return TrainConfig(**kwargs)


def load_run_config(path=None, overrides=None):
    rc = RunConfig()
    if path is not None:
        try:
            with open(path) as f:
                text = f.read()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        rc.update_text(text, str(path))
    rc.update_pairs(overrides)
    return rc

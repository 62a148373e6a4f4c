"""Decreasing vs increasing dilation order on one corpus.

Both variants share channels, block internals, initial seed and data order;
only the schedule is reversed. The report records which variant scored the
higher enhanced SSNR. At desk scale this is an observation, not a test.
"""
import csv
from dataclasses import dataclass

import numpy as np

from .metrics import evaluate
from .model import build, count_params
from .trainer import train


@dataclass(frozen=True)
class ComparisonRow:
    model: str
    schedule: str
    params: int
    final_train_loss: float
    ssnr_noisy: float
    ssnr_enhanced: float
    snr_gain_db: float


def variants(config):
    """``config`` as the SE-FFTNet arm and its reversed schedule as the SE-InvFFTNet arm."""
    return [("se_fftnet", config), ("se_invfftnet", config.inverted())]


def compare_dilation_order(train_pairs, test_pairs, config, train_cfg, tail=0.1):
    rows = []
    for name, cfg in variants(config):
        params = build(cfg, train_cfg.seed)
        result = train(params, cfg, train_pairs, train_cfg)
        losses = [loss for _, _, loss in result.log]
        k = max(1, int(len(losses) * tail)) if losses else 0
        final_loss = float(np.mean(losses[-k:])) if losses else float("nan")
        means = evaluate(test_pairs, params, cfg).means
        rows.append(ComparisonRow(
            name, ",".join(map(str, cfg.schedule)), count_params(cfg), final_loss,
            means["ssnr_noisy"], means["ssnr_enhanced"], means["snr_gain_db"]))
    return rows


def fftnet_not_worse(rows):
    by_name = {r.model: r for r in rows}
    return by_name["se_fftnet"].ssnr_enhanced >= by_name["se_invfftnet"].ssnr_enhanced


def write_comparison(rows, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(("model", "schedule", "params", "final_train_loss",
                    "ssnr_noisy", "ssnr_enhanced", "snr_gain_db"))
        for r in rows:
            w.writerow((r.model, r.schedule, r.params, f"{r.final_train_loss:.6f}",
                        f"{r.ssnr_noisy:.6f}", f"{r.ssnr_enhanced:.6f}", f"{r.snr_gain_db:.6f}"))

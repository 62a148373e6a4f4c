"""Command-line interface: ``sefftnet <command> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime or data error.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from . import backend, checkpoint
from .audio import Waveform, read_wav, rms, write_wav
from .config import load_run_config, default_seed
from .data import read_manifest, realize
from .errors import ConfigurationError, DataError, NonFiniteError, UsageError
from .experiments import compare_dilation_order, fftnet_not_worse, write_comparison
from .gradcheck import corrupted_backward, gradcheck
from .metrics import evaluate
from .model import build, count_params, forward, receptive_field
from .synth import make_corpus
from .trainer import load_training_state, train


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_config_args(p):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", default=[],
                   help="override one configuration key (repeatable)")


def _run_config(args):
    overrides = list(args.set)
    if args.command != "gradcheck" and getattr(args, "seed", None) is not None:
        overrides.append(f"seed={args.seed}")
    return load_run_config(args.config, overrides)


def _realize_all(manifest):
    pairs, names = [], []
    for i, spec in enumerate(manifest):
        noisy, clean = realize(spec, manifest.base_dir)
        pairs.append((noisy.samples, clean.samples))
        names.append(f"{i:04d}_{Path(spec.clean_path).stem}")
    return pairs, names


def cmd_synth(args):
    seed = default_seed() if args.seed is None else args.seed
    train_path, test_path = make_corpus(args.out_dir, args.train, args.test, args.seconds, seed)
    print(f"wrote {train_path} and {test_path}")


def cmd_mix(args):
    manifest = read_manifest(args.manifest)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, spec in enumerate(manifest):
        if args.seed is not None:
            spec = type(spec)(spec.clean_path, spec.noise_path, spec.snr_db,
                              spec.noise_offset, spec.seed + args.seed)
        noisy, clean = realize(spec, manifest.base_dir)
        write_wav(noisy, out / f"{i:04d}_noisy.wav")
        write_wav(clean, out / f"{i:04d}_clean.wav")
    print(f"wrote {2 * len(manifest)} files to {out}")


def cmd_train(args):
    rc = _run_config(args)
    cfg = rc.train_config()
    if args.resume:
        config, params, state = load_training_state(args.resume)
        if any(k in rc.values for k in ("schedule", "channels", "causal")) and \
                rc.model_config() != config:
            raise ConfigurationError("model keys in the configuration differ from the resumed checkpoint")
    else:
        config = rc.model_config()
        params = build(config, cfg.seed)
        state = None
    pairs, _ = _realize_all(read_manifest(args.manifest))
    prior = Path(args.resume).parent / "loss.csv" if args.resume else None
    result = train(params, config, pairs, cfg, out_dir=args.out, state=state, prior_log=prior)
    last = result.log[-1] if result.log else None
    if last:
        print(f"step {last[0]} loss {last[2]:.6f}")
    print(f"checkpoint {result.checkpoints[-1]}")


def cmd_enhance(args):
    config, params = checkpoint.load(args.checkpoint)
    w = read_wav(args.input)
    x = w.samples
    gain = 1.0
    if args.rms is not None and rms(w) == 0.0:
        raise DataError(f"{args.input}: cannot RMS-normalise a silent file")
    if args.rms is not None:
        gain = args.rms / rms(w)
    y = forward(x * gain, params, config).astype(np.float64) / gain
    write_wav(Waveform(y, w.sample_rate), args.output)


def cmd_eval(args):
    config, params = checkpoint.load(args.checkpoint)
    pairs, names = _realize_all(read_manifest(args.manifest))
    report = evaluate(pairs, params, config, names)
    if args.out:
        report.to_csv(args.out)
    means = report.means
    print(" ".join(f"{k}={v:.4f}" for k, v in means.items()))


def describe(config):
    r1, r2 = receptive_field(config)
    return (f"schedule={','.join(map(str, config.schedule))}\n"
            f"blocks={len(config.schedule)} channels={config.channels} "
            f"causal={str(config.causal).lower()}\n"
            f"r1={r1} r2={r2} past+future={r1 + r2}\n"
            f"params={count_params(config)}")


def cmd_inspect(args):
    if args.checkpoint:
        config, _ = checkpoint.load(args.checkpoint)
    else:
        config = _run_config(args).model_config()
    print(describe(config))


def cmd_gradcheck(args):
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    config = _run_config(args).model_config()
    seed = default_seed() if args.seed is None else args.seed
    if args.corrupt_backward:
        with corrupted_backward():
            result = gradcheck(config, args.trials, args.precision, args.length, seed)
    else:
        result = gradcheck(config, args.trials, args.precision, args.length, seed)
    print(result.summary())
    return 0 if result.passed else 2


def cmd_compare(args):
    rc = _run_config(args)
    config, cfg = rc.model_config(), rc.train_config()
    train_pairs, _ = _realize_all(read_manifest(args.train_manifest))
    test_pairs, _ = _realize_all(read_manifest(args.test_manifest))
    rows = compare_dilation_order(train_pairs, test_pairs, config, cfg)
    write_comparison(rows, args.out)
    for r in rows:
        print(f"{r.model}: ssnr_enhanced={r.ssnr_enhanced:.4f} gain={r.snr_gain_db:.4f}")
    print(f"se_fftnet >= se_invfftnet on SSNR: {str(fftnet_not_worse(rows)).lower()}")


def build_parser():
    parser = _Parser(prog="sefftnet", description=__doc__.splitlines()[0])
    parser.add_argument("--backend", choices=["cython", "numpy"],
                        help="kernel backend (default: compiled if available)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic speech/noise corpus and manifests")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--train", type=int, default=8)
    p.add_argument("--test", type=int, default=4)
    p.add_argument("--seconds", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mix", help="realise a manifest into noisy/clean WAV pairs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, help="added to every line's seed")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("train", help="train a model on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output directory for loss.csv and checkpoints")
    p.add_argument("--resume", help="continue from this .seff checkpoint (needs its .adam file)")
    p.add_argument("--seed", type=int)
    _add_config_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("enhance", help="enhance one WAV file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--rms", type=float,
                   help="normalise the input to this RMS first and undo it after "
                        "(the gain depends on the whole file, so output is no longer causal)")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("eval", help="score a checkpoint on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", help="CSV report path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect", help="print schedule, receptive field and parameter count")
    p.add_argument("--checkpoint")
    _add_config_args(p)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("gradcheck", help="finite-difference check of all gradients")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--precision", choices=["wide", "standard"], default="wide")
    p.add_argument("--length", type=int, default=16, help="input samples per trial")
    p.add_argument("--seed", type=int)
    p.add_argument("--corrupt-backward", action="store_true",
                   help="negative control: deliberately break the block backward")
    _add_config_args(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("compare", help="train SE-FFTNet and SE-InvFFTNet arms and compare")
    p.add_argument("--train-manifest", required=True)
    p.add_argument("--test-manifest", required=True)
    p.add_argument("--out", required=True, help="CSV report path")
    p.add_argument("--seed", type=int)
    _add_config_args(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.backend:
            backend.use(args.backend)
        return args.func(args) or 0
    except (ConfigurationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, NonFiniteError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ImportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: synth, train, eval, ablate, sweep, stream.

Exit status: 0 on success, 2 for usage errors, 3 for data errors (bad
files, mismatched models, failed training) and 4 when ``stream --strict``
sees a latency violation. Relative output paths that are not given
explicitly land in ``$SEMGKIT_OUTDIR`` (default: the current directory).
"""

from __future__ import annotations

import argparse
import os
import platform
import sys

import numpy as np

from . import __version__
from .classifiers import KINDS, evaluate, predict, train
from .core import GestureLabel, WindowSpec, segment
from .dataset import (DEFAULT_PROFILE, SessionProtocol, SynthConfig, default_profile,
                      profile_gap, read_recording, synth_recording, write_recording)
from .experiments import (channel_ablation, feature_channel_efficiency, half_overlap,
                          report_to_json, ssc_ablation, window_sweep)
from .features import ChannelMask, FeatureSpec, extract_matrix
from .modelfile import load_model, save_model
from .smoothing import VoteConfig
from .stream import StreamConfig, run_stream
from .svm import SVMConvergenceError

OUTDIR_ENV = "SEMGKIT_OUTDIR"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_LATENCY = 0, 2, 3, 4


class DataError(Exception):
    """Input that parses as flags but cannot be used."""


def _outdir() -> str:
    return os.environ.get(OUTDIR_ENV, ".")


def _output_path(given, default_name):
    path = given if given else os.path.join(_outdir(), default_name)
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise DataError(f"output directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise DataError(f"output directory is not writable: {parent}")
    return path


def _input_path(path):
    if not os.path.isfile(path):
        raise DataError(f"no such file: {path}")
    return path


# ----------------------------------------------------------- argument types

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _gesture_count(text):
    v = int(text)
    if not 1 <= v <= len(GestureLabel):
        raise argparse.ArgumentTypeError(f"gesture count must lie in 1..{len(GestureLabel)}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return v


def _sizes(text):
    """``'25:120'`` (inclusive), ``'25:120:5'`` or ``'25,51,100'``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            step = parts[2] if len(parts) == 3 else 1
            if step < 1 or parts[1] < parts[0]:
                raise ValueError
            return list(range(parts[0], parts[1] + 1, step))
        return [int(p) for p in text.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def _channel_list(text):
    try:
        return tuple(int(t) for t in text.split(",") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad channel list {text!r}") from None


# ------------------------------------------------------------ shared flags

def _add_synth_flags(p):
    g = p.add_argument_group("synthetic data")
    g.add_argument("--gestures", type=_gesture_count, default=len(GestureLabel),
                   help="number of gestures, taken in id order starting at rest (default 7)")
    g.add_argument("--reps", type=_positive_int, default=4)
    g.add_argument("--hold", type=float, default=5.0, help="seconds per gesture block")
    g.add_argument("--order", choices=("round-robin", "blocked"), default="round-robin")
    g.add_argument("--rate", type=_positive_int, default=200, help="sample rate in Hz")
    noise = g.add_mutually_exclusive_group()
    noise.add_argument("--noise-std", type=_nonneg_float, default=None,
                       help="white-noise standard deviation (default 0.05)")
    noise.add_argument("--noise-gap", type=_nonneg_float, default=None,
                       help="noise standard deviation as a fraction of the minimum profile gap")
    g.add_argument("--flat-channels", type=_channel_list, default=(),
                   help="channels given the same amplitude for every gesture, e.g. 2,5")
    g.add_argument("--burst-freq", type=_nonneg_float, default=0.0)


def _add_source(p, name, help_text):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument(f"--{name}", metavar="PATH", help=f"{help_text} recording file")
    g.add_argument(f"--{name}-seed", type=int, metavar="SEED",
                   help=f"synthesize the {help_text} recording from this seed")


def _add_pipeline_flags(p, final_defaults=True):
    g = p.add_argument_group("pipeline")
    g.add_argument("--win-size", type=_positive_int, default=None if not final_defaults else 51)
    g.add_argument("--win-inc", type=_positive_int, default=None if not final_defaults else 25)
    g.add_argument("--features", default=None if not final_defaults else "rms,mav,wl,zc,ar",
                   help="'all' or a comma list of rms,mav,wl,zc,ssc,ar")
    g.add_argument("--channels", default=None if not final_defaults else "-2,5",
                   help="'all', a list such as 1,3,4 or an exclusion such as -2,5")
    g.add_argument("--ar-order", type=_positive_int, default=None if not final_defaults else 2)
    g.add_argument("--alpha", type=_nonneg_float, default=None if not final_defaults else 0.0,
                   help="ZC/SSC threshold")


def _add_format_flags(p):
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write the report here instead of standard output")


def _protocol(args) -> SessionProtocol:
    return SessionProtocol(gestures=tuple(GestureLabel)[:args.gestures], reps=args.reps,
                           hold_s=args.hold, rate_hz=args.rate, order=args.order)


def _synth_config(args, seed) -> SynthConfig:
    profile = default_profile(args.flat_channels) if args.flat_channels else DEFAULT_PROFILE
    if args.noise_gap is not None:
        noise = args.noise_gap * profile_gap(profile)
    elif args.noise_std is not None:
        noise = args.noise_std
    else:
        noise = 0.05
    return SynthConfig(seed=seed, profile=profile, noise_std=noise,
                       burst_freq_hz=args.burst_freq)


def _load_source(args, name):
    path = getattr(args, name)
    if path is not None:
        return read_recording(_input_path(path))
    return synth_recording(_protocol(args), _synth_config(args, getattr(args, f"{name}_seed")))


def _fspec(args, base=None):
    if base is not None and args.features is None and args.ar_order is None and args.alpha is None:
        return base
    text = args.features if args.features is not None else ",".join(base.enabled)
    return FeatureSpec.parse(
        text,
        ar_order=args.ar_order if args.ar_order is not None else (base.ar_order if base else 2),
        threshold_alpha=args.alpha if args.alpha is not None else (
            base.threshold_alpha if base else 0.0))


def _wspec(args, base=None):
    size = args.win_size if args.win_size is not None else base.win_size
    inc = args.win_inc if args.win_inc is not None else base.win_inc
    return WindowSpec(size, inc)


def _header(args, **extra):
    """Effective configuration, written to standard error as ``#`` lines."""
    lines = [f"# semgkit {__version__} numpy {np.__version__} python {platform.python_version()}",
             f"# command {args.command}"]
    for key, value in sorted({**{k: v for k, v in vars(args).items()
                                 if k not in ("command", "func")}, **extra}.items()):
        lines.append(f"# {key} = {value}")
    print("\n".join(lines), file=sys.stderr)


def _emit(text, out):
    if out:
        with open(_output_path(out, out), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_synth(args):
    out = _output_path(args.out, f"synth-seed{args.seed}.csv")
    proto, cfg = _protocol(args), _synth_config(args, args.seed)
    _header(args, noise_std_effective=cfg.noise_std, n_samples=proto.n_samples)
    rec = synth_recording(proto, cfg)
    write_recording(rec, out)
    print(f"wrote {rec.n_samples} samples x {rec.n_channels} channels to {out}")
    return EXIT_OK


def cmd_train(args):
    out = _output_path(args.out, "model.json")
    rec = _load_source(args, "train")
    fspec = _fspec(args)
    mask = ChannelMask.parse(args.channels, rec.n_channels)
    wspec = _wspec(args)
    _header(args, n_columns=fspec.values_per_channel * len(mask.enabled))
    fm = extract_matrix(rec, segment(rec, wspec), fspec, mask)
    kw = {"k": args.k} if args.kind == "KNN" else {"c_reg": args.c} if args.kind == "SVM" else {}
    model = train(args.kind, fm, **kw)
    model.extra["sample_rate_hz"] = rec.sample_rate_hz
    model.extra["n_train_windows"] = len(fm)
    save_model(model, out)
    print(f"trained {model.kind} on {len(fm)} windows x {fm.shape[1]} columns; wrote {out}")
    return EXIT_OK


def cmd_eval(args):
    model = load_model(_input_path(args.model))
    rec = _load_source(args, "test")
    fspec = _fspec(args, model.feature_spec)
    mask = (ChannelMask.parse(args.channels, rec.n_channels) if args.channels is not None
            else model.channel_mask)
    wspec = _wspec(args, model.window_spec)
    for name, ours, theirs in (("feature spec", fspec, model.feature_spec),
                               ("channel mask", mask, model.channel_mask),
                               ("window spec", wspec, model.window_spec)):
        if ours != theirs:
            raise DataError(f"{name} {ours} does not match the model's {theirs}")
    _header(args)
    fm = extract_matrix(rec, segment(rec, wspec), fspec, mask)
    result = evaluate(predict(model, fm), fm.row_labels)
    _emit(result.render() + "\n", args.out)
    return EXIT_OK


def cmd_ablate(args):
    train_rec, test_rec = _load_source(args, "train"), _load_source(args, "test")
    wspec = WindowSpec(args.win_size, args.win_inc)
    fspec = FeatureSpec(ar_order=args.ar_order, threshold_alpha=args.alpha)
    _header(args)
    if args.what == "ssc":
        report = ssc_ablation(train_rec, test_rec, wspec, args.kinds, fspec, n_jobs=args.jobs)
    elif args.what == "channels":
        report = channel_ablation(train_rec, test_rec, wspec, args.kinds, args.drop, fspec,
                                  n_jobs=args.jobs)
    else:
        report = feature_channel_efficiency(train_rec, test_rec, wspec, args.kinds[0],
                                            args.ar_order, args.alpha, n_jobs=args.jobs)
    _emit(report.to_text() if args.format == "text" else report_to_json(report), args.out)
    return EXIT_OK


def cmd_sweep(args):
    train_rec, test_rec = _load_source(args, "train"), _load_source(args, "test")
    fspec = FeatureSpec.parse(args.features, ar_order=args.ar_order,
                              threshold_alpha=args.alpha)
    mask = ChannelMask.parse(args.channels, train_rec.n_channels)
    _header(args)
    inc = half_overlap if args.inc == "half" else int(args.inc)
    report = window_sweep(train_rec, test_rec, args.sizes, inc, args.kind, fspec, mask,
                          fixed_tau_ms=args.fixed_tau, n_jobs=args.jobs)
    _emit(report.to_text() if args.format == "text" else report_to_json(report), args.out)
    return EXIT_OK


def cmd_stream(args):
    model_path = _input_path(args.model)
    sink = _output_path(args.sink, "sink.bin") if args.sink else None
    trace_path = _output_path(args.trace, "trace.csv") if args.trace else None
    if args.input is not None:
        source = _input_path(args.input)
    else:
        source = (_protocol(args), _synth_config(args, args.seed))
    vote = VoteConfig(vote_window=args.vote)
    cfg = StreamConfig(source, model_path, vote, args.realtime, args.latency_limit,
                       args.per_decision, sink, trace_path, args.fixed_tau)
    _header(args)
    trace = run_stream(cfg)
    worst = max((d.decision_ms for d in trace.decisions), default=0.0)
    print(f"decisions {len(trace.decisions)}  frames {len(trace.frames) // 3}  "
          f"max tau {trace.max_tau_ms:.3f} ms  max D {worst:.3f} ms  "
          f"violations {len(trace.violations)}  backpressure {trace.backpressure_events}  "
          f"wall {trace.wall_time_s:.2f} s")
    if args.strict and (trace.violations or trace.backpressure_events):
        print(f"latency limit {args.latency_limit} ms exceeded", file=sys.stderr)
        return EXIT_LATENCY
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semgkit", description="sEMG hand-gesture recognition toolkit.",
        epilog=f"Default output directory: ${OUTDIR_ENV} or the current directory.")
    parser.add_argument("--version", action="version", version=f"semgkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="write a synthetic emgrec recording")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default $SEMGKIT_OUTDIR/synth-seed<SEED>.csv)")
    _add_synth_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a classifier and write a model file",
                       description="Defaults give the final model: channels other than 2 "
                                   "and 5, no SSC, SVM, window 51 / increment 25.")
    _add_source(p, "train", "training")
    p.add_argument("--kind", type=str.upper, choices=KINDS, default="SVM")
    p.add_argument("--k", type=_positive_int, default=3, help="KNN neighbours (odd)")
    p.add_argument("--c", type=float, default=1.0, help="SVM box constraint")
    p.add_argument("--out", help="model path (default $SEMGKIT_OUTDIR/model.json)")
    _add_pipeline_flags(p)
    _add_synth_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a model on a recording",
                       description="Pipeline flags default to the model's own; giving "
                                   "different ones is an error.")
    p.add_argument("--model", required=True)
    _add_source(p, "test", "test")
    p.add_argument("--out", help="write the report here instead of standard output")
    _add_pipeline_flags(p, final_defaults=False)
    _add_synth_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="SSC or channel ablation, or the efficiency matrix")
    p.add_argument("--what", choices=("ssc", "channels", "efficiency"), required=True)
    _add_source(p, "train", "training")
    _add_source(p, "test", "test")
    p.add_argument("--kinds", type=lambda s: tuple(k.upper() for k in s.split(",")),
                   default=("SVM", "LDA", "KNN"),
                   help="comma list; the efficiency matrix uses the first")
    p.add_argument("--drop", type=_channel_list, default=(2, 5))
    p.add_argument("--win-size", type=_positive_int, default=51)
    p.add_argument("--win-inc", type=_positive_int, default=25)
    p.add_argument("--ar-order", type=_positive_int, default=2)
    p.add_argument("--alpha", type=_nonneg_float, default=0.0)
    p.add_argument("--jobs", type=_positive_int, default=1)
    _add_format_flags(p)
    _add_synth_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep", help="accuracy and latency across window sizes")
    _add_source(p, "train", "training")
    _add_source(p, "test", "test")
    p.add_argument("--sizes", type=_sizes, default=_sizes("25:120"))
    p.add_argument("--inc", default="half", help="'half' (floor(win/2)) or a fixed increment")
    p.add_argument("--kind", type=str.upper, choices=KINDS, default="SVM")
    p.add_argument("--features", default="all")
    p.add_argument("--channels", default="all")
    p.add_argument("--ar-order", type=_positive_int, default=2)
    p.add_argument("--alpha", type=_nonneg_float, default=0.0)
    p.add_argument("--fixed-tau", type=_nonneg_float, default=None,
                   help="record this processing time (ms) instead of measuring it")
    p.add_argument("--jobs", type=_positive_int, default=1)
    _add_format_flags(p)
    _add_synth_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stream", help="replay a recording through the online pipeline")
    p.add_argument("--model", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="recording to replay")
    src.add_argument("--seed", type=int, help="synthesize the stream from this seed")
    p.add_argument("--realtime", type=_nonneg_float, default=0.0,
                   help="pacing factor: 1 = wall-clock rate, 0 = as fast as possible")
    p.add_argument("--latency-limit", type=float, default=300.0)
    p.add_argument("--strict", action="store_true", help="exit 4 on any latency violation")
    p.add_argument("--sink", help="serial-sink file for command frames")
    p.add_argument("--trace", help="per-decision trace file")
    p.add_argument("--fixed-tau", type=_nonneg_float, default=None,
                   help="record this processing time (ms) instead of measuring it")
    p.add_argument("--per-decision", action="store_true",
                   help="send a frame for every decision, not only on changes")
    p.add_argument("--vote", type=_positive_int, default=5, help="majority-vote window")
    _add_synth_flags(p)
    p.set_defaults(func=cmd_stream)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "kinds", None):
        bad = [k for k in args.kinds if k not in KINDS]
        if bad:
            parser.error(f"unknown classifier kinds {bad}")
    try:
        return args.func(args)
    except (DataError, ValueError, OSError, KeyError, SVMConvergenceError) as exc:
        print(f"semgkit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

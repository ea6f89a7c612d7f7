"""Command-line front end: run experiments, analyze step logs, exercise
checkpoints, and export raw synthetic signals.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 analysis error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .config import HtmConfig
from .errors import CheckpointError, ConfigError
from .pipeline import (
    STEP_LOG_HEADER,
    DetectorModel,
    detect_events,
    format_step_record,
    format_window_stats,
    read_step_log,
    window_stats,
    write_window_stats,
)
from .synth import SignalGenerator

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_ANALYSIS = 4


def _load_config(args) -> HtmConfig:
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        cfg = HtmConfig.from_json(text)
    else:
        cfg = HtmConfig.default()
    overrides = {}
    if getattr(args, "seed_sp", None) is not None:
        overrides["sp"] = dataclasses.replace(cfg.sp, seed=args.seed_sp)
    if getattr(args, "seed_tm", None) is not None:
        overrides["tp"] = dataclasses.replace(cfg.tp, seed=args.seed_tm)
    if getattr(args, "seed_synth", None) is not None:
        overrides["synth"] = dataclasses.replace(cfg.synth, rng_seed=args.seed_synth)
    run = cfg.run
    if getattr(args, "steps", None) is not None:
        run = dataclasses.replace(run, total_steps=args.steps)
    if getattr(args, "threshold", None) is not None:
        run = dataclasses.replace(run, threshold=args.threshold)
    if getattr(args, "lag", None) is not None:
        run = dataclasses.replace(run, lag=args.lag)
    if run is not cfg.run:
        overrides["run"] = run
    return cfg.replace(**overrides) if overrides else cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    model = DetectorModel(cfg)
    generator = SignalGenerator(cfg.synth)
    steps = cfg.run.total_steps
    started = time.time()

    records = []
    step_path = out / "steps.csv"
    with open(step_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(STEP_LOG_HEADER + "\n")
        for i in range(steps):
            value, jitter = generator.next_sample()
            record = model.step(value, jitter)
            records.append(record)
            fh.write(format_step_record(record) + "\n")
            if args.checkpoint_every and (i + 1) % args.checkpoint_every == 0:
                save_checkpoint(out / f"checkpoint_{i + 1:09d}.ckpt", model, generator)

    with open(out / "windows.csv", "w", encoding="utf-8", newline="") as fh:
        write_window_stats(fh, window_stats(records, cfg.run.window_len))

    manifest = {
        "tool": "htmseis",
        "version": __version__,
        "numpy": np.__version__,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "seeds": {
            "sp": cfg.sp.seed,
            "tp": cfg.tp.seed,
            "synth": cfg.synth.rng_seed,
        },
        "steps": steps,
        "wall_seconds": round(time.time() - started, 3),
        "outputs": ["steps.csv", "windows.csv"],
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"ran {steps} steps -> {out}")
    return EXIT_OK


def _learning_curve_summary(stats) -> dict:
    """First window at or below half the initial mean anomaly, and the first
    window after which every later window stays below 0.05."""
    summary = {"windows": len(stats), "half_drop_window": None,
               "adapted_window": None}
    if not stats:
        return summary
    first = stats[0].mean_anomaly
    for s in stats:
        if s.mean_anomaly <= 0.5 * first:
            summary["half_drop_window"] = s.window_index
            break
    adapted = None
    for s in reversed(stats):
        if s.mean_anomaly < 0.05:
            adapted = s.window_index
        else:
            break
    summary["adapted_window"] = adapted
    summary["initial_mean_anomaly"] = first
    summary["final_mean_anomaly"] = stats[-1].mean_anomaly
    return summary


def cmd_analyze(args) -> int:
    try:
        with open(args.steplog, "r", encoding="utf-8") as fh:
            records = read_step_log(fh)
    except OSError as exc:
        print(f"error: cannot read step log: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: malformed step log: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS

    out = _out_dir(args)
    threshold = args.threshold if args.threshold is not None else 0.5
    lag = args.lag if args.lag is not None else 5
    try:
        report = detect_events(records, threshold, lag)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    stats = window_stats(records, args.window_len)
    summary = _learning_curve_summary(stats)

    with open(out / "detection_report.json", "w", encoding="utf-8") as fh:
        json.dump({
            "threshold": threshold,
            "lag": lag,
            "n_events": report.n_events,
            "n_detected": report.n_detected,
            "n_missed": report.n_events - report.n_detected,
            "false_positives": len(report.false_positive_times),
            "noise_steps": report.noise_steps,
            "fp_per_10k": report.fp_per_10k,
            "events": [
                {"onset": e.onset, "end": e.end, "detected": e.detected,
                 "first_hit": e.first_hit}
                for e in report.events
            ],
        }, fh, indent=2)
        fh.write("\n")
    with open(out / "learning_curve.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")

    # Plot-ready columnar data: early window, latest window, prediction
    # overlay, and the windowed learning curve.
    wl = args.window_len

    def dump_window(path: Path, chunk) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("t,value,predicted,anomaly\n")
            for rec in chunk:
                predicted = "" if rec.predicted_value is None else f"{rec.predicted_value:.9g}"
                fh.write(f"{rec.t},{rec.value:.9g},{predicted},{rec.anomaly_score:.9g}\n")

    dump_window(out / "fig_early_window.csv", records[:wl])
    dump_window(out / "fig_adapted_window.csv", records[-wl:])
    dump_window(out / "fig_prediction.csv", records[-wl:])
    with open(out / "fig_learning_curve.csv", "w", encoding="utf-8", newline="") as fh:
        write_window_stats(fh, stats)

    print(f"events: {report.n_detected}/{report.n_events} detected, "
          f"{len(report.false_positive_times)} false positives "
          f"({report.fp_per_10k:.2f} per 10k noise steps)")
    if summary["half_drop_window"] is not None:
        print(f"anomaly halved by window {summary['half_drop_window']}")
    if summary["adapted_window"] is not None:
        print(f"adapted (mean anomaly < 0.05) from window {summary['adapted_window']}")
    return EXIT_OK


def cmd_checkpoint_test(args) -> int:
    try:
        model, generator = load_checkpoint(args.checkpoint)
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS

    resume_at = model.t
    steps = args.steps
    print(f"checkpoint at step {resume_at}; replaying reference run...")
    ref_model = DetectorModel(model.config)
    ref_gen = SignalGenerator(model.config.synth)
    ref_model.run(ref_gen, resume_at)
    ref_tail = ref_model.run(ref_gen, steps)
    resumed_tail = model.run(generator, steps)
    ref_lines = [format_step_record(r) for r in ref_tail]
    res_lines = [format_step_record(r) for r in resumed_tail]
    if ref_lines != res_lines:
        first = next(i for i, (a, b) in enumerate(zip(ref_lines, res_lines)) if a != b)
        print(f"error: resumed run diverges from uninterrupted run at step "
              f"{resume_at + first}", file=sys.stderr)
        return EXIT_ANALYSIS
    print(f"resumed run matches uninterrupted run bit-exactly over {steps} steps")
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    generator = SignalGenerator(cfg.synth)
    steps = args.steps if args.steps is not None else cfg.run.total_steps
    path = out / "signal.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        generator.write_csv(fh, steps)
    print(f"wrote {steps} samples -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="htmseis",
        description="Streaming HTM anomaly detection on synthetic seismic signals",
    )
    parser.add_argument("--version", action="version", version=f"htmseis {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the streaming model and write CSV logs")
    run.add_argument("--config", help="config JSON path (defaults to built-in)")
    run.add_argument("--steps", type=int, help="override run.total_steps")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed-sp", type=int, dest="seed_sp")
    run.add_argument("--seed-tm", type=int, dest="seed_tm")
    run.add_argument("--seed-synth", type=int, dest="seed_synth")
    run.add_argument("--threshold", type=float, help="override run.threshold")
    run.add_argument("--lag", type=int, help="override run.lag")
    run.add_argument("--checkpoint-every", type=int, dest="checkpoint_every",
                     help="write a checkpoint every N steps")
    run.set_defaults(func=cmd_run)

    analyze = sub.add_parser("analyze", help="grade a finished step log")
    analyze.add_argument("steplog", help="steps.csv produced by run")
    analyze.add_argument("--out", required=True, help="output directory")
    analyze.add_argument("--threshold", type=float)
    analyze.add_argument("--lag", type=int)
    analyze.add_argument("--window-len", type=int, default=1200, dest="window_len")
    analyze.set_defaults(func=cmd_analyze)

    ck = sub.add_parser("checkpoint-test",
                        help="verify a checkpoint resumes bit-exactly")
    ck.add_argument("checkpoint", help="checkpoint file from run --checkpoint-every")
    ck.add_argument("--steps", type=int, default=1000,
                    help="steps to advance on both sides (default 1000)")
    ck.set_defaults(func=cmd_checkpoint_test)

    gen = sub.add_parser("gen", help="export the raw synthetic signal as CSV")
    gen.add_argument("--config", help="config JSON path (defaults to built-in)")
    gen.add_argument("--steps", type=int, help="samples to emit")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--seed-synth", type=int, dest="seed_synth")
    gen.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points.

Subcommands: serve, simulate, analyze, record, stats. Exit codes: 0 on
success, 2 on usage errors (argparse), 1 on data/domain errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analytics import (DEFAULT_DEBOUNCE_MS, DEFAULT_SAMPLES_PER_REP,
                        DEFAULT_START_RADIUS)
from .config import default_config, load_config
from .errors import TunnelTrainerError
from .feedback import HandSample, record_demonstration
from .geometry import EXERCISE_IDS
from .pipeline import analyze_messages, paired_condition_means
from .protocol import parse_line
from .simulate import CONDITIONS, NoiseModel, SimConfig, run_condition
from .stats import sus_score, tam_report, wilcoxon_signed_rank
from .storage import (load_sus_csv, load_tam_csv, read_analytics_csv,
                      read_inbound_messages, save_trajectory, summary_row,
                      write_analytics_csv, write_messages_jsonl)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tunneltrainer",
        description="Tunnel-guided kinematic feedback engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the session server")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--static", help="directory of UI files to serve over HTTP")
    p.add_argument("--log", help="session log path (JSONL)")

    p = sub.add_parser("simulate", help="generate a synthetic session log")
    p.add_argument("--exercise", choices=EXERCISE_IDS, required=True)
    p.add_argument("--condition", choices=CONDITIONS, required=True,
                   help="'no' = open loop, c1/c2/c3 = feedback-guided")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output log (JSONL)")
    p.add_argument("--gain", type=float, default=2.0)
    p.add_argument("--cycle-time", type=float, default=None)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--rate", type=float, default=60.0)
    p.add_argument("--bias", default=None,
                   help="constant offset 'x,y,z' in meters (default: drawn from seed)")
    p.add_argument("--wander", type=float, default=None,
                   help="OU wander stationary SD in meters (default 0.006)")

    p = sub.add_parser("analyze", help="error summary of a session log")
    p.add_argument("log", help="session log (JSONL)")
    p.add_argument("--space", choices=("ee", "joint"), default="ee")
    p.add_argument("--out", help="write the summary JSON here (default stdout)")
    p.add_argument("--csv", help="append a row to this analytics CSV")
    p.add_argument("--subject", default="s1")
    p.add_argument("--condition", default="")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--radius", type=float, default=DEFAULT_START_RADIUS)
    p.add_argument("--debounce-ms", type=float, default=DEFAULT_DEBOUNCE_MS)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES_PER_REP)
    p.add_argument("--config", help="TOML config (arm geometry for joint space)")

    p = sub.add_parser("record", help="turn a recorded hand sweep into a trajectory")
    p.add_argument("--in", dest="infile", required=True,
                   help="hand_sample JSONL recorded from a demonstration")
    p.add_argument("--spacing", type=float, default=0.01)
    p.add_argument("--out", required=True, help="trajectory JSON output")
    p.add_argument("--window", type=int, default=5, help="smoothing window (samples)")
    p.add_argument("--author", default=None)
    p.add_argument("--id", dest="traj_id", default="demo")

    p = sub.add_parser("stats", help="study statistics")
    stats_sub = p.add_subparsers(dest="stats_command", required=True)

    q = stats_sub.add_parser("sus", help="SUS scores from an answer CSV")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--out", help="report JSON path (default stdout)")

    q = stats_sub.add_parser("tam", help="TAM report from an answer CSV")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--out", help="report JSON path (default stdout)")

    q = stats_sub.add_parser("compare", help="paired Wilcoxon between conditions")
    q.add_argument("--in", dest="infile", required=True, help="analytics CSV")
    q.add_argument("--condition-a", default="no")
    q.add_argument("--condition-b", default="c2")
    q.add_argument("--space", choices=("ee", "joint"), default="ee")
    q.add_argument("--out", help="report JSON path (default stdout)")
    return parser


def _emit(doc: dict, out_path: str | None):
    text = json.dumps(doc, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _cmd_serve(args) -> int:
    from .server import serve
    config = load_config(args.config) if args.config else default_config()
    print(f"serving on {args.host}:{args.port}", file=sys.stderr)
    serve(args.port, config, host=args.host, static_dir=args.static,
          log_path=args.log)
    return 0


def _cmd_simulate(args) -> int:
    if args.bias is not None:
        bias = tuple(float(v) for v in args.bias.split(","))
        if len(bias) != 3:
            raise TunnelTrainerError("--bias needs three comma-separated numbers")
        wander = args.wander if args.wander is not None else 0.006
        noise = NoiseModel(bias=bias, wander_sd=wander, seed=args.seed)
    else:
        from .simulate import subject_noise
        noise = subject_noise(args.seed)
        if args.wander is not None:
            noise = NoiseModel(bias=noise.bias, wander_sd=args.wander,
                               seed=args.seed)
    cfg = SimConfig(exercise=args.exercise, condition=args.condition,
                    noise=noise, cycle_time=args.cycle_time,
                    repetitions=args.repetitions, sample_rate=args.rate,
                    gain=args.gain)
    messages = run_condition(cfg)
    write_messages_jsonl(messages, args.out)
    print(f"wrote {len(messages)} messages to {args.out}", file=sys.stderr)
    return 0


def _cmd_analyze(args) -> int:
    geometry = None
    if args.config:
        geometry = load_config(args.config).arm
    messages = read_inbound_messages(args.log)
    summary = analyze_messages(messages, space=args.space, n_expected=args.reps,
                               geometry=geometry, radius=args.radius,
                               debounce_ms=args.debounce_ms,
                               n_samples=args.samples,
                               subject_id=args.subject,
                               condition=args.condition)
    _emit(summary.to_dict(), args.out)
    if args.csv:
        write_analytics_csv([summary_row(summary)], args.csv, append=True)
    return 0


def _cmd_record(args) -> int:
    samples = []
    for msg in read_inbound_messages(args.infile):
        if msg.get("type") != "hand_sample":
            continue
        parsed = parse_line(json.dumps(msg))
        samples.append(HandSample(float(parsed["t_ms"]), parsed["pos_m"]))
    traj = record_demonstration(samples, spacing=args.spacing,
                                smooth_window=args.window,
                                trajectory_id=args.traj_id, author=args.author)
    save_trajectory(traj, args.out)
    print(f"wrote trajectory '{traj.id}' ({len(traj.via_points)} via-points) "
          f"to {args.out}", file=sys.stderr)
    return 0


def _cmd_stats(args) -> int:
    if args.stats_command == "sus":
        subjects, answers = load_sus_csv(args.infile)
        scores = [sus_score(row) for row in answers]
        doc = {
            "scores": {s: sc for s, sc in zip(subjects, scores)},
            "mean": float(np.mean(scores)),
            "sd": float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0,
            "n": len(scores),
            "acceptability_threshold": 68.0,
        }
        _emit(doc, args.out)
        return 0
    if args.stats_command == "tam":
        categories = load_tam_csv(args.infile)
        _emit(tam_report(categories), args.out)
        return 0
    if args.stats_command == "compare":
        rows = read_analytics_csv(args.infile)
        subjects, a, b = paired_condition_means(rows, args.condition_a,
                                                args.condition_b, args.space)
        if len(subjects) == 0:
            raise TunnelTrainerError(
                f"no subjects present in both '{args.condition_a}' and "
                f"'{args.condition_b}' ({args.space} space)")
        res = wilcoxon_signed_rank(a, b)
        doc = {
            "condition_a": args.condition_a,
            "condition_b": args.condition_b,
            "space": args.space,
            "n_pairs": len(subjects),
            "mean_a": float(a.mean()),
            "mean_b": float(b.mean()),
            "statistic": res.statistic,
            "w_plus": res.w_plus,
            "w_minus": res.w_minus,
            "p_value": res.p_value,
            "method": res.method,
        }
        _emit(doc, args.out)
        return 0
    raise TunnelTrainerError(f"unknown stats subcommand {args.stats_command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "serve": _cmd_serve,
        "simulate": _cmd_simulate,
        "analyze": _cmd_analyze,
        "record": _cmd_record,
        "stats": _cmd_stats,
    }
    try:
        return handlers[args.command](args)
    except TunnelTrainerError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

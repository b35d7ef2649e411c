"""Command-line driver: ``egogate <command> [options]``.

Every command is deterministic for a given set of flags and ``--seed``.
Outputs are staged next to their destination and only moved into place once
the whole command has succeeded, so a failing run leaves nothing behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

from egogate import formats, plots
from egogate.audio import WindowSpec, write_wav
from egogate.errors import EgogateError
from egogate.gating import (
    FrameTimeline,
    aggregate_reports,
    apply_intervals,
    decimate,
    emit_blackout_expr,
    report,
)
from egogate.imbalance import STRATEGY_NAMES, strategy_from_name
from egogate.metrics import evaluate, threshold_sweep
from egogate.model import TrainConfig, load_model, predict_proba, save_model, train
from egogate.pipeline import classify_trace, load_clip, load_corpus
from egogate.power import components_from_config, duty_cycle_power
from egogate.synth import make_corpus, make_recording, random_segments
from egogate.trigger import run_fixed_trigger, run_hysteresis, total_active

log = logging.getLogger("egogate")

DEFAULT_SEED = 1337
DEFAULT_TAUS = tuple(round(0.1 * k, 1) for k in range(1, 10))


class UsageError(EgogateError):
    pass


class Outputs:
    """Stage output files and publish them together."""

    def __init__(self):
        self._pending: list[tuple[Path, Path]] = []

    def path(self, final) -> Path:
        final = Path(final)
        final.parent.mkdir(parents=True, exist_ok=True)
        tmp = final.with_name(f".{final.name}.partial")
        self._pending.append((tmp, final))
        return tmp

    def text(self, final, content: str) -> None:
        self.path(final).write_text(content)

    def commit(self) -> None:
        for tmp, final in self._pending:
            os.replace(tmp, final)
        self._pending.clear()

    def discard(self) -> None:
        for tmp, _ in self._pending:
            tmp.unlink(missing_ok=True)
        self._pending.clear()


def _window_spec(args) -> WindowSpec:
    return WindowSpec(args.window_dur, args.hop)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


# -- commands ----------------------------------------------------------------


def cmd_synth(args, out: Outputs):
    labels = make_corpus(args.out, n_clips=args.n_clips, positive_fraction=args.positive_fraction,
                         duration_sec=args.clip_dur, seed=args.seed)
    print(f"wrote {args.n_clips} clips and {labels}")
    if args.recording:
        clip, spans = make_recording(random_segments(args.recording, seed=args.seed), seed=args.seed)
        rec = Path(args.out) / "recording.wav"
        write_wav(rec, clip)
        (Path(args.out) / "recording_truth.json").write_text(
            formats.dumps_json([{"start_sec": a, "stop_sec": b} for a, b in spans]))
        print(f"wrote {rec} ({clip.duration_sec:.1f} s, {len(spans)} interaction spans)")


def cmd_train(args, out: Outputs):
    spec = _window_spec(args)
    X, y, _ = load_corpus(args.labels, args.audio_dir, spec)
    strategy = strategy_from_name(args.strategy, seed=args.seed)
    cfg = TrainConfig(epochs=args.epochs, seed=args.seed,
                      learning_rate=args.learning_rate, weight_decay=args.weight_decay)
    head, tlog = train(X, y, cfg, strategy)
    save_model(out.path(args.out), head)
    payload = {
        "strategy": args.strategy,
        "seed": args.seed,
        "window": {"w_d": spec.w_d, "w_h": spec.w_h},
        "examples": int(len(y)),
        **tlog.to_dict(),
    }
    log_path = args.log or f"{args.out}.log.json"
    out.text(log_path, formats.dumps_json(payload))
    if args.figure:
        plots.plot_training(tlog.epoch_losses, out.path(args.figure))
    print(f"trained on {len(y)} windows; post-resample counts {list(tlog.class_counts)}; "
          f"final loss {tlog.final_loss:.6f}")


def cmd_classify(args, out: Outputs):
    head = load_model(args.model)
    trace = classify_trace(head, load_clip(args.audio), _window_spec(args))
    out.text(args.out, formats.format_trace(trace))
    print(f"{len(trace)} windows")


def cmd_evaluate(args, out: Outputs):
    head = load_model(args.model)
    X, y, _ = load_corpus(args.labels, args.audio_dir, _window_spec(args))
    scores = predict_proba(head, X)
    m = evaluate(scores, y, args.tau)
    out.text(args.out, formats.dumps_json({"strategy": args.name, "tau": args.tau, **m.to_dict()}))
    if args.scores_out:
        out.text(args.scores_out, formats.format_scores(scores, y))
    print(f"weighted F1 {m.weighted.f1:.2f} (C0 {m.c0.f1:.2f}, C1 {m.c1.f1:.2f})")


def cmd_trigger(args, out: Outputs):
    if (args.trace is None) == (args.model is None):
        raise UsageError("give either --trace or --model with --audio")
    if args.model is not None:
        if args.audio is None:
            raise UsageError("--model needs --audio")
        trace = classify_trace(load_model(args.model), load_clip(args.audio), _window_spec(args))
        if args.trace_out:
            out.text(args.trace_out, formats.format_trace(trace))
    else:
        if args.audio is not None:
            raise UsageError("--audio cannot be combined with --trace")
        trace = formats.read_trace(args.trace, hop_sec=args.hop)
    if args.mode == "fixed":
        intervals = run_fixed_trigger(trace, args.tau, args.t_fixed)
    else:
        intervals = run_hysteresis(trace, args.tau_on, args.tau_off)
    out.text(args.out, formats.intervals_to_json(intervals))
    print(f"total active seconds: {total_active(intervals):.2f}")


def cmd_gate(args, out: Outputs):
    timeline = FrameTimeline(args.fps, args.duration)
    if (args.intervals is None) == (args.decimate is None):
        raise UsageError("give exactly one of --intervals and --decimate")
    if args.intervals is not None:
        intervals = formats.read_intervals(args.intervals)
        plan = apply_intervals(timeline, intervals)
    else:
        plan = decimate(timeline, args.decimate)
        intervals = [tuple(span) for span in plan.captured_intervals()]
    rep = report(plan, args.full_bitrate)
    out.text(args.out, formats.report_to_json(rep))
    if args.plan:
        out.text(args.plan, formats.plan_to_json(plan))
    if args.blackout:
        out.text(args.blackout, emit_blackout_expr(intervals, timeline.duration_sec) + "\n")
    if args.figure:
        trace = formats.read_trace(args.trace, hop_sec=args.hop) if args.trace else None
        plots.plot_gating(plan, out.path(args.figure), trace)
    print(f"frames reduced {rep.frames_reduced_pct:.2f}%, est. bitrate {rep.est_bitrate_mbps:.2f} Mbps")


def cmd_sweep(args, out: Outputs):
    scores, labels = formats.read_scores(args.scores)
    taus = args.taus or DEFAULT_TAUS
    rows = threshold_sweep(scores, labels, taus)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tau", "precision", "recall", "f1"])
    for tau, m in rows:
        writer.writerow([_fmt(tau), _fmt(m.precision), _fmt(m.recall), _fmt(m.f1)])
    out.text(args.out, buf.getvalue())
    if args.figure:
        plots.plot_sweep(rows, out.path(args.figure))
    print(f"{len(rows)} thresholds")


def cmd_power(args, out: Outputs):
    comps = components_from_config(formats.read_power_config(args.config))
    result = duty_cycle_power(comps)
    payload = {
        "components": {k: round(v, 6) for k, v in result["components"].items()},
        "total_w": round(result["total_w"], 6),
    }
    out.text(args.out, formats.dumps_json(payload))
    print(f"total {result['total_w']:.2f} W")


def cmd_report(args, out: Outputs):
    reports = [formats.read_report(p) for p in args.reports]
    names = [Path(p).stem for p in args.reports]
    agg = aggregate_reports(reports, args.full_bitrate)
    out.text(args.out, formats.dumps_json({
        "videos": {n: r.to_dict() for n, r in zip(names, reports)},
        "aggregate": agg.to_dict(),
    }))
    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["video", "frames_total", "frames_captured", "frames_reduced_pct",
                         "est_bitrate_mbps"])
        for n, r in [*zip(names, reports), ("aggregate", agg)]:
            writer.writerow([n, r.frames_total, r.frames_captured,
                             f"{r.frames_reduced_pct:.2f}", f"{r.est_bitrate_mbps:.2f}"])
        out.text(args.csv, buf.getvalue())
    if args.figure:
        plots.plot_reports(names, reports, out.path(args.figure))
    print(f"aggregate frames reduced {agg.frames_reduced_pct:.2f}% over {len(reports)} videos")


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--window-dur", type=float, default=4.0, help="window duration (s)")
    common.add_argument("--hop", type=float, default=2.0, help="window hop (s)")

    parser = argparse.ArgumentParser(prog="egogate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic labelled corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n-clips", type=int, default=40)
    p.add_argument("--positive-fraction", type=float, default=0.75)
    p.add_argument("--clip-dur", type=float, default=4.0)
    p.add_argument("--recording", type=float, default=0.0, metavar="SECONDS",
                   help="also write a long recording.wav with ground-truth spans")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[common], help="train the classifier head")
    p.add_argument("--labels", required=True)
    p.add_argument("--audio-dir", required=True)
    p.add_argument("--strategy", choices=sorted(STRATEGY_NAMES), default="class-weights")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--learning-rate", type=float, default=3e-3)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--log", help="training log JSON (default: <out>.log.json)")
    p.add_argument("--figure", help="loss-curve PNG")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", parents=[common], help="probability trace for one recording")
    p.add_argument("--model", required=True)
    p.add_argument("--audio", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", parents=[common], help="per-class metrics on a labelled corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--audio-dir", required=True)
    p.add_argument("--tau", type=float, default=0.4)
    p.add_argument("--name", default="model", help="strategy label stored in the report")
    p.add_argument("--out", required=True)
    p.add_argument("--scores-out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("trigger", parents=[common], help="activation intervals from a trace or audio")
    p.add_argument("--trace")
    p.add_argument("--model")
    p.add_argument("--audio")
    p.add_argument("--mode", choices=["fixed", "hysteresis"], default="fixed")
    p.add_argument("--tau", type=float, default=0.4)
    p.add_argument("--t-fixed", type=float, default=1.0)
    p.add_argument("--tau-on", type=float, default=0.8)
    p.add_argument("--tau-off", type=float, default=0.7)
    p.add_argument("--trace-out", help="also write the computed trace (model mode)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trigger)

    p = sub.add_parser("gate", parents=[common], help="frame gating report for one video")
    p.add_argument("--intervals")
    p.add_argument("--decimate", type=float, metavar="PERIOD_SEC")
    p.add_argument("--fps", type=float, required=True)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--full-bitrate", type=float, required=True, help="Mbps at full capture")
    p.add_argument("--out", required=True)
    p.add_argument("--plan")
    p.add_argument("--blackout", help="write the blackout time expression here")
    p.add_argument("--figure")
    p.add_argument("--trace", help="trace CSV drawn above the gating timeline")
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("sweep", parents=[common], help="C1 metrics over thresholds")
    p.add_argument("--scores", required=True, help="CSV with columns p_c1,label")
    p.add_argument("--taus", type=float, nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--figure")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("power", parents=[common], help="duty-cycle power estimate")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("report", parents=[common], help="aggregate gating reports")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--full-bitrate", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("EGOGATE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Outputs()
    try:
        args.func(args, out)
        out.commit()
    except UsageError as exc:
        out.discard()
        parser.print_usage(sys.stderr)
        print(f"egogate: error: {exc}", file=sys.stderr)
        return 2
    except (EgogateError, ValueError, OSError) as exc:
        out.discard()
        print(f"egogate: error: {exc}", file=sys.stderr)
        return 1
    except BaseException:
        out.discard()
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points: demo, sign, quiz, serve, score, export."""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .atlas import atlas_to_document
from .defaults import Rig, reference_atlas
from .executor import EmulatorBackend, ScheduleRunner, SerialBackend
from .motion import Timing, compile_letters, schedule_to_document
from .pwm import channel_map_to_document
from .sequencer import PlanRunner, shuffle_trials
from .study import (
    Cohort,
    StudyRecord,
    cohort_breakdown,
    format_report,
    load_records,
    reference_summary,
    report_to_csv,
    save_records,
    score,
)
from .topology import Handedness, topology_to_document


def _add_rig_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", metavar="FILE", help="topology JSON document")
    p.add_argument("--atlas", metavar="FILE", help="sign atlas JSON document")
    p.add_argument("--channels", metavar="FILE", help="channel map JSON document")


def _add_backend_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--emulator", action="store_true",
                       help="drive the built-in firmware emulator (default)")
    group.add_argument("--port", metavar="DEV",
                       help="drive real firmware over this serial device")
    p.add_argument("--paced", action="store_true",
                   help="run the emulator against the wall clock")
    p.add_argument("--tick-ms", type=int, default=20)


def _add_timing_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--speed", type=float, default=1.25, metavar="S",
                   help="speed scale >= 1 (1 = fastest feasible)")
    p.add_argument("--hold-ms", type=int, default=600)


def _rig(args) -> Rig:
    return Rig.from_files(args.topology, args.atlas, args.channels)


def _backend(args, rig: Rig):
    if args.port:
        return SerialBackend(args.port)
    return EmulatorBackend(rig.topology, rig.channel_map, paced=args.paced)


def _plan_runner(args, rig: Rig) -> PlanRunner:
    backend = _backend(args, rig)
    runner = ScheduleRunner(backend, rig.topology, rig.channel_map,
                            tick_ms=args.tick_ms)
    timing = Timing(args.hold_ms, args.speed)
    return PlanRunner(runner, rig.atlas, rig.servo_map, rig.topology, timing)


def _parse_hand(value: str) -> Handedness:
    try:
        return Handedness(value.lower())
    except ValueError:
        raise SystemExit(f"--hand must be right or left, got {value!r}")


def cmd_demo(args) -> int:
    rig = _rig(args)
    runner = _plan_runner(args, rig)
    report = runner.run_demo(
        on_sign=lambda e: print(f"{e.t_ms:9.0f} ms  {e.kind:5s}  "
                                f"{e.handedness.value:5s} {e.letter}"))
    print(f"demo {'completed' if report.completed else 'stopped'}: "
          f"{report.completed_signs} signs")
    return 0 if report.completed else 1


def _filtered_letters(text: str) -> List[str]:
    from .service import filter_letters

    letters, dropped = filter_letters(text)
    if dropped:
        print(f"warning: dropped non-letter characters: {dropped}", file=sys.stderr)
    if not letters:
        raise SystemExit("no fingerspelling letters in the input")
    return letters


def cmd_sign(args) -> int:
    rig = _rig(args)
    runner = _plan_runner(args, rig)
    hand = _parse_hand(args.hand)
    schedule = compile_letters(_filtered_letters(args.text), hand, rig.atlas,
                               rig.servo_map, rig.topology, runner.timing)
    outcome = runner.runner.run(schedule, hand,
                                on_sign=lambda e: print(f"{e.kind:5s} {e.letter}"))
    print(f"signed {outcome.completed_signs} letters in {outcome.elapsed_ms:.0f} ms")
    return 0


def cmd_quiz(args) -> int:
    rig = _rig(args)
    runner = _plan_runner(args, rig)
    order = shuffle_trials(args.seed)
    items = order.items[:args.trials] if args.trials else order.items
    answers: Optional[List[str]] = None
    if args.answers:
        with open(args.answers, "r", encoding="utf-8") as f:
            answers = [line.strip() for line in f if line.strip()]
    records: List[StudyRecord] = []
    cohort = Cohort(args.cohort)

    print(f"quiz seed={args.seed}: {len(items)} trials")
    for position, (letter, hand) in enumerate(items):
        schedule = compile_letters([letter], hand, rig.atlas, rig.servo_map,
                                   rig.topology, runner.timing)
        runner.runner.run(schedule, hand)
        if answers is not None:
            reply = answers[position] if position < len(answers) else ""
        else:
            reply = input(f"trial {position + 1}/{len(items)} - letter and hand "
                          "(e.g. 'A right'): ")
        parts = reply.split()
        guess_letter = parts[0].upper() if parts else "?"
        guess_hand = Handedness(parts[1].lower()) if len(parts) > 1 \
            else Handedness.RIGHT
        records.append(StudyRecord(args.participant, cohort, position,
                                   letter, hand, guess_letter, guess_hand))
    table = score(records)
    print(format_report(table, cohort_breakdown(records)))
    if args.log:
        save_records(records, args.log, append=True)
        print(f"responses appended to {args.log}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import HandService, ServiceSettings, create_app

    rig = _rig(args)
    if args.backend == "emulator":
        backend = EmulatorBackend(rig.topology, rig.channel_map,
                                  paced=not args.unpaced)
    elif args.backend.startswith("serial:"):
        backend = SerialBackend(args.backend.split(":", 1)[1])
    else:
        raise SystemExit(f"--backend must be emulator or serial:DEV, "
                         f"got {args.backend!r}")
    settings = ServiceSettings(tick_ms=args.tick_ms, stream_hz=args.stream_hz,
                               hold_ms=args.hold_ms, speed_scale=args.speed,
                               quiz_log=args.quiz_log)
    service = HandService(rig, backend, settings)
    service.start()
    app = create_app(service, static_dir=args.static)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        service.shutdown()
    return 0


def cmd_score(args) -> int:
    records = load_records(args.csv)
    table = score(records)
    cohorts = cohort_breakdown(records)
    if args.json:
        from .study import table_to_rows
        print(json.dumps({
            "total_shown": table.total_shown,
            "total_correct": table.total_correct,
            "accuracy": table.accuracy,
            "rows": table_to_rows(table),
            "cohorts": {c.value: {"shown": s.shown, "correct": s.correct,
                                  "accuracy": s.accuracy}
                        for c, s in cohorts.items()},
        }, indent=2))
    elif args.format == "csv":
        sys.stdout.write(report_to_csv(table))
    else:
        print(format_report(table, cohorts))
    return 0


def cmd_reference_study(args) -> int:
    summary = reference_summary()
    if args.json:
        print(json.dumps(summary, indent=2))
        return 0
    rec, quoted = summary["reconstructed"], summary["quoted"]
    print(f"reconstructed from per-letter table: {rec['correct']}/{rec['shown']} "
          f"= {rec['accuracy']:.2f}%")
    print(f"quoted overall:                      {quoted['correct']}/{quoted['shown']} "
          f"= {quoted['accuracy']:.2f}%")
    print(f"discrepancy: {summary['discrepancy_trials']} trials "
          "(both values reported; neither preferred)")
    second = summary["second_test_quoted"]
    print(f"second test (after video):           {second['correct']}/{second['shown']} "
          f"= {second['accuracy']:.2f}%")
    return 0


def cmd_compile(args) -> int:
    rig = _rig(args)
    schedule = compile_letters(_filtered_letters(args.text), _parse_hand(args.hand),
                               rig.atlas, rig.servo_map, rig.topology,
                               Timing(args.hold_ms, args.speed))
    doc = schedule_to_document(schedule)
    out = json.dumps(doc, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(out + "\n")
    else:
        print(out)
    return 0


def cmd_export(args) -> int:
    rig = _rig(args)
    if args.what == "topology":
        doc = topology_to_document(rig.topology)
    elif args.what == "channels":
        doc = channel_map_to_document(rig.channel_map)
    else:
        doc = atlas_to_document(rig.atlas)
    out = json.dumps(doc, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(out + "\n")
    else:
        print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aslhand",
        description="motion control for the 24-DOF fingerspelling hand")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", help="full two-handed alphabet demo")
    _add_rig_args(p), _add_backend_args(p), _add_timing_args(p)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("sign", help="fingerspell a word")
    p.add_argument("--text", required=True)
    p.add_argument("--hand", default="right")
    _add_rig_args(p), _add_backend_args(p), _add_timing_args(p)
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("quiz", help="randomized recognition quiz")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, help="limit the number of trials")
    p.add_argument("--participant", default="anonymous")
    p.add_argument("--cohort", default="novice",
                   choices=[c.value for c in Cohort])
    p.add_argument("--answers", metavar="FILE",
                   help="scripted answers, one 'LETTER hand' per line")
    p.add_argument("--log", metavar="FILE", help="append responses to this CSV")
    _add_rig_args(p), _add_backend_args(p), _add_timing_args(p)
    p.set_defaults(func=cmd_quiz)

    p = sub.add_parser("serve", help="HTTP control service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8470, help="HTTP port")
    p.add_argument("--backend", default="emulator", metavar="emulator|serial:DEV")
    p.add_argument("--unpaced", action="store_true",
                   help="run the emulator faster than real time (testing)")
    p.add_argument("--stream-hz", type=float, default=30.0)
    p.add_argument("--quiz-log", metavar="FILE")
    p.add_argument("--static", metavar="DIR",
                   help="serve this directory at /ui (operator console)")
    p.add_argument("--tick-ms", type=int, default=20)
    _add_rig_args(p), _add_timing_args(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("score", help="score a response-log CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("reference-study",
                       help="reconstructed vs quoted validation-study totals")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reference_study)

    p = sub.add_parser("compile", help="compile a word to a schedule JSON")
    p.add_argument("--text", required=True)
    p.add_argument("--hand", default="right")
    p.add_argument("-o", "--output", metavar="FILE")
    _add_rig_args(p), _add_timing_args(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("export", help="write the stock config documents")
    p.add_argument("what", choices=["topology", "channels", "atlas"])
    p.add_argument("-o", "--output", metavar="FILE")
    _add_rig_args(p)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

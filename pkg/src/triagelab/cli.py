"""Command-line entry point.

Subcommands cover the full workflow: generate scenario profiles, train the
assignment policy, evaluate policies, compare runs, emit plot data (CSV plus
a rendered PNG), and solve tiny instances exactly.

Exit codes: 0 success; 2 usage error; 3 missing file; 4 invalid profile or
schema violation; 5 size-cap violation; 1 internal error.  Errors print a
single line ``error[<code>]: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, metrics, plots, scenario
from .domain import InstanceTooLargeError, ProfileError, TriageError
from .environment import EpisodeLog
from .oracle import solve_exact
from .trainer import TrainConfig, evaluate, train
from .value_store import StoreError, ValueStore

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_INVALID_PROFILE = 4
EXIT_SIZE_CAP = 5

EPILOG = """\
exit codes:
  0  success
  2  usage error (unknown flag, bad value)
  3  missing input file
  4  invalid profile / schema violation
  5  size-cap violation (exact routines only)
  1  internal error

environment:
  TRIAGELAB_LOG   logging level (debug, info, warning; default warning)
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triagelab",
        description=__doc__.split("\n\n")[0],
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic scenario profile")
    p.add_argument(
        "--preset",
        required=True,
        choices=sorted(scenario.PRESETS) + ["custom"],
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dev-classes", type=int, help="custom preset: class count")
    p.add_argument("--bug-types", type=int, help="custom preset: type count")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("train", help="train the ADP assignment policy")
    p.add_argument("--profile", required=True)
    p.add_argument(
        "--stepsize", default="bakf", choices=["constant", "harmonic", "bakf"]
    )
    p.add_argument("--iterations", type=int, default=20_000)
    p.add_argument("--eval-every", type=int, default=100)
    p.add_argument("--eval-epochs", type=int, default=30)
    p.add_argument("--eval-replications", type=int, default=30)
    p.add_argument("--epsilon", type=float, default=0.75,
                   help="training rejection probability (exploration)")
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--init",
        default="postponement-penalty",
        choices=["postponement-penalty", "zeros", "big-m"],
    )
    p.add_argument("-o", "--output", required=True, help="run directory")

    p = sub.add_parser("evaluate", help="evaluate a frozen policy")
    p.add_argument("--profile", required=True)
    p.add_argument(
        "--policy",
        required=True,
        help="myopic | random | adp:<value_store.json>",
    )
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--replications", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("-o", "--output", required=True, help="output directory")

    p = sub.add_parser("compare", help="summarize runs into one table")
    p.add_argument("--profile", required=True)
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("-o", "--output", required=True, help="CSV path")

    p = sub.add_parser("emit-plots", help="emit plot CSV + rendered PNG")
    p.add_argument("--run", nargs="+", required=True, help="run directories")
    p.add_argument("--kind", required=True, choices=metrics.PLOT_KINDS)
    p.add_argument("-o", "--output", required=True, help="CSV path")

    p = sub.add_parser("oracle", help="solve a tiny profile exactly")
    p.add_argument("--profile", required=True)
    p.add_argument("-o", "--output", required=True, help="solution JSON path")
    return parser


def _load_profile(path):
    return scenario.load(path)


def cmd_generate(args) -> int:
    if args.preset == "custom":
        if not args.dev_classes or not args.bug_types:
            raise ProfileError(
                "preset", "custom preset needs --dev-classes and --bug-types"
            )
        spec = scenario.GeneratorSpec(
            n_dev_classes=args.dev_classes, n_bug_types=args.bug_types
        )
        profile = scenario.generate(spec, args.seed)
    else:
        profile = scenario.generate_preset(args.preset, args.seed)
    scenario.save(profile, args.output)
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_train(args) -> int:
    profile = _load_profile(args.profile)
    config = TrainConfig(
        iterations=args.iterations,
        eval_every=args.eval_every,
        eval_epochs=args.eval_epochs,
        eval_replications=args.eval_replications,
        stepsize=args.stepsize,
        epsilon=args.epsilon,
        gamma=args.gamma,
        init_mode=args.init,
        seed=args.seed,
    )
    report = train(profile, config)
    report.save(args.output)
    first = report.eval_series[0].mean
    last = report.eval_series[-1].mean
    print(
        f"trained {args.iterations} iterations ({args.stepsize}); "
        f"inner-simulation mean cost {first:.3f} -> {last:.3f}"
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    profile = _load_profile(args.profile)
    if args.policy.startswith("adp:"):
        store_path = args.policy.split(":", 1)[1]
        if not Path(store_path).exists():
            raise FileNotFoundError(store_path)
        store = ValueStore.load(store_path)
        if not store.matches_profile(profile):
            raise ProfileError("policy", "value store does not match the profile")
        policy = store
        label = "adp"
    elif args.policy in ("myopic", "random"):
        policy = args.policy
        label = args.policy
    else:
        raise ProfileError("policy", f"unknown policy {args.policy!r}")
    result = evaluate(
        profile,
        policy,
        epochs=args.epochs,
        replications=args.replications,
        seed=args.seed,
        epsilon=args.epsilon,
    )
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(
        json.dumps(
            {
                "policy": label,
                "policy_arg": args.policy,
                "epochs": args.epochs,
                "replications": args.replications,
                "seed": args.seed,
                "epsilon": args.epsilon,
            },
            indent=2,
        )
        + "\n"
    )
    with open(out / "samples.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replication", "discounted_cost"])
        for r, x in enumerate(result.samples):
            writer.writerow([r, f"{x:.6f}"])
    with open(out / "episodes.jsonl", "w") as fh:
        for log in result.logs:
            fh.write(log.to_jsonl())
    print(f"{label}: mean discounted cost {result.mean:.3f} "
          f"(stderr {result.stderr:.3f}, {args.replications} episodes)")
    return EXIT_OK


def _run_label(run_dir: Path) -> str:
    cfg_path = run_dir / "config.json"
    if cfg_path.exists():
        cfg = json.loads(cfg_path.read_text())
        if "policy" in cfg:
            return cfg["policy"]
        if "stepsize" in cfg:
            return f"adp-{cfg['stepsize']}"
    return run_dir.name


def _run_logs(run_dir: Path) -> list[EpisodeLog]:
    episodes = run_dir / "episodes.jsonl"
    if not episodes.exists():
        raise FileNotFoundError(episodes)
    logs = []
    buffer: list[str] = []
    for line in episodes.read_text().splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        buffer.append(line)
        if "terminal_cost" in doc and "epoch" not in doc:
            logs.append(EpisodeLog.from_jsonl("\n".join(buffer)))
            buffer = []
    return logs


def cmd_compare(args) -> int:
    profile = _load_profile(args.profile)
    rows = []
    for run in args.runs:
        run_dir = Path(run)
        logs = _run_logs(run_dir)
        rows.append(metrics.summary_row(_run_label(run_dir), logs, profile))
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    widths = {k: max(len(k), *(len(f"{r[k]:.3f}" if isinstance(r[k], float) else str(r[k])) for r in rows)) for k in rows[0]}
    header = "  ".join(k.ljust(widths[k]) for k in rows[0])
    print(header)
    for r in rows:
        print(
            "  ".join(
                (f"{v:.3f}" if isinstance(v, float) else str(v)).ljust(widths[k])
                for k, v in r.items()
            )
        )
    return EXIT_OK


def cmd_emit_plots(args) -> int:
    out = Path(args.output)
    png = out.with_suffix(".png")
    kind = args.kind
    if kind == "convergence":
        run_dir = Path(args.run[0])
        series = []
        with open(run_dir / "training_metrics.csv") as fh:
            for row in csv.DictReader(fh):
                if row["eval_mean"]:
                    series.append(
                        (
                            int(row["iteration"]),
                            float(row["eval_mean"]),
                            float(row["eval_stderr"]),
                        )
                    )
        metrics.emit_plot_data(kind, out, series=series)
        plots.plot_convergence(series, png)
    elif kind == "value-trace":
        run_dir = Path(args.run[0])
        traces: dict[str, list[float]] = {}
        with open(run_dir / "value_trace.csv") as fh:
            reader = csv.reader(fh)
            names = next(reader)[1:]
            traces = {n: [] for n in names}
            for row in reader:
                for n, x in zip(names, row[1:]):
                    traces[n].append(float(x))
        metrics.emit_plot_data(kind, out, traces=traces)
        plots.plot_value_trace(traces, png)
    else:
        samples_by_policy: dict[str, list[float]] = {}
        for run in args.run:
            run_dir = Path(run)
            logs = _run_logs(run_dir)
            if kind == "fixing-time-box":
                samples = [a.fix_cost for log in logs for a in log.accepted_assignments()]
            else:
                samples = [
                    float(a.due_at_assignment)
                    for log in logs
                    for a in log.accepted_assignments()
                ]
            samples_by_policy[_run_label(run_dir)] = samples
        metrics.emit_plot_data(kind, out, samples_by_policy=samples_by_policy)
        ylabel = "fixing time (epochs)" if kind == "fixing-time-box" else "due at assignment"
        plots.plot_box(samples_by_policy, png, ylabel=ylabel, title=ylabel)
    print(f"wrote {out} and {png}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    profile = _load_profile(args.profile)
    solution = solve_exact(profile)
    doc = {
        "expected_value": solution.expected_value,
        "n_states": solution.n_states,
        "profile": profile.name,
    }
    Path(args.output).write_text(json.dumps(doc, indent=2) + "\n")
    print(f"exact optimum {solution.expected_value:.6f} "
          f"({solution.n_states} states)")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "emit-plots": cmd_emit_plots,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("TRIAGELAB_LOG", "warning").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error[{EXIT_MISSING_FILE}]: missing file: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except InstanceTooLargeError as exc:
        print(f"error[{EXIT_SIZE_CAP}]: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP
    except (ProfileError, StoreError) as exc:
        print(f"error[{EXIT_INVALID_PROFILE}]: {exc}", file=sys.stderr)
        return EXIT_INVALID_PROFILE
    except TriageError as exc:
        print(f"error[{EXIT_INTERNAL}]: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: gen, dataset, train, predict, hints, solve, backbone, bench.
All randomness is controlled by --seed; reruns with identical flags and
seeds write byte-identical files (pass --no-timing where wall-clock fields
would otherwise appear). Exit codes: 0 ok; for `solve`, 10 means SAT and
20 means UNSAT.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys

from . import backbone as bb
from . import logistic, pipeline, polarity
from .cdcl import (BUDGET_EXHAUSTED, POLARITY_ALWAYS_FALSE, POLARITY_HINTS,
                   SAT, UNSAT, SolverConfig, solve)
from .cnf import Formula, generate_random_3cnf, parse_dimacs, write_dimacs

EXIT_SAT = 10
EXIT_UNSAT = 20


def _read_formula(path: str) -> Formula:
    with open(path) as fh:
        return parse_dimacs(fh.read())


def _solver_config(args, polarity_mode=POLARITY_ALWAYS_FALSE) -> SolverConfig:
    return SolverConfig(
        polarity_mode=polarity_mode,
        phase_saving=not getattr(args, "no_phase_saving", False),
        conflict_budget=getattr(args, "budget", None),
        seed=getattr(args, "seed", 0),
        engine=getattr(args, "engine", "auto"))


def _cmd_gen(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    num_clauses = args.clauses or int(args.ratio * args.vars + 0.5)
    for i in range(args.count):
        f = generate_random_3cnf(args.vars, num_clauses,
                                 pipeline.instance_seed(args.seed, i))
        path = os.path.join(args.out_dir, "instance_%05d.cnf" % i)
        with open(path, "w") as fh:
            fh.write(write_dimacs(f))
    print("wrote %d instances (%d vars, %d clauses) to %s"
          % (args.count, args.vars, num_clauses, args.out_dir))
    return 0


def _cmd_dataset(args) -> int:
    spec = pipeline.GenSpec(
        num_instances=args.instances, num_vars=args.vars,
        clause_var_ratio=args.ratio,
        fix_percents=tuple(float(x) for x in args.fix_percents.split(",")),
        seed=args.seed, label_conflict_budget=args.budget)
    data = pipeline.build_dataset(spec)
    pipeline.save_dataset(data, args.out)
    n_sat = int(data.labels.sum())
    print("wrote %d rows to %s (satisfiable %d, unsatisfiable %d)"
          % (len(data), args.out, n_sat, len(data) - n_sat))
    return 0


def _cmd_train(args) -> int:
    with open(args.data, "rb") as fh:
        fingerprint = hashlib.sha256(fh.read()).hexdigest()
    data = pipeline.load_dataset(args.data)
    train_set, test_set = pipeline.split_dataset(data)
    cfg = logistic.TrainConfig(learning_rate=args.lr, epochs=args.epochs,
                               l2_lambda=args.l2, convergence_tol=args.tol)
    history: list[float] = []
    model = logistic.train(train_set, cfg,
                           metadata={"dataset_sha256": fingerprint,
                                     "train_rows": str(len(train_set)),
                                     "test_rows": str(len(test_set))},
                           history=history)
    logistic.save_model(model, args.out)

    lines = ["train_rows %d" % len(train_set),
             "test_rows %d" % len(test_set),
             "train_accuracy %r" % logistic.accuracy(model, train_set),
             "test_accuracy %r" % logistic.accuracy(model, test_set)]
    for n in sorted({p.fix_percent for p in test_set.provenance}):
        mask = [p.fix_percent == n for p in test_set.provenance]
        sub = logistic.Dataset(test_set.features[mask],
                               test_set.labels[mask])
        lines.append("test_accuracy_fix_%g %r" % (n, logistic.accuracy(model, sub)))
    metrics = "\n".join(lines) + "\n"
    sys.stdout.write(metrics)
    if args.metrics_out:
        with open(args.metrics_out, "w") as fh:
            fh.write(metrics)
    if args.loss_curve:
        from .figures import render_loss_curve
        render_loss_curve(history, args.loss_curve)
    return 0


def _cmd_predict(args) -> int:
    model = logistic.load_model(args.model)
    f = _read_formula(args.cnf)
    from .features import extract_features
    print(repr(logistic.predict_proba(model, extract_features(f))))
    return 0


def _cmd_hints(args) -> int:
    model = logistic.load_model(args.model)
    f = _read_formula(args.cnf)
    cfg = polarity.McConfig(fix_percent=args.fix_percent, trials=args.trials,
                            root_seed=args.seed)
    hints = polarity.compute_hints(model, f, cfg)
    polarity.save_hints(hints, args.out)
    n_true = sum(1 for v in hints.choices.values() if v)
    print("wrote hints for %d variables to %s (%d true, %d false)"
          % (len(hints), args.out, n_true, len(hints) - n_true))
    return 0


def _cmd_solve(args) -> int:
    f = _read_formula(args.cnf)
    hints_map = None
    mode = POLARITY_ALWAYS_FALSE
    if args.hints:
        mode = POLARITY_HINTS
        hints_map = polarity.load_hints(args.hints).choices
    result = solve(f, _solver_config(args, mode), hints_map)

    lines = []
    if result.verdict == SAT:
        lines.append("s SATISFIABLE")
        lits = [v if result.model[v] else -v for v in range(1, f.num_vars + 1)]
        for i in range(0, len(lits), 12):
            chunk = lits[i:i + 12]
            tail = " 0" if i + 12 >= len(lits) else ""
            lines.append("v " + " ".join(map(str, chunk)) + tail)
        if not lits:
            lines.append("v 0")
    elif result.verdict == UNSAT:
        lines.append("s UNSATISFIABLE")
    else:
        lines.append("s UNKNOWN")
    lines.append("conflicts %d" % result.stats.conflicts)
    lines.append("decisions %d" % result.stats.decisions)
    lines.append("propagations %d" % result.stats.propagations)
    lines.append("restarts %d" % result.stats.restarts)
    if not args.no_timing:
        lines.append("wall_time_ms %r" % result.stats.wall_time_ms)
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    if result.verdict == SAT:
        return EXIT_SAT
    if result.verdict == UNSAT:
        return EXIT_UNSAT
    return 0


def _cmd_backbone(args) -> int:
    f = _read_formula(args.cnf)
    report = bb.compute_backbone(f, _solver_config(args),
                                 instance_id=os.path.basename(args.cnf))
    bb.save_report(report, args.out)
    print("backbone of %s: %d true, %d false, %d free"
          % (args.cnf, report.n_true, report.n_false, report.n_free))
    return 0


def _cmd_bench(args) -> int:
    names = sorted(n for n in os.listdir(args.cnf_dir) if n.endswith(".cnf"))
    if not names:
        raise SystemExit("no .cnf files in %s" % args.cnf_dir)
    instances = [(os.path.splitext(n)[0],
                  _read_formula(os.path.join(args.cnf_dir, n))) for n in names]
    model = logistic.load_model(args.model) if args.model else None
    mc = polarity.McConfig(fix_percent=args.fix_percent, trials=args.trials,
                           root_seed=args.seed)
    report = pipeline.run_benchmark(instances, model, mc, _solver_config(args),
                                    mode=args.mode,
                                    compute_backbones=args.backbone)
    timing = not args.no_timing
    with open(args.out_prefix + ".csv", "w") as fh:
        fh.write(pipeline.bench_to_csv(report, timing=timing))
    summary = pipeline.bench_summary(report, timing=timing)
    with open(args.out_prefix + "_summary.txt", "w") as fh:
        fh.write(summary)
    sys.stdout.write(summary)
    if not args.no_figures:
        from .figures import render_bench_figures
        render_bench_figures(report, args.out_prefix)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="satmc",
                                description="CDCL solving with learned "
                                            "Monte-Carlo polarity initialization")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a random 3-CNF corpus as DIMACS files")
    g.add_argument("--out-dir", required=True)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--vars", type=int, required=True)
    g.add_argument("--ratio", type=float, default=4.26,
                   help="clause/variable ratio (default 4.26)")
    g.add_argument("--clauses", type=int, default=None,
                   help="exact clause count (overrides --ratio)")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=_cmd_gen)

    d = sub.add_parser("dataset", help="build the labeled feature CSV")
    d.add_argument("--out", required=True)
    d.add_argument("--instances", type=int, default=2000)
    d.add_argument("--vars", type=int, default=150)
    d.add_argument("--ratio", type=float, default=4.26)
    d.add_argument("--fix-percents", default="0,2,4")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--budget", type=int, default=None,
                   help="conflict budget per labeling solve")
    d.set_defaults(func=_cmd_dataset)

    t = sub.add_parser("train", help="fit the logistic model from a dataset CSV")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--lr", type=float, default=0.1)
    t.add_argument("--epochs", type=int, default=2000)
    t.add_argument("--l2", type=float, default=1e-4)
    t.add_argument("--tol", type=float, default=1e-7)
    t.add_argument("--metrics-out", default=None)
    t.add_argument("--loss-curve", default=None,
                   help="write a training-loss PNG to this path")
    t.set_defaults(func=_cmd_train)

    pr = sub.add_parser("predict", help="print P(satisfiable) for a DIMACS file")
    pr.add_argument("--model", required=True)
    pr.add_argument("--cnf", required=True)
    pr.set_defaults(func=_cmd_predict)

    h = sub.add_parser("hints", help="write Monte-Carlo polarity hints")
    h.add_argument("--model", required=True)
    h.add_argument("--cnf", required=True)
    h.add_argument("--out", required=True)
    h.add_argument("--fix-percent", type=float, default=4.0)
    h.add_argument("--trials", type=int, default=100)
    h.add_argument("--seed", type=int, default=0)
    h.set_defaults(func=_cmd_hints)

    s = sub.add_parser("solve", help="run the CDCL solver on a DIMACS file")
    s.add_argument("cnf")
    s.add_argument("--hints", default=None,
                   help="hints file; switches polarity mode to hints")
    s.add_argument("--no-phase-saving", action="store_true")
    s.add_argument("--budget", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--engine", choices=("auto", "python", "compiled"),
                   default="auto")
    s.add_argument("--out", default=None, help="also write the output here")
    s.add_argument("--no-timing", action="store_true")
    s.set_defaults(func=_cmd_solve)

    b = sub.add_parser("backbone", help="compute the backbone of a satisfiable formula")
    b.add_argument("cnf")
    b.add_argument("--out", required=True)
    b.add_argument("--budget", type=int, default=None)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=_cmd_backbone)

    be = sub.add_parser("bench", help="paired default-vs-hints benchmark over a corpus")
    be.add_argument("--cnf-dir", required=True)
    be.add_argument("--model", default=None)
    be.add_argument("--out-prefix", required=True)
    be.add_argument("--mode", choices=(pipeline.MODE_HINTS, pipeline.MODE_SELF,
                                       pipeline.MODE_ORACLE),
                    default=pipeline.MODE_HINTS)
    be.add_argument("--fix-percent", type=float, default=4.0)
    be.add_argument("--trials", type=int, default=100)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--backbone", action="store_true",
                    help="also score hints against each instance's backbone")
    be.add_argument("--budget", type=int, default=None)
    be.add_argument("--no-timing", action="store_true")
    be.add_argument("--no-figures", action="store_true")
    be.set_defaults(func=_cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

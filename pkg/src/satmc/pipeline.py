"""Offline dataset construction and the paired-polarity benchmark.

Dataset rows come from random 3-CNF base instances plus variants with n%
of the variables fixed at random; each row carries the 10 features of the
(sub-)formula, a satisfiability label, and its provenance. The benchmark
solves each satisfiable instance twice with identical configuration and
seed - default always-false polarity versus hinted polarity - so conflict
deltas isolate the effect of the initial polarities alone.

All randomness flows through derive_seed paths, so corpora, datasets, and
reports are byte-reproducible from (spec, seed). Wall-clock timing fields
are the one nondeterministic output; they can be suppressed for
byte-identical reruns.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .backbone import compute_backbone, hint_accuracy
from .cdcl import (BUDGET_EXHAUSTED, POLARITY_ALWAYS_FALSE, POLARITY_HINTS,
                   SAT, UNSAT, SolverConfig, solve)
from .cnf import (Conflict, Formula, Residual, Satisfied, apply_assignment,
                  generate_random_3cnf)
from .features import FEATURE_NAMES, NUM_FEATURES, extract_features
from .logistic import Dataset, LogisticModel, RowProvenance
from .lp import INFEASIBLE, solve_lp_relaxation
from .polarity import McConfig, PolarityHints, compute_hints
from .rng import SplitMix64, derive_seed

logger = logging.getLogger(__name__)

# figures reported for the original Minisat-based experiment; recorded in
# benchmark summaries next to the measured values
REFERENCE_CONFLICT_DECREASE_PCT = 23.0
REFERENCE_WIN_RATE_PCT = 55.0

MODE_HINTS = "hints"
MODE_SELF = "self"
MODE_ORACLE = "oracle"


@dataclass
class GenSpec:
    num_instances: int = 2000
    num_vars: int = 150
    clause_var_ratio: float = 4.26
    fix_percents: tuple[float, ...] = (0.0, 2.0, 4.0)
    seed: int = 0
    label_conflict_budget: int | None = None

    def __post_init__(self):
        if self.num_vars < 3:
            raise ValueError("num_vars must be at least 3")
        if self.clause_var_ratio <= 0:
            raise ValueError("clause_var_ratio must be positive")
        for n in self.fix_percents:
            if not 0.0 <= n <= 100.0:
                raise ValueError("fix percent %r out of [0, 100]" % (n,))

    @property
    def num_clauses(self) -> int:
        return int(self.clause_var_ratio * self.num_vars + 0.5)


def instance_seed(root_seed: int, index: int) -> int:
    """Seed of the index-th generated instance (shared by gen and dataset)."""
    return derive_seed(root_seed, 0, index)


def _fix_seed(root_seed: int, index: int, percent_index: int) -> int:
    return derive_seed(root_seed, 1, index, percent_index)


def sample_fixing(f: Formula, num_to_fix: int, seed: int) -> dict[int, bool]:
    """Seeded choice of ``num_to_fix`` distinct variables of ``f``, each
    assigned a fair-coin value (selection first, then one coin per
    variable in selection order)."""
    rng = SplitMix64(seed)
    sample = rng.choose(list(range(1, f.num_vars + 1)), num_to_fix)
    return {v: rng.coin() for v in sample}


_SENTINEL_FEATURES = np.zeros(NUM_FEATURES)


def build_dataset(spec: GenSpec) -> Dataset:
    """Generate, fix, featurize, and label the training corpus.

    Per base instance and fix percentage: fixing that satisfies the
    formula labels 1, fixing that empties a clause labels 0 (both with the
    sentinel zero features of the empty residual), an LP-infeasible
    residual labels 0 without a solver call, and anything else is labeled
    by the CDCL solver. Rows whose labeling solve exhausts the conflict
    budget are dropped and counted in the log.
    """
    rows: list[np.ndarray] = []
    labels: list[float] = []
    provenance: list[RowProvenance] = []
    dropped = 0
    for i in range(spec.num_instances):
        seed_i = instance_seed(spec.seed, i)
        f = generate_random_3cnf(spec.num_vars, spec.num_clauses, seed_i)
        for j, n in enumerate(spec.fix_percents):
            k = int(spec.num_vars * n / 100.0)
            assignment = sample_fixing(f, k, _fix_seed(spec.seed, i, j))
            outcome = apply_assignment(f, assignment)
            if isinstance(outcome, Satisfied):
                feats, label = _SENTINEL_FEATURES, 1.0
            elif isinstance(outcome, Conflict):
                feats, label = _SENTINEL_FEATURES, 0.0
            else:
                residual = outcome.formula
                lp = solve_lp_relaxation(residual)
                feats = np.array(extract_features(residual, lp).as_tuple())
                if lp.status == INFEASIBLE:
                    label = 0.0
                else:
                    res = solve(residual, SolverConfig(
                        conflict_budget=spec.label_conflict_budget))
                    if res.verdict == BUDGET_EXHAUSTED:
                        dropped += 1
                        continue
                    label = 1.0 if res.verdict == SAT else 0.0
            rows.append(feats)
            labels.append(label)
            provenance.append(RowProvenance(i, n, seed_i))
    if dropped:
        logger.info("dropped %d rows whose labeling solve exhausted the budget",
                    dropped)
    return Dataset(np.array(rows), np.array(labels), provenance)


def split_dataset(d: Dataset) -> tuple[Dataset, Dataset]:
    """80/20 split by base instance (never by row, so a base formula and
    its fixed variants stay on one side): instances with index % 5 == 4
    form the test set."""
    if not d.provenance:
        raise ValueError("split requires row provenance")
    test_mask = np.array([p.instance % 5 == 4 for p in d.provenance])
    def take(mask):
        prov = [p for p, m in zip(d.provenance, mask) if m]
        return Dataset(d.features[mask], d.labels[mask], prov)
    return take(~test_mask), take(test_mask)


# ----------------------------------------------------------------------
# dataset CSV

def dataset_to_csv(d: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(FEATURE_NAMES) + ["label", "instance", "fix_percent", "seed"])
    for i in range(len(d)):
        p = d.provenance[i] if d.provenance else RowProvenance(-1, -1.0, -1)
        writer.writerow([repr(float(x)) for x in d.features[i]]
                        + [str(int(d.labels[i])), str(p.instance),
                           repr(float(p.fix_percent)), str(p.seed)])
    return buf.getvalue()


def dataset_from_csv(text: str) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    expected = list(FEATURE_NAMES) + ["label", "instance", "fix_percent", "seed"]
    if header != expected:
        raise ValueError("unexpected dataset CSV header")
    feats, labels, prov = [], [], []
    for row in reader:
        if not row:
            continue
        feats.append([float(x) for x in row[:NUM_FEATURES]])
        labels.append(float(row[NUM_FEATURES]))
        prov.append(RowProvenance(int(row[NUM_FEATURES + 1]),
                                  float(row[NUM_FEATURES + 2]),
                                  int(row[NUM_FEATURES + 3])))
    return Dataset(np.array(feats), np.array(labels), prov)


def save_dataset(d: Dataset, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dataset_to_csv(d))


def load_dataset(path: str) -> Dataset:
    with open(path) as fh:
        return dataset_from_csv(fh.read())


# ----------------------------------------------------------------------
# paired benchmark

@dataclass
class BenchRow:
    instance: str
    verdict: str
    conflicts_default: int
    conflicts_hints: int
    runtime_default_ms: float
    runtime_hints_ms: float
    preprocessing_ms: float
    backbone_matched: int | None = None
    backbone_size: int | None = None

    @property
    def backbone_accuracy(self) -> float | None:
        if self.backbone_size is None or self.backbone_size == 0:
            return None
        return self.backbone_matched / self.backbone_size


@dataclass
class BenchReport:
    mode: str
    rows: list[BenchRow] = field(default_factory=list)
    excluded_unsat: int = 0

    @property
    def compared(self) -> list[BenchRow]:
        """Rows entering the delta/win aggregates: paired runs where the
        default run had at least one conflict."""
        return [r for r in self.rows if r.conflicts_default > 0]

    @property
    def n_zero_conflict_default(self) -> int:
        return sum(1 for r in self.rows if r.conflicts_default == 0)

    @property
    def mean_conflict_decrease_pct(self) -> float | None:
        rows = self.compared
        if not rows:
            return None
        deltas = [(r.conflicts_default - r.conflicts_hints) / r.conflicts_default
                  for r in rows]
        return 100.0 * sum(deltas) / len(deltas)

    @property
    def win_rate_pct(self) -> float | None:
        rows = self.compared
        if not rows:
            return None
        wins = sum(1 for r in rows if r.conflicts_hints < r.conflicts_default)
        return 100.0 * wins / len(rows)

    @property
    def backbone_micro_accuracy(self) -> float | None:
        matched = sum(r.backbone_matched for r in self.rows
                      if r.backbone_size)
        size = sum(r.backbone_size for r in self.rows if r.backbone_size)
        if not size:
            return None
        return matched / size

    @property
    def backbone_macro_accuracy(self) -> float | None:
        accs = [r.backbone_accuracy for r in self.rows
                if r.backbone_accuracy is not None]
        if not accs:
            return None
        return sum(accs) / len(accs)


def _oracle_hints(f: Formula, model_assignment: dict[int, bool]) -> PolarityHints:
    hints = PolarityHints()
    for v in range(1, f.num_vars + 1):
        val = model_assignment[v]
        hints.choices[v] = val
        hints.mean_true[v] = 1.0 if val else 0.0
        hints.mean_false[v] = 0.0 if val else 1.0
    return hints


def _all_false_hints(f: Formula) -> PolarityHints:
    hints = PolarityHints()
    for v in range(1, f.num_vars + 1):
        hints.choices[v] = False
        hints.mean_true[v] = 0.0
        hints.mean_false[v] = 1.0
    return hints


def run_benchmark(instances: list[tuple[str, Formula]], model: LogisticModel | None,
                  mc: McConfig, solver_cfg: SolverConfig,
                  mode: str = MODE_HINTS,
                  compute_backbones: bool = False) -> BenchReport:
    """Paired solve of each instance: always-false versus hinted polarity.

    Unsatisfiable instances are detected by an untimed filtering solve,
    excluded, and counted. Modes: 'hints' scores Monte-Carlo hints from
    the logistic model (preprocessing time is measured separately, as the
    original experiment's runtime claim excludes it), 'oracle' uses the
    filtering solve's model as hints (zero-conflict sanity mode), 'self'
    re-runs the default configuration (exact-zero-delta sanity mode).
    Both timed runs share one seed and differ only in polarity source.
    """
    if mode not in (MODE_HINTS, MODE_SELF, MODE_ORACLE):
        raise ValueError("unknown benchmark mode %r" % mode)
    if mode == MODE_HINTS and model is None:
        raise ValueError("hints mode needs a trained model")

    base_cfg = replace(solver_cfg, polarity_mode=POLARITY_ALWAYS_FALSE)
    hint_cfg = replace(solver_cfg, polarity_mode=POLARITY_HINTS)

    report = BenchReport(mode=mode)
    for name, f in instances:
        filter_run = solve(f, base_cfg)
        if filter_run.verdict != SAT:
            report.excluded_unsat += 1
            logger.info("excluding %s: filtering solve returned %s", name,
                        filter_run.verdict)
            continue

        t0 = time.perf_counter()
        if mode == MODE_HINTS:
            hints = compute_hints(model, f, mc)
        elif mode == MODE_ORACLE:
            hints = _oracle_hints(f, filter_run.model)
        else:
            hints = _all_false_hints(f)
        preprocessing_ms = (time.perf_counter() - t0) * 1000.0

        run_default = solve(f, base_cfg)
        if mode == MODE_SELF:
            run_hinted = solve(f, base_cfg)
        else:
            run_hinted = solve(f, hint_cfg, hints.choices)

        row = BenchRow(
            instance=name, verdict=run_default.verdict,
            conflicts_default=run_default.stats.conflicts,
            conflicts_hints=run_hinted.stats.conflicts,
            runtime_default_ms=run_default.stats.wall_time_ms,
            runtime_hints_ms=run_hinted.stats.wall_time_ms,
            preprocessing_ms=preprocessing_ms)
        if compute_backbones:
            bb = compute_backbone(f, base_cfg, instance_id=name)
            score = hint_accuracy(hints, bb)
            row.backbone_matched = score.matched
            row.backbone_size = score.backbone_size
        report.rows.append(row)
    return report


_BENCH_COLUMNS = ["instance", "verdict", "conflicts_default", "conflicts_hints",
                  "runtime_default_ms", "runtime_hints_ms", "preprocessing_ms",
                  "backbone_matched", "backbone_size", "backbone_accuracy"]


def bench_to_csv(report: BenchReport, timing: bool = True) -> str:
    """Per-instance rows; timing columns are blanked when ``timing`` is
    off so reruns compare byte-identically."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_BENCH_COLUMNS)
    for r in report.rows:
        acc = r.backbone_accuracy
        writer.writerow([
            r.instance, r.verdict, str(r.conflicts_default), str(r.conflicts_hints),
            repr(r.runtime_default_ms) if timing else "",
            repr(r.runtime_hints_ms) if timing else "",
            repr(r.preprocessing_ms) if timing else "",
            "" if r.backbone_matched is None else str(r.backbone_matched),
            "" if r.backbone_size is None else str(r.backbone_size),
            "" if acc is None else repr(acc),
        ])
    return buf.getvalue()


def bench_rows_from_csv(text: str) -> BenchReport:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != _BENCH_COLUMNS:
        raise ValueError("unexpected benchmark CSV header")
    report = BenchReport(mode="")
    for row in reader:
        if not row:
            continue
        report.rows.append(BenchRow(
            instance=row[0], verdict=row[1],
            conflicts_default=int(row[2]), conflicts_hints=int(row[3]),
            runtime_default_ms=float(row[4]) if row[4] else 0.0,
            runtime_hints_ms=float(row[5]) if row[5] else 0.0,
            preprocessing_ms=float(row[6]) if row[6] else 0.0,
            backbone_matched=int(row[7]) if row[7] else None,
            backbone_size=int(row[8]) if row[8] else None))
    return report


def bench_summary(report: BenchReport, timing: bool = True) -> str:
    """Key-value summary: measured aggregates next to the reference
    figures the benchmark attempts to reproduce."""
    def fmt(x):
        return "n/a" if x is None else repr(x)

    lines = [
        "mode %s" % report.mode,
        "instances %d" % len(report.rows),
        "excluded_unsat %d" % report.excluded_unsat,
        "compared %d" % len(report.compared),
        "zero_conflict_default %d" % report.n_zero_conflict_default,
        "mean_conflict_decrease_pct %s" % fmt(report.mean_conflict_decrease_pct),
        "win_rate_pct %s" % fmt(report.win_rate_pct),
        "reference_mean_conflict_decrease_pct %r" % REFERENCE_CONFLICT_DECREASE_PCT,
        "reference_win_rate_pct %r" % REFERENCE_WIN_RATE_PCT,
    ]
    if any(r.backbone_size is not None for r in report.rows):
        lines.append("backbone_micro_accuracy %s" % fmt(report.backbone_micro_accuracy))
        lines.append("backbone_macro_accuracy %s" % fmt(report.backbone_macro_accuracy))
    if timing:
        lines.append("total_preprocessing_ms %r" %
                     sum(r.preprocessing_ms for r in report.rows))
        lines.append("total_runtime_default_ms %r" %
                     sum(r.runtime_default_ms for r in report.rows))
        lines.append("total_runtime_hints_ms %r" %
                     sum(r.runtime_hints_ms for r in report.rows))
    return "\n".join(lines) + "\n"

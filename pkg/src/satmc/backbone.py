"""Backbone computation and scoring of polarity hints against it.

A variable is backbone-true if it is true in every satisfying assignment
(dually backbone-false); everything else is free. Computation is the
straightforward per-variable test: given a model sigma from an initial
solve, re-solve with a unit clause asserting the opposite of sigma(v).
UNSAT pins v to sigma(v); SAT yields a second model, and every variable
where the two models disagree is immediately free (model filtering), which
prunes most of the 2|V| solver calls without changing the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cnf import Formula
from .cdcl import BUDGET_EXHAUSTED, SAT, UNSAT, SolverConfig, solve
from .polarity import PolarityHints

BACKBONE_TRUE = "T"
BACKBONE_FALSE = "F"
FREE = "-"


@dataclass
class BackboneReport:
    statuses: dict[int, str] = field(default_factory=dict)
    instance_id: str = ""

    @property
    def n_true(self) -> int:
        return sum(1 for s in self.statuses.values() if s == BACKBONE_TRUE)

    @property
    def n_false(self) -> int:
        return sum(1 for s in self.statuses.values() if s == BACKBONE_FALSE)

    @property
    def n_free(self) -> int:
        return sum(1 for s in self.statuses.values() if s == FREE)

    @property
    def backbone_size(self) -> int:
        return self.n_true + self.n_false

    def value(self, v: int) -> bool | None:
        s = self.statuses[v]
        if s == FREE:
            return None
        return s == BACKBONE_TRUE


@dataclass(frozen=True)
class HintScore:
    matched: int
    backbone_size: int

    @property
    def accuracy(self) -> float | None:
        if self.backbone_size == 0:
            return None
        return self.matched / self.backbone_size


def compute_backbone(f: Formula, cfg: SolverConfig | None = None,
                     model_filtering: bool = True,
                     instance_id: str = "") -> BackboneReport:
    """Exact backbone of a satisfiable formula.

    Raises ValueError if ``f`` is unsatisfiable and RuntimeError if any
    solver call exhausts its conflict budget (the backbone would then be
    unknown). ``model_filtering`` is a pure optimization; reports are
    identical with it off.
    """
    cfg = cfg or SolverConfig()
    first = solve(f, cfg)
    if first.verdict == BUDGET_EXHAUSTED:
        raise RuntimeError("initial solve exhausted its conflict budget")
    if first.verdict == UNSAT:
        raise ValueError("backbone is undefined for an unsatisfiable formula")
    sigma = first.model

    report = BackboneReport(instance_id=instance_id)
    free: set[int] = set()
    for v in range(1, f.num_vars + 1):
        if v in free:
            report.statuses[v] = FREE
            continue
        opposite = -v if sigma[v] else v
        probe = solve(f.extend([(opposite,)]), cfg)
        if probe.verdict == BUDGET_EXHAUSTED:
            raise RuntimeError("backbone probe for variable %d exhausted budget" % v)
        if probe.verdict == UNSAT:
            report.statuses[v] = BACKBONE_TRUE if sigma[v] else BACKBONE_FALSE
        else:
            report.statuses[v] = FREE
            if model_filtering:
                for u in range(1, f.num_vars + 1):
                    if probe.model[u] != sigma[u]:
                        free.add(u)
    return report


def hint_accuracy(hints: PolarityHints, report: BackboneReport) -> HintScore:
    """How many backbone variables the hints set to their forced value.

    Accuracy is undefined (None) when the backbone is empty.
    """
    if set(hints.choices) != set(report.statuses):
        raise ValueError("hints and report cover different variable sets")
    matched = 0
    size = 0
    for v, status in report.statuses.items():
        if status == FREE:
            continue
        size += 1
        if hints.choices[v] == (status == BACKBONE_TRUE):
            matched += 1
    return HintScore(matched, size)


# ----------------------------------------------------------------------
# report file: "<var> <T|F|->" lines, then a summary count line

def report_to_text(report: BackboneReport) -> str:
    lines = []
    for v in sorted(report.statuses):
        lines.append("%d %s" % (v, report.statuses[v]))
    lines.append("s true %d false %d free %d" % (report.n_true, report.n_false,
                                                 report.n_free))
    return "\n".join(lines) + "\n"


def report_from_text(text: str) -> BackboneReport:
    report = BackboneReport()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("s "):
            continue
        parts = line.split()
        if len(parts) != 2 or parts[1] not in (BACKBONE_TRUE, BACKBONE_FALSE, FREE):
            raise ValueError("bad backbone report line: %s" % line)
        report.statuses[int(parts[0])] = parts[1]
    return report


def save_report(report: BackboneReport, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(report_to_text(report))


def load_report(path: str) -> BackboneReport:
    with open(path) as fh:
        return report_from_text(fh.read())

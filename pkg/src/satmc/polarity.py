"""Monte-Carlo choice of each variable's initial branching polarity.

For a variable v, assert v (then separately its negation), simplify, and
run a batch of trials against the simplified formula: each trial fixes a
seeded random sample of the occurring variables to random values and asks
the logistic model how likely the resulting sub-formula is to be
satisfiable (1.0 outright if the fixing satisfied it, 0.0 if it emptied a
clause or the LP relaxation is infeasible). The polarity whose trials
average higher wins, ties going to false to match the solver's default.

Trial seeds derive from (root seed, variable, asserted sign, trial index),
so scores are independent of evaluation order and reproduce exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cnf import Conflict, Formula, Residual, Satisfied, apply_assignment
from .features import extract_features
from .logistic import LogisticModel, predict_proba
from .lp import INFEASIBLE, solve_lp_relaxation
from .rng import SplitMix64, derive_seed


@dataclass
class McConfig:
    fix_percent: float = 4.0
    trials: int = 100
    root_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.fix_percent <= 100.0:
            raise ValueError("fix_percent must be in [0, 100]")
        if self.trials < 1:
            raise ValueError("need at least one trial")


@dataclass
class PolarityHints:
    """Per-variable polarity choice plus the two mean trial scores.

    ``choices[v]`` is True iff the mean score with v asserted true
    strictly beat the mean with v asserted false.
    """

    choices: dict[int, bool] = field(default_factory=dict)
    mean_true: dict[int, float] = field(default_factory=dict)
    mean_false: dict[int, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.choices)


def trial_score(model: LogisticModel, f: Formula, fix_percent: float,
                trial_seed: int) -> float:
    """One Monte-Carlo trial: fix floor(fix_percent% of occurring
    variables), each to a fair-coin value, and score the outcome.

    The sample is a partial Fisher-Yates draw over the ascending occurring
    variables, followed by one sign coin per drawn variable, all from a
    SplitMix64 stream seeded with ``trial_seed``.
    """
    if f.num_clauses == 0:
        raise ValueError("trial_score needs a nonempty formula")
    occurring = f.occurring_variables()
    k = int(len(occurring) * fix_percent / 100.0)
    rng = SplitMix64(trial_seed)
    sample = rng.choose(occurring, k)
    assignment = {v: rng.coin() for v in sample}
    outcome = apply_assignment(f, assignment)
    if isinstance(outcome, Satisfied):
        return 1.0
    if isinstance(outcome, Conflict):
        return 0.0
    residual = outcome.formula
    lp = solve_lp_relaxation(residual)
    if lp.status == INFEASIBLE:
        return 0.0
    return predict_proba(model, extract_features(residual, lp))


def score_literal(model: LogisticModel, f: Formula, lit: int,
                  cfg: McConfig) -> float:
    """Mean trial score after asserting ``lit`` in ``f``.

    Asserting may already satisfy (score 1.0) or conflict (0.0); otherwise
    the mean of ``cfg.trials`` trial scores on the simplified formula is
    returned, each trial seeded by (root seed, variable, sign, index). The
    sign component is 1 for a positive literal. With a zero fixing budget
    all trials coincide, so a single trial supplies the mean.
    """
    v = abs(lit)
    occurring = f.occurring_variables()
    if v not in occurring:
        raise ValueError("literal variable %d does not occur in the formula" % v)
    outcome = apply_assignment(f, {v: lit > 0})
    if isinstance(outcome, Satisfied):
        return 1.0
    if isinstance(outcome, Conflict):
        return 0.0
    residual = outcome.formula
    sign_bit = 1 if lit > 0 else 0
    n_occ = len(residual.occurring_variables())
    if int(n_occ * cfg.fix_percent / 100.0) == 0:
        return trial_score(model, residual, cfg.fix_percent,
                           derive_seed(cfg.root_seed, v, sign_bit, 0))
    total = 0.0
    for t in range(cfg.trials):
        total += trial_score(model, residual, cfg.fix_percent,
                             derive_seed(cfg.root_seed, v, sign_bit, t))
    return total / cfg.trials


def compute_hints(model: LogisticModel, f: Formula, cfg: McConfig) -> PolarityHints:
    """Choose an initial polarity for every variable of ``f``.

    Variables that occur in no clause get false with neutral scores
    (0.5, 0.5). The result is a pure function of (model, f, cfg).
    """
    hints = PolarityHints()
    occurring = set(f.occurring_variables())
    for v in range(1, f.num_vars + 1):
        if v in occurring:
            s_true = score_literal(model, f, v, cfg)
            s_false = score_literal(model, f, -v, cfg)
        else:
            s_true = s_false = 0.5
        hints.choices[v] = s_true > s_false
        hints.mean_true[v] = s_true
        hints.mean_false[v] = s_false
    return hints


# ----------------------------------------------------------------------
# hints file: one line per variable, "<var> <0|1> <mean_false> <mean_true>"

def hints_to_text(hints: PolarityHints) -> str:
    lines = []
    for v in sorted(hints.choices):
        lines.append("%d %d %r %r" % (v, 1 if hints.choices[v] else 0,
                                      hints.mean_false[v], hints.mean_true[v]))
    return "\n".join(lines) + "\n"


def hints_from_text(text: str) -> PolarityHints:
    hints = PolarityHints()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError("bad hints line: %s" % line)
        v = int(parts[0])
        if v < 1 or int(parts[1]) not in (0, 1):
            raise ValueError("bad hints line: %s" % line)
        hints.choices[v] = parts[1] == "1"
        hints.mean_false[v] = float(parts[2])
        hints.mean_true[v] = float(parts[3])
    return hints


def save_hints(hints: PolarityHints, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(hints_to_text(hints))


def load_hints(path: str) -> PolarityHints:
    with open(path) as fh:
        return hints_from_text(fh.read())

"""The 10 instance features used by the satisfiability predictor.

In order: clause/variable ratio, fraction of binary clauses, fraction of
Horn clauses, five statistics (max, min, mean, population std, coefficient
of variation) of the per-variable polarity balance, and the mean and
coefficient of variation of the per-variable LP relaxation slack
min(x_i, 1 - x_i) at the coverage-LP optimum.

All statistics run over the variables that actually occur in the formula,
so features are invariant under variable renaming and clause reordering,
and residual formulas that dropped variables are handled uniformly. A
formula with no clauses gets the all-zero sentinel vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cnf import Formula
from .lp import INFEASIBLE, LpSolution, solve_lp_relaxation

FEATURE_NAMES = (
    "clause_var_ratio",
    "frac_binary",
    "frac_horn",
    "posneg_var_max",
    "posneg_var_min",
    "posneg_var_mean",
    "posneg_var_std",
    "posneg_var_variation",
    "lpslack_mean",
    "lpslack_coeff_variation",
)

NUM_FEATURES = len(FEATURE_NAMES)


@dataclass(frozen=True)
class FeatureVector:
    clause_var_ratio: float
    frac_binary: float
    frac_horn: float
    posneg_var_max: float
    posneg_var_min: float
    posneg_var_mean: float
    posneg_var_std: float
    posneg_var_variation: float
    lpslack_mean: float
    lpslack_coeff_variation: float

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in FEATURE_NAMES)


_ZERO = FeatureVector(*([0.0] * NUM_FEATURES))


def _spread_stats(values: list[float]) -> tuple[float, float, float, float, float]:
    """max, min, mean, population std, coefficient of variation (0 when the
    mean is 0)."""
    n = len(values)
    mean = sum(values) / n
    var = sum((x - mean) ** 2 for x in values) / n
    std = math.sqrt(var)
    cv = std / mean if mean != 0.0 else 0.0
    return max(values), min(values), mean, std, cv


def extract_features(f: Formula, lp: LpSolution | None = None) -> FeatureVector:
    """Compute the feature vector of ``f``.

    ``lp`` may carry a precomputed coverage-LP solution to avoid solving
    it twice; callers that need the LP status (infeasible means
    unsatisfiable) solve it themselves and pass it in. With no clauses the
    sentinel all-zero vector is returned.
    """
    if f.num_vars < 1:
        raise ValueError("formula must have at least one variable")
    if f.num_clauses == 0:
        return _ZERO

    pos = [0] * (f.num_vars + 1)
    neg = [0] * (f.num_vars + 1)
    n_binary = 0
    n_horn = 0
    for clause in f.clauses:
        if len(clause) == 2:
            n_binary += 1
        n_pos_lits = 0
        for lit in clause:
            if lit > 0:
                pos[lit] += 1
                n_pos_lits += 1
            else:
                neg[-lit] += 1
        if n_pos_lits <= 1:
            n_horn += 1

    occurring = [v for v in range(1, f.num_vars + 1) if pos[v] + neg[v] > 0]
    m = f.num_clauses
    ratio = m / len(occurring)

    # balance 2*|1/2 - pos/(pos+neg)|: 0 for even split, 1 for pure polarity
    balance = [2.0 * abs(0.5 - pos[v] / (pos[v] + neg[v])) for v in occurring]
    b_max, b_min, b_mean, b_std, b_cv = _spread_stats(balance)

    if lp is None:
        lp = solve_lp_relaxation(f)
    if lp.status == INFEASIBLE:
        slack_mean = 0.0
        slack_cv = 0.0
    else:
        slack = [min(lp.values[v - 1], 1.0 - lp.values[v - 1]) for v in occurring]
        _, _, slack_mean, slack_std, slack_cv = _spread_stats(slack)

    return FeatureVector(
        clause_var_ratio=ratio,
        frac_binary=n_binary / m,
        frac_horn=n_horn / m,
        posneg_var_max=b_max,
        posneg_var_min=b_min,
        posneg_var_mean=b_mean,
        posneg_var_std=b_std,
        posneg_var_variation=b_cv,
        lpslack_mean=slack_mean,
        lpslack_coeff_variation=slack_cv,
    )

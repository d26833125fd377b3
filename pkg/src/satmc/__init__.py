"""satmc: CDCL SAT solving with Monte-Carlo polarity initialization guided
by a learned satisfiability predictor."""

from .cnf import (Conflict, DimacsError, Formula, Residual, Satisfied,
                  apply_assignment, generate_random_3cnf, parse_dimacs,
                  write_dimacs)
from .cdcl import (BUDGET_EXHAUSTED, SAT, UNSAT, CdclSolver, SolveResult,
                   SolverConfig, SolveStats, check_model, solve)
from .features import FEATURE_NAMES, FeatureVector, extract_features
from .logistic import (Dataset, LogisticModel, RowProvenance, Standardizer,
                       TrainConfig, accuracy, fit_standardizer, load_model,
                       loss_and_gradient, predict_proba, save_model, train)
from .lp import INFEASIBLE, OPTIMAL, LpSolution, solve_lp_relaxation
from .backbone import (BackboneReport, HintScore, compute_backbone,
                       hint_accuracy)
from .pipeline import (BenchReport, BenchRow, GenSpec, build_dataset,
                       run_benchmark, split_dataset)
from .polarity import (McConfig, PolarityHints, compute_hints, score_literal,
                       trial_score)

__version__ = "0.1.0"

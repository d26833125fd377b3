import numpy as np
import pytest
from scipy.optimize import linprog

from satmc.cnf import Formula, Residual, apply_assignment, generate_random_3cnf
from satmc.lp import INFEASIBLE, OPTIMAL, solve_lp_relaxation
from satmc.rng import SplitMix64

F0 = Formula(4, ((1, 2, 4), (-2, 3, -4), (1, -3, -4)))


def reference_lp(f: Formula):
    """scipy/HiGHS solution of the same relaxation (independent oracle)."""
    a_ub, b_ub = [], []
    for clause in f.clauses:
        row = [0.0] * f.num_vars
        neg = 0
        for lit in clause:
            if lit > 0:
                row[lit - 1] -= 1.0
            else:
                row[-lit - 1] += 1.0
                neg += 1
        a_ub.append(row)
        b_ub.append(neg - 1.0)
    return linprog([-1.0] * f.num_vars, A_ub=a_ub, b_ub=b_ub,
                   bounds=[(0.0, 1.0)] * f.num_vars, method="highs"), a_ub, b_ub


def test_example_formula_all_ones():
    sol = solve_lp_relaxation(F0)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(4.0, abs=1e-9)
    assert np.allclose(sol.values, 1.0, atol=1e-9)


def test_contradictory_units_infeasible():
    sol = solve_lp_relaxation(Formula(1, ((1,), (-1,))))
    assert sol.status == INFEASIBLE


def test_unit_chain_infeasible():
    sol = solve_lp_relaxation(Formula(2, ((1,), (-1, 2), (-2,))))
    assert sol.status == INFEASIBLE


def test_single_clause_all_ones():
    sol = solve_lp_relaxation(Formula(3, ((1, 2, 3),)))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(3.0, abs=1e-9)


def test_all_negative_clause_objective():
    # maximize x1+x2+x3 with x1+x2+x3 <= 2: optimum 2
    sol = solve_lp_relaxation(Formula(3, ((-1, -2, -3),)))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(2.0, abs=1e-9)


def test_non_occurring_variables_at_upper_bound():
    sol = solve_lp_relaxation(Formula(5, ((1, 2, 3),)))
    assert sol.values[3] == 1.0 and sol.values[4] == 1.0
    assert sol.objective == pytest.approx(5.0, abs=1e-9)


def test_zero_variables_rejected():
    with pytest.raises(ValueError):
        solve_lp_relaxation(Formula(0, ()))


def test_agrees_with_scipy_on_random_instances():
    for i in range(60):
        nv = 5 + i % 25
        f = generate_random_3cnf(nv, int(4.3 * nv), seed=1000 + i)
        mine = solve_lp_relaxation(f)
        ref, a_ub, b_ub = reference_lp(f)
        if mine.status == INFEASIBLE:
            assert ref.status == 2
            continue
        assert ref.status == 0
        assert mine.objective == pytest.approx(-ref.fun, abs=1e-6)
        for row, b in zip(a_ub, b_ub):
            assert float(np.dot(row, mine.values)) <= b + 1e-7
        assert np.all(mine.values >= -1e-9)
        assert np.all(mine.values <= 1.0 + 1e-9)


def test_agrees_with_scipy_on_residuals_with_units():
    checked = 0
    for i in range(50):
        nv = 18 + i % 10
        f = generate_random_3cnf(nv, int(4.3 * nv), seed=7000 + i)
        rng = SplitMix64(i)
        fixing = {v: rng.coin() for v in rng.choose(list(range(1, nv + 1)), 6)}
        out = apply_assignment(f, fixing)
        if not isinstance(out, Residual):
            continue
        g = out.formula
        mine = solve_lp_relaxation(g)
        ref, _, _ = reference_lp(g)
        if mine.status == INFEASIBLE:
            assert ref.status == 2
        else:
            assert ref.status == 0
            assert mine.objective == pytest.approx(-ref.fun, abs=1e-6)
        checked += 1
    assert checked >= 30


def test_objective_dominates_constructed_feasible_points():
    # the all-half point is feasible whenever no unit clauses exist
    for i in range(10):
        f = generate_random_3cnf(20, 86, seed=50 + i)
        sol = solve_lp_relaxation(f)
        assert sol.status == OPTIMAL
        assert sol.objective >= 0.5 * 20 - 1e-9


def test_deterministic():
    f = generate_random_3cnf(60, 256, seed=31)
    a = solve_lp_relaxation(f)
    b = solve_lp_relaxation(f)
    assert a.objective == b.objective
    assert np.array_equal(a.values, b.values)

import pytest

from satmc.cnf import Formula, generate_random_3cnf
from satmc.cdcl import (BUDGET_EXHAUSTED, SAT, UNSAT, CdclSolver, SolverConfig,
                        check_model, luby, solve)

from oracles import brute_force_sat, satisfies

F0 = Formula(4, ((1, 2, 4), (-2, 3, -4), (1, -3, -4)))


def pigeonhole(pigeons: int, holes: int) -> Formula:
    """Pigeonhole principle CNF; unsatisfiable whenever pigeons > holes."""
    var = lambda p, h: (p - 1) * holes + h
    clauses = [tuple(var(p, h) for h in range(1, holes + 1))
               for p in range(1, pigeons + 1)]
    for h in range(1, holes + 1):
        for p in range(1, pigeons + 1):
            for q in range(p + 1, pigeons + 1):
                clauses.append((-var(p, h), -var(q, h)))
    return Formula(pigeons * holes, tuple(clauses))


def test_luby_sequence():
    assert [luby(i) for i in range(1, 16)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1,
                                               1, 2, 4, 8]


class TestCheckModel:
    def test_example_true(self):
        assert check_model(F0, {1: True, 2: False, 3: False, 4: False})

    def test_example_false(self):
        assert not check_model(F0, {1: False, 2: False, 3: False, 4: False})

    def test_vacuous(self):
        assert check_model(Formula(2, ()), {1: False, 2: True})

    def test_incomplete_model_rejected(self):
        with pytest.raises(ValueError):
            check_model(F0, {1: True})


class TestPropagate:
    def test_unit_chain(self):
        s = CdclSolver(Formula(2, ((1,), (-1, 2))))
        assert s.propagate() == -1
        assert s.value(1) == 1 and s.value(2) == 1
        assert s.stats.propagations == 2

    def test_contradictory_units(self):
        s = CdclSolver(Formula(1, ((1,), (-1,))))
        assert not s.ok  # second unit contradicts at load time

    def test_nothing_unit(self):
        s = CdclSolver(Formula(2, ((1, 2),)))
        assert s.propagate() == -1
        assert s.value(1) == -1 and s.value(2) == -1

    def test_conflict_detected(self):
        s = CdclSolver(Formula(2, ((1, 2), (-2,), (-1, 2))))
        cid = s.propagate()
        assert cid >= 0
        clause = s.clauses[cid]
        assert all(s.value(l) == 0 for l in clause)

    def test_implications_have_antecedents(self):
        s = CdclSolver(Formula(3, ((1,), (-1, 2), (-2, 3))))
        s.propagate()
        for v in (2, 3):
            cid = s.reason[v]
            assert cid >= 0
            assert abs(s.clauses[cid][0]) == v


class TestAnalyzeConflict:
    def test_resolution_to_unit_clause(self):
        # decide x1=false: propagation conflicts and resolves back to (x1)
        f = Formula(4, ((1, 2), (1, 3), (-2, -3, 4), (-2, -4)))
        s = CdclSolver(f)
        s.trail_lim.append(len(s.trail))
        s._enqueue(-1, -1)
        confl = s.propagate()
        assert confl >= 0
        learned, bt, lbd = s.analyze_conflict(confl)
        assert learned == [1]
        assert bt == 0
        assert lbd == 1

    def test_conflict_with_single_current_level_literal(self):
        # deciding x1 at level 1 implies -x4; deciding x2 at level 2 then
        # falsifies (-2, 4), which has exactly one level-2 literal and is
        # therefore learned unchanged
        f = Formula(4, ((-2, 4), (-1, -4)))
        s = CdclSolver(f)
        s.trail_lim.append(len(s.trail))
        s._enqueue(1, -1)
        assert s.propagate() == -1
        assert s.value(4) == 0
        s.trail_lim.append(len(s.trail))
        s._enqueue(2, -1)
        confl = s.propagate()
        assert confl >= 0
        assert set(s.clauses[confl]) == {-2, 4}
        learned, bt, _ = s.analyze_conflict(confl)
        assert set(learned) == {-2, 4}
        assert bt == 1

    def test_asserting_property_on_random_instances(self):
        # debug_checks asserts falsified-then-unit on every conflict
        for i in range(30):
            f = generate_random_3cnf(12, 52, seed=3000 + i)
            solve(f, SolverConfig(engine="python", debug_checks=True))


class TestSolve:
    def test_single_unit(self):
        r = solve(Formula(1, ((1,),)))
        assert r.verdict == SAT
        assert r.model == {1: True}
        assert r.stats.conflicts == 0

    def test_contradiction(self):
        assert solve(Formula(1, ((1,), (-1,)))).verdict == UNSAT

    def test_pigeonhole_unsat(self):
        f = pigeonhole(3, 2)
        assert not brute_force_sat(f)
        assert solve(f).verdict == UNSAT

    def test_example_formula_sat(self):
        r = solve(F0)
        assert r.verdict == SAT
        assert check_model(F0, r.model)

    def test_empty_formula(self):
        r = solve(Formula(3, ()))
        assert r.verdict == SAT and len(r.model) == 3

    @pytest.mark.parametrize("engine", ["python", "compiled"])
    def test_soundness_vs_brute_force(self, engine):
        for i in range(120):
            nv = 4 + i % 9
            f = generate_random_3cnf(nv, int(4.3 * nv), seed=5000 + i)
            r = solve(f, SolverConfig(engine=engine))
            assert (r.verdict == SAT) == brute_force_sat(f), i
            if r.verdict == SAT:
                assert check_model(f, r.model)

    def test_default_polarity_is_false(self):
        # with no clauses constraining them, all decisions assign false
        r = solve(Formula(4, ((1, 2, 3, 4),)))
        assert r.verdict == SAT
        assert sum(r.model.values()) <= 1

    def test_hints_mode_requires_full_coverage(self):
        with pytest.raises(ValueError):
            solve(F0, SolverConfig(polarity_mode="hints"), {1: True})
        with pytest.raises(ValueError):
            solve(F0, SolverConfig(polarity_mode="hints"))

    def test_hints_out_of_range_rejected(self):
        hints = {v: False for v in range(1, 6)}
        with pytest.raises(ValueError):
            solve(F0, SolverConfig(polarity_mode="hints"), hints)

    def test_zero_conflicts_with_satisfying_hints(self):
        for i in range(20):
            f = generate_random_3cnf(40, 170, seed=800 + i)
            first = solve(f)
            if first.verdict != SAT:
                continue
            again = solve(f, SolverConfig(polarity_mode="hints"), first.model)
            assert again.verdict == SAT
            assert again.stats.conflicts == 0
            # also with phase saving disabled: hints force every decision
            forced = solve(f, SolverConfig(polarity_mode="hints",
                                           phase_saving=False), first.model)
            assert forced.stats.conflicts == 0

    def test_determinism(self):
        f = generate_random_3cnf(60, 256, seed=123)
        a = solve(f)
        b = solve(f)
        assert a.verdict == b.verdict and a.model == b.model
        assert (a.stats.conflicts, a.stats.decisions, a.stats.propagations,
                a.stats.restarts) == (b.stats.conflicts, b.stats.decisions,
                                      b.stats.propagations, b.stats.restarts)

    def test_conflict_budget(self):
        f = pigeonhole(5, 4)
        full = solve(f)
        assert full.verdict == UNSAT
        assert full.stats.conflicts > 4
        capped = solve(f, SolverConfig(conflict_budget=4))
        assert capped.verdict == BUDGET_EXHAUSTED
        assert capped.model is None
        assert capped.stats.conflicts == 4

    def test_unsat_wins_over_budget_on_final_conflict(self):
        # a level-0 conflict within the budget still reports UNSAT
        f = pigeonhole(3, 2)
        full = solve(f)
        assert full.verdict == UNSAT
        capped = solve(f, SolverConfig(conflict_budget=full.stats.conflicts))
        assert capped.verdict == UNSAT


class TestEngineEquivalence:
    """The compiled engine must be observably identical to the reference."""

    @staticmethod
    def run_pair(f, **kw):
        rp = solve(f, SolverConfig(engine="python", **kw))
        rc = solve(f, SolverConfig(engine="compiled", **kw))
        assert rp.verdict == rc.verdict
        assert rp.model == rc.model
        assert (rp.stats.conflicts, rp.stats.decisions, rp.stats.propagations,
                rp.stats.restarts) == (rc.stats.conflicts, rc.stats.decisions,
                                       rc.stats.propagations, rc.stats.restarts)
        return rp

    def test_small_instances(self):
        for i in range(80):
            nv = 4 + i % 10
            f = generate_random_3cnf(nv, int(4.3 * nv), seed=9000 + i)
            self.run_pair(f)

    def test_medium_instances_with_restarts_and_reduction(self):
        # harsh schedule exercises restarts and clause-database reduction
        for i in range(10):
            nv = 40 + (i % 3) * 10
            f = generate_random_3cnf(nv, int(4.26 * nv), seed=9500 + i)
            self.run_pair(f, luby_base=8, db_keep_base=40, db_keep_ramp=15)

    def test_with_hints(self):
        for i in range(10):
            f = generate_random_3cnf(25, 106, seed=9700 + i)
            hints = {v: (v * i) % 3 == 0 for v in range(1, 26)}
            rp = solve(f, SolverConfig(engine="python", polarity_mode="hints"),
                       hints)
            rc = solve(f, SolverConfig(engine="compiled", polarity_mode="hints"),
                       hints)
            assert rp.verdict == rc.verdict and rp.model == rc.model
            assert rp.stats.conflicts == rc.stats.conflicts

    def test_budget_equivalence(self):
        f = pigeonhole(5, 4)
        rp = self.run_pair(f, conflict_budget=4)
        assert rp.verdict == BUDGET_EXHAUSTED


class TestLearnedClausesImplied:
    def test_appending_learned_clauses_preserves_solution_set(self):
        from oracles import brute_force_models
        for i in range(15):
            f = generate_random_3cnf(9, 38, seed=4000 + i)
            s = CdclSolver(f, SolverConfig(engine="python"))
            s.solve()
            learned = [tuple(s.clauses[cid]) for cid in range(len(s.clauses))
                       if s.c_learnt[cid]]
            if not learned:
                continue
            g = f.extend(learned)
            assert brute_force_models(f) == brute_force_models(g)

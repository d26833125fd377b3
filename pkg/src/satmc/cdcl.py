"""Conflict-driven clause learning solver with watched literals, first-UIP
learning, activity-based decisions, Luby restarts, and a pluggable source
for each variable's initial branching polarity.

The solver is deterministic by construction: activity ties break toward the
lowest variable index, watch lists are visited in insertion order, and the
restart/database-reduction schedules are fixed. Identical (formula, config,
hints) inputs therefore give identical verdicts, models, and statistics,
which is what lets the benchmark isolate polarity as the only varying
factor between paired runs.

Two engines share these semantics: :class:`CdclSolver` is the readable
reference implementation; :mod:`satmc._engine` is a compiled port used by
:func:`solve` for large instances. The test suite checks that both produce
bit-identical verdicts, models, and counters.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .cnf import Formula

SAT = "SAT"
UNSAT = "UNSAT"
BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"

POLARITY_ALWAYS_FALSE = "always_false"
POLARITY_HINTS = "hints"

_RESCALE_VAR = 1e100
_RESCALE_CLA = 1e20


@dataclass
class SolverConfig:
    polarity_mode: str = POLARITY_ALWAYS_FALSE
    phase_saving: bool = True
    var_decay: float = 0.95
    clause_decay: float = 0.999
    luby_base: int = 100
    db_keep_base: int = 4000      # reduce learned DB above db_keep_base + db_keep_ramp * reductions
    db_keep_ramp: int = 1000
    conflict_budget: int | None = None
    seed: int = 0                 # recorded for pairing runs; the search itself is deterministic
    engine: str = "auto"          # auto | python | compiled
    debug_checks: bool = False    # assert the asserting-clause property on every conflict

    def __post_init__(self):
        if self.polarity_mode not in (POLARITY_ALWAYS_FALSE, POLARITY_HINTS):
            raise ValueError("unknown polarity_mode %r" % self.polarity_mode)
        if not 0.0 < self.var_decay < 1.0:
            raise ValueError("var_decay must be in (0,1)")
        if not 0.0 < self.clause_decay <= 1.0:
            raise ValueError("clause_decay must be in (0,1]")
        if self.luby_base < 1:
            raise ValueError("luby_base must be >= 1")
        if self.engine not in ("auto", "python", "compiled"):
            raise ValueError("unknown engine %r" % self.engine)


@dataclass
class SolveStats:
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    restarts: int = 0
    wall_time_ms: float = 0.0


@dataclass
class SolveResult:
    verdict: str
    model: dict[int, bool] | None
    stats: SolveStats


def luby(i: int) -> int:
    """i-th element (1-based) of the Luby sequence 1,1,2,1,1,2,4,1,..."""
    if i < 1:
        raise ValueError("luby is 1-indexed")
    while True:
        k = i.bit_length()
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1


def check_model(f: Formula, model: dict[int, bool]) -> bool:
    """True iff ``model`` is total over f's variables and satisfies every clause."""
    for v in range(1, f.num_vars + 1):
        if v not in model:
            raise ValueError("model does not assign variable %d" % v)
    for clause in f.clauses:
        if not any(model[abs(lit)] == (lit > 0) for lit in clause):
            return False
    return True


def _validated_hints(f: Formula, hints: dict[int, bool] | None, cfg: SolverConfig) -> dict[int, bool] | None:
    if cfg.polarity_mode != POLARITY_HINTS:
        return None
    if hints is None:
        raise ValueError("polarity_mode 'hints' requires hints")
    for v in range(1, f.num_vars + 1):
        if v not in hints:
            raise ValueError("hints missing variable %d" % v)
    for v in hints:
        if not 1 <= v <= f.num_vars:
            raise ValueError("hints reference variable %d beyond num_vars" % v)
    return hints


class CdclSolver:
    """Reference CDCL engine over one formula; single-use, single-threaded.

    Literal values are encoded -1/0/1 for unassigned/false/true. Watched
    literals sit at clause slots 0 and 1; a propagated literal's reason
    clause always carries that literal at slot 0, which conflict analysis
    relies on.
    """

    def __init__(self, f: Formula, cfg: SolverConfig | None = None,
                 hints: dict[int, bool] | None = None):
        self.f = f
        self.cfg = cfg or SolverConfig()
        hints = _validated_hints(f, hints, self.cfg)

        nv = f.num_vars
        self.nv = nv
        self.clauses: list[list[int]] = []
        self.c_learnt: list[bool] = []
        self.c_act: list[float] = []
        self.c_lbd: list[int] = []
        self.c_dead: list[bool] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * nv + 2)]

        self.assigns = [-1] * (nv + 1)
        self.level = [0] * (nv + 1)
        self.reason = [-1] * (nv + 1)
        self.activity = [0.0] * (nv + 1)
        if self.cfg.polarity_mode == POLARITY_HINTS:
            self.init_phase = [0] + [1 if hints[v] else 0 for v in range(1, nv + 1)]
        else:
            self.init_phase = [0] * (nv + 1)
        self.saved = list(self.init_phase)

        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0

        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.learned_live = 0
        self.reductions = 0
        self.conflicts_since_restart = 0
        self.stats = SolveStats()
        self.ok = True

        for clause in f.clauses:
            self._add_input_clause(list(clause))

    # ------------------------------------------------------------------
    # basic state

    def decision_level(self) -> int:
        return len(self.trail_lim)

    def value(self, lit: int) -> int:
        """-1 unassigned, 0 false, 1 true under the current trail."""
        va = self.assigns[abs(lit)]
        if va < 0:
            return -1
        return 1 if (va == 1) == (lit > 0) else 0

    @staticmethod
    def _wcode(lit: int) -> int:
        return (lit << 1) if lit > 0 else ((-lit) << 1) | 1

    def _add_input_clause(self, lits: list[int]) -> None:
        cid = len(self.clauses)
        self.clauses.append(lits)
        self.c_learnt.append(False)
        self.c_act.append(0.0)
        self.c_lbd.append(0)
        self.c_dead.append(False)
        if len(lits) == 0:
            self.ok = False
        elif len(lits) == 1:
            if not self._enqueue(lits[0], cid):
                self.ok = False
        else:
            self.watches[self._wcode(lits[0])].append(cid)
            self.watches[self._wcode(lits[1])].append(cid)

    def _enqueue(self, lit: int, reason_cid: int) -> bool:
        v = abs(lit)
        val = 1 if lit > 0 else 0
        if self.assigns[v] != -1:
            return self.assigns[v] == val
        self.assigns[v] = val
        self.level[v] = self.decision_level()
        self.reason[v] = reason_cid
        self.trail.append(lit)
        if reason_cid != -1:
            self.stats.propagations += 1
        return True

    # ------------------------------------------------------------------
    # unit propagation

    def propagate(self) -> int:
        """Run unit propagation to fixpoint. Returns the conflicting clause
        id, or -1 if none; every implied literal is recorded with its
        antecedent."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            wl = self.watches[self._wcode(false_lit)]
            i = 0
            while i < len(wl):
                cid = wl[i]
                if self.c_dead[cid]:
                    del wl[i]
                    continue
                c = self.clauses[cid]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if self.value(c[0]) == 1:
                    i += 1
                    continue
                moved = False
                for j in range(2, len(c)):
                    if self.value(c[j]) != 0:
                        c[1], c[j] = c[j], c[1]
                        del wl[i]
                        self.watches[self._wcode(c[1])].append(cid)
                        moved = True
                        break
                if moved:
                    continue
                if self.value(c[0]) == 0:
                    return cid       # conflict: both watches false
                self._enqueue(c[0], cid)
                i += 1
        return -1

    # ------------------------------------------------------------------
    # conflict analysis

    def _bump_var(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > _RESCALE_VAR:
            for u in range(1, self.nv + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100

    def _bump_clause(self, cid: int) -> None:
        self.c_act[cid] += self.cla_inc
        if self.c_act[cid] > _RESCALE_CLA:
            for k in range(len(self.c_act)):
                if self.c_learnt[k]:
                    self.c_act[k] *= 1e-20
            self.cla_inc *= 1e-20

    def analyze_conflict(self, confl_cid: int) -> tuple[list[int], int, int]:
        """First-UIP analysis of the conflict in clause ``confl_cid``.

        Returns (learned clause, backjump level, literal-block distance).
        The learned clause has the asserting literal at slot 0 and a
        highest-backjump-level literal at slot 1; it contains exactly one
        literal from the current decision level.
        """
        cur = self.decision_level()
        learned = [0]
        seen = [False] * (self.nv + 1)
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        cid = confl_cid

        while True:
            if self.c_learnt[cid]:
                self._bump_clause(cid)
            c = self.clauses[cid]
            for j in range(0 if p == 0 else 1, len(c)):
                q = c[j]
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump_var(v)
                    if self.level[v] == cur:
                        counter += 1
                    else:
                        learned.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            cid = self.reason[abs(p)]

        learned[0] = -p
        if len(learned) == 1:
            bt = 0
        else:
            max_i = 1
            for i in range(2, len(learned)):
                if self.level[abs(learned[i])] > self.level[abs(learned[max_i])]:
                    max_i = i
            learned[1], learned[max_i] = learned[max_i], learned[1]
            bt = self.level[abs(learned[1])]
        lbd = len({self.level[abs(q)] for q in learned})
        return learned, bt, lbd

    # ------------------------------------------------------------------
    # trail maintenance

    def backjump(self, target_level: int) -> None:
        """Pop the trail back to ``target_level``, saving phases on the way."""
        if self.decision_level() <= target_level:
            return
        limit = self.trail_lim[target_level]
        for k in range(len(self.trail) - 1, limit - 1, -1):
            v = abs(self.trail[k])
            self.saved[v] = self.assigns[v]
            self.assigns[v] = -1
            self.reason[v] = -1
        del self.trail[limit:]
        del self.trail_lim[target_level:]
        self.qhead = len(self.trail)

    def _pick_phase(self, v: int) -> int:
        if self.cfg.phase_saving:
            return self.saved[v]
        return self.init_phase[v]

    def _decide(self) -> None:
        best = 0
        best_act = -1.0
        for v in range(1, self.nv + 1):
            if self.assigns[v] == -1 and self.activity[v] > best_act:
                best = v
                best_act = self.activity[v]
        self.trail_lim.append(len(self.trail))
        lit = best if self._pick_phase(best) == 1 else -best
        self._enqueue(lit, -1)
        self.stats.decisions += 1

    # ------------------------------------------------------------------
    # learned-clause database

    def _add_learned(self, lits: list[int], lbd: int) -> int:
        cid = len(self.clauses)
        self.clauses.append(lits)
        self.c_learnt.append(True)
        self.c_act.append(0.0)
        self.c_lbd.append(lbd)
        self.c_dead.append(False)
        self.learned_live += 1
        self._bump_clause(cid)
        if len(lits) >= 2:
            self.watches[self._wcode(lits[0])].append(cid)
            self.watches[self._wcode(lits[1])].append(cid)
        return cid

    def _locked(self, cid: int) -> bool:
        v = abs(self.clauses[cid][0])
        return self.assigns[v] != -1 and self.reason[v] == cid

    def _reduce_db(self) -> None:
        """Kill the lower-activity half of the disposable learned clauses.

        Clauses with LBD <= 2 and clauses currently acting as antecedents
        are always kept.
        """
        candidates = [
            cid for cid in range(len(self.clauses))
            if self.c_learnt[cid] and not self.c_dead[cid]
            and self.c_lbd[cid] > 2 and not self._locked(cid)
        ]
        candidates.sort(key=lambda cid: (self.c_act[cid], cid))
        for cid in candidates[: len(candidates) // 2]:
            self.c_dead[cid] = True
            self.learned_live -= 1
        self.reductions += 1

    # ------------------------------------------------------------------
    # main search

    def solve(self) -> SolveResult:
        t0 = time.perf_counter()
        verdict, model = self._search()
        self.stats.wall_time_ms = (time.perf_counter() - t0) * 1000.0
        return SolveResult(verdict, model, self.stats)

    def _search(self) -> tuple[str, dict[int, bool] | None]:
        cfg = self.cfg
        if not self.ok:
            return UNSAT, None
        while True:
            confl = self.propagate()
            if confl >= 0:
                self.stats.conflicts += 1
                self.conflicts_since_restart += 1
                if self.decision_level() == 0:
                    return UNSAT, None
                if cfg.conflict_budget is not None and self.stats.conflicts >= cfg.conflict_budget:
                    return BUDGET_EXHAUSTED, None
                learned, bt, lbd = self.analyze_conflict(confl)
                if cfg.debug_checks:
                    assert all(self.value(q) == 0 for q in learned), "learned clause not falsified"
                self.backjump(bt)
                cid = self._add_learned(learned, lbd)
                if cfg.debug_checks:
                    assert self.value(learned[0]) == -1, "learned clause not asserting"
                    assert all(self.value(q) == 0 for q in learned[1:]), "learned clause not unit"
                self._enqueue(learned[0], cid)
                self.var_inc /= cfg.var_decay
                self.cla_inc /= cfg.clause_decay
                if self.learned_live > cfg.db_keep_base + cfg.db_keep_ramp * self.reductions:
                    self._reduce_db()
                if self.conflicts_since_restart >= cfg.luby_base * luby(self.stats.restarts + 1):
                    self.stats.restarts += 1
                    self.conflicts_since_restart = 0
                    self.backjump(0)
            else:
                if len(self.trail) == self.nv:
                    model = {v: self.assigns[v] == 1 for v in range(1, self.nv + 1)}
                    return SAT, model
                self._decide()


def solve(f: Formula, cfg: SolverConfig | None = None,
          hints: dict[int, bool] | None = None) -> SolveResult:
    """Solve ``f`` under ``cfg``, using hints as initial polarities when
    ``polarity_mode`` is 'hints'.

    Dispatches to the compiled engine unless ``cfg.engine`` says otherwise;
    both engines produce identical results.
    """
    cfg = cfg or SolverConfig()
    if cfg.engine == "python":
        return CdclSolver(f, cfg, hints).solve()
    from . import _engine
    _validated_hints(f, hints, cfg)
    return _engine.solve_compiled(f, cfg, hints)

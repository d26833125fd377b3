"""CNF data model: DIMACS I/O, random 3-CNF generation, and syntactic
simplification under partial assignments.

Literals follow the DIMACS convention: variable ``i`` (1-based) appears as
the integer ``i`` and its negation as ``-i``. A clause is a tuple of
literals, a formula a tuple of clauses plus the number of variables it
ranges over. All values are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rng import SplitMix64

PartialAssignment = dict[int, bool]


class DimacsError(ValueError):
    """Raised for malformed or inconsistent DIMACS CNF input."""


@dataclass(frozen=True)
class Formula:
    """A CNF formula over variables 1..num_vars.

    Invariants checked at construction: every literal's variable lies in
    range, no clause repeats a literal, and no clause is a tautology
    (contains both a literal and its negation).
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be nonnegative")
        for idx, clause in enumerate(self.clauses):
            seen = set()
            for lit in clause:
                v = abs(lit)
                if lit == 0 or v > self.num_vars:
                    raise ValueError(
                        "literal %d out of range in clause %d" % (lit, idx)
                    )
                if -lit in seen:
                    raise ValueError("tautological clause %d" % idx)
                if lit in seen:
                    raise ValueError("duplicate literal %d in clause %d" % (lit, idx))
                seen.add(lit)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def occurring_variables(self) -> list[int]:
        """Ascending list of variables that occur in at least one clause."""
        present = set()
        for clause in self.clauses:
            for lit in clause:
                present.add(abs(lit))
        return sorted(present)

    def extend(self, extra_clauses: list[tuple[int, ...]]) -> "Formula":
        """New formula with ``extra_clauses`` appended (same num_vars)."""
        return Formula(self.num_vars, self.clauses + tuple(map(tuple, extra_clauses)))


@dataclass(frozen=True)
class Satisfied:
    """Every clause was satisfied by the assignment."""


@dataclass(frozen=True)
class Conflict:
    """Some clause had all its literals falsified."""


@dataclass(frozen=True)
class Residual:
    """The simplified formula plus the map back to original variables.

    The residual is compacted: its variables are renumbered densely over
    the variables still occurring in some clause, in ascending original
    order. ``kept_vars[i]`` is the original variable for residual variable
    ``i + 1``.
    """

    formula: Formula
    kept_vars: tuple[int, ...]


SimplifyOutcome = Satisfied | Conflict | Residual


def parse_dimacs(text: str) -> Formula:
    """Parse DIMACS CNF text into a Formula.

    Accepts ``c`` comment lines, one ``p cnf <vars> <clauses>`` header, and
    clauses as whitespace-separated nonzero integers each terminated by 0
    (clauses may span lines). Duplicate literals within a clause are merged
    silently; tautological clauses, out-of-range literals, and clause-count
    mismatches raise :class:`DimacsError`.
    """
    num_vars = None
    num_clauses = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    current_set: set[int] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError("line %d: duplicate header" % lineno)
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError("line %d: malformed header %r" % (lineno, line))
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError("line %d: non-integer header field" % lineno) from None
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError("line %d: negative header field" % lineno)
            continue
        if num_vars is None:
            raise DimacsError("line %d: clause before 'p cnf' header" % lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError("line %d: bad token %r" % (lineno, tok)) from None
            if lit == 0:
                clauses.append(tuple(current))
                current = []
                current_set = set()
                continue
            if abs(lit) > num_vars:
                raise DimacsError(
                    "line %d: literal %d exceeds header variable count %d"
                    % (lineno, lit, num_vars)
                )
            if -lit in current_set:
                raise DimacsError("line %d: tautological clause" % lineno)
            if lit in current_set:
                continue  # merge duplicate literal
            current_set.add(lit)
            current.append(lit)

    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("unterminated clause at end of input")
    if len(clauses) != num_clauses:
        raise DimacsError(
            "header promises %d clauses, found %d" % (num_clauses, len(clauses))
        )
    return Formula(num_vars, tuple(clauses))


def write_dimacs(f: Formula) -> str:
    """Canonical DIMACS text: header, then one clause per line.

    ``parse_dimacs(write_dimacs(f))`` reproduces ``f`` exactly, including
    clause and literal order.
    """
    lines = ["p cnf %d %d" % (f.num_vars, f.num_clauses)]
    for clause in f.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def generate_random_3cnf(num_vars: int, num_clauses: int, seed: int) -> Formula:
    """Uniform random 3-CNF: a pure function of (num_vars, num_clauses, seed).

    Each clause draws 3 distinct variables without replacement and negates
    each with an independent fair coin. Duplicate clauses across the
    formula are permitted. The draw procedure is pinned for cross-platform
    reproducibility: per literal slot, draw ``below(num_vars) + 1`` from a
    SplitMix64 stream seeded with ``seed`` (rejecting variables already in
    the clause), then draw a sign coin, True meaning positive.
    """
    if num_vars < 3:
        raise ValueError("need at least 3 variables, got %d" % num_vars)
    if num_clauses < 0:
        raise ValueError("num_clauses must be nonnegative")
    rng = SplitMix64(seed)
    clauses = []
    for _ in range(num_clauses):
        clause = []
        used = set()
        for _ in range(3):
            v = rng.below(num_vars) + 1
            while v in used:
                v = rng.below(num_vars) + 1
            used.add(v)
            clause.append(v if rng.coin() else -v)
        clauses.append(tuple(clause))
    return Formula(num_vars, tuple(clauses))


def apply_assignment(f: Formula, assignment: PartialAssignment) -> SimplifyOutcome:
    """Simplify ``f`` under a partial assignment, without propagation.

    Satisfied clauses are dropped and falsified literals removed from the
    rest; unit clauses are retained as-is. Returns :class:`Conflict` as
    soon as a clause empties, :class:`Satisfied` when no clause remains,
    else a compacted :class:`Residual`.
    """
    for v in assignment:
        if not 1 <= v <= f.num_vars:
            raise ValueError("assignment references variable %d beyond num_vars" % v)

    reduced: list[tuple[int, ...]] = []
    for clause in f.clauses:
        kept = []
        satisfied = False
        for lit in clause:
            val = assignment.get(abs(lit))
            if val is None:
                kept.append(lit)
            elif val == (lit > 0):
                satisfied = True
                break
        if satisfied:
            continue
        if not kept:
            return Conflict()
        reduced.append(tuple(kept))

    if not reduced:
        return Satisfied()

    occurring = sorted({abs(lit) for clause in reduced for lit in clause})
    renumber = {old: new for new, old in enumerate(occurring, start=1)}
    compacted = tuple(
        tuple(renumber[abs(lit)] * (1 if lit > 0 else -1) for lit in clause)
        for clause in reduced
    )
    return Residual(Formula(len(occurring), compacted), tuple(occurring))

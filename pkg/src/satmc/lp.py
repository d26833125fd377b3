"""LP relaxation of CNF coverage.

For a formula F this solves

    maximize    sum_i x_i
    subject to  sum_{i in pos(c)} x_i + sum_{i in neg(c)} (1 - x_i) >= 1
                for every clause c, with 0 <= x_i <= 1,

i.e. every clause must be "covered" by at least one unit of fractional
truth. The relaxation is infeasible only through contradictory unit-clause
chains, in which case the formula is unsatisfiable. The per-variable slack
min(x_i, 1 - x_i) at the optimum (distance from integrality) feeds the
feature extractor.

The solver is a self-contained dense two-phase simplex with variable
bounds handled implicitly: nonbasic variables may rest at either bound,
and a bound-to-bound move is a cheap rhs adjustment instead of a pivot.
Unit clauses are propagated away first (they pin their variable in the LP
exactly as in the formula, and clauses they satisfy become non-binding),
and the remaining variables start at the bounds chosen by a deterministic
crash heuristic, so phase 1 only has to clear the handful of clauses that
heuristic leaves uncovered.

Coverage LPs are massively degenerate, which stalls textbook pivoting, so
solving runs in two attempts:

 1. a fast pass on a deterministically perturbed relaxation (bounds and
    right-hand sides grown by distinct hash-derived epsilons <= 1e-6, so
    ratio-test ties are broken generically), using steepest reduced cost
    with a Bland fallback on stalls. The true right-hand sides ride along
    in the tableau's rhs column, so the exact unperturbed solution is
    recovered from the final basis and verified against the true bounds.
 2. if verification fails or the pass hits its iteration cap, an exact
    pass on the unperturbed problem under pure Bland's rule, whose
    anti-cycling guarantee makes termination certain.

Enlarging bounds relaxes the problem, so an infeasible verdict from the
fast pass is already exact and never needs the second pass. Both passes
are deterministic functions of the formula alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .cnf import Formula

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

_EPS = 1e-9
_FEAS_TOL = 1e-7
_PERTURB = 1e-6

_AT_LB = 0
_AT_UB = 1
_BASIC = 2

_STATUS_OPTIMAL = 1
_STATUS_INFEASIBLE = 0
_STATUS_RETRY = -2
_STATUS_FAIL = -1


@dataclass(frozen=True)
class LpSolution:
    """Relaxation outcome: per-variable values in [0,1] (entry v-1 for
    variable v), the objective, and 'optimal' or 'infeasible'."""

    values: np.ndarray
    objective: float
    status: str


@njit(cache=True)
def _hash01(k):
    """Deterministic uniform-ish value in (0,1) from an integer key
    (SplitMix64 finalizer over the scaled key)."""
    z = np.uint64(k) * np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (np.float64(z) + 1.0) / 18446744073709551616.0


@njit(cache=True)
def _crash_start(n, cl_off, cl_var, cl_sign):
    """Deterministic starting corner: a 0/1 point falsifying few clauses.

    Majority polarity per variable, then up to four repair passes that,
    for each falsified clause in index order, flip the variable breaking
    the fewest currently singly-satisfied clauses (ties toward the first
    literal). Artificial variables are needed only for the clauses still
    falsified, so a good start keeps phase 1 tiny.
    """
    m = cl_off.shape[0] - 1
    total = cl_var.shape[0]
    pos_cnt = np.zeros(n, dtype=np.int64)
    neg_cnt = np.zeros(n, dtype=np.int64)
    for k in range(total):
        if cl_sign[k] > 0:
            pos_cnt[cl_var[k]] += 1
        else:
            neg_cnt[cl_var[k]] += 1
    assign = np.empty(n, dtype=np.uint8)
    for v in range(n):
        assign[v] = 1 if pos_cnt[v] >= neg_cnt[v] else 0

    # occurrence lists (CSR) and per-clause satisfied-literal counts
    occ_off = np.zeros(n + 1, dtype=np.int64)
    for k in range(total):
        occ_off[cl_var[k] + 1] += 1
    for v in range(n):
        occ_off[v + 1] += occ_off[v]
    occ = np.empty(total, dtype=np.int64)
    fill = occ_off[:n].copy()
    for r in range(m):
        for k in range(cl_off[r], cl_off[r + 1]):
            occ[fill[cl_var[k]]] = r
            fill[cl_var[k]] += 1

    sat_cnt = np.zeros(m, dtype=np.int64)
    for r in range(m):
        for k in range(cl_off[r], cl_off[r + 1]):
            want = 1 if cl_sign[k] > 0 else 0
            if assign[cl_var[k]] == want:
                sat_cnt[r] += 1

    for _ in range(4):
        repaired = 0
        for r in range(m):
            if sat_cnt[r] != 0:
                continue
            best_v = -1
            best_break = 1 << 60
            for k in range(cl_off[r], cl_off[r + 1]):
                v = cl_var[k]
                # flipping v breaks clauses where v's literal is the sole support
                brk = 0
                for t in range(occ_off[v], occ_off[v + 1]):
                    cj = occ[t]
                    if sat_cnt[cj] != 1:
                        continue
                    for k2 in range(cl_off[cj], cl_off[cj + 1]):
                        if cl_var[k2] == v:
                            want = 1 if cl_sign[k2] > 0 else 0
                            if assign[v] == want:
                                brk += 1
                            break
                if brk < best_break:
                    best_break = brk
                    best_v = v
            assign[best_v] ^= 1
            repaired += 1
            for t in range(occ_off[best_v], occ_off[best_v + 1]):
                cj = occ[t]
                for k2 in range(cl_off[cj], cl_off[cj + 1]):
                    if cl_var[k2] == best_v:
                        want = 1 if cl_sign[k2] > 0 else 0
                        if assign[best_v] == want:
                            sat_cnt[cj] += 1
                        else:
                            sat_cnt[cj] -= 1
                        break
        if repaired == 0:
            break
    return assign


@njit(cache=True)
def _ratio_test(T, beta, basis, ub, m, col, direction):
    """Largest step along the entering direction that keeps every basic
    variable inside its bounds.

    Returns (t, row, leave_to_ub). row is -1 when no basic variable
    blocks. Ties within _EPS break toward the lowest basic variable index
    (Bland's rule), and the flag says which of its bounds the leaving
    variable reaches.
    """
    tmin = np.inf
    for i in range(m):
        a = T[i, col] * direction
        if a > _EPS:
            t = beta[i] / a                    # basic variable falls to 0
        elif a < -_EPS:
            u = ub[basis[i]]
            if u == np.inf:
                continue
            t = (u - beta[i]) / (-a)           # basic variable rises to its bound
        else:
            continue
        if t < 0.0:
            t = 0.0
        if t < tmin:
            tmin = t
    if tmin == np.inf:
        return np.inf, -1, False

    best_row = -1
    best_var = -1
    best_to_ub = False
    for i in range(m):
        a = T[i, col] * direction
        if a > _EPS:
            t = beta[i] / a
            to_ub = False
        elif a < -_EPS:
            u = ub[basis[i]]
            if u == np.inf:
                continue
            t = (u - beta[i]) / (-a)
            to_ub = True
        else:
            continue
        if t < 0.0:
            t = 0.0
        if t <= tmin + _EPS and (best_row == -1 or basis[i] < best_var):
            best_row = i
            best_var = basis[i]
            best_to_ub = to_ub
    return tmin, best_row, best_to_ub


@njit(cache=True)
def _pivot(T, beta, basis, state, m, row, col, entering_from_ub, leave_to_ub, ub, t):
    """Step by t along the entering direction, then make ``col`` basic in
    ``row``, parking the leaving variable at the bound it reached."""
    direction = -1.0 if entering_from_ub else 1.0
    for i in range(m):
        beta[i] -= direction * t * T[i, col]
    enter_val = (ub[col] - t) if entering_from_ub else t

    leave = basis[row]
    state[leave] = _AT_UB if leave_to_ub else _AT_LB

    inv = 1.0 / T[row, col]
    ncols = T.shape[1]
    for j in range(ncols):
        T[row, j] *= inv
    for i in range(T.shape[0]):
        if i == row:
            continue
        f = T[i, col]
        if f != 0.0:
            for j in range(ncols):
                T[i, j] -= f * T[row, j]
    basis[row] = col
    state[col] = _BASIC
    beta[row] = enter_val


@njit(cache=True)
def _run_phase(T, beta, basis, state, ub, m, obj_row, n_enterable, bland_only, max_iter):
    """Improve one objective row until no nonbasic column is eligible.

    Entering rule: devex pricing (reduced cost squared over a reference
    weight) while the iteration makes progress, falling back to Bland's
    lowest-index rule after 64 consecutive degenerate pivots (or always,
    when ``bland_only``). Bland steps cannot cycle, so termination is
    guaranteed; ``max_iter`` is a defensive cap for the perturbed fast
    pass. Returns the iteration count on success, -1 on an unbounded ray,
    -2 when the cap is hit.
    """
    stall = 2 ** 30 if bland_only else 0
    gamma = np.ones(n_enterable, dtype=np.float64)   # devex reference weights
    it = 0
    while True:
        it += 1
        if it > max_iter:
            return -2
        col = -1
        from_ub = False
        if stall < 64:
            best = 0.0
            for j in range(n_enterable):
                if state[j] == _BASIC:
                    continue
                d = T[obj_row, j]
                gain = d if state[j] == _AT_LB else -d
                if gain > _EPS:
                    score = gain * gain / gamma[j]
                    if score > best:
                        best = score
                        col = j
                        from_ub = state[j] == _AT_UB
        else:
            for j in range(n_enterable):
                if state[j] == _BASIC:
                    continue
                d = T[obj_row, j]
                if state[j] == _AT_LB and d > _EPS:
                    col = j
                    from_ub = False
                    break
                if state[j] == _AT_UB and d < -_EPS:
                    col = j
                    from_ub = True
                    break
        if col == -1:
            return it
        direction = -1.0 if from_ub else 1.0
        t_row, row, leave_to_ub = _ratio_test(T, beta, basis, ub, m, col, direction)
        if ub[col] < t_row:
            # entering variable crosses to its other bound: no basis change
            for i in range(m):
                beta[i] -= direction * ub[col] * T[i, col]
            state[col] = _AT_LB if from_ub else _AT_UB
            if not bland_only:
                stall = 0
            continue
        if row == -1:
            return -1
        # devex update from the pre-pivot row (Forrest-Goldfarb style)
        alpha = T[row, col]
        gq = gamma[col]
        for j in range(n_enterable):
            if state[j] == _BASIC or j == col:
                continue
            w = T[row, j] / alpha
            cand = w * w * gq
            if cand > gamma[j]:
                gamma[j] = cand
        leave = basis[row]
        if leave < n_enterable:
            gl = gq / (alpha * alpha)
            gamma[leave] = gl if gl > 1.0 else 1.0
        _pivot(T, beta, basis, state, m, row, col, from_ub, leave_to_ub, ub, t_row)
        if not bland_only:
            if t_row > 1e-12:
                stall = 0
            else:
                stall += 1


@njit(cache=True)
def _solve_kernel(n, cl_off, cl_var, cl_sign, perturbed):
    """One simplex pass over the coverage LP; see the module docstring.

    Returns (status, x, objective) with status _STATUS_OPTIMAL,
    _STATUS_INFEASIBLE, _STATUS_RETRY (perturbed pass could not be
    verified) or _STATUS_FAIL.
    """
    m = cl_off.shape[0] - 1
    start = _crash_start(n, cl_off, cl_var, cl_sign)
    # row r: sum_neg x - sum_pos x <= neg_count - 1. At the starting 0/1
    # point the slack is (#satisfied literals - 1), negative exactly for
    # the clauses the crash heuristic left falsified.
    rhs = np.empty(m, dtype=np.float64)
    slack_at_start = np.empty(m, dtype=np.float64)
    n_art = 0
    for r in range(m):
        neg = 0
        sat = 0
        for k in range(cl_off[r], cl_off[r + 1]):
            if cl_sign[k] < 0:
                neg += 1
                if start[cl_var[k]] == 0:
                    sat += 1
            elif start[cl_var[k]] == 1:
                sat += 1
        rhs[r] = neg - 1.0
        slack_at_start[r] = sat - 1.0
        if slack_at_start[r] < 0.0:
            n_art += 1

    ncols = n + m + n_art + 1
    obj2 = m                            # phase-2 objective row
    obj1 = m + 1                        # phase-1 objective row
    T = np.zeros((m + 2, ncols), dtype=np.float64)
    beta = np.zeros(m, dtype=np.float64)
    basis = np.empty(m, dtype=np.int64)
    state = np.full(n + m + n_art, _AT_LB, dtype=np.uint8)
    ub = np.empty(n + m + n_art, dtype=np.float64)
    eps_u = np.zeros(n, dtype=np.float64)
    for j in range(n):
        if perturbed:
            eps_u[j] = _PERTURB * _hash01(j + 1)
        if start[j] == 1:
            state[j] = _AT_UB
        ub[j] = 1.0 + eps_u[j]
    for j in range(n, n + m + n_art):
        ub[j] = np.inf

    art = n + m
    for r in range(m):
        # rows that get a basic artificial are stored negated so that the
        # basic column carries the required +1 (tableau rows are B^-1 A)
        has_art = slack_at_start[r] < 0.0
        sgn = -1.0 if has_art else 1.0
        # the perturbed rhs grows by a hash epsilon plus enough to absorb
        # the bound growth of at-upper-bound columns, keeping the start
        # feasible and the perturbed problem a relaxation of the true one
        base_beta = slack_at_start[r]
        for k in range(cl_off[r], cl_off[r + 1]):
            T[r, cl_var[k]] += sgn * (1.0 if cl_sign[k] < 0 else -1.0)
            if perturbed and cl_sign[k] > 0 and start[cl_var[k]] == 1:
                base_beta += eps_u[cl_var[k]]
        if perturbed:
            base_beta += _PERTURB * _hash01(1000003 + r)
        T[r, n + r] = sgn               # slack
        T[r, ncols - 1] = sgn * rhs[r]  # true rhs: rides along for snap-back
        if has_art:
            T[r, art] = 1.0
            basis[r] = art
            state[art] = _BASIC
            beta[r] = -base_beta
            art += 1
        else:
            basis[r] = n + r
            state[n + r] = _BASIC
            beta[r] = base_beta

    # phase-2 objective: maximize sum x
    for j in range(n):
        T[obj2, j] = 1.0
    # phase-1 objective: maximize -(sum of artificials), canonicalized
    # against the artificial part of the starting basis
    for j in range(n + m, n + m + n_art):
        T[obj1, j] = -1.0
    for r in range(m):
        if slack_at_start[r] < 0.0:
            for j in range(ncols):
                T[obj1, j] += T[r, j]

    max_iter = 20000 + 60 * (m + n) if perturbed else 2 ** 31
    x = np.zeros(n, dtype=np.float64)

    if n_art > 0:
        rc = _run_phase(T, beta, basis, state, ub, m, obj1, n + m,
                        not perturbed, max_iter)
        if rc == -1:
            return _STATUS_FAIL, x, 0.0
        if rc == -2:
            return _STATUS_RETRY, x, 0.0
        infeas = 0.0
        for r in range(m):
            if basis[r] >= n + m:
                infeas += beta[r]
        if infeas > _FEAS_TOL:
            # the perturbed problem is a relaxation, so this is exact
            return _STATUS_INFEASIBLE, x, 0.0
        # drive leftover zero-valued artificials out of the basis; an
        # all-zero row is redundant and its artificial can stay basic at 0
        for r in range(m):
            if basis[r] >= n + m:
                for j in range(n + m):
                    if state[j] != _BASIC and abs(T[r, j]) > _EPS:
                        _pivot(T, beta, basis, state, m, r, j,
                               state[j] == _AT_UB, False, ub, 0.0)
                        break

    rc = _run_phase(T, beta, basis, state, ub, m, obj2, n + m,
                    not perturbed, max_iter)
    if rc == -1:
        return _STATUS_FAIL, x, 0.0
    if rc == -2:
        return _STATUS_RETRY, x, 0.0

    # recover the exact solution for the true bounds from the final basis:
    # the rhs column was never perturbed, so beta_true = T[.,rhs] minus the
    # contribution of nonbasic-at-upper-bound structural columns (u = 1)
    for j in range(n):
        if state[j] == _AT_UB:
            x[j] = 1.0
    for r in range(m):
        bt = T[r, ncols - 1]
        for j in range(n):
            if state[j] == _AT_UB and T[r, j] != 0.0:
                bt -= T[r, j]
        b = basis[r]
        if b < n:
            if bt < -_FEAS_TOL or bt > 1.0 + _FEAS_TOL:
                return _STATUS_RETRY, x, 0.0
            x[b] = min(1.0, max(0.0, bt))
        elif b < n + m:
            if bt < -_FEAS_TOL:
                return _STATUS_RETRY, x, 0.0
        else:
            if bt < -_FEAS_TOL or bt > _FEAS_TOL:
                return _STATUS_RETRY, x, 0.0
    obj = 0.0
    for j in range(n):
        obj += x[j]
    return _STATUS_OPTIMAL, x, obj


def _propagate_units(f: Formula) -> tuple[dict[int, bool], list[tuple[int, ...]], bool]:
    """Fix variables forced by unit-clause chains.

    Returns (forced, remaining_clauses, conflict). Forcing is exact for
    the relaxation: a unit clause pins its variable to 0/1 in any feasible
    point, and clauses satisfied by a pinned literal become non-binding.
    """
    forced: dict[int, bool] = {}
    clauses = [list(c) for c in f.clauses]
    while True:
        units = []
        for c in clauses:
            if len(c) == 0:
                return forced, [], True
            if len(c) == 1:
                units.append(c[0])
        if not units:
            break
        for lit in units:
            v = abs(lit)
            val = lit > 0
            if forced.get(v, val) != val:
                return forced, [], True
            forced[v] = val
        nxt = []
        for c in clauses:
            kept = []
            sat = False
            for lit in c:
                val = forced.get(abs(lit))
                if val is None:
                    kept.append(lit)
                elif val == (lit > 0):
                    sat = True
                    break
            if sat:
                continue
            if not kept:
                return forced, [], True
            nxt.append(kept)
        clauses = nxt
    return forced, [tuple(c) for c in clauses], False


def solve_lp_relaxation(f: Formula) -> LpSolution:
    """Solve the coverage relaxation of ``f``.

    Variables that occur in no clause are unconstrained and reported at
    their upper bound 1.0. Infeasibility is a status, not an error, and
    implies ``f`` is unsatisfiable.
    """
    if f.num_vars < 1:
        raise ValueError("formula must have at least one variable")

    forced, clauses, conflict = _propagate_units(f)
    if conflict:
        return LpSolution(np.zeros(f.num_vars), 0.0, INFEASIBLE)

    values = np.ones(f.num_vars, dtype=np.float64)
    for v, val in forced.items():
        values[v - 1] = 1.0 if val else 0.0

    occurring = sorted({abs(lit) for c in clauses for lit in c})
    if occurring:
        index = {v: i for i, v in enumerate(occurring)}
        total = sum(len(c) for c in clauses)
        cl_off = np.empty(len(clauses) + 1, dtype=np.int64)
        cl_var = np.empty(total, dtype=np.int64)
        cl_sign = np.empty(total, dtype=np.int64)
        pos = 0
        for r, clause in enumerate(clauses):
            cl_off[r] = pos
            for lit in clause:
                cl_var[pos] = index[abs(lit)]
                cl_sign[pos] = 1 if lit > 0 else -1
                pos += 1
        cl_off[len(clauses)] = pos

        n = len(occurring)
        status, x, _ = _solve_kernel(n, cl_off, cl_var, cl_sign, True)
        if status == _STATUS_RETRY:
            status, x, _ = _solve_kernel(n, cl_off, cl_var, cl_sign, False)
        if status == _STATUS_FAIL or status == _STATUS_RETRY:
            raise RuntimeError("simplex failed to terminate cleanly")
        if status == _STATUS_INFEASIBLE:
            return LpSolution(np.zeros(f.num_vars), 0.0, INFEASIBLE)
        for v, i in index.items():
            values[v - 1] = x[i]

    return LpSolution(values, float(values.sum()), OPTIMAL)

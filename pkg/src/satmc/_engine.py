"""Compiled CDCL search kernel.

This is a line-for-line port of the reference engine in :mod:`satmc.cdcl`
onto flat numpy arrays, compiled with numba. It must stay observably
identical to the reference: same verdicts, same models, same conflict /
decision / propagation / restart counters on every input. The differential
tests in the suite enforce this, so any change here needs the matching
change in :class:`satmc.cdcl.CdclSolver` (and vice versa).

Layout notes:
 - clause literals live in one growable int32 arena; clause k occupies
   ``lits[c_start[k] : c_start[k] + c_len[k]]`` with its two watched
   literals at offsets 0 and 1;
 - watch lists are intrusive linked lists over per-clause membership
   tokens ``2k`` and ``2k+1``; traversal order equals the reference
   engine's list order (append at tail, unlink in place);
 - a propagated literal's reason clause keeps that literal at offset 0.
"""

from __future__ import annotations

import time

import numpy as np
from numba import njit

from .cnf import Formula

_STATUS_UNSAT = 0
_STATUS_SAT = 1
_STATUS_BUDGET = 2


@njit(cache=True)
def _luby(i):
    while True:
        k = 0
        t = i
        while t > 0:
            t >>= 1
            k += 1
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1


@njit(cache=True)
def _stable_argsort_by_act(keys):
    """Stable bottom-up merge sort; returns index order of ascending keys."""
    m = keys.shape[0]
    idx = np.empty(m, dtype=np.int64)
    for i in range(m):
        idx[i] = i
    tmp = np.empty(m, dtype=np.int64)
    width = 1
    while width < m:
        lo = 0
        while lo < m:
            mid = min(lo + width, m)
            hi = min(lo + 2 * width, m)
            a, b, k = lo, mid, lo
            while a < mid and b < hi:
                if keys[idx[a]] <= keys[idx[b]]:
                    tmp[k] = idx[a]
                    a += 1
                else:
                    tmp[k] = idx[b]
                    b += 1
                k += 1
            while a < mid:
                tmp[k] = idx[a]
                a += 1
                k += 1
            while b < hi:
                tmp[k] = idx[b]
                b += 1
                k += 1
            for k2 in range(lo, hi):
                idx[k2] = tmp[k2]
            lo += 2 * width
        width *= 2
    return idx


@njit(cache=True)
def _search(nv, in_lits, in_start, init_phase, phase_saving,
            var_decay, cla_decay, luby_base, db_base, db_ramp, budget,
            assigns_out):
    n_input = in_start.shape[0] - 1

    cap_c = 2 * n_input + 1024
    cap_l = 2 * in_lits.shape[0] + 4096

    lits = np.zeros(cap_l, dtype=np.int32)
    c_start = np.zeros(cap_c, dtype=np.int64)
    c_len = np.zeros(cap_c, dtype=np.int32)
    c_learnt = np.zeros(cap_c, dtype=np.uint8)
    c_dead = np.zeros(cap_c, dtype=np.uint8)
    c_act = np.zeros(cap_c, dtype=np.float64)
    c_lbd = np.zeros(cap_c, dtype=np.int32)
    nxt = np.full(2 * cap_c, -1, dtype=np.int64)

    head = np.full(2 * nv + 2, -1, dtype=np.int64)
    tail = np.full(2 * nv + 2, -1, dtype=np.int64)

    assigns = np.full(nv + 1, -1, dtype=np.int8)
    level = np.zeros(nv + 1, dtype=np.int32)
    reason = np.full(nv + 1, -1, dtype=np.int64)
    activity = np.zeros(nv + 1, dtype=np.float64)
    saved = init_phase.copy()

    trail = np.zeros(nv + 1, dtype=np.int32)
    trail_lim = np.zeros(nv + 2, dtype=np.int32)
    tlen = 0
    n_levels = 0
    qhead = 0

    seen = np.zeros(nv + 1, dtype=np.uint8)
    learned = np.zeros(nv + 2, dtype=np.int32)
    lvl_mark = np.zeros(nv + 1, dtype=np.uint8)

    var_inc = 1.0
    cla_inc = 1.0
    n_clauses = 0
    n_lits = 0
    learned_live = 0
    reductions = 0
    conflicts = 0
    decisions = 0
    propagations = 0
    restarts = 0
    conflicts_since_restart = 0
    ok = True

    # --- load input clauses (attach watches, enqueue root units) ---
    for k in range(n_input):
        s = in_start[k]
        ln = in_start[k + 1] - s
        cid = n_clauses
        c_start[cid] = n_lits
        c_len[cid] = ln
        for j in range(ln):
            lits[n_lits + j] = in_lits[s + j]
        n_lits += ln
        n_clauses += 1
        if ln == 0:
            ok = False
        elif ln == 1:
            lit = lits[c_start[cid]]
            v = lit if lit > 0 else -lit
            val = 1 if lit > 0 else 0
            if assigns[v] == -1:
                assigns[v] = val
                level[v] = 0
                reason[v] = cid
                trail[tlen] = lit
                tlen += 1
                propagations += 1
            elif assigns[v] != val:
                ok = False
        else:
            for slot in range(2):
                w = lits[c_start[cid] + slot]
                code = (w << 1) if w > 0 else ((-w) << 1) | 1
                tok = 2 * cid + slot
                nxt[tok] = -1
                if head[code] == -1:
                    head[code] = tok
                else:
                    nxt[tail[code]] = tok
                tail[code] = tok

    if not ok:
        return _STATUS_UNSAT, conflicts, decisions, propagations, restarts

    while True:
        # --------------------------- propagate ---------------------------
        confl = -1
        while qhead < tlen:
            lit = trail[qhead]
            qhead += 1
            false_lit = -lit
            code = (false_lit << 1) if false_lit > 0 else ((-false_lit) << 1) | 1
            prev = -1
            tok = head[code]
            while tok != -1:
                tok_next = nxt[tok]
                cid = tok >> 1
                if c_dead[cid] == 1:
                    if prev == -1:
                        head[code] = tok_next
                    else:
                        nxt[prev] = tok_next
                    if tail[code] == tok:
                        tail[code] = prev
                    tok = tok_next
                    continue
                s = c_start[cid]
                if lits[s] == false_lit:
                    lits[s], lits[s + 1] = lits[s + 1], lits[s]
                first = lits[s]
                fv = first if first > 0 else -first
                fa = assigns[fv]
                if fa != -1 and (fa == 1) == (first > 0):
                    prev = tok
                    tok = tok_next
                    continue
                moved = False
                for j in range(s + 2, s + c_len[cid]):
                    lj = lits[j]
                    vj = lj if lj > 0 else -lj
                    aj = assigns[vj]
                    if aj == -1 or (aj == 1) == (lj > 0):
                        lits[j] = lits[s + 1]
                        lits[s + 1] = lj
                        if prev == -1:
                            head[code] = tok_next
                        else:
                            nxt[prev] = tok_next
                        if tail[code] == tok:
                            tail[code] = prev
                        ncode = (lj << 1) if lj > 0 else ((-lj) << 1) | 1
                        nxt[tok] = -1
                        if head[ncode] == -1:
                            head[ncode] = tok
                        else:
                            nxt[tail[ncode]] = tok
                        tail[ncode] = tok
                        moved = True
                        break
                if moved:
                    tok = tok_next
                    continue
                if fa != -1:   # first is false: conflict
                    confl = cid
                    break
                assigns[fv] = 1 if first > 0 else 0
                level[fv] = n_levels
                reason[fv] = cid
                trail[tlen] = first
                tlen += 1
                propagations += 1
                prev = tok
                tok = tok_next
            if confl != -1:
                break

        if confl != -1:
            # ------------------------- conflict --------------------------
            conflicts += 1
            conflicts_since_restart += 1
            if n_levels == 0:
                return _STATUS_UNSAT, conflicts, decisions, propagations, restarts
            if budget >= 0 and conflicts >= budget:
                return _STATUS_BUDGET, conflicts, decisions, propagations, restarts

            # first-UIP analysis
            lcount = 1
            counter = 0
            p = 0
            idx = tlen - 1
            cid = confl
            while True:
                if c_learnt[cid] == 1:
                    c_act[cid] += cla_inc
                    if c_act[cid] > 1e20:
                        for k in range(n_clauses):
                            if c_learnt[k] == 1:
                                c_act[k] *= 1e-20
                        cla_inc *= 1e-20
                s = c_start[cid]
                j0 = 0 if p == 0 else 1
                for j in range(s + j0, s + c_len[cid]):
                    q = lits[j]
                    v = q if q > 0 else -q
                    if seen[v] == 0 and level[v] > 0:
                        seen[v] = 1
                        activity[v] += var_inc
                        if activity[v] > 1e100:
                            for u in range(1, nv + 1):
                                activity[u] *= 1e-100
                            var_inc *= 1e-100
                        if level[v] == n_levels:
                            counter += 1
                        else:
                            learned[lcount] = q
                            lcount += 1
                while True:
                    tv = trail[idx]
                    tvv = tv if tv > 0 else -tv
                    if seen[tvv] == 1:
                        break
                    idx -= 1
                p = trail[idx]
                idx -= 1
                counter -= 1
                if counter == 0:
                    break
                cid = reason[p if p > 0 else -p]
            learned[0] = -p

            if lcount == 1:
                bt = 0
            else:
                max_i = 1
                ml = level[learned[1] if learned[1] > 0 else -learned[1]]
                for i in range(2, lcount):
                    li = level[learned[i] if learned[i] > 0 else -learned[i]]
                    if li > ml:
                        max_i = i
                        ml = li
                learned[1], learned[max_i] = learned[max_i], learned[1]
                bt = ml
            lbd = 0
            for i in range(lcount):
                q = learned[i]
                lv = level[q if q > 0 else -q]
                if lvl_mark[lv] == 0:
                    lvl_mark[lv] = 1
                    lbd += 1
            for i in range(lcount):
                q = learned[i]
                lvl_mark[level[q if q > 0 else -q]] = 0
                seen[q if q > 0 else -q] = 0
            # clear remaining seen flags (vars resolved away during analysis)
            for k in range(idx + 1, tlen):
                tv = trail[k]
                seen[tv if tv > 0 else -tv] = 0

            # backjump
            if n_levels > bt:
                limit = trail_lim[bt]
                for k in range(tlen - 1, limit - 1, -1):
                    tv = trail[k]
                    v = tv if tv > 0 else -tv
                    saved[v] = assigns[v]
                    assigns[v] = -1
                    reason[v] = -1
                tlen = limit
                n_levels = bt
                qhead = tlen

            # add learned clause
            if n_clauses == cap_c:
                cap_c *= 2
                c_start = np.concatenate((c_start, np.zeros(cap_c // 2, dtype=np.int64)))
                c_len = np.concatenate((c_len, np.zeros(cap_c // 2, dtype=np.int32)))
                c_learnt = np.concatenate((c_learnt, np.zeros(cap_c // 2, dtype=np.uint8)))
                c_dead = np.concatenate((c_dead, np.zeros(cap_c // 2, dtype=np.uint8)))
                c_act = np.concatenate((c_act, np.zeros(cap_c // 2, dtype=np.float64)))
                c_lbd = np.concatenate((c_lbd, np.zeros(cap_c // 2, dtype=np.int32)))
                nxt = np.concatenate((nxt, np.full(cap_c, -1, dtype=np.int64)))
            if n_lits + lcount > cap_l:
                cap_l = 2 * (n_lits + lcount)
                lits = np.concatenate((lits, np.zeros(cap_l - lits.shape[0], dtype=np.int32)))
            cid = n_clauses
            n_clauses += 1
            c_start[cid] = n_lits
            c_len[cid] = lcount
            for i in range(lcount):
                lits[n_lits + i] = learned[i]
            n_lits += lcount
            c_learnt[cid] = 1
            c_dead[cid] = 0
            c_lbd[cid] = lbd
            c_act[cid] = cla_inc
            if cla_inc > 1e20:
                for k in range(n_clauses):
                    if c_learnt[k] == 1:
                        c_act[k] *= 1e-20
                cla_inc *= 1e-20
            learned_live += 1
            if lcount >= 2:
                for slot in range(2):
                    w = lits[c_start[cid] + slot]
                    code = (w << 1) if w > 0 else ((-w) << 1) | 1
                    tok = 2 * cid + slot
                    nxt[tok] = -1
                    if head[code] == -1:
                        head[code] = tok
                    else:
                        nxt[tail[code]] = tok
                    tail[code] = tok

            # assert learned[0]
            al = learned[0]
            av = al if al > 0 else -al
            assigns[av] = 1 if al > 0 else 0
            level[av] = n_levels
            reason[av] = cid
            trail[tlen] = al
            tlen += 1
            propagations += 1

            var_inc /= var_decay
            cla_inc /= cla_decay

            # reduce learned DB
            if learned_live > db_base + db_ramp * reductions:
                m = 0
                for k in range(n_clauses):
                    if c_learnt[k] == 1 and c_dead[k] == 0 and c_lbd[k] > 2:
                        f0 = lits[c_start[k]]
                        fv0 = f0 if f0 > 0 else -f0
                        if not (assigns[fv0] != -1 and reason[fv0] == k):
                            m += 1
                cand = np.empty(m, dtype=np.int64)
                keys = np.empty(m, dtype=np.float64)
                m = 0
                for k in range(n_clauses):
                    if c_learnt[k] == 1 and c_dead[k] == 0 and c_lbd[k] > 2:
                        f0 = lits[c_start[k]]
                        fv0 = f0 if f0 > 0 else -f0
                        if not (assigns[fv0] != -1 and reason[fv0] == k):
                            cand[m] = k
                            keys[m] = c_act[k]
                            m += 1
                order = _stable_argsort_by_act(keys)
                for t in range(m // 2):
                    c_dead[cand[order[t]]] = 1
                    learned_live -= 1
                reductions += 1

            # restart
            if conflicts_since_restart >= luby_base * _luby(restarts + 1):
                restarts += 1
                conflicts_since_restart = 0
                if n_levels > 0:
                    limit = trail_lim[0]
                    for k in range(tlen - 1, limit - 1, -1):
                        tv = trail[k]
                        v = tv if tv > 0 else -tv
                        saved[v] = assigns[v]
                        assigns[v] = -1
                        reason[v] = -1
                    tlen = limit
                    n_levels = 0
                    qhead = tlen
        else:
            # --------------------------- decide ---------------------------
            if tlen == nv:
                for v in range(nv + 1):
                    assigns_out[v] = assigns[v]
                return _STATUS_SAT, conflicts, decisions, propagations, restarts
            best = 0
            best_act = -1.0
            for v in range(1, nv + 1):
                if assigns[v] == -1 and activity[v] > best_act:
                    best = v
                    best_act = activity[v]
            trail_lim[n_levels] = tlen
            n_levels += 1
            ph = saved[best] if phase_saving else init_phase[best]
            lit = best if ph == 1 else -best
            assigns[best] = ph
            level[best] = n_levels
            reason[best] = -1
            trail[tlen] = lit
            tlen += 1
            decisions += 1


def solve_compiled(f: Formula, cfg, hints: dict[int, bool] | None):
    """Array marshalling wrapper around the compiled kernel."""
    from .cdcl import (BUDGET_EXHAUSTED, POLARITY_HINTS, SAT, UNSAT,
                       SolveResult, SolveStats)

    nv = f.num_vars
    total = sum(len(c) for c in f.clauses)
    in_lits = np.empty(total, dtype=np.int32)
    in_start = np.empty(len(f.clauses) + 1, dtype=np.int64)
    pos = 0
    for i, clause in enumerate(f.clauses):
        in_start[i] = pos
        for lit in clause:
            in_lits[pos] = lit
            pos += 1
    in_start[len(f.clauses)] = pos

    init_phase = np.zeros(nv + 1, dtype=np.int8)
    if cfg.polarity_mode == POLARITY_HINTS:
        for v in range(1, nv + 1):
            init_phase[v] = 1 if hints[v] else 0

    budget = -1 if cfg.conflict_budget is None else cfg.conflict_budget
    assigns_out = np.full(nv + 1, -1, dtype=np.int8)

    t0 = time.perf_counter()
    status, conflicts, decisions, propagations, restarts = _search(
        nv, in_lits, in_start, init_phase, cfg.phase_saving,
        cfg.var_decay, cfg.clause_decay, cfg.luby_base,
        cfg.db_keep_base, cfg.db_keep_ramp, budget, assigns_out)
    wall_ms = (time.perf_counter() - t0) * 1000.0

    stats = SolveStats(int(conflicts), int(decisions), int(propagations),
                       int(restarts), wall_ms)
    if status == _STATUS_SAT:
        model = {v: bool(assigns_out[v] == 1) for v in range(1, nv + 1)}
        return SolveResult(SAT, model, stats)
    if status == _STATUS_UNSAT:
        return SolveResult(UNSAT, None, stats)
    return SolveResult(BUDGET_EXHAUSTED, None, stats)

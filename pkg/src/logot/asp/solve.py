"""Stable-model search over a :class:`~logot.asp.ground.GroundProgram`.

The program is compiled to its Clark completion (one auxiliary variable per
multi-literal body) plus counting constraints for choice bounds and the
optimization bound.  Search is unit propagation with two watched literals,
false-first decisions ordered by conflict activity (ties broken by a fixed
atom order, so runs are deterministic), conflict analysis with backjumping,
Luby restarts, and unfounded-set propagation over the non-tight part of the program:
whenever propagation reaches a fixpoint, atoms of a positive cycle that
have lost all support are falsified, with the loop formula as reason.

Disjunctive rules are shifted (``a ; b :- B`` becomes ``a :- B, not b`` and
``b :- B, not a``), which preserves stable models for head-cycle-free
programs; anything else is rejected.
"""

from __future__ import annotations

import heapq
import random
import time
from dataclasses import dataclass, field
from typing import Optional

from .ground import GroundProgram, check_head_cycle_free, positive_sccs

__all__ = ["SAT", "UNSAT", "OPTIMUM", "TIMEOUT", "SolveOptions", "AnswerSet", "SolveResult", "solve"]

SAT = "SAT"
UNSAT = "UNSAT"
OPTIMUM = "OPTIMUM"
TIMEOUT = "TIMEOUT"


@dataclass(frozen=True)
class SolveOptions:
    """``max_models`` of ``None`` (or 0) enumerates all models."""

    max_models: Optional[int] = 1
    optimize: bool = True
    timeout: float = 60.0
    decision_order: int = 0  # 0: atom ids ascending; otherwise a seeded permutation

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.max_models is not None and self.max_models < 0:
            raise ValueError("max_models must be non-negative or None")


@dataclass(frozen=True)
class AnswerSet:
    atoms: frozenset
    cost: Optional[int] = None
    symbols: tuple = field(default=(), compare=False)

    def __contains__(self, item) -> bool:
        if isinstance(item, str):
            return item in self.symbols
        return item in self.atoms

    def __str__(self) -> str:
        return " ".join(self.symbols)


@dataclass
class SolveResult:
    status: str
    models: list
    statistics: dict

    @property
    def cost(self) -> Optional[int]:
        return self.models[0].cost if self.models else None

    @property
    def satisfiable(self) -> bool:
        return bool(self.models)


_ACTIVITY_DECAY = 0.95
_RESTART_UNIT = 100


def _luby(i: int) -> int:
    """i-th element (1-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


class _Timeout(Exception):
    pass


class _Weight:
    """sum(w_i * [l_i]) >= k, enforced when ``cond`` is true (or always if cond < 0)."""

    __slots__ = ("lits", "weights", "k", "cond", "slack", "maxw", "search")

    def __init__(self, search, lits, weights, k, cond):
        self.search = search
        self.lits = lits
        self.weights = weights
        self.k = k
        self.cond = cond
        self.maxw = max(weights) if weights else 0
        value = search.value
        self.slack = sum(w for l, w in zip(lits, weights) if value[l] != -1) - k

    def explain(self, v):
        s = self.search
        value, tpos = s.value, s.tpos
        limit = tpos[v] if v else len(s.trail)
        out = [l for l in self.lits if value[l] == -1 and tpos[l >> 1] < limit]
        c = self.cond
        if c >= 0 and (c >> 1) != v:
            out.append(c ^ 1)
        return out


class _Search:
    def __init__(self, g: GroundProgram, opts: SolveOptions, deadline: float):
        self.g = g
        self.deadline = deadline
        self.decisions = 0
        self.conflicts = 0
        n = g.num_atoms
        self.nvars = n + 2  # var 0 unused, var 1 is constant true, atoms at 2..n+1
        self.clauses_init: list = []
        self.weights_init: list = []
        self.bodies: dict = {}
        self.unsat = False
        self.supports: list = [[] for _ in range(n)]
        self.normal: list = []  # (head atom, body literal, pos atoms) after shifting
        self._compile()
        self._setup(opts)

    # -- compilation ------------------------------------------------------

    @staticmethod
    def atom_lit(a: int) -> int:
        return 2 * (a + 2)

    def _new_var(self) -> int:
        v = self.nvars
        self.nvars += 1
        return v

    def _body(self, pos, neg) -> int:
        pos = tuple(sorted(set(pos)))
        neg = tuple(sorted(set(neg)))
        key = (pos, neg)
        lit = self.bodies.get(key)
        if lit is not None:
            return lit
        lits = [self.atom_lit(a) for a in pos] + [self.atom_lit(a) ^ 1 for a in neg]
        if not lits:
            lit = 2  # true
        elif len(lits) == 1:
            lit = lits[0]
        else:
            lit = 2 * self._new_var()
            for l in lits:
                self.clauses_init.append([lit ^ 1, l])
            self.clauses_init.append([lit] + [l ^ 1 for l in lits])
        self.bodies[key] = lit
        return lit

    def _compile(self):
        g = self.g
        for r in g.rules:
            if r.kind == "constraint":
                self.clauses_init.append([self.atom_lit(a) ^ 1 for a in r.pos] + [self.atom_lit(a) for a in r.neg])
                continue
            if r.kind == "rule":
                for h in r.head:
                    others = [x for x in r.head if x != h]
                    body = self._body(r.pos, tuple(r.neg) + tuple(others))
                    self.clauses_init.append([body ^ 1, self.atom_lit(h)])
                    self.supports[h].append(body)
                    self.normal.append((h, body, r.pos))
                continue
            body = self._body(r.pos, r.neg)
            for h in r.head:
                self.supports[h].append(body)
                self.normal.append((h, body, r.pos))
            heads = [self.atom_lit(h) for h in dict.fromkeys(r.head)]
            m = len(heads)
            if r.lower is not None and r.lower > 0:
                if r.lower > m:
                    self.clauses_init.append([body ^ 1])
                else:
                    self.weights_init.append((heads, [1] * m, r.lower, body))
            if r.upper is not None and r.upper < m:
                if r.upper < 0:
                    self.clauses_init.append([body ^ 1])
                else:
                    self.weights_init.append(([l ^ 1 for l in heads], [1] * m, m - r.upper, body))
        for a in range(g.num_atoms):
            lit = self.atom_lit(a)
            self.clauses_init.append([lit ^ 1] + self.supports[a])

        # minimize as "sum of satisfied costs <= bound", switched on after the first model
        net: dict = {}
        for w, a in g.minimize:
            net[a] = net.get(a, 0) + w
        self.cost_terms = [(w, a) for a, w in net.items() if w != 0]
        self.has_minimize = bool(g.minimize)

    def _setup(self, opts: SolveOptions):
        nv = self.nvars
        self.value = [0] * (2 * nv)
        self.level = [0] * nv
        self.reason: list = [None] * nv
        self.tpos = [0] * nv
        self.trail: list = []
        self.trail_lim: list = []
        self.qhead = 0
        self.watches: list = [[] for _ in range(2 * nv)]
        self.wocc: list = [[] for _ in range(2 * nv)]  # false-literal -> [(constraint, weight)]
        self.wcond: list = [[] for _ in range(2 * nv)]  # true-literal -> [constraint]
        self.scc_watch: list = [[] for _ in range(2 * nv)]  # false-literal -> [component]
        self.dirty: set = set()
        self.pending: list = []
        self.learnts = 0
        self.cost_wc = None

        order = list(range(2, self.g.num_atoms + 2))
        if opts.decision_order:
            random.Random(opts.decision_order).shuffle(order)
        self.order_pos = [0] * nv
        for i, v in enumerate(order):
            self.order_pos[v] = i
        self.activity = [0.0] * nv
        self.var_inc = 1.0
        self.heap = [(0.0, i, v) for i, v in enumerate(order)]  # already a valid heap
        self.in_heap = [False] * nv
        for v in order:
            self.in_heap[v] = True
        self.restart_count = 0
        self.restart_left = _RESTART_UNIT * _luby(1)

        self._enqueue(2, None)
        units = []
        for c in self.clauses_init:
            c = self._normalize(c)
            if c is None:
                continue
            if not c:
                self.unsat = True
                continue
            if len(c) == 1:
                units.append(c)
            else:
                self._attach(c)
        for lits, weights, k, cond in self.weights_init:
            self._add_weight(lits, weights, k, cond)
        self._build_ufs()
        for c in units:
            l = c[0]
            if self.value[l] == -1:
                self.unsat = True
            elif self.value[l] == 0:
                self._enqueue(l, None)

    @staticmethod
    def _normalize(c):
        s = set(c)
        if 3 in s:  # false literal of the constant
            s.discard(3)
        for l in s:
            if l ^ 1 in s or l == 2:
                return None
        return sorted(s)

    def _attach(self, c):
        self.watches[c[0]].append(c)
        self.watches[c[1]].append(c)

    def _add_weight(self, lits, weights, k, cond):
        wc = _Weight(self, lits, weights, k, cond)
        for l, w in zip(lits, weights):
            self.wocc[l].append((wc, w))
        if cond >= 0:
            self.wcond[cond].append(wc)
        self.pending.append(wc)
        return wc

    def _build_ufs(self):
        """Index the cyclic components of the positive dependency graph."""
        comp_of = {}
        comps = []
        for c in positive_sccs(self.g):
            comps.append(c)
        self.scc_atoms: list = []
        self.scc_rules: list = []
        self.scc_dep: list = []
        self_loop = set()
        for h, _, pos in self.normal:
            if h in pos:
                self_loop.add(h)
        for c in comps:
            if len(c) == 1 and c[0] not in self_loop:
                continue
            sid = len(self.scc_atoms)
            for a in c:
                comp_of[a] = sid
            self.scc_atoms.append([a + 2 for a in sorted(c)])
            self.scc_rules.append([])
            self.scc_dep.append({})
        for h, body, pos in self.normal:
            sid = comp_of.get(h)
            if sid is None:
                continue
            internal = tuple(sorted({p + 2 for p in pos if comp_of.get(p) == sid}))
            ri = len(self.scc_rules[sid])
            self.scc_rules[sid].append((h + 2, body, internal))
            for p in internal:
                self.scc_dep[sid].setdefault(p, []).append(ri)
        for sid, atoms in enumerate(self.scc_atoms):
            watched = {2 * v for v in atoms}
            watched.update(body for _, body, _ in self.scc_rules[sid])
            for l in watched:
                self.scc_watch[l].append(sid)
            self.dirty.add(sid)

    # -- assignment -------------------------------------------------------

    def _enqueue(self, lit, reason):
        v = lit >> 1
        value = self.value
        value[lit] = 1
        value[lit ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.tpos[v] = len(self.trail)
        self.trail.append(lit)
        f = lit ^ 1
        for wc, w in self.wocc[f]:
            wc.slack -= w
        for sid in self.scc_watch[f]:
            self.dirty.add(sid)

    def _backtrack(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        lim = self.trail_lim[lvl]
        trail, value, reason, wocc, order_pos = self.trail, self.value, self.reason, self.wocc, self.order_pos
        in_heap, heap, activity = self.in_heap, self.heap, self.activity
        natoms = self.g.num_atoms + 2
        for i in range(len(trail) - 1, lim - 1, -1):
            p = trail[i]
            v = p >> 1
            value[p] = 0
            value[p ^ 1] = 0
            reason[v] = None
            for wc, w in wocc[p ^ 1]:
                wc.slack += w
            if not in_heap[v] and 2 <= v < natoms:
                in_heap[v] = True
                heapq.heappush(heap, (-activity[v], order_pos[v], v))
        del trail[lim:]
        del self.trail_lim[lvl:]
        self.qhead = lim
        self.dirty.clear()

    # -- propagation ------------------------------------------------------

    def _check_weight(self, wc):
        """Returns a conflict (list of false literals) or None."""
        value = self.value
        slack = wc.slack
        c = wc.cond
        if slack < 0:
            if c < 0 or value[c] == 1:
                return wc.explain(0)
            if value[c] == 0:
                self._enqueue(c ^ 1, wc)
            return None
        if slack >= wc.maxw or (c >= 0 and value[c] != 1):
            return None
        for l, w in zip(wc.lits, wc.weights):
            if w > slack and value[l] == 0:
                self._enqueue(l, wc)
        return None

    def _propagate(self):
        value = self.value
        watches = self.watches
        trail = self.trail
        while True:
            if self.pending:
                pend, self.pending = self.pending, []
                for wc in pend:
                    confl = self._check_weight(wc)
                    if confl is not None:
                        return confl
            while self.qhead < len(trail):
                p = trail[self.qhead]
                self.qhead += 1
                f = p ^ 1
                ws = watches[f]
                i = 0
                n = len(ws)
                keep = []
                while i < n:
                    c = ws[i]
                    i += 1
                    if c[0] == f:
                        c[0], c[1] = c[1], f
                    first = c[0]
                    if value[first] == 1:
                        keep.append(c)
                        continue
                    for k in range(2, len(c)):
                        l = c[k]
                        if value[l] != -1:
                            c[1] = l
                            c[k] = f
                            watches[l].append(c)
                            break
                    else:
                        keep.append(c)
                        if value[first] == -1:
                            keep.extend(ws[i:])
                            watches[f] = keep
                            return c
                        self._enqueue(first, c)
                watches[f] = keep
                for wc, _ in self.wocc[f]:
                    confl = self._check_weight(wc)
                    if confl is not None:
                        return confl
                for wc in self.wcond[p]:
                    confl = self._check_weight(wc)
                    if confl is not None:
                        return confl
            if not self.dirty:
                return None
            confl = self._unfounded()
            if confl is not None:
                return confl
            if self.qhead == len(trail) and not self.pending:
                return None

    def _unfounded(self):
        value = self.value
        for sid in sorted(self.dirty):
            self.dirty.discard(sid)
            rules = self.scc_rules[sid]
            dep = self.scc_dep[sid]
            cnt = [len(r[2]) for r in rules]
            founded = set()
            stack = [ri for ri, r in enumerate(rules) if not r[2] and value[r[1]] != -1]
            while stack:
                h = rules[stack.pop()][0]
                if h in founded or value[2 * h] == -1:
                    continue
                founded.add(h)
                for ri in dep.get(h, ()):
                    cnt[ri] -= 1
                    if cnt[ri] == 0 and value[rules[ri][1]] != -1:
                        stack.append(ri)
            unfounded = [v for v in self.scc_atoms[sid] if v not in founded and value[2 * v] != -1]
            if not unfounded:
                continue
            uset = set(unfounded)
            ext = []
            seen = set()
            for h, body, internal in rules:
                if h in uset and body not in seen and not any(p in uset for p in internal):
                    seen.add(body)
                    ext.append(body)
            for v in unfounded:
                lit = 2 * v
                if value[lit] == 1:
                    return ext + [lit ^ 1]
                if value[lit] == 0:
                    self._enqueue(lit ^ 1, ext)
            self.dirty.add(sid)
            return None
        return None

    # -- conflict analysis ------------------------------------------------

    def _reason_lits(self, v):
        r = self.reason[v]
        if type(r) is list:
            return r
        return r.explain(v)

    def _analyze(self, confl):
        level, trail = self.level, self.trail
        dl = len(self.trail_lim)
        seen = set()
        learnt = [0]
        path = 0
        idx = len(trail) - 1
        pv = -1
        lits = confl
        bump = self._bump
        while True:
            for q in lits:
                v = q >> 1
                if v == pv or v in seen or level[v] == 0:
                    continue
                seen.add(v)
                bump(v)
                if level[v] == dl:
                    path += 1
                else:
                    learnt.append(q)
            while (trail[idx] >> 1) not in seen:
                idx -= 1
            p = trail[idx]
            idx -= 1
            pv = p >> 1
            seen.discard(pv)
            path -= 1
            if path == 0:
                break
            lits = self._reason_lits(pv)
        learnt[0] = p ^ 1
        # drop literals implied by the rest of the clause (local minimization)
        if len(learnt) > 2:
            marks = {l >> 1 for l in learnt[1:]}
            kept = [learnt[0]]
            for q in learnt[1:]:
                r = self.reason[q >> 1]
                if r is None or any(
                    (x >> 1) != (q >> 1) and (x >> 1) not in marks and level[x >> 1] > 0 for x in self._reason_lits(q >> 1)
                ):
                    kept.append(q)
            learnt = kept
        if len(learnt) == 1:
            return learnt, 0
        best = 1
        for i in range(2, len(learnt)):
            if level[learnt[i] >> 1] > level[learnt[best] >> 1]:
                best = i
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _bump(self, v):
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for i in range(len(act)):
                act[i] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[u], self.order_pos[u], u) for u in range(len(act)) if self.in_heap[u]]
            heapq.heapify(self.heap)
        elif self.in_heap[v]:
            heapq.heappush(self.heap, (-act[v], self.order_pos[v], v))

    def _learn(self, learnt, bt):
        self._backtrack(bt)
        if len(learnt) == 1:
            self._enqueue(learnt[0], None)
        else:
            self._attach(learnt)
            self.learnts += 1
            self._enqueue(learnt[0], learnt)

    # -- search -----------------------------------------------------------

    def _pick(self):
        heap, value, act, in_heap = self.heap, self.value, self.activity, self.in_heap
        while heap:
            a, _, v = heapq.heappop(heap)
            if -a != act[v]:
                continue  # stale entry; a fresher one is queued
            in_heap[v] = False
            if value[2 * v] == 0:
                return v
        return None

    def next_model(self):
        """Advance to the next total assignment; False when the space is exhausted."""
        if self.unsat:
            return False
        deadline = self.deadline
        ticks = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                if not self.trail_lim:
                    self.unsat = True
                    return False
                learnt, bt = self._analyze(confl)
                self._learn(learnt, bt)
                self.var_inc /= _ACTIVITY_DECAY
                self.restart_left -= 1
                if self.restart_left <= 0 and self.trail_lim:
                    self.restart_count += 1
                    self.restart_left = _RESTART_UNIT * _luby(self.restart_count + 1)
                    self._backtrack(0)
                continue
            ticks += 1
            if ticks & 63 == 0 and time.monotonic() > deadline:
                raise _Timeout
            v = self._pick()
            if v is None:
                return True
            self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(2 * v + 1, None)

    def model_atoms(self) -> frozenset:
        value = self.value
        return frozenset(a for a in range(self.g.num_atoms) if value[2 * (a + 2)] == 1)

    def block(self):
        """Exclude the current model; False if it was the last one."""
        dl = len(self.trail_lim)
        if dl == 0:
            self.unsat = True
            return False
        decisions = [self.trail[self.trail_lim[i]] ^ 1 for i in range(dl - 1, -1, -1)]
        self._backtrack(dl - 1)
        if len(decisions) == 1:
            self._enqueue(decisions[0], None)
        else:
            self._attach(decisions)
            self._enqueue(decisions[0], decisions)
        return True

    def bound_cost(self, bound):
        """Require cost <= bound from now on (restarts at level 0)."""
        self._backtrack(0)
        pos_total = sum(w for w, _ in self.cost_terms if w > 0)
        k = pos_total - bound
        if self.cost_wc is None:
            lits, weights = [], []
            for w, a in self.cost_terms:
                lit = self.atom_lit(a)
                if w > 0:
                    lits.append(lit ^ 1)
                    weights.append(w)
                else:
                    lits.append(lit)
                    weights.append(-w)
            self.cost_wc = self._add_weight(lits, weights, k, -1)
        else:
            wc = self.cost_wc
            wc.slack -= k - wc.k
            wc.k = k
            self.pending.append(wc)

    def cost(self, atoms) -> Optional[int]:
        if not self.has_minimize:
            return None
        return sum(w for w, a in self.cost_terms if a in atoms)


def _answer(g: GroundProgram, atoms: frozenset, cost) -> AnswerSet:
    visible = [a for a in atoms if a not in g.hidden]
    symbols = tuple(sorted((g.symbol(a) for a in visible), key=_symbol_key))
    return AnswerSet(atoms, cost, symbols)


def _symbol_key(s: str):
    return (s.lstrip("-"), s.startswith("-"))


def solve(g: GroundProgram, opts: Optional[SolveOptions] = None) -> SolveResult:
    opts = opts or SolveOptions()
    check_head_cycle_free(g)
    start = time.monotonic()
    deadline = start + opts.timeout
    limit = opts.max_models or None
    models: list = []
    searches: list = []

    def stats(status):
        return {
            "decisions": sum(s.decisions for s in searches),
            "conflicts": sum(s.conflicts for s in searches),
            "ground_rules": len(g.rules),
            "wall_time": time.monotonic() - start,
        }

    optimizing = opts.optimize and bool(g.minimize)
    best = None
    try:
        if not optimizing:
            s = _Search(g, opts, deadline)
            searches.append(s)
            while (limit is None or len(models) < limit) and s.next_model():
                atoms = s.model_atoms()
                models.append(_answer(g, atoms, s.cost(atoms)))
                if not s.block():
                    break
            status = SAT if models else UNSAT
            return SolveResult(status, models, stats(status))

        s = _Search(g, opts, deadline)
        searches.append(s)
        while s.next_model():
            atoms = s.model_atoms()
            best = _answer(g, atoms, s.cost(atoms))
            s.bound_cost(best.cost - 1)
        if best is None:
            return SolveResult(UNSAT, [], stats(UNSAT))
        models.append(best)
        if limit is None or limit > 1:
            # enumerate the remaining optimal models
            s2 = _Search(g, opts, deadline)
            searches.append(s2)
            s2.bound_cost(best.cost)
            while (limit is None or len(models) < limit) and s2.next_model():
                atoms = s2.model_atoms()
                if atoms != best.atoms:
                    models.append(_answer(g, atoms, s2.cost(atoms)))
                if not s2.block():
                    break
        return SolveResult(OPTIMUM, models, stats(OPTIMUM))
    except _Timeout:
        if optimizing and best is not None and not models:
            models.append(best)
        return SolveResult(TIMEOUT, models, stats(TIMEOUT))

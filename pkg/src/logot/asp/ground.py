"""Bottom-up instantiation of a :class:`~logot.asp.syntax.Program`.

Predicates are grounded component by component in dependency order;
recursive components use semi-naive evaluation.  Only atoms derivable
from facts through positive bodies are instantiated.  Atoms that are
certainly true (derived through definite, fully-known bodies) are folded
away from rule bodies, and negative literals over atoms that can never
be derived are dropped.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .syntax import (
    Atom,
    BinOp,
    Choice,
    Comparison,
    Const,
    ConstDecl,
    Disjunction,
    Fun,
    Interval,
    Literal,
    Minimize,
    Neg,
    Num,
    Program,
    Rule,
    Var,
    format_statement,
)

__all__ = [
    "GroundingError",
    "UnsafeRuleError",
    "UnboundConstantError",
    "UnsupportedProgramError",
    "positive_sccs",
    "check_head_cycle_free",
    "GroundRule",
    "GroundProgram",
    "ground",
    "format_value",
    "format_ground_atom",
    "DEFAULT_GROUND_LIMIT",
]

DEFAULT_GROUND_LIMIT = 5_000_000


class GroundingError(Exception):
    pass


class UnsafeRuleError(GroundingError):
    def __init__(self, rule_text: str, variable: str):
        self.rule = rule_text
        self.variable = variable
        super().__init__(f"unsafe variable {variable} in rule: {rule_text}")


class UnboundConstantError(GroundingError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"constant {name!r} is used arithmetically but has no #const value")


class UnsupportedProgramError(GroundingError):
    """Disjunctive program with a head cycle: shifting would change its models."""


class _Undefined(Exception):
    """Arithmetic over a non-integer; the instance is silently discarded."""


# ---------------------------------------------------------------------------
# Ground values
#
# int -> integer, str -> symbolic constant, tuple -> function term (name, *args)
# ---------------------------------------------------------------------------


def format_value(v) -> str:
    if isinstance(v, tuple):
        return f"{v[0]}({', '.join(format_value(a) for a in v[1:])})"
    return str(v)


def format_ground_atom(key) -> str:
    name, args = key
    if not args:
        return name
    return f"{name}({', '.join(format_value(a) for a in args)})"


def _order_key(v):
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, str):
        return (1, v)
    return (2, len(v) - 1, v[0], tuple(_order_key(a) for a in v[1:]))


def _compare(op: str, a, b) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if not (isinstance(a, int) and isinstance(b, int)):
        a, b = _order_key(a), _order_key(b)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


# ---------------------------------------------------------------------------
# Compiled terms: ('c', value) | ('v', name) | ('f', name, args) | ('b', op, l, r)
#                 | ('n', t) | ('i', lo, hi)
# ---------------------------------------------------------------------------


def _compile_term(term, consts: dict, fresh):
    if isinstance(term, Num):
        return ("c", term.value)
    if isinstance(term, Const):
        if term.name in consts:
            return ("c", consts[term.name])
        return ("c", term.name)
    if isinstance(term, Var):
        if term.name == "_":
            return ("v", next(fresh))
        return ("v", term.name)
    if isinstance(term, Fun):
        args = tuple(_compile_term(a, consts, fresh) for a in term.args)
        if all(a[0] == "c" for a in args):
            return ("c", (term.name,) + tuple(a[1] for a in args))
        return ("f", term.name, args)
    if isinstance(term, BinOp):
        left = _compile_arith(term.left, consts, fresh)
        right = _compile_arith(term.right, consts, fresh)
        if left[0] == "c" and right[0] == "c":
            return ("c", _arith(term.op, left[1], right[1]))
        return ("b", term.op, left, right)
    if isinstance(term, Neg):
        inner = _compile_arith(term.arg, consts, fresh)
        if inner[0] == "c":
            return ("c", _arith("-", 0, inner[1]))
        return ("n", inner)
    if isinstance(term, Interval):
        return ("i", _compile_arith(term.lo, consts, fresh), _compile_arith(term.hi, consts, fresh))
    raise TypeError(term)


def _compile_arith(term, consts, fresh):
    if isinstance(term, Const) and term.name not in consts:
        raise UnboundConstantError(term.name)
    if isinstance(term, Interval):
        raise GroundingError("interval inside an arithmetic expression")
    return _compile_term(term, consts, fresh)


def _arith(op, a, b):
    if type(a) is not int or type(b) is not int:
        raise _Undefined
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    return a * b


def _ev(t, b):
    tag = t[0]
    if tag == "c":
        return t[1]
    if tag == "v":
        return b[t[1]]
    if tag == "f":
        return (t[1],) + tuple([_ev(a, b) for a in t[2]])
    if tag == "b":
        return _arith(t[1], _ev(t[2], b), _ev(t[3], b))
    if tag == "n":
        return _arith("-", 0, _ev(t[1], b))
    raise GroundingError("interval outside an atom argument")


def _match(t, val, b) -> bool:
    tag = t[0]
    if tag == "c":
        return t[1] == val
    if tag == "v":
        name = t[1]
        if name in b:
            return b[name] == val
        b[name] = val
        return True
    if tag == "f":
        args = t[2]
        if type(val) is not tuple or val[0] != t[1] or len(val) != len(args) + 1:
            return False
        for i, a in enumerate(args):
            if not _match(a, val[i + 1], b):
                return False
        return True
    try:
        cur = _ev(t, b)
    except _Undefined:
        return False
    return cur == val


def _atom_builder(a: _CAtom):
    """Specialised ``binding -> ground atom`` function for a compiled atom."""
    pred, args = a.pred, a.args
    if all(t[0] == "v" for t in args):
        names = [t[1] for t in args]
        return lambda b: (pred, tuple([b[n] for n in names]))
    if all(t[0] in ("c", "v") for t in args):
        spec = [(t[0] == "v", t[1]) for t in args]
        return lambda b: (pred, tuple([b[x] if isvar else x for isvar, x in spec]))
    return lambda b: (pred, tuple([_ev(t, b) for t in args]))


def _term_vars(t, out: set, matchable_only: bool = False) -> set:
    tag = t[0]
    if tag == "v":
        out.add(t[1])
    elif tag == "f":
        for a in t[2]:
            _term_vars(a, out, matchable_only)
    elif tag in ("b", "n", "i") and not matchable_only:
        for a in t[1:]:
            if isinstance(a, tuple):
                _term_vars(a, out, matchable_only)
    return out


def _has_interval(t) -> bool:
    if t[0] == "i":
        return True
    if t[0] == "f":
        return any(_has_interval(a) for a in t[2])
    return False


def _expand_intervals(t, b):
    """All ground values of term ``t`` under ``b`` (intervals enumerate)."""
    tag = t[0]
    if tag == "i":
        lo, hi = _ev(t[1], b), _ev(t[2], b)
        if type(lo) is not int or type(hi) is not int:
            raise _Undefined
        return list(range(lo, hi + 1))
    if tag == "f" and any(_has_interval(a) for a in t[2]):
        combos = itertools.product(*[_expand_intervals(a, b) for a in t[2]])
        return [(t[1],) + c for c in combos]
    return [_ev(t, b)]


# ---------------------------------------------------------------------------
# Compiled statements
# ---------------------------------------------------------------------------


class _CAtom(NamedTuple):
    pred: str  # signed name, e.g. "-holds"
    args: tuple  # compiled terms

    @property
    def key(self):
        return (self.pred, len(self.args))


def _catom(atom: Atom, consts, fresh) -> _CAtom:
    name = ("-" if atom.negated else "") + atom.predicate
    return _CAtom(name, tuple(_compile_term(a, consts, fresh) for a in atom.args))


@dataclass
class _CRule:
    source: str
    kind: str  # "rule" | "choice" | "constraint"
    heads: list  # _CAtom list (rule) ; list of (_CAtom, [cond]) (choice)
    pos: list  # _CAtom
    neg: list  # _CAtom
    cmps: list  # (op, lhs, rhs) compiled
    lower: Optional[tuple] = None
    upper: Optional[tuple] = None
    plans: dict = field(default_factory=dict)


def _lift(t, cmps, fresh):
    # arithmetic cannot be matched against a value; bind a fresh variable and compare later
    if t[0] in ("b", "n"):
        v = ("v", next(fresh))
        cmps.append(("=", v, t))
        return v
    if t[0] == "f":
        return ("f", t[1], tuple(_lift(a, cmps, fresh) for a in t[2]))
    return t


def _compile_body(items, consts, fresh):
    pos, neg, cmps = [], [], []
    for item in items:
        if isinstance(item, Comparison):
            cmps.append((item.op, _compile_term(item.lhs, consts, fresh), _compile_term(item.rhs, consts, fresh)))
        elif item.naf:
            neg.append(_catom(item.atom, consts, fresh))
        else:
            a = _catom(item.atom, consts, fresh)
            pos.append(_CAtom(a.pred, tuple(_lift(t, cmps, fresh) for t in a.args)))
    return pos, neg, cmps


def _expand_body_intervals(pos: list) -> list:
    """Body atoms with ground intervals unfold into one body per combination."""
    options = []
    for a in pos:
        if any(_has_interval(t) for t in a.args):
            vals = []
            for t in a.args:
                if _has_interval(t):
                    if _term_vars(t, set()):
                        raise GroundingError("intervals in rule bodies must have constant bounds")
                    vals.append([("c", v) for v in _expand_intervals(t, {})])
                else:
                    vals.append([t])
            options.append([_CAtom(a.pred, combo) for combo in itertools.product(*vals)])
        else:
            options.append([a])
    return [list(c) for c in itertools.product(*options)]


def _bound_after(pos, cmps, initial=()):
    """Variables bound by positive atoms and assignments (fixpoint)."""
    bound = set(initial)
    for a in pos:
        for t in a.args:
            _term_vars(t, bound, matchable_only=True)
    changed = True
    while changed:
        changed = False
        for op, lhs, rhs in cmps:
            if op != "=":
                continue
            for var_side, expr in ((lhs, rhs), (rhs, lhs)):
                if var_side[0] == "v" and var_side[1] not in bound and _term_vars(expr, set()) <= bound:
                    bound.add(var_side[1])
                    changed = True
    return bound


def _check_safety(rule: _CRule):
    bound = _bound_after(rule.pos, rule.cmps)
    needed = set()
    if rule.kind == "rule":
        for h in rule.heads:
            for t in h.args:
                _term_vars(t, needed)
    for a in rule.neg:
        for t in a.args:
            _term_vars(t, needed)
    for a in rule.pos:
        for t in a.args:
            _term_vars(t, needed)
    for _, lhs, rhs in rule.cmps:
        _term_vars(lhs, needed)
        _term_vars(rhs, needed)
    for bnd in (rule.lower, rule.upper):
        if bnd is not None:
            _term_vars(bnd, needed)
    missing = sorted(needed - bound)
    if missing:
        raise UnsafeRuleError(rule.source, missing[0])
    if rule.kind == "choice":
        for head, (cpos, cneg, ccmps) in rule.heads:
            local = _bound_after(cpos, ccmps, bound)
            need = set()
            for t in head.args:
                _term_vars(t, need)
            for _, lhs, rhs in ccmps:
                _term_vars(lhs, need)
                _term_vars(rhs, need)
            missing = sorted(need - local)
            if missing:
                raise UnsafeRuleError(rule.source, missing[0])


# ---------------------------------------------------------------------------
# Relations
# ---------------------------------------------------------------------------


class _Relation:
    __slots__ = ("tuples", "members", "indexes")

    def __init__(self):
        self.tuples: list = []
        self.members: set = set()
        self.indexes: dict = {}

    def add(self, args) -> bool:
        if args in self.members:
            return False
        self.members.add(args)
        self.tuples.append(args)
        for positions, index in self.indexes.items():
            index.setdefault(tuple([args[i] for i in positions]), []).append(args)
        return True

    def lookup(self, positions: tuple, key: tuple) -> list:
        index = self.indexes.get(positions)
        if index is None:
            index = {}
            for args in self.tuples:
                index.setdefault(tuple([args[i] for i in positions]), []).append(args)
            self.indexes[positions] = index
        return index.get(key, ())


# ---------------------------------------------------------------------------
# Ground program
# ---------------------------------------------------------------------------


class GroundRule(NamedTuple):
    """One ground rule over atom ids.

    kind is ``"rule"`` (one head atom: normal; several: disjunctive),
    ``"constraint"`` (no head) or ``"choice"`` (bounded choice; ``None``
    bounds are absent).
    """

    kind: str
    head: tuple
    pos: tuple
    neg: tuple
    lower: Optional[int] = None
    upper: Optional[int] = None


@dataclass
class GroundProgram:
    atoms: list  # id -> (signed predicate, args)
    rules: list
    minimize: list = field(default_factory=list)  # (weight, atom id)
    neg_pairs: list = field(default_factory=list)  # (id of a, id of -a)
    hidden: frozenset = frozenset()
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.atom_ids = {a: i for i, a in enumerate(self.atoms)}

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def symbol(self, atom_id: int) -> str:
        return format_ground_atom(self.atoms[atom_id])

    def id_of(self, text_or_key) -> Optional[int]:
        if isinstance(text_or_key, str):
            from .syntax import parse_term

            t = parse_term(text_or_key)
            neg = isinstance(t, Neg)
            if neg:
                t = t.arg
            c = _compile_term(t, {}, iter(()))
            v = c[1]
            key = (("-" if neg else "") + (v[0] if isinstance(v, tuple) else v), v[1:] if isinstance(v, tuple) else ())
            return self.atom_ids.get(key)
        return self.atom_ids.get(text_or_key)

    def facts(self) -> list:
        return [r.head[0] for r in self.rules if r.kind == "rule" and len(r.head) == 1 and not r.pos and not r.neg]

    def format(self) -> str:
        lines = []
        s = self.symbol
        for r in self.rules:
            body = [s(a) for a in r.pos] + ["not " + s(a) for a in r.neg]
            if r.kind == "constraint":
                head = ""
            elif r.kind == "choice":
                head = "{ " + "; ".join(s(a) for a in r.head) + " }"
                if r.lower is not None:
                    head = f"{r.lower} {head}"
                if r.upper is not None:
                    head = f"{head} {r.upper}"
            else:
                head = "; ".join(s(a) for a in r.head)
            if body:
                lines.append(f"{head} :- {', '.join(body)}." if head else f":- {', '.join(body)}.")
            else:
                lines.append(f"{head}.")
        if self.minimize:
            parts = "; ".join(f"{w}, {i} : {s(a)}" for i, (w, a) in enumerate(self.minimize))
            lines.append(f"#minimize {{ {parts} }}.")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Grounder
# ---------------------------------------------------------------------------


def _sccs(nodes: list, edges: dict) -> list:
    """Tarjan's algorithm; returns components in dependency order (sources first)."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(edges.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(edges.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp.append(x)
                    if x == node:
                        break
                out.append(comp)
    out.reverse()
    return out


class _Grounder:
    def __init__(self, program: Program, consts: Optional[dict], limit: int):
        self.limit = limit
        self.consts = dict(program.consts)
        if consts:
            self.consts.update(consts)
        self.relations: dict = {}
        self.certain: set = set()  # atom keys (pred, args)
        self.instances = 0
        self.ground_rules: dict = {}  # dedupe key -> None (ordered)
        self._constraint_bodies: set = set()  # constraints are equal up to body order
        fresh = (f"_anon{i}" for i in itertools.count())
        self.rules: list = []
        self.minimize = None
        for st in program.statements:
            if isinstance(st, Rule):
                self.rules.extend(self._compile_rule(st, fresh))
            elif isinstance(st, Minimize):
                self.minimize = st
            elif not isinstance(st, ConstDecl):
                raise TypeError(st)
        self.fresh = fresh
        self._builders: dict = {}

    def _compile_rule(self, st: Rule, fresh) -> list:
        source = format_statement(st)
        pos, neg, cmps = _compile_body(st.body, self.consts, fresh)
        lower = upper = None
        if st.head is None:
            kind, heads = "constraint", []
        elif isinstance(st.head, Choice):
            kind = "choice"
            heads = []
            for el in st.head.elements:
                cond = _compile_body(el.condition, self.consts, fresh)
                heads.append((_catom(el.atom, self.consts, fresh), cond))
            if st.head.lower is not None:
                lower = _compile_arith(st.head.lower, self.consts, fresh)
            if st.head.upper is not None:
                upper = _compile_arith(st.head.upper, self.consts, fresh)
        else:
            kind = "rule"
            heads = [_catom(a, self.consts, fresh) for a in st.head.atoms]
        for a in neg:
            if any(_has_interval(t) for t in a.args):
                raise GroundingError("intervals are not allowed in negative literals")
        out = []
        for body in _expand_body_intervals(pos):
            rule = _CRule(source, kind, heads, body, neg, cmps, lower, upper)
            _check_safety(rule)
            out.append(rule)
        return out

    # -- relations ---------------------------------------------------------

    def rel(self, key) -> _Relation:
        r = self.relations.get(key)
        if r is None:
            r = self.relations[key] = _Relation()
        return r

    def possible(self, pred: str, args: tuple) -> bool:
        r = self.relations.get((pred, len(args)))
        return r is not None and args in r.members

    # -- join --------------------------------------------------------------

    def _plan(self, rule: _CRule, first: Optional[int]):
        """Order positive atoms and comparisons; ``first`` is iterated from a delta."""
        plan = rule.plans.get(first)
        if plan is not None:
            return plan
        bound: set = set()
        remaining_atoms = list(range(len(rule.pos)))
        remaining_cmps = list(range(len(rule.cmps)))
        steps = []

        def flush_cmps():
            progress = True
            while progress:
                progress = False
                for ci in list(remaining_cmps):
                    op, lhs, rhs = rule.cmps[ci]
                    lv, rv = _term_vars(lhs, set()), _term_vars(rhs, set())
                    if lv <= bound and rv <= bound:
                        steps.append(("cmp", op, lhs, rhs))
                        remaining_cmps.remove(ci)
                        progress = True
                    elif op == "=" and lhs[0] == "v" and lhs[1] not in bound and rv <= bound:
                        steps.append(("assign", lhs[1], rhs))
                        bound.add(lhs[1])
                        remaining_cmps.remove(ci)
                        progress = True
                    elif op == "=" and rhs[0] == "v" and rhs[1] not in bound and lv <= bound:
                        steps.append(("assign", rhs[1], lhs))
                        bound.add(rhs[1])
                        remaining_cmps.remove(ci)
                        progress = True

        def atom_step(ai, from_delta):
            a = rule.pos[ai]
            bpos, bexpr, free = [], [], []
            for i, t in enumerate(a.args):
                tv = _term_vars(t, set())
                if tv <= bound:
                    bpos.append(i)
                    bexpr.append(t)
                else:
                    free.append((i, t))
            for t in a.args:
                _term_vars(t, bound, matchable_only=True)
            return ("atom", ai, a.key, tuple(bpos), tuple(bexpr), tuple(free), from_delta)

        flush_cmps()
        if first is not None:
            steps.append(atom_step(first, True))
            remaining_atoms.remove(first)
            flush_cmps()
        while remaining_atoms:
            best, best_score = None, None
            for ai in remaining_atoms:
                args = rule.pos[ai].args
                nb = sum(1 for t in args if _term_vars(t, set()) <= bound)
                score = (nb == len(args), nb)
                if best_score is None or score > best_score:
                    best, best_score = ai, score
            steps.append(atom_step(best, False))
            remaining_atoms.remove(best)
            flush_cmps()
        if remaining_cmps:
            op, lhs, rhs = rule.cmps[remaining_cmps[0]]
            missing = (_term_vars(lhs, set()) | _term_vars(rhs, set())) - bound
            raise UnsafeRuleError(rule.source, sorted(missing)[0])
        plan = rule.plans[first] = steps
        return plan

    def _bindings(self, steps, i, b, delta) -> list:
        out: list = []
        self._join(steps, i, dict(b), delta, lambda x: out.append(dict(x)))
        return out

    def _join(self, steps, i, b, delta, fn):
        """Call ``fn`` with every binding extending ``b`` that satisfies ``steps[i:]``.

        ``b`` is extended in place and restored afterwards, so ``fn`` must
        copy it if it keeps it.
        """
        if i == len(steps):
            fn(b)
            return
        step = steps[i]
        kind = step[0]
        if kind == "cmp":
            try:
                if _compare(step[1], _ev(step[2], b), _ev(step[3], b)):
                    self._join(steps, i + 1, b, delta, fn)
            except _Undefined:
                pass
            return
        if kind == "assign":
            try:
                v = _ev(step[2], b)
            except _Undefined:
                return
            name = step[1]
            if name in b:
                if b[name] == v:
                    self._join(steps, i + 1, b, delta, fn)
                return
            b[name] = v
            self._join(steps, i + 1, b, delta, fn)
            del b[name]
            return
        _, ai, key, bpos, bexpr, free, from_delta = step
        try:
            kvals = tuple([_ev(t, b) for t in bexpr])
        except _Undefined:
            return
        if from_delta:
            cands = [c for c in delta if all(c[p] == v for p, v in zip(bpos, kvals))]
        else:
            r = self.relations.get(key)
            if r is None:
                return
            if not bpos:
                cands = r.tuples
            elif len(bpos) == key[1]:
                cands = (kvals,) if kvals in r.members else ()
            else:
                cands = r.lookup(bpos, kvals)
        if not free:
            if cands:
                self._join(steps, i + 1, b, delta, fn)
            return
        n0 = len(b)
        for c in cands:
            ok = True
            for p, t in free:
                if not _match(t, c[p], b):
                    ok = False
                    break
            if ok:
                self._join(steps, i + 1, b, delta, fn)
            while len(b) > n0:
                b.popitem()

    # -- emission ----------------------------------------------------------

    def _ground_atom(self, a: _CAtom, b):
        entry = self._builders.get(id(a))
        if entry is None:
            # the atom is kept in the entry so its id cannot be reused
            entry = self._builders[id(a)] = (_atom_builder(a), a)
        return entry[0](b)

    def _head_atoms(self, a: _CAtom, b) -> list:
        if any(_has_interval(t) for t in a.args):
            combos = itertools.product(*[_expand_intervals(t, b) for t in a.args])
            return [(a.pred, c) for c in combos]
        return [self._ground_atom(a, b)]

    def _emit(self, rule: _CRule, b, component: set, new_atoms: dict):
        """Instantiate one rule under binding ``b``; returns nothing."""
        try:
            pos = []
            for a in rule.pos:
                g = self._ground_atom(a, b)
                if g not in self.certain:
                    pos.append(g)
            neg = []
            for a in rule.neg:
                g = self._ground_atom(a, b)
                if a.key in component:
                    neg.append(g)
                elif g in self.certain:
                    return
                elif self.possible(*g):
                    neg.append(g)
            pos = tuple(dict.fromkeys(pos))
            neg = tuple(dict.fromkeys(neg))
            if rule.kind == "constraint":
                body = (frozenset(pos), frozenset(neg))
                if body not in self._constraint_bodies:
                    self._constraint_bodies.add(body)
                    self._record(("constraint", (), pos, neg, None, None))
                return
            if rule.kind == "rule":
                groups = [self._head_atoms(h, b) for h in rule.heads]
                if len(groups) == 1:
                    heads_list = [(g,) for g in groups[0]]
                else:
                    heads_list = [tuple(dict.fromkeys(g for grp in groups for g in grp))]
                for heads in heads_list:
                    for h in heads:
                        self._add_possible(h, new_atoms)
                    if len(heads) == 1 and not pos and not neg:
                        self.certain.add(heads[0])
                    self._record(("rule", heads, pos, neg, None, None))
                return
            # choice
            heads = []
            for head, (cpos, cneg, ccmps) in rule.heads:
                for cb in self._condition_bindings(rule, cpos, ccmps, b):
                    heads.extend(self._head_atoms(head, cb))
            heads = tuple(dict.fromkeys(heads))
            lower = _ev(rule.lower, b) if rule.lower is not None else None
            upper = _ev(rule.upper, b) if rule.upper is not None else None
            for bnd in (lower, upper):
                if bnd is not None and type(bnd) is not int:
                    raise _Undefined
            for h in heads:
                self._add_possible(h, new_atoms)
            self._record(("choice", heads, pos, neg, lower, upper))
        except _Undefined:
            return

    def _condition_bindings(self, rule, cpos, ccmps, b):
        for a in cpos:
            comp_of = self.component_of.get(a.key)
            if comp_of is not None and comp_of >= self.current_component:
                raise GroundingError(f"choice condition {a.pred} must be defined before its use in: {rule.source}")
        key = (id(cpos), frozenset(b))
        steps = self._cond_plans.get(key)
        if steps is None:
            tmp = _CRule(rule.source, "constraint", [], list(cpos), [], list(ccmps))
            steps = self._cond_plans[key] = _plan_from(tmp, set(b))
        for cb in self._bindings(steps, 0, b, ()):
            # conditions must hold for certain; anything else is outside the fragment
            for a in cpos:
                g = self._ground_atom(a, cb)
                if g not in self.certain:
                    raise GroundingError(
                        f"choice condition atom {format_ground_atom(g)} is not a fact in: {rule.source}"
                    )
            yield cb

    def _add_possible(self, h, new_atoms):
        pred, args = h
        key = (pred, len(args))
        r = self.relations.get(key)
        if r is not None and args in r.members:
            return
        new_atoms.setdefault(key, {})[args] = None

    def _record(self, inst):
        if inst in self.ground_rules:
            return
        self.instances += 1
        if self.instances > self.limit:
            raise GroundingError(f"ground size limit of {self.limit} rule instances exceeded")
        self.ground_rules[inst] = None

    # -- driver ------------------------------------------------------------

    def run(self) -> GroundProgram:
        head_rules: dict = {}
        edges: dict = {}
        nodes: list = []

        def node(k):
            if k not in edges:
                edges[k] = []
                nodes.append(k)

        constraints = []
        for rule in self.rules:
            if rule.kind == "constraint":
                constraints.append(rule)
                for a in rule.pos + rule.neg:
                    node(a.key)
                continue
            if rule.kind == "rule":
                hkeys = [h.key for h in rule.heads]
                deps = [a.key for a in rule.pos + rule.neg]
            else:
                hkeys = [h.key for h, _ in rule.heads]
                deps = [a.key for a in rule.pos + rule.neg]
                for _, (cpos, cneg, _c) in rule.heads:
                    deps += [a.key for a in cpos]
            for hk in hkeys:
                node(hk)
                head_rules.setdefault(hk, []).append(rule)
            for d in deps:
                node(d)
                for hk in hkeys:
                    edges[d].append(hk)
        if self.minimize is not None:
            for el in self.minimize.elements:
                for item in el.condition:
                    if isinstance(item, Literal):
                        node(_catom(item.atom, self.consts, self.fresh).key)

        components = _sccs(nodes, edges)
        self.component_of = {}
        for ci, comp in enumerate(components):
            for k in comp:
                self.component_of[k] = ci
        self._cond_plans: dict = {}

        for ci, comp in enumerate(components):
            self.current_component = ci
            cset = set(comp)
            rules = []
            seen = set()
            for k in comp:
                for r in head_rules.get(k, ()):
                    if id(r) not in seen:
                        seen.add(id(r))
                        rules.append(r)
            if not rules:
                continue
            self._ground_component(rules, cset)

        self.current_component = len(components)
        for rule in constraints:
            self._join(self._plan(rule, None), 0, {}, (), lambda b: self._emit(rule, b, set(), {}))
        return self._finish()

    def _ground_component(self, rules: list, cset: set):
        new_atoms: dict = {}
        for rule in rules:
            self._join(self._plan(rule, None), 0, {}, (), lambda b: self._emit(rule, b, cset, new_atoms))
        recursive = [
            (rule, [i for i, a in enumerate(rule.pos) if a.key in cset]) for rule in rules
        ]
        recursive = [(r, pos) for r, pos in recursive if pos]
        while new_atoms:
            delta = {}
            for key, args in new_atoms.items():
                r = self.rel(key)
                added = [a for a in args if r.add(a)]
                if added:
                    delta[key] = added
            new_atoms = {}
            if not recursive:
                break
            for rule, positions in recursive:
                for i in positions:
                    d = delta.get(rule.pos[i].key)
                    if not d:
                        continue
                    self._join(self._plan(rule, i), 0, {}, d, lambda b: self._emit(rule, b, cset, new_atoms))

    # -- simplification ----------------------------------------------------

    def _finish(self) -> GroundProgram:
        possible = set()
        for (pred, _), r in self.relations.items():
            for args in r.tuples:
                possible.add((pred, args))
        certain = set(self.certain)
        rules = _simplify(list(self.ground_rules), possible, certain)

        # minimize statement
        min_items = []
        aux_rules = []
        if self.minimize is not None:
            min_items, aux_rules = self._ground_minimize(possible, certain)
        rules.extend(aux_rules)

        # atom table: deterministic, in order of first appearance
        atoms: dict = {}
        for kind, head, pos, neg, lo, up in rules:
            for a in head:
                atoms.setdefault(a, None)
            for a in pos:
                atoms.setdefault(a, None)
            for a in neg:
                atoms.setdefault(a, None)
        for _, a in min_items:
            atoms.setdefault(a, None)
        atom_list = list(atoms)
        ids = {a: i for i, a in enumerate(atom_list)}

        ground_rules = [
            GroundRule(kind, tuple(ids[a] for a in head), tuple(ids[a] for a in pos), tuple(ids[a] for a in neg), lo, up)
            for kind, head, pos, neg, lo, up in rules
        ]
        neg_pairs = []
        for a in atom_list:
            if a[0].startswith("-"):
                partner = (a[0][1:], a[1])
                if partner in ids:
                    neg_pairs.append((ids[partner], ids[a]))
                    ground_rules.append(GroundRule("constraint", (), (ids[partner], ids[a]), ()))
        minimize = [(w, ids[a]) for w, a in min_items]
        hidden = frozenset(ids[a] for a in atom_list if a[0].startswith("_"))
        return GroundProgram(
            atoms=atom_list,
            rules=ground_rules,
            minimize=minimize,
            neg_pairs=neg_pairs,
            hidden=hidden,
            stats={"rule_instances": self.instances, "ground_rules": len(ground_rules), "atoms": len(atom_list)},
        )

    def _ground_minimize(self, possible: set, certain: set):
        groups: dict = {}
        for el in self.minimize.elements:
            pos, neg, cmps = _compile_body(el.condition, self.consts, self.fresh)
            weight = _compile_arith(el.weight, self.consts, self.fresh)
            terms = [_compile_term(t, self.consts, self.fresh) for t in el.terms]
            tmp = _CRule("#minimize", "constraint", [], pos, neg, cmps)
            _check_safety(tmp)
            need = _term_vars(weight, set())
            for t in terms:
                _term_vars(t, need)
            missing = need - _bound_after(pos, cmps)
            if missing:
                raise UnsafeRuleError("#minimize", sorted(missing)[0])
            for b in self._bindings(self._plan(tmp, None), 0, {}, ()):
                try:
                    w = _ev(weight, b)
                    tup = tuple(_ev(t, b) for t in terms)
                except _Undefined:
                    continue
                if type(w) is not int:
                    continue
                gpos = [self._ground_atom(a, b) for a in pos]
                gneg = [self._ground_atom(a, b) for a in neg]
                if any(a not in possible for a in gpos) or any(a in certain for a in gneg):
                    continue
                gpos = tuple(a for a in gpos if a not in certain)
                gneg = tuple(a for a in gneg if a in possible)
                groups.setdefault((w, tup), []).append((gpos, gneg))
        items, aux_rules = [], []
        for n, ((w, tup), conds) in enumerate(groups.items()):
            if w == 0:
                continue
            if len(conds) == 1 and len(conds[0][0]) == 1 and not conds[0][1]:
                items.append((w, conds[0][0][0]))
                continue
            aux = ("_minimize", (n,))
            for gpos, gneg in dict.fromkeys(conds):
                aux_rules.append(("rule", (aux,), gpos, gneg, None, None))
            items.append((w, aux))
        return items, aux_rules


def _plan_from(rule: _CRule, bound_vars: set):
    """Join plan for a condition whose outer variables are already bound."""
    bound = set(bound_vars)
    steps = []
    remaining_atoms = list(range(len(rule.pos)))
    remaining_cmps = list(range(len(rule.cmps)))
    while True:
        progress = False
        for ci in list(remaining_cmps):
            op, lhs, rhs = rule.cmps[ci]
            if (_term_vars(lhs, set()) | _term_vars(rhs, set())) <= bound:
                steps.append(("cmp", op, lhs, rhs))
                remaining_cmps.remove(ci)
                progress = True
        if remaining_atoms:
            ai = remaining_atoms.pop(0)
            a = rule.pos[ai]
            bpos, bexpr, free = [], [], []
            for i, t in enumerate(a.args):
                if _term_vars(t, set()) <= bound:
                    bpos.append(i)
                    bexpr.append(t)
                else:
                    free.append((i, t))
            for t in a.args:
                _term_vars(t, bound, matchable_only=True)
            steps.append(("atom", ai, a.key, tuple(bpos), tuple(bexpr), tuple(free), False))
            progress = True
        if not progress:
            break
    if remaining_cmps:
        raise UnsafeRuleError(rule.source, "condition")
    return steps


def positive_sccs(g: GroundProgram) -> list:
    """Components of the positive atom dependency graph (head -> positive body atom)."""
    edges: dict = {}
    for r in g.rules:
        if r.kind == "constraint" or not r.pos:
            continue
        for h in r.head:
            edges.setdefault(h, []).extend(r.pos)
    return _sccs(list(range(g.num_atoms)), edges)


def check_head_cycle_free(g: GroundProgram) -> None:
    disjunctive = [r for r in g.rules if r.kind == "rule" and len(r.head) > 1]
    if not disjunctive:
        return
    comp = {}
    for ci, c in enumerate(positive_sccs(g)):
        for a in c:
            comp[a] = ci
    for r in disjunctive:
        seen = {}
        for h in r.head:
            other = seen.setdefault(comp[h], h)
            if other != h:
                raise UnsupportedProgramError(
                    f"head cycle between {g.symbol(other)} and {g.symbol(h)}; only head-cycle-free disjunction is supported"
                )


def ground(program: Program, consts: Optional[dict] = None, limit: int = DEFAULT_GROUND_LIMIT) -> GroundProgram:
    """Instantiate ``program``; ``consts`` override the program's ``#const`` values."""
    g = _Grounder(program, consts, limit).run()
    check_head_cycle_free(g)
    return g


def _simplify(rules: list, possible: set, certain: set) -> list:
    """Propagate certain/impossible atoms through the ground rules to a fixpoint.

    Dead rules (a false positive or true negative body literal, or a
    disjunction already satisfied) are dropped; an atom left without a live
    rule deriving it becomes impossible; a rule with a true body and a
    single remaining head makes that head certain.  ``possible`` and
    ``certain`` are updated in place.  Returns the surviving rules with
    decided body literals removed, deduplicated, in original order.
    """
    alive = [True] * len(rules)
    occurs = defaultdict(list)
    support: dict = defaultdict(int)
    queue = []
    for i, (kind, head, pos, neg, _, _) in enumerate(rules):
        # constraints derive nothing, so they only need the final filter below
        if kind == "constraint":
            continue
        queue.append(i)
        for a in set(head) | set(pos) | set(neg):
            occurs[a].append(i)
        for h in set(head):
            support[h] += 1
    for a in list(possible):
        if not support[a]:
            possible.discard(a)

    def kill(i):
        alive[i] = False
        kind, head = rules[i][0], rules[i][1]
        if kind == "constraint":
            return
        for h in set(head):
            support[h] -= 1
            if not support[h] and h in possible and h not in certain:
                possible.discard(h)
                queue.extend(occurs[h])

    while queue:
        i = queue.pop()
        if not alive[i]:
            continue
        kind, head, pos, neg, _, _ = rules[i]
        if any(a not in possible for a in pos) or any(a in certain for a in neg):
            kill(i)
            continue
        if kind != "rule":
            continue
        heads = [h for h in head if h in possible]
        body_left = any(a not in certain for a in pos) or any(a in possible for a in neg)
        if len(heads) > 1 and any(h in certain for h in heads):
            kill(i)  # a disjunction with a true disjunct is satisfied
        elif len(heads) == 1 and heads[0] in certain:
            if body_left:
                kill(i)
        elif len(heads) == 1 and not body_left:
            certain.add(heads[0])
            queue.extend(occurs[heads[0]])

    out = []
    for i, (kind, head, pos, neg, lo, up) in enumerate(rules):
        if not alive[i]:
            continue
        if kind == "constraint" and (any(a not in possible for a in pos) or any(a in certain for a in neg)):
            continue
        pos = tuple(a for a in pos if a not in certain)
        neg = tuple(a for a in neg if a in possible)
        if kind == "rule":
            head = tuple(h for h in head if h in possible)
            if not head:
                kind = "constraint"
        out.append((kind, head, pos, neg, lo, up))
    return list(dict.fromkeys(out))

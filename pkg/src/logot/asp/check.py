"""Independent stable-model checking and brute-force enumeration (test oracle).

Works directly on the ground rules with bitmasks and shares no code with
the search in :mod:`logot.asp.solve`.
"""

from __future__ import annotations

from .ground import GroundProgram

__all__ = ["MAX_BRUTE_FORCE_ATOMS", "TooManyAtomsError", "check_stable", "brute_force_models", "model_cost"]

MAX_BRUTE_FORCE_ATOMS = 22


class TooManyAtomsError(ValueError):
    pass


def _mask(ids) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def _compile(g: GroundProgram):
    return [(r.kind, _mask(r.head), _mask(r.pos), _mask(r.neg), r.head, r.lower, r.upper) for r in g.rules]


def _is_model(rules, m: int) -> bool:
    for kind, head, pos, neg, heads, lo, up in rules:
        if (m & pos) != pos or (m & neg):
            continue
        if kind == "constraint":
            return False
        if kind == "rule":
            if not m & head:
                return False
        else:
            count = bin(m & head).count("1")
            if (lo is not None and count < lo) or (up is not None and count > up):
                return False
    return True


def _reduct(rules, m: int) -> list:
    """Positive (possibly disjunctive) reduct as (head mask, body mask) pairs."""
    out = []
    for kind, head, pos, neg, heads, lo, up in rules:
        if kind == "constraint" or (m & neg):
            continue
        if kind == "rule":
            out.append((head, pos))
        else:
            # a choice rule supports exactly the chosen atoms
            for h in heads:
                if m >> h & 1:
                    out.append((1 << h, pos))
    return out


def _least_model(reduct) -> int:
    m = 0
    changed = True
    while changed:
        changed = False
        for head, pos in reduct:
            if (m & pos) == pos and not (m & head):
                m |= head
                changed = True
    return m


def _stable_mask(rules, m: int) -> bool:
    if not _is_model(rules, m):
        return False
    reduct = _reduct(rules, m)
    if all(head & (head - 1) == 0 for head, _ in reduct):
        return _least_model(reduct) == m
    # disjunctive: m must be a minimal model of the reduct
    for head, pos in reduct:
        if (m & pos) == pos and not (m & head):
            return False
    members = [i for i in range(m.bit_length()) if m >> i & 1]
    for sub in range(1 << len(members)):
        s = 0
        for j, a in enumerate(members):
            if sub >> j & 1:
                s |= 1 << a
        if s == m:
            continue
        if all(not ((s & pos) == pos) or (s & head) for head, pos in reduct):
            return False
    return True


def check_stable(g: GroundProgram, m) -> bool:
    """True iff atom-id set ``m`` is a stable model of ``g``."""
    mask = _mask(m)
    if mask >> g.num_atoms:
        return False
    return _stable_mask(_compile(g), mask)


def model_cost(g: GroundProgram, m) -> int:
    return sum(w for w, a in g.minimize if a in m)


def brute_force_models(g: GroundProgram) -> set:
    """All stable models of ``g`` as frozensets of atom ids (exhaustive; tests only)."""
    n = g.num_atoms
    if n > MAX_BRUTE_FORCE_ATOMS:
        raise TooManyAtomsError(f"{n} atoms exceed the brute-force limit of {MAX_BRUTE_FORCE_ATOMS}")
    rules = _compile(g)
    out = set()
    for m in range(1 << n):
        if _stable_mask(rules, m):
            out.add(frozenset(i for i in range(n) if m >> i & 1))
    return out

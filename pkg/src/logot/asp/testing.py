"""Random ground programs for oracle cross-checks."""

from __future__ import annotations

import random

from .ground import GroundProgram, GroundRule, UnsupportedProgramError, check_head_cycle_free


def random_ground_program(rng: random.Random, max_atoms: int = 12, max_rules: int = 20) -> GroundProgram:
    """A random head-cycle-free program over the full ground fragment.

    Rules mix normal rules with default negation, choice rules with and
    without bounds, disjunctions, constraints and (sometimes) a minimize
    objective with mixed-sign weights; some atoms come in classical
    negation pairs.
    """
    while True:
        n = rng.randint(1, max_atoms)
        pairs = []
        atoms = []
        i = 0
        while len(atoms) < n:
            name = f"a{i}"
            if len(atoms) + 2 <= n and rng.random() < 0.15:
                pairs.append((len(atoms), len(atoms) + 1))
                atoms += [(name, ()), ("-" + name, ())]
            else:
                atoms.append((name, ()))
            i += 1
        rules = []
        for _ in range(rng.randint(0, max_rules - len(pairs))):
            pos = tuple(sorted(rng.sample(range(n), rng.randint(0, min(2, n)))))
            neg = tuple(sorted(rng.sample(range(n), rng.randint(0, min(2, n)))))
            kind = rng.random()
            if kind < 0.45:
                rules.append(GroundRule("rule", (rng.randrange(n),), pos, neg))
            elif kind < 0.65:
                heads = tuple(sorted(rng.sample(range(n), rng.randint(1, min(3, n)))))
                lo = rng.choice([None, None, 0, 1, 2])
                up = rng.choice([None, None, 1, 2, 3])
                rules.append(GroundRule("choice", heads, pos, neg, lo, up))
            elif kind < 0.8:
                heads = tuple(sorted(rng.sample(range(n), rng.randint(2, min(3, n)) if n >= 2 else 1)))
                rules.append(GroundRule("rule", heads, pos, neg))
            else:
                rules.append(GroundRule("constraint", (), pos, neg))
        for a, b in pairs:
            rules.append(GroundRule("constraint", (), (a, b), ()))
        minimize = []
        if rng.random() < 0.4:
            for _ in range(rng.randint(1, 4)):
                minimize.append((rng.choice([-2, -1, 1, 1, 2, 3]), rng.randrange(n)))
        g = GroundProgram(atoms=atoms, rules=rules, minimize=minimize, neg_pairs=pairs)
        try:
            check_head_cycle_free(g)
        except UnsupportedProgramError:
            continue
        return g

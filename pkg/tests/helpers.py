"""Shared test utilities: corpora and independent oracles.

The oracles here deliberately share no code with the library routines they
check: the stratification oracle enumerates explicit type assignments over a
finite window, the census oracle recomputes the dichotomy side from unions of
litters, and the mapping checker replays a permutation position by position.
"""

import itertools
import random

from stratlab import formulas as F
from stratlab.fm.perms import apply_to_set
from stratlab.fm.universe import NearLitter

RANDOM_SEED = 20260823

THREE_VARS = ("x", "y", "z")


def atom_pool(names):
    """Every membership and equality atom over the given variable names."""
    out = []
    for a in names:
        for b in names:
            out.append(F.Member(F.Var(a), F.Var(b)))
            out.append(F.Equal(F.Var(a), F.Var(b)))
    return out


def conj(parts):
    phi = parts[0]
    for p in parts[1:]:
        phi = F.And(phi, p)
    return phi


def exhaustive_corpus(names=THREE_VARS, max_atoms=4):
    """All conjunctions of up to max_atoms distinct atoms over the names.

    Stratifiability depends only on the set of atomic constraints, so
    conjunctions exhaust the relevant behaviors for these bounds.
    """
    atoms = atom_pool(names)
    out = []
    for m in range(1, max_atoms + 1):
        for combo in itertools.combinations(atoms, m):
            out.append(conj(combo))
    return out


def random_formula(rng, max_depth, max_atoms=8):
    """One random connective tree with fresh binder names, no shadowing."""

    def go(depth, scope, unused):
        roll = rng.random()
        if depth == 0 or roll < 0.30:
            a = F.Var(rng.choice(scope))
            b = F.Var(rng.choice(scope))
            return F.Member(a, b) if rng.random() < 0.6 else F.Equal(a, b)
        if roll < 0.50 and unused:
            name = unused.pop(0)
            quant = F.Forall if rng.random() < 0.5 else F.Exists
            return quant(F.Var(name), go(depth - 1, scope + (name,), unused))
        if roll < 0.62:
            return F.Not(go(depth - 1, scope, unused))
        op = (F.And, F.Or, F.Implies, F.Iff)[rng.randrange(4)]
        return op(go(depth - 1, scope, unused), go(depth - 1, scope, unused))

    while True:
        phi = go(max_depth, ("u", "v"), ["w0", "w1", "w2"])
        # keep the brute-force oracle window tractable
        if len(F.atoms(phi)) <= max_atoms:
            return phi


def random_corpus(count=1000, max_depth=6, seed=RANDOM_SEED):
    rng = random.Random(seed)
    return [random_formula(rng, max_depth) for _ in range(count)]


def brute_force_stratifiable(phi):
    """Assignment search over a +-(atom count) window, one anchor per component.

    Constraints are differences, so a whole connected component can be shifted
    without changing satisfiability; anchoring one variable per component at 0
    keeps the search exact.  A path from the anchor changes the type by at
    most 1 per constraint, so the window is wide enough.
    """
    constraints = []
    order = []
    seen = set()
    for a in F.atoms(phi):
        if isinstance(a, F.Member):
            u, v, d = a.element.name, a.container.name, 1
        else:
            u, v, d = a.left.name, a.right.name, 0
        constraints.append((u, v, d))
        for nm in (u, v):
            if nm not in seen:
                seen.add(nm)
                order.append(nm)
    if not constraints:
        return True

    adj = {n: set() for n in order}
    for u, v, _ in constraints:
        adj[u].add(v)
        adj[v].add(u)
    comp_of = {}
    comps = []
    for n in order:
        if n in comp_of:
            continue
        comp = [n]
        comp_of[n] = len(comps)
        stack = [n]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in comp_of:
                    comp_of[nxt] = len(comps)
                    comp.append(nxt)
                    stack.append(nxt)
        comps.append(comp)

    window = range(-len(constraints), len(constraints) + 1)
    for idx, comp in enumerate(comps):
        cons = [c for c in constraints if comp_of[c[0]] == idx]
        rest = comp[1:]
        for values in itertools.product(window, repeat=len(rest)):
            env = {comp[0]: 0}
            env.update(zip(rest, values))
            if all(env[v] - env[u] == d for u, v, d in cons):
                break
        else:
            return False
    return True


def annotate_all(phi, assignment=None):
    """Declare a type on every variable: the given assignment or all zeros."""
    if assignment is None:
        assignment = {name: 0 for name in F.all_names(phi)}
    return F.with_types(phi, assignment)


def pentagon_table():
    """5-cycle edges one color, diagonals the other: no monochromatic triangle."""
    edges = {(i, (i + 1) % 5) for i in range(5)}
    table = {}
    for pair in itertools.combinations(range(5), 2):
        table[pair] = 1 if (pair in edges or pair[::-1] in edges) else 0
    return table


def near_union_family(u, clan="c0"):
    """Independent computation of the census dichotomy side.

    A subset qualifies when it is within the smallness bound of a union of
    litters or of the complement of such a union.
    """
    atoms = sorted(u.clans[clan])
    lids = sorted(lid for lid in u.litters if lid.startswith(clan))
    clan_set = frozenset(atoms)
    unions = []
    for m in range(len(lids) + 1):
        for chosen in itertools.combinations(lids, m):
            base = frozenset().union(*(u.litters[l] for l in chosen)) if chosen \
                else frozenset()
            unions.append(base)
            unions.append(clan_set - base)
    qualifying = set()
    for bits in range(1 << len(atoms)):
        subset = frozenset(atoms[i] for i in range(len(atoms)) if (bits >> i) & 1)
        if any(len(subset ^ un) < u.params.s_max for un in unions):
            qualifying.add(subset)
    return qualifying


def maps_positionwise(u, perm, s, t):
    """Does the permutation carry each element of s onto its partner in t?"""
    for mine, theirs in zip(s.elements, t.elements):
        if isinstance(mine, NearLitter):
            if apply_to_set(perm, mine.atoms) != theirs.atoms:
                return False
        elif perm[mine] != theirs:
            return False
    return True

"""Finite rank models of typed set theory, and size-driven level families.

A natural model has a base level of m tagged atoms and each further level is
the full power set of the one below.  Level elements are canonically
enumerated, so an element of level i+1 is just an integer whose bits index
the elements of level i.  Membership is a bit test; nothing is ever
materialized beyond the level sizes.

A level family generalizes this: it fixes only the level sizes m_0..m_{L-1},
required to satisfy m_j >= 2^(m_i) for i < j.  The canonical injection from
subsets of level i into level j sends the r-th subset in ascending bit-vector
order to the r-th element of level j, which makes the injection the identity
on integer encodings.  Membership of x in y under an interpretation holds
when y is an encoding of some subset (y < 2^(m_i)) containing x.  Elements of
level j outside every injection range have no members and are not the empty
set: they behave as urelements.  The distinguished constant ``empty`` denotes
the image of the empty subset, encoding 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from . import formulas as F
from .errors import (
    BudgetExceededError,
    NotIncreasingError,
    SizeConstraintViolatedError,
    SizeMismatchError,
    TypeOutOfRangeError,
)
from .formulas import (
    And,
    Equal,
    Exists,
    Forall,
    Iff,
    Implies,
    Member,
    Mode,
    Not,
    Or,
    Sentence,
    Var,
    unwrap,
)
from .stratify import check_typed

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class NaturalModel:
    base_size: int
    depth: int
    sizes: tuple
    tags: tuple


def build_default(base_size, depth, budget=DEFAULT_BUDGET, tags=None):
    """Power-set tower of the given depth over base_size tagged atoms."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if tags is None:
        tags = tuple(f"a{i}" for i in range(base_size))
    if len(tags) != base_size:
        raise SizeMismatchError(f"{len(tags)} tags for base size {base_size}")
    sizes = [base_size]
    for _ in range(depth - 1):
        if sizes[-1] > budget:
            raise BudgetExceededError(f"level of size {sizes[-1]} exceeds budget {budget}")
        nxt = 1 << sizes[-1]
        if nxt > budget:
            raise BudgetExceededError(f"next level would have {nxt} elements, budget {budget}")
        sizes.append(nxt)
    if sizes[-1] > budget:
        raise BudgetExceededError(f"level of size {sizes[-1]} exceeds budget {budget}")
    return NaturalModel(base_size, depth, tuple(sizes), tuple(tags))


def _check_closed_typed(phi, mode, bound, what):
    node = unwrap(phi)
    if not F.is_closed(node):
        free = ", ".join(v.name for v in F.free_vars(node) if not v.is_empty_const())
        raise ValueError(f"formula must be closed, free: {free}")
    if not check_typed(node, mode):
        raise ValueError(f"formula is not well-typed for {mode.value}")
    for v in F.occurrences(node):
        if v.type >= bound:
            raise TypeOutOfRangeError(f"type {v.type} of {v.name} out of range for {what}")
    return node


def evaluate(model, phi):
    """Truth value of a closed TST formula with all types below the depth."""
    node = _check_closed_typed(phi, Mode.TST, model.depth, f"depth {model.depth}")
    sizes = model.sizes

    def go(n, env):
        if isinstance(n, Equal):
            return env[n.left.name] == env[n.right.name]
        if isinstance(n, Member):
            return (env[n.container.name] >> env[n.element.name]) & 1 == 1
        if isinstance(n, Not):
            return not go(n.body, env)
        if isinstance(n, And):
            return go(n.left, env) and go(n.right, env)
        if isinstance(n, Or):
            return go(n.left, env) or go(n.right, env)
        if isinstance(n, Implies):
            return (not go(n.left, env)) or go(n.right, env)
        if isinstance(n, Iff):
            return go(n.left, env) == go(n.right, env)
        name, level = n.var.name, sizes[n.var.type]
        if isinstance(n, Forall):
            return all(go(n.body, {**env, name: val}) for val in range(level))
        return any(go(n.body, {**env, name: val}) for val in range(level))

    return go(node, {})


@dataclass(frozen=True)
class LevelBijection:
    """Maps between two towers, one tuple of image indices per level."""

    maps: tuple

    def apply(self, level, element):
        return self.maps[level][element]


def iso_models(a, b, base_bijection=None):
    """Lift a base bijection through the towers level by level.

    The default base bijection matches the canonical enumerations index by
    index.  The lift of a level map f sends a subset encoding s to the
    encoding with bits {f(r) : r in s}.
    """
    if (a.base_size, a.depth) != (b.base_size, b.depth):
        raise SizeMismatchError(
            f"({a.base_size}, {a.depth}) vs ({b.base_size}, {b.depth})")
    if base_bijection is None:
        base = tuple(range(a.base_size))
    else:
        base = tuple(base_bijection)
        if sorted(base) != list(range(a.base_size)):
            raise SizeMismatchError("base bijection is not a permutation of the base")
    maps = [base]
    for level in range(a.depth - 1):
        prev = maps[-1]
        lifted = []
        for s in range(a.sizes[level + 1]):
            image = 0
            r = s
            while r:
                low = r & -r
                image |= 1 << prev[low.bit_length() - 1]
                r ^= low
            lifted.append(image)
        maps.append(tuple(lifted))
    return LevelBijection(tuple(tuple(m) for m in maps))


# ---------------------------------------------------------------------------
# level families with canonical injections


@dataclass(frozen=True)
class TstuFamily:
    sizes: tuple

    @property
    def length(self):
        return len(self.sizes)


def build_tstu_family(sizes):
    """Validate the power-set lower bounds; levels stay abstract index ranges."""
    sizes = tuple(int(m) for m in sizes)
    if not sizes:
        raise SizeConstraintViolatedError("family needs at least one level")
    if any(m < 0 for m in sizes):
        raise SizeConstraintViolatedError("level sizes must be nonnegative")
    for i, j in itertools.combinations(range(len(sizes)), 2):
        # 2**sizes[i] <= sizes[j], via bit length to avoid giant intermediates
        if sizes[j].bit_length() <= sizes[i]:
            raise SizeConstraintViolatedError(
                f"size[{j}] = {sizes[j]} is below 2^size[{i}] = 2^{sizes[i]}")
    return TstuFamily(sizes)


@dataclass(frozen=True)
class Interpretation:
    """A family together with a strictly increasing choice of levels."""

    family: TstuFamily
    s: tuple

    def __post_init__(self):
        s = tuple(self.s)
        object.__setattr__(self, "s", s)
        if any(a >= b for a, b in zip(s, s[1:])):
            raise NotIncreasingError(f"level choice must be strictly increasing: {s}")
        if any(not 0 <= i < self.family.length for i in s):
            raise TypeOutOfRangeError(f"level choice {s} outside family of length {self.family.length}")


def _eval_with_level_sizes(node, size_of_type, budget):
    """Shared evaluator: size_of_type maps a declared type to its level size.

    Membership of x in y holds when y encodes a subset of x's level
    (y < 2^size) with bit x set; other values of y act as urelements.  The
    constant ``empty`` denotes encoding 0.  Quantifying over a level larger
    than the budget raises before any looping starts.
    """
    for n in F.walk(node):
        if isinstance(n, (Forall, Exists)) and size_of_type(n.var.type) > budget:
            raise BudgetExceededError(
                f"quantifier over level of size {size_of_type(n.var.type)} "
                f"exceeds budget {budget}")

    def resolve(v, env):
        return 0 if v.is_empty_const() else env[v.name]

    def go(n, env):
        if isinstance(n, Equal):
            return resolve(n.left, env) == resolve(n.right, env)
        if isinstance(n, Member):
            cont = resolve(n.container, env)
            low = size_of_type(n.element.type)
            return cont.bit_length() <= low and (cont >> resolve(n.element, env)) & 1 == 1
        if isinstance(n, Not):
            return not go(n.body, env)
        if isinstance(n, And):
            return go(n.left, env) and go(n.right, env)
        if isinstance(n, Or):
            return go(n.left, env) or go(n.right, env)
        if isinstance(n, Implies):
            return (not go(n.left, env)) or go(n.right, env)
        if isinstance(n, Iff):
            return go(n.left, env) == go(n.right, env)
        name, level = n.var.name, size_of_type(n.var.type)
        if isinstance(n, Forall):
            return all(go(n.body, {**env, name: val}) for val in range(level))
        return any(go(n.body, {**env, name: val}) for val in range(level))

    return go(node, {})


def evaluate_tstu(interp, phi, budget=DEFAULT_BUDGET):
    """Truth of a closed formula, types read through the interpretation's levels."""
    s = interp.s
    node = _check_closed_typed(phi, Mode.TSTU, len(s), f"level choice of length {len(s)}")
    sizes = interp.family.sizes
    return _eval_with_level_sizes(node, lambda t: sizes[s[t]], budget)


def evaluate_ttt(family, phi, budget=DEFAULT_BUDGET):
    """Truth of a closed formula whose types are family level indices directly.

    Membership may relate any strictly increasing pair of levels; the encoding
    convention matches evaluate_tstu with the identity level choice.
    """
    node = _check_closed_typed(phi, Mode.TTT, family.length, f"family of length {family.length}")
    sizes = family.sizes
    return _eval_with_level_sizes(node, lambda t: sizes[t], budget)


# ---------------------------------------------------------------------------
# canonical sentence and axiom families

_OPS = (And, Or, Implies, Iff)


def extensionality_axiom(level):
    """Sets one above the given level are equal iff they have the same members."""
    x, y, z = Var("x", level + 1), Var("y", level + 1), Var("z", level)
    same = Forall(z, Iff(Member(z, x), Member(z, y)))
    return Forall(x, Forall(y, Iff(Equal(x, y), same)))


def weak_extensionality_axiom(level):
    """Extensionality restricted to nonempty sets, the urelement-tolerant form."""
    x, y = Var("x", level + 1), Var("y", level + 1)
    z, w = Var("z", level), Var("w", level)
    same = Forall(w, Iff(Member(w, x), Member(w, y)))
    return Forall(x, Forall(y, Forall(z, Implies(Member(z, x), Iff(Equal(x, y), same)))))


def _matrices(atoms):
    lits = []
    for a in atoms:
        lits.append(a)
        lits.append(Not(a))
    out = list(lits)
    for l1, l2 in itertools.combinations(lits, 2):
        for op in _OPS:
            out.append(op(l1, l2))
    return out


@lru_cache(maxsize=None)
def sentence_family(max_type=2):
    """Deterministic closed sentences of quantifier depth <= 2, types <= max_type.

    Built from equality and membership atoms over one or two bound variables,
    closed under negation and one binary connective.  The same tuple comes back
    on every call, in a fixed order.
    """
    out = []
    types = range(max_type + 1)
    for t in types:
        x = Var("x", t)
        for quant in (Forall, Exists):
            for m in _matrices([Equal(x, x)]):
                out.append(Sentence(quant(x, m)))
    for t1 in types:
        for t2 in types:
            x, y = Var("x", t1), Var("y", t2)
            atoms = [Equal(x, x), Equal(y, y)]
            if t1 == t2:
                atoms.append(Equal(x, y))
            if t2 == t1 + 1:
                atoms.append(Member(x, y))
            if t1 == t2 + 1:
                atoms.append(Member(y, x))
            for q1 in (Forall, Exists):
                for q2 in (Forall, Exists):
                    for m in _matrices(atoms):
                        out.append(Sentence(q1(x, q2(y, m))))
    return tuple(out)


def _comprehension_matrices(x):
    u_same = Var("u", x.type)
    atoms = [
        Equal(x, x),
        Exists(u_same, Equal(u_same, x)),
        Forall(u_same, Equal(u_same, x)),
    ]
    if x.type == 0:
        # membership atoms quantify one level up; keep them to the cheap level
        u_up = Var("u", 1)
        atoms.append(Exists(u_up, Member(x, u_up)))
        atoms.append(Forall(u_up, Member(x, u_up)))
    return _matrices(atoms)


@lru_cache(maxsize=None)
def comprehension_family(max_level=1):
    """Set-existence instances for every matrix in a fixed pool, levels 0..max_level.

    Each instance asserts a set at level i+1 collecting exactly the level-i
    values satisfying the matrix.
    """
    out = []
    for i in range(max_level + 1):
        x = Var("x", i)
        a = Var("A", i + 1)
        for m in _comprehension_matrices(x):
            out.append(Sentence(F.comprehension_instance(m, x, a)))
    return tuple(out)

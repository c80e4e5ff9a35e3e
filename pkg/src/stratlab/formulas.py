"""Formula ASTs for typed set-theoretic languages, with the standard transforms.

Formulas are first-order with equality and membership between variables only.
A variable may carry a declared type (a small integer).  Four typing modes are
supported:

  TST   types are naturals, equality needs equal types, membership raises by 1
  TSTU  TST plus a reserved constant ``empty`` usable at each positive type
  TNT   like TST but types range over all integers
  TTT   membership relates any strictly increasing pair of types

ASTs are immutable dataclasses compared structurally (declared types count).
All public constructors and transforms keep formulas in normal form: no
variable is bound twice and no name occurs both bound and free.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .errors import CaptureError, MissingTypesError, NotIncreasingError, TypeOutOfRangeError

EMPTY_NAME = "empty"


class Mode(enum.Enum):
    TST = "tst"
    TSTU = "tstu"
    TNT = "tnt"
    TTT = "ttt"


@dataclass(frozen=True)
class Var:
    name: str
    type: int | None = None

    def is_empty_const(self):
        return self.name == EMPTY_NAME


class Formula:
    """Marker base class for all formula nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Equal(Formula):
    left: Var
    right: Var


@dataclass(frozen=True)
class Member(Formula):
    element: Var
    container: Var


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Sentence:
    """A closed formula tagged with the typing mode it is meant for."""

    formula: Formula
    mode: Mode = Mode.TST


def unwrap(phi):
    return phi.formula if isinstance(phi, Sentence) else phi


# ---------------------------------------------------------------------------
# traversal helpers


def walk(phi):
    """Yield every node of the AST in pre-order."""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.body)
        elif isinstance(node, (And, Or, Implies, Iff)):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, (Forall, Exists)):
            stack.append(node.body)


def atoms(phi):
    """All atomic subformulas (Equal and Member nodes) in syntactic order."""
    out = []

    def go(node):
        if isinstance(node, (Equal, Member)):
            out.append(node)
        elif isinstance(node, Not):
            go(node.body)
        elif isinstance(node, (And, Or, Implies, Iff)):
            go(node.left)
            go(node.right)
        elif isinstance(node, (Forall, Exists)):
            go(node.body)

    go(unwrap(phi))
    return out


def occurrences(phi):
    """All variable occurrences, binders included, in syntactic order."""
    out = []

    def go(node):
        if isinstance(node, Equal):
            out.extend((node.left, node.right))
        elif isinstance(node, Member):
            out.extend((node.element, node.container))
        elif isinstance(node, Not):
            go(node.body)
        elif isinstance(node, (And, Or, Implies, Iff)):
            go(node.left)
            go(node.right)
        elif isinstance(node, (Forall, Exists)):
            out.append(node.var)
            go(node.body)

    go(unwrap(phi))
    return out


def bound_names(phi):
    return {n.var.name for n in walk(unwrap(phi)) if isinstance(n, (Forall, Exists))}


def free_vars(phi):
    """Free variables in order of first occurrence.  The reserved constant counts."""
    seen = {}

    def go(node, bound):
        if isinstance(node, Equal):
            for v in (node.left, node.right):
                if v.name not in bound and v.name not in seen:
                    seen[v.name] = v
        elif isinstance(node, Member):
            for v in (node.element, node.container):
                if v.name not in bound and v.name not in seen:
                    seen[v.name] = v
        elif isinstance(node, Not):
            go(node.body, bound)
        elif isinstance(node, (And, Or, Implies, Iff)):
            go(node.left, bound)
            go(node.right, bound)
        elif isinstance(node, (Forall, Exists)):
            go(node.body, bound | {node.var.name})

    go(unwrap(phi), frozenset())
    return list(seen.values())


def is_closed(phi):
    return all(v.is_empty_const() for v in free_vars(phi))


def all_names(phi):
    return {v.name for v in occurrences(phi)}


def map_vars(phi, fn):
    """Rebuild the formula applying fn to every Var (binders included)."""
    node = unwrap(phi)
    if isinstance(node, Equal):
        return Equal(fn(node.left), fn(node.right))
    if isinstance(node, Member):
        return Member(fn(node.element), fn(node.container))
    if isinstance(node, Not):
        return Not(map_vars(node.body, fn))
    if isinstance(node, (And, Or, Implies, Iff)):
        return type(node)(map_vars(node.left, fn), map_vars(node.right, fn))
    if isinstance(node, (Forall, Exists)):
        return type(node)(fn(node.var), map_vars(node.body, fn))
    raise TypeError(f"not a formula node: {node!r}")


def declared_types(phi):
    """Mapping name -> declared type.  Raises on internally conflicting annotations."""
    out = {}
    for v in occurrences(phi):
        if v.type is None:
            out.setdefault(v.name, None)
        elif out.get(v.name) is None:
            out[v.name] = v.type
        elif out[v.name] != v.type:
            raise CaptureError(f"variable {v.name} carries conflicting types {out[v.name]} and {v.type}")
    return out


def with_types(phi, assignment):
    """Return a copy with declared types taken from assignment (by name).

    Names absent from the assignment keep whatever they had.
    """

    def fix(v):
        if v.name in assignment:
            return replace(v, type=assignment[v.name])
        return v

    result = map_vars(phi, fix)
    return replace(phi, formula=result) if isinstance(phi, Sentence) else result


# ---------------------------------------------------------------------------
# normal form

def fresh_name(base, used):
    i = 2
    while f"{base}_{i}" in used:
        i += 1
    return f"{base}_{i}"


def normalize(phi):
    """Alpha-rename so no variable is bound twice or both bound and free.

    Renamed variables keep their declared types.  Free names always win; a
    binder whose name collides with a free name or an earlier binder gets a
    fresh suffixed name.  Deterministic: binders are processed in pre-order.
    """
    node = unwrap(phi)
    used = set(all_names(node))
    taken = {v.name for v in free_vars(node)}

    def go(n, env):
        def fix(v):
            return replace(v, name=env[v.name]) if v.name in env else v

        if isinstance(n, Equal):
            return Equal(fix(n.left), fix(n.right))
        if isinstance(n, Member):
            return Member(fix(n.element), fix(n.container))
        if isinstance(n, Not):
            return Not(go(n.body, env))
        if isinstance(n, (And, Or, Implies, Iff)):
            return type(n)(go(n.left, env), go(n.right, env))
        if isinstance(n, (Forall, Exists)):
            name = n.var.name
            if name in taken:
                name = fresh_name(n.var.name, used | taken)
            taken.add(name)
            used.add(name)
            inner = dict(env)
            inner[n.var.name] = name
            return type(n)(replace(n.var, name=name), go(n.body, inner))
        raise TypeError(f"not a formula node: {n!r}")

    result = go(node, {})
    return replace(phi, formula=result) if isinstance(phi, Sentence) else result


# ---------------------------------------------------------------------------
# pretty printing

_PREC_IFF = 1
_PREC_IMPLIES = 2
_PREC_OR = 3
_PREC_AND = 4
_PREC_NOT = 5


def _var_str(v):
    if v.type is None:
        return v.name
    return f"{v.name}^{v.type}"


def _ends_in_quantifier(node):
    # True when the rightmost spine of the printed form is an open quantifier
    # body, which would swallow any following operator during reparsing.
    while True:
        if isinstance(node, (Forall, Exists)):
            return True
        if isinstance(node, (And, Or, Implies, Iff)):
            node = node.right
        elif isinstance(node, Not):
            node = node.body
        else:
            return False


_BINOPS = {And: ("&", _PREC_AND), Or: ("|", _PREC_OR),
           Implies: ("->", _PREC_IMPLIES), Iff: ("<->", _PREC_IFF)}


def pretty(phi):
    """Render a formula so that parsing the result gives back the same AST.

    Connectives are printed right-associatively with minimal parentheses.
    A quantifier body extends to the end of the enclosing parenthesis, so a
    subterm ending in an open quantifier gets wrapped whenever further tokens
    would follow it (the protect flag).
    """

    def go(node, prec, protect):
        if isinstance(node, Equal):
            return f"{_var_str(node.left)} = {_var_str(node.right)}"
        if isinstance(node, Member):
            return f"{_var_str(node.element)} in {_var_str(node.container)}"
        if isinstance(node, (Forall, Exists)):
            kw = "forall" if isinstance(node, Forall) else "exists"
            text = f"{kw} {_var_str(node.var)}. {go(node.body, 0, False)}"
            return f"({text})" if protect else text
        if isinstance(node, Not):
            if isinstance(node.body, (Equal, Member)):
                return f"~({go(node.body, 0, False)})"
            return f"~{go(node.body, _PREC_NOT, protect)}"
        sym, p = _BINOPS[type(node)]
        wrap = p < prec
        left = go(node.left, p + 1, True)
        right = go(node.right, p, False if wrap else protect)
        text = f"{left} {sym} {right}"
        return f"({text})" if wrap else text

    return go(unwrap(phi), 0, False)


# ---------------------------------------------------------------------------
# transforms


def _require_all_typed(phi):
    missing = sorted({v.name for v in occurrences(phi) if v.type is None})
    if missing:
        raise MissingTypesError(f"variables lack declared types: {', '.join(missing)}")


def raise_types(phi):
    """Increment every declared type by one.  All variables must be typed."""
    _require_all_typed(unwrap(phi))
    return map_vars_keep(phi, lambda v: replace(v, type=v.type + 1))


def map_vars_keep(phi, fn):
    result = map_vars(unwrap(phi), fn)
    return replace(phi, formula=result) if isinstance(phi, Sentence) else result


def translate(phi, s):
    """Re-annotate each declared type i to s[i] for a strictly increasing s.

    Turns a formula typed with consecutive levels into one whose types climb
    along the chosen index sequence.  s = (0, 1, ..., n) is the identity.
    """
    s = tuple(s)
    if any(a >= b for a, b in zip(s, s[1:])):
        raise NotIncreasingError(f"index sequence must be strictly increasing: {s}")
    _require_all_typed(unwrap(phi))
    for v in occurrences(phi):
        if not 0 <= v.type < len(s):
            raise TypeOutOfRangeError(f"type {v.type} of {v.name} outside sequence of length {len(s)}")
    return map_vars_keep(phi, lambda v: replace(v, type=s[v.type]))


def ambiguity_instance(phi):
    """The biconditional between a sentence and its type-raised copy."""
    node = unwrap(phi)
    inst = Iff(node, unwrap(raise_types(node)))
    return replace(phi, formula=inst) if isinstance(phi, Sentence) else inst


def comprehension_instance(phi, x, set_var):
    """Close phi into the assertion that {x : phi} exists as a set.

    set_var must not occur in phi at all, and x must not be bound in phi.
    """
    node = unwrap(phi)
    names = all_names(node)
    if set_var.name in names:
        raise CaptureError(f"{set_var.name} already occurs in the formula")
    if x.name in bound_names(node):
        raise CaptureError(f"{x.name} is already bound in the formula")
    inst = Exists(set_var, Forall(x, Iff(Member(x, set_var), node)))
    return replace(phi, formula=inst) if isinstance(phi, Sentence) else inst

"""Stratification checking via union-find with offsets.

An assignment sigma of integers to variable names stratifies a formula when
sigma(x) = sigma(y) for every atom ``x = y`` and sigma(y) = sigma(x) + 1 for
every atom ``x in y``.  These are difference constraints, so the solver keeps
a disjoint-set forest in which every node stores its type offset relative to
its representative.  A formula fails to stratify exactly when its constraint
graph contains a cycle whose offsets sum to a nonzero value; the solver
returns such a cycle as the refutation witness.

Declared type annotations play no role here: stratifiability is a property of
the constraint graph of names.  Each occurrence of the reserved constant
``empty`` is its own node, since the constant exists at every positive type.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import formulas as F
from .errors import MissingTypesError
from .formulas import EMPTY_NAME, Equal, Member, Mode


@dataclass(frozen=True)
class Stratification:
    """A canonical stratifying assignment: every component's minimum is 0."""

    assignment: dict

    def __getitem__(self, name):
        return self.assignment[name]


@dataclass(frozen=True)
class NotStratified:
    """Refutation: atoms forming a cycle whose offsets sum to offset_sum != 0."""

    cycle: tuple
    offset_sum: int


class _OffsetForest:
    """Union-find where each node carries its offset from the representative."""

    def __init__(self):
        self.parent = {}
        self.offset = {}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self.offset[x] = 0

    def find(self, x):
        root = x
        path = []
        while self.parent[root] != root:
            path.append(root)
            root = self.parent[root]
        # path compression, accumulating offsets to the root
        total = 0
        for node in reversed(path):
            total += self.offset[node]
            self.parent[node] = root
            self.offset[node] = total
        return root, self.offset[x]

    def union(self, u, v, diff):
        """Record sigma(v) - sigma(u) = diff.  Returns None, or the implied
        difference when u and v were already connected (caller checks it)."""
        ru, pu = self.find(u)
        rv, pv = self.find(v)
        if ru == rv:
            return pv - pu
        # attach rv under ru: offset of rv must satisfy pv' = pu + diff
        self.parent[rv] = ru
        self.offset[rv] = pu + diff - pv
        return None


def constraint_edges(phi):
    """Edges (u, v, diff, atom) with sigma(v) - sigma(u) = diff, in syntactic order."""
    edges = []
    counter = 0

    def node_name(v):
        nonlocal counter
        if v.name == EMPTY_NAME:
            counter += 1
            return f"{EMPTY_NAME}#{counter}"
        return v.name

    for atom in F.atoms(phi):
        if isinstance(atom, Equal):
            edges.append((node_name(atom.left), node_name(atom.right), 0, atom))
        else:
            edges.append((node_name(atom.element), node_name(atom.container), 1, atom))
    return edges


def _witness_cycle(edges, upto, u, v, conflict_edge):
    """Shortest path u ~> v through the first `upto` edges, plus the conflicting
    atom, forms the refutation cycle."""
    adj = {}
    for a, b, d, atom in edges[:upto]:
        adj.setdefault(a, []).append((b, d, atom))
        adj.setdefault(b, []).append((a, -d, atom))
    # BFS from u to v
    prev = {u: None}
    queue = [u]
    while queue:
        nxt = []
        for node in queue:
            for b, d, atom in adj.get(node, ()):
                if b not in prev:
                    prev[b] = (node, d, atom)
                    nxt.append(b)
        queue = nxt
    path_atoms = []
    path_sum = 0
    node = v
    while prev[node] is not None:
        parent, d, atom = prev[node]
        path_atoms.append(atom)
        path_sum += d
        node = parent
    path_atoms.reverse()
    a, b, d, atom = conflict_edge
    return tuple(path_atoms + [atom]), path_sum - d


def infer(phi):
    """Decide stratifiability.  Returns a canonical Stratification or a
    NotStratified refutation cycle."""
    edges = constraint_edges(phi)
    forest = _OffsetForest()
    order = []
    for i, (u, v, d, atom) in enumerate(edges):
        for x in (u, v):
            if x not in forest.parent:
                forest.add(x)
                order.append(x)
        implied = forest.union(u, v, d)
        if implied is not None and implied != d:
            cycle, total = _witness_cycle(edges, i, u, v, edges[i])
            return NotStratified(cycle, total)
    # variables never touched by any atom still deserve a type
    for v in F.occurrences(phi):
        name = v.name
        if name != EMPTY_NAME and name not in forest.parent:
            forest.add(name)
            order.append(name)
    component_min = {}
    raw = {}
    for name in order:
        root, p = forest.find(name)
        raw[name] = (root, p)
        if root not in component_min or p < component_min[root]:
            component_min[root] = p
    assignment = {}
    for name in order:
        if name.startswith(f"{EMPTY_NAME}#"):
            continue
        root, p = raw[name]
        assignment[name] = p - component_min[root]
    return Stratification(assignment)


def is_stratified(phi):
    return isinstance(infer(phi), Stratification)


def check_typed(phi, mode=Mode.TST):
    """Is the formula well-formed for the given typing discipline?

    Every variable must carry a declared type; MissingTypesError otherwise.
    The reserved constant is admitted only in TSTU mode, at positive types.
    """
    occs = F.occurrences(phi)
    missing = sorted({v.name for v in occs if v.type is None})
    if missing:
        raise MissingTypesError(f"variables lack declared types: {', '.join(missing)}")

    for v in occs:
        if v.name == EMPTY_NAME:
            if mode is not Mode.TSTU or v.type < 1:
                return False
        elif mode in (Mode.TST, Mode.TSTU, Mode.TTT) and v.type < 0:
            return False

    for atom in F.atoms(phi):
        if isinstance(atom, Equal):
            if atom.left.type != atom.right.type:
                return False
        else:
            lo, hi = atom.element.type, atom.container.type
            if mode is Mode.TTT:
                if not lo < hi:
                    return False
            elif hi != lo + 1:
                return False
    return True


def _propagation_check(phi):
    """Second opinion on stratifiability: breadth-first difference propagation.

    Anchors one node per connected component at 0, propagates the forced
    values along a spanning tree, then checks every constraint.  Difference
    constraints are satisfiable over the integers exactly when this works.
    """
    edges = constraint_edges(phi)
    adj = {}
    for u, v, d, _ in edges:
        adj.setdefault(u, []).append((v, d))
        adj.setdefault(v, []).append((u, -d))
    value = {}
    for start in adj:
        if start in value:
            continue
        value[start] = 0
        queue = [start]
        while queue:
            node = queue.pop()
            for other, d in adj[node]:
                if other not in value:
                    value[other] = value[node] + d
                    queue.append(other)
    return all(value[v] - value[u] == d for u, v, d, _ in edges)


def stratified_equiv_check(phi):
    """Metamorphic self-test: the solver's verdict must match the existence of
    a stratifying assignment found by independent propagation."""
    verdict = isinstance(infer(phi), Stratification)
    exists = _propagation_check(phi)
    if verdict != exists:
        raise AssertionError(
            f"solver verdict {verdict} disagrees with propagation search {exists}")
    return verdict

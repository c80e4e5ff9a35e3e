"""Partition arguments over level families: color index sets by the truth
values of a sentence batch, hunt for homogeneous sets, and package verified
type-shift witnesses.

The driving fact: truth of a sentence with types below n, read through an
increasing choice of n levels, depends only on which levels were chosen.
Coloring all n-element index sets by those truth bits and finding a
homogeneous set H of size n+1 yields one interpretation (the enumeration of
H) under which every sentence in the batch agrees with its type-raised form:
the first n and last n levels of H carry the same color.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import formulas as F
from .errors import NoHomogeneousSetError, TypeOutOfRangeError
from .formulas import Mode, raise_types, translate, unwrap
from .natmodel import DEFAULT_BUDGET, Interpretation, evaluate_tstu, evaluate_ttt
from .stratify import check_typed


@dataclass(frozen=True)
class Coloring:
    lambda_fin: int
    n: int
    width: int
    color_of: dict

    def classes(self):
        """Color -> list of subsets, subsets in lexicographic order."""
        out = {}
        for subset in sorted(self.color_of):
            out.setdefault(self.color_of[subset], []).append(subset)
        return out


def coloring_from_table(lambda_fin, n, table):
    """Build a Coloring from an explicit subset -> color mapping.

    Every n-element subset of range(lambda_fin) must be covered exactly once.
    """
    color_of = {}
    for subset, color in table.items():
        key = tuple(sorted(subset))
        if len(key) != n or len(set(key)) != n:
            raise ValueError(f"{subset} is not an {n}-element subset")
        if not all(0 <= i < lambda_fin for i in key):
            raise ValueError(f"{subset} is not within range({lambda_fin})")
        if key in color_of:
            raise ValueError(f"{subset} colored twice")
        color_of[key] = int(color)
    missing = [c for c in itertools.combinations(range(lambda_fin), n) if c not in color_of]
    if missing:
        raise ValueError(f"{len(missing)} subsets uncolored, first {missing[0]}")
    width = max(color_of.values()).bit_length() if color_of else 0
    return Coloring(lambda_fin, n, max(width, 1), color_of)


def _check_sigma(sigma, n=None):
    """Validate a sentence batch; infer the type bound when not given."""
    sigma = tuple(sigma)
    if not sigma:
        raise ValueError("sentence batch must be nonempty")
    tops = []
    for phi in sigma:
        node = unwrap(phi)
        if not F.is_closed(node):
            raise ValueError("batch sentences must be closed")
        if not check_typed(node, Mode.TSTU):
            raise ValueError("batch sentences must be well-typed")
        tops.append(max(v.type for v in F.occurrences(node)))
    if n is None:
        n = 1 + max(tops)
    elif max(tops) >= n:
        raise TypeOutOfRangeError(f"type {max(tops)} not below bound {n}")
    return sigma, n


def _color(family, sigma, n, route):
    """Color every n-subset by the truth bits of sigma along its enumeration.

    route(s, phi) evaluates phi through the increasing level choice s.  On the
    first subset with room above it, the color is recomputed under two longer
    level choices differing in their extra level; truth may not depend on the
    continuation, and this turns that claim into an executed check.
    """
    color_of = {}
    cache = {}
    checked_continuations = False
    for subset in itertools.combinations(range(family.length), n):
        sizes_key = tuple(family.sizes[i] for i in subset)
        if sizes_key in cache:
            color_of[subset] = cache[sizes_key]
            continue
        color = 0
        for j, phi in enumerate(sigma):
            if route(subset, phi):
                color |= 1 << j
        if not checked_continuations and subset[-1] + 2 < family.length:
            for extra in (subset[-1] + 1, subset[-1] + 2):
                longer = subset + (extra,)
                redone = 0
                for j, phi in enumerate(sigma):
                    if route(longer, phi):
                        redone |= 1 << j
                assert redone == color, "truth depended on the continuation levels"
            checked_continuations = True
        cache[sizes_key] = color
        color_of[subset] = color
    return Coloring(family.length, n, len(sigma), color_of)


def color_by_theory(family, sigma, n, budget=DEFAULT_BUDGET):
    """Coloring of n-subsets by truth of sigma under the subset's enumeration."""
    sigma, n = _check_sigma(sigma, n)

    def route(s, phi):
        return evaluate_tstu(Interpretation(family, s), phi, budget)

    return _color(family, sigma, n, route)


def find_homogeneous(coloring, k):
    """A k-set whose n-subsets all share one color, or None when none exists.

    Color classes are tried in descending size.  Within a class the search
    extends candidate sets element by element in ascending order, admitting an
    element only while every completed n-subset stays in the class.
    """
    n = coloring.n
    if not n <= k <= coloring.lambda_fin:
        raise ValueError(f"need n = {n} <= k <= lambda_fin = {coloring.lambda_fin}")
    classes = coloring.classes()
    order = sorted(classes, key=lambda c: (-len(classes[c]), c))
    for color in order:
        members = set(classes[color])
        vertices = sorted({i for subset in members for i in subset})
        if len(vertices) < k:
            continue

        def extend(chosen, pool):
            if len(chosen) == k:
                return tuple(chosen)
            for idx, v in enumerate(pool):
                if len(chosen) + len(pool) - idx < k:
                    break
                if len(chosen) >= n - 1:
                    new = [s + (v,) for s in itertools.combinations(chosen, n - 1)]
                    if any(tuple(sorted(s)) not in members for s in new):
                        continue
                found = extend(chosen + [v], pool[idx + 1:])
                if found:
                    return found
            return None

        got = extend([], vertices)
        if got:
            return got
    return None


def check_homogeneous(coloring, candidate):
    """Re-verify homogeneity directly, independent of how the set was found."""
    subsets = list(itertools.combinations(sorted(candidate), coloring.n))
    colors = {coloring.color_of[s] for s in subsets}
    return len(colors) == 1


@dataclass(frozen=True)
class AmbiguityWitness:
    H: tuple
    s: tuple
    verdicts: tuple  # one (value, raised_value) pair per batch sentence

    def agrees(self):
        return all(a == b for a, b in self.verdicts)


def _witness(family, sigma, route):
    sigma, n = _check_sigma(sigma)
    coloring = _color(family, sigma, n, route)
    if n + 1 > family.length:
        raise NoHomogeneousSetError(
            f"need {n + 1} levels, family has {family.length}", coloring=coloring)
    chosen = find_homogeneous(coloring, n + 1)
    if chosen is None:
        raise NoHomogeneousSetError(
            f"no homogeneous {n + 1}-set among {family.length} levels", coloring=coloring)
    assert check_homogeneous(coloring, chosen)
    s = tuple(sorted(chosen))
    verdicts = []
    for phi in sigma:
        value = route(s, phi)
        raised_value = route(s, raise_types(phi))
        assert value == raised_value, "homogeneous set failed to equalize a sentence"
        verdicts.append((value, raised_value))
    return AmbiguityWitness(chosen, s, tuple(verdicts))


def jensen_witness(family, sigma, budget=DEFAULT_BUDGET):
    """Interpretation under which each batch sentence matches its raised form.

    Needs one more level in the homogeneous set than the type bound, so the
    raised sentences stay within range.  Raises NoHomogeneousSet, with the
    coloring attached, when the family is too short or too uneven.
    """

    def route(s, phi):
        return evaluate_tstu(Interpretation(family, s), phi, budget)

    return _witness(family, sigma, route)


def ttt_transfer_demo(family, sigma, budget=DEFAULT_BUDGET):
    """Same argument run through the translation route.

    Instead of interpreting fixed types through chosen levels, each sentence
    is translated so its types become the chosen level indices, then evaluated
    with types read directly as family levels.  On these families both routes
    agree definitionally; the witness machinery does not care which is used.
    """

    def route(s, phi):
        return evaluate_ttt(family, translate(phi, s), budget)

    return _witness(family, sigma, route)

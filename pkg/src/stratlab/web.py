"""Finite cardinal webs over subset-shaped type indices.

A fragment assigns a natural number to some nonempty subsets of
range(lambda_fin).  Two properties are checked.  Naturality: dropping the
minimum from an index exponentiates the value, 2^tau(A) = tau(A minus min).
Elementarity: for indices with more than n elements, the truth profile of a
sentence batch in a depth-n tower with tau(A) atoms may depend only on the n
smallest elements of A.  The two together make an index-shifting ambiguity
argument go through; the sweep shows that at small caps nothing satisfies
both, which is the finite shadow of the incompatibility with choice.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from . import formulas as F
from .ambiguity import AmbiguityWitness, Coloring, check_homogeneous, find_homogeneous
from .errors import MissingIndexError, NoHomogeneousSetError, StratlabError
from .formulas import Mode, raise_types, unwrap
from .natmodel import DEFAULT_BUDGET, build_default, evaluate
from .stratify import check_typed


@dataclass(frozen=True, eq=True)
class WebFragment:
    lambda_fin: int
    tau: dict  # sorted index tuple -> value

    def value(self, index):
        key = tuple(sorted(index))
        if key not in self.tau:
            raise MissingIndexError(f"index {list(key)} has no assigned value")
        return self.tau[key]

    def has(self, index):
        return tuple(sorted(index)) in self.tau

    def indices(self):
        return sorted(self.tau)


def build_fragment(lambda_fin, tau):
    """Validate index shapes and values and canonicalize the mapping."""
    out = {}
    for index, value in tau.items():
        key = tuple(sorted(index))
        if not key:
            raise ValueError("indices must be nonempty")
        if len(set(key)) != len(key):
            raise ValueError(f"index {list(index)} repeats an element")
        if not all(0 <= i < lambda_fin for i in key):
            raise ValueError(f"index {list(key)} outside range({lambda_fin})")
        if key in out:
            raise ValueError(f"index {list(key)} assigned twice")
        value = int(value)
        if value < 0:
            raise ValueError("values must be nonnegative")
        out[key] = value
    return WebFragment(lambda_fin, out)


def fragment_from_json(text, lambda_fin=None):
    """Keys are JSON lists rendered as strings, e.g. '[1,2]': 2."""
    raw = json.loads(text)
    tau = {}
    top = -1
    for key, value in raw.items():
        index = json.loads(key)
        if not isinstance(index, list) or not all(isinstance(i, int) for i in index):
            raise ValueError(f"key {key!r} is not a list of integers")
        tau[tuple(index)] = value
        top = max(top, max(index, default=-1))
    if lambda_fin is None:
        lambda_fin = top + 1
    return build_fragment(lambda_fin, tau)


def fragment_to_json(fragment):
    items = {json.dumps(list(k), separators=(",", ":")): v for k, v in sorted(fragment.tau.items())}
    return json.dumps(items, separators=(",", ":"))


def drop_min(index):
    return tuple(sorted(index))[1:]


def smallest(index, n):
    """The n smallest elements; the part the theory is allowed to depend on."""
    return tuple(sorted(index))[:n]


@dataclass(frozen=True)
class NaturalityReport:
    violations: tuple  # (A, A_minus_min, expected 2^tau(A), actual)
    missing: tuple     # (A, A_minus_min) pairs where the smaller index is absent

    @property
    def passed(self):
        return not self.violations


def check_naturality(fragment):
    """Arithmetic check of 2^tau(A) = tau(A minus min) over the whole mapping.

    Indices whose min-dropped counterpart is absent are listed separately as
    informational, not as violations; partial fragments are legitimate.
    """
    violations = []
    missing = []
    for index in fragment.indices():
        if len(index) < 2:
            continue
        shorter = drop_min(index)
        if not fragment.has(shorter):
            missing.append((index, shorter))
            continue
        expected = 2 ** fragment.value(index)
        actual = fragment.value(shorter)
        if expected != actual:
            violations.append((index, shorter, expected, actual))
    return NaturalityReport(tuple(violations), tuple(missing))


@dataclass(frozen=True)
class ElementarityReport:
    n: int
    width: int
    violations: tuple  # (A, B, base_a, base_b, vector_a, vector_b)

    @property
    def passed(self):
        return not self.violations


def _elementarity_pairs(fragment, n, vector_of_base):
    """Group indices larger than n by their n smallest elements and compare."""
    groups = {}
    for index in fragment.indices():
        if len(index) > n:
            groups.setdefault(smallest(index, n), []).append(index)
    violations = []
    width = 0
    for key in sorted(groups):
        for a, b in itertools.combinations(groups[key], 2):
            va = vector_of_base(fragment.value(a))
            vb = vector_of_base(fragment.value(b))
            width = len(va)
            if va != vb:
                assert smallest(a, n) == smallest(b, n)
                violations.append((a, b, fragment.value(a), fragment.value(b), va, vb))
    return ElementarityReport(n, width, tuple(violations))


def _sentence_vector_fn(sigma, n, budget):
    sigma = tuple(sigma)
    for phi in sigma:
        node = unwrap(phi)
        if not check_typed(node, Mode.TST):
            raise ValueError("batch sentences must be TST-well-typed")
        if any(v.type >= n for v in F.occurrences(node)):
            raise ValueError(f"types must stay below the depth {n}")
    cache = {}

    def vector(base):
        if base not in cache:
            model = build_default(base, n, budget)
            cache[base] = tuple(evaluate(model, phi) for phi in sigma)
        return cache[base]

    return vector


def check_elementarity(fragment, n, sigma, budget=DEFAULT_BUDGET):
    """Model-evaluation route: truth vectors of sigma at width-n towers."""
    return _elementarity_pairs(fragment, n, _sentence_vector_fn(sigma, n, budget))


def cardinality_profile(cap):
    """Arithmetic truth vector of "at least k base elements" for k = 1..cap.

    Equivalent to evaluating the k-fold distinctness sentences, which is
    infeasible for large k; the tests cross-check the equivalence at small k.
    """

    def vector(base):
        return tuple(base >= k for k in range(1, cap + 1))

    return vector


def check_elementarity_profile(fragment, n, profile):
    """Same pair logic as check_elementarity with an arbitrary base profile."""
    return _elementarity_pairs(fragment, n, profile)


def web_ambiguity(fragment, sigma, budget=DEFAULT_BUDGET):
    """Find an index set making each batch sentence match its raised form.

    Colors each n-subset A of the indices that still have room above them by
    the truth vector of sigma at a depth-n tower with tau(A + one padding
    element) atoms.  A homogeneous set H of size n+2 then names a single
    depth-(n+1) tower, base tau(H), in which the sentences and their raised
    forms are evaluated directly.
    """
    sigma = tuple(sigma)
    if not sigma:
        raise ValueError("sentence batch must be nonempty")
    tops = []
    for phi in sigma:
        node = unwrap(phi)
        if not F.is_closed(node):
            raise ValueError("batch sentences must be closed")
        if not check_typed(node, Mode.TST):
            raise ValueError("batch sentences must be TST-well-typed")
        tops.append(max(v.type for v in F.occurrences(node)))
    n = 1 + max(tops)
    vector = _sentence_vector_fn(sigma, n, budget)

    ground = fragment.lambda_fin - 1  # padding must stay inside the index range
    color_of = {}
    palette = {}
    for subset in itertools.combinations(range(ground), n):
        padded = subset + (subset[-1] + 1,)
        vec = vector(fragment.value(padded))
        color_of[subset] = palette.setdefault(vec, len(palette))
    coloring = Coloring(ground, n, len(sigma), color_of)

    if n + 2 > ground:
        raise NoHomogeneousSetError(
            f"need {n + 2} indices with room above them, have {ground}",
            coloring=coloring)
    chosen = find_homogeneous(coloring, n + 2)
    if chosen is None:
        raise NoHomogeneousSetError(
            f"no homogeneous {n + 2}-set among {ground} indices", coloring=coloring)
    assert check_homogeneous(coloring, chosen)

    base = fragment.value(chosen)
    model = build_default(base, n + 1, budget)
    verdicts = []
    for phi in sigma:
        value = evaluate(model, phi)
        raised_value = evaluate(model, raise_types(phi))
        if value != raised_value:
            raise StratlabError(
                "homogeneous index set failed to equalize a sentence; "
                "the fragment does not satisfy elementarity for this batch")
        verdicts.append((value, raised_value))
    return AmbiguityWitness(chosen, tuple(sorted(chosen)), tuple(verdicts))


# ---------------------------------------------------------------------------
# the exhaustive sweep


@dataclass(frozen=True)
class SweepReport:
    lambda_fin: int
    cap: int
    n: int
    space_size: int            # all value assignments to all indices
    consistent_count: int      # survivors of the forced-chain propagation
    naturality_passers: tuple  # fragments, as sorted (index, value) item tuples
    both_passers: tuple

    @property
    def none_pass_both(self):
        return not self.both_passers


def fragment_key(fragment):
    return tuple(sorted(fragment.tau.items()))


def _all_indices(lambda_fin):
    out = []
    for size in range(1, lambda_fin + 1):
        out.extend(itertools.combinations(range(lambda_fin), size))
    return out


def impossibility_sweep(lambda_fin=3, value_cap=16, n=1, profile=None, reverse=False):
    """Enumerate every total fragment within the cap; report what passes.

    Total fragments violating naturality are pruned by constraint propagation:
    values on indices containing 0 are free, every other index's value is
    forced to 2^(value of each extension downward), and disagreement or a
    forced value above the cap rules out all completions.  Survivors are
    re-checked with check_naturality, then tested for elementarity under the
    given base profile (default: the cardinality profile at the cap).

    reverse flips the enumeration order of the free values; the result sets
    must not depend on it.
    """
    if profile is None:
        profile = cardinality_profile(value_cap)
    indices = _all_indices(lambda_fin)
    free = [a for a in indices if a[0] == 0]
    forced = [a for a in indices if a[0] != 0]
    forced.sort()  # increasing min, so every parent is settled first
    values = range(value_cap, -1, -1) if reverse else range(value_cap + 1)

    naturality_passers = []
    both_passers = []
    consistent = 0
    for choice in itertools.product(values, repeat=len(free)):
        tau = dict(zip(free, choice))
        ok = True
        for a in forced:
            want = {2 ** tau[tuple(sorted((b,) + a))] for b in range(a[0])}
            if len(want) != 1:
                ok = False
                break
            value = want.pop()
            if value > value_cap:
                ok = False
                break
            tau[a] = value
        if not ok:
            continue
        consistent += 1
        fragment = WebFragment(lambda_fin, dict(tau))
        report = check_naturality(fragment)
        assert report.passed and not report.missing, "propagation disagrees with the checker"
        naturality_passers.append(fragment_key(fragment))
        if check_elementarity_profile(fragment, n, profile).passed:
            both_passers.append(fragment_key(fragment))

    naturality_passers.sort()
    both_passers.sort()
    space = (value_cap + 1) ** len(indices)
    return SweepReport(lambda_fin, value_cap, n, space, consistent,
                       tuple(naturality_passers), tuple(both_passers))

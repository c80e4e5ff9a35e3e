"""Supports: small certifying sets for objects built over the atoms.

A support of x is a small set S of atoms and pairwise disjoint near-litters
such that every allowable permutation fixing S elementwise (atoms pointwise,
near-litters setwise) also fixes x.  The decision procedure works over the
partition of each clan into cells: the coarsest partition refining every
near-litter of S and isolating every atom of S.  Any S-fixer permutes each
cell within itself, so cell-unions are always fixed; conversely a set that
splits a cell is moved by a verified two-atom swap inside that cell.  At the
default parameters this dichotomy is exact for atoms and sets of atoms.

Sets of sets have no such clean dichotomy at finite scale.  True verdicts
come from certificates (all members individually fixed, or a union of local
cardinals over setwise-pinned litters); false verdicts from verified moving
permutations; anything else raises SearchBudgetExceededError rather than
guessing.

The census enumerates every subset of a clan against every candidate
support and checks, by a second independent arithmetic route, that the
symmetric subsets are exactly those within small symmetric difference of a
union of litters or the complement of one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..errors import NotStrongError, SearchBudgetExceededError
from .perms import apply_to_set, identity_perm, is_allowable, swap_extension
from .universe import NearLitter, local_cardinal, near_litters_of, resolve_core


@dataclass(frozen=True)
class SupportSet:
    elements: tuple

    def atoms(self):
        return tuple(e for e in self.elements if isinstance(e, str))

    def near_litters(self):
        return tuple(e for e in self.elements if isinstance(e, NearLitter))

    def __len__(self):
        return len(self.elements)


def support(u, *elements):
    """Validated SupportSet; accepts atom names, NearLitters, and litter ids."""
    resolved = []
    for e in elements:
        if isinstance(e, NearLitter):
            resolved.append(e)
        elif isinstance(e, (frozenset, set)):
            resolved.append(NearLitter(_require_core(u, e), frozenset(e)))
        elif e in u.litters:
            resolved.append(NearLitter(e, u.litters[e]))
        elif e in u.clan_of:
            resolved.append(e)
        else:
            raise ValueError(f"{e!r} is not an atom, litter, or near-litter")
    s = SupportSet(tuple(resolved))
    validate_support(u, s)
    return s


def _require_core(u, atom_set):
    core = resolve_core(u, atom_set)
    if core is None:
        raise ValueError("support element is not near any litter")
    return core


def validate_support(u, s):
    if len(set(s.elements)) != len(s.elements):
        raise ValueError("support elements repeat")
    if not u.params.is_small(len(s.elements)):
        raise ValueError(
            f"support has {len(s.elements)} elements; smallness bound is "
            f"{u.params.s_max}")
    for e in s.elements:
        if isinstance(e, NearLitter):
            if resolve_core(u, e.atoms) != e.core:
                raise ValueError(f"near-litter element has wrong core {e.core}")
            # support near-litters carry at most one anomaly: the census
            # biconditional needs support-size times anomaly-count small
            if len(e.anomalies(u)) > 1:
                raise ValueError(
                    "support near-litters may differ from their litter in at "
                    "most one atom")
        elif e not in u.clan_of:
            raise ValueError(f"unknown atom {e!r}")
    nls = s.near_litters()
    for a, b in itertools.combinations(nls, 2):
        if a.atoms & b.atoms:
            raise ValueError("near-litter elements overlap")


def check_strong(u, s):
    """Strong order: containing near-litters and parent atoms come first."""
    validate_support(u, s)
    for i, e in enumerate(s.elements):
        earlier = s.elements[:i]
        if isinstance(e, str) and u.is_regular(e):
            for n in s.near_litters():
                if e in n.atoms and n not in earlier:
                    raise NotStrongError(
                        f"atom {e} appears before the near-litter containing it")
        if isinstance(e, NearLitter):
            parent = u.parent_of[e.core]
            if parent in s.atoms() and parent not in earlier:
                raise NotStrongError(
                    f"near-litter on {e.core} appears before its parent atom")


# ---------------------------------------------------------------------------
# cells and pinning

def clan_cells(u, s, clan):
    """Partition of the clan induced by S, as a list of frozensets."""
    parts = [frozenset(u.clan_atoms(clan))]
    cutters = [n.atoms for n in s.near_litters()] + \
              [frozenset([a]) for a in s.atoms() if u.clan_of.get(a) == clan]
    for cut in cutters:
        nxt = []
        for p in parts:
            inside, outside = p & cut, p - cut
            if inside:
                nxt.append(inside)
            if outside:
                nxt.append(outside)
        parts = nxt
    return parts


def _is_cell_union(cells, xs):
    return all(p <= xs or p.isdisjoint(xs) for p in cells)


def pinned_litters(u, s):
    """Litters every S-fixer must fix setwise.

    A litter whose atom set is a union of S-cells is pinned; when all but
    one litter of a clan are pinned the last is pinned too, because clans
    are fixed setwise.
    """
    pinned = set()
    for clan in u.clans:
        cells = clan_cells(u, s, clan)
        for lid in u.clans[clan]:
            if _is_cell_union(cells, u.litters[lid]):
                pinned.add(lid)
        rest = [lid for lid in u.clans[clan] if lid not in pinned]
        if len(rest) == 1:
            pinned.add(rest[0])
    return pinned


def _forced_cores(u, s):
    """Litters whose image core every S-fixer must preserve.

    Includes the setwise-pinned litters and, by a counting argument, any
    core of a near-litter in S whose anomaly count stays below the majority
    threshold: the fixed near-litter drags a majority of the image with it,
    which no other litter can absorb.
    """
    forced = pinned_litters(u, s)
    majority = u.params.k // 2 + 1
    for n in s.near_litters():
        if len(n.atoms ^ u.litters[n.core]) < majority:
            forced.add(n.core)
    return forced


# ---------------------------------------------------------------------------
# verified movers

def fixes_support(u, perm, s):
    return all(
        apply_to_set(perm, e.atoms) == e.atoms if isinstance(e, NearLitter)
        else perm[e] == e
        for e in s.elements)


def _transposition(u, a, b):
    perm = identity_perm(u)
    perm[a], perm[b] = b, a
    return perm


def _plain_transport(u, la, lb):
    """Swap two litters wholesale, ascending order, identity elsewhere."""
    pa, pb = u.parent_of[la], u.parent_of[lb]
    if u.clan_of.get(pa) in u.clans:
        # regular parents: the swap must cascade through the parent litters
        try:
            return swap_extension(u, pa, pb)
        except Exception:
            return None
    perm = identity_perm(u)
    src, dst = u.sort_atoms(u.litters[la]), u.sort_atoms(u.litters[lb])
    perm.update(zip(src, dst))
    perm.update(zip(dst, src))
    perm[pa], perm[pb] = pb, pa
    return perm


def _rerouted_transport(u, la, lb, fixed):
    """Swap the cores of two litters while keeping the fixed atoms put.

    Displaced bulk fills the paired litter ascending; leftover slots and
    sources are matched up ascending as anomalies.  The result is a
    candidate only; callers must verify allowability.
    """
    pa, pb = u.parent_of[la], u.parent_of[lb]
    if u.clan_of.get(pa) in u.clans or pa in fixed or pb in fixed:
        return None
    perm = {a: a for a in fixed}
    perm[pa], perm[pb] = pb, pa
    clan = u.clan_of[next(iter(u.litters[la]))]
    spare_sources, spare_slots = [], []
    targets = {la: lb, lb: la}
    for lid in u.clans[clan]:
        sources = [a for a in u.sort_atoms(u.litters[lid]) if a not in fixed]
        slots = [a for a in u.sort_atoms(u.litters[targets.get(lid, lid)])
                 if a not in fixed]
        n = min(len(sources), len(slots))
        perm.update(zip(sources[:n], slots[:n]))
        spare_sources.extend(sources[n:])
        spare_slots.extend(slots[n:])
    if len(spare_sources) != len(spare_slots):
        return None
    perm.update(zip(spare_sources, spare_slots))
    for a in u.atoms:
        perm.setdefault(a, a)
    if len(set(perm.values())) != len(perm):
        return None
    return perm


def _mover_candidates(u, s):
    """Candidate S-fixing permutations, cheapest first.  Verified by caller."""
    for clan in u.clans:
        for cell in clan_cells(u, s, clan):
            atoms = u.sort_atoms(cell)
            for a, b in itertools.combinations(atoms, 2):
                yield _transposition(u, a, b)
    forced = _forced_cores(u, s)
    touched = set()
    for e in s.elements:
        if isinstance(e, NearLitter):
            touched |= {u.litter_of[a] for a in e.atoms}
        elif u.is_regular(e):
            touched.add(u.litter_of[e])
    fixed = frozenset(s.atoms()) | frozenset(
        a for n in s.near_litters() for a in n.atoms)
    for clan in u.clans:
        loose = [lid for lid in u.clans[clan] if lid not in forced]
        for la, lb in itertools.combinations(loose, 2):
            if la not in touched and lb not in touched:
                cand = _plain_transport(u, la, lb)
                if cand is not None:
                    yield cand
            cand = _rerouted_transport(u, la, lb, fixed)
            if cand is not None:
                yield cand


def _find_mover(u, s, moves):
    for cand in _mover_candidates(u, s):
        if not fixes_support(u, cand, s):
            continue
        if not moves(cand):
            continue
        if is_allowable(u, cand):
            return cand
    return None


# ---------------------------------------------------------------------------
# the decision procedure

@dataclass(frozen=True)
class SupportVerdict:
    supported: bool
    reason: str
    witness: dict | None = None

    def __bool__(self):
        return self.supported


def _normalize_target(u, x):
    if isinstance(x, str):
        if x not in u.clan_of:
            raise ValueError(f"unknown atom {x!r}")
        return "atom", x
    if isinstance(x, NearLitter):
        return "set", x.atoms
    members = list(x)
    if all(isinstance(m, str) for m in members):
        for m in members:
            if m not in u.clan_of:
                raise ValueError(f"unknown atom {m!r}")
        return "set", frozenset(members)
    norm = []
    for m in members:
        kind, val = _normalize_target(u, m)
        if kind != "set":
            raise ValueError("members of a set of sets must be sets of atoms")
        norm.append(val)
    return "family", frozenset(norm)


def is_support(u, s, x):
    """Decide whether every allowable S-fixer fixes x.

    x may be an atom, a set of atoms (or a NearLitter), or a set of sets of
    atoms.  False verdicts always carry a verified witness permutation.
    Raises SearchBudgetExceededError when neither a certificate nor a
    witness is found.
    """
    validate_support(u, s)
    kind, val = _normalize_target(u, x)
    if kind == "atom":
        return _decide_atom(u, s, val)
    if kind == "set":
        return _decide_atom_set(u, s, val)
    return _decide_family(u, s, val)


def _decide_atom(u, s, a):
    if u.is_regular(a):
        cells = clan_cells(u, s, u.clan_of[a])
        cell = next(c for c in cells if a in c)
        if cell == {a}:
            return SupportVerdict(True, "atom isolated in its own cell")
        mover = _find_mover(u, s, lambda p: p[a] != a)
        if mover is not None:
            return SupportVerdict(False, "a fixer moves the atom", mover)
        raise SearchBudgetExceededError(f"undecided for atom {a}")
    lits = u.litters_parented_by(a)
    forced = _forced_cores(u, s)
    if all(lid in forced for lid in lits):
        return SupportVerdict(True, "the parented litter's core is forced")
    mover = _find_mover(u, s, lambda p: p[a] != a)
    if mover is not None:
        return SupportVerdict(False, "a fixer moves the parent atom", mover)
    raise SearchBudgetExceededError(f"undecided for irregular atom {a}")


def _decide_atom_set(u, s, xs):
    regular_ok = all(
        _is_cell_union(clan_cells(u, s, clan),
                       frozenset(a for a in xs if u.clan_of.get(a) == clan))
        for clan in u.clans)
    if regular_ok and _irregular_part_held(u, s, xs):
        return SupportVerdict(True, "a union of cells in every zone")
    moved = _find_mover(u, s, lambda p: apply_to_set(p, xs) != xs)
    if moved is not None:
        return SupportVerdict(False, "a fixer moves the set", moved)
    raise SearchBudgetExceededError("undecided for atom set")


def _irregular_part_held(u, s, xs):
    """Whether the irregular members of xs are setwise immovable.

    Fixers permute the non-forced litters of a clan among themselves, so the
    parent atoms of a clan split into forced singletons plus one
    interchangeable block; the irregular part must respect that split.
    """
    part = {a for a in xs if not u.is_regular(a) and a in u.clan_of}
    if not part <= set(u.parent_zone):
        return False
    forced = _forced_cores(u, s)
    held = {lid for lid in u.clans["c0"] if u.parent_of[lid] in part}
    loose = [lid for lid in u.clans["c0"] if lid not in forced]
    picked = [lid for lid in loose if lid in held]
    return not picked or set(picked) == set(loose)


def _decide_family(u, s, fam):
    # distill: whole local cardinals of pinned litters are setwise invariant,
    # remaining members must be individually fixed
    rest = set(fam)
    pinned = pinned_litters(u, s)
    certified = True
    for clan in u.clans:
        for lid in u.clans[clan]:
            cardinal = local_cardinal(u, lid)
            if cardinal <= rest:
                rest -= cardinal
                if lid not in pinned:
                    certified = False
    if certified:
        try:
            if all(_decide_atom_set(u, s, m) for m in rest):
                return SupportVerdict(
                    True,
                    "local cardinals of pinned litters plus fixed members")
        except SearchBudgetExceededError:
            pass
    mover = _find_mover(
        u, s, lambda p: frozenset(apply_to_set(p, m) for m in fam) != fam)
    if mover is not None:
        return SupportVerdict(False, "a fixer moves the family", mover)
    raise SearchBudgetExceededError("undecided for set of sets")


# ---------------------------------------------------------------------------
# the census and its lemmas

def _candidate_supports(u, clan):
    """All supports drawn from one clan, smallest first, deterministic order.

    Emitted supports list near-litters before atoms, so the strong-order
    conditions hold (parents of this clan's litters live outside it).
    """
    atoms = u.clan_atoms(clan)
    nls = [n for lid in u.clans[clan] for n in near_litters_of(u, lid)
           if len(n.anomalies(u)) <= 1]
    pool = [(0, n) for n in nls] + [(1, a) for a in atoms]
    for r in range(u.params.s_max):
        for combo in itertools.combinations(pool, r):
            chosen_nls = [n for t, n in combo if t == 0]
            if any(a.atoms & b.atoms
                   for a, b in itertools.combinations(chosen_nls, 2)):
                continue
            yield SupportSet(tuple(e for _, e in combo))


@dataclass(frozen=True)
class CensusReport:
    clan: str
    total: int
    symmetric: tuple              # frozensets, deterministic order
    supports: dict                # frozenset -> SupportSet that certifies it
    near_family: tuple            # the arithmetic route
    mismatches: tuple

    @property
    def biconditional_ok(self):
        return not self.mismatches

    @property
    def symmetric_count(self):
        return len(self.symmetric)


def symmetric_census(u, clan="c0"):
    """Classify every subset of the clan and verify the census biconditional.

    Route one ranges over candidate supports and collects all cell-unions;
    route two is pure arithmetic: small symmetric difference from a union of
    litters or from the complement of one.  The two routes must agree
    subset for subset.
    """
    atoms = u.clan_atoms(clan)
    if len(atoms) > 14:
        raise ValueError("census is exhaustive; clan too large")
    index = {a: i for i, a in enumerate(atoms)}

    def mask_of(xs):
        m = 0
        for a in xs:
            m |= 1 << index[a]
        return m

    found = {}
    for s in _candidate_supports(u, clan):
        cells = [mask_of(c) for c in clan_cells(u, s, clan)]
        for take in range(1 << len(cells)):
            m = 0
            for i, c in enumerate(cells):
                if take >> i & 1:
                    m |= c
            if m not in found:
                found[m] = s

    full = (1 << len(atoms)) - 1
    unions = []
    for take in range(1 << len(u.clans[clan])):
        m = 0
        for i, lid in enumerate(u.clans[clan]):
            if take >> i & 1:
                m |= mask_of(u.litters[lid])
        unions.append(m)
    near = set()
    for m in range(full + 1):
        if any(u.params.is_small((m ^ um).bit_count())
               or u.params.is_small((m ^ um ^ full).bit_count())
               for um in unions):
            near.add(m)

    def unmask(m):
        return frozenset(a for a in atoms if m >> index[a] & 1)

    mismatches = tuple(sorted(unmask(m) for m in set(found) ^ near))
    symmetric = tuple(unmask(m) for m in sorted(found))
    return CensusReport(
        clan=clan,
        total=full + 1,
        symmetric=symmetric,
        supports={unmask(m): s for m, s in found.items()},
        near_family=tuple(unmask(m) for m in sorted(near)),
        mismatches=mismatches,
    )


@dataclass(frozen=True)
class LemmaReport:
    total: int
    decompositions: dict          # frozenset -> (atom part, near-litter part, complemented)
    violations: tuple

    @property
    def ok(self):
        return not self.violations


def clan_subset_support_lemma_check(u, clan="c0", census=None):
    """Each symmetric subset decomposes over its own support.

    The claim: X equals the symmetric difference of a subset of S's atoms
    with a union of near-litters from S, or with the complement of such a
    union.  Checked by brute force over the (small) subsets of S.
    """
    if census is None:
        census = symmetric_census(u, clan)
    whole = frozenset(u.clan_atoms(clan))
    decompositions = {}
    violations = []
    for xs in census.symmetric:
        s = census.supports[xs]
        hit = None
        for na in _subsets(s.atoms()):
            for nn in _subsets(s.near_litters()):
                base = frozenset().union(*(n.atoms for n in nn)) if nn else frozenset()
                if frozenset(na) ^ base == xs:
                    hit = (na, nn, False)
                elif frozenset(na) ^ (whole - base) == xs:
                    hit = (na, nn, True)
                if hit:
                    break
            if hit:
                break
        if hit is None:
            violations.append(xs)
        else:
            decompositions[xs] = hit
    return LemmaReport(len(census.symmetric), decompositions, tuple(violations))


def _subsets(seq):
    for r in range(len(seq) + 1):
        yield from itertools.combinations(seq, r)


# ---------------------------------------------------------------------------
# the parent-set injection

@dataclass(frozen=True)
class InjectionEntry:
    source: tuple                 # sorted parent atoms
    support: SupportSet
    image_size: int
    symmetric: bool | None        # None: undecided within budget
    note: str


@dataclass(frozen=True)
class InjectionReport:
    clan: str
    entries: tuple
    injective: bool

    @property
    def all_symmetric(self):
        return all(e.symmetric for e in self.entries)


def parent_injection_check(u):
    """Map symmetric parent subsets to unions of local cardinals.

    The image of X is every near-litter whose core's parent lies in X.  The
    check verifies the map is injective on the enumerated inputs and asks
    is_support about each image under the support induced from X: the
    litters parented by X, capped at the smallness bound (a clan with one
    litter left over pins it for free).
    """
    clan = "c1" if u.stages == 2 else "c0"
    if u.stages == 2:
        sources = [tuple(u.sort_atoms(xs))
                   for xs in symmetric_census(u, "c0").symmetric]
    else:
        sources = [xs for r in range(len(u.parent_zone) + 1)
                   for xs in itertools.combinations(u.parent_zone, r)]

    entries = []
    images = {}
    for xs in sources:
        lids = [lid for lid in u.clans[clan] if u.parent_of[lid] in xs]
        image = frozenset().union(*(local_cardinal(u, l) for l in lids)) \
            if lids else frozenset()
        images[tuple(sorted(xs))] = image
        keep = lids if u.params.is_small(len(lids)) else lids[:u.params.s_max - 1]
        s = SupportSet(tuple(NearLitter(l, u.litters[l]) for l in keep))
        try:
            verdict = _decide_family(u, s, image) if image else \
                SupportVerdict(True, "empty image")
            entries.append(InjectionEntry(
                tuple(sorted(xs)), s, len(image), verdict.supported, verdict.reason))
        except SearchBudgetExceededError as e:
            entries.append(InjectionEntry(
                tuple(sorted(xs)), s, len(image), None, str(e)))
    injective = len(set(images.values())) == len(images)
    return InjectionReport(clan, tuple(entries), injective)

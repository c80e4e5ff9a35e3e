"""Support orbits: positional specifications, mapping permutations, coding.

Two strong supports lie in the same orbit of the allowable group exactly
when some allowable permutation carries one to the other position by
position.  The orbit specification records, per position, everything such
a permutation must preserve: element kind, zone, cardinality, which earlier
near-litter contains an atom, and whether a near-litter's parent atom is
itself a support element.  Equality of specifications is a complete
invariant at this scale; ``same_orbit`` backs the claim constructively by
producing a verified mapping permutation whenever the specifications agree.

The construction first accumulates a small partial bijection (parents,
anomalies, pinned atoms) and substitution-extends it.  A finite universe
sometimes refuses that route: the closure of the pins can crowd a litter
past the smallness bound even though mapping permutations exist.  A
structured fallback then enumerates litter maps together with exception
structures; at the default parameters each litter tolerates at most one
exception, so that enumeration is exhaustive and its failure is a proof
of non-existence rather than a timeout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..errors import SearchBudgetExceededError, StratlabError
from .universe import NearLitter, build_universe, local_cardinal, near_litters_of
from .perms import apply_to_set, is_allowable, substitution_extension, swap_extension
from .supports import SupportSet, check_strong, clan_cells, symmetric_census


# ---------------------------------------------------------------------------
# orbit specifications

@dataclass(frozen=True)
class PositionSpec:
    kind: str                 # "atom" or "near-litter"
    zone: str                 # clan or parent zone
    size: int | None          # |N| for near-litters, None for atoms
    containing: int | None    # position of the near-litter element holding an atom
    parent: tuple             # ("pos", j) when the parent atom is element j,
                              # ("out", zone) otherwise; ("-",) for atoms


@dataclass(frozen=True)
class OrbitSpec:
    positions: tuple

    def __len__(self):
        return len(self.positions)


def _litter_clan(u, lid):
    for clan, lids in u.clans.items():
        if lid in lids:
            return clan
    raise KeyError(lid)


def orbit_spec(u, s):
    """Positional invariant of a strong support order."""
    cached = u._near_cache.get(("orbit-spec", s))
    if cached is not None:
        return cached
    check_strong(u, s)
    positions = []
    for i, e in enumerate(s.elements):
        if isinstance(e, str):
            containing = None
            for j, other in enumerate(s.elements):
                if isinstance(other, NearLitter) and e in other.atoms:
                    containing = j
                    break
            positions.append(PositionSpec(
                "atom", u.clan_of[e], None, containing, ("-",)))
        else:
            pa = u.parent_of[e.core]
            if pa in s.elements:
                parent = ("pos", s.elements.index(pa))
            else:
                parent = ("out", u.clan_of[pa])
            positions.append(PositionSpec(
                "near-litter", _litter_clan(u, e.core), len(e.atoms), None,
                parent))
    spec = OrbitSpec(tuple(positions))
    u._near_cache[("orbit-spec", s)] = spec
    return spec


# ---------------------------------------------------------------------------
# mapping permutations

def same_orbit(u, s, t):
    """Verified allowable permutation sending S to T positionwise, or None.

    None means the orbit specifications differ (so no such permutation can
    exist); when they agree the permutation is found by accumulation and
    extension, with an exhaustive structured search as fallback.  The
    fallback is only complete for one-stage universes whose litters admit
    a single exception each; beyond that regime an undecided search raises
    SearchBudgetExceededError instead of guessing.
    """
    spec_s = orbit_spec(u, s)
    spec_t = orbit_spec(u, t)
    if spec_s != spec_t:
        return None

    perm = _accumulate_and_extend(u, s, t)
    if perm is not None and _maps_support(u, perm, s, t):
        return perm
    return _exception_search(u, s, t)


def _maps_support(u, perm, s, t):
    for se, te in zip(s.elements, t.elements):
        if isinstance(se, str):
            if perm[se] != te:
                return False
        elif apply_to_set(perm, se.atoms) != te.atoms:
            return False
    return bool(is_allowable(u, perm))


class _Stuck(Exception):
    pass


def _accumulate_and_extend(u, s, t):
    """Pin parents, anomalies, and atom elements, close, and extend."""
    pins = {}
    rev = {}

    def pin(a, b):
        if pins.get(a, b) != b or rev.get(b, a) != a:
            raise _Stuck
        pins[a] = b
        rev[b] = a

    try:
        for se, te in zip(s.elements, t.elements):
            if isinstance(se, str):
                pin(se, te)
                continue
            pin(u.parent_of[se.core], u.parent_of[te.core])
            for kind in (lambda n, lit: lit - n.atoms, lambda n, lit: n.atoms - lit):
                sa = u.sort_atoms(kind(se, u.litters[se.core]))
                ta = u.sort_atoms(kind(te, u.litters[te.core]))
                if len(sa) != len(ta):
                    raise _Stuck
                for x, y in zip(sa, ta):
                    pin(x, y)
    except _Stuck:
        return None

    move = dict(pins)
    for start in [a for a in move if a not in rev]:
        end = start
        while end in move:
            end = move[end]
        move[end] = start

    try:
        if u.stages == 2:
            lower = {a: b for a, b in move.items() if u.clan_of[a] != "c1"}
            lower = substitution_extension(build_universe(u.params, 1), lower)
            lower.update({a: b for a, b in move.items() if u.clan_of[a] == "c1"})
            move = lower
        return substitution_extension(u, move)
    except StratlabError:
        return None


def _exception_search(u, s, t):
    """Exhaustive search over litter maps and exception structures.

    With one exception per litter, each near-litter pair constrains a
    candidate in exactly one of a few modes (anomalies aligned in place,
    the removed atom rechanneled through an exception, or the added atom
    rerouted); enumerating litter maps, modes, and exception structures
    with those forced identities covers every allowable permutation.
    """
    if u.stages != 1 or (u.params.s_max - 1) // 2 > 1:
        raise SearchBudgetExceededError(
            "mapping search is only exhaustive for one-stage universes with "
            "one exception per litter")

    lids = list(u.clans["c0"])
    nl_pairs = [(se, te) for se, te in zip(s.elements, t.elements)
                if isinstance(se, NearLitter)]
    atom_pairs = [(se, te) for se, te in zip(s.elements, t.elements)
                  if isinstance(se, str)]
    irregular_pairs = [(a, b) for a, b in atom_pairs if not u.is_regular(a)]
    regular_pairs = [(a, b) for a, b in atom_pairs if u.is_regular(a)]

    for sigma_targets in itertools.permutations(lids):
        sigma = dict(zip(lids, sigma_targets))
        if any(sigma[se.core] != te.core for se, te in nl_pairs):
            continue
        pmap = {u.parent_of[lid]: u.parent_of[sigma[lid]] for lid in lids}
        if any(pmap[a] != b for a, b in irregular_pairs):
            continue
        perm = _sigma_search(u, s, t, lids, sigma, pmap, regular_pairs,
                             nl_pairs)
        if perm is not None:
            return perm
    return None


def _sigma_search(u, s, t, lids, sigma, pmap, regular_pairs, nl_pairs):
    pair_info = []
    for se, te in nl_pairs:
        removed = u.sort_atoms(u.litters[se.core] - se.atoms)
        added = u.sort_atoms(se.atoms - u.litters[se.core])
        removed2 = u.sort_atoms(u.litters[te.core] - te.atoms)
        added2 = u.sort_atoms(te.atoms - u.litters[te.core])
        if (len(removed), len(added)) != (len(removed2), len(added2)):
            return None
        pair_info.append((se.core, te.core, removed, added, removed2, added2))

    # each near-litter pair behaves in one of these modes:
    #   exact  - cores carried slot for slot, no exception may touch them
    #   align  - anomalies pinned to anomalies (an edge when zones differ)
    #   reroute- removed atom exported, image core repaired by an import,
    #            or added atom imported while some core atom exports
    mode_lists = []
    for L, TL, removed, added, removed2, added2 in pair_info:
        if not removed and not added:
            mode_lists.append([("exact", L, TL)])
        elif removed:
            mode_lists.append([("align-removed", L, TL, removed[0], removed2[0]),
                               ("reroute-removed", L, TL, removed[0], removed2[0])])
        else:
            mode_lists.append([("align-added", L, TL, added[0], added2[0]),
                               ("reroute-added", L, TL, added[0], added2[0])])

    for combo in itertools.product(*mode_lists):
        perm = _mode_search(u, s, t, lids, sigma, pmap, regular_pairs, combo)
        if perm is not None:
            return perm
    return None


class _Infeasible(Exception):
    pass


class _Demands:
    """Partially fixed exception structure: ρ(x) = y with y off-core."""

    def __init__(self):
        self.out = {}        # source litter -> [x or None, target litter or None]
        self.land = {}       # landing litter -> [x or None, y or None]
        self.no_out = set()
        self.no_land = set()

    def forbid(self, source=None, landing=None):
        if source is not None:
            if source in self.out:
                raise _Infeasible
            self.no_out.add(source)
        if landing is not None:
            if landing in self.land:
                raise _Infeasible
            self.no_land.add(landing)

    def demand(self, source, x=None, target=None, y=None):
        if source in self.no_out:
            raise _Infeasible
        ent = self.out.setdefault(source, [None, None])
        for i, val in enumerate((x, target)):
            if val is None:
                continue
            if ent[i] is None:
                ent[i] = val
            elif ent[i] != val:
                raise _Infeasible
        if y is not None and target is None:
            raise _Infeasible
        if target is not None:
            self.demand_land(target, x=x, y=y)

    def demand_land(self, landing, x=None, y=None):
        if landing in self.no_land:
            raise _Infeasible
        ent = self.land.setdefault(landing, [None, None])
        for i, val in enumerate((x, y)):
            if val is None:
                continue
            if ent[i] is None:
                ent[i] = val
            elif ent[i] != val:
                raise _Infeasible


def _mode_search(u, s, t, lids, sigma, pmap, regular_pairs, combo):
    pins = {}

    def pin(a, b):
        if pins.get(a, b) != b:
            raise _Infeasible
        pins[a] = b

    dem = _Demands()
    try:
        for a, b in regular_pairs:
            pin(a, b)
        for mode in combo:
            kind, L, TL = mode[0], mode[1], mode[2]
            if kind == "exact":
                dem.forbid(source=L, landing=TL)
            elif kind == "align-removed":
                pin(mode[3], mode[4])
                dem.forbid(source=L, landing=TL)
            elif kind == "reroute-removed":
                # removed atom is the exception; the image core's missing
                # slot is refilled by an import from elsewhere
                dem.demand(L, x=mode[3])
                dem.demand_land(TL, y=mode[4])
            elif kind == "align-added":
                pin(mode[3], mode[4])
                dem.forbid(source=L, landing=TL)
            else:  # reroute-added
                xa, a2 = mode[3], mode[4]
                dem.demand(L, target=u.litter_of[a2], y=a2)
                dem.demand(u.litter_of[xa], x=xa, target=TL)
        if len(set(pins.values())) != len(pins):
            raise _Infeasible

        # classify pins: in place, or a demanded exception edge
        inplace = {lid: {} for lid in lids}
        for a, b in pins.items():
            la, lb = u.litter_of.get(a), u.litter_of.get(b)
            if la is None or lb is None:
                raise _Infeasible
            if lb == sigma[la]:
                inplace[la][a] = b
            else:
                dem.demand(la, x=a, target=lb, y=b)
    except _Infeasible:
        return None

    for edges in _structures(u, lids, sigma, dem, inplace):
        perm = _build_filled(u, lids, sigma, pmap, inplace, edges)
        if perm is not None and _maps_support(u, perm, s, t):
            return perm
    return None


def _structures(u, lids, sigma, dem, inplace):
    """All exception structures extending the demands, identities included."""
    base_out = set(dem.out)
    candidates = [L for L in lids if L not in dem.no_out]
    for extra in _subsets_of(sorted(set(candidates) - base_out)):
        outs = sorted(base_out | set(extra))
        lands = [sigma[L] for L in outs]
        if any(T in dem.no_land for T in lands):
            continue
        if not set(dem.land) <= set(lands):
            continue
        # assign a landing litter to every exporter
        fixed = {L: dem.out[L][1] for L in outs
                 if L in dem.out and dem.out[L][1] is not None}
        if any(T not in lands or T == sigma[L] for L, T in fixed.items()):
            continue
        free_srcs = [L for L in outs if L not in fixed]
        free_lands = [T for T in lands if T not in fixed.values()]
        for assign in itertools.permutations(free_lands):
            target = dict(fixed)
            ok = True
            for L, T in zip(free_srcs, assign):
                if T == sigma[L]:
                    ok = False
                    break
                target[L] = T
            if not ok:
                continue
            yield from _identities(u, dem, inplace, target)


def _identities(u, dem, inplace, target):
    """Choose exception atoms and landing slots honoring the demands."""
    choice_lists = []
    for L in sorted(target):
        T = target[L]
        x = dem.out.get(L, [None, None])[0]
        y = dem.land.get(T, [None, None])[1]
        lx = dem.land.get(T, [None, None])[0]
        if lx is not None and x is not None and lx != x:
            return
        if lx is not None:
            x = lx
        xs = [x] if x is not None else [
            a for a in u.sort_atoms(u.litters[L]) if a not in inplace[L]]
        pinned_into = {b for m in inplace.values() for b in m.values()}
        ys = [y] if y is not None else [
            b for b in u.sort_atoms(u.litters[T]) if b not in pinned_into]
        if not xs or not ys:
            return
        choice_lists.append([(L, T, cx, cy) for cx in xs for cy in ys])
    for picks in itertools.product(*choice_lists):
        ys = [y for (_, _, _, y) in picks]
        if len(set(ys)) == len(ys):
            yield picks


def _build_filled(u, lids, sigma, pmap, inplace, edges):
    perm = dict(pmap)
    exports = {L: (x, y) for (L, T, x, y) in edges}
    imports = {T: y for (L, T, x, y) in edges}
    for L in lids:
        used = dict(inplace[L])
        if L in exports:
            x, y = exports[L]
            if x in used:
                return None
            used[x] = y
        sources = [a for a in u.sort_atoms(u.litters[L]) if a not in used]
        taken = set(used.values())
        if sigma[L] in imports:
            taken.add(imports[sigma[L]])
        slots = [b for b in u.sort_atoms(u.litters[sigma[L]])
                 if b not in taken]
        if len(sources) != len(slots):
            return None
        perm.update(used)
        perm.update(zip(sources, slots))
    if len(set(perm.values())) != len(perm):
        return None
    return perm


def _subsets_of(seq):
    for r in range(len(seq) + 1):
        yield from itertools.combinations(seq, r)


# ---------------------------------------------------------------------------
# strong support enumeration

def enumerate_strong_supports(u, max_len=None, clan="c0"):
    """All valid strong supports over one clan plus the irregular zone.

    Ordered tuples, deterministic order, lengths up to min(max_len,
    s_max - 1).  Near-litter elements range over the one-anomaly family.
    """
    bound = u.params.s_max - 1
    if max_len is not None:
        bound = min(bound, max_len)
    nls = [n for lid in u.clans[clan] for n in near_litters_of(u, lid)
           if len(n.anomalies(u)) <= 1]
    atoms = list(u.clan_atoms(clan)) + [p for p in u.parent_zone]
    pool = nls + atoms

    def strong_ok(elems):
        for i, e in enumerate(elems):
            if isinstance(e, str) and u.is_regular(e):
                for n in elems:
                    if isinstance(n, NearLitter) and e in n.atoms:
                        if n not in elems[:i]:
                            return False
            elif isinstance(e, NearLitter):
                pa = u.parent_of[e.core]
                if pa in elems and pa not in elems[:i]:
                    return False
        return True

    out = [SupportSet(())]
    for r in range(1, bound + 1):
        for combo in itertools.permutations(pool, r):
            chosen_nls = [e for e in combo if isinstance(e, NearLitter)]
            if any(a.atoms & b.atoms
                   for a, b in itertools.combinations(chosen_nls, 2)):
                continue
            if strong_ok(combo):
                out.append(SupportSet(combo))
    return out


# ---------------------------------------------------------------------------
# coding functions

def generator_perms(u):
    """Small allowable generating set: transpositions and parent swaps."""
    gens = []
    for clan in u.clans:
        for lid in u.clans[clan]:
            members = u.sort_atoms(u.litters[lid])
            for a, b in zip(members, members[1:]):
                gens.append(swap_extension(u, a, b))
        firsts = [u.sort_atoms(u.litters[lid])[0] for lid in u.clans[clan]]
        for a, b in itertools.combinations(firsts, 2):
            gens.append(swap_extension(u, a, b))
    for p, q in itertools.combinations(u.parent_zone, 2):
        gens.append(swap_extension(u, p, q))
    return gens


def _mask(u, atom_set):
    m = 0
    for a in atom_set:
        m |= 1 << u.atom_index[a]
    return m


def _remap(mask, table):
    out = 0
    while mask:
        low = mask & -mask
        out |= 1 << table[low.bit_length() - 1]
        mask ^= low
    return out


@dataclass(frozen=True)
class CodingEntry:
    target: object            # frozenset of atoms, or frozenset of frozensets
    support: SupportSet
    orbit_size: int
    single_valued: bool


@dataclass(frozen=True)
class CodingReport:
    level: int
    entries: tuple
    distinct_functions: int

    @property
    def all_single_valued(self):
        return all(e.single_valued for e in self.entries)


def coding_census(u, target_level):
    """Tabulate coding functions at one level and verify single-valuedness.

    Level 1 covers every symmetric subset of clan c0 with its census
    support; level 2 covers the parent-injection images (the local-cardinal
    unions).  Smallness is not additive in a finite universe, so the
    allowable permutations are closed under neither composition nor word
    walks; the tabulation therefore enumerates single-permutation images
    directly.  Every reachable support image is generated shape by shape
    (litter map, at most one exception per litter) together with a witness
    permutation realizing it.  The table value at each image comes from two
    routes that must agree: the census decomposition of the target
    transported through the image components, and the direct image of the
    target under every recorded witness.
    """
    if target_level not in (1, 2):
        raise ValueError("target_level must be 1 or 2")
    tables = {}
    entries = []

    if target_level == 1:
        census = symmetric_census(u, "c0")
        jobs = sorted(((census.supports[x], frozenset(x))
                       for x in census.symmetric),
                      key=lambda j: (len(j[1]),
                                     sorted(u.atom_index[a] for a in j[1])))
    else:
        jobs = [(sup, (source, fam))
                for source, fam, sup in _injection_targets(u)]

    clan_mask = _mask(u, u.clan_atoms("c0"))
    images = {}
    for sup, target in jobs:
        key = _state_of(u, sup.elements)
        if key not in images:
            images[key] = _reachable_images(u, sup)
        reach = images[key]

        if target_level == 1:
            predict = _decomposition_predictor(u, sup, target, clan_mask)
            xmask = _mask(u, target)
            reported = target
        else:
            source, fam = target
            predict = _family_predictor(u, sup, source, clan_mask)
            xmask = frozenset(_mask(u, member) for member in fam)
            reported = fam

        ok = predict is not None
        table = {}
        for state, witnesses in reach.items():
            pred = predict(state) if ok else None
            for w in witnesses:
                tab = [u.atom_index[w[a]] for a in u.atoms]
                if target_level == 1:
                    direct = _remap(xmask, tab)
                else:
                    direct = frozenset(_remap(m, tab) for m in xmask)
                if pred is None:
                    pred = direct
                elif direct != pred:
                    ok = False
            table[state] = pred
        entries.append(CodingEntry(reported, sup, len(reach), ok))
        tables[frozenset(table.items())] = True

    return CodingReport(target_level, tuple(entries), len(tables))


def _decomposition_predictor(u, sup, x, clan_mask):
    """Closure of x from support elements: atoms Δ a union, or its complement.

    The census decomposition makes the coding function explicit: the image
    of x under any allowable permutation is the same boolean combination of
    the permuted support elements, so the predictor reads it off a support
    image without knowing the permutation.
    """
    atom_positions = [i for i, e in enumerate(sup.elements) if isinstance(e, str)]
    nl_positions = [i for i, e in enumerate(sup.elements)
                    if isinstance(e, NearLitter)]
    xm = _mask(u, x)
    for ats in _subsets_of(atom_positions):
        am = 0
        for i in ats:
            am |= 1 << u.atom_index[sup.elements[i]]
        for nls in _subsets_of(nl_positions):
            um = 0
            for j in nls:
                um |= _mask(u, sup.elements[j].atoms)
            for comp in (False, True):
                body = (clan_mask ^ um) if comp else um
                if am ^ body == xm:
                    def predict(state, ats=ats, nls=nls, comp=comp):
                        am2 = 0
                        for i in ats:
                            am2 |= 1 << state[i][1]
                        um2 = 0
                        for j in nls:
                            um2 |= state[j][1]
                        body2 = (clan_mask ^ um2) if comp else um2
                        return am2 ^ body2
                    return predict
    return None


def _near_ball(u, center_mask, k, s_max):
    """All near-litter images a bijection can make of [L] around one core.

    A permutation carrying litters[L] to the center set carries the local
    cardinal of L onto the sets at the same symmetric-difference patterns
    around the center, by cardinality alone.
    """
    bits = [i for i in range(len(u.atoms)) if center_mask >> i & 1]
    others = [u.atom_index[a] for a in u.clan_atoms("c0")
              if not center_mask >> u.atom_index[a] & 1]
    out = set()
    for nr in range(s_max):
        for na in range(s_max - nr):
            if 2 * (k - nr) <= k:
                continue
            for rem in itertools.combinations(bits, nr):
                base = center_mask
                for i in rem:
                    base ^= 1 << i
                for add in itertools.combinations(others, na):
                    m = base
                    for i in add:
                        m |= 1 << i
                    out.add(m)
    return frozenset(out)


def _family_predictor(u, sup, source, clan_mask):
    """Predict the local-cardinal union image from a support image.

    Each selected litter either sits in the support (its image is that
    component) or is the one the support cap dropped, in which case its
    image is the complement of the others within the clan.  The family
    image is then the union of the symmetric-difference balls around those
    cores.
    """
    k, s_max = u.params.k, u.params.s_max
    sel = []
    for p in sorted(source):
        for lid in u.litters_parented_by(p):
            pos = None
            for i, e in enumerate(sup.elements):
                if isinstance(e, NearLitter) and e.core == lid:
                    pos = i
            sel.append((lid, pos))
    unknown = [lid for lid, pos in sel if pos is None]
    # a litter the support cap dropped is recoverable only as the rest of
    # the clan, which needs every other litter's image pinned down
    if unknown and (len(unknown) > 1 or len(sel) != len(u.clans["c0"])):
        return None

    def predict(state):
        known = [state[pos][1] for _, pos in sel if pos is not None]
        out = set()
        for _, pos in sel:
            if pos is not None:
                core = state[pos][1]
            else:
                core = clan_mask
                for m in known:
                    core &= ~m
            out |= _near_ball(u, core, k, s_max)
        return frozenset(out)

    return predict


def _state_of(u, elements):
    out = []
    for e in elements:
        if isinstance(e, str):
            out.append(("a", u.atom_index[e]))
        else:
            out.append(("n", _mask(u, e.atoms)))
    return tuple(out)


class _ImgCtx:
    """Bitmask tables shared across witness-realization attempts."""

    __slots__ = ("u", "lids", "aidx", "atoms_of", "bit_of", "core",
                 "litter_of", "members")

    def __init__(self, u, lids, elements):
        self.u = u
        self.lids = lids
        self.aidx = u.atom_index
        self.atoms_of = {L: tuple(u.sort_atoms(u.litters[L])) for L in lids}
        self.bit_of = {a: 1 << u.atom_index[a]
                       for L in lids for a in u.litters[L]}
        self.core = {L: _mask(u, u.litters[L]) for L in lids}
        self.litter_of = u.litter_of
        # atom element positions paired with near-litter element positions,
        # with the membership bit that must transport
        self.members = []
        for i, ea in enumerate(elements):
            if isinstance(ea, str) and u.is_regular(ea):
                for j, en in enumerate(elements):
                    if isinstance(en, NearLitter):
                        self.members.append((i, j, ea in en.atoms))


def _reachable_images(u, sup):
    """Every positionwise image of sup under a single allowable permutation.

    Returns a map from image state to witness permutations.  States are
    generated analytically rather than walked: per-litter balance forces
    at most one exception per litter, so each tracked part of a support
    element either occupies in-core slots of its litter's image or trades
    exactly one atom off core.  Every shape is checked by constructing an
    explicit witness, so the result never contains an unreachable state.
    """
    if u.stages != 1:
        raise SearchBudgetExceededError(
            "coding tabulation enumerates one-stage universes")
    lids = sorted(u.clans["c0"])
    ctx = _ImgCtx(u, lids, sup.elements)
    out = {}
    for sigma_targets in itertools.permutations(lids):
        sigma = dict(zip(lids, sigma_targets))
        pmap = {u.parent_of[l]: u.parent_of[sigma[l]] for l in lids}
        cand_lists = [_element_images(u, e, sigma, pmap)
                      for e in sup.elements]
        for combo in itertools.product(*cand_lists):
            state = tuple(c[0] for c in combo)
            if state in out:
                continue
            w = _realize_image(ctx, combo, sigma, pmap)
            if w is not None:
                out[state] = [w]
    return out


def _element_images(u, e, sigma, pmap):
    """Candidate images of one support element under one litter map.

    Each candidate is (state component, constraint) where the constraint
    is either a pinned atom image or, for a near-litter, per-source-litter
    parts carrying source mask, image mask, and the traded-off atom.
    """
    if isinstance(e, str):
        if not u.is_regular(e):
            b = pmap[e]
            return [(("a", u.atom_index[b]), ("pin", e, b))]
        return [(("a", u.atom_index[b]), ("pin", e, b))
                for b in u.clan_atoms(u.clan_of[e])]
    by_litter = {}
    for a in e.atoms:
        by_litter.setdefault(u.litter_of[a], set()).add(a)
    part_opts = []
    for L in sorted(by_litter):
        P = by_litter[L]
        pmask = _mask(u, P)
        target = u.litters[sigma[L]]
        slots = u.sort_atoms(target)
        outside = [b for b in u.clan_atoms(u.clan_of[next(iter(P))])
                   if b not in target]
        opts = [(L, pmask, _mask(u, q), None)
                for q in itertools.combinations(slots, len(P))]
        for q in itertools.combinations(slots, len(P) - 1):
            base = _mask(u, q)
            for y in outside:
                opts.append((L, pmask, base | 1 << u.atom_index[y], y))
        part_opts.append(opts)
    out = []
    for chosen in itertools.product(*part_opts):
        img = 0
        n = 0
        for _, pm, qm, _ in chosen:
            img |= qm
            n += bin(qm).count("1")
        if bin(img).count("1") != n:
            continue
        out.append((("n", img), ("nl", chosen)))
    return out


def _realize_image(ctx, combo, sigma, pmap):
    """Build one allowable permutation inducing the combo, or None."""
    u = ctx.u
    pins = {}
    parts = {L: [] for L in ctx.lids}
    for comp, meta in combo:
        if meta[0] == "pin":
            a, b = meta[1], meta[2]
            if not u.is_regular(a):
                continue
            if pins.get(a, b) != b:
                return None
            pins[a] = b
        else:
            for L, pm, qm, off in meta[1]:
                parts[L].append((pm, qm, off))
    if len(set(pins.values())) != len(pins):
        return None

    # atom-element membership in near-litter elements must transport
    for i, j, want in ctx.members:
        if bool(combo[j][0][1] >> combo[i][0][1] & 1) != want:
            return None

    # per-litter constraint sets and the single allowed export
    lit = {}
    for L in ctx.lids:
        tcore = ctx.core[sigma[L]]
        cons = list(parts[L])
        for a, b in pins.items():
            if ctx.litter_of[a] == L:
                cons.append((ctx.bit_of[a], ctx.bit_of[b],
                             None if ctx.bit_of[b] & tcore else b))
        y = None
        want = 0
        for i, (pm, qm, off) in enumerate(cons):
            if off is not None:
                if y is not None and off != y:
                    return None
                y = off
                want |= 1 << i
        x = None
        if y is not None:
            forced = [a for a, b in pins.items()
                      if ctx.litter_of[a] == L and b == y]
            if forced:
                cands = forced
            else:
                cands = [a for a in ctx.atoms_of[L] if a not in pins]
            ybit = ctx.bit_of[y]
            for a in cands:
                abit = ctx.bit_of[a]
                sig = 0
                for i, (pm, qm, off) in enumerate(cons):
                    if pm & abit:
                        sig |= 1 << i
                if sig == want:
                    x = a
                    break
            if x is None:
                return None
        lit[L] = (cons, x, y)

    # exception structure: tracked exports, then cycle closure
    exporters = {L for L in ctx.lids if lit[L][2] is not None}
    land = {}
    for L in sorted(exporters):
        ty = ctx.litter_of[lit[L][2]]
        if ty in land:
            return None
        land[ty] = L
    extra = set()
    while True:
        active = exporters | extra
        incoming = {sigma[L] for L in active}
        missing = [t for t in land if t not in incoming]
        if not missing:
            break
        src = next(L for L in ctx.lids if sigma[L] == missing[0])
        if src in active:
            return None
        extra.add(src)

    free_landings = sorted({sigma[L] for L in exporters | extra} - set(land))
    if not extra and not free_landings:
        return _fill_image(ctx, sigma, pmap, pins, lit, land, {})
    for assign in itertools.permutations(free_landings):
        if len(assign) != len(extra):
            return None
        pairing = dict(zip(sorted(extra), assign))
        if any(t == sigma[L] for L, t in pairing.items()):
            continue
        perm = _fill_image(ctx, sigma, pmap, pins, lit, land, pairing)
        if perm is not None:
            return perm
    return None


def _fill_image(ctx, sigma, pmap, pins, lit, land, pairing):
    # import slot per litter: a tracked landing atom, or a fresh slot for
    # an untracked closure export
    u = ctx.u
    h = {t: lit[land[t]][2] for t in land}
    untracked = {}
    for L, t in pairing.items():
        src_l = next(l for l in ctx.lids if sigma[l] == t)
        taken = 0
        for _, qm, _ in lit[src_l][0]:
            taken |= qm
        for v in h.values():
            taken |= ctx.bit_of[v]
        slot = next((b for b in ctx.atoms_of[t]
                     if not ctx.bit_of[b] & taken), None)
        if slot is None:
            return None
        h[t] = slot
        source = None
        for a in ctx.atoms_of[L]:
            if a in pins:
                continue
            abit = ctx.bit_of[a]
            if all(not pm & abit for pm, _, _ in lit[L][0]):
                source = a
                break
        if source is None:
            return None
        untracked[L] = (source, slot)

    perm = dict(pmap)
    for L in ctx.lids:
        T = sigma[L]
        cons, x, y = lit[L]
        if L in untracked:
            x, y = untracked[L]
        hbit = ctx.bit_of[h[T]] if T in h else 0
        groups = {}
        for a in ctx.atoms_of[L]:
            if a == x:
                continue
            abit = ctx.bit_of[a]
            sig = 0
            for i, (pm, _, _) in enumerate(cons):
                if pm & abit:
                    sig |= 1 << i
            groups.setdefault(sig, ([], []))[0].append(a)
        for b in ctx.atoms_of[T]:
            bbit = ctx.bit_of[b]
            if bbit & hbit:
                continue
            sig = 0
            for i, (_, qm, _) in enumerate(cons):
                if qm & bbit:
                    sig |= 1 << i
            groups.setdefault(sig, ([], []))[1].append(b)
        for srcs, dsts in groups.values():
            if len(srcs) != len(dsts):
                return None
            perm.update(zip(srcs, dsts))
        if x is not None:
            perm[x] = y

    if len(set(perm.values())) != len(perm):
        return None
    try:
        if not is_allowable(u, perm):
            return None
    except StratlabError:
        return None
    return perm


def _injection_targets(u):
    out = []
    cap = u.params.s_max - 1
    for r in range(len(u.parent_zone) + 1):
        for source in itertools.combinations(u.parent_zone, r):
            fam = frozenset()
            for p in source:
                for lid in u.litters_parented_by(p):
                    fam |= frozenset(local_cardinal(u, lid))
            litters = [lid for p in source for lid in u.litters_parented_by(p)]
            sup = SupportSet(tuple(NearLitter(lid, u.litters[lid])
                                   for lid in litters[:cap]))
            out.append((frozenset(source), fam, sup))
    return out

"""Two-stage atom universes with litters, parents, and near-litters.

Stage 1 is a single clan of litters0 litters, k atoms each, plus one
irregular parent atom per litter.  Stage 2 adds a second clan with one litter
per stage-1 regular atom, realizing the rule that the new clan's parent set
is exactly the previous clan.

Smallness is a strict threshold: a set is small when its cardinality is
below s_max.  A near-litter is a set within small symmetric difference of a
litter that also keeps a strict majority of that litter; the majority clause
is what makes the base litter unique at finite scale (a bare half of a
litter would otherwise count as near it, which collapses the symmetric
census).  Build time re-verifies uniqueness by enumerating every near-litter
of every clan and checking that no atom set qualifies for two litters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field


@dataclass(frozen=True)
class FMParams:
    k: int = 4
    s_max: int = 3
    litters0: int = 3

    def __post_init__(self):
        if not 2 <= self.s_max <= self.k:
            raise ValueError("need 2 <= s_max <= k")
        if self.litters0 < 2:
            raise ValueError("need at least two litters")

    def is_small(self, size):
        return size < self.s_max


@dataclass(frozen=True)
class FMUniverse:
    params: FMParams
    stages: int
    atoms: tuple             # all atoms, construction order
    atom_index: dict         # atom -> position in construction order
    clans: dict              # clan id -> tuple of litter ids
    litters: dict            # litter id -> frozenset of atoms
    litter_of: dict          # regular atom -> its litter id
    clan_of: dict            # atom -> clan id ("c0", "c1") or parent zone ("p0")
    parent_of: dict          # litter id -> parent atom
    parent_zone: tuple       # irregular atoms
    _near_cache: dict = field(default_factory=dict, compare=False)

    def clan_atoms(self, clan):
        out = []
        for lid in self.clans[clan]:
            out.extend(sorted(self.litters[lid], key=self.atom_index.__getitem__))
        return tuple(out)

    def is_regular(self, atom):
        return atom in self.litter_of

    def litters_parented_by(self, atom):
        return tuple(lid for lid in sorted(self.parent_of) if self.parent_of[lid] == atom)

    def sort_atoms(self, atoms):
        return sorted(atoms, key=self.atom_index.__getitem__)


@dataclass(frozen=True)
class NearLitter:
    core: str
    atoms: frozenset

    def anomalies(self, universe):
        return frozenset(self.atoms ^ universe.litters[self.core])


def build_universe(params=FMParams(), stages=1):
    """Deterministic universe; naming is c<clan>:L<litter>:a<slot> and p0:<n>."""
    if stages not in (1, 2):
        raise ValueError("stages must be 1 or 2")
    atoms = []
    clans = {}
    litters = {}
    litter_of = {}
    clan_of = {}
    parent_of = {}

    def add_clan(clan, litter_count, parents):
        ids = []
        for l in range(litter_count):
            lid = f"{clan}:L{l}"
            members = []
            for a in range(params.k):
                name = f"{lid}:a{a}"
                members.append(name)
                atoms.append(name)
                litter_of[name] = lid
                clan_of[name] = clan
            litters[lid] = frozenset(members)
            parent_of[lid] = parents[l]
            ids.append(lid)
        clans[clan] = tuple(ids)

    irregular = tuple(f"p0:{i}" for i in range(params.litters0))
    add_clan("c0", params.litters0, irregular)
    for p in irregular:
        atoms.append(p)
        clan_of[p] = "p0"
    if stages == 2:
        stage1_regular = [a for a in atoms if clan_of[a] == "c0"]
        add_clan("c1", len(stage1_regular), stage1_regular)

    universe = FMUniverse(
        params=params,
        stages=stages,
        atoms=tuple(atoms),
        atom_index={a: i for i, a in enumerate(atoms)},
        clans=clans,
        litters=litters,
        litter_of=litter_of,
        clan_of=clan_of,
        parent_of=parent_of,
        parent_zone=irregular,
    )
    _check_parent_bijections(universe)
    _check_near_litter_uniqueness(universe)
    return universe


def _check_parent_bijections(u):
    for clan, lids in u.clans.items():
        parents = [u.parent_of[lid] for lid in lids]
        if len(set(parents)) != len(parents):
            raise ValueError(f"parent map not injective on {clan}")
        expected = set(u.parent_zone) if clan == "c0" else set(u.clan_atoms("c0"))
        if set(parents) != expected:
            raise ValueError(f"parent map of {clan} is not onto its parent set")


def near_litters_of(u, litter_id):
    """Every valid near-litter of this litter, in a fixed enumeration order.

    Validity: small symmetric difference and a strict majority of the litter
    retained.  Additions come from the same clan only.
    """
    if litter_id in u._near_cache:
        return u._near_cache[litter_id]
    k, s_max = u.params.k, u.params.s_max
    clan = litter_id.rsplit(":", 1)[0]
    core = u.sort_atoms(u.litters[litter_id])
    foreign = [a for a in u.clan_atoms(clan) if a not in u.litters[litter_id]]
    out = []
    max_removed = min(s_max - 1, (k - 1) // 2)  # keep a strict majority
    for r in range(max_removed + 1):
        for removed in itertools.combinations(core, r):
            for a in range(s_max - r):
                for added in itertools.combinations(foreign, a):
                    out.append(NearLitter(
                        litter_id,
                        frozenset(u.litters[litter_id]) - set(removed) | set(added)))
    u._near_cache[litter_id] = tuple(out)
    return u._near_cache[litter_id]


def resolve_core(u, atom_set):
    """The unique litter this set is near, or None.

    Near means small symmetric difference plus strict majority of the litter.
    Uniqueness is guaranteed by the build-time check.
    """
    atom_set = frozenset(atom_set)
    clans = {u.clan_of.get(a) for a in atom_set}
    if len(clans) != 1:
        return None
    (clan,) = clans
    if clan not in u.clans:
        return None
    for lid in u.clans[clan]:
        litter = u.litters[lid]
        if (len(atom_set ^ litter) < u.params.s_max
                and 2 * len(atom_set & litter) > u.params.k):
            return lid
    return None


def as_near_litter(u, atom_set):
    core = resolve_core(u, atom_set)
    if core is None:
        raise ValueError("atom set is not near any litter")
    return NearLitter(core, frozenset(atom_set))


def local_cardinal(u, litter_id):
    """All near-litters of the litter, as a set of atom sets."""
    return frozenset(n.atoms for n in near_litters_of(u, litter_id))


def _check_near_litter_uniqueness(u):
    for clan in u.clans:
        seen = {}
        for lid in u.clans[clan]:
            for n in near_litters_of(u, lid):
                if n.atoms in seen and seen[n.atoms] != lid:
                    raise ValueError(
                        f"{sorted(n.atoms)} is near both {seen[n.atoms]} and {lid}; "
                        "choose parameters with a sharper smallness threshold")
                seen[n.atoms] = lid

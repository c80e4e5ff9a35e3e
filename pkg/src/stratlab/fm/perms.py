"""Structure-preserving atom permutations and their finite extension lemma.

An allowable permutation fixes every clan and the irregular parent zone
setwise, sends each litter to a near-litter, and moves litter parents in
step with the cores of the litter images.  ``is_allowable`` certifies a
verdict either way: a failure names the first offending litter, a success
carries the exception set (atoms thrown outside the core of their litter's
image).

``substitution_extension`` turns a small partial move into a full allowable
permutation by transporting litter remainders wholesale.  Finite universes
are less forgiving than unbounded ones: a litter can only absorb as many
strays as the smallness threshold allows, so the extension can fail
honestly (UnbalancedLitterError, ExtensionError) on inputs a larger
universe would accommodate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from ..errors import (
    ExtensionError,
    NotABijectionError,
    NotLocallySmallError,
    UnbalancedLitterError,
)
from .universe import resolve_core


def identity_perm(u):
    return {a: a for a in u.atoms}


def compose(u, outer, inner):
    """outer after inner."""
    return {a: outer[inner[a]] for a in u.atoms}


def invert(u, perm):
    return {v: k for k, v in perm.items()}


def apply_to_set(perm, atom_set):
    return frozenset(perm[a] for a in atom_set)


@dataclass(frozen=True)
class AllowableCheck:
    ok: bool
    violation: str | None
    exceptions: frozenset

    def __bool__(self):
        return self.ok


def is_allowable(u, perm):
    """Certify whether a total atom permutation is allowable.

    Raises NotABijectionError when perm is not a permutation of the atoms;
    structural failures (zone mixing, a litter image that is not a
    near-litter, a parent out of step) come back as a certificate instead.
    """
    if set(perm) != set(u.atoms):
        raise NotABijectionError("domain must be exactly the atoms of the universe")
    values = set(perm.values())
    if values != set(u.atoms) or len(values) != len(perm):
        raise NotABijectionError("values must enumerate the atoms exactly once")

    for a in u.atoms:
        if u.clan_of[perm[a]] != u.clan_of[a]:
            return AllowableCheck(
                False, f"{a} moved from {u.clan_of[a]} to {u.clan_of[perm[a]]}",
                frozenset())

    exceptions = []
    for clan in u.clans:
        for lid in u.clans[clan]:
            image = apply_to_set(perm, u.litters[lid])
            core = resolve_core(u, image)
            if core is None:
                return AllowableCheck(
                    False, f"image of {lid} is not a near-litter", frozenset())
            if u.parent_of[core] != perm[u.parent_of[lid]]:
                return AllowableCheck(
                    False,
                    f"image of {lid} has core {core} but the parent moved elsewhere",
                    frozenset())
            core_atoms = u.litters[core]
            exceptions.extend(a for a in u.litters[lid] if perm[a] not in core_atoms)
    return AllowableCheck(True, None, frozenset(exceptions))


def _check_locally_small(u, move, litters):
    for lid in litters:
        inside = [a for a in move if u.litter_of.get(a) == lid]
        if not u.params.is_small(len(inside)):
            raise NotLocallySmallError(
                f"{len(inside)} atoms of {lid} moved; smallness bound is "
                f"{u.params.s_max}")


def _validate_partial(u, move):
    if set(move) != set(move.values()):
        raise NotLocallySmallError("domain and range must be the same atom set")
    if len(set(move.values())) != len(move):
        raise NotABijectionError("partial move repeats a value")
    for a, b in move.items():
        if a not in u.clan_of or b not in u.clan_of:
            raise NotABijectionError(f"unknown atom in {a!r} -> {b!r}")
        if u.clan_of[a] != u.clan_of[b]:
            raise NotLocallySmallError(
                f"{a} -> {b} crosses from {u.clan_of[a]} to {u.clan_of[b]}")


def substitution_extension(u, move, litter_map=None):
    """Extend a small partial move to a full allowable permutation.

    move: partial atom bijection with equal domain and range, preserving
    clans and irregularity, meeting each litter of the deepest clan in a
    small set.  In a two-stage universe the move must be total on stage-1
    atoms (they are parents there) and restrict to an allowable permutation
    of the stage-1 part.

    litter_map optionally overrides the target core of each litter; the
    default sends each litter to the litter of its parent's image.  Litter
    remainders fill the target's free slots in ascending construction
    order.  Raises UnbalancedLitterError when remainder and free slots
    disagree in size, ExtensionError when the filled permutation fails the
    allowability check, and guarantees on success that every exception atom
    lies in the domain of the original move.
    """
    _validate_partial(u, move)
    top = "c1" if u.stages == 2 else "c0"

    if u.stages == 2:
        lower_atoms = set(u.clan_atoms("c0")) | set(u.parent_zone)
        if not lower_atoms <= set(move):
            raise NotLocallySmallError(
                "two-stage extension needs the move total on stage-1 atoms")
    _check_locally_small(u, move, u.clans[top])

    perm = dict(move)
    for p in u.parent_zone:
        perm.setdefault(p, p)
    if u.stages == 1:
        if len({perm[p] for p in u.parent_zone}) != len(u.parent_zone):
            raise NotABijectionError("parent images collide")

    targets = {}
    for lid in u.clans[top]:
        if litter_map and lid in litter_map:
            targets[lid] = litter_map[lid]
            continue
        parented = u.litters_parented_by(perm[u.parent_of[lid]])
        if len(parented) != 1:
            raise ExtensionError(f"no target litter for {lid}")
        targets[lid] = parented[0]
    if len(set(targets.values())) != len(targets):
        raise ExtensionError("target litters collide")

    used = set(move.values())
    for lid in u.clans[top]:
        sources = [a for a in u.sort_atoms(u.litters[lid]) if a not in move]
        slots = [a for a in u.sort_atoms(u.litters[targets[lid]]) if a not in used]
        if len(sources) != len(slots):
            raise UnbalancedLitterError(
                f"{lid}: {len(sources)} unmoved atoms but {len(slots)} free "
                f"slots in {targets[lid]}")
        perm.update(zip(sources, slots))

    check = is_allowable(u, perm)
    if not check:
        raise ExtensionError(f"no allowable completion: {check.violation}")
    stray = check.exceptions - set(move)
    assert not stray, f"extension created exceptions outside the move: {stray}"
    return perm


def swap_extension(u, a, b):
    """Allowable extension of a single transposition."""
    move = {a: b, b: a} if a != b else {a: a}
    if u.stages == 2:
        if u.clan_of[a] == "c1":
            for x in (*u.clan_atoms("c0"), *u.parent_zone):
                move.setdefault(x, x)
        else:
            from .universe import build_universe
            move = substitution_extension(build_universe(u.params, 1), move)
    return substitution_extension(u, move)


def litter_transport_extension(u, lid_a, lid_b):
    """Swap two whole litters of the same clan via their parents."""
    pa, pb = u.parent_of[lid_a], u.parent_of[lid_b]
    return swap_extension(u, pa, pb)


@dataclass(frozen=True)
class ExtensionLemmaReport:
    total: int
    passed: int
    failures: tuple

    @property
    def ok(self):
        return not self.failures


def extension_lemma_check(u):
    """Extend every transposition and verify the finite extension lemma.

    Covers all same-clan regular transpositions and all irregular parent
    transpositions.  Each extension must be allowable with its exceptions
    inside the original two-atom domain.
    """
    pools = [u.clan_atoms(clan) for clan in u.clans] + [u.parent_zone]
    failures = []
    total = 0
    for pool in pools:
        for a, b in itertools.combinations(pool, 2):
            total += 1
            try:
                perm = swap_extension(u, a, b)
            except Exception as e:            # extension refusing is a failure here
                failures.append((a, b, repr(e)))
                continue
            check = is_allowable(u, perm)
            if not check or not check.exceptions <= {a, b}:
                failures.append((a, b, check.violation or "exceptions escaped"))
    return ExtensionLemmaReport(total, total - len(failures), tuple(failures))


def allowable_group(u, limit=2_000_000):
    """Every allowable permutation, by brute force.  Tiny universes only.

    Enumerates clan-preserving bijection candidates and filters through
    is_allowable; the candidate count is factorial in the clan sizes, so a
    hard limit guards against misuse.
    """
    zones = [list(u.clan_atoms(clan)) for clan in u.clans] + [list(u.parent_zone)]
    candidates = math.prod(math.factorial(len(z)) for z in zones)
    if candidates > limit:
        raise ValueError(f"{candidates} candidate bijections; brute force refused")
    out = []
    for images in itertools.product(*(itertools.permutations(z) for z in zones)):
        perm = {}
        for zone, image in zip(zones, images):
            perm.update(zip(zone, image))
        if is_allowable(u, perm):
            out.append(perm)
    return out

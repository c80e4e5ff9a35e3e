"""Supports, the symmetry census, and the census-derived lemma reports."""

import pytest

from stratlab.errors import NotStrongError
from stratlab.fm.perms import identity_perm, swap_extension
from stratlab.fm.supports import (
    SupportSet,
    check_strong,
    clan_cells,
    clan_subset_support_lemma_check,
    fixes_support,
    is_support,
    parent_injection_check,
    pinned_litters,
    support,
    symmetric_census,
    validate_support,
)
from stratlab.fm.universe import as_near_litter, local_cardinal, near_litters_of

from helpers import near_union_family


def test_atom_supports_itself(u_small):
    a = sorted(u_small.clans["c0"])[0]
    verdict = is_support(u_small, support(u_small, a), a)
    assert verdict.supported


def test_parent_supported_by_its_litter(u_small):
    lid = sorted(u_small.litters)[0]
    nl = as_near_litter(u_small, u_small.litters[lid])
    verdict = is_support(u_small, support(u_small, nl), u_small.parent_of[lid])
    assert verdict.supported


def test_scattered_set_refuted_with_witness(u_small):
    lids = sorted(u_small.litters)
    a = sorted(u_small.litters[lids[0]])
    b = sorted(u_small.litters[lids[1]])
    x = frozenset([a[0], a[1], b[0]])
    verdict = is_support(u_small, support(u_small), x)
    assert not verdict.supported
    assert verdict.witness is not None


def test_support_smallness_enforced(u_small):
    a = sorted(u_small.clans["c0"])[:3]
    with pytest.raises(ValueError):
        support(u_small, *a)
    with pytest.raises(ValueError):
        validate_support(u_small, SupportSet(tuple(a)))


def test_overlapping_near_litters_rejected(u_small):
    lid = sorted(u_small.litters)[0]
    core = u_small.litters[lid]
    nl_full = as_near_litter(u_small, core)
    other = sorted(set(u_small.clans["c0"]) - set(core))[0]
    nl_plus = as_near_litter(u_small, core | {other})
    with pytest.raises(ValueError):
        validate_support(u_small, SupportSet((nl_full, nl_plus)))


def test_strong_order_conditions(u_small):
    u = u_small
    lid = sorted(u.litters)[0]
    atoms = sorted(u.litters[lid])
    nl = as_near_litter(u, u.litters[lid])
    parent = u.parent_of[lid]
    # containing near-litter first, then its atom
    assert check_strong(u, support(u, nl, atoms[0])) is None
    with pytest.raises(NotStrongError):
        check_strong(u, support(u, atoms[0], nl))
    # a parent atom in the support precedes the litters it parents
    assert check_strong(u, support(u, parent, nl)) is None
    with pytest.raises(NotStrongError):
        check_strong(u, support(u, nl, parent))


def test_census_pinned_counts(u_small, u_default):
    small = symmetric_census(u_small)
    assert (small.total, len(small.symmetric)) == (256, 124)
    assert small.mismatches == ()
    full = symmetric_census(u_default)
    assert (full.total, len(full.symmetric)) == (4096, 560)
    assert full.mismatches == ()


def test_census_matches_independent_dichotomy(u_small):
    census = symmetric_census(u_small)
    assert set(census.symmetric) == near_union_family(u_small)


def test_census_spot_classifications(u_default):
    u = u_default
    census = symmetric_census(u)
    members = set(census.symmetric)
    lids = sorted(u.litters)
    l1 = frozenset(u.litters[lids[0]])
    a_l2 = sorted(u.litters[lids[1]])
    assert l1 in members
    assert l1 | {a_l2[0]} in members
    assert frozenset() in members
    assert frozenset(u.clans["c0"]) in members
    scattered = frozenset(sorted(u.litters[lids[0]])[:2] + a_l2[:2])
    assert scattered not in members


def test_census_supports_actually_support(u_small):
    census = symmetric_census(u_small)
    picks = sorted(census.symmetric, key=lambda s: (len(s), sorted(s)))[::9]
    for x in picks:
        verdict = is_support(u_small, census.supports[x], x)
        assert verdict.supported


def test_fixing_a_support_fixes_the_set(u_small):
    u = u_small
    census = symmetric_census(u)
    lids = sorted(u.litters)
    x = frozenset(u.litters[lids[0]]) | {sorted(u.litters[lids[1]])[0]}
    sup = census.supports[x]
    same_litter = sorted(u.litters[lids[1]])[2:4]
    perm = swap_extension(u, *same_litter)
    if fixes_support(u, perm, sup):
        assert frozenset(perm[a] for a in x) == x
    assert fixes_support(u, identity_perm(u), sup)


def test_clan_cells_partition(u_small):
    u = u_small
    lids = sorted(u.litters)
    nl = as_near_litter(u, u.litters[lids[0]])
    other = sorted(u.litters[lids[1]])[0]
    cells = clan_cells(u, support(u, nl, other), "c0")
    union = frozenset().union(*cells)
    assert union == frozenset(u.clans["c0"])
    assert sum(len(c) for c in cells) == len(union)
    assert pinned_litters(u, support(u, nl, other)) == set(lids)


def test_clan_subset_lemma_reports(u_small, u_default):
    small = clan_subset_support_lemma_check(u_small)
    assert small.total == 124 and small.violations == ()
    full = clan_subset_support_lemma_check(u_default)
    assert full.total == 560 and full.violations == ()


def test_clan_subset_decompositions_reconstruct(u_small):
    u = u_small
    report = clan_subset_support_lemma_check(u_small)
    clan_set = frozenset(u.clans["c0"])
    for x, parts in report.decompositions.items():
        atoms, nears, complemented = parts
        base = frozenset().union(*(n.atoms for n in nears)) if nears else frozenset()
        if complemented:
            base = clan_set - base
        assert frozenset(atoms) ^ base == x


def test_parent_injection_small(u_small):
    rep = parent_injection_check(u_small)
    assert rep.injective and len(rep.entries) == 4
    assert sorted(e.image_size for e in rep.entries) == [0, 31, 31, 62]
    assert all(e.symmetric for e in rep.entries)


def test_parent_injection_images_recomputed(u_default):
    u = u_default
    rep = parent_injection_check(u_default)
    assert rep.injective and len(rep.entries) == 8
    images = []
    for entry in rep.entries:
        chosen = set(entry.source)
        image = set()
        for lid in u.litters:
            if u.parent_of[lid] in chosen:
                image.update(local_cardinal(u, lid))
        images.append(frozenset(image))
        assert len(image) == entry.image_size
    assert len(set(images)) == 8
    sizes = sorted(e.image_size for e in rep.entries)
    assert sizes == [0, 73, 73, 73, 146, 146, 146, 219]


def test_near_family_mirrors_census(u_small):
    census = symmetric_census(u_small)
    assert len(census.near_family) == len(census.symmetric)
    assert set(census.near_family) == set(census.symmetric)

"""Atom universe construction: litters, parents, near-litters, local cardinals."""

import math

import pytest

from stratlab.fm.universe import (
    FMParams,
    NearLitter,
    as_near_litter,
    build_universe,
    local_cardinal,
    near_litters_of,
    resolve_core,
)


def test_parameter_validation():
    with pytest.raises(ValueError):
        build_universe(FMParams(4, 5, 2))
    with pytest.raises(ValueError):
        build_universe(FMParams(4, 1, 2))
    with pytest.raises(ValueError):
        build_universe(FMParams(4, 3, 1))


def test_stage_one_shape(u_default):
    u = u_default
    assert len(u.atoms) == 15
    assert sorted(u.clans) == ["c0"]
    assert len(u.clans["c0"]) == 3
    assert len(u.parent_zone) == 3
    for lid, members in u.litters.items():
        assert len(members) == 4
        for a in members:
            assert u.litter_of[a] == lid
            assert u.clan_of[a] == "c0"
    # parent map is a bijection onto the parent zone
    parents = [u.parent_of[lid] for lid in sorted(u.litters)]
    assert sorted(parents) == sorted(u.parent_zone)


def test_stage_two_shape(u_staged):
    u = u_staged
    assert {c: len(v) for c, v in u.clans.items()} == {"c0": 3, "c1": 12}
    c1_litters = [lid for lid in u.litters if lid.startswith("c1")]
    assert len(c1_litters) == 12
    # second-stage litters are parented by exactly the first-clan atoms
    parents = sorted(u.parent_of[lid] for lid in c1_litters)
    assert parents == sorted(a for a in u.atoms if u.clan_of.get(a) == "c0")


def test_atom_naming_deterministic(u_default):
    again = build_universe(FMParams(4, 3, 3))
    assert again.atoms == u_default.atoms
    assert "c0:L0:a0" in u_default.atoms
    assert any(a.startswith("p0:") for a in u_default.parent_zone)


def test_near_litter_counts(u_small, u_default):
    for u, expected in ((u_small, 31), (u_default, 73)):
        for lid in u.litters:
            family = near_litters_of(u, lid)
            assert len(family) == expected
            assert len(set(family)) == expected


def test_near_litter_membership_rule(u_default):
    u = u_default
    lid = sorted(u.litters)[0]
    core = u.litters[lid]
    for nl in near_litters_of(u, lid):
        assert isinstance(nl, NearLitter)
        assert nl.core == lid
        assert len(nl.atoms ^ core) < u.params.s_max
        assert resolve_core(u, nl.atoms) == lid


def test_no_atom_set_is_near_two_litters(u_default):
    u = u_default
    seen = {}
    for lid in u.litters:
        for nl in near_litters_of(u, lid):
            assert nl.atoms not in seen, (seen.get(nl.atoms), lid)
            seen[nl.atoms] = lid


def test_as_near_litter_round_trip(u_small):
    u = u_small
    lids = sorted(u.litters)
    atoms0 = sorted(u.litters[lids[0]])
    atoms1 = sorted(u.litters[lids[1]])
    perturbed = frozenset(atoms0[:3] + [atoms1[0]])
    nl = as_near_litter(u, perturbed)
    assert nl.core == lids[0]
    assert nl.atoms == perturbed
    with pytest.raises(ValueError):
        as_near_litter(u, frozenset(atoms0[:2] + atoms1[:2]))
    assert resolve_core(u, frozenset(atoms0[:2] + atoms1[:2])) is None


def test_local_cardinal_collects_all_equivalents(u_small):
    u = u_small
    lid = sorted(u.litters)[0]
    cell = local_cardinal(u, lid)
    assert set(cell) == {n.atoms for n in near_litters_of(u, lid)}
    assert len(cell) == 31


def test_near_litter_formula_cross_check(u_small, u_default):
    # anomaly budget: remove r keep-majority atoms, add up to s_max-1-r outside
    for u in (u_small, u_default):
        k = u.params.k
        outside = len(u.clans["c0"]) * k - k
        expected = 0
        for r in range(u.params.s_max):
            if 2 * (k - r) <= k:
                continue
            for a in range(u.params.s_max - r):
                expected += math.comb(k, r) * math.comb(outside, a)
        lid = sorted(u.litters)[0]
        assert len(near_litters_of(u, lid)) == expected

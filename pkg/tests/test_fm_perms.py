"""Allowable permutations: the predicate, extensions, and the full group."""

import pytest

from stratlab.errors import NotABijectionError, NotLocallySmallError
from stratlab.fm.perms import (
    allowable_group,
    apply_to_set,
    compose,
    extension_lemma_check,
    identity_perm,
    invert,
    is_allowable,
    litter_transport_extension,
    substitution_extension,
    swap_extension,
)
from stratlab.fm.universe import FMParams, build_universe


def litter_atoms(u, index):
    lids = sorted(u.litters)
    return sorted(u.litters[lids[index]]), lids[index]


def test_identity_is_allowable(u_small):
    chk = is_allowable(u_small, identity_perm(u_small))
    assert chk.ok and chk.violation is None and chk.exceptions == frozenset()


def test_same_litter_swap(u_small):
    atoms0, _ = litter_atoms(u_small, 0)
    perm = dict(identity_perm(u_small))
    perm[atoms0[0]], perm[atoms0[1]] = atoms0[1], atoms0[0]
    chk = is_allowable(u_small, perm)
    assert chk.ok and chk.exceptions == frozenset()


def test_cross_litter_swap_has_exceptions(u_small):
    atoms0, _ = litter_atoms(u_small, 0)
    atoms1, _ = litter_atoms(u_small, 1)
    perm = dict(identity_perm(u_small))
    perm[atoms0[0]], perm[atoms1[0]] = atoms1[0], atoms0[0]
    chk = is_allowable(u_small, perm)
    assert chk.ok
    assert chk.exceptions == frozenset({atoms0[0], atoms1[0]})


def test_clan_mixing_rejected(u_small):
    atoms0, lid0 = litter_atoms(u_small, 0)
    parent = u_small.parent_of[lid0]
    perm = dict(identity_perm(u_small))
    perm[atoms0[0]], perm[parent] = parent, atoms0[0]
    chk = is_allowable(u_small, perm)
    assert not chk.ok and chk.violation is not None


def test_parent_mismatch_rejected(u_small):
    # transport a litter without transporting its parent
    u = u_small
    atoms0, _ = litter_atoms(u, 0)
    atoms1, _ = litter_atoms(u, 1)
    perm = dict(identity_perm(u))
    for a, b in zip(atoms0, atoms1):
        perm[a], perm[b] = b, a
    chk = is_allowable(u, perm)
    assert not chk.ok


def test_non_bijections_rejected(u_small):
    with pytest.raises(NotABijectionError):
        is_allowable(u_small, {a: u_small.atoms[0] for a in u_small.atoms})
    with pytest.raises(NotABijectionError):
        is_allowable(u_small, {u_small.atoms[0]: u_small.atoms[1]})


def test_substitution_extension_of_same_litter_swap(u_small):
    atoms0, _ = litter_atoms(u_small, 0)
    move = {atoms0[0]: atoms0[1], atoms0[1]: atoms0[0]}
    perm = substitution_extension(u_small, move)
    expected = dict(identity_perm(u_small))
    expected.update(move)
    assert perm == expected


def test_substitution_extension_of_parent_swap(u_small):
    u = u_small
    atoms0, lid0 = litter_atoms(u, 0)
    atoms1, lid1 = litter_atoms(u, 1)
    p0, p1 = u.parent_of[lid0], u.parent_of[lid1]
    perm = substitution_extension(u, {p0: p1, p1: p0})
    chk = is_allowable(u, perm)
    assert chk.ok and chk.exceptions == frozenset()
    assert apply_to_set(perm, frozenset(atoms0)) == frozenset(atoms1)


def test_substitution_extension_follows_stage_two_parents(u_staged):
    u = u_staged
    a0, a1 = "c0:L0:a0", "c0:L0:a1"
    perm = substitution_extension(u, {a0: a1, a1: a0})
    assert is_allowable(u, perm).ok
    lit_a = next(lid for lid in u.litters if u.parent_of[lid] == a0)
    lit_b = next(lid for lid in u.litters if u.parent_of[lid] == a1)
    image = apply_to_set(perm, frozenset(u.litters[lit_a]))
    assert image == frozenset(u.litters[lit_b])


def test_substitution_extension_rejections(u_small):
    atoms0, _ = litter_atoms(u_small, 0)
    atoms1, _ = litter_atoms(u_small, 1)
    a, b, c = atoms0[:3]
    with pytest.raises(NotLocallySmallError):
        substitution_extension(u_small, {a: b, b: c, c: a})
    with pytest.raises(NotLocallySmallError):
        substitution_extension(u_small, {a: atoms1[0]})


def test_swap_extension_matches_substitution(u_small):
    atoms0, _ = litter_atoms(u_small, 0)
    atoms1, _ = litter_atoms(u_small, 1)
    a, b = atoms0[0], atoms1[0]
    assert swap_extension(u_small, a, b) == \
        substitution_extension(u_small, {a: b, b: a})


def test_litter_transport(u_small):
    atoms0, lid0 = litter_atoms(u_small, 0)
    atoms1, lid1 = litter_atoms(u_small, 1)
    perm = litter_transport_extension(u_small, lid0, lid1)
    assert is_allowable(u_small, perm).ok
    assert apply_to_set(perm, frozenset(atoms0)) == frozenset(atoms1)


def test_inverse_of_allowable_is_allowable(u_small):
    u = u_small
    atoms0, lid0 = litter_atoms(u, 0)
    atoms1, lid1 = litter_atoms(u, 1)
    samples = [
        identity_perm(u),
        swap_extension(u, atoms0[0], atoms0[1]),
        swap_extension(u, atoms0[0], atoms1[0]),
        litter_transport_extension(u, lid0, lid1),
        substitution_extension(u, {u.parent_of[lid0]: u.parent_of[lid1],
                                   u.parent_of[lid1]: u.parent_of[lid0]}),
    ]
    for perm in samples:
        inv = invert(u, perm)
        assert is_allowable(u, inv).ok
        assert compose(u, perm, inv) == identity_perm(u)
        assert compose(u, inv, perm) == identity_perm(u)


def test_composition_of_disjoint_exception_samples(u_small):
    u = u_small
    atoms0, lid0 = litter_atoms(u, 0)
    atoms1, lid1 = litter_atoms(u, 1)
    inner = swap_extension(u, atoms0[0], atoms0[1])
    outer = swap_extension(u, atoms0[2], atoms1[2])
    both = compose(u, outer, inner)
    assert is_allowable(u, both).ok
    wholesale = compose(u, litter_transport_extension(u, lid0, lid1),
                        litter_transport_extension(u, lid1, lid0))
    assert is_allowable(u, wholesale).ok


def test_stacked_exceptions_can_leave_the_allowable_set(u_small):
    # anomaly budgets are per permutation, not per product: two cross-litter
    # swaps on distinct atom pairs push one litter image past the bound
    u = u_small
    atoms0, _ = litter_atoms(u, 0)
    atoms1, _ = litter_atoms(u, 1)
    first = swap_extension(u, atoms0[0], atoms1[0])
    second = swap_extension(u, atoms0[1], atoms1[1])
    stacked = compose(u, second, first)
    assert not is_allowable(u, stacked).ok


def test_extension_lemma_families(u_small, u_default):
    small = extension_lemma_check(u_small)
    assert (small.total, small.passed, small.failures) == (29, 29, ())
    full = extension_lemma_check(u_default)
    assert (full.total, full.passed, full.failures) == (69, 69, ())


def test_allowable_group_size_and_closure(u_small):
    group = allowable_group(u_small)
    assert len(group) == 19584
    key = frozenset(identity_perm(u_small).items())
    members = {frozenset(p.items()) for p in group}
    assert key in members
    assert len(members) == 19584
    for perm in group[::997]:
        assert is_allowable(u_small, perm).ok
        assert frozenset(invert(u_small, perm).items()) in members


def test_allowable_group_refuses_oversized_search(u_default):
    with pytest.raises(ValueError):
        allowable_group(u_default)


def test_group_contains_every_sampled_extension(u_small):
    u = u_small
    atoms0, lid0 = litter_atoms(u, 0)
    atoms1, lid1 = litter_atoms(u, 1)
    members = {frozenset(p.items()) for p in allowable_group(u)}
    for perm in (
        swap_extension(u, atoms0[0], atoms1[3]),
        litter_transport_extension(u, lid0, lid1),
    ):
        assert frozenset(perm.items()) in members

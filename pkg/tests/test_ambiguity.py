"""Truth-vector colorings, homogeneous-set search, and ambiguity witnesses."""

import itertools

import pytest

from stratlab import formulas as F
from stratlab.ambiguity import (
    check_homogeneous,
    color_by_theory,
    coloring_from_table,
    find_homogeneous,
    jensen_witness,
    ttt_transfer_demo,
)
from stratlab.errors import NoHomogeneousSetError
from stratlab.natmodel import Interpretation, build_tstu_family, evaluate_tstu
from stratlab.parser import parse

from helpers import pentagon_table

TWO_DISTINCT = "exists x^0 exists y^0. ~(x=y)"


def sigma_of(*texts):
    return [F.Sentence(parse(t), F.Mode.TSTU) for t in texts]


def test_coloring_from_table_shape():
    table = pentagon_table()
    col = coloring_from_table(5, 2, table)
    assert col.lambda_fin == 5 and col.n == 2
    assert len(col.color_of) == 10


def test_pentagon_has_no_homogeneous_triple():
    col = coloring_from_table(5, 2, pentagon_table())
    assert find_homogeneous(col, 3) is None
    table = pentagon_table()
    for triple in itertools.combinations(range(5), 3):
        colors = {table[p] for p in itertools.combinations(triple, 2)}
        assert len(colors) == 2


def test_found_sets_are_really_homogeneous():
    table = {p: (1 if 0 in p else 0) for p in itertools.combinations(range(6), 2)}
    col = coloring_from_table(6, 2, table)
    got = find_homogeneous(col, 3)
    assert got is not None
    assert check_homogeneous(col, got)
    assert check_homogeneous(col, (1, 2, 3))
    assert not check_homogeneous(col, (0, 1, 2))


def test_pigeonhole_on_singletons():
    # every 2-coloring of 5 singletons admits a monochromatic 3-set
    for code in range(32):
        table = {(i,): (code >> i) & 1 for i in range(5)}
        col = coloring_from_table(5, 1, table)
        got = find_homogeneous(col, 3)
        assert got is not None and check_homogeneous(col, got)


def test_find_homogeneous_respects_k_bound():
    table = {p: 0 for p in itertools.combinations(range(4), 2)}
    col = coloring_from_table(4, 2, table)
    assert find_homogeneous(col, 4) == (0, 1, 2, 3)
    with pytest.raises(ValueError):
        find_homogeneous(col, 5)
    with pytest.raises(ValueError):
        find_homogeneous(col, 1)


def test_color_by_theory_size_threshold():
    # colors pack one truth bit per batch sentence
    fam = build_tstu_family((1, 2, 4, 16, 65536))
    col = color_by_theory(fam, sigma_of(TWO_DISTINCT), 1)
    assert col.color_of[(0,)] == 0
    for a in range(1, 5):
        assert col.color_of[(a,)] == 1


def test_color_by_theory_constant_for_validity():
    fam = build_tstu_family((1, 2, 4, 16, 65536))
    col = color_by_theory(fam, sigma_of("forall x^0. x=x"), 1)
    assert set(col.color_of.values()) == {1}


def test_color_count_bounded_by_sigma_width():
    fam = build_tstu_family((1, 2, 4, 16, 65536))
    col = color_by_theory(fam, sigma_of(TWO_DISTINCT, "forall x^0. x=x"), 1)
    assert col.width == 2
    assert len(set(col.color_of.values())) <= 4


def test_jensen_witness_pipeline():
    fam = build_tstu_family((1, 2, 4, 16, 65536))
    sigma = sigma_of(TWO_DISTINCT)
    w = jensen_witness(fam, sigma)
    assert len(w.H) == 2 and set(w.H) <= {1, 2, 3, 4}
    assert w.s == tuple(sorted(w.H))
    assert w.verdicts == ((True, True),)
    # re-evaluate both sides from scratch
    interp = Interpretation(fam, w.s)
    phi = sigma[0]
    assert evaluate_tstu(interp, phi) is True
    assert evaluate_tstu(interp, F.raise_types(F.unwrap(phi))) is True


def test_jensen_witness_tautology():
    fam = build_tstu_family((1, 2, 4, 16, 65536))
    w = jensen_witness(fam, sigma_of("forall x^0. x=x"))
    assert w.verdicts == ((True, True),)


def test_jensen_no_homogeneous_at_tiny_family():
    fam = build_tstu_family((1, 2))
    with pytest.raises(NoHomogeneousSetError) as exc:
        jensen_witness(fam, sigma_of(TWO_DISTINCT))
    col = exc.value.coloring
    assert col is not None
    assert col.color_of[(0,)] != col.color_of[(1,)]


def test_ttt_transfer_matches_jensen_here():
    fam = build_tstu_family((1, 2, 4, 16, 65536))
    sigma = sigma_of(TWO_DISTINCT)
    w1 = jensen_witness(fam, sigma)
    w2 = ttt_transfer_demo(fam, sigma)
    assert (w1.H, w1.s, w1.verdicts) == (w2.H, w2.s, w2.verdicts)

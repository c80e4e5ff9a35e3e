"""Formula transformations: raising, translation, instances, normalization."""

import pytest

from stratlab import formulas as F
from stratlab.errors import (
    CaptureError,
    MissingTypesError,
    NotIncreasingError,
    TypeOutOfRangeError,
)
from stratlab.parser import parse
from stratlab.stratify import check_typed, infer, Stratification

from helpers import annotate_all, random_corpus


def test_raise_increments_every_declared_type():
    phi = parse("x^0 in y^1")
    assert F.raise_types(phi) == parse("x^1 in y^2")
    assert F.raise_types(parse("forall x^2. x = x")) == parse("forall x^3. x = x")


def test_raise_twice_adds_two():
    phi = parse("forall x^0. (x in y^1 & y^1 = z^1)")
    twice = F.raise_types(F.raise_types(phi))
    assert F.declared_types(twice) == {
        name: t + 2 for name, t in F.declared_types(phi).items()
    }


def test_raise_requires_types():
    with pytest.raises(MissingTypesError):
        F.raise_types(parse("x in y"))


def test_raise_preserves_well_typedness_both_ways():
    for phi in random_corpus(count=200, seed=21):
        st = infer(phi)
        if not isinstance(st, Stratification):
            continue
        typed = F.with_types(phi, st.assignment)
        assert check_typed(typed) == check_typed(F.raise_types(typed))


def test_ambiguity_instance_is_the_biconditional_with_the_raise():
    phi = parse("exists x^0. x = x")
    inst = F.ambiguity_instance(phi)
    assert inst == F.Iff(phi, parse("exists x^1. x = x"))


def test_ambiguity_instance_composes():
    phi = parse("exists x^0. x = x")
    once = F.ambiguity_instance(phi)
    again = F.ambiguity_instance(once)
    assert again == F.Iff(once, F.raise_types(once))


def test_translate_examples():
    assert F.translate(parse("x^0 in y^1"), (2, 5)) == parse("x^2 in y^5")
    phi = parse("forall x^0. x in y^1")
    assert F.translate(phi, (0, 1)) == phi
    assert F.translate(parse("x^0 = z^0"), (3, 7)) == parse("x^3 = z^3")


def test_translate_produces_ttt_typing():
    phi = parse("exists x^0. exists y^1. x in y")
    out = F.translate(phi, (1, 4))
    assert check_typed(out, F.Mode.TTT)
    assert not check_typed(out, F.Mode.TST)


def test_translate_rejections():
    with pytest.raises(TypeOutOfRangeError):
        F.translate(parse("x^0 in y^1"), (3,))
    with pytest.raises(NotIncreasingError):
        F.translate(parse("x^0 in y^1"), (3, 3))


def test_comprehension_instance_shape():
    x, a = F.Var("x", 0), F.Var("A", 1)
    phi = parse("x^0 = x^0")
    inst = F.comprehension_instance(phi, x, a)
    assert inst == F.Exists(a, F.Forall(x, F.Iff(F.Member(x, a), phi)))
    assert F.is_closed(inst)


def test_comprehension_capture_rejected():
    x, a = F.Var("x", 0), F.Var("A", 1)
    with pytest.raises(CaptureError):
        F.comprehension_instance(F.Member(x, a), x, a)


def test_comprehension_untypable_matrix_is_not_a_capture_error():
    # the Russell matrix builds fine; typing fails downstream instead
    x, a = F.Var("x", 0), F.Var("A", 1)
    inst = F.comprehension_instance(F.Not(F.Member(x, x)), x, a)
    assert not check_typed(inst)


def test_normalize_idempotent_on_random_asts():
    for phi in random_corpus(count=150, seed=9):
        once = F.normalize(phi)
        assert F.normalize(once) == once


def test_with_types_then_declared_types_round_trip():
    phi = parse("forall x. (x in y & y in z)")
    st = infer(phi)
    typed = F.with_types(phi, st.assignment)
    assert F.declared_types(typed) == st.assignment


def test_free_and_bound_partition():
    phi = parse("forall x. x in y")
    assert {v.name for v in F.free_vars(phi)} == {"y"}
    assert F.bound_names(phi) == {"x"}
    assert not F.is_closed(phi)
    assert F.is_closed(parse("forall x. exists y. x in y"))


def test_annotate_all_defaults_to_zero():
    phi = annotate_all(parse("x in y"))
    assert F.declared_types(phi) == {"x": 0, "y": 0}

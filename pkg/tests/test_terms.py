from __future__ import annotations

import pytest

from pedacc.terms import (
    PROP,
    TYPE,
    Abs,
    App,
    Bound,
    Environment,
    Free,
    Prod,
    apps,
    arrow,
    close_binder,
    env_of,
    free_vars,
    fresh_name,
    is_closed,
    lift,
    open_binder,
    subst,
    subst_simultaneous,
)


def test_structural_equality_across_constructions():
    a = Abs(PROP, Abs(Bound(0), Bound(0)))
    b = Abs(PROP, Abs(Bound(0), Bound(0)))
    assert a is not b
    assert a == b
    assert hash(a) == hash(b)
    assert a != Abs(PROP, Abs(Bound(0), Bound(1)))


def test_sorts_are_distinct():
    assert PROP != TYPE
    assert PROP == PROP


def test_arrow_is_nondependent_product():
    t = arrow(PROP, Bound(0))
    # the codomain must not capture the new binder
    assert t == Prod(PROP, Bound(1))


def test_apps_folds_left():
    t = apps(Free("f"), Free("a"), Free("b"))
    assert t == App(App(Free("f"), Free("a")), Free("b"))
    assert apps(Free("f")) == Free("f")


def test_lift_respects_cutoff():
    t = Abs(PROP, App(Bound(0), Bound(1)))
    # index 0 is bound here, index 1 dangles and must shift
    assert lift(t, 0, 2) == Abs(PROP, App(Bound(0), Bound(3)))
    assert lift(Bound(0), 1, 5) == Bound(0)


def test_subst_index():
    body = App(Bound(0), Abs(PROP, Bound(1)))
    out = subst(body, 0, Free("u"))
    assert out == App(Free("u"), Abs(PROP, Free("u")))


def test_subst_lifts_replacement_under_binders():
    body = Abs(PROP, Bound(1))
    out = subst(body, 0, Abs(PROP, Bound(1)))
    # the dangling index inside the replacement must keep dangling
    assert out == Abs(PROP, Abs(PROP, Bound(2)))


def test_subst_by_name():
    t = Abs(PROP, App(Free("a"), Bound(0)))
    assert subst(t, "a", PROP) == Abs(PROP, App(PROP, Bound(0)))
    assert subst(t, "missing", PROP) == t


def test_open_close_binder_roundtrip():
    body = App(Bound(0), Abs(PROP, App(Bound(0), Bound(1))))
    opened = open_binder(body, "$v")
    assert Bound(0) not in _spine_atoms(opened)
    assert close_binder(opened, "$v") == body


def _spine_atoms(t):
    match t:
        case App(f, a):
            return _spine_atoms(f) | _spine_atoms(a)
        case _:
            return {t}


def test_free_vars_and_closedness():
    t = Abs(PROP, App(Free("f"), Bound(0)))
    assert free_vars(t) == {"f"}
    assert not is_closed(t)
    # closedness is about names; dangling indices are a kernel error instead
    assert is_closed(Abs(PROP, Bound(0)))


def test_fresh_name_avoids_taken():
    got = fresh_name({"$x0", "$x1"}, "x")
    assert got.startswith("$x")
    assert got not in {"$x0", "$x1"}


def test_subst_simultaneous_is_parallel():
    t = App(Free("a"), Free("b"))
    out = subst_simultaneous(t, [("a", Free("b")), ("b", Free("a"))])
    # a sequential substitution would collapse both to the same name
    assert out == App(Free("b"), Free("a"))


def test_subst_simultaneous_rejects_duplicates():
    with pytest.raises(ValueError):
        subst_simultaneous(Free("a"), [("a", PROP), ("a", TYPE)])


def test_environment_lookup_and_prefix():
    env = env_of(("A", PROP), ("x", Free("A")))
    assert env.names() == ("A", "x")
    assert env.lookup("x").ty == Free("A")
    assert env.lookup("nope") is None
    assert env.prefix(1) == env_of(("A", PROP))
    assert len(Environment()) == 0


def test_environment_extended_preserves_original():
    env = env_of(("A", PROP))
    bigger = env.extended("x", Free("A"))
    assert len(env) == 1 and len(bigger) == 2
    assert bigger.entries[-1].witness is None
    with_w = env.extended("x", Free("A"), witness=Free("w"))
    assert with_w.entries[-1].witness == Free("w")

from __future__ import annotations

import pytest

from pedacc.harness import gen_typed_term
from pedacc.prelude import numeral, plus, times
from pedacc.reduction import (
    FuelExhausted,
    beta_step,
    convertible,
    longest_reduction_length,
    normalize,
    normalize_applicative,
    normalize_by_substitution,
    one_step_reducts,
    whnf,
)
from pedacc.terms import PROP, Abs, App, Bound, Free, Prod, apps

IDENT = Abs(PROP, Bound(0))
OMEGA = App(Abs(PROP, App(Bound(0), Bound(0))),
            Abs(PROP, App(Bound(0), Bound(0))))


def test_beta_contracts_a_redex():
    assert normalize(App(IDENT, Free("a"))) == Free("a")


def test_normalizes_under_binders():
    t = Abs(PROP, App(IDENT, Bound(0)))
    assert normalize(t) == Abs(PROP, Bound(0))


def test_normal_form_is_fixed_point():
    t = apps(plus, numeral(2), numeral(2))
    nf = normalize(t)
    assert normalize(nf) == nf
    assert beta_step(nf) is None


def test_arithmetic_redex():
    assert normalize(apps(plus, numeral(2), numeral(3))) == numeral(5)
    assert normalize(apps(times, numeral(3), numeral(3))) == numeral(9)


@pytest.mark.parametrize("seed", range(100))
def test_strategies_agree(seed):
    t, _ = gen_typed_term(seed)
    a = normalize(t)
    b = normalize_by_substitution(t)
    c = normalize_applicative(t)
    assert a == b == c


def test_strategies_agree_on_handcrafted():
    cases = [
        App(IDENT, App(IDENT, PROP)),
        Abs(PROP, App(Abs(PROP, Bound(1)), Bound(0))),
        Prod(PROP, App(IDENT, Bound(0))),
        apps(times, numeral(4), apps(plus, numeral(1), numeral(1))),
    ]
    for t in cases:
        assert normalize(t) == normalize_by_substitution(t)


def test_confluence_on_random_corpus():
    # 500 generated terms, two independent strategies, one answer
    for seed in range(500):
        t, _ = gen_typed_term(seed + 10_000)
        assert normalize(t) == normalize_by_substitution(t)


def test_whnf_stops_at_head():
    inner = App(IDENT, PROP)
    t = App(Abs(PROP, Abs(PROP, App(Bound(0), inner))), PROP)
    w = whnf(t)
    # head is exposed, the argument redex is untouched
    assert isinstance(w, Abs)
    assert inner in _all_subterms(w)


def _all_subterms(t):
    out = {t}
    match t:
        case App(f, a):
            out |= _all_subterms(f) | _all_subterms(a)
        case Abs(d, b) | Prod(d, b):
            out |= _all_subterms(d) | _all_subterms(b)
    return out


def test_one_step_reducts_enumerates_each_redex():
    t = App(IDENT, App(IDENT, Free("a")))
    rs = one_step_reducts(t)
    assert len(rs) == 2
    assert App(IDENT, Free("a")) in rs
    for r in rs:
        assert normalize(r) == Free("a")


def test_no_reducts_means_normal():
    for seed in range(40):
        t, _ = gen_typed_term(seed)
        if beta_step(t) is None:
            assert longest_reduction_length(t) == 0
            assert one_step_reducts(t) == []


def test_longest_reduction_decreases_along_steps():
    t = apps(plus, numeral(2), numeral(1))
    n = longest_reduction_length(t)
    assert n > 0
    stepped = beta_step(t)
    assert longest_reduction_length(stepped) < n


def test_convertible():
    assert convertible(apps(plus, numeral(2), numeral(3)), numeral(5))
    assert not convertible(numeral(4), numeral(5))
    assert convertible(PROP, PROP)


def test_fuel_exhaustion_raises():
    with pytest.raises(FuelExhausted):
        normalize(OMEGA, fuel=1000)


def test_fuel_counts_are_term_size_insensitive_for_normal_terms():
    # normal terms normalize under any positive fuel
    assert normalize(numeral(6), fuel=5) == numeral(6)

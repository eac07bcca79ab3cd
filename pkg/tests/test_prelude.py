from __future__ import annotations

import pytest

from pedacc.kernel import Derivation, SystemMode, check_type, infer_type, verify_derivation
from pedacc.prelude import (
    NAT,
    Arrow,
    dec,
    decode,
    enc,
    factorial,
    fst_term,
    id_term,
    inhabit_simple_type,
    inhabitant,
    iter_term,
    iterate,
    leibniz_eq,
    nat_type,
    numeral,
    pair,
    pair_term,
    pair_type,
    plus,
    pred,
    prelude_corpus,
    proj1,
    proj2,
    rec,
    rec_term,
    refl_term,
    snd_term,
    succ,
    times,
    to_natural,
    top_type,
    zero,
)
from pedacc.reduction import normalize
from pedacc.terms import (
    PROP,
    Abs,
    App,
    Bound,
    Environment,
    Prod,
    apps,
    arrow,
    is_closed,
)

NN = Arrow(NAT, NAT)
NNN = Arrow(NAT, NN)

# frozen de Bruijn spellings: everything else is defined against these
FROZEN = {
    "nat": Prod(PROP, Prod(Bound(0), Prod(Prod(Bound(1), Bound(2)), Bound(2)))),
    "zero": Abs(PROP, Abs(Bound(0), Abs(Prod(Bound(1), Bound(2)), Bound(1)))),
    "top": Prod(PROP, Prod(Bound(0), Bound(1))),
    "id": Abs(PROP, Abs(Bound(0), Bound(0))),
    "bot": Prod(PROP, Bound(0)),
}


def test_frozen_spellings():
    from pedacc.prelude import bot_type
    assert nat_type == FROZEN["nat"]
    assert zero == FROZEN["zero"]
    assert top_type == FROZEN["top"]
    assert id_term == FROZEN["id"]
    assert bot_type == FROZEN["bot"]


def test_numeral_readback_roundtrip():
    for k in range(11):
        assert to_natural(numeral(k)) == k
    assert to_natural(App(succ, numeral(5))) == 6
    assert to_natural(id_term) is None
    with pytest.raises(ValueError):
        numeral(-1)


def test_zero_is_numeral_zero():
    assert zero == numeral(0)


@pytest.mark.parametrize("m,n", [(0, 0), (1, 0), (2, 3), (4, 4)])
def test_plus_spot_checks(m, n):
    assert to_natural(apps(plus, numeral(m), numeral(n))) == m + n


@pytest.mark.parametrize("m,n", [(0, 5), (2, 3), (3, 3)])
def test_times_spot_checks(m, n):
    assert to_natural(apps(times, numeral(m), numeral(n))) == m * n


def test_pred_spot_checks():
    assert to_natural(App(pred, numeral(0))) == 0
    for k in range(1, 7):
        assert to_natural(App(pred, numeral(k))) == k - 1


def test_factorial_small():
    assert to_natural(App(factorial, numeral(0))) == 1
    assert to_natural(App(factorial, numeral(3))) == 6


def test_iteration_unfolds_to_repeated_application():
    # n-fold iteration of succ from zero is just n
    t = iterate(nat_type, numeral(3), zero, App(succ, Bound(0)))
    assert to_natural(t) == 3
    # and the packaged iterator term agrees
    t2 = apps(iter_term, nat_type, numeral(3), zero, succ)
    assert to_natural(t2) == 3


def test_pair_projections():
    c = pair(NAT, numeral(2), numeral(7))
    assert to_natural(proj1(NAT, c)) == 2
    assert to_natural(proj2(NAT, c)) == 7
    # packaged closed terms
    c2 = apps(pair_term, numeral(4), numeral(9))
    assert to_natural(App(fst_term, c2)) == 4
    assert to_natural(App(snd_term, c2)) == 9


def test_recursor_equations():
    # rec base step 0 = base, rec base step (succ n) = step n (rec ... n)
    base = numeral(9)
    got = rec(NAT, numeral(0), base, Bound(1))
    assert to_natural(got) == 9
    # step (x, y) -> x: recursion computes the predecessor
    got = rec(NAT, numeral(5), zero, Bound(1))
    assert to_natural(got) == 4
    # the packaged recursor: rec_term n base (fun x y => x)
    k = Abs(nat_type, Abs(nat_type, Bound(1)))
    assert to_natural(apps(rec_term, numeral(5), zero, k)) == 4


@pytest.mark.parametrize("ty", [NAT, NN, NNN, Arrow(NN, NAT)])
def test_encode_decode_left_inverse(ty):
    for k in range(4):
        round_tripped = App(dec(ty), App(enc(ty), numeral(k)))
        assert to_natural(round_tripped) == k


@pytest.mark.parametrize("ty", [NAT, NN, Arrow(NN, NN), NNN])
def test_simple_type_inhabitation(ty):
    term, d = inhabit_simple_type(ty)
    assert is_closed(term)
    assert verify_derivation(d) == []
    assert normalize(term) == normalize(inhabitant(ty))


def test_prelude_corpus_is_twenty_closed_product_functions(oracle):
    corpus = prelude_corpus()
    assert len(corpus) == 20
    assert len({name for name, _ in corpus}) == 20
    for name, term in corpus:
        assert is_closed(term), name
        res = infer_type(Environment(), term, SystemMode.CCR, oracle)
        ty, _ = res
        assert isinstance(normalize(ty), Prod), name


def test_reflexivity_proves_leibniz_equality(oracle):
    eq = leibniz_eq(nat_type, zero, zero)
    d = check_type(Environment(), refl_term(nat_type, zero), eq,
                   SystemMode.CCR, oracle)
    assert isinstance(d, Derivation)


def test_arithmetic_types(oracle):
    nn = arrow(nat_type, nat_type)
    for term, ty in [
        (succ, nn),
        (plus, arrow(nat_type, nn)),
        (times, arrow(nat_type, nn)),
        (pred, nn),
        (factorial, nn),
        (pair_term, arrow(nat_type, arrow(nat_type, pair_type(NAT)))),
        (fst_term, arrow(pair_type(NAT), nat_type)),
        (snd_term, arrow(pair_type(NAT), nat_type)),
    ]:
        assert isinstance(
            check_type(Environment(), term, ty, SystemMode.CCR, oracle),
            Derivation)

from __future__ import annotations

import random

import pytest

from pedacc.harness import gen_typed_term
from pedacc.kernel import Diagnostic, SystemMode, infer_type
from pedacc.prelude import id_term, nat_type, numeral, plus, top_type
from pedacc.surface import (
    AssumeDecl,
    CheckCmd,
    DefineDecl,
    SetMotivationCmd,
    elaborate,
    parse,
    parse_term,
    render,
    render_diagnostic,
    render_judgment,
    render_term,
)
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
)


def test_parse_assume():
    decls = parse("assume A : Prop")
    assert len(decls) == 1
    d = decls[0]
    assert isinstance(d, AssumeDecl)
    assert d.name == "A" and d.ty == PROP and d.witness is None


def test_parse_define_builds_the_standard_type():
    decls = parse("def top := forall A : Prop, A -> A")
    assert isinstance(decls[0], DefineDecl)
    assert decls[0].body == top_type


def test_parse_fun_and_application():
    t = parse_term("fun A : Prop => fun x : A => x")
    assert t == id_term
    assert parse_term("(fun A : Prop => A) Prop") == App(Abs(PROP, Bound(0)), PROP)


def test_arrow_is_right_associative():
    t = parse_term("Prop -> Prop -> Prop")
    assert t == arrow(PROP, arrow(PROP, PROP))
    u = parse_term("(Prop -> Prop) -> Prop")
    assert u == arrow(arrow(PROP, PROP), PROP)


def test_application_binds_tighter_than_arrow():
    t = parse_term("fun f : Prop -> Prop => f Prop -> f Prop")
    assert isinstance(t, Abs)
    assert t.body == arrow(App(Bound(0), PROP), App(Bound(0), PROP))


def test_number_literals_are_numerals():
    assert parse_term("0") == numeral(0)
    assert parse_term("3") == numeral(3)


def test_comments_and_blank_lines():
    decls = parse("-- a comment\n\nassume A : Prop -- trailing\n")
    assert len(decls) == 1


def test_golden_rendering():
    assert render_term(id_term) == "fun A : Prop => fun x : A => x"
    assert render_term(top_type) == "forall A : Prop, A -> A"
    assert render_term(arrow(arrow(PROP, PROP), PROP)) == "(Prop -> Prop) -> Prop"
    assert render_term(TYPE) == "Type"


def test_dependent_products_render_with_forall():
    t = Prod(PROP, arrow(Bound(0), Bound(0)))
    assert render_term(t).startswith("forall")
    # non-dependent products use the arrow sugar
    assert "->" in render_term(arrow(PROP, PROP))
    assert "forall" not in render_term(arrow(PROP, PROP))


def test_parse_error_positions():
    out = parse("def x :=")
    assert isinstance(out, Diagnostic)
    assert out.rule == "parse"
    line, column, offset = out.position
    assert line == 1 and column > 1
    assert "line 1" in render_diagnostic(out)


def test_keyword_cannot_be_a_name():
    assert isinstance(parse("assume forall : Prop"), Diagnostic)


@pytest.mark.parametrize("seed", range(200))
def test_roundtrip_random_terms(seed):
    t, _ = gen_typed_term(seed)
    assert parse_term(render_term(t)) == t


def test_roundtrip_terms_with_free_names():
    rng = random.Random(7)
    leaves = [Free("a"), Free("b"), PROP]
    for _ in range(50):
        t = rng.choice(leaves)
        for _ in range(rng.randint(1, 4)):
            t = rng.choice([
                Abs(PROP, t),
                arrow(PROP, t),
                App(Abs(PROP, t), rng.choice(leaves)),
            ])
        assert parse_term(render_term(t)) == t


def _corpus_programs():
    """Fifty small programs covering every declaration form."""
    programs = []
    for i in range(50):
        lines = [f"assume A{i} : Prop", f"assume x : A{i}"]
        if i % 2:
            lines.append(f"def twice := fun f : A{i} -> A{i} => fun y : A{i} => f (f y)")
        if i % 3 == 0:
            lines.append(f"check fun y : A{i} => y : A{i} -> A{i}")
        if i % 5 == 0:
            lines.append("inhabit forall B : Prop, B -> B")
            lines.append("normalize (fun B : Prop => B) Prop")
            lines.append(f"eval plus {i % 4} {i % 3}")
            lines.append("motivate")
        programs.append("\n".join(lines))
    return programs


def test_declaration_roundtrip_corpus():
    for text in _corpus_programs():
        decls = parse(text)
        assert not isinstance(decls, Diagnostic), text
        printed = "\n".join(render(d) for d in decls)
        again = parse(printed)
        assert not isinstance(again, Diagnostic), printed
        assert [render(d) for d in again] == [render(d) for d in decls]


def test_elaborate_accumulates_assumes():
    env, cmds = elaborate(parse("assume A : Prop\nassume x : A"))
    assert env.names() == ("A", "x")
    assert env.lookup("x").ty == Free("A")
    assert cmds == ()


def test_elaborate_expands_definitions():
    env, cmds = elaborate(parse("def t := Prop -> Prop\ncheck fun x : t => x"))
    (cmd,) = cmds
    assert isinstance(cmd, CheckCmd)
    # the definition is gone from the kernel term
    assert cmd.subject == Abs(arrow(PROP, PROP), Bound(0))


def test_elaborate_witness_annotation():
    env, _ = elaborate(parse(
        "assume A : Prop by top\nassume x : A by id"))
    assert env.lookup("A").witness == top_type
    assert env.lookup("x").witness == id_term


def test_elaborate_rejects_unbound_names():
    out = elaborate(parse("assume x : mystery"))
    assert isinstance(out, Diagnostic)
    assert out.rule == "resolve"
    assert "mystery" in out.message


def test_elaborate_rejects_duplicates():
    out = elaborate(parse("assume A : Prop\nassume A : Prop"))
    assert isinstance(out, Diagnostic)


def test_motivation_lines_need_an_assumed_name():
    out = elaborate(parse("motivation ghost := zero"))
    assert isinstance(out, Diagnostic)
    env, cmds = elaborate(parse("assume n : nat\nmotivation n := zero"))
    (cmd,) = cmds
    assert isinstance(cmd, SetMotivationCmd)
    assert cmd.name == "n"


def test_builtins_resolve_and_user_names_shadow():
    env, cmds = elaborate(parse("check plus"))
    assert cmds[0].subject == plus
    env, cmds = elaborate(parse("def id := Prop\ncheck id"))
    assert cmds[0].subject == PROP


def test_top_sort_in_a_subject_is_a_kernel_diagnostic():
    # parseable, but no typing rule admits it inside a term
    t = parse_term("fun x : Type => x")
    assert not isinstance(t, Diagnostic)
    res = infer_type(Environment(), t, SystemMode.CC)
    assert isinstance(res, Diagnostic)
    assert "not typable" in res.message


def test_render_judgment_names_fresh_hypotheses():
    from pedacc.kernel import check_type, contract_derivation
    d = check_type(Environment(), id_term, top_type, SystemMode.CC)
    lines = [render_judgment(j) for _, j in contract_derivation(d)]
    assert lines[0] == "wf []"
    assert "[A : Prop, x : A] |- x : A" in lines


def test_eval_builtin_arithmetic_elaborates():
    env, cmds = elaborate(parse("eval plus 2 2"))
    assert cmds[0].subject == apps(plus, numeral(2), numeral(2))

"""Concrete syntax: parsing, printing, and elaboration to kernel terms.

The grammar is small and LL(1):

    decl  := 'assume' IDENT ':' expr ('by' expr)?
           | 'def' IDENT ':=' expr
           | 'check' expr (':' expr)?
           | 'motivate'
           | 'inhabit' expr
           | 'normalize' expr
           | 'eval' expr
           | 'motivation' IDENT ':=' expr
    expr  := 'forall' IDENT ':' expr ',' expr
           | 'fun' IDENT ':' expr '=>' expr
           | app ('->' expr)?
    app   := atom+
    atom  := 'Prop' | 'Type' | IDENT | NUMBER | '(' expr ')'

`--` starts a comment running to end of line.  `A -> B` is sugar for a
product whose body does not use its binder.  Number literals expand to
the standard library numerals.  Binders are resolved to indices during
parsing, so expression fields of declarations are ordinary kernel terms
whose free variables are names still to be resolved by `elaborate`.

The printer (`render`) is the inverse: deterministic, with binder names
drawn from fixed pools (types get A, B, C..., functions f, g, h...,
other terms x, y, z...), so parsing its output recovers the original
term up to indices.  Internal fresh names contain characters the lexer
rejects; they are sanitized on output, which is the one place the
roundtrip is lossy.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kernel import Diagnostic, HasType, Judgment, WellFormed
from .prelude import (
    bot_type,
    factorial,
    fst_term,
    id_term,
    iter_term,
    nat_type,
    numeral,
    pair_term,
    plus,
    pred,
    rec_term,
    snd_term,
    succ,
    times,
    top_type,
    zero,
)
from .terms import (
    Abs,
    App,
    Bound,
    Environment,
    Free,
    PROP,
    Prod,
    SortConst,
    TYPE,
    Term,
    free_vars,
    subst_simultaneous,
)


@dataclass(frozen=True)
class SourcePos:
    line: int
    column: int
    offset: int

    def __repr__(self) -> str:
        return f"{self.line}:{self.column}"


# --- declarations ----------------------------------------------------------


@dataclass(frozen=True)
class AssumeDecl:
    name: str
    ty: Term
    witness: Term | None
    pos: SourcePos


@dataclass(frozen=True)
class DefineDecl:
    name: str
    body: Term
    pos: SourcePos


@dataclass(frozen=True)
class CheckDecl:
    subject: Term
    expected: Term | None
    pos: SourcePos


@dataclass(frozen=True)
class MotivateDecl:
    pos: SourcePos


@dataclass(frozen=True)
class InhabitDecl:
    goal: Term
    pos: SourcePos


@dataclass(frozen=True)
class NormalizeDecl:
    subject: Term
    pos: SourcePos


@dataclass(frozen=True)
class EvalDecl:
    subject: Term
    pos: SourcePos


@dataclass(frozen=True)
class MotivationDecl:
    name: str
    body: Term
    pos: SourcePos


SourceDecl = (AssumeDecl | DefineDecl | CheckDecl | MotivateDecl
              | InhabitDecl | NormalizeDecl | EvalDecl | MotivationDecl)


# --- commands (output of elaboration) --------------------------------------


@dataclass(frozen=True)
class CheckCmd:
    subject: Term
    expected: Term | None
    pos: SourcePos


@dataclass(frozen=True)
class MotivateCmd:
    pos: SourcePos


@dataclass(frozen=True)
class InhabitCmd:
    goal: Term
    pos: SourcePos


@dataclass(frozen=True)
class NormalizeCmd:
    subject: Term
    pos: SourcePos


@dataclass(frozen=True)
class EvalCmd:
    subject: Term
    pos: SourcePos


@dataclass(frozen=True)
class SetMotivationCmd:
    name: str
    body: Term
    pos: SourcePos


Command = (CheckCmd | MotivateCmd | InhabitCmd | NormalizeCmd | EvalCmd
           | SetMotivationCmd)


# --- lexer ------------------------------------------------------------------

_KEYWORDS = frozenset({
    "assume", "def", "check", "motivate", "inhabit", "normalize", "eval",
    "motivation", "by", "forall", "fun", "Prop", "Type",
})

_PUNCT = (":=", "=>", "->", "(", ")", ":", ",")


@dataclass(frozen=True)
class _Token:
    kind: str     # kw | ident | number | punct | eof
    text: str
    pos: SourcePos


class _Syn(Exception):
    def __init__(self, message: str, pos: SourcePos):
        super().__init__(message)
        self.message = message
        self.pos = pos


def _lex(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def pos() -> SourcePos:
        return SourcePos(line, col, i)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1; line += 1; col = 1
            continue
        if c in " \t\r":
            i += 1; col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            p = pos()
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            toks.append(_Token("kw" if word in _KEYWORDS else "ident", word, p))
            col += j - i; i = j
            continue
        if c.isdigit():
            p = pos()
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Token("number", text[i:j], p))
            col += j - i; i = j
            continue
        for punct in _PUNCT:
            if text.startswith(punct, i):
                toks.append(_Token("punct", punct, pos()))
                col += len(punct); i += len(punct)
                break
        else:
            raise _Syn(f"unexpected character {c!r}", pos())
    toks.append(_Token("eof", "", pos()))
    return toks


# --- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, toks: list[_Token]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> _Token:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text if text is not None else kind
            raise _Syn(f"expected {want!r}, found {t.text or t.kind!r}", t.pos)
        return self.next()

    def at_punct(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.text == text

    def at_kw(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "kw" and t.text == text

    # declarations

    def decls(self) -> list[SourceDecl]:
        out: list[SourceDecl] = []
        while self.peek().kind != "eof":
            out.append(self.decl())
        return out

    def decl(self) -> SourceDecl:
        t = self.peek()
        if t.kind != "kw":
            raise _Syn(f"expected a declaration keyword, found {t.text!r}", t.pos)
        if t.text == "assume":
            self.next()
            name = self.expect("ident").text
            self.expect("punct", ":")
            ty = self.expr([])
            witness = None
            if self.at_kw("by"):
                self.next()
                witness = self.expr([])
            return AssumeDecl(name, ty, witness, t.pos)
        if t.text == "def":
            self.next()
            name = self.expect("ident").text
            self.expect("punct", ":=")
            return DefineDecl(name, self.expr([]), t.pos)
        if t.text == "check":
            self.next()
            subject = self.expr([])
            expected = None
            if self.at_punct(":"):
                self.next()
                expected = self.expr([])
            return CheckDecl(subject, expected, t.pos)
        if t.text == "motivate":
            self.next()
            return MotivateDecl(t.pos)
        if t.text == "inhabit":
            self.next()
            return InhabitDecl(self.expr([]), t.pos)
        if t.text == "normalize":
            self.next()
            return NormalizeDecl(self.expr([]), t.pos)
        if t.text == "eval":
            self.next()
            return EvalDecl(self.expr([]), t.pos)
        if t.text == "motivation":
            self.next()
            name = self.expect("ident").text
            self.expect("punct", ":=")
            return MotivationDecl(name, self.expr([]), t.pos)
        raise _Syn(f"{t.text!r} cannot start a declaration", t.pos)

    # expressions; `binders` is the stack of surface names, innermost last

    def expr(self, binders: list[str]) -> Term:
        t = self.peek()
        if self.at_kw("forall"):
            self.next()
            name = self.expect("ident").text
            self.expect("punct", ":")
            dom = self.expr(binders)
            self.expect("punct", ",")
            body = self.expr(binders + [name])
            return Prod(dom, body)
        if self.at_kw("fun"):
            self.next()
            name = self.expect("ident").text
            self.expect("punct", ":")
            dom = self.expr(binders)
            self.expect("punct", "=>")
            body = self.expr(binders + [name])
            return Abs(dom, body)
        left = self.app(binders)
        if self.at_punct("->"):
            self.next()
            # non-dependent product: the codomain never mentions the binder,
            # parse it one level out and shift
            body = self.expr(binders + ["->"])
            return Prod(left, body)
        return left

    def app(self, binders: list[str]) -> Term:
        t = self.atom(binders)
        while True:
            nxt = self.peek()
            if (nxt.kind in ("ident", "number")
                    or (nxt.kind == "punct" and nxt.text == "(")
                    or (nxt.kind == "kw" and nxt.text in ("Prop", "Type"))):
                t = App(t, self.atom(binders))
            else:
                return t

    def atom(self, binders: list[str]) -> Term:
        t = self.next()
        if t.kind == "kw" and t.text == "Prop":
            return PROP
        if t.kind == "kw" and t.text == "Type":
            return TYPE
        if t.kind == "ident":
            for depth, name in enumerate(reversed(binders)):
                if name == t.text:
                    return Bound(depth)
            return Free(t.text)
        if t.kind == "number":
            return numeral(int(t.text))
        if t.kind == "punct" and t.text == "(":
            inner = self.expr(binders)
            self.expect("punct", ")")
            return inner
        raise _Syn(f"expected a term, found {t.text or t.kind!r}", t.pos)


def parse(text: str) -> list[SourceDecl] | Diagnostic:
    """Parse source text into declarations, or a position-tagged syntax
    Diagnostic."""
    try:
        return _Parser(_lex(text)).decls()
    except _Syn as e:
        return Diagnostic("parse", e.message, (e.pos.line, e.pos.column, e.pos.offset))


def parse_term(text: str) -> Term | Diagnostic:
    """Parse a single expression (no declarations)."""
    try:
        p = _Parser(_lex(text))
        t = p.expr([])
        tok = p.peek()
        if tok.kind != "eof":
            raise _Syn(f"trailing input {tok.text!r}", tok.pos)
        return t
    except _Syn as e:
        return Diagnostic("parse", e.message, (e.pos.line, e.pos.column, e.pos.offset))


# --- printer ----------------------------------------------------------------

_POOL_SORT = ("A", "B", "C", "D", "E", "F", "G", "H", "K", "L", "M", "N",
              "P", "Q", "R", "S", "T", "U", "V", "W")
_POOL_FUN = ("f", "g", "h", "k", "m", "p", "q", "r")
_POOL_TERM = ("x", "y", "z", "u", "v", "w", "s", "t", "a", "b", "c", "d", "e")

# precedence contexts, loosest to tightest
_EXPR, _ARROW, _APP, _ATOM = 0, 1, 2, 3


def _pick(pool: tuple[str, ...], avoid: set[str]) -> str:
    for name in pool:
        if name not in avoid:
            return name
    k = 1
    while True:
        for name in pool:
            cand = f"{name}{k}"
            if cand not in avoid:
                return cand
        k += 1


def _pool_for(domain: Term) -> tuple[str, ...]:
    if isinstance(domain, SortConst):
        return _POOL_SORT
    if isinstance(domain, Prod):
        return _POOL_FUN
    return _POOL_TERM


def _uses_top(t: Term, depth: int = 0) -> bool:
    if isinstance(t, Bound):
        return t.index == depth
    if isinstance(t, App):
        return _uses_top(t.fun, depth) or _uses_top(t.arg, depth)
    if isinstance(t, (Abs, Prod)):
        return _uses_top(t.domain, depth) or _uses_top(t.body, depth + 1)
    return False


def _sanitize(name: str) -> str:
    out = "".join(c if (c.isalnum() or c in "_'") else "_" for c in name)
    if not out or out[0].isdigit():
        out = "_" + out
    if out in _KEYWORDS:
        out = out + "'"
    return out


def _wrap(s: str, have: int, want: int) -> str:
    return f"({s})" if have < want else s


def _render_term(t: Term, binders: list[str], avoid: set[str], prec: int) -> str:
    if isinstance(t, SortConst):
        return t.sort.value
    if isinstance(t, Bound):
        if t.index < len(binders):
            return binders[-1 - t.index]
        return f"?{t.index - len(binders)}"
    if isinstance(t, Free):
        return _sanitize(t.name)
    if isinstance(t, App):
        f = _render_term(t.fun, binders, avoid, _APP)
        a = _render_term(t.arg, binders, avoid, _ATOM)
        return _wrap(f"{f} {a}", _APP, prec)
    if isinstance(t, Abs):
        name = _pick(_pool_for(t.domain), avoid | set(binders))
        dom = _render_term(t.domain, binders, avoid, _ARROW)
        body = _render_term(t.body, binders + [name], avoid, _EXPR)
        return _wrap(f"fun {name} : {dom} => {body}", _EXPR, prec)
    if isinstance(t, Prod):
        if _uses_top(t.body):
            name = _pick(_pool_for(t.domain), avoid | set(binders))
            dom = _render_term(t.domain, binders, avoid, _ARROW)
            body = _render_term(t.body, binders + [name], avoid, _EXPR)
            return _wrap(f"forall {name} : {dom}, {body}", _EXPR, prec)
        dom = _render_term(t.domain, binders, avoid, _APP)
        body = _render_term(t.body, binders + ["->"], avoid, _ARROW)
        return _wrap(f"{dom} -> {body}", _ARROW, prec)
    raise TypeError(f"not a term: {t!r}")


def render_term(t: Term) -> str:
    """Deterministic concrete syntax for a kernel term."""
    avoid = {_sanitize(n) for n in free_vars(t)} | set(_KEYWORDS)
    return _render_term(t, [], avoid, _EXPR)


def render(obj: Term | SourceDecl) -> str:
    """Concrete syntax for a term or a declaration."""
    if isinstance(obj, AssumeDecl):
        s = f"assume {obj.name} : {render_term(obj.ty)}"
        if obj.witness is not None:
            s += f" by {render_term(obj.witness)}"
        return s
    if isinstance(obj, DefineDecl):
        return f"def {obj.name} := {render_term(obj.body)}"
    if isinstance(obj, CheckDecl):
        s = f"check {render_term(obj.subject)}"
        if obj.expected is not None:
            s += f" : {render_term(obj.expected)}"
        return s
    if isinstance(obj, MotivateDecl):
        return "motivate"
    if isinstance(obj, InhabitDecl):
        return f"inhabit {render_term(obj.goal)}"
    if isinstance(obj, NormalizeDecl):
        return f"normalize {render_term(obj.subject)}"
    if isinstance(obj, EvalDecl):
        return f"eval {render_term(obj.subject)}"
    if isinstance(obj, MotivationDecl):
        return f"motivation {obj.name} := {render_term(obj.body)}"
    return render_term(obj)


def render_env(env: Environment, bindings: list[tuple[str, Term]] | None = None,
               ) -> str:
    parts = []
    for entry in env:
        ty = subst_simultaneous(entry.ty, bindings) if bindings else entry.ty
        parts.append(f"{_display_name(entry.name)} : {render_term(ty)}")
    return "[" + ", ".join(parts) + "]"


def _display_name(name: str) -> str:
    return _sanitize(name)


def render_judgment(j: Judgment) -> str:
    """One-line concrete form of a judgment.

    Kernel-fresh hypothesis names (from opening binders) are renamed to
    pool names, deterministically, so displayed derivations read like
    hand-written ones.
    """
    renames: list[tuple[str, Term]] = []
    taken: set[str] = set(_KEYWORDS)
    shown: list[str] = []
    for entry in j.env:
        ty = subst_simultaneous(entry.ty, renames)
        if entry.name.startswith("$"):
            new = _pick(_pool_for(ty), taken)
            renames.append((entry.name, Free(new)))
        else:
            new = _sanitize(entry.name)
        taken.add(new)
        shown.append(f"{new} : {render_term(ty)}")
    env_s = "[" + ", ".join(shown) + "]"
    if isinstance(j, WellFormed):
        return f"wf {env_s}"
    subject = subst_simultaneous(j.subject, renames)
    ty = subst_simultaneous(j.ty, renames)
    return f"{env_s} |- {render_term(subject)} : {render_term(ty)}"


def render_diagnostic(d: Diagnostic) -> str:
    """One error report, with its position and any term mismatch."""
    where = ""
    if d.rule in ("parse", "resolve") and len(d.position) >= 2:
        where = f" at line {d.position[0]}, column {d.position[1]}"
    elif d.position:
        where = " at " + ".".join(str(p) for p in d.position)
    out = f"error[{d.rule}]: {d.message}{where}"
    if d.expected is not None:
        out += f"\n  expected: {render_term(d.expected)}"
    if d.found is not None:
        out += f"\n  found:    {render_term(d.found)}"
    return out


# --- elaboration ------------------------------------------------------------

# names every source file may use without defining; user declarations
# shadow them silently
BUILTINS: dict[str, Term] = {
    "nat": nat_type,
    "top": top_type,
    "bot": bot_type,
    "id": id_term,
    "zero": zero,
    "succ": succ,
    "plus": plus,
    "times": times,
    "pred": pred,
    "factorial": factorial,
    "iter": iter_term,
    "rec": rec_term,
    "pair": pair_term,
    "fst": fst_term,
    "snd": snd_term,
}


def elaborate(decls: list[SourceDecl],
              ) -> tuple[Environment, tuple[Command, ...]] | Diagnostic:
    """Resolve names and expand definitions.

    Assumptions accumulate into an Environment (with witness annotations
    when given); everything else becomes a kernel command.  Definitions
    are transparent: occurrences are replaced by their bodies, so the
    kernel never sees a defined name.
    """
    env = Environment()
    defs: dict[str, Term] = {}
    commands: list[Command] = []

    def resolve(t: Term, pos: SourcePos) -> Term:
        names = free_vars(t)
        bindings = [(n, defs[n]) for n in names if n in defs]
        bindings += [(n, BUILTINS[n]) for n in names
                     if n not in defs and n not in env.names() and n in BUILTINS]
        t = subst_simultaneous(t, bindings)
        for n in sorted(free_vars(t)):
            if env.lookup(n) is None:
                raise _Syn(f"unbound name {n!r}", pos)
        return t

    try:
        for d in decls:
            if isinstance(d, (AssumeDecl, DefineDecl)):
                if d.name in defs or env.lookup(d.name) is not None:
                    raise _Syn(f"duplicate name {d.name!r}", d.pos)
            if isinstance(d, AssumeDecl):
                ty = resolve(d.ty, d.pos)
                witness = resolve(d.witness, d.pos) if d.witness is not None else None
                env = env.extended(d.name, ty, witness)
            elif isinstance(d, DefineDecl):
                defs[d.name] = resolve(d.body, d.pos)
            elif isinstance(d, CheckDecl):
                expected = (resolve(d.expected, d.pos)
                            if d.expected is not None else None)
                commands.append(CheckCmd(resolve(d.subject, d.pos), expected, d.pos))
            elif isinstance(d, MotivateDecl):
                commands.append(MotivateCmd(d.pos))
            elif isinstance(d, InhabitDecl):
                commands.append(InhabitCmd(resolve(d.goal, d.pos), d.pos))
            elif isinstance(d, NormalizeDecl):
                commands.append(NormalizeCmd(resolve(d.subject, d.pos), d.pos))
            elif isinstance(d, EvalDecl):
                commands.append(EvalCmd(resolve(d.subject, d.pos), d.pos))
            elif isinstance(d, MotivationDecl):
                if env.lookup(d.name) is None:
                    raise _Syn(f"motivation for a name never assumed: {d.name!r}",
                               d.pos)
                commands.append(SetMotivationCmd(d.name, resolve(d.body, d.pos),
                                                 d.pos))
            else:
                raise TypeError(f"not a declaration: {d!r}")
    except _Syn as e:
        return Diagnostic("resolve", e.message,
                          (e.pos.line, e.pos.column, e.pos.offset))
    return env, tuple(commands)

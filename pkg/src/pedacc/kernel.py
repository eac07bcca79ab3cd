"""Typing kernel for three systems sharing one syntax.

`CC` is the full calculus: products may be formed whenever the body is a
type.  `CCR` is the restricted calculus: forming a product additionally
demands an inhabitant ("witness") of the body, so hypotheses can never
become vacuous.  `NAIVE` drops environment checking entirely and instead
demands, at every axiom and variable use, a user-supplied motivation: a
list of closed terms inhabiting the environment types after substituting
the earlier motivation terms.

The checker is syntax-directed.  Inferred types are kept in normal form;
conversion nodes appear only where an inferred type is normalized or an
application argument is adjusted to the function's domain.  Every result
is a full `Derivation` tree that can be re-checked node by node with
`verify_derivation`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Optional, Union

from .reduction import DEFAULT_FUEL, Fuel, convertible, normalize, whnf
from .terms import (
    Abs,
    App,
    Bound,
    EnvEntry,
    Environment,
    Free,
    PROP,
    Prod,
    SortConst,
    TYPE,
    Term,
    arrow,
    close_binder,
    fresh_name,
    is_closed,
    open_binder,
    subst,
    subst_simultaneous,
)


class SystemMode(Enum):
    CC = "cc"
    CCR = "ccr"
    NAIVE = "naivep"


@dataclass(frozen=True)
class WellFormed:
    env: Environment


@dataclass(frozen=True)
class HasType:
    env: Environment
    subject: Term
    ty: Term


Judgment = Union[WellFormed, HasType]


@dataclass(frozen=True)
class Motivation:
    """Ordered assignment of one closed term per environment variable."""

    assignments: tuple[tuple[str, Term], ...]

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.assignments)

    def lookup(self, name: str) -> Term | None:
        for n, t in self.assignments:
            if n == name:
                return t
        return None

    def extended(self, name: str, term: Term) -> "Motivation":
        return Motivation(self.assignments + ((name, term),))


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: Judgment
    premises: tuple["Derivation", ...] = ()
    mode: SystemMode = SystemMode.CC
    witness: Term | None = None
    motivation: Motivation | None = None


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    message: str
    position: tuple = ()
    expected: Term | None = None
    found: Term | None = None


class CheckError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


WitnessOracle = Callable[[Environment, Term], Optional[Term]]

_SORTS = (PROP, TYPE)


def derivation_height(d: Derivation, _memo: dict | None = None) -> int:
    # memoized on identity: derivations share subtrees aggressively
    if _memo is None:
        _memo = {}
    h = _memo.get(id(d))
    if h is None:
        h = 1 + max((derivation_height(p, _memo) for p in d.premises), default=0)
        _memo[id(d)] = h
    return h


def iter_nodes(d: Derivation):
    """Every distinct node of the derivation, each exactly once.

    Derivations are DAGs (checking shares repeated subderivations), so
    the walk dedupes on identity; an explicit stack keeps deep spines
    clear of the recursion limit.
    """
    seen: set[int] = set()
    stack = [d]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(node.premises)


class _Inf(NamedTuple):
    ty: Term              # normalized type of the subject
    d: Derivation         # concludes subject : ty
    d_sort: Derivation | None  # concludes ty : kappa, when cheaply at hand


@dataclass(frozen=True)
class _Ctx:
    env: Environment
    wf: Derivation | None                 # None in NAIVE mode
    motivation: Motivation | None = None  # NAIVE mode only


class Checker:
    def __init__(
        self,
        mode: SystemMode,
        oracle: WitnessOracle | None = None,
        fuel: Fuel | int = DEFAULT_FUEL,
        arg_first: bool = False,
    ):
        self.mode = mode
        self.oracle = oracle
        self.fuel = fuel
        # Visit application arguments before functions.  Exists only to let
        # tests confirm inferred types do not depend on traversal order.
        self.arg_first = arg_first
        self._memo: dict = {}
        self._cascade_memo: dict = {}

    # -- public entry points --------------------------------------------------
    # A checker instance caches inferences by (environment, term), so reusing
    # one across many judgments is much cheaper than the module-level helpers
    # when the judgments share subterms.

    def infer(
        self,
        env: Environment,
        term: Term,
        motivation: Motivation | None = None,
    ) -> tuple[Term, Derivation] | Diagnostic:
        try:
            inf = self._infer(self.root_ctx(env, motivation), term, None, ())
            return inf.ty, inf.d
        except CheckError as e:
            return e.diagnostic

    def check(
        self,
        env: Environment,
        term: Term,
        expected: Term,
        motivation: Motivation | None = None,
    ) -> Derivation | Diagnostic:
        try:
            ctx = self.root_ctx(env, motivation)
            return self._check(ctx, term, expected, ())
        except CheckError as e:
            return e.diagnostic

    # -- context construction ------------------------------------------------

    def root_ctx(self, env: Environment, motivation: Motivation | None = None) -> _Ctx:
        if self.mode is SystemMode.NAIVE:
            return _Ctx(env, None, motivation or Motivation(()))
        d = Derivation("env1", WellFormed(Environment()), (), self.mode)
        for i, entry in enumerate(env):
            d = self._extend_wf(d, entry, ("env", i))
        return _Ctx(env, d)

    def _extend_wf(self, wf: Derivation, entry: EnvEntry, pos: tuple) -> Derivation:
        env = wf.conclusion.env
        if entry.name in env.names():
            raise CheckError(Diagnostic("env2", f"duplicate variable {entry.name}", pos))
        ctx = _Ctx(env, wf)
        inf = self._infer(ctx, entry.ty, entry.witness, pos)
        if inf.ty not in _SORTS:
            raise CheckError(
                Diagnostic("env2", "environment entry is not a type", pos, found=inf.ty)
            )
        new_env = Environment(env.entries + (entry,))
        return Derivation("env2", WellFormed(new_env), (inf.d,), self.mode)

    def _extend(self, ctx: _Ctx, name: str, ty: Term, d_ty: Derivation, pos: tuple) -> _Ctx:
        entry = EnvEntry(name, ty)
        env2 = Environment(ctx.env.entries + (entry,))
        if self.mode is SystemMode.NAIVE:
            closed_ty = subst_simultaneous(ty, list(ctx.motivation.assignments))
            witness = self.oracle(Environment(), closed_ty) if self.oracle else None
            if witness is None:
                raise CheckError(
                    Diagnostic(
                        "p-var",
                        f"cannot motivate binder variable {name}",
                        pos,
                        expected=closed_ty,
                    )
                )
            return _Ctx(env2, None, ctx.motivation.extended(name, witness))
        wf2 = Derivation("env2", WellFormed(env2), (d_ty,), self.mode)
        return _Ctx(env2, wf2, None)

    # -- NAIVE cascade -------------------------------------------------------

    def _cascade(self, ctx: _Ctx, pos: tuple) -> tuple[Derivation, ...]:
        key = (ctx.env.entries, ctx.motivation.assignments)
        if key in self._cascade_memo:
            return self._cascade_memo[key]
        if ctx.motivation.names() != ctx.env.names():
            raise CheckError(
                Diagnostic(
                    "p-var",
                    "motivation does not cover the environment "
                    f"(have {ctx.motivation.names()}, need {ctx.env.names()})",
                    pos,
                )
            )
        cc = Checker(SystemMode.CC, fuel=self.fuel)
        empty = cc.root_ctx(Environment())
        done: list[tuple[str, Term]] = []
        derivs: list[Derivation] = []
        for entry, (_, mot_term) in zip(ctx.env, ctx.motivation.assignments):
            closed_ty = subst_simultaneous(entry.ty, done)
            derivs.append(cc._check(empty, mot_term, closed_ty, pos + (entry.name,)))
            done.append((entry.name, mot_term))
        result = tuple(derivs)
        self._cascade_memo[key] = result
        return result

    # -- inference -----------------------------------------------------------

    def _infer(self, ctx: _Ctx, t: Term, hint: Term | None, pos: tuple) -> _Inf:
        # failures memoize too: witness discovery probes lots of dead ends
        key = (ctx.env.entries, ctx.motivation, t, hint)
        cached = self._memo.get(key)
        if cached is not None:
            if isinstance(cached, _Inf):
                return cached
            raise CheckError(cached)
        try:
            out = self._infer_raw(ctx, t, hint, pos)
        except CheckError as e:
            self._memo[key] = e.diagnostic
            raise
        self._memo[key] = out
        return out

    def _infer_raw(self, ctx: _Ctx, t: Term, hint: Term | None, pos: tuple) -> _Inf:
        mode = self.mode
        match t:
            case SortConst(s) if t == PROP:
                if mode is SystemMode.NAIVE:
                    node = Derivation(
                        "p-ax", HasType(ctx.env, PROP, TYPE), self._cascade(ctx, pos),
                        mode, motivation=ctx.motivation,
                    )
                else:
                    node = Derivation("ax", HasType(ctx.env, PROP, TYPE), (ctx.wf,), mode)
                return _Inf(TYPE, node, None)

            case SortConst(_):
                raise CheckError(Diagnostic("ax", "Type is not typable", pos, found=t))

            case Bound(i):
                raise CheckError(Diagnostic("var", f"dangling bound index {i}", pos))

            case Free(name):
                entry = ctx.env.lookup(name)
                if entry is None:
                    raise CheckError(Diagnostic("var", f"unbound variable {name}", pos))
                if mode is SystemMode.NAIVE:
                    node = Derivation(
                        "p-var", HasType(ctx.env, t, entry.ty), self._cascade(ctx, pos),
                        mode, motivation=ctx.motivation,
                    )
                else:
                    node = Derivation("var", HasType(ctx.env, t, entry.ty), (ctx.wf,), mode)
                return self._normalized(ctx, t, entry.ty, node, pos)

            case Abs(domain, body):
                d_dom = self._check_is_type(ctx, domain, None, pos + (0,))
                x = fresh_name(ctx.env.names())
                ctx2 = self._extend(ctx, x, domain, d_dom.d, pos)
                body_open = open_binder(body, x)
                b = self._infer(ctx2, body_open, None, pos + (1,))
                if b.ty == TYPE:
                    raise CheckError(
                        Diagnostic("abs", "abstraction body is a kind, not a term",
                                   pos, found=b.ty)
                    )
                d_bsort = b.d_sort or self._sort_deriv(ctx2, b.ty, body_open, pos + (1,))
                kappa = d_bsort.conclusion.ty
                res_ty = Prod(domain, close_binder(b.ty, x))
                node = Derivation("abs", HasType(ctx.env, t, res_ty), (b.d, d_bsort), mode)
                if mode is SystemMode.CCR:
                    d_res_sort = Derivation(
                        "prod_r", HasType(ctx.env, res_ty, kappa), (b.d, d_bsort),
                        mode, witness=body_open,
                    )
                else:
                    d_res_sort = Derivation(
                        "prod", HasType(ctx.env, res_ty, kappa), (d_bsort,), mode
                    )
                res_nf = normalize(res_ty, self.fuel)
                if res_nf != res_ty:
                    d_nf_sort = self._sort_deriv(ctx, res_nf, t, pos)
                    node = Derivation(
                        "conv", HasType(ctx.env, t, res_nf), (node, d_nf_sort), mode
                    )
                    return _Inf(res_nf, node, d_nf_sort)
                return _Inf(res_ty, node, d_res_sort)

            case Prod(domain, body):
                d_dom = self._check_is_type(ctx, domain, None, pos + (0,))
                x = fresh_name(ctx.env.names())
                ctx2 = self._extend(ctx, x, domain, d_dom.d, pos)
                body_open = open_binder(body, x)
                if mode is SystemMode.CCR:
                    witness, d_w = self._find_witness(ctx2, body_open, hint, x, pos)
                    b = self._infer(ctx2, body_open, witness, pos + (1,))
                    if b.ty not in _SORTS:
                        raise CheckError(
                            Diagnostic("prod_r", "product body is not a type",
                                       pos + (1,), found=b.ty)
                        )
                    if d_w.conclusion.ty != body_open:
                        d_w = Derivation(
                            "conv", HasType(ctx2.env, witness, body_open), (d_w, b.d), mode
                        )
                    node = Derivation(
                        "prod_r", HasType(ctx.env, t, b.ty), (d_w, b.d), mode, witness=witness
                    )
                else:
                    b = self._infer(ctx2, body_open, None, pos + (1,))
                    if b.ty not in _SORTS:
                        raise CheckError(
                            Diagnostic("prod", "product body is not a type",
                                       pos + (1,), found=b.ty)
                        )
                    node = Derivation("prod", HasType(ctx.env, t, b.ty), (b.d,), mode)
                d_sort = None
                if b.ty == PROP:
                    d_sort = Derivation("ax", HasType(ctx.env, PROP, TYPE), (ctx.wf,), mode) \
                        if mode is not SystemMode.NAIVE else None
                return _Inf(b.ty, node, d_sort)

            case App(f, a):
                a_inf = self._infer(ctx, a, None, pos + (1,)) if self.arg_first else None
                f_inf = self._infer(ctx, f, None, pos + (0,))
                if not isinstance(f_inf.ty, Prod):
                    raise CheckError(
                        Diagnostic("app", "application of a non-function",
                                   pos + (0,), found=f_inf.ty)
                    )
                if a_inf is None:
                    a_inf = self._infer(ctx, a, None, pos + (1,))
                dom = f_inf.ty.domain
                d_arg = a_inf.d
                if a_inf.ty != dom:
                    if not convertible(a_inf.ty, dom, self.fuel):
                        raise CheckError(
                            Diagnostic("app", "argument type mismatch", pos + (1,),
                                       expected=dom, found=a_inf.ty)
                        )
                    d_dom_sort = self._sort_deriv(ctx, dom, a, pos + (1,))
                    d_arg = Derivation(
                        "conv", HasType(ctx.env, a, dom), (d_arg, d_dom_sort), mode
                    )
                raw = subst(f_inf.ty.body, 0, a)
                node = Derivation("app", HasType(ctx.env, t, raw), (f_inf.d, d_arg), mode)
                return self._normalized(ctx, t, raw, node, pos)

        raise CheckError(Diagnostic("var", f"unrecognized term {t!r}", pos))

    # -- helpers -------------------------------------------------------------

    def _normalized(self, ctx: _Ctx, subject: Term, ty: Term, node: Derivation,
                    pos: tuple) -> _Inf:
        """Wrap `node` in a conversion so the reported type is normal."""
        ty_nf = normalize(ty, self.fuel)
        if ty_nf == ty or ty_nf == TYPE:
            return _Inf(ty_nf, node, None)
        d_sort = self._sort_deriv(ctx, ty_nf, subject, pos)
        wrapped = Derivation("conv", HasType(ctx.env, subject, ty_nf), (node, d_sort),
                             self.mode)
        return _Inf(ty_nf, wrapped, d_sort)

    def _sort_deriv(self, ctx: _Ctx, ty: Term, inhabitant: Term | None,
                    pos: tuple) -> Derivation:
        """Derivation that `ty` is a type (has a sort).  `inhabitant`, when
        given, feeds witness extraction for restricted products."""
        inf = self._check_is_type(ctx, ty, inhabitant, pos)
        return inf.d

    def _check_is_type(self, ctx: _Ctx, ty: Term, hint: Term | None, pos: tuple) -> _Inf:
        inf = self._infer(ctx, ty, hint, pos)
        if inf.ty not in _SORTS:
            raise CheckError(
                Diagnostic("prod", "expected a type", pos, expected=PROP, found=inf.ty)
            )
        return inf

    def _find_witness(self, ctx2: _Ctx, body_open: Term, hint: Term | None,
                      binder: str, pos: tuple) -> tuple[Term, Derivation]:
        """Locate and re-check a witness inhabiting a product body.

        The hint (an inhabitant of the whole product, when one was
        annotated) is applied to the binder and tried first; the oracle
        only runs if that fails, since searching is far more expensive
        than checking.  The application is reduced before checking so
        that an abstraction hint costs one substitution rather than a
        full re-check of its binder tower.
        """
        body_nf = normalize(body_open, self.fuel)

        def candidates():
            if hint is not None:
                yield whnf(App(hint, Free(binder)), self.fuel)
            if self.oracle is not None:
                found = self.oracle(ctx2.env, body_open)
                if found is not None:
                    yield found

        for cand in candidates():
            try:
                c = self._infer(ctx2, cand, None, pos)
            except CheckError:
                continue
            if c.ty == body_nf:
                return cand, c.d
        raise CheckError(
            Diagnostic(
                "prod_r",
                "cannot form product: no witness inhabits the body",
                pos,
                expected=body_open,
            )
        )

    def _check(self, ctx: _Ctx, t: Term, expected: Term, pos: tuple) -> Derivation:
        inf = self._infer(ctx, t, None, pos)
        if expected == TYPE:
            if inf.ty == TYPE:
                return inf.d
            raise CheckError(
                Diagnostic("conv", "type mismatch", pos, expected=TYPE, found=inf.ty)
            )
        e = self._check_is_type(ctx, expected, t, pos)
        if inf.ty == expected:
            return inf.d
        if not convertible(inf.ty, expected, self.fuel):
            raise CheckError(
                Diagnostic("conv", "type mismatch", pos, expected=expected, found=inf.ty)
            )
        return Derivation("conv", HasType(ctx.env, t, expected), (inf.d, e.d), self.mode)


# ---------------------------------------------------------------------------
# public entry points


def check_wf(
    env: Environment,
    mode: SystemMode = SystemMode.CC,
    oracle: WitnessOracle | None = None,
    fuel: Fuel | int = DEFAULT_FUEL,
) -> Derivation | Diagnostic:
    """Derivation that `env` is a well-formed environment.

    Not defined for NAIVE mode, which has no well-formedness judgment;
    use `check_motivated_env` there.
    """
    if mode is SystemMode.NAIVE:
        raise ValueError("the naive system has no well-formedness judgment; "
                         "use check_motivated_env")
    try:
        return Checker(mode, oracle, fuel).root_ctx(env).wf
    except CheckError as e:
        return e.diagnostic


def infer_type(
    env: Environment,
    term: Term,
    mode: SystemMode = SystemMode.CC,
    oracle: WitnessOracle | None = None,
    fuel: Fuel | int = DEFAULT_FUEL,
    motivation: Motivation | None = None,
) -> tuple[Term, Derivation] | Diagnostic:
    """Infer the (normal-form) type of `term`, with its derivation."""
    return Checker(mode, oracle, fuel).infer(env, term, motivation)


def check_type(
    env: Environment,
    term: Term,
    expected: Term,
    mode: SystemMode = SystemMode.CC,
    oracle: WitnessOracle | None = None,
    fuel: Fuel | int = DEFAULT_FUEL,
    motivation: Motivation | None = None,
) -> Derivation | Diagnostic:
    """Check `term` against `expected`, which must itself be well-sorted."""
    return Checker(mode, oracle, fuel).check(env, term, expected, motivation)


def infer_with_sort(
    env: Environment,
    term: Term,
    mode: SystemMode = SystemMode.CC,
    oracle: WitnessOracle | None = None,
    fuel: Fuel | int = DEFAULT_FUEL,
) -> tuple[Term, Derivation, Derivation | None] | Diagnostic:
    """Like `infer_type` but also derives the sort of the inferred type.

    Returns (ty, derivation of term:ty, derivation of ty:kappa), the last
    being None exactly when ty is the top sort.
    """
    checker = Checker(mode, oracle, fuel)
    try:
        ctx = checker.root_ctx(env)
        inf = checker._infer(ctx, term, None, ())
        if inf.ty == TYPE:
            return inf.ty, inf.d, None
        d_sort = inf.d_sort or checker._sort_deriv(ctx, inf.ty, term, ())
        return inf.ty, inf.d, d_sort
    except CheckError as e:
        return e.diagnostic


def check_motivated_env(
    env: Environment,
    motivation: Motivation,
    mode: SystemMode = SystemMode.CC,
    oracle: WitnessOracle | None = None,
    fuel: Fuel | int = DEFAULT_FUEL,
) -> tuple[Derivation, ...] | Diagnostic:
    """Check a motivation against an environment.

    The i-th motivation term must check, in the empty environment, against
    the i-th environment type with all earlier variables replaced by their
    motivation terms.  Returns the cascade of derivations.
    """
    if motivation.names() != env.names():
        return Diagnostic(
            "p-var",
            f"motivation does not cover the environment "
            f"(have {motivation.names()}, need {env.names()})",
        )
    checker = Checker(mode, oracle, fuel)
    try:
        empty = checker.root_ctx(Environment())
        done: list[tuple[str, Term]] = []
        derivs = []
        for entry, (_, mot_term) in zip(env, motivation.assignments):
            if not is_closed(mot_term):
                return Diagnostic(
                    "p-var", f"motivation term for {entry.name} is not closed",
                    ("env", entry.name), found=mot_term,
                )
            closed_ty = subst_simultaneous(entry.ty, done)
            derivs.append(checker._check(empty, mot_term, closed_ty, ("env", entry.name)))
            done.append((entry.name, mot_term))
        return tuple(derivs)
    except CheckError as e:
        return e.diagnostic


# ---------------------------------------------------------------------------
# derivation auditing

_RULES_BY_MODE = {
    SystemMode.CC: {"env1", "env2", "ax", "var", "abs", "prod", "app", "conv"},
    SystemMode.CCR: {"env1", "env2", "ax", "var", "abs", "prod_r", "app", "conv"},
    SystemMode.NAIVE: {"p-ax", "p-var", "abs", "prod", "app", "conv"},
}


def _verify_node(d: Derivation, problems: list[str], fuel: Fuel | int) -> None:
    c = d.conclusion
    rules = _RULES_BY_MODE[d.mode]
    if d.rule not in rules:
        problems.append(f"rule {d.rule} not part of mode {d.mode.value}")
        return

    def premise(i: int) -> Derivation:
        return d.premises[i]

    try:
        match d.rule:
            case "env1":
                if not (isinstance(c, WellFormed) and len(c.env) == 0 and not d.premises):
                    problems.append("env1 must conclude the empty environment")
            case "env2":
                p = premise(0).conclusion
                ok = (
                    isinstance(c, WellFormed)
                    and isinstance(p, HasType)
                    and len(c.env) == len(p.env) + 1
                    and c.env.entries[:-1] == p.env.entries
                    and c.env.entries[-1].ty == p.subject
                    and p.ty in _SORTS
                    and c.env.entries[-1].name not in p.env.names()
                )
                if not ok:
                    problems.append("env2 premise does not match conclusion")
            case "ax":
                p = premise(0).conclusion
                ok = (
                    isinstance(c, HasType) and c.subject == PROP and c.ty == TYPE
                    and isinstance(p, WellFormed) and p.env == c.env
                )
                if not ok:
                    problems.append("ax node malformed")
            case "var":
                p = premise(0).conclusion
                entry = c.env.lookup(c.subject.name) if isinstance(c.subject, Free) else None
                ok = (
                    isinstance(c, HasType) and entry is not None and entry.ty == c.ty
                    and isinstance(p, WellFormed) and p.env == c.env
                )
                if not ok:
                    problems.append("var node malformed")
            case "abs":
                p0, p1 = premise(0).conclusion, premise(1).conclusion
                if not (isinstance(c, HasType) and isinstance(c.subject, Abs)
                        and isinstance(c.ty, Prod) and isinstance(p0, HasType)
                        and isinstance(p1, HasType)):
                    problems.append("abs node malformed")
                else:
                    x = p0.env.entries[-1].name
                    ok = (
                        p0.env.entries[:-1] == c.env.entries
                        and p0.env.entries[-1].ty == c.subject.domain
                        and c.ty.domain == c.subject.domain
                        and p0.subject == open_binder(c.subject.body, x)
                        and p0.ty == open_binder(c.ty.body, x)
                        and p1.env == p0.env
                        and p1.subject == p0.ty
                        and p1.ty in _SORTS
                    )
                    if not ok:
                        problems.append("abs premises do not match conclusion")
            case "prod":
                p = premise(0).conclusion
                if not (isinstance(c, HasType) and isinstance(c.subject, Prod)
                        and c.ty in _SORTS and isinstance(p, HasType)):
                    problems.append("prod node malformed")
                else:
                    x = p.env.entries[-1].name
                    ok = (
                        p.env.entries[:-1] == c.env.entries
                        and p.env.entries[-1].ty == c.subject.domain
                        and p.subject == open_binder(c.subject.body, x)
                        and p.ty == c.ty
                    )
                    if not ok:
                        problems.append("prod premise does not match conclusion")
            case "prod_r":
                pw, pb = premise(0).conclusion, premise(1).conclusion
                if not (isinstance(c, HasType) and isinstance(c.subject, Prod)
                        and c.ty in _SORTS and isinstance(pw, HasType)
                        and isinstance(pb, HasType)):
                    problems.append("prod_r node malformed")
                else:
                    x = pb.env.entries[-1].name
                    ok = (
                        pb.env.entries[:-1] == c.env.entries
                        and pb.env.entries[-1].ty == c.subject.domain
                        and pb.subject == open_binder(c.subject.body, x)
                        and pb.ty == c.ty
                        and pw.env == pb.env
                        and pw.subject == d.witness
                        and pw.ty == pb.subject
                    )
                    if not ok:
                        problems.append("prod_r premises do not match conclusion")
            case "app":
                pf, pa = premise(0).conclusion, premise(1).conclusion
                ok = (
                    isinstance(c, HasType) and isinstance(c.subject, App)
                    and isinstance(pf, HasType) and isinstance(pa, HasType)
                    and pf.env == c.env and pa.env == c.env
                    and pf.subject == c.subject.fun
                    and pa.subject == c.subject.arg
                    and isinstance(pf.ty, Prod)
                    and pa.ty == pf.ty.domain
                    and c.ty == subst(pf.ty.body, 0, c.subject.arg)
                )
                if not ok:
                    problems.append("app premises do not match conclusion")
            case "conv":
                pt, ps = premise(0).conclusion, premise(1).conclusion
                ok = (
                    isinstance(c, HasType) and isinstance(pt, HasType)
                    and isinstance(ps, HasType)
                    and pt.env == c.env and ps.env == c.env
                    and pt.subject == c.subject
                    and ps.subject == c.ty
                    and ps.ty in _SORTS
                    and convertible(pt.ty, c.ty, fuel)
                )
                if not ok:
                    problems.append("conv premises do not match conclusion")
            case "p-ax" | "p-var":
                if not isinstance(c, HasType):
                    problems.append(f"{d.rule} conclusion is not a typing judgment")
                    return
                if d.rule == "p-ax":
                    if not (c.subject == PROP and c.ty == TYPE):
                        problems.append("p-ax must conclude Prop : Type")
                else:
                    entry = c.env.lookup(c.subject.name) if isinstance(c.subject, Free) else None
                    if entry is None or entry.ty != c.ty:
                        problems.append("p-var conclusion not in the environment")
                mot = d.motivation
                if mot is None or mot.names() != c.env.names():
                    problems.append(f"{d.rule} motivation does not cover the environment")
                    return
                if len(d.premises) != len(c.env):
                    problems.append(f"{d.rule} cascade has wrong length")
                    return
                done: list[tuple[str, Term]] = []
                for entry, (_, mt), pd in zip(c.env, mot.assignments, d.premises):
                    pc = pd.conclusion
                    want = subst_simultaneous(entry.ty, done)
                    if not (isinstance(pc, HasType) and len(pc.env) == 0
                            and pc.subject == mt and convertible(pc.ty, want, fuel)):
                        problems.append(f"{d.rule} cascade entry {entry.name} malformed")
                    done.append((entry.name, mt))
    except IndexError:
        problems.append(f"{d.rule} node is missing premises")


def verify_derivation(d: Derivation, fuel: Fuel | int = DEFAULT_FUEL) -> list[str]:
    """Re-check every node of a derivation against its rule schema.

    Returns a list of problems; an empty list means the tree is valid.
    """
    problems: list[str] = []
    for node in iter_nodes(d):
        _verify_node(node, problems, fuel)
    return problems


def relabel_restricted_products(d: Derivation,
                                _memo: dict | None = None) -> Derivation:
    """Map a restricted-calculus derivation into the full calculus:
    witness premises of product formations are dropped and every node is
    relabeled to CC mode."""
    if _memo is None:
        _memo = {}
    got = _memo.get(id(d))
    if got is not None:
        return got
    if d.rule == "prod_r":
        premises = (relabel_restricted_products(d.premises[1], _memo),)
        out = Derivation("prod", d.conclusion, premises, SystemMode.CC)
    else:
        premises = tuple(relabel_restricted_products(p, _memo) for p in d.premises)
        out = Derivation(d.rule, d.conclusion, premises, SystemMode.CC,
                         motivation=d.motivation)
    _memo[id(d)] = out
    return out


# ---------------------------------------------------------------------------
# condensed display

# Premises that carry the "spine" of a textbook proof.  Sort bookkeeping
# (second premise of abs, conversion targets) is elided from display.
_SPINE_PREMISES = {
    "env1": (), "env2": (0,), "ax": (0,), "var": (0,),
    "abs": (0,), "prod": (0,), "prod_r": (0, 1), "app": (0, 1), "conv": (0,),
}


def contract_derivation(d: Derivation) -> list[tuple[str, Judgment]]:
    """Linearize a derivation: premises before conclusions, each judgment
    printed once.

    In restricted mode an abstraction line is labeled ``abs+prod_r``,
    since the rule that types the function also forms its product type.
    """
    lines: list[tuple[str, Judgment]] = []
    seen: set = set()
    walked: set[int] = set()

    def walk(node: Derivation) -> None:
        if id(node) in walked:
            return
        walked.add(id(node))
        if node.rule in ("p-ax", "p-var"):
            spine = range(len(node.premises))
        else:
            spine = _SPINE_PREMISES[node.rule]
        for i in spine:
            walk(node.premises[i])
        label = node.rule
        if label == "abs" and node.mode is SystemMode.CCR:
            label = "abs+prod_r"
        key = (label, node.conclusion)
        if key not in seen:
            seen.add(key)
            lines.append((label, node.conclusion))

    walk(d)
    return lines


# ---------------------------------------------------------------------------
# stock examples


def naive_p_examples() -> list[tuple[Judgment, Motivation]]:
    """Three judgments the naive system accepts (under the paired
    motivations) although the full calculus rejects their environments.

    Each is ``env |- Prop : Type``; the interest is in the environments,
    whose entry types range over a sort, a beta-redex over a provable
    hypothesis, and a redex over an equation on numbers.
    """
    from .prelude import id_term, leibniz_eq, nat_type, numeral, top_type

    env_a = Environment((EnvEntry("x1", TYPE),))
    sigma_a = Motivation((("x1", PROP),))

    dom_b = arrow(top_type, Free("x1"))        # with x1 := top this is provable
    ty_b = App(Abs(dom_b, top_type), Abs(top_type, Bound(0)))
    env_b = Environment((EnvEntry("x1", PROP), EnvEntry("x2", ty_b)))
    sigma_b = Motivation((("x1", top_type), ("x2", id_term)))

    eq_c = leibniz_eq(nat_type, Free("x1"), numeral(0))
    refl_zero = Abs(
        Prod(nat_type, PROP),
        Abs(App(Bound(0), numeral(0)), Bound(0)),
    )
    ty_c = App(Abs(eq_c, top_type), refl_zero)
    env_c = Environment((EnvEntry("x1", nat_type), EnvEntry("x2", ty_c)))
    sigma_c = Motivation((("x1", numeral(0)), ("x2", id_term)))

    return [
        (HasType(env_a, PROP, TYPE), sigma_a),
        (HasType(env_b, PROP, TYPE), sigma_b),
        (HasType(env_c, PROP, TYPE), sigma_c),
    ]


# ---------------------------------------------------------------------------
# serialization


def derivation_to_dict(d: Derivation, render: Callable[[Term], str]) -> dict:
    """JSON-friendly encoding; `render` prints terms.

    Derivations share subtrees, so the encoding is a flat node table:
    ``{"root": i, "nodes": [...]}`` with premises given as indices into
    the table.  Each distinct node appears exactly once, in an order
    that puts premises before conclusions.
    """
    index: dict[int, int] = {}
    nodes: list[dict] = []

    def visit(node: Derivation) -> int:
        got = index.get(id(node))
        if got is not None:
            return got
        premises = [visit(p) for p in node.premises]
        if isinstance(node.conclusion, WellFormed):
            conclusion = {
                "judgment": "wf",
                "env": [{"name": e.name, "type": render(e.ty)}
                        for e in node.conclusion.env],
            }
        else:
            conclusion = {
                "judgment": "hastype",
                "env": [{"name": e.name, "type": render(e.ty)}
                        for e in node.conclusion.env],
                "term": render(node.conclusion.subject),
                "type": render(node.conclusion.ty),
            }
        entry: dict = {
            "rule": node.rule,
            "mode": node.mode.value,
            "conclusion": conclusion,
            "premises": premises,
        }
        if node.witness is not None:
            entry["witness"] = render(node.witness)
        if node.motivation is not None:
            entry["motivation"] = [
                {"name": n, "term": render(t)}
                for n, t in node.motivation.assignments
            ]
        index[id(node)] = len(nodes)
        nodes.append(entry)
        return index[id(node)]

    return {"root": visit(d), "nodes": nodes}

"""Motivation engine: turning restricted-mode derivations into inhabitants.

The restricted calculus only forms a product when its body is witnessed,
so a derivation that some closed type is well-sorted already contains,
structurally, an inhabitant of that type.  This module reads those
inhabitants back out:

  * `inhabit_from_prod_derivation` peels the witness off a restricted
    product-formation node and abstracts it (one `abs` node, no search).
  * `inhabit_type_sorted` handles kinds: anything of type Type normalizes
    to `forall xs, Prop` and is inhabited by `fun xs => top`.
  * `inhabit_applied` handles Prop-sorted types presented as a closed
    head applied to closed arguments, recursing along the derivation.
  * `motivate_env` runs the cascade over a well-formedness derivation,
    producing one closed term per hypothesis; `motivate_judgment` and
    `usefulness_argument` specialize it.

Everything found here is re-checked by the kernel from scratch; the
engine is a constructor of candidates, never a trusted authority.

A small proof search (`inhabit_search`) backs the kernel's witness
oracle.  It is deliberately bounded and deterministic: introduce binders
while the goal is a product, close goals that are literally Prop with
`top`, and otherwise scan the environment, newest entries first, trying
bounded chains of applications.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kernel import (
    CheckError,
    Checker,
    Derivation,
    Diagnostic,
    HasType,
    Motivation,
    SystemMode,
    WellFormed,
    WitnessOracle,
    check_motivated_env,
    check_type,
    check_wf,
    derivation_height,
    infer_type,
)
from .prelude import top_type
from .reduction import DEFAULT_FUEL, Fuel, convertible, whnf
from .terms import (
    Abs,
    App,
    Environment,
    EnvEntry,
    Free,
    PROP,
    Prod,
    TYPE,
    Term,
    apps,
    close_binder,
    fresh_name,
    free_vars,
    is_closed,
    open_binder,
    subst,
    subst_simultaneous,
)

DEFAULT_SEARCH_DEPTH = 8

# introduction is structural, but a guard beats an infinite loop on an
# adversarial (ill-typed) goal
_MAX_INTROS = 128

# combined cap on search tree nodes per query; keeps worst cases bounded
# without affecting the easy finds
DEFAULT_SEARCH_BUDGET = 4000


@dataclass(frozen=True)
class InhabitationGoal:
    env: Environment
    goal: Term
    depth: int


@dataclass(frozen=True)
class MotivationResult:
    motivation: Motivation
    derivations: tuple[Derivation, ...]


# ---------------------------------------------------------------------------
# bounded proof search


def _search(env: Environment, goal: Term, depth: int, fuel: Fuel | int,
            budget: list[int], intros: int = 0) -> Term | None:
    if budget[0] <= 0:
        return None
    budget[0] -= 1
    goal = whnf(goal, fuel)

    if goal == PROP:
        return top_type

    if isinstance(goal, Prod):
        if intros >= _MAX_INTROS:
            return None
        x = fresh_name(set(env.names()) | free_vars(goal))
        sub = _search(env.extended(x, goal.domain), open_binder(goal.body, x),
                      depth, fuel, budget, intros + 1)
        if sub is None:
            return None
        return Abs(goal.domain, close_binder(sub, x))

    # neutral goal: an assumption may close it outright
    for entry in reversed(env.entries):
        if convertible(entry.ty, goal, fuel):
            return Free(entry.name)

    # otherwise try assumption heads applied to searched arguments
    for entry in reversed(env.entries):
        found = _apply_head(env, Free(entry.name), whnf(entry.ty, fuel),
                            goal, depth, fuel, budget)
        if found is not None:
            return found
    return None


def _apply_head(env: Environment, head: Term, head_ty: Term, goal: Term,
                depth: int, fuel: Fuel | int, budget: list[int]) -> Term | None:
    if budget[0] <= 0:
        return None
    budget[0] -= 1
    if convertible(head_ty, goal, fuel):
        return head
    if depth <= 0 or not isinstance(head_ty, Prod):
        return None
    dom = head_ty.domain
    if convertible(dom, PROP, fuel):
        # dependent head: instantiating with the goal itself comes first
        candidates = [goal]
        candidates += [Free(e.name) for e in reversed(env.entries)
                       if convertible(e.ty, PROP, fuel)]
        candidates.append(top_type)
    else:
        arg = _search(env, dom, depth - 1, fuel, budget)
        candidates = [] if arg is None else [arg]
    for arg in candidates:
        applied = whnf(subst(head_ty.body, 0, arg), fuel)
        found = _apply_head(env, App(head, arg), applied, goal, depth - 1,
                            fuel, budget)
        if found is not None:
            return found
    return None


def make_search_oracle(depth: int = DEFAULT_SEARCH_DEPTH,
                       fuel: Fuel | int = DEFAULT_FUEL,
                       budget: int = DEFAULT_SEARCH_BUDGET) -> WitnessOracle:
    """The standard witness oracle: bounded deterministic search.

    Results (including misses) are cached per environment and goal; the
    same subgoals recur constantly while checking one derivation.
    """
    cache: dict[tuple[tuple, Term], Term | None] = {}

    def oracle(env: Environment, goal: Term) -> Term | None:
        key = (env.entries, goal)
        if key in cache:
            return cache[key]
        found = _search(env, goal, depth, fuel, [budget])
        cache[key] = found
        return found

    return oracle


def inhabit_search(env: Environment, goal: Term,
                   depth: int = DEFAULT_SEARCH_DEPTH,
                   fuel: Fuel | int = DEFAULT_FUEL,
                   ) -> tuple[Term, Derivation] | None:
    """Search for an inhabitant of `goal` and verify it from scratch.

    Returns None if the bounded search finds nothing; a None here is a
    report of exhaustion at this depth, not a nonexistence proof.
    """
    term = _search(env, goal, depth, fuel, [DEFAULT_SEARCH_BUDGET])
    if term is None:
        return None
    d = check_type(env, term, goal, SystemMode.CC, fuel=fuel)
    if isinstance(d, Diagnostic):
        return None
    return term, d


# ---------------------------------------------------------------------------
# reading inhabitants out of derivations


def _peel_conv(d: Derivation) -> Derivation:
    while d.rule == "conv":
        d = d.premises[0]
    return d


def inhabit_from_prod_derivation(d: Derivation) -> tuple[Term, Derivation]:
    """Given a restricted derivation that a product is well-sorted, return
    the product's inhabitant: the stored witness, abstracted.

    No search and no checking happen here; the returned derivation is a
    single `abs` node over the premises already present in `d`.
    """
    node = _peel_conv(d)
    if node.rule != "prod_r":
        raise ValueError(f"expected a restricted product formation, got {node.rule}")
    d_w, d_b = node.premises
    product = node.conclusion.subject
    binder = d_b.conclusion.env.entries[-1].name
    term = Abs(product.domain, close_binder(d_w.conclusion.subject, binder))
    deriv = Derivation(
        "abs",
        HasType(node.conclusion.env, term, product),
        (d_w, d_b),
        node.mode,
    )
    return term, deriv


def inhabit_type_sorted(d: Derivation,
                        oracle: WitnessOracle | None = None,
                        fuel: Fuel | int = DEFAULT_FUEL,
                        ) -> tuple[Term, Derivation]:
    """Inhabit the subject of `d : env |- B : Type`.

    Kinds normalize to `forall xs, Prop`; their canonical inhabitant is
    `fun xs => top`.  When `d` bottoms out at a product formation the
    witness is read off directly; the only other well-typed possibility
    is B literally Prop, inhabited by top itself.
    """
    c = d.conclusion
    if not isinstance(c, HasType) or c.ty != TYPE:
        raise ValueError("inhabit_type_sorted wants a derivation of B : Type")
    node = _peel_conv(d)
    if node.rule == "prod_r":
        return inhabit_from_prod_derivation(node)
    if node.conclusion.subject == PROP:
        oracle = oracle or make_search_oracle()
        dt = check_type(c.env, top_type, PROP, node.mode, oracle, fuel)
        if isinstance(dt, Diagnostic):
            raise AssertionError(f"top failed to check against Prop: {dt.message}")
        return top_type, dt
    raise AssertionError(
        f"a kind must be Prop or a product; derivation ends with {node.rule}"
    )


def inhabit_applied(d: Derivation, args: list[Term] | tuple[Term, ...] = (),
                    oracle: WitnessOracle | None = None,
                    fuel: Fuel | int = DEFAULT_FUEL,
                    trace: list | None = None,
                    ) -> tuple[Term, Derivation]:
    """Inhabit `B args` given `d : env |- B : forall xs, Prop` with B and
    the args closed.

    Recurses along the derivation: conversions are skipped, abstractions
    consume one argument by substitution (with a kernel re-check),
    applications fold their own argument into the list, and a product
    formation node ends the recursion by yielding its stored witness.
    The measure (longest reduction of `B args`, then derivation height)
    strictly decreases; `trace`, if given, collects it for the tests.
    """
    oracle = oracle or make_search_oracle()
    node = d
    while True:
        if trace is not None:
            trace.append((apps(node.conclusion.subject, *args),
                          derivation_height(node), node.rule))
        if node.rule == "conv":
            node = node.premises[0]
            continue
        if node.rule == "prod_r":
            if args:
                raise AssertionError("a product applied to arguments is not a type")
            return inhabit_from_prod_derivation(node)
        if node.rule == "abs":
            if not args:
                raise AssertionError("an abstraction cannot have sort Prop")
            body_d = node.premises[0]
            binder = body_d.conclusion.env.entries[-1].name
            reduced = subst(body_d.conclusion.subject, binder, args[0])
            r = infer_type(node.conclusion.env, reduced, node.mode, oracle, fuel)
            if isinstance(r, Diagnostic):
                raise AssertionError(
                    f"substituted instance failed to re-check: {r.message}")
            node, args = r[1], tuple(args[1:])
            continue
        if node.rule == "app":
            args = (node.conclusion.subject.arg,) + tuple(args)
            node = node.premises[0]
            continue
        raise AssertionError(
            f"inhabitation of an applied type reached rule {node.rule}; "
            "this cannot happen for closed subjects"
        )


def inhabit_closed(d: Derivation,
                   oracle: WitnessOracle | None = None,
                   fuel: Fuel | int = DEFAULT_FUEL,
                   trace: list | None = None,
                   ) -> tuple[Term, Derivation]:
    """Inhabit the subject of `d : env |- B : kappa`, dispatching on the
    sort kappa."""
    c = d.conclusion
    if not isinstance(c, HasType) or c.ty not in (PROP, TYPE):
        raise ValueError("inhabit_closed wants a derivation of B : sort")
    if c.ty == TYPE:
        return inhabit_type_sorted(d, oracle, fuel)
    return inhabit_applied(d, (), oracle, fuel, trace)


# ---------------------------------------------------------------------------
# motivating environments and judgments


def motivate_env(d: Derivation,
                 oracle: WitnessOracle | None = None,
                 fuel: Fuel | int = DEFAULT_FUEL,
                 ) -> MotivationResult | Diagnostic:
    """From `d : wf env` in the restricted system, construct the cascade:
    one closed term per entry, each checking against its entry type with
    all earlier variables substituted away.

    Every constructed term is re-checked from scratch; the entry's
    witness annotation (when present) only serves as a hint for deriving
    the sort of the substituted entry type.
    """
    if not isinstance(d.conclusion, WellFormed):
        raise ValueError("motivate_env wants a well-formedness derivation")
    mode = d.mode
    oracle = oracle or make_search_oracle()
    checker = Checker(mode, oracle, fuel)
    empty = checker.root_ctx(Environment())
    sigma: list[tuple[str, Term]] = []
    derivs: list[Derivation] = []
    try:
        for entry in d.conclusion.env:
            closed_ty = subst_simultaneous(entry.ty, sigma)
            hint = None
            if entry.witness is not None:
                hint = subst_simultaneous(entry.witness, sigma)
            inf = checker._infer(empty, closed_ty, hint, ("motivate", entry.name))
            if inf.ty not in (PROP, TYPE):
                return Diagnostic(
                    "env2", f"entry {entry.name} is not a type",
                    ("motivate", entry.name), found=inf.ty,
                )
            term, _ = inhabit_closed(inf.d, oracle, fuel)
            final = check_type(Environment(), term, closed_ty, mode, oracle, fuel)
            if isinstance(final, Diagnostic):
                return final
            sigma.append((entry.name, term))
            derivs.append(final)
    except CheckError as e:
        return e.diagnostic
    return MotivationResult(Motivation(tuple(sigma)), tuple(derivs))


def motivate_judgment(d: Derivation,
                      oracle: WitnessOracle | None = None,
                      fuel: Fuel | int = DEFAULT_FUEL,
                      ) -> tuple[MotivationResult, Derivation] | Diagnostic:
    """From `d : env |- u : B`, motivate the environment and transport the
    judgment under the substitution: returns the cascade plus a derivation
    of `|- u[sigma] : B[sigma]`."""
    c = d.conclusion
    if not isinstance(c, HasType):
        raise ValueError("motivate_judgment wants a typing derivation")
    oracle = oracle or make_search_oracle()
    wf = check_wf(c.env, d.mode, oracle, fuel)
    if isinstance(wf, Diagnostic):
        return wf
    mr = motivate_env(wf, oracle, fuel)
    if isinstance(mr, Diagnostic):
        return mr
    bindings = list(mr.motivation.assignments)
    subject = subst_simultaneous(c.subject, bindings)
    ty = subst_simultaneous(c.ty, bindings)
    final = check_type(Environment(), subject, ty, d.mode, oracle, fuel)
    if isinstance(final, Diagnostic):
        return final
    return mr, final


def usefulness_argument(d: Derivation,
                        oracle: WitnessOracle | None = None,
                        fuel: Fuel | int = DEFAULT_FUEL,
                        ) -> tuple[Term, Derivation] | Diagnostic:
    """A function typed in the empty environment has an inhabited domain:
    from `d : |- f : forall x : A, B`, produce `u` with `|- u : A`.

    This is the formal shape of "you may only speak of functions whose
    argument type is demonstrably non-empty".
    """
    c = d.conclusion
    if not isinstance(c, HasType) or len(c.env) != 0 or not isinstance(c.ty, Prod):
        raise ValueError(
            "usefulness_argument wants a closed derivation of a product type")
    oracle = oracle or make_search_oracle()
    env = Environment((EnvEntry("x", c.ty.domain),))
    wf = check_wf(env, d.mode, oracle, fuel)
    if isinstance(wf, Diagnostic):
        return wf
    mr = motivate_env(wf, oracle, fuel)
    if isinstance(mr, Diagnostic):
        return mr
    return mr.motivation.assignments[0][1], mr.derivations[0]


def check_poincare(env: Environment, candidate: Motivation,
                   fuel: Fuel | int = DEFAULT_FUEL) -> bool:
    """Does `candidate` justify `env`?  True iff every motivation term is
    closed and the substitution cascade checks in the full calculus."""
    for _, t in candidate.assignments:
        if not is_closed(t):
            return False
    result = check_motivated_env(env, candidate, SystemMode.CC, fuel=fuel)
    return not isinstance(result, Diagnostic)

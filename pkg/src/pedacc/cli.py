"""Command line driver.

One source file per invocation.  Every subcommand first builds the file's
environment from its ``assume``/``def`` declarations; the subcommand then
decides which of the remaining declarations are acted on:

    check      run the ``check`` declarations (or, with none, check that
               the environment itself is well formed) and print the
               derivation, one rule per line
    motivate   construct one closed witness per environment variable
    inhabit    run the ``inhabit`` declarations through bounded search
    normalize  print the normal form of each ``normalize`` subject
    eval       like normalize, but numerals are read back as integers
    selftest   run the generated property suites and print a table

Exit status: 0 on success, 1 when a judgment fails to check (or a search
comes up empty), 2 on usage, syntax, or name-resolution errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .inhabit import (
    DEFAULT_SEARCH_DEPTH,
    inhabit_search,
    make_search_oracle,
    motivate_env,
)
from .kernel import (
    Derivation,
    Diagnostic,
    Motivation,
    SystemMode,
    check_motivated_env,
    check_type,
    check_wf,
    contract_derivation,
    derivation_to_dict,
    infer_type,
)
from .prelude import to_natural
from .reduction import DEFAULT_FUEL, FuelExhausted, normalize
from .surface import (
    CheckCmd,
    EvalCmd,
    InhabitCmd,
    NormalizeCmd,
    SetMotivationCmd,
    elaborate,
    parse,
    render_diagnostic,
    render_judgment,
    render_term,
)
from .terms import Environment

_MODES = {"cc": SystemMode.CC, "ccr": SystemMode.CCR, "naivep": SystemMode.NAIVE}

# Deep terms produce deep recursion in the checker and the printer.
sys.setrecursionlimit(100000)


class _UsageError(Exception):
    pass


class _CheckFailure(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


def _diag_dict(d: Diagnostic) -> dict:
    out = {"rule": d.rule, "message": d.message, "position": list(d.position)}
    if d.expected is not None:
        out["expected"] = render_term(d.expected)
    if d.found is not None:
        out["found"] = render_term(d.found)
    return out


def _load(path: str):
    """Parse and elaborate a source file; raises _UsageError on any
    problem that predates the kernel."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise _UsageError(f"cannot read {path}: {e.strerror}")
    decls = parse(text)
    if isinstance(decls, Diagnostic):
        raise _UsageError(render_diagnostic(decls))
    out = elaborate(decls)
    if isinstance(out, Diagnostic):
        raise _UsageError(render_diagnostic(out))
    return out


def _file_motivation(env: Environment, cmds) -> Motivation:
    """Collect ``motivation x := t`` lines, ordered like the environment."""
    given = {c.name: c.body for c in cmds if isinstance(c, SetMotivationCmd)}
    return Motivation(tuple((n, given[n]) for n in env.names() if n in given))


def _emit(path: str | None, payload: dict) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _print_derivation(d: Derivation) -> None:
    for label, judgment in contract_derivation(d):
        print(f"{label:<11} {render_judgment(judgment)}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_check(args) -> int:
    env, cmds = _load(args.file)
    mode = _MODES[args.system]
    oracle = make_search_oracle(args.search_depth, args.fuel)
    motivation = _file_motivation(env, cmds) if mode is SystemMode.NAIVE else None

    derivations: list[Derivation] = []
    try:
        checks = [c for c in cmds if isinstance(c, CheckCmd)]
        if not checks:
            if mode is SystemMode.NAIVE:
                out = check_motivated_env(env, motivation, mode, oracle, args.fuel)
                if isinstance(out, Diagnostic):
                    raise _CheckFailure(out)
                derivations.extend(out)
            else:
                d = check_wf(env, mode, oracle, args.fuel)
                if isinstance(d, Diagnostic):
                    raise _CheckFailure(d)
                derivations.append(d)
        for cmd in checks:
            if cmd.expected is not None:
                res = check_type(env, cmd.subject, cmd.expected, mode,
                                 oracle, args.fuel, motivation)
            else:
                res = infer_type(env, cmd.subject, mode, oracle, args.fuel,
                                 motivation)
                if not isinstance(res, Diagnostic):
                    res = res[1]
            if isinstance(res, Diagnostic):
                raise _CheckFailure(res)
            derivations.append(res)
    except _CheckFailure as e:
        print(render_diagnostic(e.diagnostic), file=sys.stderr)
        _emit(args.emit_derivation,
              {"status": "error", "diagnostic": _diag_dict(e.diagnostic)})
        return 1

    for i, d in enumerate(derivations):
        if i:
            print()
        _print_derivation(d)
    _emit(args.emit_derivation,
          {"status": "ok",
           "derivations": [derivation_to_dict(d, render_term)
                           for d in derivations]})
    return 0


def _cmd_motivate(args) -> int:
    env, _ = _load(args.file)
    oracle = make_search_oracle(args.search_depth, args.fuel)
    d = check_wf(env, SystemMode.CCR, oracle, args.fuel)
    if isinstance(d, Diagnostic):
        print(render_diagnostic(d), file=sys.stderr)
        return 1
    res = motivate_env(d, oracle, args.fuel)
    if isinstance(res, Diagnostic):
        print(render_diagnostic(res), file=sys.stderr)
        return 1
    for name, witness in res.motivation.assignments:
        print(f"{name} := {render_term(witness)}")
    return 0


def _cmd_inhabit(args) -> int:
    env, cmds = _load(args.file)
    goals = [c.goal for c in cmds if isinstance(c, InhabitCmd)]
    if not goals:
        raise _UsageError(f"{args.file} has no inhabit declarations")
    failures = 0
    for goal in goals:
        found = inhabit_search(env, goal, args.search_depth, args.fuel)
        if found is None:
            print(f"no inhabitant found: {render_term(goal)}", file=sys.stderr)
            failures += 1
        else:
            term, _ = found
            print(f"{render_term(term)} : {render_term(goal)}")
    return 1 if failures else 0


def _subjects(args, cls, what: str) -> list:
    env, cmds = _load(args.file)
    if env.entries:
        raise _UsageError(
            f"{what} works on closed terms; {args.file} assumes variables")
    subjects = [c.subject for c in cmds if isinstance(c, cls)]
    if not subjects:
        raise _UsageError(f"{args.file} has no {what} declarations")
    return subjects


def _cmd_normalize(args) -> int:
    for subject in _subjects(args, NormalizeCmd, "normalize"):
        print(render_term(normalize(subject, args.fuel)))
    return 0


def _cmd_eval(args) -> int:
    for subject in _subjects(args, EvalCmd, "eval"):
        nf = normalize(subject, args.fuel)
        n = to_natural(nf, args.fuel)
        print(n if n is not None else render_term(nf))
    return 0


def _cmd_selftest(args) -> int:
    # Imported here: the harness pulls in every other module, and the
    # cheap subcommands should not pay for that.
    from .harness import render_selftest, run_selftest

    results = run_selftest(args.cases, args.seed)
    print(render_selftest(results))
    return 0 if all(r.ok for r in results) else 1


# ---------------------------------------------------------------------------
# argument plumbing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pedacc",
        description="Proof checker for the restricted calculus of constructions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_file(p):
        p.add_argument("file", metavar="FILE", help="source file to process")
        return p

    def with_fuel(p):
        p.add_argument("--fuel", type=int, default=DEFAULT_FUEL, metavar="N",
                       help="reduction step budget (default %(default)s)")
        return p

    def with_depth(p):
        p.add_argument("--search-depth", type=int,
                       default=DEFAULT_SEARCH_DEPTH, metavar="N",
                       help="witness search depth (default %(default)s)")
        return p

    p = sub.add_parser("check", help="check the file's judgments")
    with_depth(with_fuel(with_file(p)))
    p.add_argument("--system", choices=sorted(_MODES), default="ccr",
                   help="type system to check in (default %(default)s)")
    p.add_argument("--emit-derivation", metavar="PATH",
                   help="write the derivation (or diagnostic) as JSON")
    p.set_defaults(run=_cmd_check)

    p = sub.add_parser("motivate",
                       help="construct closed witnesses for the environment")
    with_depth(with_fuel(with_file(p)))
    p.add_argument("--system", choices=["ccr"], default="ccr",
                   help="only the restricted system motivates (default ccr)")
    p.set_defaults(run=_cmd_motivate)

    p = sub.add_parser("inhabit", help="search for inhabitants of the file's goals")
    with_depth(with_fuel(with_file(p)))
    p.set_defaults(run=_cmd_inhabit)

    p = sub.add_parser("normalize", help="print normal forms")
    with_fuel(with_file(p))
    p.set_defaults(run=_cmd_normalize)

    p = sub.add_parser("eval", help="normalize and read numerals back")
    with_fuel(with_file(p))
    p.set_defaults(run=_cmd_eval)

    p = sub.add_parser("selftest", help="run the generated property suites")
    p.add_argument("--cases", type=int, default=50, metavar="N",
                   help="cases per generated suite (default %(default)s)")
    p.add_argument("--seed", type=int, default=0, metavar="S",
                   help="base random seed (default %(default)s)")
    p.set_defaults(run=_cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.run(args)
    except _UsageError as e:
        print(f"pedacc: {e}", file=sys.stderr)
        return 2
    except FuelExhausted as e:
        print(f"pedacc: fuel exhausted: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage or
parse errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import homology as H
from .calculus import (check_master_equation, check_nilpotence,
                       check_quantum_condition, prolong_apply)
from .dsl import DSLError, parse_expr, parse_model
from .models import (check_homotopy, matter_cocycle, named_cocycle,
                     parse_builtin, topological_field, transgress,
                     verify_covariance)
from .superpoly import grading, serialize

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def load_model(ref: str):
    if ref.startswith("builtin:"):
        try:
            return parse_builtin(ref)
        except ValueError as ex:
            raise UsageError(str(ex)) from None
    path = Path(ref)
    if not path.exists():
        raise UsageError(f"no such model file: {ref}")
    try:
        return parse_model(path.read_text())
    except DSLError as ex:
        raise UsageError(f"{ref}: {ex}") from None


def _model(args):
    model = load_model(args.model)
    for k in getattr(args, "drop_part", None) or []:
        if not 0 <= k < len(model.action_parts):
            raise UsageError(f"no action part S[{k}]")
        model = model.without_part(k)
    return model


def _expr(model, text):
    try:
        return parse_expr(text, model.roster)
    except DSLError as ex:
        raise UsageError(f"expression: {ex}") from None


def _window(args, default):
    if args.window:
        try:
            return H.Window.parse(args.window)
        except ValueError as ex:
            raise UsageError(str(ex)) from None
    return default


def _named(model, kind, k, f=None):
    """alpha, beta, A, B (d = 0) and transgressed alpha~, beta~ = g(alpha_k), g(beta_k)."""
    base = kind.rstrip("~")
    try:
        if model.dim and base in ("alpha", "A", "zeta", "Z"):
            fpoly = _expr(model, f) if f else model.roster.one()
            val = matter_cocycle(model, base, k, fpoly)
        else:
            val = named_cocycle(model, base, k)
    except ValueError as ex:
        raise UsageError(str(ex)) from None
    return transgress(model, val) if kind.endswith("~") else val


def _subject(args, model):
    if args.expr:
        return _expr(model, args.expr[0])
    if args.kind and args.k is not None:
        return _named(model, args.kind, args.k, args.f)
    raise UsageError("give --expr or --kind with --k")


# ---------------------------------------------------------------------------
# commands

def cmd_check(args, out):
    model = _model(args)
    what = args.what
    if what == "master":
        reps = [check_master_equation(model)]
    elif what == "nilpotent":
        reps = [check_nilpotence(model.differential())]
    elif what == "quantum":
        reps = [check_quantum_condition(model)]
    elif what == "covariance":
        reps = [verify_covariance(model), check_homotopy(model)]
    else:
        reps = [check_homotopy(model)]
    out.write(f"model: {model.name}\n")
    for r in reps:
        out.write(r.text() + "\n")
    return OK if all(r.passed for r in reps) else FAILED


def cmd_cohomology(args, out):
    model = _model(args)
    if args.ghost is None:
        raise UsageError("cohomology needs --ghost")
    k = args.ghost
    w = _window(args, H.Window(max(3, 3 - k), 1))
    try:
        space = H.Space(H.SpaceSpec(args.variant, model))
        rep = H.cohomology_window(space, k, w, args.margin)
    except ValueError as ex:
        raise UsageError(str(ex)) from None
    out.write(rep.text() + "\n")
    if args.v_complex:
        chk = H.v_complex_check(model, k, w, args.margin)
        out.write(chk.text() + "\n")
        if not chk.passed:
            return FAILED
    return OK if rep.stabilized else FAILED


def cmd_cocycle(args, out):
    model = _model(args)
    a = _subject(args, model)
    out.write(f"model: {model.name}\n")
    out.write(f"input: {serialize(a)}\n")
    w = _window(args, None)
    if args.what == "closed":
        sa = prolong_apply(model.differential(), a)
        out.write(f"s(input): {serialize(sa)}\n")
        out.write(f"closed: {'yes' if not sa else 'no'}\n")
        return OK if not sa else FAILED
    if args.what == "coboundary":
        try:
            res = H.is_coboundary(model, a, w, args.margin)
        except ValueError as ex:
            out.write(f"error: {ex}\n")
            return FAILED
        out.write(res.text() + "\n")
        return OK
    res = H.functional_class_test(model, a, w, args.margin)
    out.write(res.text() + "\n")
    return OK if res.closed else FAILED


def bracket_table(model, kmax=2):
    """The transgressed-cocycle bracket table for d = 0, as (label, lhs, rhs)."""
    al = lambda k: named_cocycle(model, "alpha", k)
    be = lambda k: named_cocycle(model, "beta", k)
    at = lambda k: transgress(model, al(k))
    bt = lambda k: transgress(model, be(k))
    zero = model.roster.zero()
    rows = []
    for k in range(kmax + 1):
        for l in range(kmax + 1):
            if k + l == 0:
                continue
            rows.append((f"{{alpha~_{k}, alpha_{l}}} = {l - k} alpha_{k + l}",
                         (at(k), al(l)), al(k + l).scale(l - k)))
            rows.append((f"{{alpha~_{k}, alpha~_{l}}} = {l - k} alpha~_{k + l}",
                         (at(k), at(l)), at(k + l).scale(l - k)))
            rows.append((f"{{alpha_{k}, alpha_{l}}} = 0", (al(k), al(l)), zero))
            if l >= 1:
                c = 2 * k + l + 1
                rows.append((f"{{alpha~_{k}, beta_{l}}} = {c} beta_{k + l}",
                             (at(k), be(l)), be(k + l).scale(c)))
                rows.append((f"{{alpha~_{k}, beta~_{l}}} = {c} beta~_{k + l}",
                             (at(k), bt(l)), bt(k + l).scale(c)))
                rows.append((f"{{alpha_{k}, beta_{l}}} = 0", (al(k), be(l)), zero))
            if k >= 1 and l >= 1:
                rows.append((f"{{beta_{k}, beta_{l}}} = 0", (be(k), be(l)), zero))
    return rows


def cmd_bracket(args, out):
    model = _model(args)
    w = _window(args, None)
    out.write(f"model: {model.name}\n")
    if args.table:
        if model.dim != 0 or model.kind != "sugra":
            raise UsageError("--table needs builtin:sugra:d=0")
        ok = True
        for label, lhs, rhs in bracket_table(model, args.kmax):
            r = H.bracket_identity_check(model, lhs, rhs, w, args.margin, label)
            ok &= r.passed
            out.write(f"{label}: {'PASS' if r.passed else 'FAIL'}\n")
        return OK if ok else FAILED
    exprs = list(args.expr or [])
    if len(exprs) not in (2, 3):
        raise UsageError("bracket needs --expr LEFT --expr RIGHT [--expr RHS] or --table")
    a, b = _expr(model, exprs[0]), _expr(model, exprs[1])
    rhs = _expr(model, exprs[2]) if len(exprs) == 3 else model.roster.zero()
    try:
        r = H.bracket_identity_check(model, (a, b), rhs, w, args.margin)
    except ValueError as ex:
        out.write(f"error: {ex}\n")
        return FAILED
    out.write(r.text() + "\n")
    return OK if r.passed else FAILED


def cmd_fk_probe(args, out):
    model = _model(args)
    ks = [int(x) for x in (args.k_list or "1,2,3").split(",")]
    w = _window(args, None)
    rep = H.fk_probe(model, ks, w, args.margin)
    out.write(rep.text() + "\n")
    return OK


def cmd_filtration(args, out):
    model = _model(args)
    try:
        sigma = Fraction(args.sigma)
        rep = H.filtration_check(model, sigma)
    except ValueError as ex:
        raise UsageError(str(ex)) from None
    out.write(rep.text() + "\n")
    return OK if rep.passed else FAILED


def cmd_eval(args, out):
    model = _model(args)
    if not args.expr and not args.kind:
        raise UsageError("eval needs --expr or --kind with --k")
    a = _subject(args, model)
    out.write(serialize(a) + "\n")
    if a:
        try:
            deg = grading(a)
            out.write(f"ghost: {deg.ghost}\nparity: {'odd' if deg.parity else 'even'}\n")
        except ValueError:
            out.write("inhomogeneous\n")
    for op in args.apply or []:
        if op == "s":
            a = prolong_apply(model.differential(), a)
        elif op == "g":
            a = prolong_apply(topological_field(model), a)
        elif op == "d":
            a = a.dt()
        out.write(f"after {op}: {serialize(a)}\n")
    return OK


# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="bvspin", description="BV calculus for the spinning particle")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, window=True):
        sp.add_argument("--model", required=True, help="model file or builtin:free|sugra:d=N[:metric=..]")
        sp.add_argument("--drop-part", type=int, action="append",
                        help="remove the action part with this many positive-ghost factors")
        if window:
            sp.add_argument("--window", help="caps D,L,X,G (poly degree, derivatives, x degree, inverse depth)")
            sp.add_argument("--margin", type=int, default=H.DEFAULT_MARGIN)

    def subject(sp):
        sp.add_argument("--expr", action="append", help="expression in the model language")
        sp.add_argument("--kind", help="alpha, beta, A, B, zeta, Z; a trailing ~ applies g")
        sp.add_argument("--k", type=int)
        sp.add_argument("--f", help="coordinate polynomial for matter cocycles (d > 0)")

    c = sub.add_parser("check", help="master, nilpotent, quantum, covariance, homotopy")
    c.add_argument("what", choices=["master", "nilpotent", "quantum", "covariance", "homotopy"])
    common(c, window=False)
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("cohomology", help="windowed cohomology")
    common(c)
    c.add_argument("--ghost", type=int)
    c.add_argument("--variant", default="A", choices=H.VARIANTS)
    c.add_argument("--v-complex", action="store_true", help="also check the V complex")
    c.set_defaults(func=cmd_cohomology)

    c = sub.add_parser("cocycle", help="closed, coboundary or functional tests")
    c.add_argument("what", choices=["closed", "coboundary", "functional"])
    common(c)
    subject(c)
    c.set_defaults(func=cmd_cocycle)

    c = sub.add_parser("bracket", help="bracket identities modulo exact terms")
    common(c)
    c.add_argument("--expr", action="append")
    c.add_argument("--table", action="store_true", help="run the d = 0 bracket table")
    c.add_argument("--kmax", type=int, default=2)
    c.set_defaults(func=cmd_bracket)

    c = sub.add_parser("fk-probe", help="negative-degree cohomology of the quotient complexes")
    common(c)
    c.add_argument("--k", dest="k_list", help="comma-separated degrees, default 1,2,3")
    c.set_defaults(func=cmd_fk_probe)

    c = sub.add_parser("filtration", help="filtration degrees of the terms of s")
    common(c, window=False)
    c.add_argument("--sigma", default="1/2")
    c.set_defaults(func=cmd_filtration)

    c = sub.add_parser("eval", help="parse, print canonically and apply s, g or d")
    common(c, window=False)
    subject(c)
    c.add_argument("--apply", action="append", choices=["s", "g", "d"])
    c.set_defaults(func=cmd_eval)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return USAGE if ex.code else OK
    try:
        return args.func(args, out)
    except UsageError as ex:
        sys.stderr.write(f"bvspin: {ex}\n")
        return USAGE


if __name__ == "__main__":
    sys.exit(main())

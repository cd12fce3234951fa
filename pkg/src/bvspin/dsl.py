"""Model-definition files and the expression language.

Grammar::

    model NAME;
    dim N;
    metric SIGNS;                      e.g. `metric ++-;` or `metric;` for d = 0
    field NAME ghost INT parity (even|odd) [noanti] [invertible];
    ...
    action { EXPR }

Expressions use ``+ - * ^``, rationals ``a/b``, parentheses and the atoms
``name``, ``anti(name)``, ``d(expr, INT)``, ``inv(name)``.  Lines starting
with ``#`` are comments.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .models import MetricSignature, ModelSpec, split_by_ghost_degree
from .superpoly import (EVEN, ODD, FieldDecl, Polynomial, Roster, grading,
                        serialize)


class DSLError(ValueError):
    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + message)


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),;{}])
""", re.VERBOSE)

KEYWORDS = {"model", "dim", "metric", "field", "ghost", "parity", "even", "odd",
            "noanti", "invertible", "action", "anti", "d", "inv"}


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text}@{self.line}:{self.col}"


def tokenize(text: str):
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            toks.append(Token(kind, s, line, pos - line_start + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rfind("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text, roster=None):
        self.toks = tokenize(text)
        self.i = 0
        self.roster = roster

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return DSLError(msg, tok.line, tok.col)

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, text):
        if self.tok.text == text and self.tok.kind in ("op", "name"):
            return self.next()
        return None

    def expect(self, text):
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return t

    def expect_kind(self, kind, what):
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        return self.next()

    def integer(self):
        neg = self.accept("-") is not None
        t = self.expect_kind("num", "an integer")
        return -int(t.text) if neg else int(t.text)

    # expressions ----------------------------------------------------------
    def expr(self):
        neg = False
        if self.accept("-"):
            neg = True
        elif self.accept("+"):
            pass
        val = self.term()
        if neg:
            val = -val
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.next().text
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.power()
        while self.tok.text == "*" and self.tok.kind == "op":
            self.next()
            val = val * self.power()
        return val

    def power(self):
        start = self.tok
        base, info = self.atom()
        if self.tok.text == "^" and self.tok.kind == "op":
            self.next()
            n = self.integer()
            if info is not None:
                sym = self.roster.symbols[info]
                if sym.parity == ODD and n >= 2:
                    raise DSLError(f"odd generator {sym.name} raised to the power {n}",
                                   start.line, start.col)
            try:
                return base ** n
            except ValueError as ex:
                raise DSLError(str(ex), start.line, start.col) from None
        return base

    def symbol_name(self):
        t = self.tok
        if self.accept("anti"):
            self.expect("(")
            inner = self.expect_kind("name", "a symbol name")
            self.expect(")")
            return f"anti({inner.text})", t
        name = self.expect_kind("name", "a symbol name")
        if name.text in KEYWORDS:
            raise DSLError(f"unexpected keyword {name.text!r}", name.line, name.col)
        return name.text, t

    def lookup(self, name, tok):
        if not self.roster.has(name):
            raise DSLError(f"unknown symbol {name!r}", tok.line, tok.col)
        return self.roster.symbol(name)

    def atom(self):
        """Returns (value, symbol id or None if not a bare generator)."""
        t = self.tok
        R = self.roster
        if t.kind == "num":
            self.next()
            num = int(t.text)
            if self.tok.text == "/" and self.tok.kind == "op":
                self.next()
                den = self.expect_kind("num", "a denominator")
                if int(den.text) == 0:
                    raise DSLError("zero denominator", den.line, den.col)
                return R.const(Fraction(num, int(den.text))), None
            return R.const(num), None
        if self.accept("("):
            val = self.expr()
            self.expect(")")
            return val, None
        if t.text == "d" and t.kind == "name":
            self.next()
            self.expect("(")
            inner, info = self.atom_or_expr()
            self.expect(",")
            n = self.integer()
            if n < 0:
                raise DSLError("derivative order must be non-negative", t.line, t.col)
            self.expect(")")
            return inner.dt(n), info
        if t.text == "inv" and t.kind == "name":
            self.next()
            self.expect("(")
            name, nt = self.symbol_name()
            self.expect(")")
            sym = self.lookup(name, nt)
            if not sym.invertible:
                raise DSLError(f"{name} is not declared invertible", nt.line, nt.col)
            return R.inv(name), None
        if t.kind == "name":
            name, nt = self.symbol_name()
            sym = self.lookup(name, nt)
            return R.var(sym.id), sym.id
        found = t.text or "end of input"
        raise DSLError(f"unexpected {found!r} in expression", t.line, t.col)

    def atom_or_expr(self):
        # d(...) accepts a whole expression as its first argument
        start = self.i
        val, info = self.atom()
        if self.tok.text == ",":
            return val, info
        self.i = start
        return self.expr(), None


def parse_expr(text: str, roster: Roster) -> Polynomial:
    p = _Parser(text, roster)
    if p.tok.kind == "eof":
        raise p.error("empty expression")
    val = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after expression")
    return val


def parse_model(text: str) -> ModelSpec:
    p = _Parser(text)
    name = None
    dim = None
    metric = None
    decls = []
    action_start = None
    seen_action = False
    while p.tok.kind != "eof":
        t = p.tok
        if p.accept("model"):
            name = p.expect_kind("name", "a model name").text
            p.expect(";")
        elif p.accept("dim"):
            dim = p.integer()
            if dim < 0:
                raise DSLError("dim must be non-negative", t.line, t.col)
            p.expect(";")
        elif p.accept("metric"):
            signs = []
            while p.tok.text in ("+", "-") and p.tok.kind == "op":
                signs.append(1 if p.next().text == "+" else -1)
            p.expect(";")
            metric = MetricSignature(tuple(signs))
        elif p.accept("field"):
            fname = p.expect_kind("name", "a field name")
            if fname.text in KEYWORDS:
                raise DSLError(f"{fname.text!r} is reserved", fname.line, fname.col)
            p.expect("ghost")
            gh = p.integer()
            p.expect("parity")
            par = p.tok
            if p.accept("even"):
                parity = EVEN
            elif p.accept("odd"):
                parity = ODD
            else:
                raise p.error("expected 'even' or 'odd'")
            anti, inv = True, False
            while p.tok.text in ("noanti", "invertible"):
                flag = p.next().text
                if flag == "noanti":
                    anti = False
                else:
                    inv = True
            if inv and parity == ODD:
                raise DSLError("only even fields can be invertible", par.line, par.col)
            p.expect(";")
            decls.append(FieldDecl(fname.text, gh, parity, anti, inv))
        elif p.accept("action"):
            if seen_action:
                raise DSLError("duplicate action block", t.line, t.col)
            seen_action = True
            try:
                roster = Roster(decls)
            except ValueError as ex:
                raise DSLError(str(ex), t.line, t.col) from None
            p.roster = roster
            p.expect("{")
            action_start = p.tok
            if p.tok.text == "}":
                action = roster.zero()
            else:
                action = p.expr()
            p.expect("}")
        else:
            raise p.error(f"unexpected {t.text!r}; expected a declaration")
    if name is None:
        raise DSLError("missing 'model NAME;' header", 1, 1)
    if not seen_action:
        raise DSLError("missing action block", p.tok.line, p.tok.col)
    if dim is None:
        dim = 0 if metric is None else metric.d
    if metric is None:
        metric = MetricSignature.euclidean(dim)
    if metric.d != dim:
        raise DSLError(f"metric has {metric.d} entries but dim is {dim}", 1, 1)
    if action:
        try:
            deg = grading(action)
        except ValueError as ex:
            raise DSLError(f"action is inhomogeneous: {ex}", action_start.line,
                           action_start.col) from None
        if deg.ghost != 0 or deg.parity != EVEN:
            kind = "odd" if deg.parity else "even"
            raise DSLError(f"action must be even with ghost number 0, got ghost {deg.ghost}, {kind}",
                           action_start.line, action_start.col)
    parts = split_by_ghost_degree(roster, action)
    kind = _guess_kind(roster, dim)
    return ModelSpec(name, dim, metric, roster, action, parts, kind)


def _guess_kind(roster, dim):
    from .models import SUGRA_DECLS, _matter_decls
    if roster.decls == tuple(_matter_decls(dim) + SUGRA_DECLS):
        return "sugra"
    if dim and roster.decls == tuple(_matter_decls(dim)):
        return "free"
    return "custom"


def print_model(model: ModelSpec) -> str:
    name = re.sub(r"\W", "_", model.name.replace("=", "").replace("+", "p").replace("-", "m"))
    lines = [f"model {name};",
             f"dim {model.dim};",
             f"metric {model.metric.text()};".replace("metric ;", "metric;")]
    for d in model.roster.decls:
        flags = ("" if d.anti else " noanti") + (" invertible" if d.invertible else "")
        lines.append(f"field {d.name} ghost {d.ghost} parity {'odd' if d.parity else 'even'}{flags};")
    lines.append("action {")
    lines.append("  " + serialize(model.action))
    lines.append("}")
    return "\n".join(lines) + "\n"


def models_equal(a: ModelSpec, b: ModelSpec) -> bool:
    return (a.dim == b.dim and a.metric == b.metric and a.roster == b.roster
            and a.action == b.action)

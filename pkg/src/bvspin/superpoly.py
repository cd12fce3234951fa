"""Graded supercommutative differential polynomial algebras.

Generators are the derivatives ``d^l(phi)`` of the symbols of a :class:`Roster`.
Values are :class:`Polynomial` objects with exact rational coefficients, kept
in canonical form: every monomial stores its factors in the global variable
order (symbol id, then derivative order), and the Koszul sign of the
reordering is absorbed into the coefficient.  Designated even symbols may be
inverted at derivative order 0 (the localisation used for the superghost).
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from ._kernels import (SHIFT, mono_dt, mono_lderiv, mono_mul, poly_mul,
                       poly_mul_mono_into)

ORDER_MASK = (1 << SHIFT) - 1

EVEN, ODD = 0, 1


class RosterMismatch(ValueError):
    pass


class InhomogeneousError(ValueError):
    def __init__(self, message, terms=()):
        super().__init__(message)
        self.terms = list(terms)


def var_code(symbol: int, order: int = 0) -> int:
    return (symbol << SHIFT) | order


def var_symbol(code: int) -> int:
    return code >> SHIFT


def var_order(code: int) -> int:
    return code & ORDER_MASK


VarRef = namedtuple("VarRef", "symbol order")


def normalize_coeff(c):
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


@dataclass(frozen=True)
class FieldSymbol:
    id: int
    name: str
    ghost: int
    parity: int
    role: str = "field"
    partner: int | None = None
    invertible: bool = False

    def __post_init__(self):
        if self.parity not in (EVEN, ODD):
            raise ValueError(f"bad parity for {self.name}: {self.parity}")
        if self.invertible and self.parity != EVEN:
            raise ValueError(f"{self.name}: only even symbols can be inverted")


@dataclass(frozen=True)
class FieldDecl:
    """A field declaration; the antifield is derived unless ``anti`` is False."""

    name: str
    ghost: int
    parity: int
    anti: bool = True
    invertible: bool = False


class Roster:
    """An ordered list of symbols; ids follow declaration order.

    Each field is immediately followed by its antifield, so appending fields
    never renumbers existing symbols.
    """

    def __init__(self, decls: Iterable[FieldDecl]):
        symbols = []
        for d in decls:
            fid = len(symbols)
            if d.anti:
                symbols.append(FieldSymbol(fid, d.name, d.ghost, d.parity,
                                           "field", fid + 1, d.invertible))
                symbols.append(FieldSymbol(fid + 1, f"anti({d.name})",
                                           -1 - d.ghost, 1 - d.parity,
                                           "antifield", fid))
            else:
                symbols.append(FieldSymbol(fid, d.name, d.ghost, d.parity,
                                           "field", None, d.invertible))
        self.decls = tuple(decls)
        self.symbols = tuple(symbols)
        self.odd = bytes(s.parity for s in symbols)
        self._by_name = {s.name: s for s in symbols}
        if len(self._by_name) != len(symbols):
            raise ValueError("duplicate symbol names in roster")
        self.ghosts = tuple(s.ghost for s in symbols)

    def __eq__(self, other):
        return isinstance(other, Roster) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __repr__(self):
        return f"Roster({', '.join(s.name for s in self.symbols)})"

    def extend(self, decls: Iterable[FieldDecl]) -> "Roster":
        return Roster(self.decls + tuple(decls))

    def is_prefix_of(self, other: "Roster") -> bool:
        n = len(self.symbols)
        return other.symbols[:n] == self.symbols

    def symbol(self, name) -> FieldSymbol:
        if isinstance(name, FieldSymbol):
            return self.symbols[name.id]
        if isinstance(name, int):
            return self.symbols[name]
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown symbol {name!r}") from None

    def has(self, name) -> bool:
        return name in self._by_name

    def antifield(self, name) -> FieldSymbol:
        s = self.symbol(name)
        if s.partner is None:
            raise KeyError(f"{s.name} has no antifield")
        return self.symbols[s.partner]

    def fields(self):
        """Symbols of role 'field' that carry an antifield."""
        return [s for s in self.symbols if s.role == "field" and s.partner is not None]

    # constructors -----------------------------------------------------
    def var(self, name, order=0) -> "Polynomial":
        s = self.symbol(name)
        return Polynomial(self, {(var_code(s.id, order), 1): 1})

    def inv(self, name, n=1) -> "Polynomial":
        s = self.symbol(name)
        if not s.invertible:
            raise ValueError(f"{s.name} is not invertible")
        return Polynomial(self, {(var_code(s.id, 0), -n): 1})

    def const(self, c) -> "Polynomial":
        c = normalize_coeff(Fraction(c))
        return Polynomial(self, {(): c} if c else {})

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return Polynomial(self, {(): 1})

    # monomial helpers -------------------------------------------------
    def mono_ghost(self, m) -> int:
        g = 0
        gh = self.ghosts
        for i in range(0, len(m), 2):
            g += gh[m[i] >> SHIFT] * m[i + 1]
        return g

    def mono_parity(self, m) -> int:
        p = 0
        odd = self.odd
        for i in range(0, len(m), 2):
            if odd[m[i] >> SHIFT]:
                p ^= 1
        return p

    def factor_name(self, code, exp) -> str:
        s = self.symbols[code >> SHIFT]
        order = code & ORDER_MASK
        if exp < 0:
            base = f"inv({s.name})"
            return base if exp == -1 else f"{base}^{-exp}"
        base = s.name if order == 0 else f"d({s.name},{order})"
        return base if exp == 1 else f"{base}^{exp}"

    def format_monomial(self, m) -> str:
        return " * ".join(self.factor_name(m[i], m[i + 1]) for i in range(0, len(m), 2))


def check_monomial(roster: Roster, m) -> None:
    """Validate a raw monomial tuple against the Monomial invariants."""
    prev = -1
    for i in range(0, len(m), 2):
        v, e = m[i], m[i + 1]
        if v <= prev:
            raise ValueError("monomial factors out of canonical order")
        prev = v
        s = roster.symbols[v >> SHIFT]
        if e == 0:
            raise ValueError("zero exponent stored")
        if s.parity == ODD and e != 1:
            raise ValueError(f"odd generator {s.name} with exponent {e}")
        if e < 0 and not (s.invertible and (v & ORDER_MASK) == 0):
            raise ValueError(f"negative exponent on non-invertible {roster.factor_name(v, 1)}")


class Polynomial:
    """An exact element of the algebra, always in canonical form.

    ``terms`` maps monomial tuples to nonzero int/Fraction coefficients.
    Values are immutable; never mutate ``terms``.
    """

    __slots__ = ("roster", "terms", "_hash")

    def __init__(self, roster: Roster, terms=None):
        self.roster = roster
        if terms:
            self.terms = {m: normalize_coeff(c) for m, c in terms.items() if c}
        else:
            self.terms = {}
        self._hash = None

    @classmethod
    def _raw(cls, roster, terms):
        p = cls.__new__(cls)
        p.roster = roster
        p.terms = terms
        p._hash = None
        return p

    # basic protocol -----------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.sorted_terms())

    def sorted_terms(self):
        return sorted(self.terms.items())

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.roster == other.roster and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return not self.terms
            return self.terms == {(): other}
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __str__(self):
        return serialize(self)

    def __repr__(self):
        return f"Polynomial({serialize(self)})"

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.roster is not self.roster and other.roster != self.roster:
                raise RosterMismatch("polynomials over different rosters")
            return other
        if isinstance(other, (int, Fraction)):
            return self.roster.const(other)
        raise TypeError(f"cannot combine Polynomial with {type(other).__name__}")

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            x = out.get(m, 0) + c
            if x:
                out[m] = normalize_coeff(x)
            else:
                out.pop(m, None)
        return Polynomial._raw(self.roster, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.roster, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = normalize_coeff(Fraction(c)) if not isinstance(c, int) else c
        if not c:
            return Polynomial._raw(self.roster, {})
        return Polynomial._raw(self.roster,
                               {m: normalize_coeff(v * c) for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        other = self._coerce(other)
        out = poly_mul(self.terms, other.terms, self.roster.odd)
        return Polynomial._raw(self.roster, {m: normalize_coeff(c) for m, c in out.items()})

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if len(self.terms) == 1:
                (m, c), = self.terms.items()
                if len(m) == 2 and m[1] == 1 and c == 1:
                    s = self.roster.symbols[m[0] >> SHIFT]
                    if s.invertible and (m[0] & ORDER_MASK) == 0:
                        return Polynomial._raw(self.roster, {(m[0], n): 1})
            raise ValueError("negative powers only of an invertible generator")
        result = self.roster.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # structure ----------------------------------------------------------
    def coefficient(self, m):
        return self.terms.get(m, 0)

    def constant_term(self):
        return self.terms.get((), 0)

    def monomials(self):
        return sorted(self.terms)

    def is_localized(self):
        return any(m[i + 1] < 0 for m in self.terms for i in range(0, len(m), 2))

    def grading(self) -> "GradedDegree":
        return grading(self)

    def partial(self, v) -> "Polynomial":
        return partial_derivative(self, v)

    def dt(self, n=1) -> "Polynomial":
        p = self
        for _ in range(n):
            p = total_derivative(p)
        return p

    def lift(self, roster: Roster) -> "Polynomial":
        """Reinterpret over an extension roster (same leading symbols)."""
        if roster == self.roster:
            return self
        if not self.roster.is_prefix_of(roster):
            raise RosterMismatch("target roster does not extend the source roster")
        return Polynomial._raw(roster, dict(self.terms))

    def restrict(self, roster: Roster) -> "Polynomial":
        """Inverse of :meth:`lift`; fails if extra symbols occur."""
        n = len(roster)
        for m in self.terms:
            for i in range(0, len(m), 2):
                if m[i] >> SHIFT >= n:
                    raise RosterMismatch("polynomial uses symbols outside the target roster")
        return Polynomial._raw(roster, dict(self.terms))


@dataclass(frozen=True)
class GradedDegree:
    ghost: int
    parity: int


def grading(a: Polynomial) -> GradedDegree:
    """Ghost number and parity of a homogeneous polynomial.

    The zero polynomial has no well-defined degree; it reports (0, even).
    """
    r = a.roster
    seen = {}
    for m in a.terms:
        seen.setdefault((r.mono_ghost(m), r.mono_parity(m)), []).append(m)
    if not seen:
        return GradedDegree(0, EVEN)
    if len(seen) > 1:
        parts = "; ".join(
            f"(ghost {g}, {'odd' if p else 'even'}): {r.format_monomial(ms[0]) or '1'}"
            for (g, p), ms in sorted(seen.items()))
        raise InhomogeneousError(f"inhomogeneous polynomial: {parts}",
                                 [m for ms in seen.values() for m in ms])
    (g, p), = seen
    return GradedDegree(g, p)


def parity_of(a: Polynomial) -> int:
    return grading(a).parity


def _code(roster, v):
    if isinstance(v, int):
        return v
    if isinstance(v, tuple) and len(v) == 2:
        sym, order = v
        if not isinstance(sym, int):
            sym = roster.symbol(sym).id
        return var_code(sym, order)
    return var_code(roster.symbol(v).id, 0)


def partial_derivative(a: Polynomial, v) -> Polynomial:
    """Graded left derivative by the generator ``v`` (VarRef, name or code)."""
    r = a.roster
    code = _code(r, v)
    odd = r.odd
    out = {}
    for m, c in a.terms.items():
        k, rest = mono_lderiv(m, code, odd)
        if k:
            out[rest] = out.get(rest, 0) + k * c
    return Polynomial(r, out)


def total_derivative(a: Polynomial) -> Polynomial:
    """The even derivation d/dt, raising derivative orders by one."""
    r = a.roster
    odd = r.odd
    out = {}
    for m, c in a.terms.items():
        for k, new in mono_dt(m, odd):
            out[new] = out.get(new, 0) + k * c
    return Polynomial(r, out)


def multiply(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


def product(factors: Iterable[Polynomial], roster: Roster = None) -> Polynomial:
    result = None
    for f in factors:
        result = f if result is None else result * f
    if result is None:
        if roster is None:
            raise ValueError("empty product needs a roster")
        return roster.one()
    return result


def canonical_form(roster: Roster, raw_terms) -> Polynomial:
    """Canonical polynomial from ``[(coeff, [factor, ...]), ...]``.

    Factors are VarRefs, ``(name, order)`` pairs, names, or
    ``(name, order, exponent)`` triples, multiplied left to right.
    """
    total = roster.zero()
    for coeff, factors in raw_terms:
        term = roster.const(coeff)
        for f in factors:
            exp = 1
            if isinstance(f, tuple) and len(f) == 3:
                f, exp = (f[0], f[1]), f[2]
            code = _code(roster, f)
            if exp < 0:
                mono = Polynomial(roster, {(code, exp): 1})
                check_monomial(roster, (code, exp))
            else:
                mono = Polynomial(roster, {(code, 1): 1}) ** exp
            term = term * mono
        total = total + term
    return total


def polynomial_from_terms(roster: Roster, terms) -> Polynomial:
    """Build from a mapping of already-canonical monomial tuples (validated)."""
    for m in terms:
        check_monomial(roster, m)
    return Polynomial(roster, dict(terms))


def apply_substitution(a: Polynomial, images) -> Polynomial:
    """Algebra homomorphism sending each order-0 generator code to a polynomial.

    ``images`` maps symbol ids to Polynomials (over any roster); symbols not
    listed must not occur.  Derivatives of substituted symbols are not
    supported (raises).
    """
    target = None
    for p in images.values():
        target = p.roster
        break
    if target is None:
        raise ValueError("empty substitution")
    total = Polynomial._raw(target, {})
    for m, c in a.terms.items():
        term = target.const(c)
        for i in range(0, len(m), 2):
            v, e = m[i], m[i + 1]
            if v & ORDER_MASK:
                raise ValueError("substitution of derivatives is not supported")
            img = images[v >> SHIFT]
            term = term * (img ** e)
        total = total + term
    return total


def mono_mul_poly(m, c, a: Polynomial, left=True) -> Polynomial:
    """``c * m * a`` (left) or ``c * a * m`` for a monomial tuple ``m``."""
    r = a.roster
    odd = r.odd
    out = {}
    if left:
        for mt, ct in a.terms.items():
            s, p = mono_mul(m, mt, odd)
            if s:
                out[p] = out.get(p, 0) + (c * ct if s > 0 else -(c * ct))
    else:
        poly_mul_mono_into(out, a.terms, m, c, odd)
    return Polynomial(r, out)


def serialize(a: Polynomial) -> str:
    """Canonical text: ``<coeff> * <factor> * ...`` terms joined by + / -."""
    if not a.terms:
        return "0"
    r = a.roster
    parts = []
    for i, (m, c) in enumerate(sorted(a.terms.items())):
        neg = c < 0
        mag = -c if neg else c
        if isinstance(mag, Fraction):
            cs = f"{mag.numerator}/{mag.denominator}"
        else:
            cs = str(mag)
        body = cs if not m else f"{cs} * {r.format_monomial(m)}"
        if i == 0:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    return " ".join(parts)


def iter_factors(m):
    """Yield ``(VarRef, exponent)`` for a monomial tuple."""
    for i in range(0, len(m), 2):
        v = m[i]
        yield VarRef(v >> SHIFT, v & ORDER_MASK), m[i + 1]


def mono_degree(m) -> int:
    return sum(abs(m[i + 1]) for i in range(0, len(m), 2))


def mono_derivatives(m) -> int:
    return sum((m[i] & ORDER_MASK) * abs(m[i + 1]) for i in range(0, len(m), 2))

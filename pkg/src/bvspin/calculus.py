"""Variational calculus on the differential algebra.

Variational derivatives, exactness of densities, the antibracket, evolutionary
vector fields and the global checks on a BV action (classical master
equation, nilpotence of s, the quantum condition).

Derivatives are graded left derivatives throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd

from ._kernels import Echelon, mono_lderiv
from .superpoly import (ODD, SHIFT, ORDER_MASK, Polynomial, Roster, grading,
                        normalize_coeff, serialize, total_derivative,
                        var_code)


class ExactnessError(ValueError):
    pass


# ---------------------------------------------------------------------------
# variational derivatives and exactness

def _symbol_id(roster: Roster, phi) -> int:
    if isinstance(phi, int):
        if not 0 <= phi < len(roster):
            raise KeyError(f"no symbol with id {phi} in the roster")
        return phi
    return roster.symbol(phi).id


def occurring_orders(a: Polynomial, sym: int):
    orders = set()
    for m in a.terms:
        for i in range(0, len(m), 2):
            if m[i] >> SHIFT == sym:
                orders.add(m[i] & ORDER_MASK)
    return sorted(orders)


def variational_derivative(a: Polynomial, phi) -> Polynomial:
    """Euler-Lagrange derivative: sum over l of (-d)^l applied to dA/d(d^l phi)."""
    r = a.roster
    sym = _symbol_id(r, phi)
    orders = occurring_orders(a, sym)
    if not orders:
        return r.zero()
    top = max(orders)
    # Horner scheme in -d
    acc = r.zero()
    for l in range(top, -1, -1):
        acc = -total_derivative(acc) if acc else acc
        if l in orders:
            acc = acc + a.partial(var_code(sym, l))
    return acc


def euler_derivatives(a: Polynomial):
    """All nonzero variational derivatives, keyed by symbol id."""
    r = a.roster
    syms = set()
    for m in a.terms:
        for i in range(0, len(m), 2):
            syms.add(m[i] >> SHIFT)
    out = {}
    for s in sorted(syms):
        v = variational_derivative(a, s)
        if v:
            out[s] = v
    return out


def _component_key(m):
    """Net exponent per symbol and total derivative count: the invariants of d/dt."""
    content = {}
    deriv = 0
    for i in range(0, len(m), 2):
        v, e = m[i], m[i + 1]
        s = v >> SHIFT
        content[s] = content.get(s, 0) + e
        deriv += (v & ORDER_MASK) * (e if e > 0 else 0)
    return tuple(sorted((s, e) for s, e in content.items() if e)), deriv


def _partitions(n, max_part=None):
    """Partitions of n as lists of parts (non-increasing)."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield []
        return
    for p in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - p, p):
            yield [p] + rest


def _symbol_distributions(roster, sym, count, weight):
    """Ways to place ``count`` (net) factors of ``sym`` carrying ``weight`` derivatives.

    Yields lists of ``(code, exponent)`` in increasing order.
    """
    s = roster.symbols[sym]
    if s.parity == ODD:
        if count < 0:
            return
        # distinct orders, count of them, summing to weight
        for orders in _distinct_orders(count, weight):
            yield [(var_code(sym, o), 1) for o in orders]
        return
    for parts in _partitions(weight):
        k = len(parts)
        e0 = count - k
        if e0 < 0 and not s.invertible:
            continue
        exps = {}
        for p in parts:
            exps[p] = exps.get(p, 0) + 1
        facs = []
        if e0:
            facs.append((var_code(sym, 0), e0))
        for o in sorted(exps):
            facs.append((var_code(sym, o), exps[o]))
        yield facs


def _distinct_orders(count, weight, low=0):
    if count == 0:
        if weight == 0:
            yield []
        return
    o = low
    # smallest possible total with count distinct values starting at o
    while o * count + count * (count - 1) // 2 <= weight:
        for rest in _distinct_orders(count - 1, weight - o, o + 1):
            yield [o] + rest
        o += 1


def component_monomials(roster: Roster, content, deriv):
    """All monomials with the given net symbol content and derivative count."""
    content = list(content)
    out = []

    def rec(idx, remaining, acc):
        if idx == len(content):
            if remaining == 0:
                out.append(tuple(x for f in sorted(acc) for x in f))
            return
        sym, cnt = content[idx]
        for w in range(remaining + 1):
            for facs in _symbol_distributions(roster, sym, cnt, w):
                rec(idx + 1, remaining - w, acc + facs)

    rec(0, deriv, [])
    return sorted(set(out))


def integrate(a: Polynomial):
    """Split ``a = d(g) + r`` with ``r`` reduced against the image of ``d``.

    ``r`` is zero exactly when ``a`` is a total derivative.  The search is
    exact: d preserves the net symbol content and raises the derivative count
    by one, so each homogeneous piece of ``a`` lies in a finite space.
    """
    r = a.roster
    comps = {}
    for m, c in a.terms.items():
        comps.setdefault(_component_key(m), {})[m] = c
    g_total = {}
    rem_total = {}
    for (content, deriv), part in sorted(comps.items()):
        if deriv == 0:
            rem_total.update(part)
            continue
        basis = component_monomials(r, content, deriv - 1)
        ech = Echelon()
        # invariant of every stored row: row = sum combo[j] * d(basis[j])
        for j, b in enumerate(basis):
            img = total_derivative(Polynomial._raw(r, {b: 1}))
            if img:
                ech.add(dict(img.terms), {j: 1})
        vec, den = _int_vector(part)
        # vec = L * part + sum c_j d(b_j) with L = combo[-1]
        vec, combo = ech.reduce(vec, {-1: den})
        lead = combo.pop(-1)
        for m, c in vec.items():
            rem_total[m] = rem_total.get(m, 0) + Fraction(c, lead)
        for j, cj in combo.items():
            b = basis[j]
            g_total[b] = g_total.get(b, 0) + Fraction(-cj, lead)
    g = Polynomial(r, {m: normalize_coeff(Fraction(c)) for m, c in g_total.items()})
    rem = Polynomial(r, {m: normalize_coeff(Fraction(c)) for m, c in rem_total.items()})
    return g, rem


def _int_vector(terms):
    """Scale a rational vector to integers; returns (vector, denominator)."""
    den = 1
    for c in terms.values():
        if isinstance(c, Fraction):
            den = den * c.denominator // gcd(den, c.denominator)
    return {m: int(c * den) for m, c in terms.items()}, den


def is_total_derivative(a: Polynomial, witness: bool = False, method: str = "auto"):
    """True iff ``a`` lies in the image of d (constants excluded).

    For polynomial inputs the Euler criterion is used (all variational
    derivatives vanish and the constant term is zero).  Localized inputs and
    witness requests go through :func:`integrate`, which is exact.
    With ``witness=True`` returns ``(flag, g)`` where ``d(g) = a`` if flag.
    """
    if method == "auto":
        method = "solve" if (witness or a.is_localized()) else "euler"
    if method == "euler":
        if a.is_localized():
            raise ExactnessError("Euler criterion needs a non-localized input")
        flag = not a.constant_term() and not euler_derivatives(a)
        return (flag, None) if witness else flag
    g, rem = integrate(a)
    flag = rem.is_zero()
    if witness:
        return flag, (g if flag else None)
    return flag


# ---------------------------------------------------------------------------
# antibracket

def common_roster(a: Polynomial, b: Polynomial):
    """Lift two polynomials to the larger of their (nested) rosters."""
    if a.roster == b.roster:
        return a, b
    if a.roster.is_prefix_of(b.roster):
        return a.lift(b.roster), b
    return a, b.lift(a.roster)


def antibracket_density(f: Polynomial, g: Polynomial) -> Polynomial:
    """Density of the antibracket of the functionals of ``f`` and ``g``.

    Sum over fields with antifields of
    (-1)^((pf+1) p(phi)) (df/dphi dg/dphi+ + (-1)^pf df/dphi+ dg/dphi).
    """
    f, g = common_roster(f, g)
    r = f.roster
    pf = grading(f).parity
    grading(g)
    total = r.zero()
    for phi in r.fields():
        anti = phi.partner
        dfa = variational_derivative(f, anti)
        dga = variational_derivative(g, anti)
        if not dfa and not dga:
            continue
        dfp = variational_derivative(f, phi.id) if dga else None
        dgp = variational_derivative(g, phi.id) if dfa else None
        term = r.zero()
        if dga and dfp:
            term = term + dfp * dga
        if dfa and dgp:
            t = dfa * dgp
            term = term + (-t if pf else t)
        if (pf + 1) * phi.parity % 2:
            term = -term
        total = total + term
    return total


@dataclass(frozen=True)
class FunctionalClass:
    """The class of a density modulo total derivatives."""

    representative: Polynomial

    @property
    def roster(self):
        return self.representative.roster

    def __add__(self, other):
        return FunctionalClass(self.representative + other.representative)

    def __sub__(self, other):
        return FunctionalClass(self.representative - other.representative)

    def scale(self, c):
        return FunctionalClass(self.representative.scale(c))

    def is_zero(self):
        return is_total_derivative(self.representative)

    def equals(self, other):
        return is_total_derivative(self.representative - other.representative)

    def parity(self):
        return grading(self.representative).parity


def functional_antibracket(F: FunctionalClass, G: FunctionalClass) -> FunctionalClass:
    return FunctionalClass(antibracket_density(F.representative, G.representative))


# ---------------------------------------------------------------------------
# evolutionary vector fields

class EvolutionaryField:
    """A derivation commuting with d, fixed by its values on order-0 generators.

    ``characteristics`` maps symbol ids to Polynomials; absent symbols map to 0.
    """

    def __init__(self, roster: Roster, characteristics, parity: int, ghost_shift: int,
                 name: str = "X"):
        self.roster = roster
        self.characteristics = {k: v for k, v in characteristics.items() if v}
        self.parity = parity
        self.ghost_shift = ghost_shift
        self.name = name
        self._prolonged = {}

    def __repr__(self):
        return f"EvolutionaryField({self.name}, parity={self.parity}, ghost={self.ghost_shift})"

    def char(self, sym) -> Polynomial:
        sid = _symbol_id(self.roster, sym)
        return self.characteristics.get(sid, self.roster.zero())

    def on_code(self, code):
        """Image of the generator ``code`` (cached prolongation)."""
        p = self._prolonged.get(code)
        if p is None:
            sym, order = code >> SHIFT, code & ORDER_MASK
            base = self.characteristics.get(sym)
            if base is None:
                p = None
            elif order == 0:
                p = base.terms
            else:
                p = total_derivative(Polynomial._raw(self.roster, self.on_code(code - 1))).terms
            p = p or {}
            self._prolonged[code] = p
        return p

    def __call__(self, a: Polynomial) -> Polynomial:
        return prolong_apply(self, a)

    def lift(self, roster: Roster) -> "EvolutionaryField":
        return EvolutionaryField(roster, {k: v.lift(roster) for k, v in self.characteristics.items()},
                                 self.parity, self.ghost_shift, self.name)

    def scale(self, c):
        return EvolutionaryField(self.roster, {k: v.scale(c) for k, v in self.characteristics.items()},
                                 self.parity, self.ghost_shift, self.name)

    def __add__(self, other):
        chars = dict(self.characteristics)
        for k, v in other.characteristics.items():
            chars[k] = chars[k] + v if k in chars else v
        return EvolutionaryField(self.roster, chars, self.parity, self.ghost_shift,
                                 f"{self.name}+{other.name}")

    def __sub__(self, other):
        return self + other.scale(-1)


def prolong_apply(X: EvolutionaryField, a: Polynomial) -> Polynomial:
    """X(a) = sum over generators v of X(v) * da/dv (left derivatives)."""
    from ._kernels import poly_mul_mono_into
    r = a.roster
    if r != X.roster:
        raise ValueError("field and polynomial live over different rosters")
    odd = r.odd
    out = {}
    for m, c in a.terms.items():
        for i in range(0, len(m), 2):
            code = m[i]
            img = X.on_code(code)
            if not img:
                continue
            k, rest = mono_lderiv(m, code, odd)
            poly_mul_mono_into(out, img, rest, k * c, odd)
    return Polynomial(r, out)


def apply_many(X: EvolutionaryField, polys):
    return [prolong_apply(X, p) for p in polys]


def commutator(X: EvolutionaryField, Y: EvolutionaryField) -> EvolutionaryField:
    """Graded commutator, computed on characteristics."""
    r = X.roster
    sign = -1 if X.parity and Y.parity else 1
    chars = {}
    for sym in set(X.characteristics) | set(Y.characteristics) | set(range(len(r))):
        v = r.symbols[sym]
        gen = r.var(v.id)
        xy = prolong_apply(X, prolong_apply(Y, gen))
        yx = prolong_apply(Y, prolong_apply(X, gen))
        val = xy - yx if sign > 0 else xy + yx
        if val:
            chars[sym] = val
    return EvolutionaryField(r, chars, (X.parity + Y.parity) % 2,
                             X.ghost_shift + Y.ghost_shift, f"[{X.name},{Y.name}]")


def derivative_field(roster: Roster) -> EvolutionaryField:
    """The total derivative as an evolutionary field."""
    return EvolutionaryField(roster, {s.id: roster.var(s.id, 1) for s in roster.symbols},
                             0, 0, "d")


def hamiltonian_field(F: Polynomial, name: str = "ham") -> EvolutionaryField:
    """The field f -> {F, f} (bracket of functionals, F on the left)."""
    r = F.roster
    deg = grading(F)
    pF = deg.parity
    chars = {}
    for phi in r.fields():
        sign = -1 if (pF + 1) * phi.parity % 2 else 1
        dFa = variational_derivative(F, phi.partner)
        if dFa:
            chars[phi.id] = dFa.scale(-sign if pF else sign)
        dFp = variational_derivative(F, phi.id)
        if dFp:
            chars[phi.partner] = dFp.scale(sign)
    return EvolutionaryField(r, chars, (pF + 1) % 2, deg.ghost + 1, name)


def differential_from_action(model_or_action) -> EvolutionaryField:
    """The BV differential s = {S, -} of an even ghost-0 action.

    s(phi) = (-1)^p(phi) dS/dphi+ and s(phi+) = (-1)^p(phi) dS/dphi.
    """
    S = getattr(model_or_action, "action", model_or_action)
    if S:
        deg = grading(S)
        if deg.ghost != 0 or deg.parity != 0:
            raise ValueError(f"action must be even of ghost number 0, got {deg}")
    r = S.roster
    chars = {}
    for phi in r.fields():
        sign = -1 if phi.parity else 1
        a = variational_derivative(S, phi.partner)
        if a:
            chars[phi.id] = a.scale(sign)
        b = variational_derivative(S, phi.id)
        if b:
            chars[phi.partner] = b.scale(sign)
    return EvolutionaryField(r, chars, ODD, 1, "s")


# ---------------------------------------------------------------------------
# checks

@dataclass
class CheckReport:
    name: str
    passed: bool
    residual: Polynomial
    witness: Polynomial | None = None
    detail: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.passed

    def text(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'}",
                 f"residual: {serialize(self.residual)}"]
        if self.witness is not None:
            lines.append(f"witness: {serialize(self.witness)}")
        for k, v in self.detail.items():
            val = serialize(v) if isinstance(v, Polynomial) else str(v)
            lines.append(f"  {k}: {val}")
        for n in self.notes:
            lines.append(f"note: {n}")
        return "\n".join(lines)

    __str__ = text


def master_density(S: Polynomial) -> Polynomial:
    return antibracket_density(S, S)


def check_master_equation(model, witness: bool = True) -> CheckReport:
    """{S, S} is a total derivative; witness S~ normalised so that d S~ = sum (-1)^p dS/dPhi dS/dPhi+.

    The report's residual is the part of the density left after removing the
    image of d (zero iff the equation holds).
    """
    S = getattr(model, "action", model)
    r = S.roster
    dens = master_density(S)
    euler = not dens.constant_term() and not euler_derivatives(dens)
    g, rem = integrate(dens)
    passed = rem.is_zero()
    rep = CheckReport("master equation", passed, rem)
    if passed and witness:
        # sum_i (-1)^p dS/dphi dS/dphi+ = d S~ ; the density is twice that sum
        rep.witness = g.scale(Fraction(1, 2))
    rep.detail["euler criterion"] = "vanishing" if euler else "nonvanishing"
    if euler != passed:
        rep.notes.append("Euler criterion and integration disagree")
        rep.passed = False
        rep.residual = rem or dens
    rep.detail["density terms"] = len(dens)
    del r
    return rep


def check_nilpotence(X: EvolutionaryField) -> CheckReport:
    r = X.roster
    detail = {}
    residual = None
    for s in r.symbols:
        val = prolong_apply(X, prolong_apply(X, r.var(s.id)))
        if val:
            detail[f"{X.name}^2({s.name})"] = val
            if residual is None:
                residual = val
    passed = residual is None
    return CheckReport(f"nilpotence of {X.name}", passed,
                       residual if residual is not None else r.zero(), detail=detail)


def check_quantum_condition(model) -> CheckReport:
    S = getattr(model, "action", model)
    r = S.roster
    detail = {}
    residual = None
    for phi in r.fields():
        val = S.partial(var_code(phi.id, 0)).partial(var_code(phi.partner, 0))
        if val:
            detail[f"d2S/d{phi.name}d{r.symbols[phi.partner].name}"] = val
            if residual is None:
                residual = val
    passed = residual is None
    return CheckReport("quantum condition", passed,
                       residual if residual is not None else r.zero(), detail=detail)


def fields_equal(X: EvolutionaryField, Y: EvolutionaryField):
    """Generator-wise comparison; returns (ok, {name: difference})."""
    r = X.roster
    diffs = {}
    for s in r.symbols:
        d = X.char(s.id) - Y.char(s.id)
        if d:
            diffs[s.name] = d
    return not diffs, diffs


def pairs(seq):
    return combinations(seq, 2)

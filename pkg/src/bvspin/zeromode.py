"""The zero-mode ring R = O[Theta, P, Gamma] / (P.Theta, eta P P, Gamma^2).

Elements are :class:`ZeroModePoly` values over generators X^mu (even),
Theta^mu (odd), P_mu (even) and Gamma (even, ghost 1).  A monomial is a
tuple ``(x_exps, p_exps, theta_mask, gamma_exp)``.  Normal forms come from a
Groebner basis of the ideal, computed by Buchberger's algorithm adapted to
the supercommutative setting (S-pairs plus products Theta_i g for every odd
Theta_i in the leading monomial of g).  X and Gamma are passive.

Term order: total degree in (P, Theta) first, then lexicographic with rank
P_d > Theta^d > P_{d-1} > ... > P_1 > Theta^1, then X, then Gamma.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations, combinations_with_replacement

from ._kernels import Echelon
from .superpoly import EVEN, ODD, FieldDecl, Polynomial, Roster, normalize_coeff


def _popcount(t):
    return bin(t).count("1")


def _theta_sign(ta, tb):
    """Sign of Theta_ta * Theta_tb relative to the ascending product of ta | tb."""
    if ta & tb:
        return 0
    s = 0
    j = tb
    while j:
        low = j & -j
        # bits of ta above this bit of tb must be passed
        s += _popcount(ta & ~((low << 1) - 1))
        j ^= low
    return -1 if s & 1 else 1


def _mono_mul(a, b):
    sg = _theta_sign(a[2], b[2])
    if not sg:
        return 0, None
    return sg, (tuple(x + y for x, y in zip(a[0], b[0])),
                tuple(x + y for x, y in zip(a[1], b[1])), a[2] | b[2], a[3] + b[3])


def _divides(a, b):
    return (all(x <= y for x, y in zip(a[0], b[0])) and all(x <= y for x, y in zip(a[1], b[1]))
            and (a[2] & ~b[2]) == 0 and a[3] <= b[3])


def _quotient(b, a):
    return (tuple(y - x for x, y in zip(a[0], b[0])), tuple(y - x for x, y in zip(a[1], b[1])),
            b[2] & ~a[2], b[3] - a[3])


class ZeroModeRing:
    """The ring for a given target dimension and diagonal metric."""

    def __init__(self, d: int, eta=None):
        if d < 1:
            raise ValueError("the zero-mode ring needs d >= 1")
        self.d = d
        self.eta = tuple(eta) if eta is not None else (1,) * d
        if len(self.eta) != d or any(e not in (1, -1) for e in self.eta):
            raise ValueError("bad metric for the zero-mode ring")
        self.zero_x = (0,) * d
        self.roster = Roster([FieldDecl(f"X{m}", 0, EVEN, anti=False) for m in range(1, d + 1)]
                             + [FieldDecl(f"Theta{m}", 0, ODD, anti=False) for m in range(1, d + 1)]
                             + [FieldDecl(f"P{m}", 0, EVEN, anti=False) for m in range(1, d + 1)]
                             + [FieldDecl("Gamma", 1, EVEN, anti=False)])
        self._gb = None

    def __eq__(self, other):
        return isinstance(other, ZeroModeRing) and (self.d, self.eta) == (other.d, other.eta)

    def __hash__(self):
        return hash((self.d, self.eta))

    # monomial helpers ------------------------------------------------------
    def mono(self, x=None, p=None, theta=(), gamma=0):
        d = self.d
        x = tuple(x) if x is not None else (0,) * d
        p = tuple(p) if p is not None else (0,) * d
        t = 0
        for mu in theta:
            t |= 1 << (mu - 1)
        return (x, p, t, gamma)

    def key(self, m):
        x, p, t, g = m
        deg = sum(p) + _popcount(t)
        lex = []
        for mu in range(self.d - 1, -1, -1):
            lex.append(p[mu])
            lex.append((t >> mu) & 1)
        return (deg, tuple(lex), x, g)

    # constructors -------------------------------------------------------------
    def const(self, c):
        c = normalize_coeff(Fraction(c))
        return ZeroModePoly(self, {self.mono(): c} if c else {})

    def one(self):
        return self.const(1)

    def zero(self):
        return ZeroModePoly(self, {})

    def X(self, mu):
        x = [0] * self.d
        x[mu - 1] = 1
        return ZeroModePoly(self, {self.mono(x=x): 1})

    def P(self, mu):
        p = [0] * self.d
        p[mu - 1] = 1
        return ZeroModePoly(self, {self.mono(p=p): 1})

    def Theta(self, mu):
        return ZeroModePoly(self, {self.mono(theta=(mu,)): 1})

    def Gamma(self):
        return ZeroModePoly(self, {self.mono(gamma=1): 1})

    def omega(self):
        out = self.one()
        for mu in range(1, self.d + 1):
            out = out * self.Theta(mu)
        return out

    def ideal_generators(self):
        pt = self.zero()
        pp = self.zero()
        for mu in range(1, self.d + 1):
            pt = pt + self.P(mu) * self.Theta(mu)
            pp = pp + (self.P(mu) * self.P(mu)).scale(self.eta[mu - 1])
        return [pt, pp]

    # Groebner basis -----------------------------------------------------------
    @property
    def groebner(self):
        if self._gb is None:
            self._gb = self._buchberger()
        return self._gb

    def leading(self, f):
        m = max(f.terms, key=self.key)
        return m, f.terms[m]

    def _monic(self, f):
        m, c = self.leading(f)
        return f.scale(Fraction(1) / c)

    def _times_mono(self, q, f):
        out = {}
        for m, c in f.terms.items():
            sg, mm = _mono_mul(q, m)
            if sg:
                out[mm] = out.get(mm, 0) + sg * c
        return ZeroModePoly(self, out)

    def _reduce_by(self, f, basis, gamma_cut=True):
        """Full reduction of f by a list of monic polynomials."""
        work = dict(f.terms)
        if gamma_cut:
            work = {m: c for m, c in work.items() if m[3] < 2}
        out = {}
        leads = [(self.leading(g)[0], g) for g in basis]
        while work:
            m = max(work, key=self.key)
            c = work.pop(m)
            for lm, g in leads:
                if _divides(lm, m):
                    q = _quotient(m, lm)
                    sg, _ = _mono_mul(q, lm)
                    # m = sg * q * lm, so c*m = c*sg*q*g + lower terms
                    coef = c * sg
                    for gm, gc in g.terms.items():
                        if gm == lm:
                            continue
                        s2, mm = _mono_mul(q, gm)
                        if not s2:
                            continue
                        v = work.get(mm, 0) - coef * s2 * gc
                        if v:
                            work[mm] = v
                        else:
                            work.pop(mm, None)
                    break
            else:
                out[m] = c
        return ZeroModePoly(self, out)

    def _buchberger(self):
        basis = []
        for g in self.ideal_generators():
            g = self._reduce_by(g, basis)
            if g:
                basis.append(self._monic(g))
        queue = []

        def add_tasks(i):
            lm = self.leading(basis[i])[0]
            t = lm[2]
            mu = 0
            while t:
                if t & 1:
                    queue.append(("odd", i, mu))
                t >>= 1
                mu += 1
            for j in range(i):
                queue.append(("pair", j, i))

        for i in range(len(basis)):
            add_tasks(i)
        while queue:
            task = queue.pop(0)
            if task[0] == "odd":
                _, i, mu = task
                th = self.mono(theta=(mu + 1,))
                h = self._times_mono(th, basis[i])
            else:
                _, i, j = task
                h = self._spoly(basis[i], basis[j])
            if not h:
                continue
            h = self._reduce_by(h, basis, gamma_cut=False)
            if h:
                basis.append(self._monic(h))
                add_tasks(len(basis) - 1)
        return self._interreduce(basis)

    def _spoly(self, f, g):
        lf, _ = self.leading(f)
        lg, _ = self.leading(g)
        lcm = (tuple(max(a, b) for a, b in zip(lf[0], lg[0])),
               tuple(max(a, b) for a, b in zip(lf[1], lg[1])), lf[2] | lg[2], max(lf[3], lg[3]))
        out = self.zero()
        for h, lh, sign in ((f, lf, 1), (g, lg, -1)):
            q = _quotient(lcm, lh)
            sg, _ = _mono_mul(q, lh)
            if not sg:
                # the lcm itself vanishes: the multiple of h is a lower-order relation
                return self.zero()
            out = out + self._times_mono(q, h).scale(Fraction(sign, sg))
        return out

    def _interreduce(self, basis):
        basis = list(basis)
        changed = True
        while changed:
            changed = False
            for i, g in enumerate(basis):
                others = basis[:i] + basis[i + 1:]
                lm = self.leading(g)[0]
                if any(_divides(self.leading(o)[0], lm) for o in others):
                    basis.pop(i)
                    changed = True
                    break
        out = []
        for i, g in enumerate(basis):
            others = basis[:i] + basis[i + 1:]
            lm, lc = self.leading(g)
            tail = ZeroModePoly(self, {m: c for m, c in g.terms.items() if m != lm})
            tail = self._reduce_by(tail, others, gamma_cut=False)
            out.append(self._monic(tail + ZeroModePoly(self, {lm: lc})))
        out.sort(key=lambda g: self.key(self.leading(g)[0]))
        return out

    def leading_monomials(self):
        return [self.leading(g)[0] for g in self.groebner]

    def is_standard(self, m):
        return m[3] < 2 and not any(_divides(lm, m) for lm in self.leading_monomials())

    # enumeration ---------------------------------------------------------------
    def monomials(self, x_deg, p_deg, t_deg, gamma=0):
        d = self.d
        out = []
        for xs in _compositions(x_deg, d):
            for ps in _compositions(p_deg, d):
                for ts in combinations(range(1, d + 1), t_deg):
                    out.append(self.mono(xs, ps, ts, gamma))
        return out

    def degree_monomials(self, n, gamma=0):
        out = []
        for a in range(n + 1):
            for b in range(min(n - a, self.d) + 1):
                out.extend(self.monomials(n - a - b, a, b, gamma))
        return out

    def standard_monomials(self, n, gamma=0):
        return [m for m in self.degree_monomials(n, gamma) if self.is_standard(m)]


def _compositions(n, k):
    if k == 0:
        if n == 0:
            yield ()
        return
    for combo in combinations_with_replacement(range(k), n):
        c = [0] * k
        for i in combo:
            c[i] += 1
        yield tuple(c)


class ZeroModePoly:
    """A polynomial in X, Theta, P, Gamma (a representative; see :func:`reduce`)."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: ZeroModeRing, terms=None):
        self.ring = ring
        self.terms = {m: normalize_coeff(c) for m, c in (terms or {}).items() if c}

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, ZeroModePoly):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == self.ring.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def _coerce(self, other):
        if isinstance(other, ZeroModePoly):
            if other.ring != self.ring:
                raise ValueError("zero-mode polynomials over different rings")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        raise TypeError(type(other).__name__)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return ZeroModePoly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        return ZeroModePoly(self.ring, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        out = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                sg, m = _mono_mul(ma, mb)
                if sg:
                    out[m] = out.get(m, 0) + sg * ca * cb
        return ZeroModePoly(self.ring, out)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n):
        out = self.ring.one()
        for _ in range(n):
            out = out * self
        return out

    def parity(self):
        ps = {_popcount(m[2]) % 2 for m in self.terms}
        if len(ps) > 1:
            raise ValueError("zero-mode polynomial of mixed parity")
        return ps.pop() if ps else EVEN

    def gamma_degree(self):
        return max((m[3] for m in self.terms), default=0)

    def theta_free(self):
        return ZeroModePoly(self.ring, {m: c for m, c in self.terms.items() if m[2] == 0})

    def d_x(self, mu):
        out = {}
        for (x, p, t, g), c in self.terms.items():
            e = x[mu - 1]
            if e:
                nx = x[:mu - 1] + (e - 1,) + x[mu:]
                out[(nx, p, t, g)] = out.get((nx, p, t, g), 0) + e * c
        return ZeroModePoly(self.ring, out)

    def d_p(self, mu):
        out = {}
        for (x, p, t, g), c in self.terms.items():
            e = p[mu - 1]
            if e:
                np_ = p[:mu - 1] + (e - 1,) + p[mu:]
                out[(x, np_, t, g)] = out.get((x, np_, t, g), 0) + e * c
        return ZeroModePoly(self.ring, out)

    def d_theta(self, mu):
        """Left derivative by Theta^mu."""
        bit = 1 << (mu - 1)
        out = {}
        for (x, p, t, g), c in self.terms.items():
            if t & bit:
                sg = -1 if _popcount(t & (bit - 1)) & 1 else 1
                key = (x, p, t ^ bit, g)
                out[key] = out.get(key, 0) + sg * c
        return ZeroModePoly(self.ring, out)

    def to_polynomial(self) -> Polynomial:
        R = self.ring.roster
        d = self.ring.d
        total = R.zero()
        for (x, p, t, g), c in self.terms.items():
            term = R.const(c)
            for mu in range(d):
                if x[mu]:
                    term = term * R.var(mu) ** x[mu]
            for mu in range(d):
                if t >> mu & 1:
                    term = term * R.var(d + mu)
            for mu in range(d):
                if p[mu]:
                    term = term * R.var(2 * d + mu) ** p[mu]
            if g:
                term = term * R.var(3 * d) ** g
            total = total + term
        return total

    def __str__(self):
        return str(self.to_polynomial())

    def __repr__(self):
        return f"ZeroModePoly({self})"


def from_polynomial(ring: ZeroModeRing, poly: Polynomial) -> ZeroModePoly:
    """Inverse of ``to_polynomial`` (order-0 generators of the zero-mode roster)."""
    d = ring.d
    total = ring.zero()
    gens = ([ring.X(mu) for mu in range(1, d + 1)] + [ring.Theta(mu) for mu in range(1, d + 1)]
            + [ring.P(mu) for mu in range(1, d + 1)] + [ring.Gamma()])
    for m, c in poly.terms.items():
        term = ring.const(c)
        for i in range(0, len(m), 2):
            code, e = m[i], m[i + 1]
            if code & 0xFFFF:
                raise ValueError("zero-mode expressions carry no derivatives")
            term = term * gens[code >> 16] ** e
        total = total + term
    return total


def parse_zero_mode(ring: ZeroModeRing, text: str) -> ZeroModePoly:
    from .dsl import parse_expr
    return from_polynomial(ring, parse_expr(text, ring.roster))


# ---------------------------------------------------------------------------
# operations

def reduce(u: ZeroModePoly) -> ZeroModePoly:
    """Normal form modulo (P.Theta, eta P P, Gamma^2)."""
    ring = u.ring
    return ring._reduce_by(u, ring.groebner)


def q_apply_free(u: ZeroModePoly) -> ZeroModePoly:
    """Q = eta^{mu mu} P_mu d/dTheta^mu + Theta^mu d/dX^mu on representatives."""
    ring = u.ring
    out = ring.zero()
    for mu in range(1, ring.d + 1):
        out = out + (ring.P(mu) * u.d_theta(mu)).scale(ring.eta[mu - 1])
        out = out + ring.Theta(mu) * u.d_x(mu)
    return out


def q_apply(u: ZeroModePoly) -> ZeroModePoly:
    return reduce(q_apply_free(u))


def r_differential(u: ZeroModePoly) -> ZeroModePoly:
    """The differential of R: u -> Q(u) Gamma, in normal form."""
    return reduce(q_apply_free(u) * u.ring.Gamma())


def zero_bracket(u: ZeroModePoly, v: ZeroModePoly) -> ZeroModePoly:
    """{u,v} = (-1)^pu u_x v_p - (-1)^pu u_p v_x - eta u_theta v_theta, on representatives."""
    ring = u.ring
    pu = u.parity()
    v.parity()
    sg = -1 if pu else 1
    out = ring.zero()
    for mu in range(1, ring.d + 1):
        out = out + (u.d_x(mu) * v.d_p(mu)).scale(sg) - (u.d_p(mu) * v.d_x(mu)).scale(sg)
        out = out - (u.d_theta(mu) * v.d_theta(mu)).scale(ring.eta[mu - 1])
    return out


def euler_shift_inverse(w: ZeroModePoly) -> ZeroModePoly:
    """(E + 1)^{-1} with E the Euler field in P."""
    return ZeroModePoly(w.ring, {m: Fraction(c) / (sum(m[1]) + 1) for m, c in w.terms.items()})


def u_tensor(u: ZeroModePoly):
    """U^{mu nu} = (E+1)^{-1} d^2u/dP_mu dP_nu at Theta = 0."""
    u0 = u.theta_free()
    d = u.ring.d
    return [[euler_shift_inverse(u0.d_p(mu).d_p(nu)) for nu in range(1, d + 1)]
            for mu in range(1, d + 1)]


def at_p_zero(u: ZeroModePoly) -> ZeroModePoly:
    return ZeroModePoly(u.ring, {m: c for m, c in u.terms.items() if not any(m[1])})


def u_tensor_identity(u: ZeroModePoly):
    """Residuals of du/dP_mu(x,0,P) = du/dP_mu(x,0,0) + P_nu U^{mu nu}; all zero if it holds."""
    ring = u.ring
    U = u_tensor(u)
    u0 = u.theta_free()
    res = []
    for mu in range(1, ring.d + 1):
        lhs = u0.d_p(mu)
        rhs = at_p_zero(lhs)
        for nu in range(1, ring.d + 1):
            rhs = rhs + ring.P(nu) * U[mu - 1][nu - 1]
        res.append(lhs - rhs)
    return res


def to_fields(model, u: ZeroModePoly) -> Polynomial:
    """xi^0: X, Theta, P, Gamma -> x, theta, p, gamma."""
    ring = u.ring
    if model.dim != ring.d:
        raise ValueError("zero-mode ring and model have different dimensions")
    R = model.roster
    total = R.zero()
    for (x, p, t, g), c in u.terms.items():
        term = R.const(c)
        for mu in range(ring.d):
            if x[mu]:
                term = term * R.var(f"x{mu + 1}") ** x[mu]
        for mu in range(ring.d):
            if t >> mu & 1:
                term = term * R.var(f"theta{mu + 1}")
        for mu in range(ring.d):
            if p[mu]:
                term = term * R.var(f"p{mu + 1}") ** p[mu]
        if g:
            term = term * R.var("gamma") ** g
        total = total + term
    return total


def ring_for(model) -> ZeroModeRing:
    return _ring_cache(model.dim, tuple(model.metric.entries))


@lru_cache(maxsize=None)
def _ring_cache(d, eta):
    return ZeroModeRing(d, eta)


# ---------------------------------------------------------------------------
# oracle and cohomology

def macaulay_check(ring: ZeroModeRing, max_degree: int = 6):
    """Compare normal forms with linear algebra on each (P-degree, Theta-degree) piece.

    For every bidegree, the ideal piece I_ab is spanned by monomial multiples
    of the generators.  Checks: u - NF(u) lies in I_ab for every monomial u,
    NF(u) is supported on standard monomials, and the number of standard
    monomials equals dim - rank(I_ab).  Returns a list of failure strings.
    """
    failures = []
    gens = ring.ideal_generators()
    gdeg = [(1, 1), (2, 0)]
    for a in range(max_degree + 1):
        for b in range(min(ring.d, max_degree - a) + 1):
            space = ring.monomials(0, a, b)
            ech = Echelon()
            for g, (ga, gb) in zip(gens, gdeg):
                if a < ga or b < gb:
                    continue
                for q in ring.monomials(0, a - ga, b - gb):
                    h = ring._times_mono(q, g)
                    if h:
                        ech.add(_int_terms(h), {})
            rank = ech.rank
            std = [m for m in space if ring.is_standard(m)]
            if len(std) != len(space) - rank:
                failures.append(f"bidegree ({a},{b}): {len(std)} standard monomials, "
                                f"dimension {len(space)} - rank {rank}")
            for m in space:
                nf = reduce(ZeroModePoly(ring, {m: 1}))
                if any(not ring.is_standard(t) for t in nf.terms):
                    failures.append(f"normal form of {m} not standard")
                diff = ZeroModePoly(ring, {m: 1}) - nf
                if diff:
                    vec, _ = ech.reduce(_int_terms(diff), {})
                    if vec:
                        failures.append(f"{m} - NF not in the ideal")
    return failures


def _int_terms(f: ZeroModePoly):
    den = 1
    for c in f.terms.values():
        if isinstance(c, Fraction):
            den = den * c.denominator
    return {m: int(c * den) for m, c in f.terms.items()}


def r_cohomology(ring: ZeroModeRing, cap: int):
    """Dimensions of H^0(R) and H^1(R) per total degree n <= cap.

    Q preserves the total degree in (X, P, Theta), so each degree is a
    finite subcomplex: H^0_n = ker of Q on R_n, H^1_n = Gamma R_n / Q(R_n) Gamma.
    Returns a list of dicts with the ranks and a basis of H^0 representatives.
    """
    rows = []
    for n in range(cap + 1):
        std = ring.standard_monomials(n)
        idx = {m: i for i, m in enumerate(std)}
        ech = Echelon()
        kernel = []
        for j, m in enumerate(std):
            img = q_apply(ZeroModePoly(ring, {m: 1}))
            vec = _int_terms(img)
            for t in vec:
                if t not in idx:
                    raise AssertionError("normal form left the standard basis")
            dep = ech.add(vec, {j: 1})
            if dep is not None:
                kernel.append(ZeroModePoly(ring, {std[k]: c for k, c in dep.items()}))
        rank = ech.rank
        rows.append({"degree": n, "dim": len(std), "rank_Q": rank,
                     "H0": len(std) - rank, "H1": len(std) - rank, "H0_basis": kernel})
    return rows

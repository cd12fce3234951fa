"""Windowed cohomology by exact linear algebra.

The algebra is infinite dimensional, so every computation works on a finite
window of monomials.  Cocycles are taken in an inner window and coboundaries
are searched in an outer window enlarged by a margin; the reported dimension
is an upper bound, and two consecutive margins agreeing is reported as
``stabilized``.

All spaces split into blocks: the action of s is homogeneous for every
integer weight on the generators that it preserves up to a shift, and these
weights are found automatically as the null space of a small linear system.
Only the blocks that can meet a given input are ever enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd

from .calculus import (CheckReport, antibracket_density, euler_derivatives,
                       is_total_derivative, prolong_apply)
from .linalg import Span, int_scale, kernel
from .models import (ModelSpec, matter_cocycle, named_cocycle, transgress)
from .superpoly import (ODD, ORDER_MASK, SHIFT, Polynomial, mono_derivatives,
                        serialize)

VARIANTS = ("A", "A_localized", "A_mod_I", "F", "F_mod_I")
DEFAULT_MARGIN = 2


# ---------------------------------------------------------------------------
# windows

@dataclass(frozen=True)
class Window:
    """Caps for a finite monomial basis.

    Poly degree counts every factor except undifferentiated coordinates x,
    which are capped separately; negative powers of an invertible generator
    count toward the inverse depth only.  Derivative order is the total
    number of derivatives in a monomial.
    """

    max_poly_degree: int
    max_derivative_order: int
    max_x_degree: int = 0
    max_gamma_inverse_depth: int = 0

    def __post_init__(self):
        for v in (self.max_poly_degree, self.max_derivative_order,
                  self.max_x_degree, self.max_gamma_inverse_depth):
            if v < 0:
                raise ValueError("window caps must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "Window":
        parts = [p.strip() for p in text.split(",")]
        if not 2 <= len(parts) <= 4:
            raise ValueError(f"window needs 2 to 4 comma-separated caps, got {text!r}")
        vals = []
        for p in parts:
            if p in ("-", "", "–"):
                vals.append(0)
            else:
                vals.append(int(p))
        return cls(*vals)

    def text(self):
        return (f"({self.max_poly_degree},{self.max_derivative_order},"
                f"{self.max_x_degree},{self.max_gamma_inverse_depth})")

    def enlarge(self, m: int, localized: bool = False) -> "Window":
        return Window(self.max_poly_degree + m, self.max_derivative_order + m,
                      self.max_x_degree + m if self.max_x_degree or m else 0,
                      self.max_gamma_inverse_depth + m if localized else 0)

    def join(self, other: "Window") -> "Window":
        return Window(max(self.max_poly_degree, other.max_poly_degree),
                      max(self.max_derivative_order, other.max_derivative_order),
                      max(self.max_x_degree, other.max_x_degree),
                      max(self.max_gamma_inverse_depth, other.max_gamma_inverse_depth))


def _is_coordinate(sym):
    n = sym.name
    return sym.ghost == 0 and sym.parity == 0 and n.startswith("x") and n[1:].isdigit()


def monomial_caps(roster, m):
    """(poly degree, derivative order, x degree, inverse depth) of a monomial."""
    deg = xdeg = depth = 0
    for i in range(0, len(m), 2):
        code, e = m[i], m[i + 1]
        sym = roster.symbols[code >> SHIFT]
        if e < 0:
            depth += -e
        elif not (code & ORDER_MASK) and _is_coordinate(sym):
            xdeg += e
        else:
            deg += e
    return deg, mono_derivatives(m), xdeg, depth


def hull(a: Polynomial) -> Window:
    """Smallest window containing every monomial of ``a``."""
    caps = [0, 0, 0, 0]
    for m in a.terms:
        for i, v in enumerate(monomial_caps(a.roster, m)):
            caps[i] = max(caps[i], v)
    return Window(*caps)


def in_window(roster, m, w: Window) -> bool:
    d, l, x, g = monomial_caps(roster, m)
    return (d <= w.max_poly_degree and l <= w.max_derivative_order
            and x <= w.max_x_degree and g <= w.max_gamma_inverse_depth)


# ---------------------------------------------------------------------------
# gradings

def _nullspace(rows, n):
    from sympy import Matrix
    if not rows:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    basis = Matrix(rows).nullspace()
    out = []
    for v in basis:
        den = 1
        for x in v:
            q = Fraction(x).denominator
            den = den * q // gcd(den, q)
        out.append([int(Fraction(x) * den) for x in v])
    return out


@dataclass(frozen=True)
class Gradings:
    """Integer weights w on generators (plus w_d per derivative) with
    weight(s m) = weight(m) + s_shift for every monomial term."""

    weights: tuple     # per grading: tuple over symbol ids
    dweights: tuple    # per grading: weight of one derivative
    s_shift: tuple

    @property
    def d_shift(self):
        return self.dweights


@lru_cache(maxsize=None)
def gradings_for(model: ModelSpec) -> Gradings:
    roster = model.roster
    n = len(roster.symbols)
    s = model.differential()
    rows = []
    for sym in roster.symbols:
        img = s.char(sym.id)
        for m in img.terms:
            row = [0] * (n + 2)
            for i in range(0, len(m), 2):
                code, e = m[i], m[i + 1]
                row[code >> SHIFT] += e
                row[n] += e * (code & ORDER_MASK)
            row[sym.id] -= 1
            row[n + 1] = -1
            rows.append(row)
    basis = _nullspace(rows, n + 2)
    return Gradings(tuple(tuple(v[:n]) for v in basis),
                    tuple(v[n] for v in basis),
                    tuple(v[n + 1] for v in basis))


def _vadd(a, b, sign=1):
    return tuple(x + sign * y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# spaces

@dataclass(frozen=True)
class SpaceSpec:
    variant: str
    model: ModelSpec

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {', '.join(VARIANTS)}")


class Space:
    """A SpaceSpec bound to its differential, gradings and caches."""

    def __init__(self, spec: SpaceSpec, localized: bool | None = None):
        self.spec = spec
        model = spec.model
        self.model = model
        self.roster = model.roster
        self.s = model.differential()
        self.mod_I = spec.variant.endswith("mod_I")
        self.functional = spec.variant.startswith("F")
        self.localized = spec.variant == "A_localized" if localized is None else localized
        self.invertible = [s.id for s in self.roster.symbols if s.invertible]
        if self.localized and not self.invertible:
            raise ValueError("localization requested but the model has no invertible generator")
        self.allowed = [s for s in self.roster.symbols if not (self.mod_I and s.ghost > 0)]
        self.allowed_ids = {s.id for s in self.allowed}
        self.grad = gradings_for(model)
        self._code_w = {}
        self._s_cache = {}
        self._d_cache = {}
        self._groups = {}
        self._bounds = {}
        self._reach = {}
        self._blocks = {}
        self._block_cache = {}

    # weights ---------------------------------------------------------------
    def code_weight(self, code):
        w = self._code_w.get(code)
        if w is None:
            sid, o = code >> SHIFT, code & ORDER_MASK
            g = self.grad
            w = (self.roster.symbols[sid].ghost,) + tuple(
                g.weights[j][sid] + o * g.dweights[j] for j in range(len(g.weights)))
            self._code_w[code] = w
        return w

    def key(self, m):
        acc = [0] * (len(self.grad.weights) + 1)
        for i in range(0, len(m), 2):
            w = self.code_weight(m[i])
            e = m[i + 1]
            for j, x in enumerate(w):
                acc[j] += e * x
        return tuple(acc)

    @property
    def s_shift(self):
        return (1,) + self.grad.s_shift

    @property
    def d_shift(self):
        return (0,) + self.grad.d_shift

    # maps --------------------------------------------------------------------
    def _project(self, terms):
        if not self.mod_I:
            return terms
        ok = self.allowed_ids
        return {m: c for m, c in terms.items()
                if all((m[i] >> SHIFT) in ok for i in range(0, len(m), 2))}

    def s_image(self, m):
        img = self._s_cache.get(m)
        if img is None:
            img = self._project(prolong_apply(self.s, Polynomial(self.roster, {m: 1})).terms)
            self._s_cache[m] = img
        return img

    def d_image(self, m):
        img = self._d_cache.get(m)
        if img is None:
            img = self._project(Polynomial(self.roster, {m: 1}).dt().terms)
            self._d_cache[m] = img
        return img

    def apply_s(self, a: Polynomial) -> Polynomial:
        out = {}
        for m, c in a.terms.items():
            for n, v in self.s_image(m).items():
                out[n] = out.get(n, 0) + c * v
        return Polynomial(self.roster, out)

    def project(self, a: Polynomial) -> Polynomial:
        return Polynomial(self.roster, self._project(a.terms))

    # enumeration ---------------------------------------------------------------
    def basis(self, ghost, window: Window, block=None):
        """Monomials of the given ghost number inside the window (optionally
        restricted to one block), in canonical order."""
        if window.max_gamma_inverse_depth and not self.localized:
            window = Window(window.max_poly_degree, window.max_derivative_order,
                            window.max_x_degree, 0)
        if block is None:
            return _enumerate(self, ghost, window, None)
        if block[0] != ghost:
            return []
        ck = (ghost, window, tuple(block))
        out = self._block_cache.get(ck)
        if out is None:
            full = self._blocks.get((ghost, window))
            if full is not None:
                out = full.get(tuple(block), [])
            else:
                out = _enumerate(self, ghost, window, tuple(block))
            self._block_cache[ck] = out
        return out

    def blocks(self, ghost, window: Window):
        """Basis of one ghost number grouped by weight key (cached)."""
        if window.max_gamma_inverse_depth and not self.localized:
            window = Window(window.max_poly_degree, window.max_derivative_order,
                            window.max_x_degree, 0)
        ck = (ghost, window)
        out = self._blocks.get(ck)
        if out is None:
            out = {}
            for m in _enumerate(self, ghost, window, None):
                out.setdefault(self.key(m), []).append(m)
            self._blocks[ck] = out
        return out


def enumerate_basis(space, ghost: int, window: Window):
    """Ordered monomial basis of ``space`` at ghost number ``ghost``."""
    if isinstance(space, SpaceSpec):
        space = Space(space)
    if window.max_gamma_inverse_depth and not space.invertible:
        raise ValueError("localization requested but the model has no invertible generator")
    if window.max_gamma_inverse_depth and not space.localized:
        space = Space(space.spec, localized=True)
    return space.basis(ghost, window)


def _groups(space: Space, L: int, localized: bool):
    """Factor groups: each is (symbol id, kind, odd, low order, weight vector).

    kind "x0" is an undifferentiated coordinate (x budget), "neg" a negative
    power of an invertible generator (inverse-depth budget), "deg" anything
    else (poly-degree budget).  ``low`` is the lowest order the group may use.
    """
    key = (L, localized)
    cached = space._groups.get(key)
    if cached is not None:
        return cached
    out = []
    for sym in space.allowed:
        w = space.code_weight(sym.id << SHIFT)
        odd = sym.parity == ODD
        if _is_coordinate(sym):
            out.append((sym.id, "x0", odd, 0, w))
            if L:
                out.append((sym.id, "deg", odd, 1, w))
        elif sym.invertible and localized:
            out.append((sym.id, "neg", odd, 0, tuple(-x for x in w)))
            out.append((sym.id, "deg", odd, 0, w))
        else:
            out.append((sym.id, "deg", odd, 0, w))
    space._groups[key] = out
    return out


def _order_tuples(n, total, odd, low, high):
    """Non-decreasing (strictly increasing if odd) order tuples of length n in
    [low, high] summing to ``total``."""
    if n == 0:
        if total == 0:
            yield ()
        return
    step = 1 if odd else 0
    # minimal sum of the remaining n - 1 entries above a first entry o
    for o in range(low, high + 1):
        rest_min = (n - 1) * (o + step) + step * (n - 1) * (n - 2) // 2
        if o + rest_min > total:
            break
        if o + (n - 1) * high < total:
            continue
        for tail in _order_tuples(n - 1, total - o, odd, o + step, high):
            yield (o,) + tail


def _min_orders(n, odd, low):
    return n * low + (n * (n - 1) // 2 if odd else 0)


def _max_orders(n, odd, high):
    return n * high - (n * (n - 1) // 2 if odd else 0)


def _enumerate(space: Space, ghost, window: Window, block):
    """Monomials with the given weight key (or only ghost number).

    First the factor counts per group and the total derivative count are
    solved against the weights, then derivatives are distributed.
    """
    L = window.max_derivative_order
    localized = bool(window.max_gamma_inverse_depth)
    groups = _groups(space, L, localized)
    if block is None:
        target = (ghost,)
    else:
        target = tuple(block)
        if target[0] != ghost:
            return []
    dims = len(target)
    wd = space.d_shift[:dims]
    ng = len(groups)
    memo = space._reach.setdefault((L, localized, dims), {})

    def limit(i, dl, xl, gl):
        sid, kind, odd, low, w = groups[i]
        top = {"x0": xl, "neg": gl}.get(kind, dl)
        if odd:
            top = min(top, L + 1 - low)
        return top

    def spend(kind, n, dl, xl, gl):
        if kind == "x0":
            return dl, xl - n, gl
        if kind == "neg":
            return dl, xl, gl - n
        return dl - n, xl, gl

    bounds = space._bounds.get((L, localized, dims))
    if bounds is None:
        # suffix min/max of the per-unit weight, per budget type
        bounds = [None] * (ng + 1)
        zero = {t: ((0,) * dims, (0,) * dims) for t in ("deg", "x0", "neg")}
        bounds[ng] = zero
        for i in range(ng - 1, -1, -1):
            kind, w = groups[i][1], groups[i][4][:dims]
            cur = dict(bounds[i + 1])
            lo, hi = cur[kind]
            cur[kind] = (tuple(min(a, b) for a, b in zip(lo, w)),
                         tuple(max(a, b) for a, b in zip(hi, w)))
            bounds[i] = cur
        space._bounds[(L, localized, dims)] = bounds

    def possible(i, dl, xl, gl, r):
        b = bounds[i]
        (dlo, dhi), (xlo, xhi), (nlo, nhi) = b["deg"], b["x0"], b["neg"]
        for j in range(dims):
            x = r[j]
            if x < dl * dlo[j] + xl * xlo[j] + gl * nlo[j]:
                return False
            if x > dl * dhi[j] + xl * xhi[j] + gl * nhi[j]:
                return False
        return True

    def reach(i, dl, xl, gl, r):
        key = (i, dl, xl, gl, r)
        v = memo.get(key)
        if v is None:
            if not possible(i, dl, xl, gl, r):
                v = False
            elif i == ng:
                v = not any(r)
            else:
                w = groups[i][4]
                kind = groups[i][1]
                v = False
                for n in range(limit(i, dl, xl, gl) + 1):
                    if reach(i + 1, *spend(kind, n, dl, xl, gl),
                             tuple(x - n * w[j] for j, x in enumerate(r))):
                        v = True
                        break
            memo[key] = v
        return v

    out = []

    def distribute(nvec, D):
        neg = {groups[i][0] for i, n in enumerate(nvec) if n and groups[i][1] == "neg"}
        parts = []
        for i, n in enumerate(nvec):
            if not n:
                continue
            sid, kind, odd, low, _ = groups[i]
            if kind in ("x0", "neg"):
                code = sid << SHIFT
                parts.append((None, [((code, n if kind == "x0" else -n),)], 0, 0))
                continue
            if sid in neg:
                low = max(low, 1)
            parts.append(((sid, n, odd, low), None, _min_orders(n, odd, low),
                          _max_orders(n, odd, L)))
        mins = [p[2] for p in parts]
        maxs = [p[3] for p in parts]
        if sum(mins) > D or sum(maxs) < D:
            return
        suffix_min = [0] * (len(parts) + 1)
        suffix_max = [0] * (len(parts) + 1)
        for j in range(len(parts) - 1, -1, -1):
            suffix_min[j] = suffix_min[j + 1] + mins[j]
            suffix_max[j] = suffix_max[j + 1] + maxs[j]
        chosen = []

        def split(j, left):
            if j == len(parts):
                build(chosen)
                return
            spec, fixed, mn, mx = parts[j]
            if fixed is not None:
                chosen.append(fixed)
                split(j + 1, left)
                chosen.pop()
                return
            sid, n, odd, low = spec
            for t in range(max(mn, left - suffix_max[j + 1]), min(mx, left - suffix_min[j + 1]) + 1):
                opts = []
                for orders in _order_tuples(n, t, odd, low, L):
                    f = {}
                    for o in orders:
                        c = (sid << SHIFT) | o
                        f[c] = f.get(c, 0) + 1
                    opts.append(tuple(sorted(f.items())))
                if opts:
                    chosen.append(opts)
                    split(j + 1, left - t)
                    chosen.pop()

        def build(choice):
            for combo in product(*choice):
                factors = sorted(f for part in combo for f in part)
                out.append(tuple(x for f in factors for x in f))

        split(0, D)

    def counts(i, dl, xl, gl, r, acc, D):
        if i == ng:
            distribute(acc, D)
            return
        w = groups[i][4]
        kind = groups[i][1]
        for n in range(limit(i, dl, xl, gl) + 1):
            r2 = tuple(x - n * w[j] for j, x in enumerate(r))
            nxt = spend(kind, n, dl, xl, gl)
            if reach(i + 1, *nxt, r2):
                acc.append(n)
                counts(i + 1, *nxt, r2, acc, D)
                acc.pop()

    start = (window.max_poly_degree, window.max_x_degree, window.max_gamma_inverse_depth)
    for D in range(L + 1):
        r0 = tuple(t - D * wd[j] for j, t in enumerate(target))
        if reach(0, *start, r0):
            counts(0, *start, r0, [], D)
    out.sort()
    return out


# ---------------------------------------------------------------------------
# reports

@dataclass
class CohomologyReport:
    space: str
    model: str
    ghost: int
    window: Window
    margin: int
    dim_cocycles: int
    dim_coboundaries_found: int
    dim_H_upper: int
    stabilized: bool
    margins: dict
    basis: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def text(self) -> str:
        lines = [f"space: {self.space}",
                 f"model: {self.model}",
                 f"ghost degree: {self.ghost}",
                 f"window: {self.window.text()}",
                 f"margin: {self.margin}",
                 f"dim_cocycles: {self.dim_cocycles}",
                 f"dim_coboundaries_found: {self.dim_coboundaries_found}",
                 f"dim_H_upper: {self.dim_H_upper}",
                 "stabilized: " + ("yes" if self.stabilized else "no")
                 + " (" + ", ".join(f"margin {m}: {v}" for m, v in sorted(self.margins.items())) + ")"]
        for i, b in enumerate(self.basis):
            lines.append(f"representative {i + 1}: {serialize(b)}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)

    __str__ = text


def _combine(elems, combo):
    out = {}
    for j, c in combo.items():
        e = elems[j]
        out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c}


# ---------------------------------------------------------------------------
# generic windowed complex

class _AComplex:
    """(A, s), (A_gamma, s) or (A/I, s) as a block-graded complex."""

    def __init__(self, space: Space):
        self.space = space
        self.shift = space.s_shift

    def elements(self, k, window, block=None):
        return self.space.basis(k, window, block)

    def key(self, e):
        return self.space.key(e)

    def apply(self, e):
        return self.space.s_image(e)

    def to_poly(self, vec):
        return Polynomial(self.space.roster, vec)


class _VComplex:
    """V^k = A^k + A~^{k+1} eps with D(f + g eps) = s f + (-1)^{p g} d g + (s g) eps."""

    def __init__(self, space: Space):
        self.space = space
        self.shift = space.s_shift
        self.offset = _vadd(space.d_shift, space.s_shift, -1)

    def elements(self, k, window, block=None):
        sp = self.space
        first = [(0, m) for m in sp.basis(k, window, block)]
        gblock = None if block is None else _vadd(block, self.offset, -1)
        second = [(1, m) for m in sp.basis(k + 1, window, gblock) if m != ()]
        return first + second

    def key(self, e):
        tag, m = e
        k = self.space.key(m)
        if tag:
            k = _vadd(k, self.offset)   # ghost component drops by one
        return k

    def apply(self, e):
        tag, m = e
        sp = self.space
        out = {}
        if tag == 0:
            for n, c in sp.s_image(m).items():
                out[(0, n)] = c
            return out
        sign = -1 if sp.roster.mono_parity(m) else 1
        for n, c in sp.d_image(m).items():
            out[(0, n)] = out.get((0, n), 0) + sign * c
        for n, c in sp.s_image(m).items():
            if n != ():
                out[(1, n)] = out.get((1, n), 0) + c
        return out

    def to_poly(self, vec):
        return Polynomial(self.space.roster, {m: c for (t, m), c in vec.items() if t == 0})


def _pre_block(cx, key):
    shifted = _vadd(key, cx.shift, -1)
    return shifted


def _complex_cohomology(cx, k, window, margins, check_images=True):
    sp = cx.space
    inner = {}
    for e in cx.elements(k, window):
        inner.setdefault(cx.key(e), []).append(e)
    dimZ = 0
    H = {m: 0 for m in margins}
    reps = []
    outer_w = {m: window.enlarge(m, sp.localized) for m in margins}
    for key in sorted(inner):
        elems = inner[key]
        images = [cx.apply(e) for e in elems]
        if check_images:
            big = outer_w[margins[0]]
            for e, img in zip(elems, images):
                for n in img:
                    if not in_window(sp.roster, n, big):
                        raise ValueError(f"image term {sp.roster.format_monomial(n)} of a basis "
                                         f"element leaves the outer window {big.text()}")
        Z = [_combine(elems, c) for c in kernel(images)]
        if not Z:
            continue
        dimZ += len(Z)
        pre_key = _pre_block(cx, key)
        for mi, m in enumerate(margins):
            span = Span()
            for e in cx.elements(k - 1, outer_w[m], pre_key):
                span.add(cx.apply(e))
            found = []
            for z in Z:
                if span.add(z):
                    found.append(z)
            H[m] += len(found)
            if mi == 0:
                reps.extend(cx.to_poly(z) for z in found)
    return dimZ, H, reps


def _functional_cohomology(space: Space, k, window, margins):
    """Variant F: closed means s f in dA (Euler test), exact means f in s(outer) + d(outer)."""
    R = space.roster
    inner = space.blocks(k, window)
    dimZ = 0
    H = {m: 0 for m in margins}
    reps = []
    outer_w = {m: window.enlarge(m, space.localized) for m in margins}
    for key in sorted(inner):
        elems = inner[key]
        images = []
        for m in elems:
            sm = Polynomial(R, space.s_image(m))
            vec = {}
            const = sm.constant_term()
            if const:
                vec[("const",)] = const
            for sid, v in euler_derivatives(sm).items():
                for n, c in v.terms.items():
                    vec[(sid, n)] = c
            images.append(vec)
        Z = [_combine(elems, c) for c in kernel(images)]
        if not Z:
            continue
        dimZ += len(Z)
        s_key = _vadd(key, space.s_shift, -1)
        d_key = _vadd(key, space.d_shift, -1)
        for mi, mg in enumerate(margins):
            span = Span()
            for e in space.basis(k - 1, outer_w[mg], s_key):
                span.add(space.s_image(e))
            for e in space.basis(k, outer_w[mg], d_key):
                span.add(space.d_image(e))
            found = [z for z in Z if span.add(z)]
            H[mg] += len(found)
            if mi == 0:
                reps.extend(Polynomial(R, z) for z in found)
    return dimZ, H, reps


def cohomology_window(space, k: int, window: Window, margin: int = DEFAULT_MARGIN) -> CohomologyReport:
    """Windowed H^k of the given space, computed at margins m and m + 1."""
    if isinstance(space, SpaceSpec):
        space = Space(space)
    margins = [margin, margin + 1]
    if space.functional:
        dimZ, H, reps = _functional_cohomology(space, k, window, margins)
    else:
        dimZ, H, reps = _complex_cohomology(_AComplex(space), k, window, margins)
    h = H[margin]
    rep = CohomologyReport(space.spec.variant, space.model.name, k, window, margin, dimZ,
                           dimZ - h, h, H[margin] == H[margin + 1], H, reps)
    return rep


def v_cohomology(space, k: int, window: Window, margin: int = DEFAULT_MARGIN):
    """Windowed H^k of the V complex; returns (dim cocycles, {margin: dim H})."""
    if isinstance(space, SpaceSpec):
        space = Space(space)
    base = Space(SpaceSpec("A_mod_I" if space.mod_I else "A", space.model))
    dimZ, H, _ = _complex_cohomology(_VComplex(base), k, window, [margin, margin + 1],
                                     check_images=False)
    return dimZ, H


# ---------------------------------------------------------------------------
# exactness tests

@dataclass
class CoboundaryResult:
    found: bool
    witness: Polynomial | None
    margins: dict
    stabilized: bool

    def __bool__(self):
        return self.found

    def text(self):
        if self.found:
            return f"coboundary: yes\nwitness: {serialize(self.witness)}"
        tried = ", ".join(f"margin {m}" for m in sorted(self.margins))
        return ("coboundary: not found in window ("
                + tried + (", stable" if self.stabilized else ", not stable") + ")")


def _space_for(a: Polynomial, model: ModelSpec, variant="A"):
    return Space(SpaceSpec(variant, model), localized=a.is_localized())


def _decompose(space: Space, a: Polynomial, window: Window, margin: int, use_d: bool):
    """Find g, h with a = s g + d h (h only if use_d) over window + margin."""
    R = space.roster
    outer = window.enlarge(margin, space.localized)
    parts = {}
    for m, c in a.terms.items():
        parts.setdefault(space.key(m), {})[m] = c
    g, h = {}, {}
    for key, vec in parts.items():
        ghost = key[0]
        span = Span()
        for e in space.basis(ghost - 1, outer, _vadd(key, space.s_shift, -1)):
            span.add(space.s_image(e), ("s", e))
        if use_d:
            for e in space.basis(ghost, outer, _vadd(key, space.d_shift, -1)):
                span.add(space.d_image(e), ("d", e))
        sol = span.solve(vec)
        if sol is None:
            return None
        for (tag, e), x in sol.items():
            tgt = g if tag == "s" else h
            tgt[e] = tgt.get(e, 0) + x
    return Polynomial(R, g), Polynomial(R, h)


def _exact_span(space: Space, keys, window: Window, margin: int, use_d=True):
    outer = window.enlarge(margin, space.localized)
    span = Span()
    for key in sorted(set(keys)):
        ghost = key[0]
        for e in space.basis(ghost - 1, outer, _vadd(key, space.s_shift, -1)):
            span.add(space.s_image(e))
        if use_d:
            for e in space.basis(ghost, outer, _vadd(key, space.d_shift, -1)):
                span.add(space.d_image(e))
    return span


def relative_rank(model: ModelSpec, polys, window: Window | None = None,
                  margin: int = DEFAULT_MARGIN, functional: bool = True, variant: str = "A"):
    """Rank of ``polys`` modulo s(outer) (+ d(outer) if functional)."""
    polys = [p for p in polys if p]
    if not polys:
        return 0
    loc = any(p.is_localized() for p in polys)
    space = Space(SpaceSpec(variant, model), localized=loc)
    w = window
    for p in polys:
        w = hull(p).join(w) if w else hull(p)
    keys = [space.key(m) for p in polys for m in p.terms]
    span = _exact_span(space, keys, w, margin, functional)
    return sum(1 for p in polys if span.add(space.project(p).terms))


def spans_agree(model: ModelSpec, reps, generators, window: Window, margin: int = DEFAULT_MARGIN,
                functional: bool = False, variant: str = "A"):
    """True iff span(reps) = span(generators) modulo exact terms in the outer window."""
    space = Space(SpaceSpec(variant, model))
    w = window
    for p in list(reps) + list(generators):
        if p:
            w = hull(p).join(w)
    keys = [space.key(m) for p in list(reps) + list(generators) for m in p.terms]
    base = _exact_span(space, keys, w, margin, functional)
    r0 = base.rank
    for g in generators:
        base.add(space.project(g).terms)
    rg = base.rank - r0
    for r in reps:
        if base.add(space.project(r).terms):
            return False
    return rg == relative_rank(model, reps, window, margin, functional, variant)


def is_coboundary(model: ModelSpec, a: Polynomial, window: Window | None = None,
                  margin: int = DEFAULT_MARGIN, space: Space | None = None) -> CoboundaryResult:
    """Solve s(g) = a in the outer window; report stability over two margins."""
    space = space or _space_for(a, model)
    if space.apply_s(a):
        raise ValueError("input is not closed: s(a) = " + serialize(space.apply_s(a)))
    window = hull(a).join(window) if window else hull(a)
    res = {}
    for m in (margin, margin + 1):
        sol = _decompose(space, a, window, m, use_d=False)
        if sol is not None:
            return CoboundaryResult(True, sol[0], {m: True}, True)
        res[m] = False
    return CoboundaryResult(False, None, res, True)


@dataclass
class FunctionalTest:
    closed: bool
    exact: bool | None
    stabilized: bool
    witness: tuple | None = None

    def text(self):
        lines = [f"closed: {'yes' if self.closed else 'no'}"]
        if self.exact is not None:
            lines.append(f"exact: {'yes' if self.exact else 'not found in window'}"
                         + ("" if self.exact else (" (stable)" if self.stabilized else " (not stable)")))
        if self.witness:
            g, h = self.witness
            lines.append(f"witness s-part: {serialize(g)}")
            lines.append(f"witness d-part: {serialize(h)}")
        return "\n".join(lines)


def functional_closed(model: ModelSpec, a: Polynomial) -> bool:
    return is_total_derivative(prolong_apply(model.differential(), a))


def functional_class_test(model: ModelSpec, a: Polynomial, window: Window | None = None,
                          margin: int = DEFAULT_MARGIN) -> FunctionalTest:
    """closed iff s(a) is a total derivative; exact iff a = s(g) + d(h) in the outer window."""
    closed = functional_closed(model, a)
    space = _space_for(a, model)
    window = hull(a).join(window) if window else hull(a)
    for m in (margin, margin + 1):
        sol = _decompose(space, a, window, m, use_d=True)
        if sol is not None:
            return FunctionalTest(closed, True, True, sol)
    return FunctionalTest(closed, False, True)


def bracket_identity_check(model: ModelSpec, lhs, rhs: Polynomial, window: Window | None = None,
                           margin: int = DEFAULT_MARGIN, name: str = "bracket") -> CheckReport:
    """Passed iff {a, b} - rhs lies in s(outer) + d(outer)."""
    a, b = lhs
    R = model.roster
    rhs = rhs if isinstance(rhs, Polynomial) else R.const(rhs)
    for label, x in (("left entry", a), ("right entry", b), ("right-hand side", rhs)):
        if x and not functional_closed(model, x):
            raise ValueError(f"{label} is not closed as a functional class")
    br = antibracket_density(a, b)
    diff = br - rhs
    if not diff:
        return CheckReport(name, True, diff, detail={"bracket": br},
                           notes=["bracket density equals the right-hand side exactly"])
    space = _space_for(diff, model)
    window = hull(diff).join(window) if window else hull(diff)
    sol = _decompose(space, diff, window, margin, use_d=True)
    if sol is None:
        sol = _decompose(space, diff, window, margin + 1, use_d=True)
    if sol is None:
        return CheckReport(name, False, diff, detail={"bracket": br},
                           notes=[f"difference not in s(outer) + d(outer) for margins "
                                  f"{margin}, {margin + 1}"])
    g, h = sol
    return CheckReport(name, True, R.zero(), witness=g,
                       detail={"bracket": br, "difference": diff, "d-part": h},
                       notes=["difference = s(witness) + d(d-part)"])


# ---------------------------------------------------------------------------
# Felder-Kazhdan probe

@dataclass
class FKRow:
    k: int
    quotient: CohomologyReport          # H^{-k}(A/(dA + I))
    local: CohomologyReport             # H^{-k}(A/I)
    witnesses: list                     # (label, FunctionalTest)

    @property
    def functional_nonzero(self):
        return any(t.closed and t.exact is False for _, t in self.witnesses)


@dataclass
class FKReport:
    model: str
    rows: list

    def text(self):
        lines = [f"model: {self.model}"]
        for r in self.rows:
            q, l = r.quotient, r.local
            lines.append(f"k = {r.k}: H^-{r.k}(A/(dA+I)) <= {q.dim_H_upper}"
                         f" ({'stable' if q.stabilized else 'not stable'});"
                         f" H^-{r.k}(A/I) <= {l.dim_H_upper}"
                         f" ({'stable' if l.stabilized else 'not stable'})")
            for b in q.basis:
                lines.append(f"  class in A/(dA+I): {serialize(b)}")
            for label, t in r.witnesses:
                verdict = "nonzero class" if (t.closed and t.exact is False) else "no class"
                lines.append(f"  witness {label}: closed={t.closed} exact={t.exact} -> {verdict}")
            if r.witnesses:
                lines.append(f"  H^-{r.k}(F) " + ("nonzero" if r.functional_nonzero else "no witness"))
        return "\n".join(lines)


def fk_witnesses(model: ModelSpec, k: int):
    if model.kind != "sugra":
        return []
    if model.dim == 0:
        return [(f"alpha_{k}", named_cocycle(model, "alpha", k)),
                (f"beta_{k}", named_cocycle(model, "beta", k))]
    return [(f"alpha_{k}(1)", matter_cocycle(model, "alpha", k, 1))]


def default_window(model: ModelSpec, k: int) -> Window:
    return Window(k + 3, 1, 1 if model.dim else 0, 0)


def fk_probe(model: ModelSpec, k_range=(1, 2, 3), window: Window | None = None,
             margin: int = DEFAULT_MARGIN) -> FKReport:
    rows = []
    for k in k_range:
        w = window or default_window(model, k)
        q = cohomology_window(SpaceSpec("F_mod_I", model), -k, w, margin)
        loc = cohomology_window(SpaceSpec("A_mod_I", model), -k, w, margin)
        wit = [(label, functional_class_test(model, a, w, margin)) for label, a in fk_witnesses(model, k)]
        rows.append(FKRow(k, q, loc, wit))
    return FKReport(model.name, rows)


# ---------------------------------------------------------------------------
# filtration

FILTRATION_TABLE = {
    # symbol: (constant, sigma coefficient) for the field; antifield below
    "x": (0, 0), "theta": (0, 1), "p": (0, 2),
    "e": (2, -2), "psi": (2, -1), "c": (2, -2), "gamma": (2, -1),
}


def filtration_degree(model: ModelSpec, name: str):
    """Filtration degree of a generator as (constant, sigma coefficient).

    Antifields: x+ 2s, theta+ s, p+ 0, e+ 4s-1, psi+ 3s-1, c+ 4s-1, gamma+ 3s-1.
    """
    anti = name.startswith("anti(")
    base = name[5:-1] if anti else name
    stem = base.rstrip("0123456789") if base[:1] in "xtp" else base
    if stem not in FILTRATION_TABLE:
        raise ValueError(f"no filtration degree for {name}")
    c, s = FILTRATION_TABLE[stem]
    if not anti:
        return (c, s)
    if stem in ("x", "theta", "p"):
        return (0, 2 - s)
    return (c - 3, 2 - s)


def filtration_check(model: ModelSpec, sigma) -> CheckReport:
    if model.kind != "sugra":
        raise ValueError("filtration check needs a supergravity model")
    sigma = Fraction(sigma)
    R = model.roster
    s = model.differential()
    deg = {sym.id: filtration_degree(model, sym.name) for sym in R.symbols}
    bad = {}
    offending = {}
    drops = set()
    negative = []
    for sym in R.symbols:
        c0, s0 = deg[sym.id]
        if c0 + s0 * sigma < 0:
            negative.append(sym.name)
        for m in s.char(sym.id).terms:
            c1 = s1 = 0
            for i in range(0, len(m), 2):
                dc, ds = deg[m[i] >> SHIFT]
                c1 += dc * m[i + 1]
                s1 += ds * m[i + 1]
            drop = (c1 - c0, s1 - s0)
            drops.add(drop)
            val = drop[0] + drop[1] * sigma
            if drop[1] != 0 or not 0 <= val <= 2:
                bad[f"s({sym.name}) term {R.format_monomial(m)}"] = f"shift {drop[0]} + {drop[1]} sigma"
                offending[m] = 1
    passed = not bad
    notes = [f"sigma = {sigma}",
             "term degree shifts: " + ", ".join(sorted(str(d[0]) for d in drops if d[1] == 0))]
    if negative:
        notes.append("generators with negative degree: " + ", ".join(negative))
    else:
        notes.append("all generator degrees are non-negative")
    # residual: the offending monomials of s, each with coefficient 1
    return CheckReport(f"filtration sigma={sigma}", passed, Polynomial(R, offending),
                       detail=bad, notes=notes)


def generator_degrees(model: ModelSpec, sigma):
    sigma = Fraction(sigma)
    return {sym.name: (lambda c: c[0] + c[1] * sigma)(filtration_degree(model, sym.name))
            for sym in model.roster.symbols}


# ---------------------------------------------------------------------------
# V complex

def v_complex_check(model: ModelSpec, k: int, window: Window, margin: int = DEFAULT_MARGIN) -> CheckReport:
    """D^2 = 0 on the windowed basis of V^k and windowed H(V) agrees with variant F."""
    space = Space(SpaceSpec("A", model))
    cx = _VComplex(space)
    failures = {}
    residual = {}
    for e in cx.elements(k, window):
        first = cx.apply(e)
        acc = {}
        for f, c in first.items():
            for n, v in cx.apply(f).items():
                acc[n] = acc.get(n, 0) + c * v
        acc = {n: c for n, c in acc.items() if c}
        if acc:
            failures[str(e)] = acc
            for (_, n), c in acc.items():
                residual[n] = residual.get(n, 0) + c
        kk = cx.key(e)
        for f in first:
            if cx.key(f) != _vadd(kk, cx.shift):
                failures[f"grading of D({e})"] = f
    _, Hv = _complex_cohomology(cx, k, window, [margin, margin + 1], check_images=False)[:2]
    rep = cohomology_window(SpaceSpec("F", model), k, window, margin)
    agree = Hv == rep.margins
    passed = not failures and agree
    res = Polynomial(model.roster, residual)
    if not agree and not res:
        # no polynomial witness for a rank mismatch; report the rank difference
        res = model.roster.const(Hv[margin] - rep.margins[margin] or 1)
    return CheckReport(f"V complex, ghost {k}", passed, res,
                       detail={f"D^2 failure {i}": str(v) for i, v in enumerate(failures.items())},
                       notes=[f"H(V) upper bounds {Hv}", f"variant F upper bounds {rep.margins}"])

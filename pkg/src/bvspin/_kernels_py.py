"""Pure-Python versions of the hot kernels.

A monomial is a flat tuple ``(v0, e0, v1, e1, ...)`` with strictly increasing
variable codes ``v = (symbol_id << SHIFT) | order``.  ``odd`` is a bytes
object indexed by symbol id, nonzero for odd symbols.  Coefficients are ints
or Fractions; callers normalise.

The compiled module ``bvspin._speedups`` exposes exactly the same names.
"""

from math import gcd

SHIFT = 16


def mono_mul(a, b, odd):
    """Return ``(sign, a*b)``; sign 0 means the product vanishes."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    na = len(a)
    nb = len(b)
    odd_left = 0
    for i in range(0, na, 2):
        if odd[a[i] >> SHIFT]:
            odd_left += 1
    swaps = 0
    out = []
    i = j = 0
    while i < na and j < nb:
        va = a[i]
        vb = b[j]
        if va < vb:
            out.append(va)
            out.append(a[i + 1])
            if odd[va >> SHIFT]:
                odd_left -= 1
            i += 2
        elif vb < va:
            out.append(vb)
            out.append(b[j + 1])
            if odd[vb >> SHIFT]:
                swaps += odd_left
            j += 2
        else:
            if odd[va >> SHIFT]:
                return 0, None
            e = a[i + 1] + b[j + 1]
            if e:
                out.append(va)
                out.append(e)
            i += 2
            j += 2
    if i < na:
        out.extend(a[i:])
    elif j < nb:
        out.extend(b[j:])
    return (-1 if swaps & 1 else 1), tuple(out)


def poly_mul(ta, tb, odd):
    """Product of two term dicts (unnormalised coefficients, zeros dropped)."""
    out = {}
    get = out.get
    for ma, ca in ta.items():
        for mb, cb in tb.items():
            s, m = mono_mul(ma, mb, odd)
            if s:
                c = get(m, 0) + (ca * cb if s > 0 else -(ca * cb))
                out[m] = c
    return {m: c for m, c in out.items() if c}


def poly_mul_mono_into(out, t, m, c, odd):
    """Accumulate ``c * t * m`` into the dict ``out`` (``t`` on the left)."""
    get = out.get
    for mt, ct in t.items():
        s, p = mono_mul(mt, m, odd)
        if s:
            out[p] = get(p, 0) + (ct * c if s > 0 else -(ct * c))


def mono_lderiv(m, v, odd):
    """Left derivative of monomial ``m`` by variable ``v``.

    Returns ``(coeff, rest)`` with an integer coefficient, or ``(0, None)``.
    """
    n = len(m)
    odd_before = 0
    for i in range(0, n, 2):
        w = m[i]
        if w == v:
            e = m[i + 1]
            if e == 1:
                rest = m[:i] + m[i + 2:]
            else:
                rest = m[:i] + (w, e - 1) + m[i + 2:]
            if odd[v >> SHIFT] and odd_before & 1:
                return -e, rest
            return e, rest
        if w > v:
            break
        if odd[w >> SHIFT]:
            odd_before += 1
    return 0, None


def mono_dt(m, odd):
    """Total derivative of a monomial as a list of ``(int, monomial)``."""
    out = []
    n = len(m)
    for i in range(0, n, 2):
        v = m[i]
        e = m[i + 1]
        w = v + 1
        if i + 2 < n and m[i + 2] == w:
            if odd[v >> SHIFT]:
                continue
            if e == 1:
                new = m[:i] + (w, m[i + 3] + 1) + m[i + 4:]
            else:
                new = m[:i] + (v, e - 1, w, m[i + 3] + 1) + m[i + 4:]
        elif e == 1:
            new = m[:i] + (w, 1) + m[i + 2:]
        elif e == -1:
            new = m[:i] + (v, -2, w, 1) + m[i + 2:]
        else:
            new = m[:i] + (v, e - 1, w, 1) + m[i + 2:]
        out.append((e, new))
    return out


def _normalise(row, extra=None):
    g = 0
    for c in row.values():
        g = gcd(g, c)
        if g == 1:
            break
    if extra is not None and g != 1:
        for c in extra.values():
            g = gcd(g, c)
            if g == 1:
                break
    if g > 1:
        for k in row:
            row[k] //= g
        if extra is not None:
            for k in extra:
                extra[k] //= g
    return g


class Echelon:
    """Incremental row echelon form over the integers (rows up to scale).

    Rows are dicts ``column -> int``.  Each stored row remembers the integer
    combination of inserted vectors it came from, so kernels and solutions
    can be read off exactly.
    """

    def __init__(self):
        self.pivots = {}
        self.rank = 0

    def reduce(self, vec, combo):
        """Reduce ``vec`` in place; ``combo`` tracks ``vec`` as a combination.

        Both dicts are modified and returned.  ``combo`` maps tags to ints.
        """
        pivots = self.pivots
        while vec:
            best = None
            for col in vec:
                if col in pivots and (best is None or col < best):
                    best = col
            if best is None:
                break
            row, rcombo = pivots[best]
            p = row[best]
            q = vec[best]
            g = gcd(p, q)
            p //= g
            q //= g
            if p != 1:
                for k in vec:
                    vec[k] *= p
                for k in combo:
                    combo[k] *= p
            for k, c in row.items():
                x = vec.get(k, 0) - q * c
                if x:
                    vec[k] = x
                else:
                    del vec[k]
            for k, c in rcombo.items():
                x = combo.get(k, 0) - q * c
                if x:
                    combo[k] = x
                else:
                    del combo[k]
            _normalise(vec, combo)
        return vec, combo

    def add(self, vec, combo):
        """Insert a vector.  Returns ``None`` if it became a new pivot row,
        otherwise the combination expressing the dependency (vec reduced to 0).
        """
        vec, combo = self.reduce(vec, combo)
        if not vec:
            return combo
        col = min(vec)
        self.pivots[col] = (vec, combo)
        self.rank += 1
        return None

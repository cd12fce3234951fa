# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the hot kernels (same API as ``_kernels_py``)."""

from math import gcd

DEF CSHIFT = 16
SHIFT = CSHIFT


def mono_mul(tuple a, tuple b, const unsigned char[:] odd):
    cdef Py_ssize_t na = len(a), nb = len(b), i = 0, j = 0
    cdef long va, vb, e
    cdef int odd_left = 0, swaps = 0
    cdef list out
    if na == 0:
        return 1, b
    if nb == 0:
        return 1, a
    for i in range(0, na, 2):
        if odd[(<long>a[i]) >> CSHIFT]:
            odd_left += 1
    out = []
    i = 0
    while i < na and j < nb:
        va = a[i]
        vb = b[j]
        if va < vb:
            out.append(va)
            out.append(a[i + 1])
            if odd[va >> CSHIFT]:
                odd_left -= 1
            i += 2
        elif vb < va:
            out.append(vb)
            out.append(b[j + 1])
            if odd[vb >> CSHIFT]:
                swaps += odd_left
            j += 2
        else:
            if odd[va >> CSHIFT]:
                return 0, None
            e = <long>a[i + 1] + <long>b[j + 1]
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


def poly_mul(dict ta, dict tb, const unsigned char[:] odd):
    cdef dict out = {}
    cdef int s
    for ma, ca in ta.items():
        for mb, cb in tb.items():
            s, m = mono_mul(ma, mb, odd)
            if s:
                if s > 0:
                    out[m] = out.get(m, 0) + ca * cb
                else:
                    out[m] = out.get(m, 0) - ca * cb
    return {m: c for m, c in out.items() if c}


def poly_mul_mono_into(dict out, dict t, tuple m, c, const unsigned char[:] odd):
    cdef int s
    for mt, ct in t.items():
        s, p = mono_mul(mt, m, odd)
        if s:
            if s > 0:
                out[p] = out.get(p, 0) + ct * c
            else:
                out[p] = out.get(p, 0) - ct * c


def mono_lderiv(tuple m, long v, const unsigned char[:] odd):
    cdef Py_ssize_t n = len(m), i
    cdef int odd_before = 0
    cdef long w, e
    for i in range(0, n, 2):
        w = m[i]
        if w == v:
            e = m[i + 1]
            if e == 1:
                rest = m[:i] + m[i + 2:]
            else:
                rest = m[:i] + (w, e - 1) + m[i + 2:]
            if odd[v >> CSHIFT] and odd_before & 1:
                return -e, rest
            return e, rest
        if w > v:
            break
        if odd[w >> CSHIFT]:
            odd_before += 1
    return 0, None


def mono_dt(tuple m, const unsigned char[:] odd):
    cdef list out = []
    cdef Py_ssize_t n = len(m), i
    cdef long v, e, w
    for i in range(0, n, 2):
        v = m[i]
        e = m[i + 1]
        w = v + 1
        if i + 2 < n and m[i + 2] == w:
            if odd[v >> CSHIFT]:
                continue
            if e == 1:
                new = m[:i] + (w, m[i + 3] + 1) + m[i + 4:]
            else:
                new = m[:i] + (v, e - 1, w, m[i + 3] + 1) + m[i + 4:]
        elif e == 1:
            new = m[:i] + (w, 1) + m[i + 2:]
        else:
            new = m[:i] + (v, e - 1, w, 1) + m[i + 2:]
        out.append((e, new))
    return out


cdef object _normalise(dict row, dict extra):
    g = 0
    for c in row.values():
        g = gcd(g, c)
        if g == 1:
            return 1
    for c in extra.values():
        g = gcd(g, c)
        if g == 1:
            return 1
    if g > 1:
        for k in row:
            row[k] //= g
        for k in extra:
            extra[k] //= g
    return g


cdef class Echelon:
    cdef public dict pivots
    cdef public Py_ssize_t rank

    def __init__(self):
        self.pivots = {}
        self.rank = 0

    def reduce(self, dict vec, dict combo):
        cdef dict pivots = self.pivots
        cdef dict row, rcombo
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

    def add(self, dict vec, dict combo):
        vec, combo = self.reduce(vec, combo)
        if not vec:
            return combo
        col = min(vec)
        self.pivots[col] = (vec, combo)
        self.rank += 1
        return None

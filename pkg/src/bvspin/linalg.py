"""Exact sparse linear algebra helpers on top of the Echelon kernel."""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from ._kernels import Echelon


def int_scale(vec):
    """Scale a rational sparse vector to integers; returns (ints, factor)."""
    den = 1
    for c in vec.values():
        if type(c) is Fraction:
            q = c.denominator
            den = den * q // gcd(den, q)
    if den == 1:
        return dict(vec), 1
    return {k: int(c * den) for k, c in vec.items()}, den


def kernel(images):
    """Kernel of the map sending column j to ``images[j]`` (sparse dicts).

    Returns a list of integer dicts ``{j: c}`` with sum c_j images[j] = 0,
    forming a basis of the kernel.
    """
    ech = Echelon()
    out = []
    for j, img in enumerate(images):
        vec, den = int_scale(img)
        if not vec:
            out.append({j: 1})
            continue
        dep = ech.add(vec, {j: den})
        if dep is not None:
            out.append({k: c for k, c in dep.items() if c})
    return out


def rank(vectors):
    ech = Echelon()
    for v in vectors:
        vec, _ = int_scale(v)
        if vec:
            ech.add(vec, {})
    return ech.rank


class Span:
    """An incrementally built span supporting membership with witnesses."""

    def __init__(self):
        self.ech = Echelon()
        self.size = 0

    @property
    def rank(self):
        return self.ech.rank

    def add(self, vec, tag=None):
        """Add a vector; ``tag`` labels it for witness reconstruction."""
        iv, den = int_scale(vec)
        self.size += 1
        if not iv:
            return False
        combo = {tag: den} if tag is not None else {}
        return self.ech.add(iv, combo) is None

    def reduce(self, vec):
        """Return (remainder, combination) with vec*L = remainder + sum combo * tagged."""
        iv, den = int_scale(vec)
        rem, combo = self.ech.reduce(iv, {None: den})
        lead = combo.pop(None)
        return rem, combo, lead

    def contains(self, vec):
        rem, _, _ = self.reduce(vec)
        return not rem

    def solve(self, vec):
        """Coefficients x_tag (Fractions) with sum x_tag * tagged_vector = vec, or None."""
        rem, combo, lead = self.reduce(vec)
        if rem:
            return None
        return {t: Fraction(-c, lead) for t, c in combo.items() if c}

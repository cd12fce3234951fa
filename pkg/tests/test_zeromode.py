from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from bvspin.models import build_sugra_spinning
from bvspin.zeromode import (ZeroModePoly, ZeroModeRing, at_p_zero,
                             euler_shift_inverse, from_polynomial,
                             macaulay_check, parse_zero_mode, q_apply,
                             q_apply_free, r_cohomology, r_differential,
                             reduce, to_fields, u_tensor, u_tensor_identity,
                             zero_bracket)

Z1 = ZeroModeRing(1)
Z2 = ZeroModeRing(2, (1, -1))


@st.composite
def zpoly(draw, ring=Z2, max_terms=3, max_deg=2, gamma=False):
    out = ring.zero()
    for _ in range(draw(st.integers(0, max_terms))):
        x = [draw(st.integers(0, max_deg)) for _ in range(ring.d)]
        p = [draw(st.integers(0, max_deg)) for _ in range(ring.d)]
        th = draw(st.lists(st.integers(1, ring.d), unique=True, max_size=ring.d))
        g = draw(st.integers(0, 1)) if gamma else 0
        c = draw(st.sampled_from([1, -1, 2, Fraction(1, 3)]))
        term = ring.const(c)
        term = term * ZeroModePoly(ring, {ring.mono(x, p, (), g): 1})
        for mu in th:
            term = term * ring.Theta(mu)
        out = out + term
    return out


@st.composite
def homogeneous_zpoly(draw, ring=Z2):
    u = draw(zpoly(ring))
    if not u:
        return u
    par = bin(next(iter(u.terms))[2]).count("1") % 2
    return ZeroModePoly(ring, {m: c for m, c in u.terms.items()
                               if bin(m[2]).count("1") % 2 == par})


def parity(u):
    return u.parity() if u else 0


# --- ring and normal forms -------------------------------------------------------

def test_ring_requires_positive_dimension():
    with pytest.raises(ValueError):
        ZeroModeRing(0)
    with pytest.raises(ValueError):
        ZeroModeRing(2, (1,))


def test_basic_relations():
    G = Z2.Gamma()
    assert reduce(G * G) == 0
    pt = Z2.P(1) * Z2.Theta(1) + Z2.P(2) * Z2.Theta(2)
    pp = Z2.P(1) ** 2 - Z2.P(2) ** 2
    assert reduce(pt) == 0 and reduce(pp) == 0
    assert reduce(Z2.X(1) * pt * Z2.Theta(1)) == 0
    assert Z2.Theta(1) * Z2.Theta(1) == 0
    assert Z2.Theta(2) * Z2.Theta(1) == -(Z2.Theta(1) * Z2.Theta(2))


def test_parse_and_fields_round_trip():
    u = parse_zero_mode(Z2, "X1*Theta2 - 1/2*P1^2*Gamma")
    assert u == Z2.X(1) * Z2.Theta(2) - (Z2.P(1) ** 2 * Z2.Gamma()).scale(Fraction(1, 2))
    M = build_sugra_spinning(2, "+-")
    f = to_fields(M, u)
    assert f == M.var("x1") * M.var("theta2") - (M.var("p1") ** 2 * M.var("gamma")).scale(Fraction(1, 2))
    assert from_polynomial(Z2, u.to_polynomial()) == u


@settings(max_examples=200)
@given(zpoly(gamma=True))
def test_reduce_idempotent(u):
    r = reduce(u)
    assert reduce(r) == r
    assert all(Z2.is_standard(m) for m in r.terms)


@settings(max_examples=200)
@given(zpoly(), zpoly())
def test_reduce_multiplicative(u, v):
    assert reduce(reduce(u) * reduce(v)) == reduce(u * v)


@settings(max_examples=200)
@given(zpoly(), zpoly(), zpoly())
def test_ring_associative(u, v, w):
    assert (u * v) * w == u * (v * w)


@pytest.mark.parametrize("ring", [Z1, Z2, ZeroModeRing(2), ZeroModeRing(3)],
                         ids=["d1", "d2pm", "d2", "d3"])
def test_macaulay(ring):
    assert macaulay_check(ring, 5) == []


@pytest.mark.parametrize("ring", [Z1, Z2, ZeroModeRing(3)], ids=["d1", "d2pm", "d3"])
def test_quotient_dimensions_independent(ring):
    # rank of the ideal piece from a plain sympy matrix of all monomial multiples
    gens = ring.ideal_generators()
    gdeg = [(1, 1), (2, 0)]
    for a in range(5):
        for b in range(ring.d + 1):
            space = ring.monomials(0, a, b)
            col = {m: i for i, m in enumerate(space)}
            rows = []
            for g, (ga, gb) in zip(gens, gdeg):
                if a < ga or b < gb:
                    continue
                for m in ring.monomials(0, a - ga, b - gb):
                    prod = ZeroModePoly(ring, {m: 1}) * g
                    row = [0] * len(space)
                    for t, c in prod.terms.items():
                        row[col[t]] = sympy.Rational(c.numerator, c.denominator)
                    rows.append(row)
            rank = sympy.Matrix(rows).rank() if rows else 0
            standard = [m for m in space if ring.is_standard(m)]
            assert len(space) - rank == len(standard), (a, b)


# --- Q and the differential of R --------------------------------------------------------

def test_q_on_generators():
    assert q_apply(Z2.X(1)) == Z2.Theta(1)
    assert q_apply(Z2.Theta(1)) == Z2.P(1)
    assert q_apply(Z2.Theta(2)) == -Z2.P(2)
    assert q_apply(Z2.P(1)) == 0


def test_q_squared_is_not_zero_but_r_is():
    # Q^2 = eta P d/dX on representatives
    assert q_apply(q_apply(Z2.X(1))) == Z2.P(1)
    assert r_differential(r_differential(Z2.X(1))) == 0


@settings(max_examples=200)
@given(zpoly(gamma=True))
def test_r_differential_squares_to_zero(u):
    assert r_differential(r_differential(u)) == 0


@settings(max_examples=200)
@given(zpoly())
def test_q_preserves_ideal(u):
    assert q_apply(reduce(u)) == q_apply(u)


@settings(max_examples=200)
@given(homogeneous_zpoly(), zpoly())
def test_q_is_derivation(u, v):
    lhs = q_apply_free(u * v)
    rhs = q_apply_free(u) * v + (u * q_apply_free(v)).scale((-1) ** parity(u))
    assert lhs == rhs


@pytest.mark.parametrize("ring", [Z1, Z2, ZeroModeRing(3)], ids=["d1", "d2pm", "d3"])
def test_iota_p_omega_closed(ring):
    om = ring.omega()
    v = ring.zero()
    for mu in range(1, ring.d + 1):
        v = v + (ring.P(mu) * om.d_theta(mu)).scale(ring.eta[mu - 1])
    assert v
    assert q_apply(v) == 0


# --- bracket --------------------------------------------------------------------------

def test_bracket_generators():
    assert zero_bracket(Z2.X(1), Z2.P(1)) == 1
    assert zero_bracket(Z2.P(1), Z2.X(1)) == -1
    assert zero_bracket(Z2.Theta(2), Z2.Theta(2)) == 1
    assert zero_bracket(Z2.X(1), Z2.P(2)) == 0


@settings(max_examples=200)
@given(homogeneous_zpoly(), homogeneous_zpoly())
def test_bracket_symmetry(u, v):
    # the bracket carries (-1)^pa(u) factors, which gives this symmetry
    pu, pv = parity(u), parity(v)
    assert zero_bracket(u, v) == zero_bracket(v, u).scale((-1) ** ((pu + 1) * (pv + 1)))


@settings(max_examples=200)
@given(homogeneous_zpoly(), homogeneous_zpoly(), homogeneous_zpoly())
def test_bracket_leibniz(u, v, w):
    pu, pv = parity(u), parity(v)
    lhs = zero_bracket(u, v * w)
    rhs = zero_bracket(u, v) * w + (v * zero_bracket(u, w)).scale((-1) ** (pu * pv))
    assert lhs == rhs


# --- U tensor and R cohomology --------------------------------------------------------------

def test_euler_shift_inverse():
    assert euler_shift_inverse(Z1.P(1) ** 2) == (Z1.P(1) ** 2).scale(Fraction(1, 3))
    assert euler_shift_inverse(Z1.X(1)) == Z1.X(1)


def test_at_p_zero():
    u = Z1.X(1) + Z1.X(1) * Z1.P(1)
    assert at_p_zero(u) == Z1.X(1)


@settings(max_examples=200)
@given(zpoly(max_deg=3))
def test_u_tensor_identity(u):
    assert all(r == 0 for r in u_tensor_identity(u))


def test_u_tensor_shape():
    U = u_tensor(Z2.P(1) * Z2.P(2))
    assert U[0][1] == Fraction(1, 1) * Z2.one() and U[0][0] == 0


def test_r_cohomology_low_degrees():
    rows = r_cohomology(Z2, 3)
    assert rows[0]["H0"] == 1
    assert rows[0]["H0_basis"] == [Z2.one()]
    for row in rows:
        for z in row["H0_basis"]:
            assert q_apply(z) == 0
        assert row["H0"] == row["dim"] - row["rank_Q"]

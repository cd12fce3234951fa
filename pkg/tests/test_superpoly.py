from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bvspin.models import build_sugra_spinning
from bvspin.superpoly import (EVEN, ODD, FieldDecl, InhomogeneousError,
                              Polynomial, Roster, RosterMismatch,
                              canonical_form, check_monomial, grading,
                              partial_derivative, polynomial_from_terms,
                              serialize, total_derivative, var_code,
                              var_symbol)

from strategies import PAIRED, ROSTER, homogeneous, polynomial

D2 = build_sugra_spinning(2)
R2 = D2.roster
v2 = R2.var


# --- multiplication -----------------------------------------------------------

def test_odd_square_vanishes():
    assert v2("theta1") * v2("theta1") == 0
    assert v2("c", 1) * v2("c", 1) == 0


def test_odd_generators_anticommute():
    t1, t2 = v2("theta1"), v2("theta2")
    assert t1 * t2 == -(t2 * t1)
    assert serialize(t2 * t1) == "-1 * theta1 * theta2"


def test_gamma_inverse():
    assert R2.inv("gamma") * v2("gamma") == 1
    assert v2("gamma") ** 3 * R2.inv("gamma", 2) == v2("gamma")


def test_roster_mismatch():
    with pytest.raises(RosterMismatch):
        v2("e") * build_sugra_spinning(0).roster.var("e")


def test_negative_power_only_for_invertible():
    with pytest.raises(ValueError):
        v2("e") ** -1
    with pytest.raises(ValueError):
        check_monomial(R2, (var_code(R2.symbol("gamma").id, 1), -1))


def test_invertible_must_be_even():
    with pytest.raises(ValueError):
        Roster([FieldDecl("t", 0, ODD, invertible=True)])


def test_pairing_rules():
    for s in R2.symbols:
        if s.partner is not None:
            p = R2.symbols[s.partner]
            assert s.ghost + p.ghost == -1
            assert s.parity == 1 - p.parity


# --- derivatives ----------------------------------------------------------------

def test_total_derivative_examples():
    c, g = v2("c"), v2("gamma")
    assert total_derivative(c * g) == v2("c", 1) * g + c * v2("gamma", 1)
    assert total_derivative(R2.inv("gamma")) == -(R2.inv("gamma", 2) * v2("gamma", 1))
    assert total_derivative(R2.one()) == 0


def test_partial_derivative_examples():
    t1, t2 = v2("theta1"), v2("theta2")
    assert partial_derivative(t1 * t2, "theta1") == t2
    assert partial_derivative(t1 * t2, "theta2") == -t1
    assert partial_derivative(R2.inv("gamma"), "gamma") == -R2.inv("gamma", 2)
    # e even, so the left derivative by d(c) needs no sign
    assert partial_derivative(v2("e") * v2("c", 1), ("c", 1)) == v2("e")


# --- grading --------------------------------------------------------------------

def test_grading_examples():
    g = grading(D2.anti("psi"))
    assert (g.ghost, g.parity) == (-1, EVEN)
    # c+ is even (c is odd), so c+ gamma^2 has ghost 0 and is even
    g = grading(D2.anti("c") * v2("gamma") ** 2)
    assert (g.ghost, g.parity) == (0, EVEN)
    with pytest.raises(InhomogeneousError) as ex:
        grading(v2("e") + v2("c"))
    assert len(ex.value.terms) == 2


def test_action_degree():
    g = grading(D2.action)
    assert (g.ghost, g.parity) == (0, EVEN)


# --- canonical form and serialization ------------------------------------------

def test_canonical_form_examples():
    a = canonical_form(R2, [(2, ["theta1", "theta2"]), (3, ["theta2", "theta1"])])
    assert a == -(v2("theta1") * v2("theta2"))
    b = canonical_form(R2, [(0, ["x1"]), (1, ["gamma"])])
    assert b == v2("gamma")


def test_serialization_format():
    a = (v2("c", 2) * R2.inv("gamma", 2)).scale(Fraction(-3, 4)) + D2.anti("e", 1) * v2("x1")
    assert serialize(a) == "1 * x1 * d(anti(e),1) - 3/4 * d(c,2) * inv(gamma)^2"
    assert serialize(R2.zero()) == "0"


def test_polynomial_from_terms_validates():
    th = var_code(R2.symbol("theta1").id, 0)
    with pytest.raises(ValueError):
        polynomial_from_terms(R2, {(th, 2): 1})


@settings(max_examples=200)
@given(polynomial())
def test_canonical_form_idempotent(a):
    again = Polynomial(a.roster, dict(a.terms))
    assert again == a
    assert serialize(again) == serialize(a)
    for m in a.terms:
        check_monomial(a.roster, m)


# --- properties ----------------------------------------------------------------

def _degree(a):
    m = next(iter(a.terms))
    return a.roster.mono_ghost(m), a.roster.mono_parity(m)


@settings(max_examples=200)
@given(homogeneous(), homogeneous())
def test_grading_additive(a, b):
    assume(a * b)
    ga, pa = _degree(a)
    gb, pb = _degree(b)
    g = grading(a * b)
    assert g.ghost == ga + gb and g.parity == (pa + pb) % 2


@settings(max_examples=200)
@given(homogeneous())
def test_total_derivative_preserves_degree(a):
    da = a.dt()
    assume(da)
    assert (grading(da).ghost, grading(da).parity) == _degree(a)


@settings(max_examples=200)
@given(polynomial(max_terms=4), st.sampled_from([s.id for s in ROSTER.symbols if s.parity]),
       st.integers(0, 2))
def test_odd_second_partial_vanishes(a, sid, order):
    v = var_code(sid, order)
    assert partial_derivative(partial_derivative(a, v), v) == 0


@settings(max_examples=200)
@given(polynomial(max_terms=4, symbols=PAIRED, max_order=1), st.sampled_from(PAIRED),
       st.sampled_from(PAIRED), st.integers(0, 1), st.integers(0, 1))
def test_partials_graded_commute(a, s1, s2, o1, o2):
    u, v = var_code(s1, o1), var_code(s2, o2)
    pu, pv = ROSTER.symbols[s1].parity, ROSTER.symbols[s2].parity
    uv = partial_derivative(partial_derivative(a, v), u)
    vu = partial_derivative(partial_derivative(a, u), v)
    assert uv == vu.scale((-1) ** (pu * pv))


# --- brute-force sign oracle --------------------------------------------------------

CODES = [var_code(s.id, o) for s in ROSTER.symbols for o in range(2)]


def oracle_sign(word):
    """Sign of sorting a word of distinct generators, counting odd transpositions."""
    sign = 1
    w = list(word)
    for i in range(len(w)):
        for j in range(i + 1, len(w)):
            if w[i] > w[j] and ROSTER.odd[var_symbol(w[i])] and ROSTER.odd[var_symbol(w[j])]:
                sign = -sign
    return sign


def word_product(word):
    out = ROSTER.one()
    for c in word:
        out = out * Polynomial(ROSTER, {(c, 1): 1})
    return out


def sorted_mono(word):
    return tuple(x for c in sorted(word) for x in (c, 1))


@settings(max_examples=300)
@given(st.lists(st.sampled_from(CODES), min_size=1, max_size=4, unique=True))
def test_product_sign_oracle(word):
    assert word_product(word) == Polynomial(ROSTER, {sorted_mono(word): oracle_sign(word)})


@settings(max_examples=300)
@given(st.lists(st.sampled_from(CODES), min_size=1, max_size=4, unique=True), st.data())
def test_left_derivative_sign_oracle(word, data):
    i = data.draw(st.integers(0, len(word) - 1))
    v = word[i]
    odd_before = sum(ROSTER.odd[var_symbol(c)] for c in word[:i])
    sign = (-1) ** (ROSTER.odd[var_symbol(v)] * odd_before)
    rest = word[:i] + word[i + 1:]
    expect = Polynomial(ROSTER, {sorted_mono(rest): sign * oracle_sign(rest)})
    assert partial_derivative(word_product(word), v) == expect

from fractions import Fraction

import pytest
from hypothesis import assume, given, settings

from bvspin.calculus import (EvolutionaryField, ExactnessError, FunctionalClass,
                             antibracket_density, check_master_equation,
                             check_nilpotence, check_quantum_condition,
                             commutator, derivative_field,
                             differential_from_action, fields_equal,
                             functional_antibracket, integrate,
                             is_total_derivative, master_density,
                             prolong_apply, variational_derivative)
from bvspin.models import build_free_spinning, build_sugra_spinning
from bvspin.superpoly import EVEN, FieldDecl, Roster, grading

from strategies import SUGRA1, homogeneous, polynomial

HALF = Fraction(1, 2)
FREE1 = build_free_spinning(1)
D0 = build_sugra_spinning(0)
S1 = SUGRA1.differential()


# --- variational derivative ----------------------------------------------------

def test_integration_by_parts():
    R = FREE1.roster
    a = R.var("p1") * R.var("x1", 1)
    assert variational_derivative(a, "x1") == -R.var("p1", 1)


def test_stress_tensor():
    M = build_sugra_spinning(2, "+-")
    p1, p2 = M.var("p1"), M.var("p2")
    S0 = M.action_parts[0]
    assert variational_derivative(S0, "e") == -(p1 * p1 - p2 * p2).scale(HALF)


def test_unknown_symbol():
    with pytest.raises(KeyError):
        variational_derivative(FREE1.var("x1"), "nope")
    with pytest.raises(KeyError):
        variational_derivative(FREE1.var("x1"), 999)


# --- exactness --------------------------------------------------------------------

def test_is_total_derivative_examples():
    d0 = D0
    assert is_total_derivative((d0.anti("psi") * d0.var("gamma")).dt())
    assert not is_total_derivative(d0.anti("e"))
    assert is_total_derivative(master_density(SUGRA1.action))


def test_constants_are_not_total_derivatives():
    assert not is_total_derivative(D0.roster.const(3))


def test_localized_exactness_is_window_free():
    R = D0.roster
    g = R.var("gamma")
    a = R.inv("gamma") * g.dt()        # vanishing Euler derivatives, but not exact
    assert not is_total_derivative(a)
    with pytest.raises(ExactnessError):
        is_total_derivative(a, method="euler")
    b = (R.inv("gamma", 2) * R.var("c")).dt()
    ok, w = is_total_derivative(b, witness=True)
    assert ok and w.dt() == b


@settings(max_examples=200)
@given(polynomial(max_terms=3))
def test_witness_solve_completes(g):
    a = g.dt()
    assume(a)
    ok, w = is_total_derivative(a, witness=True)
    assert ok and w.dt() == a


@settings(max_examples=200)
@given(polynomial(max_terms=3))
def test_integrate_splits(a):
    g, rem = integrate(a)
    assert g.dt() + rem == a
    assert is_total_derivative(rem) is False or rem.is_zero()


# --- antibracket ------------------------------------------------------------------

def test_canonical_relations():
    R = FREE1.roster
    for name in ("x1", "theta1", "p1"):
        phi, anti = R.var(name), R.var(f"anti({name})")
        assert antibracket_density(phi, anti) == 1
        assert antibracket_density(phi, R.var("x1") if name != "x1" else R.var("p1")) == 0
    # graded symmetry: {theta+, theta} = -{theta, theta+}
    assert antibracket_density(R.var("anti(theta1)"), R.var("theta1")) == -1
    assert antibracket_density(R.var("anti(x1)"), R.var("x1")) == -1


def test_free_master_density_exact():
    assert is_total_derivative(master_density(FREE1.action))


def test_functional_bracket_with_constant():
    F = FunctionalClass(SUGRA1.anti("e") * SUGRA1.var("c"))
    one = FunctionalClass(SUGRA1.roster.one())
    assert functional_antibracket(one, F).is_zero()


def test_functional_class_equality():
    a = SUGRA1.anti("e")
    b = a + (SUGRA1.anti("psi") * SUGRA1.var("gamma")).dt()
    assert FunctionalClass(a).equals(FunctionalClass(b))
    assert not FunctionalClass(a).equals(FunctionalClass(a.scale(2)))


def test_inhomogeneous_bracket_rejected():
    R = FREE1.roster
    with pytest.raises(ValueError):
        antibracket_density(R.var("x1") + R.var("theta1"), R.var("anti(x1)"))


@settings(max_examples=200)
@given(homogeneous(max_terms=2, max_factors=2))
def test_master_density_cross_check(f):
    # {S, S} = 2 sum (-1)^p dS/dphi dS/dphi+ modulo d for any even S
    assume(f and grading(f).parity == 0)
    S = f
    R = S.roster
    total = R.zero()
    for phi in R.fields():
        t = variational_derivative(S, phi.id) * variational_derivative(S, phi.partner)
        total = total + (-t if phi.parity else t)
    assert is_total_derivative(master_density(S) - total.scale(2))


# --- evolutionary fields -------------------------------------------------------------

def test_prolong_examples():
    s = D0.differential()
    R = D0.roster
    assert s(R.var("c")) == R.var("gamma") ** 2
    assert s(R.var("e")) == -R.var("c", 1) + (R.var("psi") * R.var("gamma")).scale(2)
    assert s(R.one()) == 0


@settings(max_examples=200)
@given(polynomial())
def test_s_commutes_with_d(f):
    assert S1(f.dt()) == S1(f).dt()


@settings(max_examples=200)
@given(homogeneous())
def test_s_degree(f):
    sf = S1(f)
    assume(f and sf)
    g0, g1 = grading(f), grading(sf)
    assert g1.ghost == g0.ghost + 1 and g1.parity == 1 - g0.parity


def test_commutator_examples():
    d = derivative_field(D0.roster)
    assert not commutator(d, d).characteristics
    s = D0.differential()
    assert not commutator(s, s).characteristics


def test_differential_free_table():
    M = build_free_spinning(2, "+-")
    s = M.differential()
    eta = (1, -1)
    for mu in (1, 2):
        x, th, p = M.var(f"x{mu}"), M.var(f"theta{mu}"), M.var(f"p{mu}")
        h = eta[mu - 1]
        assert s(M.anti(f"x{mu}")) == -p.dt()
        assert s(M.anti(f"theta{mu}")) == th.dt().scale(h)
        assert s(M.anti(f"p{mu}")) == x.dt() - p.scale(h)
        assert s(x) == 0 and s(th) == 0 and s(p) == 0


def test_zero_action():
    R = FREE1.roster
    assert not differential_from_action(R.zero()).characteristics


def test_action_must_be_even_ghost_zero():
    with pytest.raises(ValueError):
        differential_from_action(FREE1.var("x1") * FREE1.anti("x1"))


def test_fields_equal():
    s = D0.differential()
    ok, diffs = fields_equal(s, s.scale(1))
    assert ok and not diffs
    ok, diffs = fields_equal(s, s.scale(2))
    assert not ok and diffs


# --- global checks -----------------------------------------------------------------

def test_master_fails_without_top_part():
    rep = check_master_equation(D0.without_part(2))
    assert not rep.passed and not rep.residual.is_zero()
    assert "FAIL" in rep.text()


def test_master_witness():
    rep = check_master_equation(SUGRA1)
    R = SUGRA1.roster
    S = SUGRA1.action
    total = R.zero()
    for phi in R.fields():
        t = variational_derivative(S, phi.id) * variational_derivative(S, phi.partner)
        total = total + (-t if phi.parity else t)
    assert rep.witness.dt() == total


def test_nilpotence_needs_top_part():
    rep = check_nilpotence(D0.without_part(2).differential())
    assert not rep.passed and rep.detail


def test_quantum_condition_toy_fails():
    R = Roster([FieldDecl("u", 0, EVEN)])
    rep = check_quantum_condition(R.var("u") * R.var("anti(u)"))
    assert not rep.passed and rep.residual == 1


def test_report_text():
    rep = check_nilpotence(D0.differential())
    assert rep.text().startswith("nilpotence of s: PASS")
    assert "residual: 0" in rep.text()


def test_custom_field_degree():
    R = D0.roster
    X = EvolutionaryField(R, {R.symbol("e").id: R.var("c")}, 1, 1, "X")
    assert prolong_apply(X, R.var("e", 2)) == R.var("c", 2)

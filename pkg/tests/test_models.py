from fractions import Fraction

import pytest
from hypothesis import given, settings

from bvspin.calculus import (commutator, derivative_field,
                             differential_from_action, fields_equal,
                             hamiltonian_field, antibracket_density,
                             prolong_apply)
from bvspin.models import (MetricSignature, build_free_spinning,
                           build_sugra_spinning, covariance_density, iota,
                           matter_cocycle, momentum, named_cocycle,
                           parse_builtin, reparametrization_field,
                           split_by_ghost_degree, topological_field,
                           transgress, volume_form, with_xi, xi_embed)
from bvspin.superpoly import EVEN, ODD, grading
from bvspin.zeromode import q_apply_free, ring_for

from strategies import SUGRA1, polynomial

HALF = Fraction(1, 2)
ETA = (1, -1)
M2 = build_sugra_spinning(2, "+-")
D0 = build_sugra_spinning(0)


def s_part(model, k):
    return differential_from_action(model.action_parts[k])


def sum_mu(fn, d=2):
    out = M2.roster.zero()
    for mu in range(1, d + 1):
        out = out + fn(mu, ETA[mu - 1])
    return out


# --- builders -------------------------------------------------------------------

def test_free_builder():
    M = build_free_spinning(1)
    assert len(M.roster) == 6
    assert len(M.action) == 3
    g = grading(M.action)
    assert (g.ghost, g.parity) == (0, EVEN)
    with pytest.raises(ValueError):
        build_free_spinning(0)


def test_sugra_d0_builder():
    R = D0.roster
    assert [s.name for s in R.symbols if s.role == "field"] == ["e", "psi", "c", "gamma"]
    S0, S1, S2 = D0.action_parts
    a, v = D0.anti, D0.var
    assert S0 == 0
    assert S1 == a("e").dt() * v("c") + (a("psi").dt() + (a("e") * v("psi")).scale(2)) * v("gamma")
    assert S2 == -(a("c") * v("gamma") ** 2)
    assert D0.action == S0 + S1 + S2


def test_ghost_parity_table():
    R = D0.roster
    table = {s.name: (s.ghost, s.parity) for s in R.symbols}
    assert table["c"] == (1, ODD) and table["gamma"] == (1, EVEN)
    assert table["e"] == (0, EVEN) and table["psi"] == (0, ODD)
    assert table["anti(c)"] == (-2, EVEN) and table["anti(gamma)"] == (-2, ODD)


def test_parts_by_ghost_degree():
    for M in (D0, M2, SUGRA1):
        parts = split_by_ghost_degree(M.roster, M.action)
        assert tuple(parts) == tuple(M.action_parts)


def test_metric_signature():
    assert MetricSignature.parse("+-").entries == (1, -1)
    with pytest.raises(ValueError):
        MetricSignature.parse("+x")
    with pytest.raises(ValueError):
        MetricSignature.parse("+-", 3)
    with pytest.raises(ValueError):
        MetricSignature((1, 0))


def test_builtin_selectors():
    assert parse_builtin("builtin:sugra:d=2:metric=+-").metric.entries == ETA
    for bad in ("builtin:foo:d=1", "builtin:sugra", "builtin:sugra:d=1:color=red",
                "builtin:sugra:d=2:metric=+"):
        with pytest.raises(ValueError):
            parse_builtin(bad)


# --- differential tables ----------------------------------------------------------

def test_s0_table():
    s = s_part(M2, 0)
    v, a = M2.var, M2.anti
    e, psi = v("e"), v("psi")
    assert s(a("e")) == -sum_mu(lambda m, h: (v(f"p{m}") ** 2).scale(h)).scale(HALF)
    assert s(a("psi")) == -sum_mu(lambda m, h: v(f"p{m}") * v(f"theta{m}"))
    for mu in (1, 2):
        h = ETA[mu - 1]
        x, th, p = v(f"x{mu}"), v(f"theta{mu}"), v(f"p{mu}")
        assert s(a(f"x{mu}")) == -p.dt()
        assert s(a(f"theta{mu}")) == th.dt().scale(h) + psi * p
        assert s(a(f"p{mu}")) == x.dt() - (e * p).scale(h) + psi * th
    for name in ("e", "psi", "c", "gamma", "x1", "theta1", "p1", "anti(c)", "anti(gamma)"):
        assert s(v(name)) == 0


def test_s1_table():
    s = s_part(M2, 1)
    v, a = M2.var, M2.anti
    e, psi, c, g = v("e"), v("psi"), v("c"), v("gamma")
    assert s(a("c")) == a("e").dt() - sum_mu(lambda m, h: (a(f"x{m}") * v(f"p{m}")).scale(h))
    assert s(a("gamma")) == (a("psi").dt()
                             + sum_mu(lambda m, h: (a(f"theta{m}") * v(f"p{m}")).scale(h)
                                      - a(f"x{m}") * v(f"theta{m}"))
                             + (a("e") * psi).scale(2))
    assert s(a("psi")) == (a("e") * g).scale(2)
    assert s(e) == -c.dt() + (psi * g).scale(2)
    assert s(psi) == g.dt()
    for mu in (1, 2):
        h = ETA[mu - 1]
        x, th, p = v(f"x{mu}"), v(f"theta{mu}"), v(f"p{mu}")
        assert s(a(f"theta{mu}")) == -(a(f"x{mu}") * g)
        assert s(a(f"p{mu}")) == -(a(f"x{mu}") * c).scale(h) + (a(f"theta{mu}") * g).scale(h)
        assert s(x) == -(p * c).scale(h) - th * g
        assert s(th) == -(p * g).scale(h)
        assert s(a(f"x{mu}")) == 0 and s(p) == 0
    for name in ("c", "gamma", "anti(e)"):
        assert s(v(name)) == 0


def test_s2_table():
    s = s_part(M2, 2)
    v, a = M2.var, M2.anti
    assert s(a("gamma")) == -(a("c") * v("gamma")).scale(2)
    assert s(v("c")) == v("gamma") ** 2
    others = [sym for sym in M2.roster.symbols if sym.name not in ("anti(gamma)", "c")]
    assert all(s(v(sym.name)) == 0 for sym in others)


def test_full_differential_is_sum_of_parts():
    s = M2.differential()
    parts = [s_part(M2, k) for k in range(3)]
    for sym in M2.roster.symbols:
        x = M2.var(sym.name)
        assert s(x) == sum((p(x) for p in parts), M2.roster.zero())


def test_gauge_classes_closed():
    s0 = s_part(M2, 0)
    v, a = M2.var, M2.anti
    first = a("e").dt() - sum_mu(lambda m, h: (a(f"x{m}") * v(f"p{m}")).scale(h))
    second = (a("psi").dt() + sum_mu(lambda m, h: (a(f"theta{m}") * v(f"p{m}")).scale(h)
                                     - a(f"x{m}") * v(f"theta{m}"))
              + (a("e") * v("psi")).scale(2))
    assert s0(first) == 0 and s0(second) == 0


# --- covariance ----------------------------------------------------------------------

def test_covariance_density_d0():
    assert covariance_density(D0) == D0.anti("c") * D0.var("e") + D0.anti("gamma") * D0.var("psi")


def test_T_of_one_is_d():
    for M in (D0, M2):
        T1 = reparametrization_field(M, use_aux_xi=False)
        ok, _ = fields_equal(T1, derivative_field(M.roster))
        assert ok
        H1 = reparametrization_field(M, use_aux_xi=False, variant="hamiltonian")
        # the hamiltonian field does not act on the auxiliary xi itself
        ok, diffs = fields_equal(H1, derivative_field(with_xi(M)))
        assert set(diffs) == {"xi"}


def test_T_on_e():
    T = reparametrization_field(M2)
    R = T.roster
    xi, e = R.var("xi"), R.var("e")
    assert T(e) == xi * e.dt() - xi.dt() * e


def test_T_commutes_with_s():
    for M in (D0, SUGRA1):
        R = with_xi(M)
        s = M.differential().lift(R)
        T = reparametrization_field(M, variant="hamiltonian")
        assert not commutator(T, s).characteristics
        T1 = reparametrization_field(M, use_aux_xi=False)
        assert not commutator(T1, M.differential()).characteristics


@settings(max_examples=200)
@given(polynomial())
def test_SG_generates_d(f):
    X = hamiltonian_field(antibracket_density(SUGRA1.action, covariance_density(SUGRA1)))
    assert X(f) == f.dt()


def test_topological_field():
    g = topological_field(M2)
    assert g(M2.anti("e")) == M2.anti("c")
    assert g(M2.var("c")) == -M2.var("e")
    assert g(M2.anti("x1")) == 0
    assert g.parity == ODD and g.ghost_shift == -1


def test_models_require_sugra():
    F = build_free_spinning(1)
    for fn in (covariance_density, topological_field):
        with pytest.raises(ValueError):
            fn(F)
    with pytest.raises(ValueError):
        reparametrization_field(F)


# --- d = 0 cocycles -------------------------------------------------------------------

def test_alpha_1():
    a, v = D0.anti, D0.var
    expect = (a("psi") * a("e") * v("c")).scale(4) + a("psi") ** 2 * v("gamma")
    assert named_cocycle(D0, "alpha", 1) == expect


@pytest.mark.parametrize("k", [-1, 0, 1, 2, 3, 4])
def test_alpha_closed(k):
    s = D0.differential()
    assert s(named_cocycle(D0, "alpha", k)) == 0
    assert s(named_cocycle(D0, "A", k)) == named_cocycle(D0, "alpha", k)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_beta_and_B(k):
    s = D0.differential()
    b = named_cocycle(D0, "beta", k)
    assert s(b) == 0
    # s(B_k) lies on the line of beta_k; the scalar is 2 for every k
    assert s(named_cocycle(D0, "B", k)) == b.scale(2)
    assert named_cocycle(D0, "B", k).is_localized()
    assert not b.is_localized()


def test_cocycle_ranges():
    with pytest.raises(ValueError):
        named_cocycle(D0, "alpha", -2)
    with pytest.raises(ValueError):
        named_cocycle(D0, "beta", 0)
    with pytest.raises(ValueError):
        named_cocycle(D0, "gamma", 1)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_transgression_homotopy(k):
    s = D0.differential()
    a = named_cocycle(D0, "alpha", k)
    assert s(transgress(D0, a)) == a.dt()
    assert transgress(D0, D0.roster.one()) == 0


# --- d > 0 -------------------------------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3])
def test_volume_form(d):
    M = build_sugra_spinning(d)
    Om = volume_form(M)
    assert Om * Om == 0
    # s(Omega) = -iota(p) Omega gamma: the line of the stated identity, scalar -1
    assert M.differential()(Om) == -(iota(M, momentum(M), Om) * M.var("gamma"))
    with pytest.raises(ValueError):
        volume_form(D0)


@pytest.mark.parametrize("d,metric", [(2, "++"), (2, "+-"), (3, "+++")])
def test_iota_squares_to_zero_on_even_vectors(d, metric):
    M = build_sugra_spinning(d, metric)
    Om = volume_form(M)
    p = momentum(M)
    # brute expansion: sum over mu, nu of eta eta p_mu p_nu d/dtheta_mu d/dtheta_nu
    brute = M.roster.zero()
    for mu in range(1, d + 1):
        for nu in range(1, d + 1):
            term = Om.partial(f"theta{nu}").partial(f"theta{mu}")
            brute = brute + (p[mu - 1] * p[nu - 1] * term).scale(M.eta[mu - 1] * M.eta[nu - 1])
    assert iota(M, p, iota(M, p, Om)) == brute == 0


@pytest.mark.parametrize("d", [1, 2])
def test_matter_cocycles_basic(d):
    M = build_sugra_spinning(d)
    R = M.roster
    assert matter_cocycle(M, "A", 1, R.zero()) == 0
    assert matter_cocycle(M, "Z", 0, 1) == volume_form(M) * R.inv("gamma")
    with pytest.raises(ValueError):
        matter_cocycle(M, "A", 0, M.var("p1"))
    with pytest.raises(ValueError):
        matter_cocycle(M, "A", 0, M.var("x1", 1))
    with pytest.raises(ValueError):
        matter_cocycle(M, "A", -1, 1)


def _samples(Z):
    return [Z.one(), Z.Theta(1), Z.X(1) * Z.Theta(1), Z.X(1) ** 2, Z.X(1) * Z.P(1)]


@pytest.mark.parametrize("d", [1, 2, 3])
def test_xi1_of_Qv_corrected(d):
    M = build_sugra_spinning(d)
    Z = ring_for(M)
    s = M.differential()
    for v in _samples(Z):
        assert xi_embed(M, 1, q_apply_free(v)) == -s(xi_embed(M, 0, v))
        assert s(xi_embed(M, 1, v)) == 0


@pytest.mark.parametrize("d", [1, 2])
def test_xi1_ptheta_corrected(d):
    M = build_sugra_spinning(d)
    Z = ring_for(M)
    s = M.differential()
    ea, c, pa = M.anti("e"), M.var("c"), M.anti("psi")
    pt = sum((Z.P(mu) * Z.Theta(mu) for mu in range(1, d + 1)), Z.zero())
    for v in _samples(Z):
        lhs = xi_embed(M, 1, pt * v)
        assert lhs == s(-(ea * c * xi_embed(M, 0, v)).scale(2) - pa * xi_embed(M, 1, v))


def test_xi_embed_basics():
    M = build_sugra_spinning(1)
    Z = ring_for(M)
    assert xi_embed(M, 0, Z.one()) == 1
    assert xi_embed(M, 1, Z.one()) == M.var("gamma")
    with pytest.raises(ValueError):
        xi_embed(M, 1, Z.Gamma())
    with pytest.raises(ValueError):
        xi_embed(M, 2, Z.one())


def test_prolong_of_g_on_products():
    g = topological_field(D0)
    a = named_cocycle(D0, "alpha", 1)
    assert prolong_apply(g, a) == transgress(D0, a)

"""The free and supergravity-coupled spinning particle and their named objects."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .calculus import (EvolutionaryField, antibracket_density, CheckReport,
                       commutator, derivative_field, differential_from_action,
                       fields_equal, hamiltonian_field, prolong_apply)
from .superpoly import (EVEN, ODD, SHIFT, ORDER_MASK, FieldDecl, Polynomial,
                        Roster, grading)

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class MetricSignature:
    entries: tuple

    def __post_init__(self):
        for e in self.entries:
            if e not in (1, -1):
                raise ValueError(f"metric entries must be +1 or -1, got {e}")

    @property
    def d(self):
        return len(self.entries)

    def __getitem__(self, mu):
        return self.entries[mu]

    @classmethod
    def parse(cls, text: str, d: int | None = None):
        signs = tuple(1 if ch == "+" else -1 for ch in text if ch in "+-")
        if len(signs) != len([ch for ch in text if not ch.isspace()]):
            raise ValueError(f"bad metric signature {text!r}")
        if d is not None and len(signs) != d:
            raise ValueError(f"metric {text!r} has length {len(signs)}, expected {d}")
        return cls(signs)

    @classmethod
    def euclidean(cls, d):
        return cls((1,) * d)

    def text(self):
        return "".join("+" if e > 0 else "-" for e in self.entries)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    dim: int
    metric: MetricSignature
    roster: Roster
    action: Polynomial
    action_parts: tuple
    kind: str = "custom"

    def __post_init__(self):
        if self.action:
            deg = grading(self.action)
            if deg.ghost != 0 or deg.parity != EVEN:
                raise ValueError(f"action must be even with ghost number 0, got {deg}")

    def has(self, name):
        return self.roster.has(name)

    def var(self, name, order=0):
        return self.roster.var(name, order)

    def anti(self, name, order=0):
        return self.roster.var(f"anti({name})", order)

    @property
    def eta(self):
        return self.metric.entries

    def differential(self) -> EvolutionaryField:
        return differential_from_action(self.action)

    def without_part(self, k) -> "ModelSpec":
        parts = list(self.action_parts)
        parts[k] = self.roster.zero()
        return ModelSpec(f"{self.name} without S[{k}]", self.dim, self.metric, self.roster,
                         sum(parts, self.roster.zero()), tuple(parts), self.kind)


def split_by_ghost_degree(roster: Roster, action: Polynomial, n=3):
    """S_[k]: the terms with k positive-ghost factors (counted with exponent)."""
    parts = [dict() for _ in range(n)]
    for m, c in action.terms.items():
        k = 0
        for i in range(0, len(m), 2):
            if roster.symbols[m[i] >> SHIFT].ghost > 0:
                k += m[i + 1]
        while k >= len(parts):
            parts.append({})
        parts[k][m] = c
    return tuple(Polynomial(roster, p) for p in parts)


def _matter_decls(d):
    decls = [FieldDecl(f"x{mu}", 0, EVEN) for mu in range(1, d + 1)]
    decls += [FieldDecl(f"theta{mu}", 0, ODD) for mu in range(1, d + 1)]
    decls += [FieldDecl(f"p{mu}", 0, EVEN) for mu in range(1, d + 1)]
    return decls


SUGRA_DECLS = [FieldDecl("e", 0, EVEN), FieldDecl("psi", 0, ODD),
               FieldDecl("c", 1, ODD), FieldDecl("gamma", 1, EVEN, invertible=True)]


def _metric(d, metric):
    if metric is None:
        return MetricSignature.euclidean(d)
    if isinstance(metric, str):
        return MetricSignature.parse(metric, d)
    if not isinstance(metric, MetricSignature):
        metric = MetricSignature(tuple(metric))
    if metric.d != d:
        raise ValueError(f"metric of length {metric.d} for d={d}")
    return metric


def build_free_spinning(d: int, metric=None) -> ModelSpec:
    """S = p.dx - 1/2 eta theta dtheta - 1/2 eta p p."""
    if d < 1:
        raise ValueError("the free model needs d >= 1; use the supergravity builder for d = 0")
    eta = _metric(d, metric)
    R = Roster(_matter_decls(d))
    S = R.zero()
    for mu in range(1, d + 1):
        x, th, p = R.var(f"x{mu}"), R.var(f"theta{mu}"), R.var(f"p{mu}")
        h = eta[mu - 1]
        S = S + p * x.dt() - (th * th.dt()).scale(HALF * h) - (p * p).scale(HALF * h)
    return ModelSpec(f"free d={d}", d, eta, R, S, (S, R.zero(), R.zero()), "free")


def build_sugra_spinning(d: int, metric=None) -> ModelSpec:
    """S = S[0] + S[1] + S[2] for the particle coupled to 1d supergravity."""
    if d < 0:
        raise ValueError("d must be non-negative")
    eta = _metric(d, metric)
    R = Roster(_matter_decls(d) + SUGRA_DECLS)
    v, a = R.var, (lambda n: R.var(f"anti({n})"))
    e, psi, c, gam = v("e"), v("psi"), v("c"), v("gamma")
    S0, ce, cg = R.zero(), a("e").dt(), a("psi").dt() + (a("e") * psi).scale(2)
    for mu in range(1, d + 1):
        x, th, p = v(f"x{mu}"), v(f"theta{mu}"), v(f"p{mu}")
        xa, tha = a(f"x{mu}"), a(f"theta{mu}")
        h = eta[mu - 1]
        S0 = (S0 + p * x.dt() - (th * th.dt()).scale(HALF * h)
              - (e * p * p).scale(HALF * h) + psi * p * th)
        ce = ce - (xa * p).scale(h)
        cg = cg + (tha * p).scale(h) - xa * th
    S1 = ce * c + cg * gam
    S2 = -(a("c") * gam * gam)
    S = S0 + S1 + S2
    name = f"sugra d={d}" + ("" if all(x > 0 for x in eta.entries) else f" metric={eta.text()}")
    return ModelSpec(name, d, eta, R, S, (S0, S1, S2), "sugra")


def parse_builtin(selector: str) -> ModelSpec:
    """``builtin:free:d=N`` or ``builtin:sugra:d=N[:metric=+-..]``."""
    parts = selector.split(":")
    if len(parts) < 3 or parts[0] != "builtin" or parts[1] not in ("free", "sugra"):
        raise ValueError(f"bad builtin selector {selector!r}")
    opts = {}
    for p in parts[2:]:
        if "=" not in p:
            raise ValueError(f"bad builtin option {p!r}")
        k, val = p.split("=", 1)
        opts[k] = val
    if "d" not in opts:
        raise ValueError("builtin selector needs d=N")
    unknown = set(opts) - {"d", "metric"}
    if unknown:
        raise ValueError(f"unknown builtin options {sorted(unknown)}")
    d = int(opts["d"])
    metric = opts.get("metric")
    if parts[1] == "free":
        return build_free_spinning(d, metric)
    return build_sugra_spinning(d, metric)


def _require_sugra(model, what):
    if not (model.has("e") and model.has("gamma") and model.has("c") and model.has("psi")):
        raise ValueError(f"{what} needs the supergravity model")


# ---------------------------------------------------------------------------
# general covariance

XI = "xi"


def with_xi(model: ModelSpec) -> Roster:
    """The roster extended by the auxiliary even ghost-0 generator xi."""
    if model.roster.has(XI):
        return model.roster
    return model.roster.extend([FieldDecl(XI, 0, EVEN, anti=False)])


def covariance_density(model: ModelSpec) -> Polynomial:
    """G = x+.p+ - 1/2 eta theta+ theta+ + c+ e + gamma+ psi."""
    _require_sugra(model, "G")
    R, a, v = model.roster, model.anti, model.var
    G = a("c") * v("e") + a("gamma") * v("psi")
    for mu in range(1, model.dim + 1):
        G = G + a(f"x{mu}") * a(f"p{mu}") - (a(f"theta{mu}") ** 2).scale(HALF * model.eta[mu - 1])
    del R
    return G


def covariance_display(model: ModelSpec, roster: Roster) -> Polynomial:
    """-xi (x+ dx + theta+ dtheta + p+ dp - de+ e + c+ dc - dpsi+ psi + gamma+ dgamma)."""
    v = roster.var
    a = lambda n: roster.var(f"anti({n})")
    inner = (-(a("e").dt() * v("e")) + a("c") * v("c").dt() - a("psi").dt() * v("psi")
             + a("gamma") * v("gamma").dt())
    for mu in range(1, model.dim + 1):
        inner = (inner + a(f"x{mu}") * v(f"x{mu}").dt() + a(f"theta{mu}") * v(f"theta{mu}").dt()
                 + a(f"p{mu}") * v(f"p{mu}").dt())
    return -(v(XI) * inner)


def reparametrization_field(model: ModelSpec, use_aux_xi: bool = True,
                            variant: str = "display") -> EvolutionaryField:
    """T(xi) written out field by field; ``use_aux_xi=False`` gives T(1).

    ``variant="hamiltonian"`` returns the field f -> {{S, xi G}, f} instead,
    computed from the action.
    """
    _require_sugra(model, "T(xi)")
    if variant == "hamiltonian":
        R = with_xi(model)
        S = model.action.lift(R)
        G = covariance_density(model).lift(R)
        xi = R.var(XI) if use_aux_xi else R.one()
        F = antibracket_density(S, xi * G)
        X = hamiltonian_field(F, "T(xi)")
        return X
    R = with_xi(model) if use_aux_xi else model.roster
    xi = R.var(XI) if use_aux_xi else R.one()
    dxi = xi.dt()
    d = model.dim
    names = ([f"x{mu}" for mu in range(1, d + 1)] + [f"theta{mu}" for mu in range(1, d + 1)]
             + [f"p{mu}" for mu in range(1, d + 1)])
    names_all = names + [f"anti({n})" for n in names]
    names_all += ["e", "psi", "anti(e)", "anti(psi)", "c", "gamma", "anti(c)", "anti(gamma)"]
    chars = {}
    for n in names_all:
        chars[R.symbol(n).id] = xi * R.var(n).dt()
    weighted = ["e", "psi"] + [f"anti(x{mu})" for mu in range(1, d + 1)]
    weighted += [f"anti(theta{mu})" for mu in range(1, d + 1)]
    weighted += [f"anti(p{mu})" for mu in range(1, d + 1)]
    for n in weighted:
        sid = R.symbol(n).id
        chars[sid] = chars[sid] - dxi * R.var(n)
    # the last two entries of the second bracket are written with derivatives
    for n in ("anti(c)", "anti(gamma)"):
        sid = R.symbol(n).id
        chars[sid] = chars[sid] - dxi * R.var(n).dt()
    return EvolutionaryField(R, chars, EVEN, 0, "T(xi)" if use_aux_xi else "T(1)")


def verify_covariance(model: ModelSpec) -> CheckReport:
    """{S, xi G} against the explicit covariance density, exactly."""
    R = with_xi(model)
    S = model.action.lift(R)
    G = covariance_density(model).lift(R)
    lhs = antibracket_density(S, R.var(XI) * G)
    rhs = covariance_display(model, R)
    diff = lhs - rhs
    rep = CheckReport("covariance {S, xi G}", diff.is_zero(), diff)
    rep.detail["{S, xi G}"] = lhs
    return rep


def topological_field(model: ModelSpec) -> EvolutionaryField:
    """g = p+ d/dx - x+ d/dp + eta theta+ d/dtheta + c+ d/de+ - e d/dc + gamma+ d/dpsi+ + psi d/dgamma."""
    _require_sugra(model, "g")
    R, v, a = model.roster, model.var, model.anti
    sid = lambda n: R.symbol(n).id
    chars = {sid("anti(e)"): a("c"), sid("c"): -v("e"),
             sid("anti(psi)"): a("gamma"), sid("gamma"): v("psi")}
    for mu in range(1, model.dim + 1):
        chars[sid(f"x{mu}")] = a(f"p{mu}")
        chars[sid(f"p{mu}")] = -a(f"x{mu}")
        chars[sid(f"theta{mu}")] = a(f"theta{mu}").scale(model.eta[mu - 1])
    return EvolutionaryField(R, chars, ODD, -1, "g")


def check_homotopy(model: ModelSpec) -> CheckReport:
    """[s, g] = d on every generator."""
    s = model.differential()
    g = topological_field(model)
    com = commutator(s, g)
    ok, diffs = fields_equal(com, derivative_field(model.roster))
    res = next(iter(diffs.values())) if diffs else model.roster.zero()
    rep = CheckReport("homotopy [s,g] = d", ok, res, detail={f"[s,g]({k}) - d({k})": v
                                                            for k, v in diffs.items()})
    return rep


# ---------------------------------------------------------------------------
# d = 0 cocycles

def named_cocycle(model: ModelSpec, kind: str, k: int) -> Polynomial:
    """A_k, B_k (localized), alpha_k, beta_k."""
    _require_sugra(model, "named cocycles")
    if kind in ("A", "alpha") and k < -1:
        raise ValueError(f"{kind}_k needs k >= -1")
    if kind in ("B", "beta") and k < 1:
        raise ValueError(f"{kind}_k needs k >= 1")
    R = model.roster
    pp, ea = model.anti("psi"), model.anti("e")
    c, gam = model.var("c"), model.var("gamma")
    if kind == "A":
        return pp ** (k + 1) * c * R.inv("gamma")
    if kind == "B":
        return (pp ** k * R.inv("gamma")).scale(Fraction(1, k))
    if kind == "alpha":
        first = (pp ** k * ea * c).scale(2 * (k + 1)) if k >= 0 else R.zero()
        return first + pp ** (k + 1) * gam
    if kind == "beta":
        return pp ** (k - 1) * ea
    raise ValueError(f"unknown cocycle kind {kind!r}")


def transgress(model: ModelSpec, a: Polynomial) -> Polynomial:
    """Apply g (alpha~_k = g(alpha_{k-1}) and the analogues)."""
    return prolong_apply(topological_field(model), a)


# ---------------------------------------------------------------------------
# d > 0 objects

def volume_form(model: ModelSpec) -> Polynomial:
    if model.dim < 1:
        raise ValueError("the volume form needs d >= 1")
    out = model.roster.one()
    for mu in range(1, model.dim + 1):
        out = out * model.var(f"theta{mu}")
    return out


def iota(model: ModelSpec, v, a: Polynomial) -> Polynomial:
    """iota(v) a = eta^{mu mu} v_mu d a / d theta^mu."""
    if len(v) != model.dim:
        raise ValueError(f"vector of length {len(v)} for d={model.dim}")
    out = model.roster.zero()
    for mu in range(1, model.dim + 1):
        vm = v[mu - 1]
        if not vm:
            continue
        out = out + (vm * a.partial(f"theta{mu}")).scale(model.eta[mu - 1])
    return out


def momentum(model: ModelSpec):
    return [model.var(f"p{mu}") for mu in range(1, model.dim + 1)]


def gradient(model: ModelSpec, f: Polynomial):
    return [f.partial(f"x{mu}") for mu in range(1, model.dim + 1)]


def check_in_O(model: ModelSpec, f: Polynomial):
    R = model.roster
    for m in f.terms:
        for i in range(0, len(m), 2):
            s = R.symbols[m[i] >> SHIFT]
            if (m[i] & ORDER_MASK) or not (s.name.startswith("x") and s.name[1:].isdigit()):
                raise ValueError("f must be a polynomial in the coordinates x only")


def matter_cocycle(model: ModelSpec, kind: str, k: int, f: Polynomial) -> Polynomial:
    """A_k(f), Z_k(f) and their differentials alpha_k(f), zeta_k(f)."""
    _require_sugra(model, "matter cocycles")
    if k < 0:
        raise ValueError("k must be >= 0")
    f = f if isinstance(f, Polynomial) else model.roster.const(f)
    check_in_O(model, f)
    R = model.roster
    pp, c, ginv = model.anti("psi"), model.var("c"), R.inv("gamma")
    Om = volume_form(model)
    if kind in ("A", "alpha"):
        val = pp ** (k + 1) * c * f * Om * ginv
    elif kind in ("Z", "zeta"):
        val = ((pp ** k * f * Om * ginv).scale(k + 1)
               + pp ** (k + 1) * c * iota(model, gradient(model, f), Om) * ginv)
    else:
        raise ValueError(f"unknown matter cocycle kind {kind!r}")
    if kind in ("alpha", "zeta"):
        val = prolong_apply(model.differential(), val)
        if val.is_localized():
            raise AssertionError(f"{kind}_{k}(f) still involves an inverse of gamma")
    return val


def xi_embed(model: ModelSpec, i: int, u) -> Polynomial:
    """xi^0(u) substitutes X, Theta, P by x, theta, p; xi^1(v) = gamma xi^0(v) + c xi^0(Qv)."""
    from .zeromode import q_apply_free, to_fields
    if i == 0:
        return to_fields(model, u)
    if i == 1:
        if u.gamma_degree() > 0:
            raise ValueError("xi^1 is defined on Gamma-free elements")
        return (model.var("gamma") * to_fields(model, u)
                + model.var("c") * to_fields(model, q_apply_free(u)))
    raise ValueError("i must be 0 or 1")


def builtin_selector(model: ModelSpec) -> str | None:
    if model.kind not in ("free", "sugra"):
        return None
    sel = f"builtin:{model.kind}:d={model.dim}"
    if any(e < 0 for e in model.metric.entries):
        sel += f":metric={model.metric.text()}"
    return sel

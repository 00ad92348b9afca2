"""Equivariance data for Fedosov connections.

* membership in the equivariance group ``G = {U : nabla(U^{-1}) U central}``
  and the D-map ``D g = g^{-1} nabla g`` (a closed central 1-form);
* explicit witnesses realizing prescribed D-values on flat tori;
* lifts ``A_gamma = Ad U o gamma^*`` obtained by solving a twisted flatness
  equation degree by degree;
* extension assignments for group actions, their cocycle residuals, and
  twisting by equivariance-group cocycles.

Pullback is contravariant: ``(mu gamma)^* = gamma^* mu^*`` where ``mu gamma``
acts on points as ``phi_mu o phi_gamma``.  Lifts therefore compose as
``U_{mu gamma} = U_gamma gamma^*(U_mu)`` up to central factors.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .basefunc import TORUS, BaseFunction
from .engine import ConsistencyError, FedosovConnection, build_fedosov, delta, delta_inv, sigma, tau
from .forms import ScalarForm, WeylForm, pullback_element
from .geometry import AffineSymplecto, UnsupportedOperationError
from .weyl import WeylElement, ad_over_ihbar, weyl_exp, weyl_inverse, weyl_log, weyl_mul


class ClassNotPreservedError(ValueError):
    pass


def _elem(U):
    return U.U if isinstance(U, GnablaElement) else U


def _noncentral_report(form_or_elem):
    """``(count, max |coef|, first term)`` over y-dependent monomials."""
    comps = form_or_elem.comps if isinstance(form_or_elem, WeylForm) else {(): form_or_elem}
    count = 0
    worst = 0.0
    first = None
    for I in sorted(comps):
        a = comps[I]
        for key in sorted(a.terms):
            if any(key[1]):
                c = a.terms[key]
                count += 1
                worst = max(worst, abs(complex(c)))
                if first is None:
                    first = {
                        "dx": list(I),
                        "k": key[0],
                        "alpha": list(key[1]),
                        "x": list(key[2]),
                        "coef": a.space.field.to_json(c),
                    }
    return count, worst, first


# membership and the D-map -------------------------------------------------

@dataclass(frozen=True)
class Rejection:
    """Non-membership certificate: the first y-dependent monomial of ``nabla(U^{-1}) U``."""

    first_noncentral: dict
    noncentral_terms: int
    residual_norm: float

    def __bool__(self):
        return False

    def to_json(self):
        return {
            "member": False,
            "first_noncentral_term": self.first_noncentral,
            "noncentral_terms": self.noncentral_terms,
            "residual_norm": self.residual_norm,
        }


class GnablaElement:
    """Certified member ``U`` with cached ``beta = U^{-1} nabla U`` (reliable through ``D - 2``)."""

    __slots__ = ("F", "U", "U_inv", "beta")

    def __init__(self, F, U, U_inv, beta):
        self.F = F
        self.U = U
        self.U_inv = U_inv
        self.beta = beta

    @property
    def D(self):
        return self.U.D

    def __mul__(self, other):
        return require_member(self.F, weyl_mul(self.U, _elem(other)))

    def inverse(self):
        return require_member(self.F, self.U_inv)

    def canonical(self):
        """Representative with the ``(hbar^0, y^0)`` base function divided out when it is a unit."""
        lead = self.U.constant_component()
        try:
            inv = lead.inverse()
        except ValueError:
            return self
        return require_member(self.F, self.U.mul_base(inv))

    def same_class(self, other):
        """Equality in the quotient by central invertibles: ``U^{-1} V`` is y-free."""
        q = weyl_mul(self.U_inv, _elem(other))
        return q.is_central() if q.field.exact else q.noncentral_part().negligible()

    def to_json(self):
        return {"member": True, "U": self.U.to_json(), "beta": self.beta.series_json()}


def gnabla_membership(F, U):
    """Return a :class:`GnablaElement` or a falsy :class:`Rejection`."""
    U = _elem(U)
    D = F.D
    U_inv = weyl_inverse(U)
    res = F.nabla(U_inv).mul_element(U, left=False).truncate(D - 2)
    count, worst, first = _noncentral_report(res)
    exact = U.field.exact
    if count and (exact or worst > U.field.eps):
        return Rejection(first, count, worst)
    beta = -res
    beta = ScalarForm._make(beta.space, {I: a.central_part() for I, a in beta.comps.items()}).restamp(D - 2)
    return GnablaElement(F, U, U_inv, beta)


def require_member(F, U):
    g = gnabla_membership(F, U)
    if not g:
        raise ValueError(f"element is not in the equivariance group: {g.to_json()}")
    return g


def dmap(g):
    """``D g = g^{-1} nabla g``, a closed central 1-form stamped at ``D - 2``."""
    if not isinstance(g, GnablaElement):
        raise TypeError("dmap needs a certified GnablaElement")
    return g.beta


def central_exp(F, alpha):
    """``exp(alpha)`` for a central ``alpha`` with no ``hbar^0`` part.

    Exponentials of ``hbar^0`` functions leave the base rings (except for
    Fourier characters, see :func:`central_character`), so they are refused.
    """
    if not isinstance(alpha, WeylElement):
        alpha = F.space.from_series([None] + list(alpha)) if isinstance(alpha, (list, tuple)) else alpha
    if not alpha.is_central():
        raise ValueError("central_exp needs a y-free argument")
    if any(k == 0 for (k, _a, _x) in alpha.terms):
        raise ValueError("central_exp needs alpha = O(hbar); use central_character for exp(i m.x)")
    return weyl_exp(alpha)


def central_character(F, m):
    """The torus unit ``exp(i m.x)`` as a central section; its D-value is ``i m.dx``."""
    if F.manifold.kind != TORUS:
        raise UnsupportedOperationError("Fourier characters live on the torus")
    return F.space.from_base(BaseFunction.fourier_mode(m, 1, F.field))


# witnesses --------------------------------------------------------------

def _flat_torus_data(F):
    if F.manifold.kind != TORUS:
        raise UnsupportedOperationError("harmonic witnesses are implemented on the torus only")
    if not F.connection.is_zero():
        raise UnsupportedOperationError("harmonic witnesses need the flat connection Gamma = 0")
    zero = (0,) * F.space.dim
    for a in F.theta.comps.values():
        if any(x != zero for (_k, _al, x) in a.terms):
            raise UnsupportedOperationError("harmonic witnesses need theta with constant coefficients")


def harmonic_witness(F, c):
    """``g = exp(a.y)`` with constant coefficients and ``D g = sum c_i dx^i``.

    The linear coefficients ``a`` (hbar-series constants) start at ``-c`` and
    are corrected by the D-residual; each sweep gains one hbar order.
    """
    _flat_torus_data(F)
    space = F.space
    f = space.field
    dim = space.dim
    c = [f.coerce(x) for x in c]
    if len(c) != dim:
        raise ValueError(f"covector needs {dim} entries")
    if all(f.is_zero(x) for x in c):
        return require_member(F, space.one())
    target = ScalarForm._make(space, {(i,): space.scalar(c[i]) for i in range(dim)}).restamp(F.D - 2)
    coeffs = [space.scalar(-x) for x in c]
    for _ in range(F.D + 2):
        L = space.zero()
        for j, a in enumerate(coeffs):
            L = L + weyl_mul(a, space.y(j))
        g = require_member(F, weyl_exp(L))
        res = g.beta - target
        if res.is_zero() or (not f.exact and res.negligible()):
            return g
        coeffs = [coeffs[j] + _respace(res.component((j,)), space) for j in range(dim)]
    raise ConsistencyError(f"harmonic witness did not converge; residual {res!r}")


def _respace(a, space):
    return WeylElement(space, a.terms)


# lifts --------------------------------------------------------------------

def _pullback_r(F, phi):
    return F.r.pullback(phi.A, phi.translation_for(F.field))


@dataclass
class Lift:
    """``U`` with ``Ad U o gamma^*`` mapping flat sections of the source to flat sections of ``F``."""

    F: FedosovConnection
    source: FedosovConnection
    gamma: AffineSymplecto
    U: WeylElement
    U_inv: WeylElement
    kappa: ScalarForm
    iterations: int

    @property
    def Phi(self):
        return weyl_log(self.U)

    def apply_section(self, s):
        """``U gamma^*(s) U^{-1}`` for a section ``s`` of the source."""
        moved = pullback_element(s, self.gamma.A, self.gamma.translation_for(s.field))
        return weyl_mul(weyl_mul(self.U, moved), self.U_inv)

    def apply(self, f):
        """Induced algebra map on functions: ``sigma(U gamma^*(tau_src f) U^{-1})``."""
        return sigma(self.apply_section(tau(self.source, f)), self.F.N)


def _twisted_step(F, r_src_over, kappa, U):
    """``(nabla0 + (L_r - R_r')/(i hbar) - kappa) U`` as a 1-form."""
    s = WeylForm.from_element(U)
    out = F.nabla0(s)
    space = U.space
    comps = dict(out.comps)
    for (i,), ri in F.r.comps.items():
        term = ad_over_ihbar(ri, U)
        comps[(i,)] = comps[(i,)] + term if (i,) in comps else term
    for (i,), di in r_src_over.comps.items():
        term = weyl_mul(U, di)
        comps[(i,)] = comps[(i,)] + term if (i,) in comps else term
    for (i,), ki in kappa.comps.items():
        term = -weyl_mul(ki, U)
        comps[(i,)] = comps[(i,)] + term if (i,) in comps else term
    return WeylForm._make(space, comps)


def solve_lift(F, gamma, primitive=None, source=None, *, headroom=2):
    """Solve ``-delta U + nabla0 U + (r U - U r')/(i hbar) = kappa U`` with ``sigma(U) = 1``.

    ``r'`` is the pulled-back ``gamma^* r`` of the source connection (``F``
    itself by default) and ``kappa = -primitive`` where
    ``gamma^* theta_source - theta = d(primitive)``.  The connections are
    rebuilt with ``headroom`` extra degrees so that ``U`` is exact through
    ``D``.  Only maps preserving the symplectic connection are supported.
    """
    src = source if source is not None else F
    if src.manifold != F.manifold:
        raise ValueError("source and target live on different manifolds")
    if src.D != F.D or src.field != F.field:
        raise ValueError("source and target must share truncation and scalars")
    phi = gamma
    if src.connection.pullback(phi) != F.connection:
        raise UnsupportedOperationError("lifts are implemented for maps that preserve the symplectic connection")
    space = F.space
    theta_src = src.theta.pullback(phi.A, phi.translation_for(F.field))
    diff = theta_src - F.theta
    if primitive is None:
        if not diff.is_zero():
            raise ClassNotPreservedError("gamma^* theta differs from theta and no primitive was supplied")
        eta = ScalarForm.zero(space)
    else:
        eta = ScalarForm.coerce(primitive)
        if eta.space != space:
            eta = ScalarForm._make(space, {I: _respace(a, space) for I, a in eta.comps.items()})
        if eta.d() != diff:
            raise ClassNotPreservedError("d(primitive) does not equal gamma^* theta_source - theta")
    D = F.D
    Dx = D + headroom
    Fx = build_fedosov(F.manifold, F.connection, F.theta.restamp(Dx), Dx, F.field)
    Sx = build_fedosov(src.manifold, src.connection, src.theta.restamp(Dx), Dx, F.field)
    spx = Fx.space
    r_src = Sx.r.pullback(phi.A, phi.translation_for(F.field))
    f = F.field
    diff_r = (Fx.r - r_src).map(lambda a: a.divide_hbar(1).scale(f.one / f.i))
    kappa = (-eta).restamp(Dx)
    one = spx.one()
    # the equation is linear in U: sum the Neumann series increment by increment
    U = one
    inc = one
    iterations = 0
    for iterations in range(1, Dx + 3):
        inc = delta_inv(_twisted_step(Fx, diff_r, kappa, inc)).component(())
        if inc.is_zero():
            break
        U = U + inc
    else:
        raise ConsistencyError("lift iteration did not reach a fixed point")
    # certify: -delta U + twisted part vanishes through the reliable degrees
    residual = (_twisted_step(Fx, diff_r, kappa, U) - delta(U)).truncate(Dx - 2)
    if not (residual.is_zero() if f.exact else residual.negligible()):
        raise ConsistencyError(f"lift residual does not vanish: {residual!r}")
    U = U.restamp(D)
    return Lift(F, src, gamma, U, weyl_inverse(U), kappa.restamp(D), iterations)


def solve_gauge(F, F_other, primitive):
    """Intertwiner from the star product of ``F_other`` to that of ``F`` (same connection)."""
    ident = AffineSymplecto.identity(F.manifold, F.field)
    return solve_lift(F, ident, primitive, source=F_other)


# extension assignments ----------------------------------------------------

@dataclass
class CocycleReport:
    checked: int
    residuals: list = dc_field(default_factory=list)

    @property
    def ok(self):
        return not self.residuals

    def to_json(self):
        return {"checked": self.checked, "ok": self.ok, "residuals": self.residuals}


class ExtensionAssignment:
    """Lifts ``U_g`` for a group action, defining ``A_g = Ad U_g o g^*``.

    For finite groups the values on generators are extended to all elements
    along breadth-first words by ``U_{mu gamma} = U_gamma gamma^*(U_mu)``
    unless a full table is supplied.  For ``Z^k`` only generators are stored.
    """

    def __init__(self, F, action, generator_values=None, element_values=None):
        self.F = F
        self.action = action
        space = F.space
        if element_values is not None:
            if not action.is_finite:
                raise ValueError("element tables are only meaningful for finite groups")
            self.values = {g: _elem(u) for g, u in element_values.items()}
            self.generator_values = [self.values[action.generator(i)] for i in range(len(action.generators))]
        else:
            gens = [_elem(u) for u in generator_values]
            if len(gens) != len(action.generators):
                raise ValueError("one value per generator is required")
            for u in gens:
                space.check(u.space)
            self.generator_values = gens
            self.values = self._extend(gens) if action.is_finite else None

    def _extend(self, gens):
        act = self.action
        values = {act.identity: self.F.space.one()}
        for e in sorted(act.elements(), key=lambda e: len(act.word(e))):
            w = act.word(e)
            if not w:
                continue
            rest = _word_element(act, w[1:])
            # e = mu * rest with mu the generator w[0], so U_e = U_rest rest^*(U_mu)
            values[e] = weyl_mul(values[rest], self.pull(rest, gens[w[0]]))
        return values

    def pull(self, g, a):
        phi = self.action.element_map(g)
        return pullback_element(a, phi.A, phi.translation_for(a.field))

    def value(self, g):
        act = self.action
        if act.is_finite:
            return self.values[g]
        idx = [i for i, e in enumerate(g) if e]
        if len(idx) == 1 and g[idx[0]] == 1:
            return self.generator_values[idx[0]]
        if not idx:
            return self.F.space.one()
        raise UnsupportedOperationError("Z^k assignments are evaluated on generators only")

    def apply(self, g, s):
        """``A_g(s) = U_g g^*(s) U_g^{-1}``."""
        U = self.value(g)
        return weyl_mul(weyl_mul(U, self.pull(g, s)), weyl_inverse(U))

    def flat_preserving(self, test_functions):
        """Whether every generator maps flat test sections to flat sections."""
        F = self.F
        act = self.action
        for i in range(len(act.generators)):
            g = act.generator(i)
            for fn in test_functions:
                s = self.apply(g, tau(F, fn))
                if not _is_flat(F, s):
                    return False
        return True

    def to_json(self):
        act = self.action
        if act.is_finite:
            table = [{"element": g, "word": list(act.word(g)), "U": self.values[g].to_json()} for g in act.elements()]
        else:
            table = [{"generator": i, "U": u.to_json()} for i, u in enumerate(self.generator_values)]
        return {"action": act.to_json(), "U": table}


def _word_element(act, word):
    e = act.identity
    for gi in reversed(word):
        e = act.mul(act.generator(gi), e)
    return e


def _is_flat(F, s):
    res = F.nabla(s).truncate(F.D - 2)
    return res.is_zero() if F.field.exact else res.negligible()


def _relation_residual(E, mu, gamma, values_fn):
    """``U_gamma gamma^*(U_mu) U_{mu gamma}^{-1}`` (finite) or the commutator defect (``Z^k``)."""
    act = E.action
    if act.is_finite:
        lhs = weyl_mul(values_fn(gamma), E.pull(gamma, values_fn(mu)))
        return weyl_mul(lhs, weyl_inverse(values_fn(act.mul(mu, gamma))))
    a = weyl_mul(values_fn(gamma), E.pull(gamma, values_fn(mu)))
    b = weyl_mul(values_fn(mu), E.pull(mu, values_fn(gamma)))
    return weyl_mul(a, weyl_inverse(b))


def _report(E, values_fn):
    act = E.action
    pairs = act.relations()
    report = CocycleReport(checked=len(pairs))
    for mu, gamma in pairs:
        R = _relation_residual(E, mu, gamma, values_fn)
        count, worst, first = _noncentral_report(R)
        if count and (R.field.exact or worst > R.field.eps):
            report.residuals.append(
                {
                    "relation": [_label(mu), _label(gamma)],
                    "residual_norm": worst,
                    "noncentral_terms": count,
                    "first_noncentral_term": first,
                }
            )
    return report


def _label(g):
    return list(g) if isinstance(g, tuple) else g


def check_cocycle(E):
    """Non-central relation residuals of ``E``; an empty list means ``A`` is a homomorphism."""
    return _report(E, E.value)


class GnablaCocycle:
    """Values ``S_g`` for twisting an extension assignment ``E``."""

    def __init__(self, E, generator_values=None, element_values=None):
        self.E = E
        act = E.action
        if element_values is not None:
            self.values = {g: _elem(s) for g, s in element_values.items()}
            self.generator_values = [self.values[act.generator(i)] for i in range(len(act.generators))]
        else:
            self.generator_values = [_elem(s) for s in generator_values]
            if act.is_finite:
                self.values = {act.identity: E.F.space.one()}
                for e in sorted(act.elements(), key=lambda e: len(act.word(e))):
                    w = act.word(e)
                    if not w:
                        continue
                    rest = _word_element(act, w[1:])
                    # S_{mu rest} = S_rest A_rest(S_mu)
                    self.values[e] = weyl_mul(self.values[rest], E.apply(rest, self.generator_values[w[0]]))
            else:
                self.values = None

    def value(self, g):
        act = self.E.action
        if act.is_finite:
            return self.values[g]
        idx = [i for i, e in enumerate(g) if e]
        if not idx:
            return self.E.F.space.one()
        if len(idx) == 1 and g[idx[0]] == 1:
            return self.generator_values[idx[0]]
        raise UnsupportedOperationError("Z^k cocycles are evaluated on generators only")

    def check(self):
        """Residuals ``S_gamma A_gamma(S_mu) S_{mu gamma}^{-1}`` (commutator defects for ``Z^k``)."""
        E = self.E
        act = E.action
        pairs = act.relations()
        report = CocycleReport(checked=len(pairs))
        for mu, gamma in pairs:
            if act.is_finite:
                R = weyl_mul(
                    weyl_mul(self.value(gamma), E.apply(gamma, self.value(mu))),
                    weyl_inverse(self.value(act.mul(mu, gamma))),
                )
            else:
                a = weyl_mul(self.value(gamma), E.apply(gamma, self.value(mu)))
                b = weyl_mul(self.value(mu), E.apply(mu, self.value(gamma)))
                R = weyl_mul(a, weyl_inverse(b))
            count, worst, first = _noncentral_report(R)
            if count and (R.field.exact or worst > R.field.eps):
                report.residuals.append(
                    {"relation": [_label(mu), _label(gamma)], "residual_norm": worst, "first_noncentral_term": first}
                )
        return report

    @classmethod
    def coboundary(cls, E, C):
        """``S_g = C A_g(C^{-1})``, twisting ``E`` into its conjugate by ``Ad C``."""
        C = _elem(C)
        Ci = weyl_inverse(C)
        act = E.action
        if act.is_finite:
            vals = {g: weyl_mul(C, E.apply(g, Ci)) for g in act.elements()}
            return cls(E, element_values=vals)
        gens = [weyl_mul(C, E.apply(act.generator(i), Ci)) for i in range(len(act.generators))]
        return cls(E, generator_values=gens)


def twist_action(S, E):
    """``B_g = Ad S_g o A_g``, i.e. ``U'_g = S_g U_g``; refuses cocycles that fail their own check."""
    if S.E is not E:
        raise ValueError("cocycle was built for a different extension assignment")
    own = S.check()
    if not own.ok:
        raise ValueError(f"twisting data is not a cocycle: {own.residuals[0]}")
    act = E.action
    if act.is_finite:
        vals = {g: weyl_mul(S.value(g), E.value(g)) for g in act.elements()}
        return ExtensionAssignment(E.F, act, element_values=vals)
    gens = [weyl_mul(S.generator_values[i], E.generator_values[i]) for i in range(len(act.generators))]
    return ExtensionAssignment(E.F, act, generator_values=gens)


def lift_extension(F, action, primitives=None):
    """Extension assignment from :func:`solve_lift` on every generator."""
    primitives = primitives or [None] * len(action.generators)
    gens = [solve_lift(F, g, p).U for g, p in zip(action.generators, primitives)]
    return ExtensionAssignment(F, action, generator_values=gens)


__all__ = [
    "ClassNotPreservedError",
    "CocycleReport",
    "ConsistencyError",
    "ExtensionAssignment",
    "GnablaCocycle",
    "GnablaElement",
    "Lift",
    "Rejection",
    "central_character",
    "central_exp",
    "check_cocycle",
    "dmap",
    "gnabla_membership",
    "harmonic_witness",
    "lift_extension",
    "require_member",
    "solve_gauge",
    "solve_lift",
    "twist_action",
]

"""Cohomological invariants at desk scale.

Simplicial cohomology of small complexes (integer invariant factors via
sympy's Smith normal form), periods of closed central 1-forms on the torus,
the torus invariant in ``H^1(C)/H^1(Z) + hbar H^1[[hbar]]``, separating
invariants for ``Z``-cocycles, and the connecting map of a central extension
into degree-two group cohomology.

Periods are reported divided by ``2 pi``: for a closed form ``beta`` on
``T^{2n}`` with ``2 pi``-periodic coordinates the period over the ``i``-th
coordinate circle is ``2 pi`` times the constant Fourier coefficient of the
``dx^i`` part, so integral classes are exactly those whose reported value
lies in ``i Z``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from .basefunc import EUCLIDEAN, TORUS
from .engine import tau
from .equivariance import GnablaElement, dmap
from .forms import ScalarForm, pullback_element
from .geometry import UnsupportedOperationError
from .series import HbarSeries
from .weyl import WeylElement, weyl_inverse, weyl_mul


class ComplexError(ValueError):
    pass


# simplicial complexes ----------------------------------------------------

class SimplicialComplex:
    """Vertices ``0..n-1`` and sorted simplices of dimension at most 2."""

    def __init__(self, n_vertices, simplices):
        self.n_vertices = n_vertices
        faces = {0: set(), 1: set(), 2: set()}
        for s in simplices:
            s = tuple(sorted(s))
            if len(set(s)) != len(s):
                raise ComplexError(f"simplex {s} repeats a vertex")
            if not 1 <= len(s) <= 3:
                raise ComplexError(f"simplex {s} has unsupported dimension")
            if any(v < 0 or v >= n_vertices for v in s):
                raise ComplexError(f"simplex {s} uses a vertex outside 0..{n_vertices - 1}")
            for r in range(1, len(s) + 1):
                for face in combinations(s, r):
                    faces[r - 1].add(face)
        for v in range(n_vertices):
            faces[0].add((v,))
        self.simplices = {p: sorted(faces[p]) for p in faces}

    @classmethod
    def from_lists(cls, n_vertices, per_dim):
        """Strict constructor: every face of every listed simplex must be listed too."""
        listed = {tuple(sorted(s)) for ss in per_dim for s in ss}
        for s in listed:
            for r in range(1, len(s)):
                for face in combinations(s, r):
                    if face not in listed and r > 1:
                        raise ComplexError(f"face {face} of {s} is missing")
        return cls(n_vertices, listed)

    @classmethod
    def tetrahedron_boundary(cls):
        """Nerve of a good cover of the 2-sphere."""
        return cls(4, list(combinations(range(4), 3)))

    @classmethod
    def torus7(cls):
        """Seven-vertex triangulation of the 2-torus."""
        tris = []
        for i in range(7):
            tris.append((i, (i + 1) % 7, (i + 3) % 7))
            tris.append((i, (i + 2) % 7, (i + 3) % 7))
        return cls(7, tris)

    def count(self, p):
        return len(self.simplices.get(p, []))

    def euler_characteristic(self):
        return sum((-1) ** p * self.count(p) for p in range(3))

    def coboundary(self, p):
        """Integer matrix of ``C^p -> C^{p+1}``: ``(dc)(s) = sum_i (-1)^i c(s minus vertex i)``."""
        rows = self.simplices.get(p + 1, [])
        cols = self.simplices.get(p, [])
        index = {s: j for j, s in enumerate(cols)}
        m = [[0] * len(cols) for _ in rows]
        for r, s in enumerate(rows):
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                m[r][index[face]] += -1 if i % 2 else 1
        return Matrix(len(rows), len(cols), [x for row in m for x in row])

    def to_json(self):
        return {"n_vertices": self.n_vertices, "simplices": {str(p): [list(s) for s in v] for p, v in self.simplices.items()}}


@dataclass
class CohomologyReport:
    coefficients: str
    ranks: list
    torsion: list

    def to_json(self):
        return {"coefficients": self.coefficients, "degrees": [
            {"degree": p, "rank": self.ranks[p], "torsion": self.torsion[p]} for p in range(len(self.ranks))
        ]}


def _factors(m):
    if m.rows == 0 or m.cols == 0:
        return []
    return [abs(int(x)) for x in invariant_factors(m, domain=ZZ) if x != 0]


def simplicial_cohomology(K, coeff="Z"):
    """Ranks (and torsion for integer coefficients) of ``H^0..H^2``."""
    if coeff not in ("Z", "C"):
        raise ValueError("coefficients must be 'Z' or 'C'")
    facs = [_factors(K.coboundary(p)) for p in range(2)]
    ranks = [len(f) for f in facs] + [0]
    out_r, out_t = [], []
    for p in range(3):
        prev = ranks[p - 1] if p > 0 else 0
        out_r.append(K.count(p) - ranks[p] - prev)
        if coeff == "Z" and p > 0:
            out_t.append(sorted(d for d in facs[p - 1] if d > 1))
        else:
            out_t.append([])
    return CohomologyReport(coeff, out_r, out_t)


# periods ---------------------------------------------------------------

@dataclass
class PeriodReport:
    """``values[k][i]`` is the ``hbar^k`` period over the ``i``-th circle divided by ``2 pi``."""

    values: list
    integral: bool
    field: object

    def to_json(self):
        f = self.field
        return {
            "periods_over_2pi": [[f.to_json(v) for v in row] for row in self.values],
            "integral": self.integral,
        }


def _is_in_iZ(v, field):
    if field.exact:
        return v.re == 0 and v.im.denominator == 1
    return abs(v.real) <= field.eps and abs(v.imag - round(v.imag)) <= field.eps


def period_map(beta, N=None):
    """Periods of a closed central 1-form series on the torus."""
    space = beta.space
    if space.ring != TORUS:
        raise UnsupportedOperationError("periods are computed on the torus")
    if not isinstance(beta, ScalarForm):
        beta = ScalarForm.coerce(beta)
    if any(len(I) != 1 for I in beta.comps):
        raise ValueError("period_map needs a 1-form")
    if not beta.d().is_zero():
        raise ValueError("period_map needs a closed form")
    f = space.field
    N = space.D // 2 if N is None else N
    zero = (0,) * space.dim
    values = [[f.zero] * space.dim for _ in range(N + 1)]
    for (i,), a in beta.comps.items():
        for (k, _alpha, x), c in a.terms.items():
            if x == zero and k <= N:
                values[k][i] = c
    integral = all(_is_in_iZ(v, f) for v in values[0])
    return PeriodReport(values, integral, f)


def _reduce_mod_iZ(v, field):
    if field.exact:
        im = v.im - (v.im.numerator // v.im.denominator)
        return type(v)(v.re, im)
    im = v.imag - (v.imag // 1)
    if abs(im - 1) <= field.eps or abs(im) <= field.eps:
        im = 0.0
    return complex(v.real, im)


@dataclass(frozen=True)
class T1Class:
    """Periods at ``hbar^0`` modulo ``i Z`` and verbatim periods at higher orders."""

    leading: tuple
    tail: tuple

    def is_zero(self):
        return all(not v for v in self.leading) and all(not v for row in self.tail for v in row)

    def to_json(self, field):
        return {
            "leading_mod_iZ": [field.to_json(v) for v in self.leading],
            "tail": [[field.to_json(v) for v in row] for row in self.tail],
        }


def t1_class(g):
    """Class of a member in ``H^1(T, C)/H^1(T, Z) + hbar H^1(T)[[hbar]]`` via the periods of its D-value."""
    if not isinstance(g, GnablaElement):
        raise TypeError("t1_class needs a certified GnablaElement")
    rep = period_map(dmap(g))
    f = rep.field
    lead = tuple(_reduce_mod_iZ(v, f) for v in rep.values[0])
    tail = tuple(tuple(row) for row in rep.values[1:])
    if not f.exact:
        lead = tuple(0j if abs(v) <= f.eps else v for v in lead)
        tail = tuple(tuple(0j if abs(v) <= f.eps else v for v in row) for row in tail)
    return T1Class(lead, tail)


def t1_report(manifold, N):
    """Ranks in ``H^1(C)/H^1(Z) + hbar H^1[[hbar]]`` through ``hbar^N``."""
    if manifold.kind == EUCLIDEAN:
        h1 = 0
    elif manifold.n == 1:
        h1 = simplicial_cohomology(SimplicialComplex.torus7(), "C").ranks[1]
    else:
        h1 = manifold.dim
    return {"h1_complex_rank": h1, "h1_integral_lattice_rank": h1, "hbar_tail_ranks": [h1] * N}


# fixed points and Z-cocycles ----------------------------------------------

def _leading_value(g, point):
    if isinstance(g, GnablaElement):
        g = g.U
    if isinstance(g, WeylElement):
        return g.component(0).evaluate(point)
    if isinstance(g, HbarSeries):
        return g[0].evaluate(point)
    return g.evaluate(point)


def fixed_point_invariant(act, g, point):
    """``hbar^0`` value of ``g`` at a fixed point of the generator; a unit scalar."""
    if act.is_finite or act.rank != 1:
        raise UnsupportedOperationError("fixed-point invariants are defined for Z-actions")
    phi = act.generators[0]
    if not phi.fixes(point):
        raise ValueError(f"point {point} is not fixed by the generator")
    v = _leading_value(g, point)
    if act.field.is_zero(v):
        raise ValueError("leading value vanishes: g is not invertible")
    return v


def twisted_conjugate(F, act, g, b):
    """``gamma^*(b) g b^{-1}`` computed on flat sections; returns the section."""
    phi = act.generators[0]
    gs = g.U if isinstance(g, GnablaElement) else (g if isinstance(g, WeylElement) else tau(F, g))
    bs = b.U if isinstance(b, GnablaElement) else (b if isinstance(b, WeylElement) else tau(F, b))
    moved = pullback_element(bs, phi.A, phi.translation_for(F.field))
    return weyl_mul(weyl_mul(moved, gs), weyl_inverse(bs))


def z_h1_invariants(F, act, g, point=None):
    """Separating report for a class in ``H^1(Z, G)``; equal reports are inconclusive."""
    if act.is_finite or act.rank != 1:
        raise UnsupportedOperationError("z_h1_invariants needs a Z-action")
    f = F.field
    report = {}
    if F.manifold.kind == TORUS:
        report["t1"] = t1_class(g).to_json(f)
    if point is not None:
        report["fixed_point_value"] = f.to_json(fixed_point_invariant(act, g, point))
    return report


# central extensions and the connecting map -------------------------------

class FiniteGroup:
    """Group given by an element list and a multiplication callable."""

    def __init__(self, elements, mul, identity=None):
        self.elements = list(elements)
        self.mul = mul
        if identity is None:
            identity = next(e for e in self.elements if all(mul(e, x) == x for x in self.elements))
        self.identity = identity

    def inverse(self, a):
        return next(b for b in self.elements if self.mul(a, b) == self.identity)

    @classmethod
    def cyclic(cls, n):
        return cls(range(n), lambda a, b: (a + b) % n, 0)


class InfiniteCyclic:
    """``Z`` with generator ``1``; the cocycle rule extends any value on the generator."""

    identity = 0

    def mul(self, a, b):
        return a + b


class CentralExtensionError(ValueError):
    pass


class CentralExtension:
    """``1 -> A -> E -> G -> 1`` with compatible actions of ``Gamma``.

    ``act_E(gamma, e)`` and ``act_G(gamma, g)`` are left actions by
    automorphisms; ``A = ker(pi)`` must be central in ``E``.
    """

    def __init__(self, Gamma, E, G, pi, act_E=None, act_G=None, section=None):
        self.Gamma = Gamma
        self.E = E
        self.G = G
        self.pi = pi
        self.act_E = act_E or (lambda gamma, e: e)
        self.act_G = act_G or (lambda gamma, g: g)
        self.A = [e for e in E.elements if pi(e) == G.identity]
        if section is None:
            table = {}
            for e in E.elements:
                table.setdefault(pi(e), e)
            section = table.__getitem__
        self.section = section
        self._check()

    def _check(self):
        E, G = self.E, self.G
        for a, b in product(E.elements, repeat=2):
            if self.pi(E.mul(a, b)) != G.mul(self.pi(a), self.pi(b)):
                raise CentralExtensionError("projection is not a homomorphism")
        for a in self.A:
            for e in E.elements:
                if E.mul(a, e) != E.mul(e, a):
                    raise CentralExtensionError(f"kernel element {a} is not central")
        gammas = self.Gamma.elements if isinstance(self.Gamma, FiniteGroup) else [1, -1]
        for gamma in gammas:
            for e in E.elements:
                if self.pi(self.act_E(gamma, e)) != self.act_G(gamma, self.pi(e)):
                    raise CentralExtensionError("actions are not compatible with the projection")


@dataclass
class ConnectingResult:
    cocycle: dict
    trivial: bool
    witness: dict | None
    identity_ok: bool
    relift_consistent: bool

    def to_json(self):
        return {
            "cocycle": [{"gamma": str(k[0]), "mu": str(k[1]), "value": str(v)} for k, v in sorted(self.cocycle.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))],
            "trivial": self.trivial,
            "coboundary_witness": None if self.witness is None else {str(k): str(v) for k, v in sorted(self.witness.items(), key=lambda kv: str(kv[0]))},
            "cocycle_identity": self.identity_ok,
            "relift_consistent": self.relift_consistent,
        }


def _delta_lift(ext, lift):
    Gm, E = ext.Gamma, ext.E
    out = {}
    for g, m in product(Gm.elements, repeat=2):
        v = E.mul(E.mul(lift[g], ext.act_E(g, lift[m])), E.inverse(lift[Gm.mul(g, m)]))
        out[(g, m)] = v
    return out


def _cocycle_identity(ext, a):
    """``gamma(a_{mu,nu}) a_{gamma,mu nu} = a_{gamma mu,nu} a_{gamma,mu}``."""
    Gm, E = ext.Gamma, ext.E
    for g, m, n in product(Gm.elements, repeat=3):
        lhs = E.mul(ext.act_E(g, a[(m, n)]), a[(g, Gm.mul(m, n))])
        rhs = E.mul(a[(Gm.mul(g, m), n)], a[(g, m)])
        if lhs != rhs:
            return False
    return True


def _find_coboundary(ext, a, cap=1 << 20):
    """Search ``b: Gamma -> A`` with ``a = delta b``; exhaustive over ``A^Gamma``."""
    Gm, E = ext.Gamma, ext.E
    gammas = Gm.elements
    if len(ext.A) ** len(gammas) > cap:
        raise UnsupportedOperationError("coboundary search space too large")
    for values in product(ext.A, repeat=len(gammas)):
        b = dict(zip(gammas, values))
        if all(
            E.mul(E.mul(b[g], ext.act_E(g, b[m])), E.inverse(b[Gm.mul(g, m)])) == a[(g, m)]
            for g, m in product(gammas, repeat=2)
        ):
            return b
    return None


def _check_one_cocycle(ext, eta):
    Gm, G = ext.Gamma, ext.G
    for g, m in product(Gm.elements, repeat=2):
        if eta[Gm.mul(g, m)] != G.mul(eta[g], ext.act_G(g, eta[m])):
            raise ValueError(f"eta is not a 1-cocycle at ({g}, {m})")


def connecting_map_H2(ext, eta, lift=None):
    """Class of ``a = delta E`` for a lift ``E`` of the 1-cocycle ``eta``.

    For ``Gamma = Z`` the lift is extended from the generator by the cocycle
    rule, which makes ``a`` vanish identically; ``eta`` is then the value on
    the generator.
    """
    if isinstance(ext.Gamma, InfiniteCyclic):
        return _connecting_Z(ext, eta, lift)
    _check_one_cocycle(ext, eta)
    if lift is None:
        lift = {g: ext.section(eta[g]) for g in ext.Gamma.elements}
    for g in ext.Gamma.elements:
        if ext.pi(lift[g]) != eta[g]:
            raise ValueError(f"lift does not project to eta at {g}")
    a = _delta_lift(ext, lift)
    for v in a.values():
        if ext.pi(v) != ext.G.identity:
            raise CentralExtensionError("delta of the lift leaves the kernel")
    identity_ok = _cocycle_identity(ext, a)
    witness = _find_coboundary(ext, a)
    # re-lift by kernel elements: the difference of the two cocycles must be a coboundary
    kernel = ext.A
    relift = {g: ext.E.mul(lift[g], kernel[i % len(kernel)]) for i, g in enumerate(ext.Gamma.elements)}
    a2 = _delta_lift(ext, relift)
    diff = {k: ext.E.mul(a2[k], ext.E.inverse(a[k])) for k in a}
    consistent = _find_coboundary(ext, diff) is not None
    return ConnectingResult(a, witness is not None, witness, identity_ok, consistent)


def _connecting_Z(ext, eta_gen, lift_gen=None, window=3):
    E = ext.E
    e1 = lift_gen if lift_gen is not None else ext.section(eta_gen)
    if ext.pi(e1) != eta_gen:
        raise ValueError("lift does not project to eta on the generator")

    def lift(n):
        # E_n = E_1 gamma(E_1) ... gamma^{n-1}(E_1); negative n through E_{-n} = gamma^{-n}(E_n)^{-1}
        if n >= 0:
            out = E.identity
            for j in range(n):
                out = E.mul(out, _act_power(ext, j, e1))
            return out
        return E.inverse(_act_power(ext, n, lift(-n)))

    a = {}
    for g in range(-window, window + 1):
        for m in range(-window, window + 1):
            a[(g, m)] = E.mul(E.mul(lift(g), _act_power(ext, g, lift(m))), E.inverse(lift(g + m)))
    trivial = all(v == E.identity for v in a.values())
    return ConnectingResult(a, trivial, {g: E.identity for g in range(-window, window + 1)} if trivial else None, True, True)


def _act_power(ext, n, e):
    step = 1 if n >= 0 else -1
    for _ in range(abs(n)):
        e = ext.act_E(step, e)
    return e


def toy_z4_extension():
    """``Z/2 -> Z/4 -> Z/2`` with the trivial action of ``Gamma = Z/2``."""
    Z4 = FiniteGroup.cyclic(4)
    Z2 = FiniteGroup.cyclic(2)
    return CentralExtension(Z2, Z4, Z2, lambda e: e % 2, section=lambda g: g)

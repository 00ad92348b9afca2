"""Fedosov connections, flat sections and the star product.

Conventions (all fixed here and exercised by the test-suite):

* ``delta = dx^k ^ d/dy^k`` and ``delta_inv = (1/(a+q)) y^k i(d/dx^k)`` on a
  monomial of fiber degree ``a`` and form degree ``q >= 1``; together they
  satisfy ``delta delta_inv + delta_inv delta = id - pi00``.
* The symplectic connection acts on the fiber as
  ``nabla0 a = dx^i ^ (d_i a - Gamma^k_{ij} y^j d/dy^k a)``, realized as
  ``d + [Gt, -]/(i hbar)`` with the quadratic generator ``Gt``.
* The Fedosov connection is ``nabla = -delta + nabla0 + [r, -]/(i hbar)``.
  Its Weyl curvature is ``omega + i hbar theta``; the scalar curvature form
  obtained by dividing by ``i hbar`` is therefore ``omega/(i hbar) + theta``
  (``omega/(2 i hbar)`` in the half-normalized bracket).
"""
from __future__ import annotations

from gmpy2 import mpq

from .basefunc import BaseFunction
from .forms import ScalarForm, WeylForm, merge_sign
from .geometry import ChartManifold, check_symplectic_connection
from .scalars import EXACT
from .series import HbarSeries
from .weyl import WeylElement, weyl_mul_sigma


class ConnectionError_(ValueError):
    """Connection data unusable for the Fedosov construction."""


class ConsistencyError(RuntimeError):
    """An iteration failed to settle or a certificate did not vanish."""


class ThetaNotClosedError(ValueError):
    pass


def _as_form(s):
    return WeylForm.from_element(s) if isinstance(s, WeylElement) else s


# delta and its homotopy ---------------------------------------------------

def delta(s):
    """``dx^k ^ d/dy^k``; raises the form degree and lowers the fiber degree by one."""
    s = _as_form(s)
    out = {}
    dim = s.space.dim
    for I, a in s.comps.items():
        for k in range(dim):
            if k in I:
                continue
            da = a.d_fiber(k)
            if da.is_zero():
                continue
            sign = merge_sign((k,), I)
            K = tuple(sorted((k,) + I))
            term = da if sign > 0 else -da
            out[K] = out[K] + term if K in out else term
    return WeylForm._make(s.space, out)


def delta_inv(s):
    """Contracting homotopy for :func:`delta`; zero on 0-forms."""
    s = _as_form(s)
    space = s.space
    f = space.field
    D = space.D
    out = {}
    for I, a in s.comps.items():
        q = len(I)
        if q == 0:
            continue
        for t, k in enumerate(I):
            J = I[:t] + I[t + 1:]
            sign = -1 if t % 2 else 1
            acc = out.setdefault(J, {})
            for (kk, alpha, x), c in a.terms.items():
                if 2 * kk + sum(alpha) + 1 > D:
                    continue
                beta = alpha[:k] + (alpha[k] + 1,) + alpha[k + 1:]
                weight = f.coerce(mpq(sign, sum(alpha) + q))
                key = (kk, beta, x)
                acc[key] = acc.get(key, f.zero) + c * weight
    return WeylForm._make(space, {J: WeylElement._make(space, t) for J, t in out.items()})


def pi00(s):
    """Projection to fiber degree zero and form degree zero."""
    s = _as_form(s)
    a = s.component(())
    return WeylForm._make(s.space, {(): a.central_part()})


# the symplectic connection on the Weyl bundle -----------------------------

def gamma_tilde(c, space):
    """Quadratic generator 1-form ``Gt_i = -1/2 L_{a,ic} y^a y^c`` of the connection."""
    dim = space.dim
    half = space.field.coerce(mpq(-1, 2))
    comps = {}
    for i in range(dim):
        total = space.zero()
        for a in range(dim):
            for cc in range(dim):
                L = c.lowered(a, i, cc)
                if L.is_zero():
                    continue
                alpha = [0] * dim
                alpha[a] += 1
                alpha[cc] += 1
                total = total + space.from_base(L.scale(half), alpha=alpha)
        comps[(i,)] = total
    return WeylForm._make(space, comps)


def _require_symplectic(c):
    report = check_symplectic_connection(c)
    if not report["torsion_free"]:
        raise ConnectionError_(f"connection has torsion at index {report['torsion_violation']}")
    if not report["symplectic"]:
        raise ConnectionError_(f"connection does not preserve omega at index {report['symplectic_violation']}")
    return report


def _nabla0_with(gt, s):
    s = _as_form(s)
    if gt.is_zero():
        return s.d()
    return s.d() + gt.ad_over_ihbar(s)


def nabla0(c, s):
    """The symplectic connection extended to Weyl-valued forms."""
    _require_symplectic(c)
    s = _as_form(s)
    return _nabla0_with(gamma_tilde(c, s.space), s)


# Fedosov connection -------------------------------------------------------

def _theta_form(theta, space):
    if theta is None:
        return ScalarForm.zero(space)
    if not isinstance(theta, WeylForm):
        raise TypeError("theta must be a ScalarForm")
    theta = ScalarForm.coerce(theta)
    if theta.space != space:
        theta = ScalarForm._make(space, {I: _respace(a, space) for I, a in theta.comps.items()})
    if any(len(I) != 2 for I in theta.comps):
        raise ValueError("theta must be a 2-form")
    return theta


def _respace(a, space):
    space.check(a.space.with_D(space.D))
    return WeylElement(space, a.terms)


class FedosovConnection:
    """``nabla = -delta + nabla0 + [r, -]/(i hbar)`` with Weyl curvature ``omega + i hbar theta``."""

    def __init__(self, manifold, connection, theta, space, r, gt, iterations):
        self.manifold = manifold
        self.connection = connection
        self.theta = theta
        self.space = space
        self.r = r
        self.gt = gt
        self.iterations = iterations

    @property
    def D(self):
        return self.space.D

    @property
    def N(self):
        """Reliable hbar-order of star products."""
        return self.D // 2

    @property
    def field(self):
        return self.space.field

    # the connection ---------------------------------------------------
    def nabla0(self, s):
        return _nabla0_with(self.gt, s)

    def nabla(self, s):
        """Apply ``nabla``; output is exact through Weyl degree ``D - 1``."""
        s = _as_form(s)
        out = self.nabla0(s) - delta(s)
        if not self.r.is_zero():
            out = out + self.r.ad_over_ihbar(s)
        return out

    def flatness_residual(self, s):
        """``nabla(nabla s)`` restricted to the reliable degrees ``<= D - 2``."""
        return self.nabla(self.nabla(s)).truncate(self.D - 2)

    def weyl_curvature(self):
        """``omega + R + nabla0 r - delta r + r^r/(i hbar)``, reliable through ``D - 2``."""
        space = self.space
        gt = self.gt
        R = gt.d() + gt.half_square_over_ihbar() if not gt.is_zero() else WeylForm.zero(space)
        r = self.r
        W = ScalarForm.symplectic(space) + R + self.nabla0(r) - delta(r)
        if not r.is_zero():
            W = W + r.half_square_over_ihbar()
        return W.truncate(self.D - 2)

    def curvature_theta(self):
        """``theta_eff = (W - omega)/(i hbar)`` stamped at ``D - 2`` (``omega`` part removed)."""
        W = self.weyl_curvature() - ScalarForm.symplectic(self.space)
        inv_i = self.field.one / self.field.i
        return W.divide_hbar(1).scale(inv_i).restamp(self.D - 2)

    def curvature_residual(self):
        """``W - omega - i hbar theta`` through degree ``D - 2``; zero for a built connection."""
        target = ScalarForm.symplectic(self.space) + self.theta.times_hbar(1).scale(self.field.i)
        return self.weyl_curvature() - target.truncate(self.D - 2)

    def delta_inv_r(self):
        return delta_inv(self.r)

    # quantization -----------------------------------------------------
    def tau(self, f):
        return tau(self, f)

    def star(self, f, g):
        return star(self, f, g)

    def certificates(self):
        space = self.space
        panel = [space.y(i) for i in range(space.dim)]
        if self.manifold.kind == "euclidean":
            panel += [space.from_base(BaseFunction.coordinate(space.dim, j, self.field)) for j in range(space.dim)]
        else:
            panel += [space.from_base(BaseFunction.fourier_mode([1 if t == j else 0 for t in range(space.dim)], 1, self.field)) for j in range(space.dim)]
        flat = sum(sum(len(a.terms) for a in self.flatness_residual(s).comps.values()) for s in panel)
        central = sum(len(a.terms) for a in self.curvature_residual().comps.values())
        dinv = sum(len(a.terms) for a in self.delta_inv_r().comps.values())
        return {"flatness_residual": flat, "curvature_residual": central, "delta_inv_r": dinv}

    def to_json(self):
        f = self.field
        r_terms = []
        for I, a in sorted(self.r.comps.items()):
            for (k, alpha, x), c in sorted(a.terms.items()):
                r_terms.append({"dx": list(I), "k": k, "alpha": list(alpha), "x": list(x), "coef": f.to_json(c)})
        return {
            "manifold": self.manifold.to_json(),
            "D": self.D,
            "scalar": f.name,
            "theta": self.theta.series_json(),
            "connection": self.connection.to_json(),
            "r_terms": r_terms,
            "iterations": self.iterations,
            "certificates": self.certificates(),
        }


def check_closed(theta):
    """Raise with the first nonzero coefficient of ``d theta``."""
    dth = theta.d()
    bad = next(((I, a) for I, a in sorted(dth.comps.items())), None)
    if bad is not None:
        I, a = bad
        key = min(a.terms)
        raise ThetaNotClosedError(
            f"theta is not closed: d theta has coefficient {a.terms[key]} at dx{list(I)}, hbar^{key[0]} x^{list(key[2])}"
        )


def build_fedosov(manifold, connection, theta=None, D=6, field=EXACT, max_iterations=None):
    """Solve ``r = delta_inv(R + nabla0 r + r^r/(i hbar) - i hbar theta)`` by fixed-point iteration.

    The iteration fixes at least one more Weyl degree per sweep, so it
    reaches its fixed point after at most ``D`` sweeps; the count is recorded.
    """
    if not isinstance(manifold, ChartManifold):
        raise TypeError("manifold must be a ChartManifold")
    if D < 2 or D % 2:
        raise ValueError("truncation degree D must be even and at least 2")
    _require_symplectic(connection)
    space = manifold.space(D, field)
    theta = _theta_form(theta, space)
    check_closed(theta)
    gt = gamma_tilde(connection, space)
    R = gt.d() + gt.half_square_over_ihbar() if not gt.is_zero() else WeylForm.zero(space)
    source = R - theta.times_hbar(1).scale(field.i)
    r = delta_inv(source)
    limit = max_iterations if max_iterations is not None else D + 2
    iterations = 1
    while iterations < limit:
        rhs = source + _nabla0_with(gt, r)
        if not r.is_zero():
            rhs = rhs + r.half_square_over_ihbar()
        nxt = delta_inv(rhs)
        iterations += 1
        if nxt == r:
            break
        r = nxt
    return FedosovConnection(manifold, connection, theta, space, r, gt, iterations)


# flat sections, sigma and the star product --------------------------------

def _series_element(F, f):
    space = F.space
    if isinstance(f, WeylElement):
        if not f.is_central():
            raise ValueError("tau needs a y-free input")
        return f
    if isinstance(f, BaseFunction):
        return space.from_base(f)
    if isinstance(f, HbarSeries):
        return space.from_series(list(f.coeffs))
    return space.from_series(list(f))


def tau(F, f):
    """Flat section with ``sigma(tau f) = f``: iterate ``t = f + delta_inv(nabla0 t + [r, t]/(i hbar))``."""
    f0 = _series_element(F, f)
    # linear fixed point, summed as a Neumann series of increments
    t = f0
    inc = f0
    for _ in range(F.D + 2):
        s = WeylForm.from_element(inc)
        rhs = F.nabla0(s)
        if not F.r.is_zero():
            rhs = rhs + F.r.ad_over_ihbar(s)
        inc = delta_inv(rhs).component(())
        if inc.is_zero():
            return t
        t = t + inc
    raise ConsistencyError("flat-section iteration did not terminate")


def sigma(s, N=None):
    """Fiber-degree-zero projection as an hbar-series stamped at ``N`` (default ``D // 2``)."""
    N = s.D // 2 if N is None else N
    return HbarSeries(s.sigma()[: N + 1], N)


def star(F, f, g):
    """``f * g = sigma(tau f o tau g)``, reliable through hbar-order ``D // 2``."""
    a = tau(F, f)
    b = tau(F, g)
    return sigma(weyl_mul_sigma(a, b), F.N)


def poisson_bracket(f, g, n):
    """``{f, g} = sum J_ij d_i f d_j g`` for the standard symplectic matrix."""
    out = f.zero_like()
    for i in range(n):
        out = out + f.derivative(i) * g.derivative(n + i) - f.derivative(n + i) * g.derivative(i)
    return out


def flat_sections_close(F, s):
    """Zero iff ``s`` is flat through the reliable degrees."""
    res = F.nabla(s).truncate(F.D - 2)
    return res.is_zero() if F.field.exact else res.negligible()

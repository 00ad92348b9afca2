"""Truncated formal Weyl algebra with base-function coefficients.

An element is a finite sum of ``hbar**k * y**alpha * f(x)`` with total Weyl
degree ``2k + |alpha| <= D``.  The product is the symmetric-ordered (Moyal)
product in the fiber variables ``y``, with ``[y^i, y^j] = i*hbar*Lambda^{ij}``;
base coefficients multiply pointwise.
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial

from gmpy2 import mpq

from .basefunc import EUCLIDEAN, RINGS, TORUS, BaseFunction, NotInvertibleError
from .kernels import accumulate, accumulate_scaled, contraction_terms, convolve, moyal_blocks
from .scalars import EXACT, field_from_name, same_field


class WeylConsistencyError(RuntimeError):
    """An internal invariant of the Weyl calculus failed."""


def standard_symplectic(n):
    """Matrix ``J = [[0, I], [-I, 0]]`` of ``omega = sum dx^i ^ dx^{n+i}``."""
    size = 2 * n
    rows = [[mpq(0)] * size for _ in range(size)]
    for i in range(n):
        rows[i][n + i] = mpq(1)
        rows[n + i][i] = mpq(-1)
    return tuple(tuple(r) for r in rows)


def rational_inverse(mat):
    """Exact inverse by Gauss-Jordan elimination; raises on singular input."""
    size = len(mat)
    a = [[mpq(x) for x in row] + [mpq(1 if i == j else 0) for j in range(size)] for i, row in enumerate(mat)]
    for col in range(size):
        piv = next((r for r in range(col, size) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(size):
            if r != col and a[r][col] != 0:
                fac = a[r][col]
                a[r] = [x - fac * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[size:]) for row in a)


class FiberPoisson:
    """Constant antisymmetric invertible matrix ``Lambda`` of the fiber bracket."""

    def __init__(self, matrix):
        mat = tuple(tuple(mpq(Fraction(x)) if not isinstance(x, type(mpq(0))) else x for x in row) for row in matrix)
        size = len(mat)
        if size % 2 or any(len(r) != size for r in mat):
            raise ValueError("fiber Poisson matrix must be square of even size")
        for i in range(size):
            for j in range(size):
                if mat[i][j] != -mat[j][i]:
                    raise ValueError(f"fiber Poisson matrix is not antisymmetric at ({i}, {j})")
        self.inverse = rational_inverse(mat)
        self.matrix = mat
        self.size = size
        self.pairs = tuple((i, j, mat[i][j]) for i in range(size) for j in range(size) if mat[i][j] != 0)
        self._tables = {}

    @classmethod
    def standard(cls, n):
        return cls(standard_symplectic(n))

    def __eq__(self, other):
        return isinstance(other, FiberPoisson) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"FiberPoisson({[[str(x) for x in r] for r in self.matrix]})"

    def table(self, alpha, beta, field):
        """Moyal contraction terms ``[(m, gamma, coef)]`` with field coefficients."""
        key = (alpha, beta, field)
        hit = self._tables.get(key)
        if hit is None:
            hit = []
            for m, gamma, c in contraction_terms(alpha, beta, self.pairs):
                scal = field.coerce(mpq(c) / (mpq(2) ** m * factorial(m)))
                hit.append((m, gamma, _times_i_power(scal, m, field)))
            hit = tuple(hit)
            self._tables[key] = hit
        return hit


def _times_i_power(c, m, field):
    if field.exact:
        return c.times_i_power(m)
    return c * (1j ** (m % 4))


class WeylSpace:
    """Shape shared by compatible Weyl elements: ``(n, D, ring, field, Lambda)``."""

    __slots__ = ("n", "D", "ring", "field", "poisson", "_key")

    def __init__(self, n, D, ring=EUCLIDEAN, field=EXACT, poisson=None):
        if ring not in RINGS:
            raise ValueError(f"unknown ring {ring!r}")
        if D < 0:
            raise ValueError("truncation degree must be nonnegative")
        self.n = n
        self.D = D
        self.ring = ring
        self.field = field
        self.poisson = poisson if poisson is not None else FiberPoisson.standard(n)
        if self.poisson.size != 2 * n:
            raise ValueError("fiber Poisson matrix has the wrong size")
        self._key = (n, D, ring, field, self.poisson)

    @property
    def dim(self):
        return 2 * self.n

    def with_D(self, D):
        return WeylSpace(self.n, D, self.ring, self.field, self.poisson)

    def __eq__(self, other):
        return isinstance(other, WeylSpace) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"WeylSpace(n={self.n}, D={self.D}, ring={self.ring}, field={self.field!r})"

    def check(self, other):
        if self.n != other.n or self.ring != other.ring or self.poisson != other.poisson:
            raise ValueError(f"incompatible Weyl spaces: {self!r} vs {other!r}")
        same_field(self.field, other.field)
        if self.D != other.D:
            raise ValueError(f"truncation degrees differ: {self.D} vs {other.D}")

    # element constructors ---------------------------------------------
    def zero(self):
        return WeylElement(self, {})

    def one(self):
        return self.scalar(1)

    def scalar(self, c, k=0):
        z = (0,) * self.dim
        return WeylElement(self, {(k, z, z): c})

    def hbar(self, power=1):
        return self.scalar(1, k=power)

    def y(self, i):
        z = (0,) * self.dim
        alpha = tuple(1 if j == i else 0 for j in range(self.dim))
        return WeylElement(self, {(0, alpha, z): 1})

    def monomial(self, k, alpha, xkey=None, c=1):
        xkey = tuple(xkey) if xkey is not None else (0,) * self.dim
        return WeylElement(self, {(k, tuple(alpha), xkey): c})

    def from_base(self, f, k=0, alpha=None):
        if f.ring != self.ring or f.dim != self.dim:
            raise ValueError("base function does not match this Weyl space")
        same_field(f.field, self.field)
        alpha = tuple(alpha) if alpha is not None else (0,) * self.dim
        return WeylElement(self, {(k, alpha, x): c for x, c in f.terms.items()})

    def from_series(self, series):
        """Central element ``sum_k hbar**k f_k`` from a list of base functions."""
        terms = {}
        z = (0,) * self.dim
        for k, f in enumerate(series):
            if f is None:
                continue
            for x, c in f.terms.items():
                terms[(k, z, x)] = c
        return WeylElement(self, terms)

    def base(self, terms=None):
        return BaseFunction(self.ring, self.dim, terms or {}, self.field)


def _deg(k, alpha):
    return 2 * k + sum(alpha)


class WeylElement:
    """Immutable truncated Weyl-bundle section."""

    __slots__ = ("space", "terms")

    def __init__(self, space, terms, _trusted=False):
        self.space = space
        if _trusted:
            self.terms = terms
            return
        f = space.field
        D = space.D
        dim = space.dim
        clean = {}
        for (k, alpha, x), c in terms.items():
            alpha = tuple(alpha)
            x = tuple(x)
            if len(alpha) != dim or len(x) != dim:
                raise ValueError("multi-index of wrong length")
            if k < 0 or min(alpha, default=0) < 0:
                raise ValueError("negative hbar power or y exponent")
            if space.ring == EUCLIDEAN and min(x, default=0) < 0:
                raise ValueError("negative x exponent on the euclidean ring")
            if _deg(k, alpha) > D:
                continue
            c = f.coerce(c)
            key = (k, alpha, x)
            clean[key] = clean.get(key, f.zero) + c
        self.terms = {key: c for key, c in clean.items() if not f.is_zero(c)}

    @classmethod
    def _make(cls, space, terms):
        return cls(space, {key: c for key, c in terms.items() if c}, _trusted=True)

    # basic structure --------------------------------------------------
    @property
    def D(self):
        return self.space.D

    @property
    def field(self):
        return self.space.field

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        if self.space != other.space:
            return False
        f = self.field
        if f.exact:
            return self.terms == other.terms
        keys = set(self.terms) | set(other.terms)
        return all(f.close(self.terms.get(k, f.zero), other.terms.get(k, f.zero)) for k in keys)

    def __hash__(self):
        return hash((self.space, frozenset(self.terms.items())))

    def __repr__(self):
        items = sorted(self.terms.items(), key=lambda kv: (_deg(kv[0][0], kv[0][1]), kv[0]))
        body = " + ".join(f"({v})*h^{k}*y^{list(a)}*x^{list(x)}" for (k, a, x), v in items[:12])
        more = " + ..." if len(items) > 12 else ""
        return f"WeylElement[{body or '0'}{more}]"

    def negligible(self):
        f = self.field
        return all(f.negligible(c) for c in self.terms.values())

    def min_degree(self):
        return min((_deg(k, a) for (k, a, _x) in self.terms), default=None)

    def max_degree(self):
        return max((_deg(k, a) for (k, a, _x) in self.terms), default=None)

    def blocks(self):
        """Group terms into ``{(k, alpha): {x: coef}}``."""
        out = {}
        for (k, a, x), c in self.terms.items():
            out.setdefault((k, a), {})[x] = c
        return out

    def component(self, k, alpha=None):
        alpha = tuple(alpha) if alpha is not None else (0,) * self.space.dim
        return self.space.base({x: c for (kk, a, x), c in self.terms.items() if kk == k and a == alpha})

    def constant_component(self):
        """The ``(k, alpha) = (0, 0)`` base function."""
        return self.component(0)

    def is_central(self):
        return all(not any(a) for (_k, a, _x) in self.terms)

    def central_part(self):
        return WeylElement._make(self.space, {key: c for key, c in self.terms.items() if not any(key[1])})

    def noncentral_part(self):
        return WeylElement._make(self.space, {key: c for key, c in self.terms.items() if any(key[1])})

    def sigma(self):
        """Fiber-degree-zero projection as a list of base functions per hbar power."""
        N = self.D // 2
        out = [self.space.base() for _ in range(N + 1)]
        grouped = {}
        for (k, a, x), c in self.terms.items():
            if not any(a):
                grouped.setdefault(k, {})[x] = c
        for k, t in grouped.items():
            out[k] = self.space.base(t)
        return out

    def truncate(self, d):
        """Drop all terms of Weyl degree ``> d`` (the stamp is unchanged)."""
        return WeylElement._make(self.space, {key: c for key, c in self.terms.items() if _deg(key[0], key[1]) <= d})

    def restamp(self, D):
        """Same terms in the space with truncation ``D`` (terms above ``D`` dropped)."""
        space = self.space.with_D(D)
        return WeylElement._make(space, {key: c for key, c in self.terms.items() if _deg(key[0], key[1]) <= D})

    # arithmetic --------------------------------------------------------
    def _compat(self, other):
        if not isinstance(other, WeylElement):
            raise TypeError(f"expected WeylElement, got {type(other).__name__}")
        self.space.check(other.space)

    def __add__(self, other):
        self._compat(other)
        out = dict(self.terms)
        accumulate(out, other.terms)
        return WeylElement._make(self.space, out)

    def __sub__(self, other):
        self._compat(other)
        out = dict(self.terms)
        accumulate_scaled(out, other.terms, -self.field.one)
        return WeylElement._make(self.space, out)

    def __neg__(self):
        return WeylElement(self.space, {k: -v for k, v in self.terms.items()}, _trusted=True)

    def scale(self, c):
        c = self.field.coerce(c)
        return WeylElement._make(self.space, {k: c * v for k, v in self.terms.items()})

    def times_hbar(self, power=1):
        D = self.D
        return WeylElement._make(
            self.space,
            {(k + power, a, x): c for (k, a, x), c in self.terms.items() if _deg(k + power, a) <= D},
        )

    def divide_hbar(self, power=1, *, strict=True):
        """Shift the hbar grading down; with ``strict`` every term must carry the factor."""
        out = {}
        for (k, a, x), c in self.terms.items():
            if k < power:
                if strict:
                    raise WeylConsistencyError(f"term h^{k} y^{a} is not divisible by h^{power}")
                continue
            out[(k - power, a, x)] = c
        return WeylElement._make(self.space, out)

    def mul_base(self, f):
        """Multiply by a base function (central, fiber degree zero)."""
        if f.ring != self.space.ring or f.dim != self.space.dim:
            raise ValueError("base function does not match this Weyl space")
        out = {}
        for (k, a), block in self.blocks().items():
            for x, c in convolve(block, f.terms).items():
                out[(k, a, x)] = c
        return WeylElement._make(self.space, out)

    def __mul__(self, other):
        if isinstance(other, WeylElement):
            return weyl_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __matmul__(self, other):
        return weyl_mul(self, other)

    def __pow__(self, e):
        out = self.space.one()
        for _ in range(e):
            out = weyl_mul(out, self)
        return out

    # calculus ----------------------------------------------------------
    def d_base(self, j):
        """Partial derivative of the coefficients in ``x^j``."""
        out = {}
        ring = self.space.ring
        i = self.field.i
        for (k, a, x), c in self.terms.items():
            if ring == EUCLIDEAN:
                e = x[j]
                if e:
                    out[(k, a, x[:j] + (e - 1,) + x[j + 1:])] = c * e
            elif x[j]:
                out[(k, a, x)] = c * i * x[j]
        return WeylElement._make(self.space, out)

    def d_fiber(self, j):
        """Partial derivative in ``y^j``."""
        out = {}
        for (k, a, x), c in self.terms.items():
            e = a[j]
            if e:
                out[(k, a[:j] + (e - 1,) + a[j + 1:], x)] = c * e
        return WeylElement._make(self.space, out)

    # serialization ----------------------------------------------------
    def to_json(self):
        f = self.field
        return {
            "n": self.space.n,
            "D": self.D,
            "ring": self.space.ring,
            "scalar": f.name,
            "terms": [
                {"k": k, "alpha": list(a), "x": list(x), "coef": f.to_json(c)}
                for (k, a, x), c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, data, field=None):
        field = field or field_from_name(data.get("scalar", "exact"))
        space = WeylSpace(data["n"], data["D"], data["ring"], field)
        dim = 2 * data["n"]
        return cls(
            space,
            {
                (t["k"], tuple(t["alpha"]), tuple(t.get("x", [0] * dim))): field.from_json(t["coef"])
                for t in data["terms"]
            },
        )


# products ---------------------------------------------------------------

def _product_terms(a, b, trunc, *, y0_only=False, odd_only=False):
    space = a.space
    field = space.field
    poisson = space.poisson
    blocks_a = [(k, alpha, _deg(k, alpha), fa) for (k, alpha), fa in a.blocks().items()]
    blocks_b = sorted(
        ((kb, beta, _deg(kb, beta), fb) for (kb, beta), fb in b.blocks().items()), key=lambda t: t[2]
    )
    acc = moyal_blocks(
        blocks_a,
        blocks_b,
        trunc,
        lambda alpha, beta: poisson.table(alpha, beta, field),
        y0_only,
        odd_only,
        field.coerce(2),
    )
    out = {}
    for (k, gamma), slot in acc.items():
        for x, c in slot.items():
            if c:
                out[(k, gamma, x)] = c
    return out


def weyl_mul(a, b):
    """Moyal product truncated at the common degree ``D``."""
    a._compat(b)
    return WeylElement._make(a.space, _product_terms(a, b, a.D))


def weyl_mul_sigma(a, b):
    """Fiber-degree-zero part of ``a * b`` (enough to read off star products)."""
    a._compat(b)
    return WeylElement._make(a.space, _product_terms(a, b, a.D, y0_only=True))


def _divide_ihbar(terms, field, *, strict=True):
    inv_i = field.one / field.i
    out = {}
    for (k, a, x), c in terms.items():
        if k == 0:
            if strict:
                raise WeylConsistencyError(f"commutator term y^{a} x^{x} lacks a factor of hbar")
            continue
        out[(k - 1, a, x)] = c * inv_i
    return out


def weyl_commutator(a, b):
    """``a*b - b*a`` truncated at ``D``."""
    a._compat(b)
    return WeylElement._make(a.space, _product_terms(a, b, a.D, odd_only=True))


def weyl_commutator_over_ihbar(a, b):
    """``(a*b - b*a) / (i*hbar)``; the division costs two degrees, so the result carries ``D - 2``."""
    a._compat(b)
    if a.D < 2:
        raise ValueError("truncation too low to divide by hbar")
    terms = _divide_ihbar(_product_terms(a, b, a.D, odd_only=True), a.field)
    return WeylElement._make(a.space.with_D(a.D - 2), terms)


def ad_over_ihbar(a, b):
    """``(a*b - b*a) / (i*hbar)`` computed at ``D + 2`` and kept to ``D``.

    Exact through degree ``D`` whenever the missing input terms above ``D``
    cannot reach it, e.g. when ``a`` has Weyl degree at least 3 and ``b`` is
    exact through ``D``.  Callers carry that responsibility.
    """
    a._compat(b)
    terms = _divide_ihbar(_product_terms(a, b, a.D + 2, odd_only=True), a.field)
    return WeylElement._make(a.space, {key: c for key, c in terms.items() if _deg(key[0], key[1]) <= a.D})


def mul_extended(a, b, extra=2):
    """Product computed with ``extra`` degrees of headroom, stamped at ``D + extra``."""
    a._compat(b)
    space = a.space.with_D(a.D + extra)
    return WeylElement._make(space, _product_terms(a, b, a.D + extra))


def grading_project(a, d):
    """Keep exactly the monomials of Weyl degree ``d``."""
    if not 0 <= d <= a.D:
        raise ValueError(f"degree {d} outside 0..{a.D}")
    return WeylElement._make(a.space, {key: c for key, c in a.terms.items() if _deg(key[0], key[1]) == d})


def _has_unit_part(a):
    return any(k == 0 and not any(alpha) for (k, alpha, _x) in a.terms)


def weyl_exp(a):
    """``sum_j a**j / j!``; ``a`` must have no ``(hbar^0, y^0)`` component."""
    if _has_unit_part(a):
        raise ValueError("weyl_exp needs a vanishing (k=0, alpha=0) component")
    f = a.field
    result = a.space.one()
    term = a.space.one()
    for j in range(1, a.D + 1):
        term = weyl_mul(term, a).scale(f.one / f.coerce(j))
        if term.is_zero():
            break
        result = result + term
    return result


def weyl_log(u):
    """Inverse of :func:`weyl_exp` on elements whose ``(0, 0)`` part is exactly 1."""
    one = u.space.one()
    h = u - one
    if _has_unit_part(h):
        raise ValueError("weyl_log needs the (k=0, alpha=0) component equal to 1")
    f = u.field
    result = u.space.zero()
    power = one
    for j in range(1, u.D + 1):
        power = weyl_mul(power, h)
        if power.is_zero():
            break
        c = f.one / f.coerce(j)
        result = result + (power.scale(c) if j % 2 else power.scale(-c))
    return result


def weyl_inverse(u):
    """Inverse by a Neumann series around the leading base function."""
    lead = u.constant_component()
    try:
        lead_inv = lead.inverse()
    except NotInvertibleError as exc:
        raise NotInvertibleError(f"leading (k=0, alpha=0) component not invertible: {exc}") from None
    one = u.space.one()
    v = one - u.mul_base(lead_inv)
    total = one
    power = one
    for _ in range(u.D):
        power = weyl_mul(power, v)
        if power.is_zero():
            break
        total = total + power
    return total.mul_base(lead_inv)


__all__ = [
    "EUCLIDEAN",
    "TORUS",
    "FiberPoisson",
    "WeylConsistencyError",
    "WeylElement",
    "WeylSpace",
    "ad_over_ihbar",
    "grading_project",
    "mul_extended",
    "rational_inverse",
    "standard_symplectic",
    "weyl_commutator",
    "weyl_commutator_over_ihbar",
    "weyl_exp",
    "weyl_inverse",
    "weyl_log",
    "weyl_mul",
    "weyl_mul_sigma",
]

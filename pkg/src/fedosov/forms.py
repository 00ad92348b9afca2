"""Differential forms on the base with Weyl-algebra coefficients.

A form is a sparse map from strictly increasing index tuples ``I`` to
:class:`~fedosov.weyl.WeylElement` values, meaning ``sum_I a_I dx^I``.  Forms
with central (``y``-free) coefficients are the scalar forms used for
``omega``, ``theta`` and the values of the D-map; they are the same class with
a centrality check on construction.
"""
from __future__ import annotations

from .kernels import convolve
from .weyl import WeylElement, ad_over_ihbar, weyl_mul


def merge_sign(I, J):
    """Sign of ``dx^I ^ dx^J`` relative to the sorted union, 0 on overlap."""
    if set(I) & set(J):
        return 0
    inv = 0
    for a in I:
        for b in J:
            if a > b:
                inv += 1
    return -1 if inv % 2 else 1


def _merged(I, J):
    return tuple(sorted(I + J))


class WeylForm:
    """Immutable ``sum_I a_I dx^I`` with coefficients in one Weyl space."""

    __slots__ = ("space", "comps")

    def __init__(self, space, comps=None):
        self.space = space
        clean = {}
        for I, a in (comps or {}).items():
            I = tuple(I)
            if any(I[t] >= I[t + 1] for t in range(len(I) - 1)):
                raise ValueError(f"form index {I} is not strictly increasing")
            if I and (I[0] < 0 or I[-1] >= space.dim):
                raise ValueError(f"form index {I} out of range")
            if a.space != space:
                space.check(a.space)
            if not a.is_zero():
                clean[I] = a
        self.comps = clean
        self._validate()

    def _validate(self):
        pass

    @classmethod
    def _make(cls, space, comps):
        obj = cls.__new__(cls)
        obj.space = space
        obj.comps = {I: a for I, a in comps.items() if not a.is_zero()}
        obj._validate()
        return obj

    def _like(self, comps, space=None):
        return type(self)._make(space or self.space, comps)

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls, space):
        return cls._make(space, {})

    @classmethod
    def from_element(cls, a):
        return cls._make(a.space, {(): a})

    @classmethod
    def one_form(cls, space, coeffs):
        return cls._make(space, {(i,): a for i, a in enumerate(coeffs) if a is not None})

    # structure --------------------------------------------------------
    def degrees(self):
        return sorted({len(I) for I in self.comps})

    @property
    def degree(self):
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError(f"form is not homogeneous (degrees {ds})")
        return ds[0] if ds else 0

    def component(self, I):
        return self.comps.get(tuple(I)) or self.space.zero()

    def part(self, p):
        return self._like({I: a for I, a in self.comps.items() if len(I) == p})

    def is_zero(self):
        return not self.comps

    def negligible(self):
        return all(a.negligible() for a in self.comps.values())

    def __eq__(self, other):
        if not isinstance(other, WeylForm):
            return NotImplemented
        if self.space != other.space:
            return False
        keys = set(self.comps) | set(other.comps)
        return all(self.component(I) == other.component(I) for I in keys)

    def __hash__(self):
        return hash(frozenset(self.comps.items()))

    def __repr__(self):
        body = ", ".join(f"dx{list(I)}: {a!r}" for I, a in sorted(self.comps.items()))
        return f"{type(self).__name__}({{{body}}})"

    def is_central(self):
        return all(a.is_central() for a in self.comps.values())

    def first_noncentral(self):
        """``(I, (k, alpha, x), coef)`` of the first y-dependent monomial, or ``None``."""
        for I in sorted(self.comps):
            for key in sorted(self.comps[I].terms):
                if any(key[1]):
                    return I, key, self.comps[I].terms[key]
        return None

    # linear operations ------------------------------------------------
    def map(self, fn, space=None):
        return self._like({I: fn(a) for I, a in self.comps.items()}, space)

    def __add__(self, other):
        self._check(other)
        out = dict(self.comps)
        for I, a in other.comps.items():
            out[I] = out[I] + a if I in out else a
        return self._binary_result(other, out)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.comps)
        for I, a in other.comps.items():
            out[I] = out[I] - a if I in out else -a
        return self._binary_result(other, out)

    def _binary_result(self, other, comps):
        cls = type(self) if type(other) is type(self) else WeylForm
        return cls._make(self.space, comps)

    def __neg__(self):
        return self.map(lambda a: -a)

    def scale(self, c):
        return self.map(lambda a: a.scale(c))

    def times_hbar(self, power=1):
        return self.map(lambda a: a.times_hbar(power))

    def divide_hbar(self, power=1, strict=True):
        return self.map(lambda a: a.divide_hbar(power, strict=strict))

    def truncate(self, d):
        return self.map(lambda a: a.truncate(d))

    def restamp(self, D):
        space = self.space.with_D(D)
        return self._like({I: a.restamp(D) for I, a in self.comps.items()}, space)

    def _check(self, other):
        if not isinstance(other, WeylForm):
            raise TypeError(f"expected a form, got {type(other).__name__}")
        self.space.check(other.space)

    # products ---------------------------------------------------------
    def wedge(self, other, mul=weyl_mul, cls=None):
        """``self ^ other`` with coefficients multiplied by ``mul``."""
        self._check(other)
        out = {}
        for I, a in self.comps.items():
            for J, b in other.comps.items():
                s = merge_sign(I, J)
                if not s:
                    continue
                c = mul(a, b)
                if s < 0:
                    c = -c
                K = _merged(I, J)
                out[K] = out[K] + c if K in out else c
        return (cls or WeylForm)._make(self.space, out)

    def ad_over_ihbar(self, other):
        """Graded ``[self, other] / (i hbar)``, each component through ``ad_over_ihbar``."""
        return self.wedge(other, mul=ad_over_ihbar)

    def half_square_over_ihbar(self):
        """``(self ^ self) / (i hbar)`` for a 1-form, i.e. half the graded self-commutator."""
        if any(len(I) != 1 for I in self.comps):
            raise ValueError("half_square_over_ihbar needs a 1-form")
        out = {}
        items = sorted(self.comps.items())
        for s, (I, a) in enumerate(items):
            for J, b in items[s + 1:]:
                out[I + J] = ad_over_ihbar(a, b)
        return WeylForm._make(self.space, out)

    def mul_element(self, u, left=True):
        """Multiply every coefficient by a 0-form coefficient ``u``."""
        if left:
            return WeylForm._make(self.space, {I: weyl_mul(u, a) for I, a in self.comps.items()})
        return WeylForm._make(self.space, {I: weyl_mul(a, u) for I, a in self.comps.items()})

    # calculus ---------------------------------------------------------
    def d(self):
        """Exterior derivative in the base variables (``y`` held fixed)."""
        out = {}
        for I, a in self.comps.items():
            for j in range(self.space.dim):
                if j in I:
                    continue
                da = a.d_base(j)
                if da.is_zero():
                    continue
                s = merge_sign((j,), I)
                K = _merged((j,), I)
                term = da if s > 0 else -da
                out[K] = out[K] + term if K in out else term
        return self._like(out)

    def pullback(self, linear, translation):
        """Pullback along ``x -> A x + b`` acting on ``y`` by ``y -> A y``."""
        dim = self.space.dim
        f = self.space.field
        A = [[f.coerce(linear[i][j]) for j in range(dim)] for i in range(dim)]
        out = {}
        for I, a in self.comps.items():
            pa = pullback_element(a, linear, translation)
            # dx^{i1} ^ ... ^ dx^{ip} pulls back to prod_t (sum_l A[i_t][l] dx^l)
            expansion = {(): f.one}
            for i in I:
                nxt = {}
                for J, c in expansion.items():
                    for l in range(dim):
                        if f.is_zero(A[i][l]):
                            continue
                        s = merge_sign(J, (l,))
                        if not s:
                            continue
                        K = _merged(J, (l,))
                        nxt[K] = nxt.get(K, f.zero) + c * A[i][l] * s
                expansion = {K: c for K, c in nxt.items() if not f.is_zero(c)}
            for K, c in expansion.items():
                term = pa.scale(c)
                out[K] = out[K] + term if K in out else term
        return self._like(out)

    # serialization ----------------------------------------------------
    def to_json(self):
        return {
            "components": [
                {"dx": list(I), "coef": a.to_json()["terms"]} for I, a in sorted(self.comps.items())
            ]
        }


class ScalarForm(WeylForm):
    """Form whose coefficients are central: series in ``hbar`` of base functions."""

    __slots__ = ()

    def _validate(self):
        bad = self.first_noncentral()
        if bad is not None:
            I, key, _c = bad
            raise TypeError(f"scalar form has y-dependent coefficient at dx{list(I)}, monomial {key}")

    @classmethod
    def from_base(cls, space, comps, k=0):
        """Build ``hbar**k * sum_I f_I dx^I`` from base functions."""
        return cls._make(space, {tuple(I): space.from_base(fI, k=k) for I, fI in comps.items()})

    @classmethod
    def symplectic(cls, space):
        """``omega = sum_i dx^i ^ dx^{n+i}``."""
        n = space.n
        return cls._make(space, {(i, n + i): space.one() for i in range(n)})

    @classmethod
    def coerce(cls, form):
        if isinstance(form, ScalarForm):
            return form
        return cls._make(form.space, form.comps)

    def base_component(self, I, k=0):
        return self.component(I).component(k)

    def hbar_order(self, k):
        """The ``hbar**k`` coefficient form (kept at ``hbar**0`` in the result)."""
        return ScalarForm._make(
            self.space,
            {I: self.space.from_base(a.component(k)) for I, a in self.comps.items()},
        )

    def series_json(self):
        f = self.space.field
        out = []
        for I, a in sorted(self.comps.items()):
            for (k, _alpha, x), c in sorted(a.terms.items()):
                out.append({"dx": list(I), "k": k, "x": list(x), "coef": f.to_json(c)})
        return out


def pullback_element(a, linear, translation):
    """``(x, y) -> a(A x + b, A y)`` for a single Weyl element."""
    space = a.space
    f = space.field
    dim = space.dim
    rows = []
    for j in range(dim):
        row = {}
        for l in range(dim):
            c = f.coerce(linear[j][l])
            if not f.is_zero(c):
                row[tuple(1 if t == l else 0 for t in range(dim))] = c
        rows.append(row)
    zero = (0,) * dim
    powers = [[{zero: f.one}] for _ in range(dim)]
    cache = {}
    out = {}
    for (k, alpha), block in a.blocks().items():
        fx = space.base(block).pullback_affine(linear, translation)
        ysub = cache.get(alpha)
        if ysub is None:
            ysub = {zero: f.one}
            for j, e in enumerate(alpha):
                pj = powers[j]
                while len(pj) <= e:
                    pj.append(convolve(pj[-1], rows[j]))
                if e:
                    ysub = convolve(ysub, pj[e])
            cache[alpha] = ysub
        for beta, cy in ysub.items():
            for x, cx in fx.terms.items():
                key = (k, beta, x)
                out[key] = out.get(key, f.zero) + cy * cx
    return WeylElement._make(space, out)

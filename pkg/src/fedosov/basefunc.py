"""Functions on the base manifold at desk scale.

On ``R^{2n}`` a function is a polynomial, keyed by exponent tuples.  On the
torus ``T^{2n}`` (coordinates of period ``2*pi``) it is a finite Fourier sum
``sum c_m exp(i m.x)``, keyed by integer frequency tuples.  Both rings
multiply by adding keys, which is what lets the Weyl product treat them
uniformly.
"""
from __future__ import annotations

from .kernels import accumulate_scaled, convolve
from .scalars import EXACT, same_field

EUCLIDEAN = "euclidean"
TORUS = "torus"
RINGS = (EUCLIDEAN, TORUS)


class NotInvertibleError(ValueError):
    pass


def _clean(terms, field):
    return {k: v for k, v in terms.items() if not field.is_zero(v)}


class BaseFunction:
    """Immutable sparse function on a chart; zero coefficients are never stored."""

    __slots__ = ("ring", "dim", "field", "terms")

    def __init__(self, ring, dim, terms=None, field=EXACT):
        if ring not in RINGS:
            raise ValueError(f"unknown ring {ring!r}")
        self.ring = ring
        self.dim = dim
        self.field = field
        cleaned = {}
        for k, v in (terms or {}).items():
            k = tuple(int(e) for e in k)
            if len(k) != dim:
                raise ValueError(f"key {k} has wrong length for dimension {dim}")
            if ring == EUCLIDEAN and min(k, default=0) < 0:
                raise ValueError(f"negative exponent in polynomial key {k}")
            v = field.coerce(v)
            if not field.is_zero(v):
                cleaned[k] = cleaned.get(k, field.zero) + v
        self.terms = _clean(cleaned, field)

    @classmethod
    def _wrap(cls, ring, dim, terms, field):
        obj = cls.__new__(cls)
        obj.ring = ring
        obj.dim = dim
        obj.field = field
        obj.terms = terms
        return obj

    # constructors -----------------------------------------------------
    @classmethod
    def constant(cls, ring, dim, c, field=EXACT):
        return cls(ring, dim, {(0,) * dim: c}, field)

    @classmethod
    def coordinate(cls, dim, j, field=EXACT):
        key = tuple(1 if i == j else 0 for i in range(dim))
        return cls(EUCLIDEAN, dim, {key: 1}, field)

    @classmethod
    def fourier_mode(cls, m, c=1, field=EXACT):
        return cls(TORUS, len(m), {tuple(m): c}, field)

    def like(self, terms):
        return BaseFunction._wrap(self.ring, self.dim, _clean(terms, self.field), self.field)

    def zero_like(self):
        return BaseFunction._wrap(self.ring, self.dim, {}, self.field)

    # structure ---------------------------------------------------------
    def _compat(self, other):
        if not isinstance(other, BaseFunction):
            raise TypeError(f"expected BaseFunction, got {type(other).__name__}")
        if self.ring != other.ring or self.dim != other.dim:
            raise ValueError("base functions live on different rings")
        same_field(self.field, other.field)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, BaseFunction):
            return NotImplemented
        if self.ring != other.ring or self.dim != other.dim or self.field != other.field:
            return False
        if self.field.exact:
            return self.terms == other.terms
        keys = set(self.terms) | set(other.terms)
        z = self.field.zero
        return all(self.field.close(self.terms.get(k, z), other.terms.get(k, z)) for k in keys)

    def __hash__(self):
        return hash((self.ring, self.dim, frozenset(self.terms.items())))

    def __repr__(self):
        return f"BaseFunction({self.ring}, {dict(sorted(self.terms.items()))})"

    def constant_term(self):
        return self.terms.get((0,) * self.dim, self.field.zero)

    def is_constant(self):
        return all(k == (0,) * self.dim for k in self.terms)

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        self._compat(other)
        out = dict(self.terms)
        accumulate_scaled(out, other.terms, self.field.one)
        return self.like(out)

    def __sub__(self, other):
        self._compat(other)
        out = dict(self.terms)
        accumulate_scaled(out, other.terms, -self.field.one)
        return self.like(out)

    def __neg__(self):
        return BaseFunction._wrap(self.ring, self.dim, {k: -v for k, v in self.terms.items()}, self.field)

    def scale(self, c):
        c = self.field.coerce(c)
        return self.like({k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, BaseFunction):
            self._compat(other)
            return BaseFunction._wrap(self.ring, self.dim, convolve(self.terms, other.terms), self.field)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, e):
        out = BaseFunction.constant(self.ring, self.dim, 1, self.field)
        for _ in range(e):
            out = out * self
        return out

    def inverse(self):
        """Inverse in the ring; only monomial units are invertible."""
        if len(self.terms) != 1:
            raise NotInvertibleError(f"{self!r} is not a unit of the {self.ring} ring")
        (k, v), = self.terms.items()
        if self.ring == EUCLIDEAN and any(k):
            raise NotInvertibleError(f"polynomial {self!r} is not a nonzero constant")
        return BaseFunction._wrap(
            self.ring, self.dim, {tuple(-e for e in k): self.field.one / v}, self.field
        )

    # calculus ----------------------------------------------------------
    def derivative(self, j):
        out = {}
        if self.ring == EUCLIDEAN:
            for k, v in self.terms.items():
                e = k[j]
                if e:
                    nk = k[:j] + (e - 1,) + k[j + 1:]
                    out[nk] = v * e
        else:
            i = self.field.i
            for k, v in self.terms.items():
                if k[j]:
                    out[k] = v * i * k[j]
        return self.like(out)

    def gradient(self):
        return [self.derivative(j) for j in range(self.dim)]

    def pullback_affine(self, linear, translation):
        """Compose with ``x -> linear @ x + translation``.

        ``linear`` is a matrix of field scalars (integers on the torus).  On
        the torus ``translation`` holds the phases ``exp(i b_j)``.
        """
        f = self.field
        if self.ring == TORUS:
            out = {}
            for m, v in self.terms.items():
                new_m = tuple(
                    sum(m[j] * int(linear[j][k]) for j in range(self.dim)) for k in range(self.dim)
                )
                phase = f.one
                for j, mj in enumerate(m):
                    if mj:
                        phase = phase * translation[j] ** mj
                out[new_m] = out.get(new_m, f.zero) + v * phase
            return self.like(out)
        rows = []
        for j in range(self.dim):
            lin = {}
            for k in range(self.dim):
                if not f.is_zero(linear[j][k]):
                    key = tuple(1 if i == k else 0 for i in range(self.dim))
                    lin[key] = linear[j][k]
            if not f.is_zero(translation[j]):
                lin[(0,) * self.dim] = translation[j]
            rows.append(lin)
        powers = [[{(0,) * self.dim: f.one}] for _ in range(self.dim)]
        out = {}
        for k, v in self.terms.items():
            term = {(0,) * self.dim: v}
            for j, e in enumerate(k):
                pj = powers[j]
                while len(pj) <= e:
                    pj.append(convolve(pj[-1], rows[j]))
                if e:
                    term = convolve(term, pj[e])
            accumulate_scaled(out, term, f.one)
        return self.like(out)

    def evaluate(self, point):
        """Value at ``point``; on the torus ``point`` lists phases ``exp(i x_j)``."""
        f = self.field
        total = f.zero
        for k, v in self.terms.items():
            term = v
            for j, e in enumerate(k):
                if e:
                    term = term * (point[j] ** e)
            total = total + term
        return total

    def is_real(self):
        """Reality test; for polynomials the coefficients must be real."""
        f = self.field
        if self.ring == EUCLIDEAN:
            return all(f.close(v, v.conjugate()) for v in self.terms.values())
        for m, v in self.terms.items():
            partner = self.terms.get(tuple(-e for e in m), f.zero)
            if not f.close(partner, v.conjugate()):
                return False
        return True

    def degree(self):
        if self.ring != EUCLIDEAN:
            raise ValueError("degree is defined for polynomials only")
        return max((sum(k) for k in self.terms), default=-1)

    # serialization ----------------------------------------------------
    def to_json(self):
        return {
            "ring": self.ring,
            "dim": self.dim,
            "terms": [
                {"key": list(k), "coef": self.field.to_json(v)} for k, v in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, data, field=EXACT):
        return cls(
            data["ring"],
            data["dim"],
            {tuple(t["key"]): field.from_json(t["coef"]) for t in data["terms"]},
            field,
        )

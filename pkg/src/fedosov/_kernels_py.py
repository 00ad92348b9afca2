"""Pure-Python implementations of the hot kernels.

These mirror ``_kernels.pyx`` function for function; ``fedosov.kernels``
picks the compiled module when it is importable and falls back to this one.
"""
from __future__ import annotations

from gmpy2 import mpq

BACKEND = "python"

_MPQ = type(mpq(0))


def _q(x):
    if type(x) is _MPQ:
        return x
    return mpq(x)


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @classmethod
    def _raw(cls, re, im):
        obj = cls.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, complex):
            return self.re == other.real and self.im == other.imag
        try:
            return self.im == 0 and self.re == other
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational._raw(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, _MPQ)):
            return GaussianRational._raw(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational._raw(self.re - other.re, self.im - other.im)
        if isinstance(other, (int, _MPQ)):
            return GaussianRational._raw(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, _MPQ)):
            return GaussianRational._raw(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            a, b, c, d = self.re, self.im, other.re, other.im
            return GaussianRational._raw(a * c - b * d, a * d + b * c)
        if isinstance(other, (int, _MPQ)):
            return GaussianRational._raw(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GaussianRational):
            c, d = other.re, other.im
            den = c * c + d * d
            if not den:
                raise ZeroDivisionError("division by zero Gaussian rational")
            a, b = self.re, self.im
            return GaussianRational._raw((a * c + b * d) / den, (b * c - a * d) / den)
        if isinstance(other, (int, _MPQ)):
            if not other:
                raise ZeroDivisionError("division by zero")
            return GaussianRational._raw(self.re / other, self.im / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, _MPQ)):
            return GaussianRational(other) / self
        return NotImplemented

    def __pow__(self, e):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return GaussianRational(1) / (self ** (-e))
        result = GaussianRational(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def conjugate(self):
        return GaussianRational._raw(self.re, -self.im)

    def times_i_power(self, m):
        """Multiply by ``i**m`` without general multiplication."""
        m %= 4
        if m == 0:
            return self
        if m == 1:
            return GaussianRational._raw(-self.im, self.re)
        if m == 2:
            return GaussianRational._raw(-self.re, -self.im)
        return GaussianRational._raw(self.im, -self.re)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return f"{self.re}+{self.im} i" if self.im >= 0 else f"{self.re}-{-self.im} i"


def convolve(fa, fb):
    """Product of two sparse Laurent/ordinary polynomials keyed by exponent tuples."""
    out = {}
    get = out.get
    for ka, ca in fa.items():
        for kb, cb in fb.items():
            key = tuple([u + v for u, v in zip(ka, kb)])
            out[key] = get(key, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def accumulate_scaled(target, source, scale):
    """``target += scale * source`` in place on sparse dicts."""
    get = target.get
    for k, v in source.items():
        target[k] = get(k, 0) + scale * v


def contraction_terms(alpha, beta, pairs):
    """Bidifferential contraction data for ``y**alpha`` times ``y**beta``.

    ``pairs`` lists ``(i, j, lam)`` for nonzero fiber Poisson entries.  Returns
    a list of ``(m, gamma, coef)`` where ``coef`` is rational and the full
    Moyal coefficient is ``coef * (i/2)**m / m!`` times ``hbar**m``.
    """
    out = []
    level = {(tuple(alpha), tuple(beta)): mpq(1)}
    m = 0
    while level:
        acc = {}
        for (a, b), c in level.items():
            gamma = tuple([u + v for u, v in zip(a, b)])
            acc[gamma] = acc.get(gamma, 0) + c
        for gamma, c in acc.items():
            if c:
                out.append((m, gamma, c))
        nxt = {}
        for (a, b), c in level.items():
            for i, j, lam in pairs:
                ai = a[i]
                bj = b[j]
                if ai and bj:
                    na = a[:i] + (ai - 1,) + a[i + 1:]
                    nb = b[:j] + (bj - 1,) + b[j + 1:]
                    key = (na, nb)
                    nxt[key] = nxt.get(key, 0) + c * lam * ai * bj
        level = {k: v for k, v in nxt.items() if v}
        m += 1
    return out


def accumulate(target, source):
    """``target += source`` in place on sparse dicts."""
    get = target.get
    for k, v in source.items():
        prev = get(k)
        target[k] = v if prev is None else prev + v


def moyal_blocks(blocks_a, blocks_b, trunc, table, y0_only, odd_only, two):
    """Blockwise Moyal product.

    ``blocks_a`` and ``blocks_b`` list ``(k, alpha, degree, {x: coef})`` with
    ``blocks_b`` sorted by degree; ``table(alpha, beta)`` returns the scaled
    contraction terms ``(m, gamma, coef)``.  Returns ``{(k, gamma): {x: coef}}``.
    """
    acc = {}
    for ka, alpha, da, fa in blocks_a:
        na = sum(alpha)
        for kb, beta, db, fb in blocks_b:
            if da + db > trunc:
                break
            if y0_only and sum(beta) != na:
                continue
            prod = None
            for m, gamma, c in table(alpha, beta):
                if odd_only and not m % 2:
                    continue
                if y0_only and any(gamma):
                    continue
                if prod is None:
                    prod = convolve(fa, fb)
                    if not prod:
                        break
                key = (ka + kb + m, gamma)
                slot = acc.get(key)
                if slot is None:
                    slot = acc[key] = {}
                accumulate_scaled(slot, prod, two * c if odd_only else c)
    return acc

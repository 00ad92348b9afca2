# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_kernels_py``: same names, same semantics."""

from gmpy2 import mpq

BACKEND = "cython"

cdef object _MPQ = type(mpq(0))
cdef object _ZERO = mpq(0)
cdef object _ONE = mpq(1)


cdef inline object _q(object x):
    if type(x) is _MPQ:
        return x
    return mpq(x)


cdef class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    cdef public object re
    cdef public object im

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @classmethod
    def _raw(cls, re, im):
        return _new(re, im)

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
            return self.re == (<GaussianRational>other).re and self.im == (<GaussianRational>other).im
        if isinstance(other, complex):
            return self.re == other.real and self.im == other.imag
        try:
            return self.im == 0 and self.re == other
        except TypeError:
            return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        if r is NotImplemented:
            return r
        return not r

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __neg__(self):
        return _new(-self.re, -self.im)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(self, GaussianRational):
            return _add(<GaussianRational>self, other)
        return _add(<GaussianRational>other, self)

    def __radd__(self, other):
        return _add(self, other)

    def __sub__(self, other):
        if isinstance(self, GaussianRational):
            if isinstance(other, GaussianRational):
                return _new(self.re - (<GaussianRational>other).re, self.im - (<GaussianRational>other).im)
            if isinstance(other, (int, _MPQ)):
                return _new(self.re - other, self.im)
            return NotImplemented
        return (<GaussianRational>other).__rsub__(self)

    def __rsub__(self, other):
        if isinstance(other, (int, _MPQ)):
            return _new(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(self, GaussianRational):
            return _mul_any(<GaussianRational>self, other)
        return _mul_any(<GaussianRational>other, self)

    def __rmul__(self, other):
        return _mul_any(self, other)

    def __truediv__(self, other):
        cdef GaussianRational o
        if not isinstance(self, GaussianRational):
            return (<GaussianRational>other).__rtruediv__(self)
        if isinstance(other, GaussianRational):
            o = <GaussianRational>other
            den = o.re * o.re + o.im * o.im
            if not den:
                raise ZeroDivisionError("division by zero Gaussian rational")
            a = self.re
            b = self.im
            return _new((a * o.re + b * o.im) / den, (b * o.re - a * o.im) / den)
        if isinstance(other, (int, _MPQ)):
            if not other:
                raise ZeroDivisionError("division by zero")
            return _new(self.re / other, self.im / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, _MPQ)):
            return GaussianRational(other) / self
        return NotImplemented

    def __pow__(self, e, mod):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return GaussianRational(1) / (self ** (-e))
        result = _new(_ONE, _ZERO)
        base = self
        while e:
            if e & 1:
                result = _mul(<GaussianRational>result, <GaussianRational>base)
            base = _mul(<GaussianRational>base, <GaussianRational>base)
            e >>= 1
        return result

    def conjugate(self):
        return _new(self.re, -self.im)

    def times_i_power(self, m):
        """Multiply by ``i**m`` without general multiplication."""
        m %= 4
        if m == 0:
            return self
        if m == 1:
            return _new(-self.im, self.re)
        if m == 2:
            return _new(-self.re, -self.im)
        return _new(self.im, -self.re)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __reduce__(self):
        return (GaussianRational, (self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return f"{self.re}+{self.im} i" if self.im >= 0 else f"{self.re}-{-self.im} i"


cdef inline GaussianRational _new(object re, object im):
    cdef GaussianRational g = GaussianRational.__new__(GaussianRational)
    g.re = re
    g.im = im
    return g


cdef inline GaussianRational _mul(GaussianRational x, GaussianRational y):
    return _new(x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re)


cdef object _mul_any(GaussianRational x, object other):
    if isinstance(other, GaussianRational):
        return _mul(x, <GaussianRational>other)
    if isinstance(other, (int, _MPQ)):
        return _new(x.re * other, x.im * other)
    return NotImplemented


cdef object _add(GaussianRational x, object other):
    if isinstance(other, GaussianRational):
        return _new(x.re + (<GaussianRational>other).re, x.im + (<GaussianRational>other).im)
    if isinstance(other, (int, _MPQ)):
        return _new(x.re + other, x.im)
    return NotImplemented


def convolve(dict fa, dict fb):
    """Product of two sparse Laurent/ordinary polynomials keyed by exponent tuples."""
    cdef dict out = {}
    cdef tuple ka, kb
    cdef Py_ssize_t n, t
    cdef list buf
    cdef object ca, cb, key, prev, prod
    cdef bint exact
    if not fa or not fb:
        return {}
    for ka, ca in fa.items():
        n = len(ka)
        exact = type(ca) is GaussianRational
        for kb, cb in fb.items():
            buf = [None] * n
            for t in range(n):
                buf[t] = <long>ka[t] + <long>kb[t]
            key = tuple(buf)
            if exact and type(cb) is GaussianRational:
                prod = _mul(<GaussianRational>ca, <GaussianRational>cb)
            else:
                prod = ca * cb
            prev = out.get(key)
            if prev is None:
                out[key] = prod
            elif type(prev) is GaussianRational and type(prod) is GaussianRational:
                out[key] = _new((<GaussianRational>prev).re + (<GaussianRational>prod).re,
                                (<GaussianRational>prev).im + (<GaussianRational>prod).im)
            else:
                out[key] = prev + prod
    return {k: v for k, v in out.items() if v}


def accumulate_scaled(dict target, dict source, scale):
    """``target += scale * source`` in place on sparse dicts."""
    cdef object k, v, prev, term
    cdef bint exact = type(scale) is GaussianRational
    for k, v in source.items():
        if exact and type(v) is GaussianRational:
            term = _mul(<GaussianRational>scale, <GaussianRational>v)
        else:
            term = scale * v
        prev = target.get(k)
        if prev is None:
            target[k] = term
        elif type(prev) is GaussianRational and type(term) is GaussianRational:
            target[k] = _new((<GaussianRational>prev).re + (<GaussianRational>term).re,
                             (<GaussianRational>prev).im + (<GaussianRational>term).im)
        else:
            target[k] = prev + term


def contraction_terms(alpha, beta, pairs):
    """Bidifferential contraction data for ``y**alpha`` times ``y**beta``.

    Returns ``(m, gamma, coef)`` with rational ``coef``; the full Moyal
    coefficient is ``coef * (i/2)**m / m!`` times ``hbar**m``.
    """
    cdef list out = []
    cdef dict level = {(tuple(alpha), tuple(beta)): mpq(1)}
    cdef dict acc, nxt
    cdef tuple a, b, gamma, na, nb
    cdef Py_ssize_t m = 0, i, j, ai, bj
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


def accumulate(dict target, dict source):
    """``target += source`` in place on sparse dicts."""
    cdef object k, v, prev
    for k, v in source.items():
        prev = target.get(k)
        if prev is None:
            target[k] = v
        elif type(prev) is GaussianRational and type(v) is GaussianRational:
            target[k] = _new((<GaussianRational>prev).re + (<GaussianRational>v).re,
                             (<GaussianRational>prev).im + (<GaussianRational>v).im)
        else:
            target[k] = prev + v


def moyal_blocks(list blocks_a, list blocks_b, long trunc, table, bint y0_only, bint odd_only, two):
    """Blockwise Moyal product; see the pure-Python twin for the data layout."""
    cdef dict acc = {}
    cdef dict fa, fb, slot, prod
    cdef tuple alpha, beta, gamma, key
    cdef long ka, kb, da, db, m, na, t
    cdef object c
    cdef bint skip
    for ka, alpha, da, fa in blocks_a:
        na = 0
        for t in alpha:
            na += t
        for kb, beta, db, fb in blocks_b:
            if da + db > trunc:
                break
            if y0_only:
                t = 0
                for m in beta:
                    t += m
                if t != na:
                    continue
            prod = None
            for m, gamma, c in table(alpha, beta):
                if odd_only and not m % 2:
                    continue
                if y0_only:
                    skip = False
                    for t in gamma:
                        if t:
                            skip = True
                            break
                    if skip:
                        continue
                if prod is None:
                    prod = convolve(fa, fb)
                    if not prod:
                        break
                key = (ka + kb + m, gamma)
                slot = acc.get(key)
                if slot is None:
                    slot = {}
                    acc[key] = slot
                accumulate_scaled(slot, prod, two * c if odd_only else c)
    return acc

"""Scalar variants used as coefficient fields.

Every container in the package is parameterized by exactly one field object:
``EXACT`` (Gaussian rationals over arbitrary-precision rationals) or an
``ApproxField`` (double-precision complex with an equality tolerance).
"""
from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

from .kernels import GaussianRational

_MPQ = type(mpq(0))


class ScalarMismatchError(TypeError):
    """Raised when containers over different scalar variants are combined."""


def _to_mpq(x):
    if isinstance(x, _MPQ):
        return x
    if isinstance(x, (int, Fraction)):
        return mpq(x)
    if isinstance(x, str):
        return mpq(x.strip())
    if isinstance(x, float):
        return mpq(Fraction(x))
    raise TypeError(f"cannot convert {x!r} to a rational")


_EXACT_RE = re.compile(r"^\s*([+-]?[0-9/]+)\s*([+-])\s*([0-9/]+)\s*i\s*$")


class ExactField:
    """Gaussian rationals; equality is exact."""

    name = "exact"
    exact = True
    eps = 0

    def __init__(self):
        self.zero = GaussianRational(0, 0)
        self.one = GaussianRational(1, 0)
        self.i = GaussianRational(0, 1)

    def coerce(self, x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return GaussianRational(_to_mpq(x.real), _to_mpq(x.imag))
        if isinstance(x, str):
            return self.from_json(x)
        if isinstance(x, tuple) and len(x) == 2:
            return GaussianRational(_to_mpq(x[0]), _to_mpq(x[1]))
        return GaussianRational(_to_mpq(x), 0)

    def is_zero(self, x):
        return not x

    def close(self, a, b):
        return a == b

    def negligible(self, x):
        return not x

    def rational(self, num, den=1):
        return GaussianRational(mpq(num, den), 0)

    def unit_phase(self, x):
        """Exact scalars cannot represent ``exp(i*angle)`` for a float angle."""
        raise TypeError("exact scalars need translations given as exact phases")

    def to_json(self, x):
        return f"{x.re}+{x.im}i" if x.im >= 0 else f"{x.re}-{-x.im}i"

    def from_json(self, s):
        if isinstance(s, (int, float)):
            return self.coerce(s)
        m = _EXACT_RE.match(s)
        if m:
            re_part, sign, im_part = m.groups()
            im = _to_mpq(im_part)
            return GaussianRational(_to_mpq(re_part), im if sign == "+" else -im)
        return GaussianRational(_to_mpq(s), 0)

    def __eq__(self, other):
        return isinstance(other, ExactField)

    def __hash__(self):
        return hash("exact")

    def __repr__(self):
        return "EXACT"


class ApproxField:
    """Double-precision complex numbers compared with tolerance ``eps``."""

    name = "approx"
    exact = False

    def __init__(self, eps=1e-9):
        self.eps = float(eps)
        self.zero = 0j
        self.one = 1 + 0j
        self.i = 1j

    def coerce(self, x):
        if isinstance(x, GaussianRational):
            return complex(x)
        if isinstance(x, str):
            return self.from_json(x)
        if isinstance(x, tuple) and len(x) == 2:
            return complex(float(x[0]), float(x[1]))
        return complex(x)

    def is_zero(self, x):
        return x == 0

    def close(self, a, b):
        return abs(a - b) <= self.eps

    def negligible(self, x):
        return abs(x) <= self.eps

    def rational(self, num, den=1):
        return complex(num / den)

    def unit_phase(self, angle):
        import cmath

        return cmath.exp(1j * float(angle))

    def to_json(self, x):
        return [x.real, x.imag]

    def from_json(self, s):
        if isinstance(s, list):
            return complex(s[0], s[1])
        if isinstance(s, str):
            return complex(ExactField().from_json(s))
        return complex(s)

    def __eq__(self, other):
        return isinstance(other, ApproxField) and other.eps == self.eps

    def __hash__(self):
        return hash(("approx", self.eps))

    def __repr__(self):
        return f"ApproxField(eps={self.eps})"


EXACT = ExactField()


def field_from_name(name, eps=1e-9):
    if name in ("exact", None):
        return EXACT
    if name == "approx":
        return ApproxField(eps)
    raise ValueError(f"unknown scalar variant {name!r}")


def same_field(a, b):
    if a != b:
        raise ScalarMismatchError(f"scalar variants differ: {a!r} vs {b!r}")
    return a

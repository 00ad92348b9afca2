"""Formal power series in hbar with base-function coefficients, stamped with a reliable order."""
from __future__ import annotations

from .basefunc import BaseFunction


class OrderError(ValueError):
    """Comparison or access beyond the reliable order of a series."""


class HbarSeries:
    """``sum_{k <= N} hbar**k f_k``; coefficients beyond ``N`` are unknown, not zero."""

    __slots__ = ("coeffs", "N")

    def __init__(self, coeffs, N=None):
        coeffs = list(coeffs)
        if not coeffs:
            raise ValueError("a series needs at least one coefficient")
        ring, dim, field = coeffs[0].ring, coeffs[0].dim, coeffs[0].field
        for f in coeffs:
            if not isinstance(f, BaseFunction):
                raise TypeError("series coefficients must be base functions")
            if (f.ring, f.dim) != (ring, dim):
                raise ValueError("series coefficients live on different rings")
            if f.field != field:
                from .scalars import ScalarMismatchError

                raise ScalarMismatchError("series coefficients mix scalar variants")
        N = len(coeffs) - 1 if N is None else N
        while len(coeffs) <= N:
            coeffs.append(coeffs[0].zero_like())
        self.coeffs = tuple(coeffs[: N + 1])
        self.N = N

    @classmethod
    def of(cls, f, N):
        """Promote a base function or a list to a series of reliable order ``N``."""
        if isinstance(f, HbarSeries):
            if f.N < N:
                raise OrderError(f"series is only reliable to order {f.N}, {N} requested")
            return cls(f.coeffs, N)
        if isinstance(f, BaseFunction):
            return cls([f], N)
        return cls(list(f), N)

    @property
    def ring(self):
        return self.coeffs[0].ring

    @property
    def dim(self):
        return self.coeffs[0].dim

    @property
    def field(self):
        return self.coeffs[0].field

    def __getitem__(self, k):
        if k > self.N:
            raise OrderError(f"order {k} is beyond the reliable order {self.N}")
        return self.coeffs[k]

    def __len__(self):
        return self.N + 1

    def _common(self, other):
        other = other if isinstance(other, HbarSeries) else HbarSeries.of(other, self.N)
        return other, min(self.N, other.N)

    def __add__(self, other):
        other, N = self._common(other)
        return HbarSeries([self.coeffs[k] + other.coeffs[k] for k in range(N + 1)], N)

    def __sub__(self, other):
        other, N = self._common(other)
        return HbarSeries([self.coeffs[k] - other.coeffs[k] for k in range(N + 1)], N)

    def __neg__(self):
        return HbarSeries([-f for f in self.coeffs], self.N)

    def scale(self, c):
        return HbarSeries([f.scale(c) for f in self.coeffs], self.N)

    def times_hbar(self, power=1):
        zero = self.coeffs[0].zero_like()
        return HbarSeries([zero] * power + list(self.coeffs[: self.N + 1 - power]), self.N)

    def truncate(self, N):
        if N > self.N:
            raise OrderError(f"cannot extend reliable order {self.N} to {N}")
        return HbarSeries(self.coeffs[: N + 1], N)

    def equal_through(self, other, N):
        """Coefficient-wise equality through order ``N`` (refused beyond either stamp)."""
        other = other if isinstance(other, HbarSeries) else HbarSeries.of(other, N)
        if N > self.N or N > other.N:
            raise OrderError(f"comparison through {N} exceeds reliable orders {self.N}, {other.N}")
        return all(self.coeffs[k] == other.coeffs[k] for k in range(N + 1))

    def is_zero_through(self, N):
        if N > self.N:
            raise OrderError(f"order {N} exceeds the reliable order {self.N}")
        return all(f.is_zero() for f in self.coeffs[: N + 1])

    def lowest_order(self):
        """Smallest ``k`` with a nonzero coefficient, or ``None``."""
        return next((k for k, f in enumerate(self.coeffs) if not f.is_zero()), None)

    def __eq__(self, other):
        if not isinstance(other, HbarSeries):
            return NotImplemented
        return self.N == other.N and self.equal_through(other, self.N)

    def __hash__(self):
        return hash((self.N, self.coeffs))

    def __repr__(self):
        return f"HbarSeries(N={self.N}, {list(self.coeffs)!r})"

    def to_json(self):
        return {
            "N": self.N,
            "ring": self.ring,
            "orders": [
                {"k": k, "terms": [{"x": t["key"], "coef": t["coef"]} for t in f.to_json()["terms"]]}
                for k, f in enumerate(self.coeffs)
            ],
        }

"""Seeded generators for random test data.

Everything is drawn from a caller-supplied :class:`random.Random`, so a seed
pins the whole sample and reruns reproduce it bit for bit.
"""
from __future__ import annotations

import random
from itertools import combinations_with_replacement

from gmpy2 import mpq

from .basefunc import EUCLIDEAN, TORUS, BaseFunction
from .geometry import AffineConnectionData
from .scalars import EXACT


def rng_for(seed):
    return random.Random(seed)


def small_rational(rng, span=3, den=3):
    return mpq(rng.randint(-span, span), rng.randint(1, den))


def small_scalar(rng, field=EXACT, complex_part=True):
    re = small_rational(rng)
    im = small_rational(rng) if complex_part and rng.random() < 0.3 else mpq(0)
    return field.coerce((re, im)) if field.exact else complex(float(re), float(im))


def _monomials(dim, max_degree):
    out = []
    for d in range(max_degree + 1):
        for combo in combinations_with_replacement(range(dim), d):
            key = [0] * dim
            for j in combo:
                key[j] += 1
            out.append(tuple(key))
    return out


def random_polynomial(rng, dim, max_degree=4, n_terms=None, field=EXACT):
    """Sparse polynomial on ``R^dim`` with total degree at most ``max_degree``."""
    keys = _monomials(dim, max_degree)
    n_terms = n_terms if n_terms is not None else rng.randint(1, 4)
    chosen = rng.sample(keys, min(n_terms, len(keys)))
    terms = {k: small_scalar(rng, field) for k in chosen}
    f = BaseFunction(EUCLIDEAN, dim, terms, field)
    return f if not f.is_zero() else BaseFunction.constant(EUCLIDEAN, dim, 1, field)


def random_fourier(rng, dim, max_freq=1, n_terms=None, field=EXACT):
    """Finite Fourier sum with frequencies in ``[-max_freq, max_freq]^dim``."""
    n_terms = n_terms if n_terms is not None else rng.randint(1, 3)
    terms = {}
    for _ in range(n_terms):
        m = tuple(rng.randint(-max_freq, max_freq) for _ in range(dim))
        terms[m] = small_scalar(rng, field)
    f = BaseFunction(TORUS, dim, terms, field)
    return f if not f.is_zero() else BaseFunction.constant(TORUS, dim, 1, field)


def random_function(rng, manifold, field=EXACT, max_degree=2):
    if manifold.kind == TORUS:
        return random_fourier(rng, manifold.dim, 1, field=field)
    return random_polynomial(rng, manifold.dim, max_degree, field=field)


def random_symplectic_connection(rng, manifold, max_degree=1, density=0.5, field=EXACT):
    """Torsion-free symplectic connection from a random totally symmetric lowered tensor."""
    dim = manifold.dim
    lowered = {}
    for triple in combinations_with_replacement(range(dim), 3):
        if rng.random() >= density:
            continue
        f = random_function(rng, manifold, field, max_degree)
        for perm in {(a, b, c) for a, b, c in _perms(triple)}:
            lowered[perm] = f
    return AffineConnectionData.from_lowered(manifold, lowered, field)


def _perms(t):
    a, b, c = t
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]

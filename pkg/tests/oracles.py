"""Reference computations that share no code with the package.

* ``NormalOrderAlgebra``: the Weyl algebra as words in the tensor algebra
  modulo ``y_i y_j - y_j y_i = i hbar L^{ij}``, reduced to sorted words.
  Symmetric (Weyl-ordered) monomials are averages over rearrangements.
* ``moyal_closed_form``: the bidifferential Moyal series in sympy.
* ``taylor_section``: the Taylor jet ``sum_a d^a f / a! y^a``.
* ``enumerate_h2``: brute-force second cohomology of a cyclic group with
  coefficients in a cyclic group.

Scalars are sympy's Gaussian rationals ``QQ_I`` or sympy expressions.
"""
from __future__ import annotations

from itertools import product
from math import factorial

import sympy
from sympy.polys.domains import QQ_I
from sympy.utilities.iterables import multiset_permutations


def gauss(c):
    """Package scalar (anything with ``.real``/``.imag`` rationals) to ``QQ_I``."""
    re, im = c.real, c.imag
    return QQ_I(sympy.Rational(str(re)), sympy.Rational(str(im)))


def sym(c):
    return sympy.Rational(str(c.real)) + sympy.I * sympy.Rational(str(c.imag))


class NormalOrderAlgebra:
    """Polynomials ``{(k, word): coef}`` with ``word`` a sorted tuple of generator indices."""

    def __init__(self, bracket):
        self.bracket = bracket  # bracket[i][j] = L^{ij}, so [y_i, y_j] = i hbar L^{ij}
        self.dim = len(bracket)

    def add(self, acc, key, c):
        v = acc.get(key, QQ_I.zero) + c
        if v == QQ_I.zero:
            acc.pop(key, None)
        else:
            acc[key] = v

    def reduce_word(self, k, word, c, acc):
        """Rewrite ``c hbar^k word`` to sorted words, accumulating in ``acc``."""
        stack = [(k, tuple(word), c)]
        ihbar = QQ_I(0, 1)
        while stack:
            k, w, c = stack.pop()
            for p in range(len(w) - 1):
                if w[p] > w[p + 1]:
                    j, i = w[p], w[p + 1]
                    swapped = w[:p] + (i, j) + w[p + 2:]
                    stack.append((k, swapped, c))
                    lam = self.bracket[i][j]
                    if lam:
                        # y_j y_i = y_i y_j - i hbar L^{ij}
                        stack.append((k + 1, w[:p] + w[p + 2:], -c * ihbar * QQ_I(lam, 0)))
                    break
            else:
                self.add(acc, (k, w), c)
        return acc

    def from_weyl_monomial(self, k, alpha, c):
        letters = [i for i, e in enumerate(alpha) for _ in range(e)]
        arrangements = list(multiset_permutations(letters))
        share = c * QQ_I(sympy.Rational(1, len(arrangements)), 0)
        acc = {}
        for w in arrangements:
            self.reduce_word(k, w, share, acc)
        return acc

    def from_terms(self, terms):
        """``{(k, alpha): coef}`` in Weyl ordering to normal ordering."""
        acc = {}
        for (k, alpha), c in terms.items():
            for key, v in self.from_weyl_monomial(k, alpha, c).items():
                self.add(acc, key, v)
        return acc

    def mul(self, a, b):
        acc = {}
        for (ka, wa), ca in a.items():
            for (kb, wb), cb in b.items():
                self.reduce_word(ka + kb, wa + wb, ca * cb, acc)
        return acc

    @staticmethod
    def truncate(a, D):
        return {(k, w): c for (k, w), c in a.items() if 2 * k + len(w) <= D}


def moyal_closed_form(f, g, variables, bracket, hbar, order):
    """``sum_m (i hbar/2)^m/m! L^{i1 j1}...L^{im jm} d_I f d_J g`` through ``hbar^order``."""
    total = f * g
    pairs = [(f, g, sympy.Integer(1))]
    for m in range(1, order + 1):
        nxt = []
        for a, b, w in pairs:
            for i, j in product(range(len(variables)), repeat=2):
                lam = bracket[i][j]
                if lam:
                    da = sympy.diff(a, variables[i])
                    db = sympy.diff(b, variables[j])
                    if da != 0 and db != 0:
                        nxt.append((da, db, w * lam))
        pairs = nxt
        if not pairs:
            break
        term = sum(w * a * b for a, b, w in pairs)
        total += (sympy.I * hbar / 2) ** m / factorial(m) * term
    return sympy.expand(total)


def taylor_section(f, variables, D):
    """``{alpha: d^alpha f / alpha!}`` for ``|alpha| <= D`` (sympy expressions in the base variables)."""
    dim = len(variables)
    out = {}
    for alpha in product(range(D + 1), repeat=dim):
        if sum(alpha) > D:
            continue
        expr = f
        for v, e in zip(variables, alpha):
            expr = sympy.diff(expr, v, e) if e else expr
        expr = sympy.expand(expr / sympy.prod([factorial(e) for e in alpha]))
        if expr != 0:
            out[alpha] = expr
    return out


def enumerate_h2(gamma_order, coeff_order, act=lambda g, a: a):
    """All normalized 2-cocycles ``Z/m x Z/m -> Z/k`` and the set of coboundaries.

    Returns ``(cocycles, coboundaries)`` as sets of tuples indexed by ``(g, h)`` pairs.
    """
    G = range(gamma_order)
    pairs = [(g, h) for g in G for h in G]

    def mul(g, h):
        return (g + h) % gamma_order

    cocycles = set()
    for values in product(range(coeff_order), repeat=len(pairs)):
        a = dict(zip(pairs, values))
        ok = all(
            (act(g, a[(h, l)]) + a[(g, mul(h, l))]) % coeff_order == (a[(mul(g, h), l)] + a[(g, h)]) % coeff_order
            for g in G
            for h in G
            for l in G
        )
        if ok:
            cocycles.add(tuple(a[p] for p in pairs))
    coboundaries = set()
    for values in product(range(coeff_order), repeat=gamma_order):
        b = dict(zip(G, values))
        coboundaries.add(tuple((b[g] + act(g, b[h]) - b[mul(g, h)]) % coeff_order for g, h in pairs))
    return cocycles, coboundaries


def betti_over_Q(n_vertices, triangles):
    """Betti numbers of a 2-complex by ranks of boundary matrices over Q (sympy)."""
    from itertools import combinations

    tris = sorted({tuple(sorted(t)) for t in triangles})
    edges = sorted({e for t in tris for e in combinations(t, 2)})
    verts = list(range(n_vertices))
    d1 = sympy.zeros(len(verts), len(edges))
    for c, (a, b) in enumerate(edges):
        d1[a, c] = -1
        d1[b, c] = 1
    d2 = sympy.zeros(len(edges), len(tris))
    eidx = {e: i for i, e in enumerate(edges)}
    for c, (a, b, t) in enumerate(tris):
        d2[eidx[(b, t)], c] += 1
        d2[eidx[(a, t)], c] -= 1
        d2[eidx[(a, b)], c] += 1
    r1 = d1.rank() if edges else 0
    r2 = d2.rank() if tris else 0
    return [len(verts) - r1, len(edges) - r1 - r2, len(tris) - r2]

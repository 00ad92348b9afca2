"""Chart-level geometry on R^{2n} and the torus T^{2n}.

Manifolds carry the standard constant symplectic matrix.  Maps are affine
symplectomorphisms ``x -> A x + b``; on the torus ``A`` is an integral matrix
and the translation is stored as exact phases ``exp(i b_j)``, so a rotation by
an angle whose cosine and sine are rational (for instance ``3/5 + 4/5 i``) is
represented exactly even though the angle is an irrational multiple of pi.
"""
from __future__ import annotations

from collections import deque
from itertools import product as iproduct

from gmpy2 import mpq

from .basefunc import EUCLIDEAN, TORUS, BaseFunction
from .forms import ScalarForm, WeylForm
from .scalars import EXACT, same_field
from .weyl import WeylSpace, rational_inverse, standard_symplectic


class UnsupportedOperationError(ValueError):
    pass


class GeometryError(ValueError):
    pass


# manifolds ---------------------------------------------------------------

class ChartManifold:
    """``R^{2n}`` or ``T^{2n}`` with ``omega = sum dx^i ^ dx^{n+i}``."""

    def __init__(self, kind, n):
        if kind not in (EUCLIDEAN, TORUS):
            raise GeometryError(f"unknown manifold kind {kind!r}")
        if n < 1:
            raise GeometryError("half-dimension must be at least 1")
        self.kind = kind
        self.n = n
        self.J = standard_symplectic(n)

    @property
    def dim(self):
        return 2 * self.n

    @property
    def ring(self):
        return self.kind

    def space(self, D, field=EXACT):
        return WeylSpace(self.n, D, self.kind, field)

    def omega(self, space):
        self._check_space(space)
        return ScalarForm.symplectic(space)

    def _check_space(self, space):
        if space.n != self.n or space.ring != self.kind:
            raise GeometryError("Weyl space does not live on this manifold")

    def __eq__(self, other):
        return isinstance(other, ChartManifold) and (self.kind, self.n) == (other.kind, other.n)

    def __hash__(self):
        return hash((self.kind, self.n))

    def __repr__(self):
        return f"ChartManifold({self.kind!r}, n={self.n})"

    def to_json(self):
        return {"kind": self.kind, "n": self.n}

    @classmethod
    def from_json(cls, data):
        return cls(data["kind"], data["n"])


# connections --------------------------------------------------------------

class AffineConnectionData:
    """Christoffel symbols ``Gamma^k_{ij}`` as base functions, sparse in ``(k, i, j)``.

    The same container holds differences of connections (plain (1,2)-tensors),
    which is how the obstruction cocycle stores its values.
    """

    def __init__(self, manifold, symbols=None, field=EXACT):
        self.manifold = manifold
        self.field = field
        dim = manifold.dim
        clean = {}
        for (k, i, j), f in (symbols or {}).items():
            if not all(0 <= t < dim for t in (k, i, j)):
                raise GeometryError(f"Christoffel index {(k, i, j)} out of range")
            if not isinstance(f, BaseFunction):
                f = BaseFunction.constant(manifold.kind, dim, f, field)
            if f.ring != manifold.kind or f.dim != dim:
                raise GeometryError(f"Christoffel entry {(k, i, j)} lives on the wrong ring")
            same_field(f.field, field)
            if not f.is_zero():
                clean[(k, i, j)] = f
        self.symbols = clean

    @classmethod
    def flat(cls, manifold, field=EXACT):
        return cls(manifold, {}, field)

    @classmethod
    def from_lowered(cls, manifold, lowered, field=EXACT):
        """Connection from lowered symbols ``L_{k,ij} = J_{kl} Gamma^l_{ij}``.

        A totally symmetric ``L`` gives a torsion-free symplectic connection.
        """
        dim = manifold.dim
        Jinv = rational_inverse(manifold.J)
        out = {}
        for (l, i, j), f in lowered.items():
            for k in range(dim):
                c = Jinv[k][l]
                if c:
                    key = (k, i, j)
                    term = f.scale(c)
                    out[key] = out[key] + term if key in out else term
        return cls(manifold, out, field)

    def gamma(self, k, i, j):
        return self.symbols.get((k, i, j)) or BaseFunction(self.manifold.kind, self.manifold.dim, {}, self.field)

    def lowered(self, k, i, j):
        """``L_{k,ij} = J_{kl} Gamma^l_{ij}``."""
        J = self.manifold.J
        total = BaseFunction(self.manifold.kind, self.manifold.dim, {}, self.field)
        for l in range(self.manifold.dim):
            if J[k][l] and (l, i, j) in self.symbols:
                total = total + self.symbols[(l, i, j)].scale(J[k][l])
        return total

    def is_zero(self):
        return not self.symbols

    def _check(self, other):
        if self.manifold != other.manifold:
            raise GeometryError("connections live on different manifolds")
        same_field(self.field, other.field)

    def __add__(self, other):
        self._check(other)
        out = dict(self.symbols)
        for key, f in other.symbols.items():
            out[key] = out[key] + f if key in out else f
        return AffineConnectionData(self.manifold, out, self.field)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.symbols)
        for key, f in other.symbols.items():
            out[key] = out[key] - f if key in out else -f
        return AffineConnectionData(self.manifold, out, self.field)

    def scale(self, c):
        return AffineConnectionData(self.manifold, {k: f.scale(c) for k, f in self.symbols.items()}, self.field)

    def __eq__(self, other):
        if not isinstance(other, AffineConnectionData):
            return NotImplemented
        return (self - other).is_zero() if self.manifold == other.manifold else False

    def __hash__(self):
        return hash(frozenset(self.symbols.items()))

    def __repr__(self):
        return f"AffineConnectionData({len(self.symbols)} nonzero symbols)"

    def pullback(self, phi):
        """``(phi^* Gamma)^k_{ij}(x) = (A^{-1})^k_l Gamma^l_{mn}(phi x) A^m_i A^n_j``.

        Affine maps have no second derivatives, so the same rule pulls back
        both connections and tensors.
        """
        phi.check_manifold(self.manifold)
        dim = self.manifold.dim
        f = self.field
        A = [[f.coerce(x) for x in row] for row in phi.A]
        Ainv = [[f.coerce(x) for x in row] for row in phi.A_inv]
        moved = {key: g.pullback_affine(phi.A, phi.translation_for(f)) for key, g in self.symbols.items()}
        out = {}
        for (l, m, nn), g in moved.items():
            for k in range(dim):
                a = Ainv[k][l]
                if f.is_zero(a):
                    continue
                for i in range(dim):
                    b = A[m][i]
                    if f.is_zero(b):
                        continue
                    for j in range(dim):
                        c = A[nn][j]
                        if f.is_zero(c):
                            continue
                        key = (k, i, j)
                        term = g.scale(a * b * c)
                        out[key] = out[key] + term if key in out else term
        return AffineConnectionData(self.manifold, out, self.field)

    def to_json(self):
        return {
            "christoffel": [
                {"k": k, "i": i, "j": j, "f": g.to_json()["terms"]} for (k, i, j), g in sorted(self.symbols.items())
            ]
        }

    @classmethod
    def from_json(cls, manifold, data, field=EXACT):
        syms = {}
        for entry in data.get("christoffel", []):
            g = BaseFunction(
                manifold.kind,
                manifold.dim,
                {tuple(t["key"]): field.from_json(t["coef"]) for t in entry["f"]},
                field,
            )
            key = (entry["k"], entry["i"], entry["j"])
            syms[key] = syms[key] + g if key in syms else g
        return cls(manifold, syms, field)


def check_symplectic_connection(c):
    """Torsion-freeness and ``nabla omega = 0`` with the first violating index triple."""
    dim = c.manifold.dim
    report = {"torsion_free": True, "symplectic": True, "torsion_violation": None, "symplectic_violation": None}
    for k, i, j in iproduct(range(dim), repeat=3):
        if i < j and report["torsion_free"] and c.gamma(k, i, j) != c.gamma(k, j, i):
            report["torsion_free"] = False
            report["torsion_violation"] = [k, i, j]
    # (nabla_i omega)_{jk} = L_{k,ij} - L_{j,ik}
    for i, j, k in iproduct(range(dim), repeat=3):
        if j < k and c.lowered(k, i, j) != c.lowered(j, i, k):
            report["symplectic"] = False
            report["symplectic_violation"] = [i, j, k]
            break
    return report


# maps ---------------------------------------------------------------------

def _matmul(A, B):
    n = len(A)
    return tuple(tuple(sum((A[i][k] * B[k][j] for k in range(n)), mpq(0)) for j in range(n)) for i in range(n))


def _transpose(A):
    return tuple(zip(*A))


class AffineSymplecto:
    """``x -> A x + b`` with ``A^T J A = J``.

    On the torus ``phases`` holds ``exp(i b_j)`` (exact Gaussian rationals of
    modulus one for the exact field); on ``R^{2n}`` ``b`` holds the
    translation vector.
    """

    def __init__(self, manifold, A, b=None, field=EXACT):
        dim = manifold.dim
        self.manifold = manifold
        self.field = field
        A = tuple(tuple(mpq(x) for x in row) for row in A)
        if len(A) != dim or any(len(r) != dim for r in A):
            raise GeometryError("linear part has the wrong shape")
        J = manifold.J
        if _matmul(_matmul(_transpose(A), J), A) != J:
            raise GeometryError("linear part is not symplectic: A^T J A != J")
        if manifold.kind == TORUS and any(x.denominator != 1 for row in A for x in row):
            raise GeometryError("torus maps need an integral linear part")
        self.A = A
        self.A_inv = rational_inverse(A)
        if manifold.kind == TORUS:
            phases = tuple(field.coerce(p) for p in (b if b is not None else [1] * dim))
            for p in phases:
                modulus = p * p.conjugate()
                if not field.close(modulus, field.one):
                    raise GeometryError(f"torus translation phase {p} does not have modulus one")
            self.b = phases
        else:
            self.b = tuple(field.coerce(x) for x in (b if b is not None else [0] * dim))
        if len(self.b) != dim:
            raise GeometryError("translation has the wrong length")

    def check_manifold(self, manifold):
        if manifold != self.manifold:
            raise GeometryError("map and object live on different manifolds")

    def translation_for(self, field):
        same_field(field, self.field)
        return self.b

    @classmethod
    def identity(cls, manifold, field=EXACT):
        dim = manifold.dim
        return cls(manifold, [[1 if i == j else 0 for j in range(dim)] for i in range(dim)], None, field)

    @classmethod
    def translation(cls, manifold, b, field=EXACT):
        dim = manifold.dim
        return cls(manifold, [[1 if i == j else 0 for j in range(dim)] for i in range(dim)], b, field)

    def is_identity(self):
        ident = AffineSymplecto.identity(self.manifold, self.field)
        return self == ident

    def compose(self, other):
        """``self o other``: first ``other``, then ``self``."""
        self.check_manifold(other.manifold)
        same_field(self.field, other.field)
        A = _matmul(self.A, other.A)
        f = self.field
        dim = self.manifold.dim
        if self.manifold.kind == TORUS:
            b = []
            for j in range(dim):
                p = self.b[j]
                for l in range(dim):
                    e = int(self.A[j][l])
                    if e:
                        p = p * _int_power(other.b[l], e, f)
                b.append(p)
        else:
            b = [
                self.b[j] + sum((other.b[l] * f.coerce(self.A[j][l]) for l in range(dim)), f.zero)
                for j in range(dim)
            ]
        return AffineSymplecto(self.manifold, A, b, f)

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self):
        f = self.field
        dim = self.manifold.dim
        Ai = self.A_inv
        if self.manifold.kind == TORUS:
            b = []
            for j in range(dim):
                p = f.one
                for l in range(dim):
                    e = int(Ai[j][l])
                    if e:
                        p = p * _int_power(self.b[l], -e, f)
                b.append(p)
        else:
            b = [-sum((self.b[l] * f.coerce(Ai[j][l]) for l in range(dim)), f.zero) for j in range(dim)]
        return AffineSymplecto(self.manifold, Ai, b, f)

    def apply(self, point):
        """Image of a point (phases on the torus)."""
        f = self.field
        dim = self.manifold.dim
        if self.manifold.kind == TORUS:
            out = []
            for j in range(dim):
                p = self.b[j]
                for l in range(dim):
                    e = int(self.A[j][l])
                    if e:
                        p = p * _int_power(f.coerce(point[l]), e, f)
                out.append(p)
            return out
        return [
            self.b[j] + sum((f.coerce(point[l]) * f.coerce(self.A[j][l]) for l in range(dim)), f.zero)
            for j in range(dim)
        ]

    def fixes(self, point):
        f = self.field
        return all(f.close(u, f.coerce(v)) for u, v in zip(self.apply(point), point))

    def __eq__(self, other):
        if not isinstance(other, AffineSymplecto):
            return NotImplemented
        if self.manifold != other.manifold or self.A != other.A:
            return False
        f = self.field
        return all(f.close(u, v) for u, v in zip(self.b, other.b))

    def __hash__(self):
        if self.field.exact:
            return hash((self.A, self.b))
        return hash(self.A)

    def __repr__(self):
        return f"AffineSymplecto(A={[[str(x) for x in r] for r in self.A]}, b={[str(x) for x in self.b]})"

    def to_json(self):
        key = "b_phase" if self.manifold.kind == TORUS else "b"
        return {"A": [[str(x) for x in row] for row in self.A], key: [self.field.to_json(x) for x in self.b]}

    @classmethod
    def from_json(cls, manifold, data, field=EXACT):
        key = "b_phase" if manifold.kind == TORUS else "b"
        b = data.get(key)
        if b is not None:
            b = [field.from_json(x) for x in b]
        return cls(manifold, [[mpq(str(x)) for x in row] for row in data["A"]], b, field)


def _int_power(p, e, field):
    if e >= 0:
        return p ** e
    return (field.one / p) ** (-e)


def pullback(phi, obj):
    """``phi^*`` on base functions, Weyl elements, forms and connections."""
    from .weyl import WeylElement
    from .forms import pullback_element

    if isinstance(obj, BaseFunction):
        phi.check_manifold(ChartManifold(obj.ring, obj.dim // 2))
        return obj.pullback_affine(phi.A, phi.translation_for(obj.field))
    if isinstance(obj, WeylForm):
        return obj.pullback(phi.A, phi.translation_for(obj.space.field))
    if isinstance(obj, WeylElement):
        return pullback_element(obj, phi.A, phi.translation_for(obj.space.field))
    if isinstance(obj, AffineConnectionData):
        return obj.pullback(phi)
    raise TypeError(f"cannot pull back {type(obj).__name__}")


def exterior_d(form):
    """Exterior derivative of a scalar (or Weyl-valued) form."""
    if isinstance(form, BaseFunction):
        raise TypeError("wrap base functions in a ScalarForm before differentiating")
    return form.d()


def is_closed(form):
    return form.d().is_zero()


def form_from_base(space, comps, k=0):
    """Scalar form from ``{index tuple: BaseFunction}``; unsorted indices are reordered with sign."""
    out = {}
    for I, f in comps.items():
        I = tuple(I)
        if len(set(I)) != len(I):
            continue
        K = tuple(sorted(I))
        term = f if _perm_sign(I) > 0 else -f
        out[K] = out[K] + term if K in out else term
    return ScalarForm.from_base(space, out, k=k)


def _perm_sign(seq):
    sign = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign


# group actions -----------------------------------------------------------

class GroupAction:
    """A finite group or ``Z^k`` acting by affine symplectomorphisms.

    Group elements are labelled by indices (finite) or integer vectors
    (``Z^k``).  The action is a left action on points: the map of ``g h``
    is ``phi_g o phi_h``.  Pullback reverses the order, ``(gh)^* = h^* g^*``.
    """

    FINITE = "finite"
    FREE_ABELIAN = "free_abelian"

    def __init__(self, manifold, kind, generators, *, elements=None, words=None, table=None, field=EXACT):
        self.manifold = manifold
        self.kind = kind
        self.field = field
        self.generators = tuple(generators)
        self._elements = elements
        self._words = words
        self._table = table

    # constructors -----------------------------------------------------
    @classmethod
    def finite(cls, manifold, generators, field=EXACT, max_order=4096):
        """Close the generator maps under composition (breadth-first normal form)."""
        ident = AffineSymplecto.identity(manifold, field)
        elements = [ident]
        words = [()]
        index = {ident: 0}
        queue = deque([0])
        while queue:
            w = queue.popleft()
            for gi, g in enumerate(generators):
                m = g.compose(elements[w])
                if m not in index:
                    if len(elements) >= max_order:
                        raise GeometryError(f"group generated by the maps exceeds {max_order} elements")
                    index[m] = len(elements)
                    elements.append(m)
                    words.append((gi,) + words[w])
                    queue.append(index[m])
        size = len(elements)
        table = [[index[elements[a].compose(elements[b])] for b in range(size)] for a in range(size)]
        return cls(manifold, cls.FINITE, generators, elements=elements, words=words, table=table, field=field)

    @classmethod
    def from_table(cls, manifold, table, maps, field=EXACT):
        """Finite group from a multiplication table and one map per element, checked exactly."""
        size = len(table)
        if len(maps) != size or any(len(row) != size for row in table):
            raise GeometryError("table and element maps disagree in size")
        for a in range(size):
            for b in range(size):
                if maps[table[a][b]] != maps[a].compose(maps[b]):
                    raise GeometryError(f"assignment violates relation {a}*{b}={table[a][b]}")
        ident = next((e for e in range(size) if all(table[e][x] == x for x in range(size))), None)
        if ident is None:
            raise GeometryError("table has no identity element")
        words = _bfs_words(table, ident)
        return cls(manifold, cls.FINITE, list(maps), elements=list(maps), words=words, table=table, field=field)

    @classmethod
    def free_abelian(cls, manifold, generators, field=EXACT):
        for a, g in enumerate(generators):
            for b in range(a + 1, len(generators)):
                h = generators[b]
                if g.compose(h) != h.compose(g):
                    raise GeometryError(f"generators {a} and {b} do not commute")
        return cls(manifold, cls.FREE_ABELIAN, generators, field=field)

    # group structure --------------------------------------------------
    @property
    def is_finite(self):
        return self.kind == self.FINITE

    @property
    def rank(self):
        return len(self.generators)

    def order(self):
        if not self.is_finite:
            raise UnsupportedOperationError("infinite group has no finite order")
        return len(self._elements)

    def elements(self):
        if not self.is_finite:
            raise UnsupportedOperationError("cannot enumerate an infinite group")
        return list(range(len(self._elements)))

    @property
    def identity(self):
        if self.is_finite:
            return next(e for e in range(len(self._elements)) if self._words[e] == ())
        return (0,) * self.rank

    def generator(self, i):
        """Group element of the ``i``-th generator."""
        if self.is_finite:
            m = self.generators[i]
            return next(e for e, x in enumerate(self._elements) if x == m)
        return tuple(1 if t == i else 0 for t in range(self.rank))

    def mul(self, a, b):
        if self.is_finite:
            return self._table[a][b]
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        if self.is_finite:
            e = self.identity
            return next(b for b in range(len(self._elements)) if self._table[a][b] == e)
        return tuple(-x for x in a)

    def word(self, a):
        """Generator word ``(g1, ..., gk)`` with ``a = g1 * ... * gk`` (finite groups)."""
        if not self.is_finite:
            raise UnsupportedOperationError("words are only tabulated for finite groups")
        return self._words[a]

    def element_map(self, a):
        if self.is_finite:
            return self._elements[a]
        m = AffineSymplecto.identity(self.manifold, self.field)
        for i, e in enumerate(a):
            g = self.generators[i] if e >= 0 else self.generators[i].inverse()
            for _ in range(abs(e)):
                m = m.compose(g)
        return m

    def relations(self):
        """Pairs ``(a, b)`` to check: all pairs (finite) or generator pairs (``Z^k``)."""
        if self.is_finite:
            return [(a, b) for a in self.elements() for b in self.elements()]
        gens = [self.generator(i) for i in range(self.rank)]
        return [(g, h) for s, g in enumerate(gens) for h in gens[s + 1:]]

    def to_json(self):
        if self.is_finite:
            group = {"kind": self.FINITE, "order": self.order()}
        else:
            group = {"kind": self.FREE_ABELIAN, "rank": self.rank}
        return {"group": group, "generators": [g.to_json() for g in self.generators]}

    @classmethod
    def from_json(cls, manifold, data, field=EXACT):
        gens = [AffineSymplecto.from_json(manifold, g, field) for g in data["generators"]]
        kind = data["group"]["kind"]
        if kind == cls.FINITE:
            if "table" in data["group"]:
                return cls.from_table(manifold, data["group"]["table"], gens, field)
            return cls.finite(manifold, gens, field)
        if kind == cls.FREE_ABELIAN:
            return cls.free_abelian(manifold, gens, field)
        raise GeometryError(f"unknown group kind {kind!r}")


def _bfs_words(table, ident):
    size = len(table)
    words = {ident: ()}
    queue = deque([ident])
    while queue:
        w = queue.popleft()
        for g in range(size):
            m = table[g][w]
            if m not in words:
                words[m] = (g,) + words[w]
                queue.append(m)
    return [words[a] for a in range(size)]


# averaging and the obstruction cocycle ------------------------------------

def average_connection(act, c):
    """Mean of ``g^* c`` over a finite group; the result is invariant."""
    if not act.is_finite:
        raise UnsupportedOperationError("averaging needs a finite group")
    total = AffineConnectionData(c.manifold, {}, c.field)
    for g in act.elements():
        total = total + c.pullback(act.element_map(g))
    return total.scale(c.field.one / c.field.coerce(act.order()))


def is_invariant(act, c):
    if act.is_finite:
        gens = [act.element_map(act.generator(i)) for i in range(len(act.generators))]
    else:
        gens = list(act.generators)
    return all(c.pullback(g) == c for g in gens)


class ObstructionCocycle:
    """``D(g) = g^* c - c``, a 1-cocycle: ``D(mu gamma) = gamma^* D(mu) + D(gamma)``."""

    def __init__(self, act, connection):
        self.action = act
        self.connection = connection
        self.generator_values = [
            self.value(act.generator(i)) for i in range(len(act.generators))
        ]

    def value(self, g):
        m = self.action.element_map(g)
        return self.connection.pullback(m) - self.connection

    def is_zero(self):
        return all(v.is_zero() for v in self.generator_values)

    def identity_residual(self, mu, gamma):
        """``D(mu gamma) - gamma^* D(mu) - D(gamma)``; zero for every pair."""
        act = self.action
        lhs = self.value(act.mul(mu, gamma))
        rhs = self.value(mu).pullback(act.element_map(gamma)) + self.value(gamma)
        return lhs - rhs

    def coboundary_witness(self):
        """Tensor ``T`` with ``D(g) = g^* T - T`` (finite groups, via averaging)."""
        act = self.action
        if not act.is_finite:
            raise UnsupportedOperationError("coboundary test by averaging needs a finite group")
        c = self.connection
        total = AffineConnectionData(c.manifold, {}, c.field)
        for g in act.elements():
            total = total + self.value(g)
        mean = total.scale(c.field.one / c.field.coerce(act.order()))
        witness = mean.scale(-1)
        for g in act.elements():
            if witness.pullback(act.element_map(g)) - witness != self.value(g):
                return None
        return witness

    def is_coboundary(self):
        return self.coboundary_witness() is not None

    def to_json(self):
        return {"generators": [v.to_json() for v in self.generator_values]}


def connection_obstruction_cocycle(act, c):
    return ObstructionCocycle(act, c)

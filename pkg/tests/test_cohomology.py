from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import betti_over_Q, enumerate_h2
from fedosov import (
    EXACT,
    AffineConnectionData,
    AffineSymplecto,
    BaseFunction,
    CentralExtension,
    ChartManifold,
    FiniteGroup,
    GroupAction,
    ScalarForm,
    SimplicialComplex,
    UnsupportedOperationError,
    build_fedosov,
    connecting_map_H2,
    fixed_point_invariant,
    gnabla_membership,
    harmonic_witness,
    period_map,
    simplicial_cohomology,
    t1_class,
    tau,
    toy_z4_extension,
    weyl_exp,
    z_h1_invariants,
)
from fedosov.basefunc import EUCLIDEAN, TORUS
from fedosov.cohomology import ComplexError, InfiniteCyclic, twisted_conjugate
from fedosov.equivariance import central_character
from fedosov.weyl import weyl_mul

RP2 = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1), (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3)]


class TestSimplicial:
    def test_sphere(self):
        for coeff in ("Z", "C"):
            rep = simplicial_cohomology(SimplicialComplex.tetrahedron_boundary(), coeff)
            assert rep.ranks == [1, 0, 1]
            assert rep.torsion == [[], [], []]

    def test_torus(self):
        K = SimplicialComplex.torus7()
        assert K.euler_characteristic() == 0
        for coeff in ("Z", "C"):
            rep = simplicial_cohomology(K, coeff)
            assert rep.ranks == [1, 2, 1]
            assert rep.torsion == [[], [], []]

    def test_projective_plane_torsion(self):
        rep = simplicial_cohomology(SimplicialComplex(6, RP2), "Z")
        assert rep.ranks == [1, 0, 0]
        assert rep.torsion == [[], [], [2]]
        assert simplicial_cohomology(SimplicialComplex(6, RP2), "C").torsion == [[], [], []]

    @given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5)), max_size=8))
    def test_betti_oracle(self, raw):
        tris = sorted({tuple(sorted(t)) for t in raw if len(set(t)) == 3})
        rep = simplicial_cohomology(SimplicialComplex(6, tris), "C")
        assert rep.ranks == betti_over_Q(6, tris)

    def test_strict_constructor_and_validation(self):
        with pytest.raises(ComplexError):
            SimplicialComplex.from_lists(3, [[(0,), (1,), (2,)], [(0, 1)], [(0, 1, 2)]])
        with pytest.raises(ComplexError):
            SimplicialComplex(3, [(0, 0, 1)])
        with pytest.raises(ComplexError):
            SimplicialComplex(3, [(0, 1, 5)])
        full = [list(combinations(range(3), r)) for r in (1, 2, 3)]
        assert SimplicialComplex.from_lists(3, full).count(2) == 1


class TestConnectingMap:
    def _as_tuple(self, res, to_A):
        pairs = [(g, h) for g in range(2) for h in range(2)]
        return tuple(to_A(res.cocycle[p]) for p in pairs)

    def test_toy_extension_matches_enumeration(self):
        ext = toy_z4_extension()
        res = connecting_map_H2(ext, {0: 0, 1: 1})
        cocycles, coboundaries = enumerate_h2(2, 2)
        assert len(cocycles) // len(coboundaries) == 2
        a = self._as_tuple(res, lambda e: e // 2)
        assert a in cocycles and a not in coboundaries
        assert not res.trivial and res.identity_ok and res.relift_consistent

    def test_liftable_cocycle_is_trivial(self):
        res = connecting_map_H2(toy_z4_extension(), {0: 0, 1: 0})
        assert res.trivial
        # Z/2 -> Z/6 -> Z/3 over Gamma = Z/3: eta = id lifts to the homomorphism 1 -> 4
        ext = CentralExtension(FiniteGroup.cyclic(3), FiniteGroup.cyclic(6), FiniteGroup.cyclic(3), lambda e: e % 3, section=lambda g: g)
        eta = {0: 0, 1: 1, 2: 2}
        assert connecting_map_H2(ext, eta).trivial
        assert connecting_map_H2(ext, eta, lift={0: 0, 1: 4, 2: 2}).trivial

    def test_rejects_non_cocycle(self):
        ext = CentralExtension(FiniteGroup.cyclic(3), FiniteGroup.cyclic(6), FiniteGroup.cyclic(3), lambda e: e % 3, section=lambda g: g)
        with pytest.raises(ValueError):
            connecting_map_H2(ext, {0: 0, 1: 1, 2: 1})

    def test_non_central_kernel_rejected(self):
        from fedosov.cohomology import CentralExtensionError

        with pytest.raises(CentralExtensionError):
            CentralExtension(FiniteGroup.cyclic(2), FiniteGroup.cyclic(4), FiniteGroup.cyclic(2), lambda e: e % 3)

    def test_infinite_cyclic_is_always_trivial(self):
        Z4, Z2 = FiniteGroup.cyclic(4), FiniteGroup.cyclic(2)
        ext = CentralExtension(InfiniteCyclic(), Z4, Z2, lambda e: e % 2, lambda n, e: (-e) % 4, lambda n, g: (-g) % 2, section=lambda g: g)
        assert connecting_map_H2(ext, 1).trivial


T2 = ChartManifold(TORUS, 1)
R2 = ChartManifold(EUCLIDEAN, 1)
FT = build_fedosov(
    T2, AffineConnectionData.flat(T2), ScalarForm.from_base(T2.space(6), {(0, 1): BaseFunction.constant(TORUS, 2, "1/3")}), 6
)


class TestPeriods:
    def test_character_periods_are_integral(self):
        g = gnabla_membership(FT, central_character(FT, (2, -1)))
        rep = period_map(g.beta)
        assert rep.integral
        assert rep.values[0] == [EXACT.coerce((0, 2)), EXACT.coerce((0, -1))]
        assert t1_class(g).is_zero()

    @pytest.mark.parametrize("c,integral", [(("1/2", "0"), False), (("0+1i", "0+3i"), True), (("0+1/2i", "0"), False)])
    def test_lattice_membership(self, c, integral):
        rep = period_map(harmonic_witness(FT, c).beta)
        assert rep.integral is integral

    def test_t1_reduces_mod_lattice(self):
        a = t1_class(harmonic_witness(FT, ("0+3/2i", "0")))
        b = t1_class(harmonic_witness(FT, ("0+1/2i", "0")))
        assert a == b and not a.is_zero()

    def test_rejects_euclidean_and_open_forms(self):
        space = R2.space(4)
        with pytest.raises(UnsupportedOperationError):
            period_map(ScalarForm.from_base(space, {(0,): BaseFunction.constant(EUCLIDEAN, 2, 1)}))
        with pytest.raises(ValueError):
            period_map(ScalarForm.from_base(FT.space, {(0,): BaseFunction.fourier_mode((0, 1))}))


ROT = AffineSymplecto(R2, [["3/5", "-4/5"], ["4/5", "3/5"]])


class TestZInvariants:
    F = build_fedosov(R2, AffineConnectionData.flat(R2), None, 4)
    act = GroupAction.free_abelian(R2, [ROT])

    @given(st.integers(-3, 3).filter(bool), st.integers(-2, 2), st.integers(-2, 2))
    def test_fixed_point_value_is_a_twisted_conjugacy_invariant(self, c, p, q):
        F = self.F
        g = F.space.scalar(EXACT.coerce((2, 1)))
        f = BaseFunction(EUCLIDEAN, 2, {(1, 0): p, (0, 2): q, (1, 1): 1})
        b = weyl_mul(F.space.scalar(c), weyl_exp(tau(F, f).times_hbar(1)))
        h = twisted_conjugate(F, self.act, g, b)
        origin = [0, 0]
        assert fixed_point_invariant(self.act, h, origin) == fixed_point_invariant(self.act, g, origin)

    def test_separates_distinct_constants(self):
        F = self.F
        vals = {
            z_h1_invariants(F, self.act, F.space.scalar(c), [0, 0])["fixed_point_value"] for c in (2, 3, (2, 1))
        }
        assert len(vals) == 3

    def test_requires_a_fixed_point(self):
        with pytest.raises(ValueError):
            fixed_point_invariant(self.act, self.F.space.one(), [1, 0])

    def test_torus_reports_distinguish_witnesses(self):
        shift = AffineSymplecto(T2, [[1, 0], [0, 1]], ["3/5+4/5i", 1])
        act = GroupAction.free_abelian(T2, [shift])
        reps = [z_h1_invariants(FT, act, harmonic_witness(FT, (c, "0"))) for c in ("1/2", "1/3", "1/5")]
        keys = {str(r) for r in reps}
        assert len(keys) == 3

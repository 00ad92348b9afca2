from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fourier_sums, polynomials, weyl_elements
from fedosov import (
    AffineConnectionData,
    AffineSymplecto,
    BaseFunction,
    ChartManifold,
    GeometryError,
    GroupAction,
    WeylForm,
    WeylSpace,
    average_connection,
    connection_obstruction_cocycle,
    delta,
    delta_inv,
    is_invariant,
)
from fedosov.basefunc import EUCLIDEAN, TORUS
from fedosov.engine import pi00
from fedosov.forms import merge_sign
from fedosov.sampling import random_symplectic_connection, rng_for

R2 = ChartManifold(EUCLIDEAN, 1)
T2 = ChartManifold(TORUS, 1)
S = WeylSpace(1, 6, EUCLIDEAN)
S4 = WeylSpace(2, 4, EUCLIDEAN)
ST = WeylSpace(1, 6, TORUS)


@st.composite
def forms(draw, space, degrees=(0, 1, 2), max_weyl=None):
    comps = {}
    for p in degrees:
        for I in combinations(range(space.dim), p):
            if draw(st.booleans()):
                a = draw(weyl_elements(space, max_terms=3))
                if max_weyl is not None:
                    a = a.truncate(max_weyl)
                comps[I] = a
    return WeylForm(space, comps)


ROT4 = AffineSymplecto(R2, [[0, 1], [-1, 0]])
SHEAR = AffineSymplecto(R2, [[1, 2], [0, 1]], [1, -3])
T_SHEAR = AffineSymplecto(T2, [[1, 1], [0, 1]], [(0, 1), (-1, 0)])
T_SHIFT = AffineSymplecto(T2, [[1, 0], [0, 1]], ["3/5+4/5i", 1])


class TestExteriorCalculus:
    @given(forms(S4, degrees=(0, 1, 2)))
    def test_d_squared_zero(self, w):
        assert w.d().d().is_zero()

    @given(forms(S, degrees=(0, 1)))
    def test_delta_squared_zero(self, w):
        assert delta(delta(w)).is_zero()
        assert delta_inv(delta_inv(w)).is_zero()

    @given(forms(S, degrees=(0, 1, 2), max_weyl=S.D - 1))
    def test_homotopy_identity(self, w):
        # delta delta_inv + delta_inv delta = id - pi00 when nothing is lost to truncation
        lhs = delta(delta_inv(w)) + delta_inv(delta(w))
        assert lhs == w - pi00(w)

    @given(forms(ST, degrees=(0, 1, 2), max_weyl=ST.D - 1))
    def test_homotopy_identity_torus(self, w):
        assert delta(delta_inv(w)) + delta_inv(delta(w)) == w - pi00(w)

    @given(forms(S, degrees=(1,)), forms(S, degrees=(0, 1)))
    def test_d_is_a_graded_derivation(self, a, b):
        # d(a ^ b) = da ^ b - a ^ db for a 1-form a
        lhs = a.wedge(b).d()
        rhs = a.d().wedge(b) - a.wedge(b.d())
        assert lhs == rhs

    def test_merge_sign(self):
        assert merge_sign((1,), (0,)) == -1
        assert merge_sign((0,), (1,)) == 1
        assert merge_sign((0, 2), (1,)) == -1
        assert merge_sign((0,), (0,)) == 0


class TestPullback:
    @given(polynomials())
    def test_composition_law_functions(self, f):
        lhs = f.pullback_affine(SHEAR.compose(ROT4).A, SHEAR.compose(ROT4).b)
        rhs = f.pullback_affine(SHEAR.A, SHEAR.b).pullback_affine(ROT4.A, ROT4.b)
        assert lhs == rhs

    @given(fourier_sums())
    def test_composition_law_torus(self, f):
        comp = T_SHEAR.compose(T_SHIFT)
        lhs = f.pullback_affine(comp.A, comp.b)
        rhs = f.pullback_affine(T_SHEAR.A, T_SHEAR.b).pullback_affine(T_SHIFT.A, T_SHIFT.b)
        assert lhs == rhs

    @given(forms(S, degrees=(0, 1, 2)))
    def test_commutes_with_d(self, w):
        phi = SHEAR
        assert w.pullback(phi.A, phi.b).d() == w.d().pullback(phi.A, phi.b)

    @given(forms(ST, degrees=(0, 1)))
    def test_commutes_with_delta(self, w):
        phi = T_SHEAR
        assert delta(w.pullback(phi.A, phi.b)) == delta(w).pullback(phi.A, phi.b)

    @given(weyl_elements(S), weyl_elements(S))
    def test_is_an_algebra_map(self, a, b):
        from fedosov.forms import pullback_element
        from fedosov.weyl import weyl_mul

        phi = SHEAR
        pa, pb = pullback_element(a, phi.A, phi.b), pullback_element(b, phi.A, phi.b)
        assert pullback_element(weyl_mul(a, b), phi.A, phi.b) == weyl_mul(pa, pb)

    def test_connection_composition_law(self):
        c = random_symplectic_connection(rng_for(5), R2)
        comp = SHEAR.compose(ROT4)
        assert c.pullback(comp) == c.pullback(SHEAR).pullback(ROT4)


class TestSymplectomorphisms:
    def test_rejects_non_symplectic(self):
        with pytest.raises(GeometryError):
            AffineSymplecto(R2, [[2, 0], [0, 1]])

    def test_torus_needs_integral_matrix(self):
        with pytest.raises(GeometryError):
            AffineSymplecto(T2, [[2, 0], [0, "1/2"]])

    def test_torus_phase_modulus(self):
        with pytest.raises(GeometryError):
            AffineSymplecto(T2, [[1, 0], [0, 1]], [2, 1])

    def test_inverse(self):
        for phi in (ROT4, SHEAR, T_SHEAR, T_SHIFT):
            assert phi.compose(phi.inverse()).is_identity()

    def test_group_closure(self):
        act = GroupAction.finite(R2, [ROT4])
        assert act.order() == 4
        g = act.generator(0)
        assert act.mul(g, act.mul(g, act.mul(g, g))) == act.identity

    def test_non_commuting_generators_rejected(self):
        with pytest.raises(GeometryError):
            GroupAction.free_abelian(R2, [ROT4, SHEAR])


class TestConnections:
    @given(st.integers(0, 10_000))
    def test_random_connections_are_symplectic(self, seed):
        from fedosov import check_symplectic_connection

        c = random_symplectic_connection(rng_for(seed), R2)
        rep = check_symplectic_connection(c)
        assert rep["torsion_free"] and rep["symplectic"]

    @given(st.integers(0, 10_000))
    def test_obstruction_cocycle_identity(self, seed):
        c = random_symplectic_connection(rng_for(seed), R2)
        act = GroupAction.finite(R2, [ROT4])
        D = connection_obstruction_cocycle(act, c)
        for mu in act.elements():
            for gamma in act.elements():
                assert D.identity_residual(mu, gamma).is_zero()
        assert D.is_coboundary()

    @given(st.integers(0, 10_000))
    def test_average_is_invariant(self, seed):
        c = random_symplectic_connection(rng_for(seed), R2)
        act = GroupAction.finite(R2, [ROT4])
        avg = average_connection(act, c)
        assert is_invariant(act, avg)
        assert connection_obstruction_cocycle(act, avg).is_zero()

    def test_json_roundtrip(self):
        c = random_symplectic_connection(rng_for(1), R2)
        assert AffineConnectionData.from_json(R2, c.to_json()) == c


def test_base_function_inverse_of_character():
    f = BaseFunction.fourier_mode((1, -2), (0, 1))
    assert (f * f.inverse()) == BaseFunction.constant(TORUS, 2, 1)

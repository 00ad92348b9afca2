import sys
from pathlib import Path

import pytest
import sympy
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from fedosov import EXACT, BaseFunction, ChartManifold  # noqa: E402
from fedosov.basefunc import EUCLIDEAN, TORUS  # noqa: E402

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
    print_blob=True,
)
settings.load_profile("repro")

X = sympy.symbols("x0:4")
HBAR = sympy.Symbol("hbar")


def to_sympy(f):
    """Base function on R^{2n} to a sympy polynomial in ``x0, x1, ...``."""
    from oracles import sym

    assert f.ring == EUCLIDEAN
    expr = sympy.Integer(0)
    for key, c in f.terms.items():
        mono = sympy.Integer(1)
        for v, e in zip(X, key):
            mono *= v**e
        expr += sym(c) * mono
    return sympy.expand(expr)


def series_to_sympy(s):
    return sympy.expand(sum(to_sympy(s[k]) * HBAR**k for k in range(s.N + 1)))


@pytest.fixture(scope="session")
def R2():
    return ChartManifold(EUCLIDEAN, 1)


@pytest.fixture(scope="session")
def T2():
    return ChartManifold(TORUS, 1)


# hypothesis strategies ----------------------------------------------------

rationals = st.builds(
    lambda p, q: sympy.Rational(p, q), st.integers(-4, 4), st.integers(1, 4)
)


@st.composite
def gaussian(draw, allow_complex=True):
    re = draw(st.fractions(min_value=-3, max_value=3, max_denominator=4))
    im = draw(st.fractions(min_value=-3, max_value=3, max_denominator=4)) if allow_complex else 0
    return EXACT.coerce((re, im))


@st.composite
def polynomials(draw, dim=2, max_degree=3, max_terms=4):
    n = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n):
        key = tuple(draw(st.lists(st.integers(0, max_degree), min_size=dim, max_size=dim)))
        if sum(key) > max_degree:
            continue
        terms[key] = draw(gaussian())
    return BaseFunction(EUCLIDEAN, dim, terms, EXACT)


@st.composite
def fourier_sums(draw, dim=2, max_freq=1, max_terms=3):
    n = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n):
        key = tuple(draw(st.lists(st.integers(-max_freq, max_freq), min_size=dim, max_size=dim)))
        terms[key] = draw(gaussian())
    return BaseFunction(TORUS, dim, terms, EXACT)


@st.composite
def weyl_elements(draw, space, max_terms=5, x_free=False, max_x=1):
    dim = space.dim
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        k = draw(st.integers(0, space.D // 2))
        budget = space.D - 2 * k
        alpha = tuple(draw(st.lists(st.integers(0, budget), min_size=dim, max_size=dim)))
        if sum(alpha) > budget:
            continue
        if x_free:
            x = (0,) * dim
        elif space.ring == TORUS:
            x = tuple(draw(st.lists(st.integers(-max_x, max_x), min_size=dim, max_size=dim)))
        else:
            x = tuple(draw(st.lists(st.integers(0, max_x), min_size=dim, max_size=dim)))
        terms[(k, alpha, x)] = draw(gaussian())
    from fedosov import WeylElement

    return WeylElement(space, terms)

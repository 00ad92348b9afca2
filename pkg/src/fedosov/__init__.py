"""Desk-scale Fedosov deformation quantization with exact scalars.

Truncated Weyl-algebra arithmetic, symplectic connections on flat charts
(``R^{2n}`` polynomials and ``T^{2n}`` Fourier sums), the Fedosov flat
connection and its star product, lifts of affine symplectomorphisms,
extension assignments for group actions and the small cohomology
computations used to tell their classes apart.
"""
from .kernels import BACKEND
from .scalars import EXACT, ApproxField, ScalarMismatchError, field_from_name
from .basefunc import EUCLIDEAN, TORUS, BaseFunction, NotInvertibleError
from .series import HbarSeries, OrderError
from .weyl import (
    FiberPoisson,
    WeylConsistencyError,
    WeylElement,
    WeylSpace,
    weyl_commutator,
    weyl_commutator_over_ihbar,
    weyl_exp,
    weyl_inverse,
    weyl_log,
    weyl_mul,
)
from .forms import ScalarForm, WeylForm
from .geometry import (
    AffineConnectionData,
    AffineSymplecto,
    ChartManifold,
    GeometryError,
    GroupAction,
    UnsupportedOperationError,
    average_connection,
    check_symplectic_connection,
    connection_obstruction_cocycle,
    is_invariant,
)
from .engine import (
    ConnectionError_,
    ConsistencyError,
    FedosovConnection,
    ThetaNotClosedError,
    build_fedosov,
    delta,
    delta_inv,
    poisson_bracket,
    sigma,
    star,
    tau,
)
from .equivariance import (
    ClassNotPreservedError,
    ExtensionAssignment,
    GnablaCocycle,
    GnablaElement,
    check_cocycle,
    dmap,
    gnabla_membership,
    harmonic_witness,
    lift_extension,
    solve_gauge,
    solve_lift,
    twist_action,
)
from .cohomology import (
    CentralExtension,
    FiniteGroup,
    SimplicialComplex,
    connecting_map_H2,
    fixed_point_invariant,
    period_map,
    simplicial_cohomology,
    t1_class,
    toy_z4_extension,
    z_h1_invariants,
)

__version__ = "0.1.0"

__all__ = [
    "AffineConnectionData",
    "AffineSymplecto",
    "ApproxField",
    "BACKEND",
    "BaseFunction",
    "CentralExtension",
    "ChartManifold",
    "ClassNotPreservedError",
    "ConnectionError_",
    "ConsistencyError",
    "EUCLIDEAN",
    "EXACT",
    "ExtensionAssignment",
    "FedosovConnection",
    "FiberPoisson",
    "FiniteGroup",
    "GeometryError",
    "GnablaCocycle",
    "GnablaElement",
    "GroupAction",
    "HbarSeries",
    "NotInvertibleError",
    "OrderError",
    "ScalarForm",
    "ScalarMismatchError",
    "SimplicialComplex",
    "TORUS",
    "ThetaNotClosedError",
    "UnsupportedOperationError",
    "WeylConsistencyError",
    "WeylElement",
    "WeylForm",
    "WeylSpace",
    "average_connection",
    "build_fedosov",
    "check_cocycle",
    "check_symplectic_connection",
    "connecting_map_H2",
    "connection_obstruction_cocycle",
    "delta",
    "delta_inv",
    "dmap",
    "field_from_name",
    "fixed_point_invariant",
    "gnabla_membership",
    "harmonic_witness",
    "is_invariant",
    "lift_extension",
    "period_map",
    "poisson_bracket",
    "sigma",
    "simplicial_cohomology",
    "solve_gauge",
    "solve_lift",
    "star",
    "t1_class",
    "tau",
    "toy_z4_extension",
    "twist_action",
    "weyl_commutator",
    "weyl_commutator_over_ihbar",
    "weyl_exp",
    "weyl_inverse",
    "weyl_log",
    "weyl_mul",
    "z_h1_invariants",
]

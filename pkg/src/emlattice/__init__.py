"""Exact Euler-Maclaurin summation over lattice points of rational polytopes.

The pieces compose bottom-up: exact linear algebra over the rationals
(`exactlin`), polytopes and cones with their face lattices (`polycone`),
truncated series and meromorphic germs (`germ`), cone generating functions
(`genfun`), the mu function of pointed affine cones (`mu`), per-face
differential operators and lattice sums (`euler_maclaurin`), and dilation
quasipolynomials (`ehrhart`).  The most used entry points are re-exported
here; everything else is importable from its home module.
"""

from .exactlin import QMatrix, QVector, RationalSpace, ScalarProduct, rat
from .germ import MeroGerm, NotDivisible, TruncSeries
from .polycone import (
    AffineCone,
    DimensionCapError,
    build_polytope,
    dilate_polytope,
    tangent_cone,
    transverse_cone,
)
from .genfun import brion_sum_S, count_lattice_points, i_cone, s_cone
from .mu import mu_cone, mu_star
from .euler_maclaurin import (
    EnumerationCapError,
    Polynomial,
    apply_operator,
    brute_force_sum,
    em_sum,
    face_operator,
    integrate_over_face,
)
from .ehrhart import QuasiPolynomial, count_dilate, ehrhart_quasipoly, face_period

__version__ = "0.1.0"

__all__ = [
    "AffineCone",
    "DimensionCapError",
    "EnumerationCapError",
    "MeroGerm",
    "NotDivisible",
    "Polynomial",
    "QMatrix",
    "QuasiPolynomial",
    "QVector",
    "RationalSpace",
    "ScalarProduct",
    "TruncSeries",
    "apply_operator",
    "brion_sum_S",
    "brute_force_sum",
    "build_polytope",
    "count_dilate",
    "count_lattice_points",
    "dilate_polytope",
    "ehrhart_quasipoly",
    "em_sum",
    "face_operator",
    "face_period",
    "i_cone",
    "integrate_over_face",
    "mu_cone",
    "mu_star",
    "rat",
    "s_cone",
    "tangent_cone",
    "transverse_cone",
    "__version__",
]

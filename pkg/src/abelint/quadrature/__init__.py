"""Abelian integrals over real ovals, their continuation, and complex cycles."""

from .contour import (
    ContourError,
    ContourResult,
    TrackingError,
    complex_cycle_integral,
    cycle_integrals,
    cycle_pair,
    cycle_pairs,
    joukowski_rho,
)
from .determinant import CriticalDelta, DeltaSample, delta_at_critical, delta_curve, delta_determinant
from .paths import CycleWalker, determination_walk
from .rcurve import RBranch, RBranchError, continued_integral, trace_R_branch
from .real import (
    IntegralSample,
    Method,
    OutsideSigmaError,
    QuadratureError,
    abelian_integral,
    abelian_integrals,
    oval_endpoints,
)
from .winding import WindingResult, winding


def integrals_at(m, a, h, ks=(0, 1), tol=1e-10):
    """``I_k(h)`` at real ``h < h_s`` by the method suited to ``h``.

    Inside ``Sigma`` the real-oval quadrature is used; below ``h_c`` the
    complex contour around the continued pair (``k=0`` can also be obtained
    from :func:`continued_integral`).
    """
    h = float(h)
    if a.h_c < h < a.h_s:
        return abelian_integrals(m, a, h, ks, tol=tol)
    if h < a.h_c:
        pair = cycle_pair(m, a, h)
        return [cycle_integrals(m, h, pair, ks, tol=tol).sample(h, k) for k in ks]
    raise OutsideSigmaError(f"h={h} is at or above h_s or equal to h_c")

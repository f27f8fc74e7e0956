"""Numerical laboratory for Selberg zeta functions, scattering resonances, and
trace identities on convex-cocompact Schottky surfaces."""

from .geometry import (
    CONVENTIONS,
    GeometryConventions,
    MobiusMap,
    geodesic_length_from_trace,
    hyperbolic_distance,
)
from .kernels import RadialTestFunction, heat, resolvent
from .orbits import OrbitCache, build_orbit_cache, batch_orbit_sums, orbit_sum
from .quadrature import domain_quadrature
from .schottky import (
    SchottkyData,
    build_schottky,
    cylinder_template,
    load_group,
    save_group,
    symmetric_template,
)
from .traces import (
    TraceResult,
    geometric_side,
    kernel_difference_trace,
    orbital_integral,
    resolvent_regularized_trace,
    spectral_side,
)
from .words import ClassTable, ConjClassRecord, canonical_necklace, enumerate_classes
from .zeros import Rect, Resonance, residue_check, zero_search
from .zeta import (
    SIGN,
    TRIVIAL,
    CriticalExponent,
    DetExpansion,
    SigmaCharacter,
    TraceTable,
    ZetaEval,
    L_gamma,
    class_table,
    critical_exponent,
    dynamical_determinant,
    functional_equation_defect,
    log_deriv_zeta,
    transfer_trace_table,
    zeta_product,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

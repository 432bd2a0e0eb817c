"""Inverse mean curvature flow of star-shaped hypersurfaces, with diagnostics.

The package evolves radial graphs over S^{n-1} (plane curves for n = 2,
axisymmetric hypersurfaces for n >= 3) and checks the monotone quantity

    Q(t) = exp(-(n-2)/(n-1) t) * [n Vol(Omega_t) - 1/(n-1) * int r^2 H dmu]

together with the supporting integral identities and inequalities.
"""

from .discretization import Grid, derivative, refine, sphere_integral, sphere_measure
from .errors import (
    ImcfError,
    InternalError,
    InvalidField,
    InvalidSpec,
    LostMeanConvexity,
    StiffnessFailure,
)
from .flow import FlowState, StepControl, rhs, run, step
from .geometry import (
    GeometrySnapshot,
    QValue,
    curvatures,
    integrals,
    q_value,
    reilly_terms,
    snapshot,
    support_positivity,
)
from .monitors import (
    FlowTrace,
    check_evolution_identities,
    check_ii_bound,
    check_main_inequality,
    check_q_monotone,
    check_reilly,
    check_rigidity,
    check_ros,
)
from .report import Check, CheckReport
from .shapes import RadialShape, ShapeSpec, build, validate

__version__ = "0.1.0"

__all__ = [
    "Check",
    "CheckReport",
    "FlowState",
    "FlowTrace",
    "GeometrySnapshot",
    "Grid",
    "ImcfError",
    "InternalError",
    "InvalidField",
    "InvalidSpec",
    "LostMeanConvexity",
    "QValue",
    "RadialShape",
    "ShapeSpec",
    "StepControl",
    "StiffnessFailure",
    "build",
    "check_evolution_identities",
    "check_ii_bound",
    "check_main_inequality",
    "check_q_monotone",
    "check_reilly",
    "check_rigidity",
    "check_ros",
    "curvatures",
    "derivative",
    "integrals",
    "q_value",
    "refine",
    "reilly_terms",
    "rhs",
    "run",
    "snapshot",
    "sphere_integral",
    "sphere_measure",
    "step",
    "support_positivity",
    "validate",
]

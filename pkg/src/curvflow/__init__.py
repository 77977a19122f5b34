"""curvflow: numerical verification of curvature identities, Harnack
quadratic forms and entropy monotonicity along explicit Ricci flows."""

from .charts import (
    CurvatureBundle,
    MetricChart,
    bianchi_residuals,
    christoffel,
    contract_curvature,
    covariant_derivative,
    curvature_bundle,
    curvature_data,
    curvature_operator_eigs,
    riemann,
)
from .flows import (
    FlowSnapshot,
    backward_constant_curvature,
    constant_curvature,
    evolution_residuals,
    flow_closed_form,
    flow_point_data,
    product_spheres,
    static_flat,
)
from .harnack import (
    HarnackTriple,
    harnack_matrix,
    harnack_min_eig,
    harnack_min_eig_sampled,
    harnack_value,
    soliton_check,
    sum_of_squares_check,
)
from .jets import Jet, JetSpace, jet_eval, jet_fd_crosscheck
from .surface import SurfaceBase, SurfaceFlow
from .thermostat import (
    SpacetimePoint,
    ThermostatSpec,
    build_metric,
    closed_form_christoffel,
    closed_form_curvature,
    closed_form_ricci,
    harnack_limit_check,
    restricted_min_eig,
    ricci_decay_fit,
    spacetime_residuals,
)

__version__ = "0.1.0"

__all__ = [
    "CurvatureBundle",
    "FlowSnapshot",
    "HarnackTriple",
    "Jet",
    "JetSpace",
    "MetricChart",
    "SpacetimePoint",
    "SurfaceBase",
    "SurfaceFlow",
    "ThermostatSpec",
    "backward_constant_curvature",
    "bianchi_residuals",
    "build_metric",
    "christoffel",
    "closed_form_christoffel",
    "closed_form_curvature",
    "closed_form_ricci",
    "constant_curvature",
    "contract_curvature",
    "covariant_derivative",
    "curvature_bundle",
    "curvature_data",
    "curvature_operator_eigs",
    "evolution_residuals",
    "flow_closed_form",
    "flow_point_data",
    "harnack_limit_check",
    "harnack_matrix",
    "harnack_min_eig",
    "harnack_min_eig_sampled",
    "harnack_value",
    "jet_eval",
    "jet_fd_crosscheck",
    "product_spheres",
    "restricted_min_eig",
    "ricci_decay_fit",
    "riemann",
    "soliton_check",
    "spacetime_residuals",
    "static_flat",
    "sum_of_squares_check",
]

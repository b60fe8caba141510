"""Peaked bound states of the nonlinear Schrödinger equation on metric graphs.

The package builds metric graphs, assembles Kirchhoff finite-element
operators, seeds Newton continuation with an explicit tapered star
ansatz, and verifies the quantitative structure of the resulting
states: linearization kernel, reduced-energy degree, mass and action
scaling, correction decay, and the ground-state comparison.
"""

from .acceptance import CriterionResult, reference_graph, run_all
from .discrete import (
    DiscreteField,
    KirchhoffOperator,
    Mesh,
    assemble,
    build_mesh,
    kirchhoff_flux,
    lambda_norm,
    refined_mesh,
    resolvent_apply,
    spectral_bottom,
    uniform_mesh,
)
from .errors import GraphNLSError
from .functionals import (
    FunctionalReport,
    GroundStateGap,
    SolitonReference,
    evaluate_functionals,
    ground_state_gap,
    nehari_scaling,
    soliton_reference,
)
from .graphs import (
    Edge,
    MetricGraph,
    StarNeighborhood,
    build_graph,
    check_disjoint_peak_balls,
    graph_distance,
    insert_midpoints,
    load_graph,
    metric_ball,
    odd_degree_vertices,
    star_neighborhood,
)
from .profiles import (
    AnsatzSpec,
    KernelBasis,
    SolitonParams,
    assemble_ansatz,
    eval_cutoff,
    eval_kernel_function,
    eval_soliton,
    eval_star_solution,
    kernel_basis,
    reduced_cubic_coefficient,
    sample_kernel_mode,
    sample_star_state,
    soliton_derivative,
)
from .reduced import (
    ReducedEnergyReport,
    change_of_variables_matrix,
    enumerate_critical_points,
    even_case_lines,
    perturbed_gradient_hessian,
    reduced_energy,
    reduced_energy_diagonal,
)
from .solve import (
    BoundStateResult,
    SolveConfig,
    continuation_sweep,
    jacobian,
    kernel_projection_diagnostics,
    newton_solve,
    nonlinear_residual,
    symmetric_linearization,
)

__all__ = [
    "AnsatzSpec",
    "BoundStateResult",
    "CriterionResult",
    "DiscreteField",
    "Edge",
    "FunctionalReport",
    "GraphNLSError",
    "GroundStateGap",
    "KernelBasis",
    "KirchhoffOperator",
    "Mesh",
    "MetricGraph",
    "ReducedEnergyReport",
    "SolitonParams",
    "SolitonReference",
    "SolveConfig",
    "StarNeighborhood",
    "assemble",
    "assemble_ansatz",
    "build_graph",
    "build_mesh",
    "change_of_variables_matrix",
    "check_disjoint_peak_balls",
    "continuation_sweep",
    "enumerate_critical_points",
    "eval_cutoff",
    "eval_kernel_function",
    "eval_soliton",
    "eval_star_solution",
    "evaluate_functionals",
    "even_case_lines",
    "graph_distance",
    "ground_state_gap",
    "insert_midpoints",
    "jacobian",
    "kernel_basis",
    "kernel_projection_diagnostics",
    "kirchhoff_flux",
    "lambda_norm",
    "load_graph",
    "metric_ball",
    "nehari_scaling",
    "newton_solve",
    "nonlinear_residual",
    "odd_degree_vertices",
    "perturbed_gradient_hessian",
    "reduced_cubic_coefficient",
    "reduced_energy",
    "reduced_energy_diagonal",
    "reference_graph",
    "refined_mesh",
    "resolvent_apply",
    "run_all",
    "sample_kernel_mode",
    "sample_star_state",
    "soliton_derivative",
    "soliton_reference",
    "spectral_bottom",
    "star_neighborhood",
    "symmetric_linearization",
    "uniform_mesh",
]

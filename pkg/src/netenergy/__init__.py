"""Energy Hilbert spaces of resistance networks and their operator pairs.

The package builds weighted networks, solves for energy kernels, monopoles,
and harmonic decompositions, and carries the results into a small
Gram-coordinate operator calculus: adjoints, symmetric pairs, Friedrichs
extensions, canonical second-inner-product operators, and atomic spectral
measures, with discrete-measure examples and a deterministic identity
suite on top.
"""

from .energy import (
    EnergyVector,
    GramMatrix,
    energy_form,
    energy_pairings,
    gram,
    l2_inner,
    to_energy_vector,
)
from .generators import (
    BinaryTreeGen,
    Exhaustion,
    GeometricLineGen,
    GraphGenerator,
    IntegerLatticeGen,
    IntegerLineGen,
    binary_tree,
    cycle,
    geometric_line,
    lattice,
    path,
    random_network,
    truncate,
)
from .measures import (
    DiscreteMeasure,
    cantor_measure,
    cantor_witness,
    rn_lambda,
    uniform_measure,
)
from .network import (
    GROUND,
    Network,
    NetworkError,
    function_from_json,
    function_to_json,
    is_harmonic,
    label_key,
    load_function,
    load_network,
    network_from_json,
    network_to_json,
    save_function,
    save_network,
)
from .operators import (
    CoercivityError,
    InnerSpace,
    LinOp,
    OperatorError,
    SpectralMeasure,
    adjoint,
    dirac_spaces,
    dstar_constant,
    form_operator_roundtrip,
    friedrichs,
    krein_lambda,
    krein_network_extension,
    network_kl,
    operator_norm,
    pair_spectrum_check,
    semibounded_friedrichs,
    spectral_measure,
    verify_pair,
)
from .solvers import (
    ConvergenceReport,
    SolverError,
    effective_resistance,
    harmonic_space,
    royden_project,
    solve_dipole,
    solve_dipoles,
    solve_grounded,
    solve_monopole,
    transience_probe,
)
from .verify import CheckResult, run_suite

__version__ = "0.1.0"

__all__ = [
    "BinaryTreeGen",
    "CheckResult",
    "CoercivityError",
    "ConvergenceReport",
    "DiscreteMeasure",
    "EnergyVector",
    "Exhaustion",
    "GROUND",
    "GeometricLineGen",
    "GramMatrix",
    "GraphGenerator",
    "InnerSpace",
    "IntegerLatticeGen",
    "IntegerLineGen",
    "LinOp",
    "Network",
    "NetworkError",
    "OperatorError",
    "SolverError",
    "SpectralMeasure",
    "adjoint",
    "binary_tree",
    "cantor_measure",
    "cantor_witness",
    "cycle",
    "dirac_spaces",
    "dstar_constant",
    "effective_resistance",
    "energy_form",
    "energy_pairings",
    "form_operator_roundtrip",
    "friedrichs",
    "geometric_line",
    "gram",
    "harmonic_space",
    "is_harmonic",
    "krein_lambda",
    "krein_network_extension",
    "l2_inner",
    "lattice",
    "function_from_json",
    "function_to_json",
    "label_key",
    "load_function",
    "load_network",
    "network_from_json",
    "network_kl",
    "network_to_json",
    "operator_norm",
    "pair_spectrum_check",
    "path",
    "random_network",
    "rn_lambda",
    "royden_project",
    "run_suite",
    "save_function",
    "save_network",
    "semibounded_friedrichs",
    "solve_dipole",
    "solve_dipoles",
    "solve_grounded",
    "solve_monopole",
    "spectral_measure",
    "to_energy_vector",
    "transience_probe",
    "truncate",
    "uniform_measure",
    "verify_pair",
]

"""Postman-problem variants as QUBOs: compile, sample, decode, certify."""

from .errors import (
    AsymmetricUndirectedWeights,
    DirectedEdgesPresent,
    IndexOutOfRange,
    InfeasibleEndpoints,
    InputError,
    InvalidGraph,
    LengthMismatch,
    NoEulerianCircuit,
    NoOddVertices,
    NotPerfectPairing,
    NotStronglyConnected,
    NoValidSolution,
    NonUndirectedGraph,
    PostquboError,
    SearchBudgetExceeded,
    SpecError,
    TooLarge,
    TooManyOddVertices,
    UnsupportedCombination,
)
from .general import (
    CompiledGeneral,
    build_general_qubo,
    compile_general,
    decode_walk,
    default_penalties,
    enumerate_variables,
)
from .graphs import (
    DirectedEdge,
    EdgeRef,
    Graph,
    MultiGraph,
    UndirectedEdge,
    Walk,
    degree_profile,
    eulerian_circuit,
    is_strongly_connected,
    odd_degree_vertices,
    shortest_paths,
)
from .oracle import euler_shortcut, exact_walk_oracle
from .pairing import (
    Pairing,
    augment_and_route,
    build_pairing_qubo,
    decode_pairing,
    default_pairing_penalty,
    exact_pairing_oracle,
)
from .problem import Postmen, ProblemSpec, ServiceMode, TurnPenalty
from .qubo import (
    CapacitySlack,
    EdgeStep,
    PairVar,
    PenaltyConfig,
    Qubo,
    RequiredSlack,
    RestVar,
    VariableRegistry,
    format_qubo_text,
    format_registry_text,
)
from .routes import RouteSolution, RouteWalk, ValidityReport, WalkStep
from .solvers import (
    SolveReport,
    brute_force,
    enumerate_all_energies,
    greedy_descent,
    greedy_post,
    make_sampler,
    simulated_annealing,
    solve_with_retune,
    tabu_search,
)

__version__ = "0.1.0"

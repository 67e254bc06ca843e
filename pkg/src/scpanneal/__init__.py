"""Set Cover with Pairs through Ising reductions, annealing and Chimera embeddings."""

__version__ = "0.1.0"

from .chimera import (
    ChimeraGraph,
    Embedding,
    chain_or_graph,
    chimera,
    complete_bipartite_graph,
    embed_chain_or,
    embed_complete_bipartite,
    embed_instance,
    interaction_graph,
    verify_minor_embedding,
)
from .estimators import ExactCoverSolver, IsingReducer, QuantumAnnealer, SimulatedAnnealer
from .exceptions import (
    CapacityError,
    InfeasibleInstanceError,
    IntegrationError,
    ScpError,
    TargetUnreachableError,
    UnsupportedParameterError,
)
from .instance import (
    CoverSolution,
    PairCoverMap,
    ScpInstance,
    gen_random_dummy_free,
    minimum_covers,
    pair_cover_map,
    solve_exact,
    verify_cover,
)
from .ising import (
    IsingModel,
    ReductionConfig,
    VariableLayout,
    decode,
    gadget_and,
    gadget_leq,
    gadget_or,
    ground_states_exhaustive,
    reduce,
)
from .qa import (
    AnnealSchedule,
    SuccessSpec,
    WaveState,
    apply_hamiltonian,
    build_success_spec,
    evolve,
    find_min_anneal_time,
    success_probability,
)
from .sa import SaConfig, SaStats, anneal, estimate_success, optimize_sweeps, sweep, total_time

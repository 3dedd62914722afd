"""Human-group-based particle swarm feature selection."""

from .archive import (
    CROWDING_SENTINEL,
    Archive,
    ArchiveMember,
    ObjectiveVector,
    crowding_distance,
    dominates,
    select_gbest,
)
from .landscape import NkLandscape, nk_fitness, perceived_fitness
from .swarm import (
    Particle,
    SelectionResult,
    SwarmConfig,
    TraceRecord,
    adaptive_uniform_mutation,
    decode,
    init_swarm,
    load_mask,
    load_trace,
    mutation_count,
    mutation_probability,
    run,
    save_mask,
    save_trace,
    update_velocity_position,
)
from .wrapper import WrapperFitness, wrapper_fitness

__all__ = [
    "CROWDING_SENTINEL",
    "Archive",
    "ArchiveMember",
    "NkLandscape",
    "ObjectiveVector",
    "Particle",
    "SelectionResult",
    "SwarmConfig",
    "TraceRecord",
    "WrapperFitness",
    "adaptive_uniform_mutation",
    "crowding_distance",
    "decode",
    "dominates",
    "init_swarm",
    "load_mask",
    "load_trace",
    "mutation_count",
    "mutation_probability",
    "nk_fitness",
    "perceived_fitness",
    "run",
    "save_mask",
    "save_trace",
    "select_gbest",
    "update_velocity_position",
    "wrapper_fitness",
]

"""Human-group-based binary PSO for feature selection.

Each particle carries a continuous position; a feature is selected when the
sigmoid of its coordinate reaches 0.5. Every particle is also a group member
with a fixed random "knowledge" vector and scores candidates by its perceived
fitness, which scales the attraction terms of the velocity update.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np

from ..errors import DimensionError, FormatError
from ..features.matrix import FeatureMatrix
from ..ingest import SplitSpec, split_indices
from .archive import Archive, ObjectiveVector, dominates, select_gbest
from .landscape import NkLandscape, nk_fitness, perceived_fitness
from .wrapper import WrapperFitness

MOTION_STREAM = 0
KNOWLEDGE_STREAM = 1
SPLIT_STREAM = 3

Optimizer = Literal["full", "hgo_off", "plain_pso"]


@dataclass(frozen=True)
class SwarmConfig:
    swarm_size: int = 30
    archive_size: int = 20
    max_iterations: int = 100
    inertia: float = 0.7
    seed: int = 0
    knowledge_prob: float = 0.8
    interaction_count: int = 4
    v_max: float = 2.0
    p_max: float = 6.0
    fitness_mode: Literal["wrapper", "nk_landscape"] = "wrapper"
    optimizer: Optimizer = "full"
    val_fraction: float = 0.3

    def __post_init__(self) -> None:
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.archive_size < 1:
            raise ValueError("archive_size must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 <= self.inertia <= 1.0:
            raise ValueError("inertia must lie in [0, 1]")
        if not 0.0 <= self.knowledge_prob <= 1.0:
            raise ValueError("knowledge_prob must lie in [0, 1]")
        if self.interaction_count < 0:
            raise ValueError("interaction_count must be >= 0")
        if self.v_max <= 0 or self.p_max <= 0:
            raise ValueError("v_max and p_max must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.fitness_mode not in ("wrapper", "nk_landscape"):
            raise ValueError(f"unknown fitness_mode {self.fitness_mode!r}")
        if self.optimizer not in ("full", "hgo_off", "plain_pso"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in (0, 1)")


def decode(position: np.ndarray) -> np.ndarray:
    """Selection mask: ``sigmoid(p) >= 0.5``, i.e. ``p >= 0``."""
    return np.asarray(position) >= 0.0


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    knowledge: np.ndarray
    best_position: np.ndarray
    best_objectives: ObjectiveVector | None = None
    fitness: float = 0.0  # group (global) fitness at the current position
    perceived: float = 0.0  # this member's perceived fitness at the current position

    @property
    def mask(self) -> np.ndarray:
        return decode(self.position)

    @property
    def decisions(self) -> np.ndarray:
        """The mask as +1 / -1 decisions."""
        return np.where(self.mask, 1, -1)

    def copy(self) -> "Particle":
        return replace(
            self,
            position=self.position.copy(),
            velocity=self.velocity.copy(),
            best_position=self.best_position.copy(),
        )


def particle_rng(seed: int, index: int, iteration: int) -> np.random.Generator:
    """Independent stream per (seed, particle, iteration)."""
    return np.random.default_rng([seed, MOTION_STREAM, index, iteration])


def mutation_probability(n: int, max_iterations: int) -> float:
    """``0.5 * exp(-10 n / N) + 0.01``."""
    if max_iterations <= 0:
        raise ValueError("max_iterations must be positive")
    if not 0 <= n <= max_iterations:
        raise ValueError(f"iteration {n} outside 0..{max_iterations}")
    return 0.5 * math.exp(-10.0 * n / max_iterations) + 0.01


def mutation_count(dim: int, p_m: float) -> int:
    """Number of coordinates re-drawn: ``max(1, floor(D * p_m))``."""
    return max(1, math.floor(dim * p_m))


def init_swarm(dim: int, cfg: SwarmConfig) -> list[Particle]:
    """Positions uniform in [-1, 1], zero velocity, personal best = start."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    particles = []
    for i in range(cfg.swarm_size):
        pos = particle_rng(cfg.seed, i, 0).uniform(-1.0, 1.0, dim)
        know = np.random.default_rng([cfg.seed, KNOWLEDGE_STREAM, i]).random(dim) < cfg.knowledge_prob
        particles.append(Particle(pos, np.zeros(dim), know, pos.copy()))
    return particles


def update_velocity_position(
    p: Particle,
    gbest: np.ndarray,
    vm: float,
    cfg: SwarmConfig,
    rng: np.random.Generator | None = None,
    r1: np.ndarray | float | None = None,
    r2: np.ndarray | float | None = None,
) -> Particle:
    """One velocity/position step.

    ``v <- w v + r1 Vm (lb - p) + r2 Vm (gb - p)``; the ``plain_pso`` optimizer
    uses fixed acceleration constants 2 instead of ``Vm``. Velocity and
    position are clamped to ``v_max`` and ``p_max``.
    """
    if not math.isfinite(vm):
        raise ValueError("perceived fitness must be finite")
    dim = p.position.size
    if r1 is None:
        r1 = rng.random(dim)
    if r2 is None:
        r2 = rng.random(dim)
    scale = 2.0 if cfg.optimizer == "plain_pso" else vm
    v = (
        cfg.inertia * p.velocity
        + r1 * scale * (p.best_position - p.position)
        + r2 * scale * (gbest - p.position)
    )
    v = np.clip(v, -cfg.v_max, cfg.v_max)
    out = p.copy()
    out.velocity = v
    out.position = np.clip(p.position + v, -cfg.p_max, cfg.p_max)
    return out


def adaptive_uniform_mutation(
    p: Particle, p_m: float, cfg: SwarmConfig, rng: np.random.Generator, draw: float | None = None
) -> Particle:
    """With probability ``p_m`` re-draw ``k`` random coordinates uniformly in [-1, 1]."""
    if not 0.0 < p_m <= 1.0:
        raise ValueError(f"p_m must lie in (0, 1], got {p_m}")
    if draw is None:
        draw = rng.random()
    if not draw < p_m:
        return p
    dim = p.position.size
    k = mutation_count(dim, p_m)
    idx = rng.choice(dim, size=k, replace=False)
    out = p.copy()
    out.position[idx] = rng.uniform(-1.0, 1.0, k)
    return out


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    best_fitness: float
    mean_fitness: float
    archive_size: int
    p_m: float
    selected_count: int


@dataclass
class SelectionResult:
    mask: np.ndarray
    fitness: float
    trace: list[TraceRecord]
    archive: Archive = field(repr=False)

    @property
    def ratio(self) -> float:
        return float(self.mask.mean())


# (masks (P, D), knowledge (P, D)) -> (group fitness (P,), perceived fitness (P,))
Evaluator = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def nk_evaluator(landscape: NkLandscape) -> Evaluator:
    def evaluate(masks: np.ndarray, knowledge: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return nk_fitness(masks, landscape), perceived_fitness(masks, landscape, knowledge)

    return evaluate


def wrapper_evaluator(scorer: WrapperFitness) -> Evaluator:
    def evaluate(masks: np.ndarray, knowledge: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # a member judges a subset only through the features it knows about
        both = scorer(np.concatenate([masks, masks & knowledge]))
        return both[: len(masks)], both[len(masks) :]

    return evaluate


def make_evaluator(features: FeatureMatrix, cfg: SwarmConfig) -> Evaluator:
    dim = features.n_features
    if cfg.fitness_mode == "nk_landscape":
        return nk_evaluator(NkLandscape.generate(dim, cfg.interaction_count, cfg.seed))
    labels = features.row_labels
    counts = np.bincount(labels)
    spec = SplitSpec(
        train_fraction=1.0 - cfg.val_fraction,
        seed=int(np.random.default_rng([cfg.seed, SPLIT_STREAM]).integers(2**63)),
        stratified=bool(np.all(counts[counts > 0] >= 2)),
    )
    tr, va = split_indices(labels, spec)
    if len(tr) == 0 or len(va) == 0:
        raise ValueError("too few samples for an internal train/validation split")
    return wrapper_evaluator(WrapperFitness(features.rows(tr), features.rows(va)))


def run(features: FeatureMatrix, cfg: SwarmConfig = SwarmConfig(), evaluator: Evaluator | None = None,
        on_iteration: Callable[[int, Archive, list[Particle]], None] | None = None) -> SelectionResult:
    """Run the swarm for ``cfg.max_iterations`` iterations and return the fittest archived mask.

    The trace has one record for the initial swarm plus one per iteration.
    """
    dim = features.n_features
    if dim < 2:
        raise DimensionError("feature selection needs at least 2 columns")
    if cfg.fitness_mode == "nk_landscape" and cfg.interaction_count >= dim:
        raise ValueError(f"interaction_count {cfg.interaction_count} must be < D={dim}")
    evaluate = evaluator or make_evaluator(features, cfg)
    human_group = cfg.optimizer == "full"

    particles = init_swarm(dim, cfg)
    archive = Archive(cfg.archive_size)
    trace: list[TraceRecord] = []

    def assess(swarm: list[Particle]) -> None:
        masks = np.stack([p.mask for p in swarm])
        know = np.stack([p.knowledge for p in swarm])
        v, vm = evaluate(masks, know)
        for p, fit, per in zip(swarm, v, vm):
            p.fitness = float(fit)
            p.perceived = float(per) if human_group else float(fit)

    def record(n: int, p_m: float) -> None:
        best = archive.best()
        trace.append(
            TraceRecord(
                iteration=n,
                best_fitness=best.objectives.fitness,
                mean_fitness=float(np.mean([p.fitness for p in particles])),
                archive_size=len(archive),
                p_m=p_m,
                selected_count=int(best.mask.sum()),
            )
        )

    def ratio(p: Particle) -> float:
        return float(p.mask.sum()) / dim

    assess(particles)
    for p in particles:
        p.best_objectives = ObjectiveVector(p.perceived, ratio(p))
    archive.update([(p.position, p.mask, ObjectiveVector(p.fitness, ratio(p))) for p in particles])
    record(0, mutation_probability(0, cfg.max_iterations))
    if on_iteration:
        on_iteration(0, archive, particles)

    for n in range(1, cfg.max_iterations + 1):
        p_m = mutation_probability(n, cfg.max_iterations)
        moved = []
        for i, p in enumerate(particles):
            rng = particle_rng(cfg.seed, i, n)
            gbest = select_gbest(archive, rng)
            q = update_velocity_position(p, gbest, p.perceived, cfg, rng)
            if cfg.optimizer != "plain_pso":
                q = adaptive_uniform_mutation(q, p_m, cfg, rng)
            moved.append(q)
        particles = moved
        assess(particles)
        for p in particles:
            new = ObjectiveVector(p.perceived, ratio(p))
            old = p.best_objectives
            if old is None or dominates(new, old) or new == old:
                p.best_position = p.position.copy()
                p.best_objectives = new
        archive.update([(p.position, p.mask, ObjectiveVector(p.fitness, ratio(p))) for p in particles])
        record(n, p_m)
        if on_iteration:
            on_iteration(n, archive, particles)

    best = archive.best()
    return SelectionResult(best.mask.copy(), best.objectives.fitness, trace, archive)


# --- persistence -----------------------------------------------------------

TRACE_HEADER = ["iter", "best_fitness", "mean_fitness", "archive_size", "p_m", "selected_count"]


def save_trace(trace: list[TraceRecord], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in trace:
            w.writerow([r.iteration, repr(r.best_fitness), repr(r.mean_fitness), r.archive_size,
                        repr(r.p_m), r.selected_count])


def load_trace(path: str | os.PathLike) -> list[TraceRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != TRACE_HEADER:
        raise FormatError(f"{path}: unexpected trace header")
    return [
        TraceRecord(int(r[0]), float(r[1]), float(r[2]), int(r[3]), float(r[4]), int(r[5]))
        for r in rows[1:]
    ]


def save_mask(mask: np.ndarray, tags: list[str], path: str | os.PathLike) -> None:
    """One ``<0|1>,<tag>`` line per column."""
    if len(tags) != len(mask):
        raise DimensionError(f"{len(tags)} tags for a mask of length {len(mask)}")
    with open(path, "w") as fh:
        for bit, tag in zip(np.asarray(mask, dtype=bool), tags):
            fh.write(f"{int(bit)},{tag}\n")


def load_mask(path: str | os.PathLike) -> tuple[np.ndarray, list[str]]:
    bits, tags = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            bit, _, tag = line.partition(",")
            if bit not in ("0", "1"):
                raise FormatError(f"{path}:{lineno}: expected 0 or 1, got {bit!r}")
            bits.append(bit == "1")
            tags.append(tag)
    return np.array(bits, dtype=bool), tags

"""Constrained quantum-behaved dynamic particle swarm optimizer.

The design vector is ``(d_inner, d_outer)`` in mm. Fitness is minimized:
``1 / (1 + |f_r - f_target|)`` falls as the resonance moves away from the
target, so the lowest fitness is the strongest miniaturization.

Each particle jumps around its own personal best,

    x[d] = p[d] + s * beta * |p[d] - g[d]| * ln(1/u),   s = +-1, u ~ U(0, 1)

and the result is repaired back into the feasible region.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import physics
from .physics import (
    MAX_OUTER_DIAMETER,
    MIN_INNER_DIAMETER,
    MIN_LOOP_WIDTH,
    AntennaGeometry,
)

CLAMP_EPS = 1e-6  # mm
TRACE_HEADER = ("iteration", "global_best_fitness", "d_inner_mm", "d_outer_mm")

Position = np.ndarray  # shape (2,): (d_inner, d_outer)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Bounds:
    """Closed search box intersected with the loop constraints.

    The defaults span the whole feasible region. Collapsing a box
    (``lo == hi``) pins that coordinate.
    """

    inner_low: float = MIN_INNER_DIAMETER
    inner_high: float = MAX_OUTER_DIAMETER
    outer_low: float = MIN_INNER_DIAMETER
    outer_high: float = MAX_OUTER_DIAMETER

    def __post_init__(self) -> None:
        if self.inner_low > self.inner_high or self.outer_low > self.outer_high:
            raise ConfigError("bounds must satisfy low <= high")
        if self.outer_high > MAX_OUTER_DIAMETER or self.inner_low < MIN_INNER_DIAMETER:
            raise ConfigError("bounds exceed the loop constraints")

    def contains(self, position: Sequence[float]) -> bool:
        d_inner, d_outer = position[0], position[1]
        return (
            self.inner_low <= d_inner <= self.inner_high
            and self.outer_low <= d_outer <= self.outer_high
            and physics.is_feasible(d_inner, d_outer)
        )


@dataclass(frozen=True)
class SwarmConfig:
    swarm_size: int = 30
    max_iterations: int = 100
    # 0 disables the stagnation test.
    stagnation_window: int = 0
    stagnation_epsilon: float = 0.0
    fitness_threshold: Optional[float] = None
    beta_start: float = 1.0
    beta_end: float = 0.5
    target_frequency: float = physics.REFERENCE_FREQUENCY_GHZ
    bounds: Bounds = field(default_factory=Bounds)
    seed: int = 0
    geometry: AntennaGeometry = field(
        default_factory=lambda: AntennaGeometry(d_inner=6.0, d_outer=12.0)
    )

    def __post_init__(self) -> None:
        if self.swarm_size < 2:
            raise ConfigError("swarm_size must be >= 2")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.stagnation_window < 0 or self.stagnation_epsilon < 0:
            raise ConfigError("stagnation settings must be non-negative")
        if not (0 < self.beta_end <= self.beta_start):
            raise ConfigError("need 0 < beta_end <= beta_start")
        if not (self.target_frequency > 0 and math.isfinite(self.target_frequency)):
            raise ConfigError("target_frequency must be positive")

    def beta_at(self, iteration: int) -> float:
        """Contraction-expansion coefficient for step ``iteration`` (1-based)."""
        if self.max_iterations == 1:
            return self.beta_start
        frac = (iteration - 1) / (self.max_iterations - 1)
        return self.beta_start + (self.beta_end - self.beta_start) * frac


@dataclass
class Particle:
    position: Position
    personal_best: Position
    personal_best_fitness: float


@dataclass
class SwarmState:
    particles: list[Particle]
    global_best: Position
    global_best_fitness: float
    iteration: int = 0
    # (iteration, global_best_fitness, d_inner, d_outer)
    fitness_trace: list[tuple[int, float, float, float]] = field(default_factory=list)

    def record(self) -> None:
        g = self.global_best
        self.fitness_trace.append(
            (self.iteration, self.global_best_fitness, float(g[0]), float(g[1]))
        )


@dataclass(frozen=True)
class RunResult:
    best_position: Position
    best_fitness: float
    fitness_trace: list[tuple[int, float, float, float]]

    @property
    def d_inner(self) -> float:
        return float(self.best_position[0])

    @property
    def d_outer(self) -> float:
        return float(self.best_position[1])


def fitness(
    position: Sequence[float],
    f_target: float = physics.REFERENCE_FREQUENCY_GHZ,
    geometry: Optional[AntennaGeometry] = None,
) -> float:
    """``1 / (1 + |f_r - f_target|)``; lower is better, 1.0 at the target."""
    d_inner, d_outer = float(position[0]), float(position[1])
    if not (math.isfinite(d_inner) and math.isfinite(d_outer)):
        raise physics.DomainError("position must be finite")
    geo = geometry or AntennaGeometry(d_inner, d_outer)
    f_r = physics.resonant_frequency(geo.with_loops(d_inner, d_outer))
    return 1.0 / (1.0 + abs(f_r - f_target))


def _uniform_open(rng: np.random.Generator, size: int) -> np.ndarray:
    u = rng.random(size)
    while np.any(u == 0.0):
        zero = u == 0.0
        u[zero] = rng.random(int(zero.sum()))
    return u


def quantum_update(
    particle: Particle,
    g: Position,
    beta: float,
    rng: Optional[np.random.Generator] = None,
    *,
    u: Optional[Sequence[float]] = None,
    signs: Optional[Sequence[float]] = None,
) -> Position:
    """Sample a new position around the particle's personal best.

    ``u`` and ``signs`` may be given explicitly (mainly for tests); any that
    are omitted are drawn from ``rng``. The result is *not* repaired.
    """
    p = np.asarray(particle.personal_best, dtype=float)
    g = np.asarray(g, dtype=float)
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if u is None:
        u = _uniform_open(rng, p.size)
    if signs is None:
        signs = np.where(rng.random(p.size) < 0.5, -1.0, 1.0)
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("u must lie in the open interval (0, 1)")
    return p + np.asarray(signs, dtype=float) * beta * np.abs(p - g) * np.log(1.0 / u)


def sample_feasible(bounds: Bounds, rng: np.random.Generator, max_tries: int = 10_000) -> Position:
    """Uniform draw from the feasible part of the search box (rejection)."""
    for _ in range(max_tries):
        cand = np.array(
            [
                rng.uniform(bounds.inner_low, bounds.inner_high),
                rng.uniform(bounds.outer_low, bounds.outer_high),
            ]
        )
        if bounds.contains(cand):
            return cand
    raise ConfigError("search box has no feasible region")


def repair(
    position: Sequence[float],
    bounds: Bounds = Bounds(),
    rng: Optional[np.random.Generator] = None,
) -> Position:
    """Map a candidate onto the feasible set.

    Feasible points are returned unchanged. Otherwise ``d_outer`` is clamped
    first and ``d_inner`` is clamped below ``d_outer - 0.8``; if that still
    fails (a pinched box), a uniform feasible point is drawn from ``rng``.
    """
    pos = np.array(position, dtype=float)
    if not np.all(np.isfinite(pos)):
        raise ValueError("position must be finite")
    if bounds.contains(pos):
        return pos

    outer_lo = max(bounds.outer_low, MIN_INNER_DIAMETER + MIN_LOOP_WIDTH + 2 * CLAMP_EPS)
    d_outer = min(max(pos[1], outer_lo), bounds.outer_high)
    inner_lo = max(bounds.inner_low, MIN_INNER_DIAMETER + CLAMP_EPS)
    inner_hi = min(bounds.inner_high, d_outer - MIN_LOOP_WIDTH - CLAMP_EPS)
    d_inner = min(max(pos[0], inner_lo), inner_hi)
    fixed = np.array([d_inner, d_outer])
    if bounds.contains(fixed):
        return fixed
    if rng is None:
        raise ValueError("repair needs an rng to resample this position")
    return sample_feasible(bounds, rng)


Objective = Callable[[Position], float]


def _objective(config: SwarmConfig) -> Objective:
    geo = config.geometry
    target = config.target_frequency
    return lambda pos: fitness(pos, target, geo)


def init_swarm(
    config: SwarmConfig,
    rng: Optional[np.random.Generator] = None,
    objective: Optional[Objective] = None,
) -> SwarmState:
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    objective = objective or _objective(config)
    b = config.bounds
    particles: list[Particle] = []
    for _ in range(config.swarm_size):
        raw = np.array(
            [rng.uniform(b.inner_low, b.inner_high), rng.uniform(b.outer_low, b.outer_high)]
        )
        pos = repair(raw, b, rng)
        particles.append(Particle(pos, pos.copy(), objective(pos)))
    best = min(range(len(particles)), key=lambda i: particles[i].personal_best_fitness)
    state = SwarmState(
        particles,
        particles[best].personal_best.copy(),
        particles[best].personal_best_fitness,
    )
    state.record()
    return state


def step(
    state: SwarmState,
    config: SwarmConfig,
    rng: np.random.Generator,
    objective: Optional[Objective] = None,
) -> SwarmState:
    """Advance the swarm by one iteration, in place; returns ``state``."""
    objective = objective or _objective(config)
    beta = config.beta_at(state.iteration + 1)
    g = state.global_best
    for particle in state.particles:
        cand = quantum_update(particle, g, beta, rng)
        particle.position = repair(cand, config.bounds, rng)
    # Positions are all drawn against the same g before any best is updated.
    for particle in state.particles:
        f = objective(particle.position)
        if f < particle.personal_best_fitness:
            particle.personal_best = particle.position.copy()
            particle.personal_best_fitness = f
    for particle in state.particles:
        if particle.personal_best_fitness < state.global_best_fitness:
            state.global_best = particle.personal_best.copy()
            state.global_best_fitness = particle.personal_best_fitness
    state.iteration += 1
    state.record()
    return state


def _stagnated(trace: list, window: int, eps: float) -> bool:
    if window <= 0 or len(trace) <= window:
        return False
    return trace[-window - 1][1] - trace[-1][1] < eps


def run(config: SwarmConfig, objective: Optional[Objective] = None) -> RunResult:
    rng = np.random.default_rng(config.seed)
    objective = objective or _objective(config)
    state = init_swarm(config, rng, objective)
    while state.iteration < config.max_iterations:
        if config.fitness_threshold is not None and state.global_best_fitness <= config.fitness_threshold:
            break
        step(state, config, rng, objective)
        if _stagnated(state.fitness_trace, config.stagnation_window, config.stagnation_epsilon):
            break
    return RunResult(state.global_best.copy(), state.global_best_fitness, list(state.fitness_trace))


def format_trace(trace: Sequence[tuple[int, float, float, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for it, fit, d_inner, d_outer in trace:
        writer.writerow([it, repr(float(fit)), f"{d_inner:.6f}", f"{d_outer:.6f}"])
    return buf.getvalue()


def write_trace(path, trace) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_trace(trace))

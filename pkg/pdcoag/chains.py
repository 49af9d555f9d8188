"""Fragmentation and coagulation Markov chains on mass partitions.

frag_chain runs X(i + 1) ~ Frag_alpha(X(i)); started from PD(alpha, theta) its
i-th state is PD(alpha, theta + i). coag_chain walks the levels back down with
Coag_{alpha, theta + i}. poissonized_path runs the fragmentation chain at the
jump times of a Poisson process.
"""

import bisect
from dataclasses import dataclass, field

from . import config
from .errors import DomainError
from .numerics import RngStream
from .operators import CoagWitness, FragWitness, coag, frag
from .partitions import MassPartition, Params
from .serialize import mass_csv


@dataclass(eq=False)
class ChainTrajectory:
    """States of a chain; states[i] is step (or level) i unless only the end was kept."""

    params: Params
    states: list[MassPartition]
    witnesses: list[FragWitness | CoagWitness] = field(default_factory=list)
    steps: int = 0
    kept_all: bool = True

    @property
    def final(self) -> MassPartition:
        return self.states[-1]

    def to_csv(self) -> str:
        return mass_csv(self.states, index_column="step")

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "steps": self.steps,
            "states": [s.to_dict() for s in self.states],
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


@dataclass(eq=False)
class PoissonPath:
    """Fragmentation chain observed at the jumps of a rate-`rate` Poisson process."""

    rate: float
    t_max: float
    jump_times: list[float]
    trajectory: ChainTrajectory

    def state_at(self, t: float) -> MassPartition:
        """Y(t) = X(N(t))."""
        if not (0.0 <= t <= self.t_max):
            raise DomainError(f"t must lie in [0, {self.t_max}], got {t}")
        return self.trajectory.states[bisect.bisect_right(self.jump_times, t)]


def frag_chain(
    params: Params,
    x0: MassPartition,
    steps: int,
    rng: RngStream,
    eps_trunc: float = config.TRUNC_EPS,
    max_atoms: int = config.MAX_ATOMS,
    keep_all: bool = True,
) -> ChainTrajectory:
    """Apply Frag_alpha `steps` times starting from x0."""
    if steps < 0:
        raise DomainError(f"steps must be nonnegative, got {steps}")
    states = [x0]
    witnesses = []
    x = x0
    for _ in range(steps):
        x, witness = frag(params.alpha, x, rng, eps_trunc, max_atoms)
        if keep_all:
            states.append(x)
            witnesses.append(witness)
    if not keep_all:
        states = [x]
    return ChainTrajectory(params, states, witnesses, steps, keep_all)


def poissonized_path(
    params: Params,
    x0: MassPartition,
    rate: float,
    t_max: float,
    rng: RngStream,
    eps_trunc: float = config.TRUNC_EPS,
    max_atoms: int = config.MAX_ATOMS,
) -> PoissonPath:
    """Run the fragmentation chain at the jump times of a Poisson process on [0, t_max]."""
    if not (rate > 0 and t_max > 0):
        raise DomainError(f"rate and t_max must be positive, got rate={rate}, t_max={t_max}")
    times = []
    t = float(rng.exponential()) / rate
    while t <= t_max:
        times.append(t)
        t += float(rng.exponential()) / rate
    trajectory = frag_chain(params, x0, len(times), rng, eps_trunc, max_atoms)
    return PoissonPath(rate, t_max, times, trajectory)


def coag_chain(
    params: Params,
    y_end: MassPartition,
    steps: int,
    rng: RngStream,
    keep_all: bool = True,
) -> ChainTrajectory:
    """Walk from level `steps` down to level 0 with Coag_{alpha, theta + i}.

    states[i] is the level-i state and witnesses[i] produced it.
    """
    if steps < 1:
        raise DomainError(f"steps must be positive, got {steps}")
    levels = [y_end]
    witnesses = []
    y = y_end
    for i in range(steps - 1, -1, -1):
        y, witness = coag(params.shifted(i), y, rng)
        if keep_all:
            levels.append(y)
            witnesses.append(witness)
    if not keep_all:
        return ChainTrajectory(params, [y], [], steps, False)
    levels.reverse()
    witnesses.reverse()
    return ChainTrajectory(params, levels, witnesses, steps, True)


def round_trip(
    params: Params,
    x0: MassPartition,
    k: int,
    rng: RngStream,
    eps_trunc: float = config.TRUNC_EPS,
    max_atoms: int = config.MAX_ATOMS,
) -> MassPartition:
    """k fragmentation steps followed by k coagulation steps."""
    up = frag_chain(params, x0, k, rng, eps_trunc, max_atoms, keep_all=False)
    if k == 0:
        return up.final
    return coag_chain(params, up.final, k, rng, keep_all=False).final

"""Domain types for mass partitions and set partitions.

A MassPartition stores a finite decreasing vector of atoms plus the mass that
was not represented. That residual is either opaque, or described by tails:
each Tail is a scaled GEM(alpha, theta) remainder and each JumpTail the small
jumps of a subordinator. Their values are known in law, so size-biased picks
that land in them can be drawn exactly.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import ConsistencyError, DomainError
from .numerics import RngStream, sample_beta, sample_small_jump

MASS_TOL = 1e-9


class Marker(Enum):
    """Sentinel returned when a size-biased pick lands beyond the stored atoms."""

    RESIDUAL = "residual"


RESIDUAL = Marker.RESIDUAL


@dataclass(frozen=True)
class Params:
    """Validated (alpha, theta) pair with 0 <= alpha < 1 and theta > -alpha."""

    alpha: float
    theta: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.theta)):
            raise DomainError(f"Params must be finite, got alpha={self.alpha}, theta={self.theta}")
        if not (0.0 <= self.alpha < 1.0):
            raise DomainError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not (self.theta > -self.alpha):
            raise DomainError(f"theta must exceed -alpha, got theta={self.theta}, alpha={self.alpha}")

    def shifted(self, steps: float) -> "Params":
        """Same alpha with theta increased by steps."""
        return Params(self.alpha, self.theta + steps)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "theta": self.theta}


@dataclass(frozen=True)
class Tail:
    """Unstored mass distributed as scale * GEM(alpha, theta), thinned to mass."""

    mass: float
    scale: float
    alpha: float
    theta: float

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"tail mass must be positive, got {self.mass}")
        if self.scale < self.mass * (1.0 - MASS_TOL):
            raise DomainError(f"tail scale {self.scale} is below its mass {self.mass}")
        if not (0.0 <= self.alpha < 1.0 and self.theta > -self.alpha):
            raise DomainError(f"tail law GEM({self.alpha}, {self.theta}) is not valid")

    def scaled(self, factor: float) -> "Tail":
        return Tail(self.mass * factor, self.scale * factor, self.alpha, self.theta)

    def thinned(self, keep: float) -> "Tail | None":
        """Keep a fraction of the mass; values keep their law."""
        mass = self.mass * keep
        if mass <= 0:
            return None
        return Tail(mass, self.scale, self.alpha, self.theta)

    def pick(self, rng: RngStream) -> float:
        """Value of a size-biased pick from this tail."""
        b = sample_beta(1.0 - self.alpha, self.theta + self.alpha, rng)
        return min(self.scale * b, self.mass)

    def without(self, value: float) -> "Tail | None":
        """The remainder after its size-biased atom value was pulled out."""
        rest_mass = self.mass - value
        if rest_mass <= 0:
            return None
        return Tail(rest_mass, max(self.scale - value, rest_mass), self.alpha, self.theta + self.alpha)

    def to_dict(self) -> dict:
        return {"mass": self.mass, "scale": self.scale, "alpha": self.alpha, "theta": self.theta}


@dataclass(frozen=True)
class JumpTail:
    """Unstored subordinator jumps below cutoff, worth unit each per raw unit.

    A size-biased pick among them has raw density proportional to
    t * levy_density(t) on (0, cutoff).
    """

    mass: float
    unit: float
    alpha: float
    cutoff: float

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"tail mass must be positive, got {self.mass}")
        if not (self.unit > 0 and self.cutoff > 0):
            raise DomainError(f"jump tail needs unit > 0 and cutoff > 0, got {self.unit}, {self.cutoff}")
        if not (0.0 <= self.alpha < 1.0):
            raise DomainError(f"jump tail alpha must lie in [0, 1), got {self.alpha}")

    def scaled(self, factor: float) -> "JumpTail":
        return JumpTail(self.mass * factor, self.unit * factor, self.alpha, self.cutoff)

    def thinned(self, keep: float) -> "JumpTail | None":
        mass = self.mass * keep
        if mass <= 0:
            return None
        return JumpTail(mass, self.unit, self.alpha, self.cutoff)

    def pick(self, rng: RngStream) -> float:
        return min(self.unit * sample_small_jump(self.alpha, self.cutoff, rng), self.mass)

    def without(self, value: float) -> "JumpTail | None":
        rest_mass = self.mass - value
        if rest_mass <= 0:
            return None
        return JumpTail(rest_mass, self.unit, self.alpha, self.cutoff)

    def to_dict(self) -> dict:
        return {"mass": self.mass, "unit": self.unit, "alpha": self.alpha, "cutoff": self.cutoff}


TailLaw = Tail | JumpTail


def tail_from_dict(data: dict) -> TailLaw:
    if "cutoff" in data:
        return JumpTail(**data)
    return Tail(**data)


def materialize(tail: TailLaw, rng: RngStream) -> tuple[float, TailLaw | None]:
    """Pull the next size-biased atom out of a tail.

    Returns the atom and the remaining tail, or None when nothing is left.
    """
    value = tail.pick(rng)
    return value, tail.without(value)


@dataclass(eq=False)
class MassPartition:
    """Decreasing atoms plus residual; sum(atoms) + residual = 1."""

    atoms: np.ndarray
    residual: float = 0.0
    tails: tuple[TailLaw, ...] = ()
    truncated: bool = False

    def __post_init__(self):
        self.atoms = np.asarray(self.atoms, dtype=float)
        if self.atoms.ndim != 1:
            raise DomainError("atoms must be one-dimensional")
        if np.any(self.atoms <= 0):
            raise DomainError("atoms must be strictly positive")
        if np.any(np.diff(self.atoms) > 0):
            raise DomainError("atoms must be nonincreasing")
        if self.residual < 0:
            raise DomainError(f"residual must be nonnegative, got {self.residual}")
        total = float(self.atoms.sum()) + self.residual
        if abs(total - 1.0) > MASS_TOL:
            raise ConsistencyError(f"atoms and residual sum to {total!r}, not 1")
        self.tails = tuple(self.tails)
        if self.tails:
            tail_mass = sum(t.mass for t in self.tails)
            if abs(tail_mass - self.residual) > MASS_TOL:
                raise ConsistencyError(f"tail masses {tail_mass!r} do not match residual {self.residual!r}")

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def stored_mass(self) -> float:
        return float(self.atoms.sum())

    @property
    def largest(self) -> float:
        return float(self.atoms[0]) if len(self.atoms) else 0.0

    @property
    def opaque(self) -> bool:
        """True when residual mass exists but nothing is known about its law."""
        return self.residual > 0 and not self.tails

    def approx_equal(self, other: "MassPartition", tol: float = 1e-12) -> bool:
        if len(self.atoms) != len(other.atoms):
            return False
        return bool(np.all(np.abs(self.atoms - other.atoms) <= tol)) and abs(self.residual - other.residual) <= tol

    def to_dict(self) -> dict:
        data = {"atoms": self.atoms.tolist(), "residual": self.residual}
        if self.tails:
            data["tails"] = [t.to_dict() for t in self.tails]
        if self.truncated:
            data["truncated"] = True
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "MassPartition":
        tails = tuple(tail_from_dict(t) for t in data.get("tails", []))
        return rank_normalize(data["atoms"], data.get("residual", 0.0), tails=tails, truncated=data.get("truncated", False))


@dataclass(eq=False)
class SizeBiasedWeights:
    """Stick-breaking weights in discovery order.

    alpha/theta give the law of the sticks when known, so the unconsumed
    remainder can be described as a Tail.
    """

    weights: np.ndarray
    residual: float
    alpha: float | None = None
    theta: float | None = None
    truncated: bool = False

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights < 0):
            raise DomainError("weights must be nonnegative")
        total = float(self.weights.sum()) + self.residual
        if abs(total - 1.0) > MASS_TOL:
            raise ConsistencyError(f"weights and residual sum to {total!r}, not 1")

    def __len__(self) -> int:
        return len(self.weights)

    def tail(self) -> Tail | None:
        """Law of the remainder: residual * GEM(alpha, theta + n*alpha)."""
        if self.residual <= 0 or self.alpha is None:
            return None
        return Tail(self.residual, self.residual, self.alpha, self.theta + len(self.weights) * self.alpha)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "residual": self.residual}


@dataclass(frozen=True)
class SetPartition:
    """Partition of {lo, ..., n} into blocks ordered by least element.

    An empty partition (no blocks) stands for the empty label set {lo, ..., lo - 1}.
    """

    blocks: tuple[tuple[int, ...], ...]
    lo: int = 1

    def __post_init__(self):
        labels = []
        prev_min = None
        for block in self.blocks:
            if not block:
                raise DomainError("blocks must be nonempty")
            if list(block) != sorted(block):
                raise DomainError(f"block {block} is not sorted")
            if prev_min is not None and block[0] <= prev_min:
                raise DomainError("blocks must be ordered by least element")
            prev_min = block[0]
            labels.extend(block)
        if sorted(labels) != list(range(self.lo, self.lo + len(labels))):
            raise DomainError(f"blocks do not partition the labels {self.lo}..{self.lo + len(labels) - 1}")

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], lo: int | None = None) -> "SetPartition":
        """Build from blocks in any order; canonicalizes ordering."""
        canon = sorted((tuple(sorted(b)) for b in blocks if b), key=lambda b: b[0])
        if lo is None:
            lo = canon[0][0] if canon else 1
        return cls(tuple(canon), lo)

    @classmethod
    def from_labels(cls, labels: Sequence, lo: int = 1) -> "SetPartition":
        """Build from per-label block tags; label lo + i carries labels[i]."""
        groups: dict = {}
        for offset, tag in enumerate(labels):
            groups.setdefault(tag, []).append(lo + offset)
        return cls(tuple(tuple(g) for g in groups.values()), lo)

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def n(self) -> int:
        """Largest label."""
        return self.lo + self.size - 1

    def __len__(self) -> int:
        return len(self.blocks)

    def restricted_growth(self) -> tuple[int, ...]:
        """Block index (0-based, least-element order) of each label lo..n."""
        out = [0] * self.size
        for j, block in enumerate(self.blocks):
            for label in block:
                out[label - self.lo] = j
        return tuple(out)

    def to_dict(self) -> dict:
        return {"lo": self.lo, "blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_dict(cls, data: dict) -> "SetPartition":
        return cls(tuple(tuple(b) for b in data["blocks"]), data.get("lo", 1))


@dataclass(eq=False)
class BlockFrequencies:
    """Block frequencies in least-element order."""

    freqs: np.ndarray
    counts: tuple[int, ...] = field(default=())

    def ranked(self) -> MassPartition:
        return rank_normalize(self.freqs, 0.0)


def rank_normalize(
    weights: Iterable[float],
    residual: float = 0.0,
    tails: Sequence[TailLaw] = (),
    truncated: bool = False,
) -> MassPartition:
    """Sort weights decreasingly (stable), drop zeros and rescale to unit mass."""
    w = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights, dtype=float)
    if np.any(w < 0) or residual < 0:
        raise DomainError("weights and residual must be nonnegative")
    total = float(w.sum()) + residual
    if total <= 0 or abs(total - 1.0) > MASS_TOL:
        raise ConsistencyError(f"total mass {total!r} deviates from 1 by more than {MASS_TOL}")
    w = w[w > 0]
    order = np.argsort(-w, kind="stable")
    atoms = w[order] / total
    tails = tuple(t.scaled(1.0 / total) for t in tails)
    return MassPartition(atoms, residual / total, tails, truncated)


def size_biased_index(x: MassPartition, u: float) -> int | Marker:
    """Least index whose cumulative atom mass exceeds u, or RESIDUAL."""
    if not (0.0 <= u < 1.0):
        raise DomainError(f"u must lie in [0, 1), got {u}")
    cumulative = np.cumsum(x.atoms)
    i = int(np.searchsorted(cumulative, u, side="right"))
    if i >= len(cumulative):
        return RESIDUAL
    return i


def stored_pick(x: MassPartition, u: float) -> int:
    """Size-biased index conditioned on the stored atoms."""
    if len(x.atoms) == 0:
        raise DomainError("cannot pick from a partition with no stored atoms")
    stored = x.stored_mass
    if u >= stored:
        u = (u - stored) / (1.0 - stored) * stored
    i = size_biased_index(x, min(u, np.nextafter(stored, 0.0)))
    return len(x.atoms) - 1 if i is RESIDUAL else i


def pick_tail(x: MassPartition, u: float) -> int:
    """Index of the tail hit by u, given u lies beyond the stored atoms."""
    offset = u - x.stored_mass
    cumulative = np.cumsum([t.mass for t in x.tails])
    return min(int(np.searchsorted(cumulative, offset, side="right")), len(x.tails) - 1)


def size_biased_value(x: MassPartition, rng: RngStream) -> float:
    """Value of a size-biased pick from x.

    A hit in a described tail is drawn from its law; a hit in an opaque
    residual is renormalized over the stored atoms. With no stored atoms the
    opaque residual counts as one block.
    """
    u = float(rng.uniform())
    i = size_biased_index(x, u)
    if i is not RESIDUAL:
        return float(x.atoms[i])
    if x.tails:
        return x.tails[pick_tail(x, u)].pick(rng)
    if len(x.atoms) == 0:
        return x.residual
    return float(x.atoms[stored_pick(x, u)])


def lump_residual(x: MassPartition) -> MassPartition:
    """Read an opaque partition without stored atoms as a single flagged block."""
    return rank_normalize([x.residual], 0.0, truncated=True)


def empirical_frequencies(p: SetPartition) -> BlockFrequencies:
    """Block sizes divided by the number of labels."""
    if not p.blocks:
        raise DomainError("empty partition has no frequencies")
    counts = tuple(len(b) for b in p.blocks)
    total = sum(counts)
    return BlockFrequencies(np.array(counts, dtype=float) / total, counts)


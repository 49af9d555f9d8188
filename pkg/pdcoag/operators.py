"""Fragmentation and coagulation operators on mass partitions.

Frag_alpha splits one size-biased atom by an independent PD(alpha, 1 - alpha);
Coag_{alpha,theta} merges an i.i.d. Bernoulli(B) selection of atoms. The
Pitman pair splits every atom by PD(alpha, -alpha*beta) and groups atoms by a
GEM(beta, theta/alpha) paintbox.

Residual tails are carried through every operator so that size-biased picks
stay exact after truncation.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import config
from .errors import DomainError, TruncationError
from .numerics import RngStream, sample_beta
from .partitions import (
    RESIDUAL,
    MassPartition,
    Marker,
    Params,
    SizeBiasedWeights,
    Tail,
    TailLaw,
    lump_residual,
    materialize,
    pick_tail,
    rank_normalize,
    size_biased_index,
    stored_pick,
)
from .samplers import crp_sample_many, gem_sticks

logger = logging.getLogger(__name__)

TAIL_ALPHA_TOL = 1e-12


@dataclass(eq=False)
class FragWitness:
    """Internal randomness of one Frag step."""

    chosen_index: int | Marker
    splitter: SizeBiasedWeights
    residual_hit: bool = False
    chosen_mass: float = 0.0

    def to_dict(self) -> dict:
        index = "residual" if self.chosen_index is RESIDUAL else self.chosen_index
        return {
            "chosen_index": index,
            "chosen_mass": self.chosen_mass,
            "residual_hit": self.residual_hit,
            "splitter": self.splitter.to_dict(),
        }


@dataclass(eq=False)
class CoagWitness:
    """Coagulation proportion B and the per-atom selection."""

    b: float
    indicators: np.ndarray

    def to_dict(self) -> dict:
        return {"b": self.b, "indicators": [int(v) for v in self.indicators]}


def frag_det(x: MassPartition, i: int, eta: SizeBiasedWeights) -> MassPartition:
    """Replace atom i of x by the masses x_i * eta_j and rerank."""
    if not (0 <= i < len(x)):
        raise DomainError(f"atom index {i} out of range for {len(x)} atoms")
    mass = float(x.atoms[i])
    atoms = np.concatenate((np.delete(x.atoms, i), mass * eta.weights))
    residual = x.residual + mass * eta.residual

    tails: tuple[TailLaw, ...] = ()
    split_tail = eta.tail()
    if not x.opaque and (eta.residual == 0 or split_tail is not None):
        tails = x.tails + ((split_tail.scaled(mass),) if split_tail else ())
    return rank_normalize(atoms, residual, tails=tails, truncated=x.truncated or eta.truncated)


def _open_tail(x: MassPartition, u: float, rng: RngStream) -> tuple[MassPartition, int]:
    # materialize the size-biased atom of the tail that u landed in
    k = pick_tail(x, u)
    value, rest = materialize(x.tails[k], rng)
    tails = x.tails[:k] + ((rest,) if rest else ()) + x.tails[k + 1 :]
    opened = MassPartition(np.sort(np.append(x.atoms, value))[::-1], x.residual - value, tails, x.truncated)
    index = int(np.nonzero(opened.atoms == value)[0][0])
    return opened, index


def frag(
    alpha: float,
    x: MassPartition,
    rng: RngStream,
    eps_trunc: float = config.TRUNC_EPS,
    max_atoms: int = config.MAX_ATOMS,
) -> tuple[MassPartition, FragWitness]:
    """Frag_alpha: split a size-biased pick of x by GEM(alpha, 1 - alpha).

    A pick landing in a described tail draws the atom from the tail's law;
    one landing in an opaque residual is renormalized over the stored atoms
    and flagged. An opaque partition with no stored atoms is split as a single
    block.
    """
    splitter_law = Params(alpha, 1.0 - alpha)
    u = float(rng.uniform())
    chosen = size_biased_index(x, u)
    residual_hit = chosen is RESIDUAL
    index = chosen
    if residual_hit:
        if x.tails:
            x, index = _open_tail(x, u, rng)
        elif len(x) == 0:
            x, index = lump_residual(x), 0
        else:
            index = stored_pick(x, u)
            logger.debug("frag pick fell in opaque residual %.3g; renormalized", x.residual)

    eta = gem_sticks(splitter_law, rng, eps_trunc, max_atoms)
    out = frag_det(x, index, eta)
    return out, FragWitness(chosen, eta, residual_hit, float(x.atoms[index]))


def coag_det(x: MassPartition, indicators: Sequence[int], tail_fraction: float = 0.0) -> MassPartition:
    """Merge the selected atoms into one block and rerank.

    tail_fraction moves that share of every described tail into the merged
    block; an opaque residual passes through untouched.
    """
    ind = np.asarray(indicators, dtype=bool)
    if ind.shape != (len(x),):
        raise DomainError(f"{len(ind)} indicators for {len(x)} atoms")
    if not (0.0 <= tail_fraction <= 1.0):
        raise DomainError(f"tail_fraction must lie in [0, 1], got {tail_fraction}")

    tails = x.tails
    residual = x.residual
    merged = float(x.atoms[ind].sum())
    if tails and tail_fraction > 0:
        merged += tail_fraction * residual
        tails = tuple(t for t in (tail.thinned(1.0 - tail_fraction) for tail in tails) if t is not None)
        residual = sum(t.mass for t in tails)
    if merged == 0.0:
        return x
    atoms = np.append(x.atoms[~ind], merged)
    return rank_normalize(atoms, residual, tails=tails, truncated=x.truncated)


def coag_proportion(params: Params, rng: RngStream) -> float:
    """B ~ Beta((1 - alpha)/alpha, (theta + alpha)/alpha), or 1/(theta + 1) when alpha = 0."""
    alpha, theta = params.alpha, params.theta
    if alpha == 0.0:
        return 1.0 / (theta + 1.0)
    return float(sample_beta((1.0 - alpha) / alpha, (theta + alpha) / alpha, rng))


def coag(params: Params, x: MassPartition, rng: RngStream) -> tuple[MassPartition, CoagWitness]:
    """Coag_{alpha,theta}: merge an i.i.d. Bernoulli(B) selection of the atoms of x."""
    b = coag_proportion(params, rng)
    indicators = rng.bernoulli(b, len(x))
    out = coag_det(x, indicators, tail_fraction=b)
    return out, CoagWitness(b, indicators)


def insert_size_biased(y: MassPartition, b: float) -> MassPartition:
    """Scale y by (1 - b) and insert an atom b."""
    if not (0.0 < b < 1.0):
        raise DomainError(f"b must lie in (0, 1), got {b}")
    keep = 1.0 - b
    atoms = np.append(y.atoms * keep, b)
    tails = tuple(t.scaled(keep) for t in y.tails)
    return rank_normalize(atoms, y.residual * keep, tails=tails, truncated=y.truncated)


def _check_pitman_frag(alpha: float, beta: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not (0.0 <= beta < 1.0):
        raise DomainError(f"beta must lie in [0, 1), got {beta}")


def _relabel_tails(x: MassPartition, alpha: float, beta: float) -> tuple[Tail, ...] | None:
    # splitting GEM(alpha*beta, t) atoms by PD(alpha, -alpha*beta) gives PD(alpha, t)
    relabelled = []
    for tail in x.tails:
        if not isinstance(tail, Tail) or abs(tail.alpha - alpha * beta) > TAIL_ALPHA_TOL:
            return None
        relabelled.append(Tail(tail.mass, tail.scale, alpha, tail.theta))
    if x.opaque:
        return None
    return tuple(relabelled)


def pitman_frag_det(x: MassPartition, splitters: Sequence[SizeBiasedWeights]) -> MassPartition:
    """Split each stored atom j of x by splitters[j]; the residual passes through."""
    if len(splitters) != len(x):
        raise DomainError(f"{len(splitters)} splitters for {len(x)} atoms")
    pieces = [x.atoms[j] * s.weights for j, s in enumerate(splitters)]
    residual = x.residual + sum(float(x.atoms[j]) * s.residual for j, s in enumerate(splitters))
    atoms = np.concatenate(pieces) if pieces else np.empty(0)
    return rank_normalize(atoms, residual, truncated=x.truncated)


def pitman_frag(
    x: MassPartition,
    alpha: float,
    beta: float,
    rng: RngStream,
    eps_trunc: float = config.TRUNC_EPS,
    max_atoms: int = config.MAX_ATOMS,
) -> MassPartition:
    """Split every stored atom by an independent GEM(alpha, -alpha*beta).

    Sticks are drawn round by round for all atoms at once; an atom stops once
    its unsplit remainder is below eps_trunc, and that remainder is kept as a
    GEM tail.
    """
    _check_pitman_frag(alpha, beta)
    theta = -alpha * beta
    masses = x.atoms.copy()
    remainder = masses.copy()
    rounds = np.zeros(len(masses), dtype=np.int64)
    active = remainder >= eps_trunc
    pieces = []
    r = 0
    while active.any() and r < max_atoms:
        r += 1
        idx = np.nonzero(active)[0]
        b = rng.generator.beta(1.0 - alpha, theta + r * alpha, size=idx.size)
        pieces.append(remainder[idx] * b)
        remainder[idx] *= 1.0 - b
        rounds[idx] = r
        active[idx] = remainder[idx] >= eps_trunc

    truncated = x.truncated or bool(active.any())
    atoms = np.concatenate(pieces) if pieces else np.empty(0)
    left = remainder > 0
    residual = x.residual + float(remainder[left].sum())

    carried = _relabel_tails(x, alpha, beta)
    if carried is None:
        if x.residual > 0:
            logger.debug("pitman_frag input residual has no GEM(%g, .) law; output residual is opaque", alpha * beta)
        tails: tuple[Tail, ...] = ()
    else:
        split_tails = tuple(
            Tail(float(m), float(m), alpha, theta + int(k) * alpha) for m, k in zip(remainder[left], rounds[left])
        )
        tails = carried + split_tails
    return rank_normalize(atoms, residual, tails=tails, truncated=truncated)


def pitman_coag_det(y: MassPartition, q: SizeBiasedWeights, u: Sequence[float]) -> MassPartition:
    """Group the atoms of y by the interval of q containing u_j and sum each group."""
    u = np.asarray(u, dtype=float)
    if u.shape != (len(y),):
        raise DomainError(f"{len(u)} uniforms for {len(y)} atoms")
    edges = np.cumsum(q.weights)
    if len(u) and (len(edges) == 0 or u.max() >= edges[-1]):
        raise DomainError("q does not cover every uniform")
    groups = np.searchsorted(edges, u, side="right")
    sums = np.bincount(groups, weights=y.atoms, minlength=len(edges))
    return rank_normalize(sums, y.residual, truncated=y.truncated)


def pitman_coag(
    y: MassPartition,
    beta: float,
    theta_over_alpha: float,
    rng: RngStream,
    max_atoms: int = config.MAX_ATOMS,
    seat_overflow: bool = False,
) -> MassPartition:
    """Group atoms of y by uniforms thrown on a lazily extended GEM(beta, theta/alpha).

    Q is extended until its sticks cover every uniform. When more than
    max_atoms sticks would be needed, TruncationError is raised, unless
    seat_overflow is set: the atoms still uncovered then form their own groups
    by an exchangeable (beta, theta/alpha + r*beta) partition, which is the law
    of a paintbox with the remaining GEM tail.

    The residual of y is dust: it lands in every drawn interval in proportion
    to its length, and the share beyond the drawn sticks stays a GEM(beta, .)
    tail.
    """
    if not (0.0 <= beta < 1.0):
        raise DomainError(f"beta must lie in [0, 1), got {beta}")
    if not (theta_over_alpha > -beta):
        raise DomainError(f"theta/alpha must exceed -beta, got {theta_over_alpha}")
    k = len(y)
    u = rng.uniform(k)
    target = float(u.max()) if k else 0.0

    sticks = []
    remaining = 1.0
    count = 0
    chunk = config.CHUNK
    while 1.0 - remaining <= target and count < max_atoms:
        size = min(chunk, max_atoms - count)
        n = np.arange(count + 1, count + size + 1)
        b = rng.generator.beta(1.0 - beta, theta_over_alpha + n * beta)
        survival = remaining * np.cumprod(1.0 - b)
        sticks.append(b * np.concatenate(([remaining], survival[:-1])))
        remaining = float(survival[-1])
        count += size
        chunk *= 2

    q = np.concatenate(sticks) if sticks else np.empty(0)
    edges = np.cumsum(q)
    groups = np.searchsorted(edges, u, side="right")
    overflow = groups >= len(edges)
    if overflow.any():
        if not seat_overflow:
            raise TruncationError(f"GEM({beta}, {theta_over_alpha}) needed more than max_atoms={max_atoms} sticks")
        labels = crp_sample_many(Params(beta, theta_over_alpha + count * beta), int(overflow.sum()), 1, rng)[0]
        groups[overflow] = len(edges) + labels
    sums = np.bincount(groups, weights=y.atoms, minlength=len(q))

    residual = y.residual
    tails: tuple[Tail, ...] = ()
    if residual > 0:
        sums[: len(q)] += residual * q
        residual *= remaining
        if residual > 0:
            tails = (Tail(residual, residual, beta, theta_over_alpha + count * beta),)
    return rank_normalize(sums, residual, tails=tails, truncated=y.truncated or bool(overflow.any()))

"""Samplers for PD / GEM laws and exchangeable (alpha, theta) partitions.

Stick-breaking, the Chinese restaurant process, the gamma and generalized
gamma subordinators (Ferguson-Klass series) and the novel/clone branching
population all live here.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import config
from .errors import DomainError, SizeError, UnsupportedParametersError
from .fenwick import WeightIndex
from .numerics import RngStream, levy_tail_inverse, sample_beta, sample_gamma
from .partitions import JumpTail, MassPartition, Params, SetPartition, SizeBiasedWeights, rank_normalize

logger = logging.getLogger(__name__)

EXACT_PROB_MAX_N = 12


def _check_truncation(eps_trunc: float, max_atoms: int) -> None:
    if not (0.0 < eps_trunc < 1.0):
        raise DomainError(f"eps_trunc must lie in (0, 1), got {eps_trunc}")
    if max_atoms < 1:
        raise DomainError(f"max_atoms must be positive, got {max_atoms}")


def sticks_to_weights(sticks, alpha: float | None = None, theta: float | None = None) -> SizeBiasedWeights:
    """Weights (1 - B_1)...(1 - B_{n-1}) B_n for given sticks."""
    b = np.asarray(sticks, dtype=float)
    if np.any((b < 0) | (b > 1)):
        raise DomainError("sticks must lie in [0, 1]")
    survival = np.cumprod(1.0 - b)
    before = np.concatenate(([1.0], survival[:-1]))
    residual = float(survival[-1]) if len(b) else 1.0
    return SizeBiasedWeights(b * before, residual, alpha, theta)


def gem_sticks(
    params: Params,
    rng: RngStream,
    eps_trunc: float = config.TRUNC_EPS,
    max_atoms: int = config.MAX_ATOMS,
) -> SizeBiasedWeights:
    """Draw GEM(alpha, theta) weights until the residual drops below eps_trunc.

    B_n ~ Beta(1 - alpha, theta + n*alpha). Reaching max_atoms first sets the
    truncated flag; the residual is still the exact stick product.
    """
    _check_truncation(eps_trunc, max_atoms)
    alpha, theta = params.alpha, params.theta
    chunks = []
    residual = 1.0
    drawn = 0
    done = False
    while not done and drawn < max_atoms:
        count = min(config.CHUNK, max_atoms - drawn)
        n = np.arange(drawn + 1, drawn + count + 1)
        b = rng.generator.beta(1.0 - alpha, theta + n * alpha)
        survival = residual * np.cumprod(1.0 - b)
        below = np.nonzero(survival < eps_trunc)[0]
        if below.size:
            cut = int(below[0]) + 1
            b, survival = b[:cut], survival[:cut]
            done = True
        before = np.concatenate(([residual], survival[:-1]))
        chunks.append(b * before)
        residual = float(survival[-1])
        drawn += len(b)

    truncated = not done
    if truncated:
        logger.debug("gem_sticks reached max_atoms=%d with residual %.3g", max_atoms, residual)
    weights = np.concatenate(chunks) if chunks else np.empty(0)
    return SizeBiasedWeights(weights, residual, alpha, theta, truncated)


def pd_sample(
    params: Params,
    rng: RngStream,
    eps_trunc: float = config.TRUNC_EPS,
    max_atoms: int = config.MAX_ATOMS,
) -> MassPartition:
    """PD(alpha, theta) as the ranked GEM weights; the residual keeps its GEM tail."""
    sticks = gem_sticks(params, rng, eps_trunc, max_atoms)
    tail = sticks.tail()
    return rank_normalize(sticks.weights, sticks.residual, tails=(tail,) if tail else (), truncated=sticks.truncated)


def crp_sample(params: Params, n: int, rng: RngStream) -> SetPartition:
    """Seat customers 1..n by the (alpha, theta) Chinese restaurant rule."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    return SetPartition.from_labels(crp_sample_many(params, n, 1, rng)[0])


def crp_sample_many(params: Params, n: int, count: int, rng: RngStream) -> np.ndarray:
    """Restricted-growth labels of count independent CRP partitions, shape (count, n).

    Customers are seated one at a time, vectorised across the replicas.
    """
    if n < 1 or count < 1:
        raise DomainError(f"n and count must be positive, got n={n}, count={count}")
    alpha, theta = params.alpha, params.theta
    labels = np.zeros((count, n), dtype=np.int64)
    sizes = np.zeros((count, n), dtype=float)
    sizes[:, 0] = 1.0
    tables = np.ones(count, dtype=np.int64)
    rows = np.arange(count)
    for m in range(1, n):
        # table j gets n_j - alpha, a new table theta + k*alpha; total m + theta
        weights = np.where(sizes > 0, sizes - alpha, 0.0)
        weights[rows, tables] = theta + tables * alpha
        u = rng.uniform(count) * (m + theta)
        choice = (np.cumsum(weights, axis=1) <= u[:, None]).sum(axis=1)
        choice = np.minimum(choice, tables)
        labels[:, m] = choice
        sizes[rows, choice] += 1.0
        tables += choice == tables
    return labels


def crp_exact_prob(params: Params, p: SetPartition) -> float:
    """Probability that the CRP seating customers 1..n in order produces p."""
    if p.lo != 1:
        raise DomainError(f"crp_exact_prob needs a partition of 1..n, got lo={p.lo}")
    if p.size > EXACT_PROB_MAX_N:
        raise SizeError(f"crp_exact_prob supports n <= {EXACT_PROB_MAX_N}, got {p.size}")
    alpha, theta = params.alpha, params.theta
    labels = p.restricted_growth()
    sizes: list[int] = []
    prob = 1.0
    for m, table in enumerate(labels):
        if table == len(sizes):
            if m > 0:
                prob *= (theta + len(sizes) * alpha) / (m + theta)
            sizes.append(1)
        else:
            prob *= (sizes[table] - alpha) / (m + theta)
            sizes[table] += 1
    return prob


@dataclass(eq=False)
class SubordinatorSample:
    """Ranked jumps of a subordinator on [0, horizon].

    residual_mass is the expected mass of the undrawn jumps, all below cutoff.
    """

    ranked_jumps: np.ndarray
    total_mass: float
    residual_mass: float
    horizon: float
    alpha: float = 0.0
    cutoff: float = np.inf
    truncated: bool = False

    def normalized(self) -> MassPartition:
        return _piece(self.ranked_jumps, self.residual_mass, self.alpha, self.cutoff, self.truncated)

    def to_dict(self) -> dict:
        return {
            "total_mass": self.total_mass,
            "horizon": self.horizon,
            "residual_mass": self.residual_mass,
            "cutoff": self.cutoff,
        }


def small_jump_mass(alpha: float, c: np.ndarray | float):
    """Expected jump mass below c per unit time: int_0^c t * levy_density(t) dt."""
    c = np.asarray(c, dtype=float)
    if alpha == 0.0:
        return -np.expm1(-c)
    return alpha * special.gamma(1.0 - alpha) * special.gammainc(1.0 - alpha, c)


def _subordinator_horizon(params: Params, rng: RngStream, theta: float) -> float:
    if params.alpha == 0.0:
        return theta
    return float(sample_gamma(theta / params.alpha, special.gamma(1.0 - params.alpha), rng))


def _ferguson_klass(alpha: float, horizon: float, rng: RngStream, eps_trunc: float, max_atoms: int) -> SubordinatorSample:
    jumps = []
    drawn_mass = 0.0
    arrival = 0.0
    count = 0
    chunk = config.CHUNK
    residual = 0.0
    done = False
    while not done and count < max_atoms:
        size = min(chunk, max_atoms - count)
        arrivals = arrival + np.cumsum(rng.exponential(size))
        xi = np.atleast_1d(levy_tail_inverse(alpha, arrivals / horizon))
        cum = drawn_mass + np.cumsum(xi)
        residual_est = horizon * small_jump_mass(alpha, xi)
        below = np.nonzero(residual_est < eps_trunc * cum)[0]
        if below.size:
            cut = int(below[0]) + 1
            xi, cum, residual_est = xi[:cut], cum[:cut], residual_est[:cut]
            done = True
        jumps.append(xi)
        drawn_mass = float(cum[-1])
        residual = float(residual_est[-1])
        arrival = float(arrivals[len(xi) - 1])
        count += len(xi)
        chunk *= 2

    truncated = not done
    if truncated:
        logger.debug("subordinator reached max_atoms=%d, residual jump mass %.3g", max_atoms, residual)
    ranked = np.concatenate(jumps)
    return SubordinatorSample(ranked, drawn_mass + residual, residual, horizon, alpha, float(ranked[-1]), truncated)


def subordinator_pd(
    params: Params,
    rng: RngStream,
    eps_trunc: float = config.TRUNC_EPS,
    max_atoms: int = config.MAX_ATOMS,
) -> tuple[MassPartition, SubordinatorSample]:
    """PD(alpha, theta) from normalized subordinator jumps.

    alpha = 0: gamma subordinator on [0, theta]. alpha > 0: generalized gamma
    subordinator run to S ~ Gamma(theta/alpha, rate Gamma(1 - alpha)).
    """
    if params.theta <= 0:
        raise UnsupportedParametersError(f"subordinator representation needs theta > 0, got {params.theta}")
    _check_truncation(eps_trunc, max_atoms)
    horizon = _subordinator_horizon(params, rng, params.theta)
    sample = _ferguson_klass(params.alpha, horizon, rng, eps_trunc, max_atoms)
    return sample.normalized(), sample


@dataclass(eq=False)
class SubordinatorSplit:
    """One subordinator path cut into an early and a late interval."""

    early: MassPartition
    late: MassPartition
    early_fraction: float
    whole: SubordinatorSample
    cut: float


def _piece(jumps: np.ndarray, residual: float, alpha: float, cutoff: float, truncated: bool = False) -> MassPartition:
    total = float(jumps.sum()) + residual
    tails = (JumpTail(residual / total, 1.0 / total, alpha, cutoff),) if residual > 0 else ()
    return rank_normalize(jumps / total, residual / total, tails=tails, truncated=truncated)


def subordinator_split(
    params: Params,
    rng: RngStream,
    eps_trunc: float = config.TRUNC_EPS,
    max_atoms: int = config.MAX_ATOMS,
) -> SubordinatorSplit:
    """Cut a subordinator path at a Beta-distributed point of its horizon.

    The early piece normalizes to PD(alpha, 1 - alpha), the late piece to
    PD(alpha, theta + alpha), the whole path to PD(alpha, theta + 1), and the
    early share of the mass is Beta(1 - alpha, theta + alpha).
    """
    if params.theta + params.alpha <= 0:
        raise UnsupportedParametersError("subordinator split needs theta + alpha > 0")
    _check_truncation(eps_trunc, max_atoms)
    alpha, theta = params.alpha, params.theta
    if alpha == 0.0:
        horizon = theta + 1.0
        cut = 1.0
    else:
        horizon = float(sample_gamma((theta + 1.0) / alpha, special.gamma(1.0 - alpha), rng))
        cut = float(sample_beta((1.0 - alpha) / alpha, (theta + alpha) / alpha, rng)) * horizon
    whole = _ferguson_klass(alpha, horizon, rng, eps_trunc, max_atoms)
    times = rng.uniform(len(whole.ranked_jumps)) * horizon
    early_mask = times < cut
    share = cut / horizon
    jumps = whole.ranked_jumps
    early = _piece(jumps[early_mask], whole.residual_mass * share, alpha, whole.cutoff, whole.truncated)
    late = _piece(jumps[~early_mask], whole.residual_mass * (1.0 - share), alpha, whole.cutoff, whole.truncated)
    early_mass = float(whole.ranked_jumps[early_mask].sum()) + whole.residual_mass * share
    return SubordinatorSplit(early, late, early_mass / whole.total_mass, whole, cut)


def branching_sample(params: Params, n: int, rng: RngStream, immigration: bool = False) -> SetPartition:
    """Colour partition of the first n individuals of the novel/clone population.

    Novel individuals have novel-offspring rate alpha (the ancestor theta + alpha)
    and clone-offspring rate 1 - alpha; clones have clone rate 1. A novel child
    starts a new colour, a clone child inherits its parent's. With immigration,
    the ancestor is an ordinary novel individual and new colours also arrive at
    rate theta.
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    alpha, theta = params.alpha, params.theta
    if immigration and theta <= 0:
        raise UnsupportedParametersError(f"immigration needs theta > 0, got {theta}")

    # slot 2i: novel rate of individual i, 2i+1: clone rate, last slot: immigration
    rates = WeightIndex(2 * n + 1)
    immigrant_slot = 2 * n
    colour = [0] * n
    colours = 1
    rates[0] = alpha if immigration else theta + alpha
    rates[1] = 1.0 - alpha
    if immigration:
        rates[immigrant_slot] = theta

    for m in range(1, n):
        slot = rates.sample(float(rng.uniform()))
        if slot % 2 == 0:  # novel birth or immigrant
            colour[m] = colours
            colours += 1
            rates[2 * m] = alpha
            rates[2 * m + 1] = 1.0 - alpha
        else:
            colour[m] = colour[slot // 2]
            rates[2 * m + 1] = 1.0
    return SetPartition.from_labels(colour)

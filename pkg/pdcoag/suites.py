"""Statistical verification suites.

Each suite checks distributional identities by Monte Carlo with fixed
seeds and returns a list of TestResult. run_suite wraps a suite in a
SuiteReport. Suites whose identities need parameters outside the given
(alpha, theta) raise UnsupportedParametersError; the "all" suite skips them.
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from . import config
from .chains import coag_chain, frag_chain, poissonized_path, round_trip
from .errors import UnsupportedParametersError, UsageError
from .numerics import RngStream, sample_beta
from .operators import coag, frag, insert_size_biased, pitman_coag, pitman_frag
from .partitions import Params, SetPartition, size_biased_value
from .rectree import (
    branch_sizes_many,
    grow_many,
    stage_tree,
    strip,
    strip_frequencies_many,
    strip_labels_many,
    tree_exact_prob,
    urn_coagulate,
    urn_indicators,
    urn_limit_fractions,
)
from .replicas import run_replicas
from .samplers import (
    branching_sample,
    crp_exact_prob,
    crp_sample_many,
    gem_sticks,
    pd_sample,
    subordinator_pd,
    subordinator_split,
)
from .stattest import (
    TestResult,
    beta_cdf,
    chi_square,
    crp_seating_oracle,
    enumerate_recursive_trees,
    enumerate_set_partitions,
    gamma_cdf,
    ks_one_sample,
    ks_two_sample,
    pool_cells,
    z_test,
)

logger = logging.getLogger(__name__)

STREAM_STRIDE = 100_000_000
EXACT_TOL = 1e-12

# Sizes used when --samples is not given
SB_GEM_N = 100_000
SB_OTHER_N = 20_000
SB_BRANCHING_N = 10_000
PARTITION_LABELS = 50
CRP_CHI_N = 100_000
CRP_CHI_LABELS = 4
ORACLE_MAX_LABELS = 6
SUBORDINATOR_N = 10_000
THM31_N = 100_000
CHAIN_N = 10_000
CHAIN_STEPS = 3
POISSON_RATE = 1.0
POISSON_T = 2.0
PITMAN_N = 10_000
PITMAN_COAG_ATOMS = 2000  # input sticks for grouping; the remainder is spread as dust
PITMAN_INPUT_EPS = 1e-6
PITMAN_SPLIT_EPS = 1e-4
PITMAN_SPLIT_ROUNDS = 64
TREE_N = 10_000
TREE_COUNT = 2000
TREE_BATCH = 250
TREE_CRP_N = 100_000
URN_STEPS = 10_000
URN_REPLICAS = 10_000
URN_PAIR_N = 100_000
URN_PAIR_LABELS = 5
STAGE_N = 10_000
STAGES = 3
STAGE_SUITE_EPS = 0.05


@dataclass
class SuiteReport:
    """Structured outcome of one suite; passed iff every test passed."""

    suite: str
    params: Params
    seed: int
    tests: list[TestResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.tests)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "params": self.params.to_dict(),
            "seed": self.seed,
            "tests": [t.to_dict() for t in self.tests],
            "pass": self.passed,
        }


@dataclass
class SuiteContext:
    """Shared knobs for one suite run; hands out disjoint random streams."""

    suite: str
    params: Params
    seed: int
    samples: int | None = None
    threshold: float = config.ALPHA_LEVEL
    jobs: int = 1
    beta: float = 0.6
    max_atoms: int = config.SUITE_MAX_ATOMS
    _next_stream: int = 0

    def size(self, default: int) -> int:
        return self.samples if self.samples else default

    def _base(self) -> int:
        self._next_stream += 1
        return self._next_stream * STREAM_STRIDE

    def replicas(self, fn: Callable[[RngStream], object], count: int) -> list:
        return run_replicas(fn, count, self.seed, self.jobs, self._base())

    def stream(self) -> RngStream:
        return RngStream(self.seed, self._base())

    def name(self, test: str) -> str:
        return f"{self.suite}/{test}"

    def ks(self, test: str, samples, cdf) -> TestResult:
        return ks_one_sample(samples, cdf, self.name(test), self.threshold)

    def ks2(self, test: str, a, b) -> TestResult:
        return ks_two_sample(a, b, self.name(test), self.threshold)

    def chi2(self, test: str, observed, probs) -> TestResult:
        obs, p = pool_cells(observed, probs)
        return chi_square(obs, p, self.name(test), self.threshold)

    def exact(self, test: str, deviation: float, n: int) -> TestResult:
        ok = deviation <= EXACT_TOL
        return TestResult(self.name(test), deviation, 1.0 if ok else 0.0, self.threshold, ok, n)


def _rg_key(labels) -> tuple[int, ...]:
    return tuple(int(v) for v in labels)


def _counts(keys: list, index: dict) -> np.ndarray:
    counts = np.zeros(len(index))
    for key in keys:
        counts[index[key]] += 1
    return counts


def _crp_law(params: Params, n: int) -> tuple[dict, np.ndarray]:
    parts = enumerate_set_partitions(n)
    index = {p.restricted_growth(): j for j, p in enumerate(parts)}
    probs = np.array([crp_exact_prob(params, p) for p in parts])
    return index, probs


# Per-replica workers; module level so they pickle for --jobs

def _gem_first_weight(rng: RngStream, params: Params) -> float:
    return float(gem_sticks(params, rng, max_atoms=1).weights[0])


def _pd_pick(rng: RngStream, params: Params, max_atoms: int) -> float:
    return size_biased_value(pd_sample(params, rng, max_atoms=max_atoms), rng)


def _subordinator_pick(rng: RngStream, params: Params, max_atoms: int) -> float:
    x, _ = subordinator_pd(params, rng, max_atoms=max_atoms)
    return size_biased_value(x, rng)


def _branching_first_block(rng: RngStream, params: Params, n: int) -> float:
    # the block of label 1 completed by its conditional limiting frequency
    size = len(branching_sample(params, n, rng).blocks[0])
    return float(sample_beta(1.0 - params.alpha + size - 1, params.theta + params.alpha + n - size, rng))


def _branching_key(rng: RngStream, params: Params, n: int) -> tuple[int, ...]:
    return branching_sample(params, n, rng).restricted_growth()


def _inserted_pick(rng: RngStream, params: Params, max_atoms: int) -> float:
    y = pd_sample(params.shifted(params.alpha), rng, max_atoms=max_atoms)
    b = float(sample_beta(1.0 - params.alpha, params.theta + params.alpha, rng))
    return size_biased_value(insert_size_biased(y, b), rng)


def _subordinator_stats(rng: RngStream, params: Params, max_atoms: int) -> tuple[float, float]:
    x, sample = subordinator_pd(params, rng, max_atoms=max_atoms)
    return sample.total_mass, x.largest


def _pd_largest(rng: RngStream, params: Params, max_atoms: int) -> float:
    return pd_sample(params, rng, max_atoms=max_atoms).largest


def _split_stats(rng: RngStream, params: Params, max_atoms: int) -> tuple[float, float, float, float]:
    split = subordinator_split(params, rng, max_atoms=max_atoms)
    return (
        split.early_fraction,
        size_biased_value(split.early, rng),
        size_biased_value(split.late, rng),
        size_biased_value(split.whole.normalized(), rng),
    )


def _frag_pick(rng: RngStream, params: Params, max_atoms: int) -> float:
    x = pd_sample(params, rng, max_atoms=max_atoms)
    y, _ = frag(params.alpha, x, rng, max_atoms=max_atoms)
    return size_biased_value(y, rng)


def _coag_stats(rng: RngStream, params: Params, max_atoms: int) -> tuple[float, float]:
    y = pd_sample(params.shifted(1), rng, max_atoms=max_atoms)
    x, witness = coag(params, y, rng)
    return size_biased_value(x, rng), witness.b


def _chain_stats(rng: RngStream, params: Params, max_atoms: int, steps: int) -> tuple[float, list[float]]:
    x0 = pd_sample(params, rng, max_atoms=max_atoms)
    traj = frag_chain(params, x0, steps, rng, max_atoms=max_atoms)
    splits = [float(w.splitter.weights[0]) for w in traj.witnesses]
    return size_biased_value(traj.final, rng), splits


def _round_trip_pick(rng: RngStream, params: Params, max_atoms: int, k: int) -> float:
    x0 = pd_sample(params, rng, max_atoms=max_atoms)
    return size_biased_value(round_trip(params, x0, k, rng, max_atoms=max_atoms), rng)


def _coag_chain_pick(rng: RngStream, params: Params, max_atoms: int, steps: int) -> float:
    y_end = pd_sample(params.shifted(steps), rng, max_atoms=max_atoms)
    return size_biased_value(coag_chain(params, y_end, steps, rng, keep_all=False).final, rng)


def _poisson_stats(rng: RngStream, params: Params, max_atoms: int) -> tuple[int, float]:
    x0 = pd_sample(params, rng, max_atoms=max_atoms)
    path = poissonized_path(params, x0, POISSON_RATE, POISSON_T, rng, max_atoms=max_atoms)
    return len(path.jump_times), size_biased_value(path.state_at(POISSON_T), rng)


def _poisson_mixture_pick(rng: RngStream, params: Params) -> float:
    jumps = int(rng.generator.poisson(POISSON_RATE * POISSON_T))
    return float(sample_beta(1.0 - params.alpha, params.theta + jumps + params.alpha, rng))


def _pitman_frag_pick(rng: RngStream, alpha: float, beta: float, theta: float, max_atoms: int) -> float:
    x = pd_sample(Params(alpha * beta, theta), rng, eps_trunc=PITMAN_INPUT_EPS, max_atoms=max_atoms)
    y = pitman_frag(x, alpha, beta, rng, eps_trunc=PITMAN_SPLIT_EPS, max_atoms=PITMAN_SPLIT_ROUNDS)
    return size_biased_value(y, rng)


def _pitman_coag_pick(rng: RngStream, alpha: float, beta: float, theta: float, max_atoms: int) -> float:
    y = pd_sample(Params(alpha, theta), rng, eps_trunc=PITMAN_INPUT_EPS, max_atoms=PITMAN_COAG_ATOMS)
    x = pitman_coag(y, beta, theta / alpha, rng, max_atoms=max(max_atoms, PITMAN_COAG_ATOMS), seat_overflow=True)
    return size_biased_value(x, rng)


def _tree_batch(rng: RngStream, params: Params, n: int, count: int) -> np.ndarray:
    """Columns: T_{n,1}/n, T_{n,2}/n, largest level-0 and level-1 block frequencies."""
    parents = grow_many(params, n, count, rng)
    sizes = branch_sizes_many(parents)
    level0 = strip_frequencies_many(parents, sizes, 0).max(axis=1) / n
    level1 = strip_frequencies_many(parents, sizes, 1).max(axis=1) / (n - 1)
    return np.column_stack((sizes[:, 1] / n, sizes[:, 2] / n, level0, level1))


def _frag_largest(rng: RngStream, params: Params, max_atoms: int) -> float:
    x0 = pd_sample(params, rng, max_atoms=max_atoms)
    x1, _ = frag(params.alpha, x0, rng, max_atoms=max_atoms)
    return x1.largest


def _stage_stats(rng: RngStream, params: Params, max_atoms: int) -> tuple[list[float], tuple[int, ...], float]:
    tree = stage_tree(params, STAGES, rng, eps=STAGE_SUITE_EPS, max_atoms=max_atoms)
    weights = [tree.vertex_weight(i) for i in range(1, STAGES + 1)]
    pick = size_biased_value(tree.history[STAGES], rng)
    return weights, tree.to_recursive_tree().parent, pick


# Suites

def sb_marginal(ctx: SuiteContext) -> list[TestResult]:
    """Size-biased pick of every sampler ~ Beta(1 - alpha, theta + alpha); insertion identity."""
    p = ctx.params
    cdf = beta_cdf(1.0 - p.alpha, p.theta + p.alpha)
    results = []

    first = ctx.replicas(partial(_gem_first_weight, params=p), ctx.size(SB_GEM_N))
    results.append(ctx.ks("gem-first-weight", first, cdf))

    picks = ctx.replicas(partial(_pd_pick, params=p, max_atoms=ctx.max_atoms), ctx.size(SB_OTHER_N))
    results.append(ctx.ks("pd-sample-pick", picks, cdf))

    rng = ctx.stream()
    n = PARTITION_LABELS
    labels = crp_sample_many(p, n, ctx.size(SB_OTHER_N), rng)
    size = (labels == 0).sum(axis=1)
    completed = rng.generator.beta(1.0 - p.alpha + size - 1, p.theta + p.alpha + n - size)
    results.append(ctx.ks("crp-first-block", completed, cdf))

    branching = ctx.replicas(partial(_branching_first_block, params=p, n=n), ctx.size(SB_BRANCHING_N))
    results.append(ctx.ks("branching-first-block", branching, cdf))

    if p.theta > 0:
        sub = ctx.replicas(partial(_subordinator_pick, params=p, max_atoms=ctx.max_atoms), ctx.size(SUBORDINATOR_N))
        results.append(ctx.ks("subordinator-pick", sub, cdf))
    else:
        logger.info("%s: subordinator pick skipped for alpha=%g theta=%g", ctx.suite, p.alpha, p.theta)

    inserted = ctx.replicas(partial(_inserted_pick, params=p, max_atoms=ctx.max_atoms), ctx.size(SB_OTHER_N))
    results.append(ctx.ks("insertion-pick", inserted, cdf))
    return results


def crp_oracle(ctx: SuiteContext) -> list[TestResult]:
    """CRP and branching partitions against the exact CRP law."""
    p = ctx.params
    results = []
    index, probs = _crp_law(p, CRP_CHI_LABELS)

    labels = crp_sample_many(p, CRP_CHI_LABELS, ctx.size(CRP_CHI_N), ctx.stream())
    observed = _counts([_rg_key(row) for row in labels], index)
    results.append(ctx.chi2("crp-vs-exact", observed, probs))

    deviation = 0.0
    for n in range(1, ORACLE_MAX_LABELS + 1):
        for part, prob in crp_seating_oracle(p, n).items():
            deviation = max(deviation, abs(prob - crp_exact_prob(p, part)))
    results.append(ctx.exact("oracle-vs-exact", deviation, ORACLE_MAX_LABELS))

    keys = ctx.replicas(partial(_branching_key, params=p, n=CRP_CHI_LABELS), ctx.size(CRP_CHI_N))
    results.append(ctx.chi2("branching-vs-exact", _counts(keys, index), probs))
    return results


def subordinator(ctx: SuiteContext) -> list[TestResult]:
    """Subordinator total mass, agreement with stick-breaking, and the split identities."""
    p = ctx.params
    if p.theta <= 0:
        raise UnsupportedParametersError(f"subordinator suite needs theta > 0, got {p.theta}")
    n = ctx.size(SUBORDINATOR_N)
    results = []

    stats = np.array(ctx.replicas(partial(_subordinator_stats, params=p, max_atoms=ctx.max_atoms), n))
    totals, largest = stats[:, 0], stats[:, 1]
    results.append(ctx.ks("total-mass-gamma", totals, gamma_cdf(p.theta, 1.0)))

    stick = ctx.replicas(partial(_pd_largest, params=p, max_atoms=ctx.max_atoms), n)
    results.append(ctx.ks2("largest-vs-stick", largest, stick))

    low = totals <= np.median(totals)
    results.append(ctx.ks2("largest-independent-of-total", largest[low], largest[~low]))

    split = np.array(ctx.replicas(partial(_split_stats, params=p, max_atoms=ctx.max_atoms), n))
    a = 1.0 - p.alpha
    results.append(ctx.ks("split-early-fraction", split[:, 0], beta_cdf(a, p.theta + p.alpha)))
    results.append(ctx.ks("split-early-pick", split[:, 1], beta_cdf(a, 1.0)))
    results.append(ctx.ks("split-late-pick", split[:, 2], beta_cdf(a, p.theta + 2 * p.alpha)))
    results.append(ctx.ks("split-whole-pick", split[:, 3], beta_cdf(a, p.theta + 1 + p.alpha)))
    return results


def thm31_frag(ctx: SuiteContext) -> list[TestResult]:
    """Frag_alpha maps PD(alpha, theta) to PD(alpha, theta + 1)."""
    p = ctx.params
    picks = ctx.replicas(partial(_frag_pick, params=p, max_atoms=ctx.max_atoms), ctx.size(THM31_N))
    return [ctx.ks("frag-pick", picks, beta_cdf(1.0 - p.alpha, p.theta + 1 + p.alpha))]


def thm31_coag(ctx: SuiteContext) -> list[TestResult]:
    """Coag_{alpha,theta} maps PD(alpha, theta + 1) to PD(alpha, theta)."""
    p = ctx.params
    stats = np.array(ctx.replicas(partial(_coag_stats, params=p, max_atoms=ctx.max_atoms), ctx.size(THM31_N)))
    results = [ctx.ks("coag-pick", stats[:, 0], beta_cdf(1.0 - p.alpha, p.theta + p.alpha))]
    if p.alpha > 0:
        law = beta_cdf((1.0 - p.alpha) / p.alpha, (p.theta + p.alpha) / p.alpha)
        results.append(ctx.ks("coag-proportion", stats[:, 1], law))
    else:
        deviation = float(np.max(np.abs(stats[:, 1] - 1.0 / (p.theta + 1.0))))
        results.append(ctx.exact("coag-proportion", deviation, len(stats)))
    return results


def chain(ctx: SuiteContext) -> list[TestResult]:
    """Fragmentation chain marginals, round trip, coagulation chain and Poissonization."""
    p = ctx.params
    a = 1.0 - p.alpha
    n = ctx.size(CHAIN_N)
    results = []

    runs = ctx.replicas(partial(_chain_stats, params=p, max_atoms=ctx.max_atoms, steps=CHAIN_STEPS), n)
    picks = [r[0] for r in runs]
    results.append(ctx.ks("frag-chain-pick", picks, beta_cdf(a, p.theta + CHAIN_STEPS + p.alpha)))
    splits = [s for r in runs for s in r[1]]
    results.append(ctx.ks("splitter-first-weight", splits, beta_cdf(a, 1.0)))

    trip = ctx.replicas(partial(_round_trip_pick, params=p, max_atoms=ctx.max_atoms, k=2), n)
    results.append(ctx.ks("round-trip-pick", trip, beta_cdf(a, p.theta + p.alpha)))

    down = ctx.replicas(partial(_coag_chain_pick, params=p, max_atoms=ctx.max_atoms, steps=2), n)
    results.append(ctx.ks("coag-chain-pick", down, beta_cdf(a, p.theta + p.alpha)))

    paths = ctx.replicas(partial(_poisson_stats, params=p, max_atoms=ctx.max_atoms), n)
    mean = POISSON_RATE * POISSON_T
    results.append(z_test([j for j, _ in paths], mean, mean, ctx.name("poisson-jump-count"), ctx.threshold))
    mixture = ctx.replicas(partial(_poisson_mixture_pick, params=p), n)
    results.append(ctx.ks2("poisson-marginal", [v for _, v in paths], mixture))
    return results


def pitman(ctx: SuiteContext) -> list[TestResult]:
    """Pitman's (alpha, -alpha*beta) fragmentation and (beta, theta/alpha) coagulation."""
    p, beta = ctx.params, ctx.beta
    if p.alpha <= 0:
        raise UnsupportedParametersError(f"pitman suite needs alpha > 0, got {p.alpha}")
    if not (0.0 <= beta < 1.0) or p.theta <= -p.alpha * beta:
        raise UnsupportedParametersError(f"pitman suite needs 0 <= beta < 1 and theta > -alpha*beta, got beta={beta}")
    n = ctx.size(PITMAN_N)
    ab = p.alpha * beta
    args = dict(alpha=p.alpha, beta=beta, theta=p.theta, max_atoms=ctx.max_atoms)
    split = ctx.replicas(partial(_pitman_frag_pick, **args), n)
    merged = ctx.replicas(partial(_pitman_coag_pick, **args), n)
    return [
        ctx.ks("frag-pick", split, beta_cdf(1.0 - p.alpha, p.theta + p.alpha)),
        ctx.ks("coag-pick", merged, beta_cdf(1.0 - ab, p.theta + ab)),
    ]


def _tree_columns(ctx: SuiteContext) -> np.ndarray:
    count = ctx.size(TREE_COUNT)
    batches = [min(TREE_BATCH, count - start) for start in range(0, count, TREE_BATCH)]
    fn = partial(_tree_batch, params=ctx.params, n=TREE_N, count=batches[0])
    blocks = ctx.replicas(fn, len(batches))
    return np.concatenate([b[:size] for b, size in zip(blocks, batches)])


def tree_branch(ctx: SuiteContext) -> list[TestResult]:
    """T_{n,k}/n ~ Beta(1 - alpha, theta + k - 1 + alpha) for k = 1, 2."""
    p = ctx.params
    cols = _tree_columns(ctx)
    return [
        ctx.ks(f"branch-size-k{k}", cols[:, k - 1], beta_cdf(1.0 - p.alpha, p.theta + k - 1 + p.alpha))
        for k in (1, 2)
    ]


def tree_chain(ctx: SuiteContext) -> list[TestResult]:
    """Root-stripped tree partitions against the CRP and the fragmentation chain."""
    p = ctx.params
    results = []
    cols = _tree_columns(ctx)
    pd_largest = ctx.replicas(partial(_pd_largest, params=p, max_atoms=ctx.max_atoms), len(cols))
    results.append(ctx.ks2("level0-largest-vs-pd", cols[:, 2], pd_largest))

    chain_largest = ctx.replicas(partial(_frag_largest, params=p, max_atoms=ctx.max_atoms), len(cols))
    results.append(ctx.ks2("level1-largest-vs-frag", cols[:, 3], chain_largest))

    index, probs = _crp_law(p, CRP_CHI_LABELS)
    parents = grow_many(p, CRP_CHI_LABELS, ctx.size(TREE_CRP_N), ctx.stream())
    observed = _counts([_rg_key(row) for row in strip_labels_many(parents, 0)], index)
    results.append(ctx.chi2("strip0-vs-crp", observed, probs))
    return results


def urn(ctx: SuiteContext) -> list[TestResult]:
    """Limiting urn fractions and the urn-coagulation pair law."""
    p = ctx.params
    results = []
    for i in (0, 1):
        fractions = urn_limit_fractions(p, i, URN_STEPS, ctx.size(URN_REPLICAS), ctx.stream())
        if p.alpha > 0:
            law = beta_cdf((1.0 - p.alpha) / p.alpha, (p.theta + i + p.alpha) / p.alpha)
            results.append(ctx.ks(f"limit-fraction-i{i}", fractions, law))
        else:
            q = 1.0 / (p.theta + i + 1.0)
            results.append(z_test(fractions, q, q * (1 - q) / URN_STEPS, ctx.name(f"limit-fraction-i{i}"), ctx.threshold))

    n = URN_PAIR_LABELS
    oracle: dict[tuple, float] = {}
    for t in enumerate_recursive_trees(n):
        key = (strip(t, 0).restricted_growth(), strip(t, 1).restricted_growth())
        oracle[key] = oracle.get(key, 0.0) + tree_exact_prob(p, t)
    index = {key: j for j, key in enumerate(oracle)}
    probs = np.array(list(oracle.values()))
    probs = probs / probs.sum()

    count = ctx.size(URN_PAIR_N)
    parents = grow_many(p, n, count, ctx.stream())
    level0 = strip_labels_many(parents, 0)
    level1 = strip_labels_many(parents, 1)
    tree_keys = [(_rg_key(a), _rg_key(b)) for a, b in zip(level0, level1)]
    results.append(ctx.chi2("tree-pair-vs-exact", _counts(tree_keys, index), probs))

    rng = ctx.stream()
    urn_keys = []
    for row in level1:
        b_next = SetPartition.from_labels(row.tolist(), lo=2)
        indicators = urn_indicators(p, 0, len(b_next.blocks), rng)
        urn_keys.append((urn_coagulate(b_next, indicators, 0).restricted_growth(), b_next.restricted_growth()))
    results.append(ctx.chi2("urn-pair-vs-exact", _counts(urn_keys, index), probs))
    return results


def stage(ctx: SuiteContext) -> list[TestResult]:
    """Stage construction weights, skeleton law and leaf partition."""
    p = ctx.params
    a = 1.0 - p.alpha
    runs = ctx.replicas(partial(_stage_stats, params=p, max_atoms=ctx.max_atoms), ctx.size(STAGE_N))
    results = []
    for i in range(STAGES):
        weights = [r[0][i] for r in runs]
        results.append(ctx.ks(f"vertex-weight-{i + 1}", weights, beta_cdf(a, p.theta + i + p.alpha)))

    trees = enumerate_recursive_trees(STAGES)
    index = {t.parent: j for j, t in enumerate(trees)}
    probs = np.array([tree_exact_prob(p, t) for t in trees])
    results.append(ctx.chi2("skeleton-vs-tree-law", _counts([r[1] for r in runs], index), probs))

    picks = [r[2] for r in runs]
    results.append(ctx.ks("leaf-pick", picks, beta_cdf(a, p.theta + STAGES + p.alpha)))
    return results


SUITES: dict[str, Callable[[SuiteContext], list[TestResult]]] = {
    "sb-marginal": sb_marginal,
    "crp-oracle": crp_oracle,
    "subordinator": subordinator,
    "thm31-frag": thm31_frag,
    "thm31-coag": thm31_coag,
    "chain": chain,
    "pitman": pitman,
    "tree-branch": tree_branch,
    "tree-chain": tree_chain,
    "urn": urn,
    "stage": stage,
}

SUITE_NAMES = tuple(SUITES) + ("all",)


def run_suite(
    name: str,
    params: Params,
    seed: int,
    samples: int | None = None,
    threshold: float = config.ALPHA_LEVEL,
    jobs: int = 1,
    beta: float = 0.6,
    max_atoms: int = config.SUITE_MAX_ATOMS,
) -> SuiteReport:
    """Run one named suite, or every suite for "all"."""
    if name not in SUITE_NAMES:
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    report = SuiteReport(name, params, seed)
    names = list(SUITES) if name == "all" else [name]
    for suite in names:
        ctx = SuiteContext(suite, params, seed, samples, threshold, jobs, beta, max_atoms)
        try:
            tests = SUITES[suite](ctx)
        except UnsupportedParametersError as e:
            if name != "all":
                raise
            logger.info("skipping %s: %s", suite, e)
            continue
        for t in tests:
            logger.info("%s %s p=%.4g stat=%.4g", "PASS" if t.passed else "FAIL", t.name, t.p_value, t.statistic)
        report.tests.extend(tests)
    return report

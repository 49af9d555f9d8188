"""Goodness-of-fit tests and exact combinatorial oracles."""

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from . import config
from .errors import DomainError, SizeError, UsageError
from .numerics import reg_inc_beta, reg_inc_gamma_lower
from .partitions import Params, SetPartition
from .rectree import RecursiveTree

PROB_SUM_TOL = 1e-9
MIN_EXPECTED = 5.0
ENUMERATE_MAX_N = 12
ORACLE_MAX_N = 8
TREES_MAX_N = 8


@dataclass
class TestResult:
    """Outcome of one hypothesis test; passed iff p_value >= threshold."""

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    p_value: float
    threshold: float
    passed: bool
    n_samples: int
    sample: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": float(self.statistic),
            "p_value": float(self.p_value),
            "threshold": float(self.threshold),
            "pass": bool(self.passed),
            "n_samples": int(self.n_samples),
        }


def _result(name: str, statistic: float, p_value: float, threshold: float, n: int, sample=None) -> TestResult:
    p_value = float(min(max(p_value, 0.0), 1.0))
    return TestResult(name, float(statistic), p_value, threshold, p_value >= threshold, int(n), sample)


def ks_one_sample(
    samples: Sequence[float],
    cdf: Callable[[np.ndarray], np.ndarray],
    name: str = "ks",
    threshold: float = config.ALPHA_LEVEL,
) -> TestResult:
    """One-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise DomainError("ks_one_sample needs at least one sample")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - f)), float(np.max(f - (i - 1) / n)))
    return _result(name, d, special.kolmogorov(np.sqrt(n) * d), threshold, n, x)


def ks_two_sample(
    a: Sequence[float],
    b: Sequence[float],
    name: str = "ks2",
    threshold: float = config.ALPHA_LEVEL,
) -> TestResult:
    """Two-sample KS test; effective size na*nb/(na+nb)."""
    xa = np.sort(np.asarray(a, dtype=float))
    xb = np.sort(np.asarray(b, dtype=float))
    na, nb = len(xa), len(xb)
    if na == 0 or nb == 0:
        raise DomainError("ks_two_sample needs two nonempty samples")
    points = np.concatenate((xa, xb))
    fa = np.searchsorted(xa, points, side="right") / na
    fb = np.searchsorted(xb, points, side="right") / nb
    d = float(np.max(np.abs(fa - fb)))
    effective = na * nb / (na + nb)
    return _result(name, d, special.kolmogorov(np.sqrt(effective) * d), threshold, na + nb, xa)


def chi_square(
    observed: Sequence[float],
    probs: Sequence[float],
    name: str = "chi2",
    threshold: float = config.ALPHA_LEVEL,
) -> TestResult:
    """Pearson chi-square test with df = cells - 1."""
    obs = np.asarray(observed, dtype=float)
    p = np.asarray(probs, dtype=float)
    if obs.shape != p.shape:
        raise DomainError(f"{len(obs)} observed cells for {len(p)} probabilities")
    if abs(float(p.sum()) - 1.0) > PROB_SUM_TOL:
        raise DomainError(f"cell probabilities sum to {p.sum()!r}, not 1")
    if len(p) < 2:
        raise UsageError("chi_square needs at least two cells")
    n = float(obs.sum())
    expected = n * p
    if np.any(expected < MIN_EXPECTED):
        raise UsageError(f"expected count {expected.min():.3g} below {MIN_EXPECTED}; pool cells first")
    stat = float(np.sum((obs - expected) ** 2 / expected))
    df = len(p) - 1
    return _result(name, stat, special.gammaincc(df / 2.0, stat / 2.0), threshold, int(n))


def pool_cells(observed: Sequence[float], probs: Sequence[float], min_expected: float = MIN_EXPECTED, total: float | None = None):
    """Merge the sparsest cells until every expected count reaches min_expected.

    Returns (observed, probs) arrays with the pooled cell last.
    """
    obs = np.asarray(observed, dtype=float)
    p = np.asarray(probs, dtype=float)
    n = float(obs.sum()) if total is None else total
    order = np.argsort(p * n, kind="stable")
    pooled_obs, pooled_p = 0.0, 0.0
    cut = 0
    while cut < len(order) and (p[order[cut]] * n < min_expected or 0 < pooled_p * n < min_expected):
        pooled_obs += obs[order[cut]]
        pooled_p += p[order[cut]]
        cut += 1
    keep = np.sort(order[cut:])
    out_obs, out_p = obs[keep], p[keep]
    if pooled_p > 0:
        out_obs = np.append(out_obs, pooled_obs)
        out_p = np.append(out_p, pooled_p)
    return out_obs, out_p


def z_test(
    samples: Sequence[float],
    mean: float,
    variance: float | None = None,
    name: str = "z",
    threshold: float = config.ALPHA_LEVEL,
) -> TestResult:
    """Two-sided normal test of a sample mean; the sample variance is used when none is given."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n < 2:
        raise DomainError("z_test needs at least two samples")
    var = float(np.var(x, ddof=1)) if variance is None else variance
    if var <= 0:
        stat = 0.0 if np.isclose(x.mean(), mean) else np.inf
    else:
        stat = float((x.mean() - mean) / np.sqrt(var / n))
    return _result(name, stat, special.erfc(abs(stat) / np.sqrt(2.0)), threshold, n, x)


def beta_cdf(a: float, b: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: reg_inc_beta(a, b, np.clip(x, 0.0, 1.0))


def gamma_cdf(shape: float, rate: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: reg_inc_gamma_lower(shape, rate * np.maximum(x, 0.0))


def enumerate_set_partitions(n: int) -> list[SetPartition]:
    """All partitions of {1..n} in canonical order, via restricted growth strings."""
    if not (1 <= n <= ENUMERATE_MAX_N):
        raise SizeError(f"enumerate_set_partitions supports 1 <= n <= {ENUMERATE_MAX_N}, got {n}")
    out = []
    labels = [0] * n
    maxima = [0] * n

    def visit(pos: int) -> None:
        if pos == n:
            out.append(SetPartition.from_labels(labels))
            return
        for block in range(maxima[pos - 1] + 2):
            labels[pos] = block
            maxima[pos] = max(maxima[pos - 1], block)
            visit(pos + 1)

    visit(1)
    return out


def crp_seating_oracle(params: Params, n: int) -> dict[SetPartition, float]:
    """Exact CRP law on {1..n} by walking every seating decision sequence."""
    if not (1 <= n <= ORACLE_MAX_N):
        raise SizeError(f"crp_seating_oracle supports 1 <= n <= {ORACLE_MAX_N}, got {n}")
    alpha, theta = params.alpha, params.theta
    law: dict[SetPartition, float] = {}

    def seat(tables: list[list[int]], customer: int, prob: float) -> None:
        if customer > n:
            part = SetPartition.from_blocks(tables, 1)
            law[part] = law.get(part, 0.0) + prob
            return
        seated = customer - 1
        for table in tables:
            table.append(customer)
            seat(tables, customer + 1, prob * (len(table) - 1 - alpha) / (seated + theta))
            table.pop()
        tables.append([customer])
        fresh = 1.0 if seated == 0 else (theta + (len(tables) - 1) * alpha) / (seated + theta)
        seat(tables, customer + 1, prob * fresh)
        tables.pop()

    seat([], 1, 1.0)
    return law


def enumerate_recursive_trees(n: int) -> list[RecursiveTree]:
    """All n! recursive trees on {0..n}."""
    if not (1 <= n <= TREES_MAX_N):
        raise SizeError(f"enumerate_recursive_trees supports 1 <= n <= {TREES_MAX_N}, got {n}")
    choices = [range(v) for v in range(2, n + 1)]
    return [RecursiveTree((-1, 0) + tuple(rest)) for rest in itertools.product(*choices)]

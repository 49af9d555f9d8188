"""Special functions and elementary sampling primitives.

Every function validates its arguments and raises DomainError on a violation.
Functions accept scalars or numpy arrays; scalar input gives a float back.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence
from scipy import special

from .errors import DomainError, NumericError

logger = logging.getLogger(__name__)

# Asymptotic expansion of the upper incomplete gamma is used above this point
_ASYMPTOTIC_X = 50.0
_ASYMPTOTIC_TERMS = 20

# Root bracket for levy_tail_inverse, in log x
_LOG_X_MIN = float(np.log(np.finfo(float).tiny))
_LOG_X_MAX = float(np.log(800.0))
_NEWTON_MAX_ITER = 200


@dataclass
class RngStream:
    """Reproducible random stream keyed by (master_seed, stream_index).

    Streams with different stream_index are spawned children of the same
    SeedSequence, so they are independent for Monte Carlo purposes.
    """

    master_seed: int
    stream_index: int = 0
    generator: Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.stream_index < 0:
            raise DomainError(f"stream_index must be nonnegative, got {self.stream_index}")
        seq = SeedSequence(entropy=int(self.master_seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(self.stream_index,))
        self.generator = Generator(PCG64(seq))

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self.generator.random(size)

    def exponential(self, size=None):
        """Standard exponential draws."""
        return self.generator.standard_exponential(size)

    def bernoulli(self, p, size=None):
        """0/1 draws with success probability p."""
        return (self.generator.random(size) < p).astype(np.int8)


def _as_float(values):
    arr = np.asarray(values, dtype=float)
    return arr


def _out(arr: np.ndarray):
    if arr.ndim == 0:
        return float(arr)
    return arr


def _require(cond, message: str) -> None:
    if not np.all(cond):
        raise DomainError(message)


def _check_alpha(alpha: float) -> None:
    if not (0.0 <= alpha < 1.0):
        raise DomainError(f"alpha must lie in [0, 1), got {alpha}")


def log_gamma(x):
    """Return ln Gamma(x) for x > 0."""
    arr = _as_float(x)
    _require(np.isfinite(arr) & (arr > 0), f"log_gamma needs finite x > 0, got {x}")
    return _out(special.gammaln(arr))


def reg_inc_beta(a, b, x):
    """Regularized incomplete beta I_x(a, b)."""
    a_arr, b_arr, x_arr = _as_float(a), _as_float(b), _as_float(x)
    _require((a_arr > 0) & (b_arr > 0), f"reg_inc_beta needs a, b > 0, got a={a}, b={b}")
    _require((x_arr >= 0) & (x_arr <= 1), f"reg_inc_beta needs 0 <= x <= 1, got {x}")
    return _out(special.betainc(a_arr, b_arr, x_arr))


def reg_inc_gamma_lower(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    a_arr, x_arr = _as_float(a), _as_float(x)
    _require(a_arr > 0, f"reg_inc_gamma_lower needs a > 0, got {a}")
    _require(x_arr >= 0, f"reg_inc_gamma_lower needs x >= 0, got {x}")
    return _out(special.gammainc(a_arr, x_arr))


def reg_inc_gamma_upper(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    a_arr, x_arr = _as_float(a), _as_float(x)
    _require(a_arr > 0, f"reg_inc_gamma_upper needs a > 0, got {a}")
    _require(x_arr >= 0, f"reg_inc_gamma_upper needs x >= 0, got {x}")
    return _out(special.gammaincc(a_arr, x_arr))


def _log_weight(alpha: float) -> float:
    # Levy density is c * t^(-alpha-1) * e^(-t); c = alpha, or 1 for the gamma subordinator
    return float(np.log(alpha)) if alpha > 0 else 0.0


def log_levy_density(alpha: float, x):
    """Log of the Levy density at x."""
    _check_alpha(alpha)
    arr = _as_float(x)
    _require(arr > 0, f"levy density needs x > 0, got {x}")
    return _out(_log_weight(alpha) - (alpha + 1.0) * np.log(arr) - arr)


def _asymptotic_log_tail(alpha: float, x: np.ndarray) -> np.ndarray:
    # Gamma(s, x) ~ x^(s-1) e^(-x) sum_k (s-1)...(s-k) / x^k with s = -alpha
    s = -alpha
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        term = term * (s - k) / x
        total = total + term
    return _log_weight(alpha) + (s - 1.0) * np.log(x) - x + np.log(total)


def _direct_tail(alpha: float, x: np.ndarray) -> np.ndarray:
    if alpha == 0.0:
        return special.exp1(x)
    # integration by parts: alpha*Gamma(-alpha, x) = x^-alpha e^-x - Gamma(1-alpha, x)
    upper = special.gamma(1.0 - alpha) * reg_inc_gamma_upper(1.0 - alpha, x)
    return np.power(x, -alpha) * np.exp(-x) - upper


def _log_levy_tail(alpha: float, x: np.ndarray) -> np.ndarray:
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    far = x >= _ASYMPTOTIC_X
    if np.any(far):
        out[far] = _asymptotic_log_tail(alpha, x[far])
    near = ~far
    if np.any(near):
        out[near] = np.log(_direct_tail(alpha, x[near]))
    return out


def levy_tail(alpha: float, x):
    """Tail mass of the Levy measure, nu(x, inf).

    alpha = 0 is the gamma subordinator (t^-1 e^-t); alpha > 0 the generalized
    gamma measure alpha t^(-alpha-1) e^(-t).
    """
    _check_alpha(alpha)
    arr = _as_float(x)
    _require(np.isfinite(arr) & (arr > 0), f"levy_tail needs finite x > 0, got {x}")
    shape = arr.shape
    values = np.exp(_log_levy_tail(alpha, arr.reshape(-1))).reshape(shape)
    return _out(values)


def levy_tail_inverse(alpha: float, y):
    """Solve levy_tail(alpha, x) = y for x.

    Safeguarded Newton on u = log x, with bisection whenever a Newton step
    leaves the current bracket. Raises NumericError when the root is below
    the smallest normal double.
    """
    _check_alpha(alpha)
    arr = _as_float(y)
    _require(np.isfinite(arr) & (arr > 0), f"levy_tail_inverse needs finite y > 0, got {y}")
    shape = arr.shape
    log_y = np.log(arr.reshape(-1))

    lo = np.full_like(log_y, _LOG_X_MIN)
    hi = np.full_like(log_y, _LOG_X_MAX)
    g_lo = _log_levy_tail(alpha, np.exp(lo)) - log_y
    if np.any(g_lo < 0):
        bad = arr.reshape(-1)[g_lo < 0]
        raise NumericError(f"levy_tail_inverse root underflows for y={bad[0]!r} (alpha={alpha})")

    # small-x asymptotics give the starting point: x^-alpha for alpha > 0, -log x for alpha = 0
    if alpha > 0:
        u = -log_y / alpha
    else:
        u = -np.exp(log_y)
    large = log_y < 0
    u[large] = np.log(np.maximum(-log_y[large], 1e-3))
    u = np.clip(u, lo + 1e-9, hi - 1e-9)

    active = np.ones_like(u, dtype=bool)
    for _ in range(_NEWTON_MAX_ITER):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        ua = u[idx]
        xa = np.exp(ua)
        log_tail = _log_levy_tail(alpha, xa)
        g = log_tail - log_y[idx]
        pos = g > 0
        lo[idx[pos]] = ua[pos]
        hi[idx[~pos]] = ua[~pos]

        log_dens = log_levy_density(alpha, xa)
        slope = -np.exp(ua + log_dens - log_tail)
        step = ua - g / slope
        bracketed = (step > lo[idx]) & (step < hi[idx])
        step = np.where(bracketed, step, 0.5 * (lo[idx] + hi[idx]))
        u[idx] = step

        width = hi[idx] - lo[idx]
        done = (np.abs(g) <= 1e-13) | (width <= 1e-15 * np.maximum(1.0, np.abs(ua)))
        u[idx[done]] = ua[done]
        active[idx[done]] = False
    else:
        logger.debug("levy_tail_inverse hit the iteration cap for %d values", int(active.sum()))

    return _out(np.exp(u).reshape(shape))


def sample_beta(a: float, b: float, rng: RngStream, size=None):
    """Draw from Beta(a, b)."""
    if not (a > 0 and b > 0):
        raise DomainError(f"Beta parameters must be positive, got a={a}, b={b}")
    return rng.generator.beta(a, b, size)


def sample_gamma(shape: float, rate: float, rng: RngStream, size=None):
    """Draw from Gamma(shape, rate); mean is shape / rate."""
    if not (shape > 0 and rate > 0):
        raise DomainError(f"Gamma parameters must be positive, got shape={shape}, rate={rate}")
    return rng.generator.gamma(shape, 1.0 / rate, size)


def sample_small_jump(alpha: float, cutoff: float, rng: RngStream, size=None):
    """Draw from the density proportional to t * levy_density(t) on (0, cutoff).

    This is Gamma(1 - alpha, 1) conditioned below cutoff, drawn by inversion.
    """
    _check_alpha(alpha)
    if not (np.isfinite(cutoff) and cutoff > 0):
        raise DomainError(f"cutoff must be finite and positive, got {cutoff}")
    a = 1.0 - alpha
    u = 1.0 - np.asarray(rng.uniform(size), dtype=float)
    x = special.gammaincinv(a, u * reg_inc_gamma_lower(a, cutoff))
    # inversion underflows for tiny cutoffs, where the density is ~ t^-alpha
    x = np.where(x > 0, x, cutoff * np.power(u, 1.0 / a))
    return _out(np.minimum(x, cutoff))

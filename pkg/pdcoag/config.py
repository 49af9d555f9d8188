"""Configuration management for pdcoag.

Loads configuration from environment variables with .env file support.
Every setting is a PD_* variable; a malformed value is a usage error that
names the variable.
"""

import os
from pathlib import Path
from typing import Callable, TypeVar

from dotenv import load_dotenv

from .errors import UsageError

# Load .env file from project root
_project_root = Path(__file__).parent.parent
_env_file = _project_root / ".env"
if _env_file.exists():
    load_dotenv(_env_file)

T = TypeVar("T")


def _pd_setting(name: str, default: T, parse: Callable[[str], T]) -> T:
    """Read PD_<name>, falling back to default when unset or blank."""
    key = f"PD_{name}"
    raw = os.getenv(key, "").strip()
    if not raw:
        return default
    try:
        return parse(raw)
    except ValueError:
        raise UsageError(f"invalid value for {key}: {raw!r}") from None


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise ValueError(raw)
    return value


def _probability(raw: str) -> float:
    value = float(raw)
    if not (0.0 < value < 1.0):
        raise ValueError(raw)
    return value


def _level_name(raw: str) -> str:
    return raw.upper()


# Truncation of infinite partitions
TRUNC_EPS: float = _pd_setting("TRUNC_EPS", 1e-8, _probability)
MAX_ATOMS: int = _pd_setting("MAX_ATOMS", 100_000, _positive_int)
# stick and jump budget inside verification suites
SUITE_MAX_ATOMS: int = _pd_setting("SUITE_MAX_ATOMS", 256, _positive_int)
STAGE_EPS: float = _pd_setting("STAGE_EPS", 1e-4, _probability)  # relative undiscovered weight per labelled vertex

# Vectorised draw size for sticks and subordinator jumps
CHUNK: int = _pd_setting("CHUNK", 256, _positive_int)

# Verification
ALPHA_LEVEL: float = _pd_setting("ALPHA_LEVEL", 0.001, _probability)
JOBS: int = _pd_setting("JOBS", 1, _positive_int)

# Logging
LOG_LEVEL: str = _pd_setting("LOG_LEVEL", "WARNING", _level_name)


def default_seed() -> int:
    """Seed used when --seed is absent. Read at call time."""
    return _pd_setting("DEFAULT_SEED", 42, int)

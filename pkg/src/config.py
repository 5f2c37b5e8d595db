"""Configuration module for the modal workbench.

Handles environment variable loading and validation for search budgets,
parallelism and caching.
"""

import os
from dotenv import load_dotenv

from src.errors import ConfigError

# Load environment variables from .env file, overriding existing ones
load_dotenv(override=True)


def get_optional_env(name: str, default: str = "") -> str:
    """Get an optional environment variable with default value.

    Args:
        name: Environment variable name
        default: Default value if not found

    Returns:
        Environment variable value or default
    """
    return os.getenv(name, default)


def get_int_env(name: str, default: int) -> int:
    """Get an integer environment variable.

    Args:
        name: Environment variable name
        default: Value used when the variable is unset or empty

    Returns:
        Parsed integer

    Raises:
        ConfigError: If the variable is set but is not an integer
    """
    raw = get_optional_env(name).strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"Environment variable {name} must be an integer, got {raw!r}")


def get_bool_env(name: str, default: bool) -> bool:
    raw = get_optional_env(name).strip().lower()
    if not raw:
        return default
    return raw in ("1", "true", "yes", "on")


# Validity checking
VALUATION_BUDGET = 2 ** 20  # max valuations enumerated per frame_validates call
VALUATION_CHUNK = 4096  # valuations evaluated together in one numpy batch

# Frame enumeration
ENUMERATION_BUDGET = 2_000_000  # candidate (R, E) pairs per carrier size
MAX_FRAME_SIZE = 5
MAX_ISO_SIZE = 6  # canonical forms try every carrier permutation

# Filtration engine
FILTRATION_BUDGET_FACTOR = 10  # engine steps allowed = factor * |X|^2

# Theorem suites
MAX_PARALLEL_WORKERS = 4
SUITE_SHARD_SIZE = 256

# Cache Settings
CACHE_ENABLED = False
CACHE_DIR = ".modal_cache"

LOG_LEVEL = "WARNING"


def initialize_config() -> None:
    """Initialize configuration from environment variables.

    Should be called once at application startup; it is also run on import.

    Raises:
        ConfigError: If a numeric variable cannot be parsed
    """
    global VALUATION_BUDGET, VALUATION_CHUNK, ENUMERATION_BUDGET, MAX_FRAME_SIZE
    global MAX_ISO_SIZE, FILTRATION_BUDGET_FACTOR, MAX_PARALLEL_WORKERS
    global SUITE_SHARD_SIZE, CACHE_ENABLED, CACHE_DIR, LOG_LEVEL

    VALUATION_BUDGET = get_int_env("MODAL_VALUATION_BUDGET", VALUATION_BUDGET)
    VALUATION_CHUNK = get_int_env("MODAL_VALUATION_CHUNK", VALUATION_CHUNK)
    ENUMERATION_BUDGET = get_int_env("MODAL_ENUMERATION_BUDGET", ENUMERATION_BUDGET)
    MAX_FRAME_SIZE = get_int_env("MODAL_MAX_FRAME_SIZE", MAX_FRAME_SIZE)
    MAX_ISO_SIZE = get_int_env("MODAL_MAX_ISO_SIZE", MAX_ISO_SIZE)
    FILTRATION_BUDGET_FACTOR = get_int_env("MODAL_FILTRATION_BUDGET_FACTOR", FILTRATION_BUDGET_FACTOR)
    MAX_PARALLEL_WORKERS = get_int_env("MODAL_MAX_WORKERS", MAX_PARALLEL_WORKERS)
    SUITE_SHARD_SIZE = get_int_env("MODAL_SUITE_SHARD", SUITE_SHARD_SIZE)
    CACHE_ENABLED = get_bool_env("MODAL_CACHE_ENABLED", CACHE_ENABLED)
    CACHE_DIR = get_optional_env("MODAL_CACHE_DIR", CACHE_DIR)
    LOG_LEVEL = get_optional_env("MODAL_LOG_LEVEL", LOG_LEVEL).upper()


def validate_config() -> None:
    """Validate that all limits are usable.

    Raises:
        ConfigError: If any budget or size limit is not positive
    """
    limits = {
        "VALUATION_BUDGET": VALUATION_BUDGET,
        "VALUATION_CHUNK": VALUATION_CHUNK,
        "ENUMERATION_BUDGET": ENUMERATION_BUDGET,
        "MAX_FRAME_SIZE": MAX_FRAME_SIZE,
        "MAX_ISO_SIZE": MAX_ISO_SIZE,
        "FILTRATION_BUDGET_FACTOR": FILTRATION_BUDGET_FACTOR,
        "MAX_PARALLEL_WORKERS": MAX_PARALLEL_WORKERS,
        "SUITE_SHARD_SIZE": SUITE_SHARD_SIZE,
    }
    bad = [name for name, value in limits.items() if value < 1]
    if bad:
        raise ConfigError(f"Configuration limits must be positive: {', '.join(bad)}")


# Initialize on import (can be overridden by calling initialize_config() explicitly)
try:
    initialize_config()
except ConfigError:
    # Keep defaults; validate_config() reports problems when actually needed
    pass

# netnl/config.py
"""
Application Configuration.

Loads configuration from environment variables (a `.env` file is loaded by
`run.py` before this module is imported). A simple class that serves as the
single source of truth for caps, tolerances and paths.
"""

import os

from .core.constants import (
    DEFAULT_ENUMERATION_CAP,
    DEFAULT_KRON_ENTRY_CAP,
    DEFAULT_STRATEGY_CAP,
    LpBackend,
)
from .core.exceptions import ConfigurationError


def _int_from_env(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == '':
        return default
    try:
        value = int(float(raw))
    except ValueError as e:
        raise ConfigurationError(f"Environment variable {name} must be an integer, got '{raw}'.") from e
    if value <= 0:
        raise ConfigurationError(f"Environment variable {name} must be positive, got {value}.")
    return value


def _float_from_env(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == '':
        return default
    try:
        value = float(raw)
    except ValueError as e:
        raise ConfigurationError(f"Environment variable {name} must be a number, got '{raw}'.") from e
    if value <= 0:
        raise ConfigurationError(f"Environment variable {name} must be positive, got {value}.")
    return value


class Config:
    """
    Base configuration class. Loads values from environment.
    """
    # Cap on (share tuple, box-outcome assignment) pairs in exact wired evaluation.
    ENUMERATION_CAP = _int_from_env('NETNL_CAP', DEFAULT_ENUMERATION_CAP)

    # Cap on the number of deterministic strategy tuples in the locality LP.
    # NETNL_CAP also applies here unless a dedicated value is given.
    STRATEGY_CAP = _int_from_env(
        'NETNL_STRATEGY_CAP', _int_from_env('NETNL_CAP', DEFAULT_STRATEGY_CAP)
    )

    # Maximum number of entries of a tensor-product operator.
    KRON_ENTRY_CAP = _int_from_env('NETNL_KRON_CAP', DEFAULT_KRON_ENTRY_CAP)

    DEFAULT_TOLERANCE = _float_from_env('NETNL_TOLERANCE', 1e-9)

    LP_BACKEND = os.environ.get('NETNL_LP_BACKEND', LpBackend.SIMPLEX).lower()
    if LP_BACKEND not in (LpBackend.SIMPLEX, LpBackend.HIGHS):
        raise ConfigurationError(f"Unknown LP backend '{LP_BACKEND}'.")

    # Paths are kept relative so commands resolve them against the working directory.
    LOG_DIR = os.environ.get('NETNL_LOG_DIR', 'data/logs')
    LOG_LEVEL = os.environ.get('NETNL_LOG_LEVEL', 'INFO').upper()
    OUTPUT_DIR = os.environ.get('NETNL_OUTPUT_DIR', 'data/output')

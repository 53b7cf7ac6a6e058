# netnl/core/constants.py
"""
Numerical Constants Module.

Centralizes the tolerances, caps and labels used throughout the package.
Every module reads its thresholds from here so the numerical contract of
the library is defined in a single place.
"""

from typing import Tuple

# --- Tolerances ---
# Structural checks (Hermiticity, PSD, completeness, normalization).
STRUCTURAL_TOL = 1e-10
# Algebraic identities (partial-trace preservation, mixture identity).
ALGEBRAIC_TOL = 1e-12
# Entries of a probability tensor must lie in [-ENTRY_TOL, 1 + ENTRY_TOL].
ENTRY_TOL = 1e-12
# Observables must square to the identity within this bound.
DICHOTOMIC_TOL = 1e-9
# Outcomes with smaller probability have no conditional state.
PROBABILITY_FLOOR = 1e-12
# Reduced-state eigenvalues above this define the support.
SUPPORT_TOL = 1e-10
# Eigenvalue clustering in the Jordan frame construction.
CLUSTER_TOL = 1e-8
# Block constraint residual and the commuting-block threshold.
BLOCK_CONSTRAINT_TOL = 1e-9
COMMUTING_BLOCK_TOL = 1e-8
# Bilocal construction requires p(a,c) = p(a)p(c) within this bound.
INDEPENDENCE_TOL = 1e-10

# --- Linear programming ---
LP_PIVOT_TOL = 1e-9
LP_FEASIBILITY_TOL = 1e-8
LP_WITNESS_MARGIN = 1e-9
LP_MAX_ITERATIONS = 20000


class LpBackend:
    SIMPLEX = 'simplex'
    HIGHS = 'highs'


# --- Caps ---
DEFAULT_KRON_ENTRY_CAP = 4096
DEFAULT_STRATEGY_CAP = 10 ** 4
DEFAULT_ENUMERATION_CAP = 10 ** 6

# --- Bell-state measurement ---
# Outcome index b = 2*b1 + b2.
BELL_LABELS: Tuple[str, ...] = ('phi+', 'psi+', 'phi-', 'psi-')
BOB_OUTCOME_BITS: Tuple[str, ...] = ('00', '01', '10', '11')


class BlockCase:
    """Solution families of the per-block unit constraint."""
    EQUAL_ANGLES = '1a'
    MIRRORED_ANGLES = '1b'
    COMMUTING = '2'
    NONE = 'none'


class Verdict:
    PASS = 'pass'
    FAIL = 'fail'


class Expectation:
    """Labels accepted by `classify --expect`."""
    LOCAL = 'local'
    NONLOCAL = 'nonlocal'
    BILOCAL_VIOLATION = 'bilocal-violation'
    BILOCAL_COMPATIBLE = 'bilocal-compatible'
    WIRABLE_CONSISTENT = 'wirable-consistent'
    NOT_WIRABLE = 'not-wirable'
    GENUINE = 'genuine'

    ALL: Tuple[str, ...] = (
        LOCAL, NONLOCAL, BILOCAL_VIOLATION, BILOCAL_COMPATIBLE,
        WIRABLE_CONSISTENT, NOT_WIRABLE, GENUINE,
    )


# --- Documents ---
FORMAT_VERSION = 1
WIRED_FORMAT_VERSION = 1

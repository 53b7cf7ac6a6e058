# netnl/utils/format_utils.py
"""
Format Utilities Module.

Helpers for parsing angles and Jordan-family descriptions given on the
command line, and for printing numbers and vectors compactly.
"""
import math
import re
from typing import List, Optional, Sequence

from ..core.models import JordanFamily

_ANGLE_PATTERN = re.compile(r'^(?P<sign>[+-]?)(?P<coef>\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d+)?))?$')


def parse_angle(text: str) -> float:
    """
    Parses an angle in radians. Accepts plain numbers ("0.5", "-1e-3") and
    multiples of pi ("pi", "-pi/2", "3pi/4", "0.5*pi").

    Raises:
        ValueError: if the text is not a recognizable angle.
    """
    cleaned = str(text).strip().lower().replace('π', 'pi')
    if not cleaned:
        raise ValueError("Empty angle.")
    try:
        return float(cleaned)
    except ValueError:
        pass

    match = _ANGLE_PATTERN.match(cleaned)
    if not match:
        raise ValueError(f"Cannot parse angle '{text}'.")
    coef = float(match.group('coef')) if match.group('coef') not in ('', '.') else 1.0
    den = float(match.group('den')) if match.group('den') else 1.0
    if den == 0:
        raise ValueError(f"Zero denominator in angle '{text}'.")
    value = coef * math.pi / den
    return -value if match.group('sign') == '-' else value


def parse_float_list(text: str, angles: bool = False) -> List[float]:
    """Comma-separated numbers (or angles); empty items are rejected."""
    items = [item.strip() for item in str(text).split(',')]
    if any(not item for item in items):
        raise ValueError(f"Empty entry in list '{text}'.")
    if angles:
        return [parse_angle(item) for item in items]
    try:
        return [float(item) for item in items]
    except ValueError as e:
        raise ValueError(f"Cannot parse number list '{text}'.") from e


def parse_jordan_spec(text: str) -> JordanFamily:
    """
    Parses "jordan:θ1,θ2,...|φ1,φ2,..." with optional block weights
    "jordan:θs|φs|wA1,wA2,...|wC1,wC2,...". Without weights every block of a
    party gets the same weight.

    Raises:
        ValueError: on a malformed description. Invalid weights surface as
            PreconditionError from JordanFamily.
    """
    body = str(text).strip()
    if body.lower().startswith('jordan:'):
        body = body[len('jordan:'):]
    parts = body.split('|')
    if len(parts) not in (2, 4):
        raise ValueError("Jordan family must be 'jordan:thetas|phis' or 'jordan:thetas|phis|wA|wC'.")
    thetas = parse_float_list(parts[0], angles=True)
    phis = parse_float_list(parts[1], angles=True)
    alice_weights: Optional[Sequence[float]] = None
    charlie_weights: Optional[Sequence[float]] = None
    if len(parts) == 4:
        alice_weights = parse_float_list(parts[2])
        charlie_weights = parse_float_list(parts[3])
    return JordanFamily.from_angles(thetas, phis, alice_weights, charlie_weights)


def format_float(value: Optional[float], digits: int = 10) -> str:
    if value is None:
        return 'n/a'
    if isinstance(value, float) and math.isnan(value):
        return 'nan'
    return f"{value:.{digits}f}"


def format_vector(values: Sequence[float], digits: int = 6) -> str:
    """'(0.250000, 0.250000, ...)'."""
    return '(' + ', '.join(f"{float(v):.{digits}f}" for v in values) + ')'

"""
Gamma function

Lanczos approximation (g = 7, nine coefficients) with the reflection formula
for arguments below 1/2. Real arguments only.
"""

import math

from utils.errors import GammaPoleError, InvalidParameterError

LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# Distance from a non-positive integer treated as hitting the pole
POLE_TOL = 1e-12


def is_pole(x: float, tol: float = POLE_TOL) -> bool:
    """True when x is a non-positive integer within tol."""
    nearest = round(x)
    return nearest <= 0 and abs(x - nearest) <= tol


def gamma(x: float) -> float:
    """
    Gamma function of a real argument

    Args:
        x: Real argument, not a non-positive integer

    Returns:
        float: Gamma(x)

    Raises:
        GammaPoleError: at x = 0, -1, -2, ...
    """
    x = float(x)
    if not math.isfinite(x):
        raise InvalidParameterError(f"Gamma needs a finite argument, got {x!r}")
    if is_pole(x):
        raise GammaPoleError(f"Gamma has a pole at {x:g}", details={"x": x})

    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))

    x -= 1.0
    series = LANCZOS_COEFFICIENTS[0]
    for i, coefficient in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        series += coefficient / (x + i)
    t = x + LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * series

"""Scalar backend dispatch: plain floats use math/cmath, mpmath numbers stay in mpmath.

Everything in the package is written against these helpers so that the same code
path evaluates at double precision or, when handed ``mpf`` inputs, at whatever
working precision mpmath is set to.
"""

import cmath
import math
from fractions import Fraction

import mpmath

_MP_TYPES = (mpmath.mpf, mpmath.mpc)


def is_mp(*values) -> bool:
    return any(isinstance(v, _MP_TYPES) for v in values)


def pi_like(*values):
    return mpmath.mpf(mpmath.pi) if is_mp(*values) else math.pi


def cos(x):
    return mpmath.cos(x) if is_mp(x) else math.cos(x)


def sin(x):
    return mpmath.sin(x) if is_mp(x) else math.sin(x)


def expj(x):
    """e^{ix} for real x."""
    return mpmath.expj(x) if is_mp(x) else cmath.exp(1j * x)


def sqrt(x):
    return mpmath.sqrt(x) if is_mp(x) else math.sqrt(x)


def factorial(m: int, mp: bool = False):
    return mpmath.factorial(m) if mp else float(math.factorial(m))


def isfinite(x) -> bool:
    if is_mp(x):
        return bool(mpmath.isfinite(x))
    return math.isfinite(x)


def to_float(x) -> float:
    return float(x)


def to_complex(x) -> complex:
    return complex(x)


def mp_angle(x):
    """Lift an angle to mpmath, snapping floats that are small rational multiples of pi.

    Table angles are rational in units of pi; ``mpf(math.pi)`` would carry the
    double rounding error (~1e-16) into every high-precision evaluation.
    """
    if is_mp(x):
        return x
    q = Fraction(x / math.pi).limit_denominator(1000)
    if abs(float(q) * math.pi - x) <= 4 * math.ulp(max(abs(x), 1.0)):
        return mpmath.pi * q.numerator / q.denominator
    return mpmath.mpf(x)

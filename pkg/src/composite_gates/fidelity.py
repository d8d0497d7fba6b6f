"""Gate fidelity metrics, error profiles and high-fidelity ranges.

Both metrics compare the realized propagator ``U(eps)`` with the ideal rotation
``R = R_y(theta)``. The Frobenius distance fidelity is the strict one,

    F = 1 - sqrt(1/4 sum_jk |U_jk - R_jk|^2),

and the trace fidelity ``F_T = Re(Tr(U R^dagger)) / 2`` is the lenient one. For an
SU(2) ``U`` and real ``R`` the trace is already real; taking the real part only
guards against rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import _numeric as nm
from .su2 import CompositeSequence, DomainError, compose

DEFAULT_THRESHOLD = 1e-4
SCAN_STEP = 1e-4
BISECT_TOL = 1e-6


class NoRangeError(DomainError):
    """The infidelity already exceeds the threshold at eps = 0."""


def _deviation(seq, theta, eps):
    if seq.is_mp:
        theta, eps = nm.mp_angle(theta), mpmath.mpf(eps)
    u = compose(seq, eps)
    c, s = nm.cos(theta / 2), nm.sin(theta / 2)
    return u, u.a - c, u.b - s


def frobenius_infidelity(seq: CompositeSequence, theta, eps=0.0):
    """sqrt(1/4 sum |U - R|^2); the four entries pair up into |da|^2 and |db|^2."""
    _, da, db = _deviation(seq, theta, eps)
    return nm.sqrt((abs(da) ** 2 + abs(db) ** 2) / 2)


def frobenius_fidelity(seq: CompositeSequence, theta, eps=0.0):
    return 1 - frobenius_infidelity(seq, theta, eps)


def trace_fidelity(seq: CompositeSequence, theta, eps=0.0):
    if seq.is_mp:
        theta, eps = nm.mp_angle(theta), mpmath.mpf(eps)
    u = compose(seq, eps)
    # Tr(U R^dagger) = 2 (cos(theta/2) Re a + sin(theta/2) Re b)
    re = mpmath.re if nm.is_mp(u.a) else (lambda z: z.real)
    return nm.cos(theta / 2) * re(u.a) + nm.sin(theta / 2) * re(u.b)


def x3_infidelity(eps):
    """Closed-form Frobenius infidelity of the first-order three-pulse X gate."""
    s = math.sin(math.pi * eps / 4)
    c2 = math.cos(math.pi * eps / 4) ** 2
    return math.sqrt(2 * (1 + 2 * c2)) * s * s


def x5_infidelity(eps):
    """Closed-form Frobenius infidelity shared by the second-order five-pulse X gates."""
    c = math.cos(math.pi * eps / 2)
    return math.sqrt(8 + 9 * c + 3 * c * c) * abs(math.sin(math.pi * eps / 4)) ** 3


def compose_grid(seq: CompositeSequence, eps) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``compose`` over an array of eps values (double precision)."""
    eps = np.asarray(eps, dtype=float)
    if np.any(eps <= -1) or not np.all(np.isfinite(eps)):
        raise DomainError("eps values must be finite and exceed -1")
    a = np.ones_like(eps, dtype=complex)
    b = np.zeros_like(eps, dtype=complex)
    for p in seq.to_float().pulses:
        half = p.area * (1 + eps) / 2
        pa = np.cos(half).astype(complex)
        pb = -1j * np.sin(half) * np.exp(1j * p.phase)
        a, b = pa * a - pb * np.conj(b), pa * b + pb * np.conj(a)
    return a, b


def infidelity_grid(seq: CompositeSequence, theta, eps) -> np.ndarray:
    a, b = compose_grid(seq, eps)
    theta = float(theta)
    da = a - math.cos(theta / 2)
    db = b - math.sin(theta / 2)
    return np.sqrt((np.abs(da) ** 2 + np.abs(db) ** 2) / 2)


@dataclass(frozen=True)
class FidelityProfile:
    eps_grid: np.ndarray
    frobenius: np.ndarray
    trace: np.ndarray

    def rows(self):
        return zip(self.eps_grid, self.frobenius, self.trace)


def profile(seq: CompositeSequence, theta, eps_min: float, eps_max: float, count: int) -> FidelityProfile:
    if not eps_min < eps_max:
        raise DomainError("profile needs eps_min < eps_max")
    if count < 2:
        raise DomainError("profile needs at least two points")
    grid = np.linspace(eps_min, eps_max, count)
    a, b = compose_grid(seq, grid)
    theta = float(theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    inf = np.sqrt((np.abs(a - c) ** 2 + np.abs(b - s) ** 2) / 2)
    return FidelityProfile(grid, 1 - inf, c * a.real + s * b.real)


@dataclass(frozen=True)
class HighFidelityRange:
    """Interval of eps around zero on which the Frobenius infidelity stays below threshold.

    ``capped_minus``/``capped_plus`` mark sides where no crossing was found before the
    scan limit (eps -> -1 or eps = 1).
    """

    eps_minus: float
    eps_plus: float
    threshold: float = DEFAULT_THRESHOLD
    capped_minus: bool = False
    capped_plus: bool = False

    @property
    def area_interval_pi(self) -> tuple[float, float]:
        """Pulse-area interval [(1 + eps_-), (1 + eps_+)] in units of pi for a pi pulse."""
        return 1 + self.eps_minus, 1 + self.eps_plus

    @property
    def width(self) -> float:
        return self.eps_plus - self.eps_minus


def _edge(seq, theta, threshold, direction: int, limit: float) -> tuple[float, bool]:
    steps = np.arange(1, int(round(limit / SCAN_STEP)) + 1) * SCAN_STEP
    if direction < 0:
        steps = steps[steps < 1]  # eps must stay above -1
    inf = infidelity_grid(seq, theta, direction * steps)
    bad = np.flatnonzero(inf > threshold)
    if bad.size == 0:
        return direction * float(steps[-1]), True
    k = bad[0]
    good, out = (0.0 if k == 0 else float(steps[k - 1])), float(steps[k])
    while out - good > BISECT_TOL:
        mid = (good + out) / 2
        if infidelity_grid(seq, theta, [direction * mid])[0] > threshold:
            out = mid
        else:
            good = mid
    return direction * good, False


def high_fidelity_range(
    seq: CompositeSequence, theta, threshold: float = DEFAULT_THRESHOLD, limit: float = 1.0
) -> HighFidelityRange:
    """Innermost eps-interval around 0 where the Frobenius infidelity is <= threshold.

    The scan walks outward on a 1e-4 grid and stops at the first crossing on each
    side, so isolated good lobes further out are never included. The crossing is
    then bisected to 1e-6 and the last good point is reported.
    """
    if not 0 < threshold < 1:
        raise DomainError("threshold must lie in (0, 1)")
    if infidelity_grid(seq, theta, [0.0])[0] > threshold:
        raise NoRangeError("infidelity exceeds the threshold at eps = 0: no range")
    lo, cap_lo = _edge(seq, theta, threshold, -1, limit)
    hi, cap_hi = _edge(seq, theta, threshold, +1, limit)
    return HighFidelityRange(lo, hi, threshold, cap_lo, cap_hi)

"""Truncated power series in the pulse-area error and compensation-order analysis.

Every pulse propagator entry is an entire function of ``eps``; its Taylor
coefficients are known in closed form, so the composite propagator's
coefficients follow from truncated series products with no differentiation
error. Coefficient ``m`` of a series equals the m-th eps-derivative at zero
divided by ``m!``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import _numeric as nm
from .fidelity import frobenius_infidelity
from .su2 import CompositeSequence, DomainError, Su2Matrix

MAX_TRUNCATION = 64
HIGH_DPS = 40

_FACTORIALS = np.array([float(math.factorial(m)) for m in range(MAX_TRUNCATION + 1)])


class EpsSeries:
    """Coefficients c_0..c_K of a power series in eps, truncated at order K."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs)
        if coeffs.dtype != object:
            coeffs = coeffs.astype(complex)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise DomainError("series coefficients must be a non-empty 1-d sequence")
        self.coeffs = coeffs

    @property
    def truncation_order(self) -> int:
        return self.coeffs.size - 1

    def __len__(self) -> int:
        return self.coeffs.size

    def __getitem__(self, m):
        return self.coeffs[m]

    def __repr__(self) -> str:
        return f"EpsSeries({self.coeffs!r})"

    def _coerce(self, other):
        k = min(self.truncation_order, other.truncation_order)
        return self.coeffs[: k + 1], other.coeffs[: k + 1]

    def __add__(self, other):
        if isinstance(other, EpsSeries):
            x, y = self._coerce(other)
            return EpsSeries(x + y)
        c = self.coeffs.copy()
        c[0] = c[0] + other
        return EpsSeries(c)

    __radd__ = __add__

    def __neg__(self):
        return EpsSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, EpsSeries):
            x, y = self._coerce(other)
            return EpsSeries(np.convolve(x, y)[: x.size])
        return EpsSeries(self.coeffs * other)

    __rmul__ = __mul__

    def conj(self) -> "EpsSeries":
        # eps is real, so conjugation acts coefficient-wise
        return EpsSeries(np.conj(self.coeffs))

    def __call__(self, eps):
        """Horner evaluation of the truncated polynomial."""
        acc = 0
        for c in self.coeffs[::-1]:
            acc = acc * eps + c
        return acc

    def derivative(self, m: int):
        return self.coeffs[m] * nm.factorial(m, mp=self.coeffs.dtype == object)


@dataclass(frozen=True)
class Su2Series:
    """Propagator whose Cayley-Klein entries are series in eps."""

    a: EpsSeries
    b: EpsSeries

    @property
    def truncation_order(self) -> int:
        return min(self.a.truncation_order, self.b.truncation_order)

    def __matmul__(self, other: "Su2Series") -> "Su2Series":
        a = self.a * other.a - self.b * other.b.conj()
        b = self.a * other.b + self.b * other.a.conj()
        return Su2Series(a, b)

    def at(self, eps) -> Su2Matrix:
        return Su2Matrix(self.a(eps), self.b(eps))

    def norm_series(self) -> EpsSeries:
        """Series of |a|^2 + |b|^2; unitarity forces 1 + 0 eps + 0 eps^2 + ..."""
        return self.a * self.a.conj() + self.b * self.b.conj()


def _check_order(K: int):
    if not 0 <= K <= MAX_TRUNCATION:
        raise DomainError(f"truncation order must lie in [0, {MAX_TRUNCATION}], got {K}")


def _pulse_coeffs(area, phase, K: int):
    """Coefficient arrays of cos(A(1+eps)/2) and -i e^{i phi} sin(A(1+eps)/2)."""
    h = area / 2
    if nm.is_mp(area, phase):
        half_pi = mpmath.pi / 2
        fac = [h**m / mpmath.factorial(m) for m in range(K + 1)]
        rot = -1j * mpmath.expj(phase)
        a = np.array([mpmath.mpc(f * mpmath.cos(h + m * half_pi)) for m, f in enumerate(fac)], dtype=object)
        b = np.array([rot * f * mpmath.sin(h + m * half_pi) for m, f in enumerate(fac)], dtype=object)
        return a, b
    m = np.arange(K + 1)
    fac = h**m / _FACTORIALS[: K + 1]
    shift = h + m * (np.pi / 2)
    a = (fac * np.cos(shift)).astype(complex)
    b = (-1j * np.exp(1j * phase)) * (fac * np.sin(shift))
    return a, b


def pulse_series(area, phase, K: int) -> Su2Series:
    _check_order(K)
    a, b = _pulse_coeffs(area, phase, K)
    return Su2Series(EpsSeries(a), EpsSeries(b))


def series_coefficients(areas, phases, K: int):
    """Raw (a, b) coefficient arrays of the composite propagator, first pulse rightmost."""
    _check_order(K)
    mp = nm.is_mp(*areas, *phases)
    if mp:
        a = np.array([mpmath.mpc(0)] * (K + 1), dtype=object)
        b = a.copy()
        a[0] = mpmath.mpc(1)
    else:
        a = np.zeros(K + 1, complex)
        b = np.zeros(K + 1, complex)
        a[0] = 1.0
    n = K + 1
    for area, phase in zip(areas, phases):
        pa, pb = _pulse_coeffs(area, phase, K)
        # new = pulse @ accumulated
        a, b = (
            np.convolve(pa, a)[:n] - np.convolve(pb, np.conj(b))[:n],
            np.convolve(pa, b)[:n] + np.convolve(pb, np.conj(a))[:n],
        )
    return a, b


def compose_series(seq: CompositeSequence, K: int) -> Su2Series:
    if not len(seq):
        raise DomainError("cannot compose an empty sequence")
    a, b = series_coefficients(seq.areas, seq.phases, K)
    return Su2Series(EpsSeries(a), EpsSeries(b))


@dataclass(frozen=True)
class OrderReport:
    """Outcome of a coefficient-level compensation-order test.

    ``order`` is the largest n with every coefficient of eps^1..eps^n within
    tolerance; ``leading_index``/``leading_error`` locate the first violation.
    ``zeroth_ok`` is False when the gate itself is wrong at eps = 0, in which case
    ``order`` is 0 and ``leading_index`` is 0.
    """

    order: int
    zeroth_ok: bool
    leading_index: int | None
    leading_error: float | None
    tol: float
    capped: bool
    a_coeffs: tuple
    b_coeffs: tuple


def compensation_order(
    seq: CompositeSequence, theta, tol: float = 1e-10, max_order: int = 24
) -> OrderReport:
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    K = min(max_order + 1, MAX_TRUNCATION)
    if seq.is_mp:
        theta = nm.mp_angle(theta)
    s = compose_series(seq, K)
    a = list(s.a.coeffs)
    b = list(s.b.coeffs)
    d0 = max(abs(a[0] - nm.cos(theta / 2)), abs(b[0] - nm.sin(theta / 2)))
    freeze = lambda xs: tuple(complex(x) for x in xs)
    if float(d0) > tol:
        return OrderReport(0, False, 0, float(d0), tol, False, freeze(a), freeze(b))
    for m in range(1, K + 1):
        err = float(max(abs(a[m]), abs(b[m])))
        if err > tol:
            return OrderReport(m - 1, True, m, err, tol, False, freeze(a), freeze(b))
    return OrderReport(K, True, None, None, tol, True, freeze(a), freeze(b))


@dataclass(frozen=True)
class SlopeEstimate:
    """Log-log slope of Frobenius infidelity against |eps|.

    ``slope`` is None when too few samples rise above the arithmetic floor
    (``machine_limited``).
    """

    slope: float | None
    machine_limited: bool
    points_used: int
    floor: float

    def matches_order(self, n: int, tol: float = 0.15) -> bool:
        return self.slope is not None and abs(self.slope - (n + 1)) <= tol


def order_slope_estimate(
    seq: CompositeSequence,
    theta,
    eps_lo: float = 1e-3,
    eps_hi: float = 1e-2,
    points: int = 20,
    floor: float | None = None,
    dps: int = HIGH_DPS,
) -> SlopeEstimate:
    """Least-squares slope of log infidelity vs log|eps| on both sides of zero.

    For a sequence compensating through order n the slope approaches n + 1.
    High-precision sequences (mpmath pulses) are evaluated with ``dps`` digits,
    which lowers the floor to about 10^(5 - dps).
    """
    if seq.is_mp:
        with mpmath.workdps(dps):
            return _slope(seq, theta, eps_lo, eps_hi, points, floor or 10.0 ** (5 - dps))
    return _slope(seq, theta, eps_lo, eps_hi, points, floor or 1e-15)


def _slope(seq, theta, eps_lo, eps_hi, points, floor) -> SlopeEstimate:
    mp = seq.is_mp
    grid = np.geomspace(eps_lo, eps_hi, points)
    xs, ys = [], []
    for e in grid:
        for signed in (e, -e):
            inf = frobenius_infidelity(seq, theta, float(signed))
            if inf > floor:
                xs.append(math.log(abs(signed)))
                ys.append(float(mpmath.log(inf)) if mp else math.log(inf))
    if len(xs) < 4:
        return SlopeEstimate(None, True, len(xs), floor)
    slope = float(np.polyfit(xs, ys, 1)[0])
    return SlopeEstimate(slope, False, len(xs), floor)

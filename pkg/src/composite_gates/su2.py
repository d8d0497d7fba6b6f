"""SU(2) propagators of resonant pulses and their composition.

A propagator is stored by its Cayley-Klein pair ``(a, b)``::

    U = [[a,   b ],
         [-b*, a*]]

A pulse of nominal area ``A`` and phase ``phi`` with relative area error ``eps``
has ``a = cos(A(1+eps)/2)`` and ``b = -i sin(A(1+eps)/2) e^{i phi}``. Sequences
are applied first-to-last, so the first pulse is the rightmost matrix factor.

Angles are radians everywhere inside the package; only the catalog, sequence files
and the CLI speak in units of pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import mpmath
import numpy as np

from . import _numeric as nm

PI = math.pi


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class Family(str, Enum):
    SYMMETRIC_X = "symmetric-x"
    SYMMETRIC_ROT = "symmetric-rot"
    ASYM_THETA = "asym-theta"
    ASYM_ALPHA_BETA = "asym-alpha-beta"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Su2Matrix:
    a: complex
    b: complex

    def __matmul__(self, other: "Su2Matrix") -> "Su2Matrix":
        # [[a1, b1], [-b1*, a1*]] @ [[a2, b2], [-b2*, a2*]]
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return Su2Matrix(a1 * a2 - b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())

    def matrix(self) -> np.ndarray:
        dtype = object if nm.is_mp(self.a, self.b) else complex
        return np.array(
            [[self.a, self.b], [-self.b.conjugate(), self.a.conjugate()]], dtype=dtype
        )

    def det(self):
        return abs(self.a) ** 2 + abs(self.b) ** 2

    def dagger(self) -> "Su2Matrix":
        return Su2Matrix(self.a.conjugate(), -self.b)

    def max_abs_diff(self, other: "Su2Matrix") -> float:
        """Largest entrywise deviation; (1,1)/(2,2) and (1,2)/(2,1) pairs share moduli."""
        return float(max(abs(self.a - other.a), abs(self.b - other.b)))


def _canonical_phase(phase):
    two_pi = 2 * nm.pi_like(phase)
    p = phase % two_pi
    # float modulo can land exactly on 2*pi for tiny negative inputs
    return p - two_pi if p >= two_pi else p


@dataclass(frozen=True)
class Pulse:
    """Nominal pulse area (radians, > 0) and phase, stored canonically in [0, 2*pi)."""

    area: float
    phase: float

    def __post_init__(self):
        if not (nm.isfinite(self.area) and nm.isfinite(self.phase)):
            raise DomainError(f"non-finite pulse parameters: {self.area!r}, {self.phase!r}")
        if not self.area > 0:
            raise DomainError(f"pulse area must be positive, got {self.area!r}")
        object.__setattr__(self, "phase", _canonical_phase(self.phase))


def _close(x, y, tol=1e-9) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(float(y)))


def _phase_close(x, y, tol=1e-9) -> bool:
    d = abs(float(x) - float(y)) % (2 * PI)
    return min(d, 2 * PI - d) <= tol


def _palindromic(phases: Sequence) -> bool:
    return all(_phase_close(p, q) for p, q in zip(phases, reversed(phases)))


@dataclass(frozen=True)
class CompositeSequence:
    pulses: tuple[Pulse, ...]
    target_theta: float
    family: Family = Family.CUSTOM
    name: str = field(default="", compare=False)

    def __post_init__(self):
        pulses = tuple(self.pulses)
        object.__setattr__(self, "pulses", pulses)
        object.__setattr__(self, "family", Family(self.family))
        if not pulses:
            raise DomainError("a composite sequence needs at least one pulse")
        self._check_family()

    def _check_family(self):
        areas = [p.area for p in self.pulses]
        phases = [p.phase for p in self.pulses]
        fam = self.family
        if fam is Family.SYMMETRIC_X:
            if not all(_close(a, PI) for a in areas):
                raise DomainError("symmetric-x sequences consist of pi pulses only")
            if not _palindromic(phases):
                raise DomainError("symmetric-x phases must be palindromic")
        elif fam is Family.SYMMETRIC_ROT:
            if len(areas) < 3 or not _close(areas[0], areas[-1]):
                raise DomainError("symmetric-rot sequences start and end with equal areas")
            if not all(_close(a, PI) for a in areas[1:-1]):
                raise DomainError("symmetric-rot interior pulses must be pi pulses")
            if not _palindromic(phases):
                raise DomainError("symmetric-rot phases must be palindromic")
        elif fam is Family.ASYM_THETA:
            if not all(_close(a, PI) for a in areas[1:]):
                raise DomainError("asym-theta sequences are a theta pulse followed by pi pulses")
        elif fam is Family.ASYM_ALPHA_BETA:
            if len(areas) < 2 or not all(_close(a, PI) for a in areas[1:-1]):
                raise DomainError("asym-alpha-beta interior pulses must be pi pulses")

    def __len__(self) -> int:
        return len(self.pulses)

    @property
    def areas(self) -> list:
        return [p.area for p in self.pulses]

    @property
    def phases(self) -> list:
        return [p.phase for p in self.pulses]

    @property
    def is_mp(self) -> bool:
        return nm.is_mp(*self.areas, *self.phases)

    def to_float(self) -> "CompositeSequence":
        if not self.is_mp:
            return self
        pulses = tuple(Pulse(float(p.area), float(p.phase)) for p in self.pulses)
        return CompositeSequence(pulses, float(self.target_theta), self.family, self.name)

    def to_mp(self) -> "CompositeSequence":
        # areas and the target are usually rational multiples of pi; phases are data
        pulses = tuple(Pulse(nm.mp_angle(p.area), mpmath.mpf(p.phase)) for p in self.pulses)
        return CompositeSequence(pulses, nm.mp_angle(self.target_theta), self.family, self.name)

    def __add__(self, other: "CompositeSequence") -> "CompositeSequence":
        """Concatenation: ``self`` is applied first, then ``other``."""
        return CompositeSequence(self.pulses + other.pulses, other.target_theta, Family.CUSTOM)


def sequence(
    areas: Iterable,
    phases: Iterable,
    theta: float,
    family: Family | str = Family.CUSTOM,
    name: str = "",
) -> CompositeSequence:
    """Build a sequence from parallel area/phase lists in radians."""
    pulses = tuple(Pulse(a, p) for a, p in zip(areas, phases, strict=True))
    return CompositeSequence(pulses, theta, Family(family), name)


def sequence_from_pi(
    areas_pi: Iterable[float],
    phases_pi: Iterable[float],
    theta_pi: float,
    family: Family | str = Family.CUSTOM,
    name: str = "",
) -> CompositeSequence:
    """Build a sequence from areas, phases and rotation angle given in units of pi."""
    return sequence(
        [a * PI for a in areas_pi], [p * PI for p in phases_pi], theta_pi * PI, family, name
    )


def pulse_propagator(area, phase, eps=0.0) -> Su2Matrix:
    if not (nm.isfinite(area) and nm.isfinite(phase) and nm.isfinite(eps)):
        raise DomainError("pulse_propagator needs finite inputs")
    if not eps > -1:
        raise DomainError(f"eps must exceed -1, got {eps!r}")
    half = area * (1 + eps) / 2
    return Su2Matrix(nm.cos(half) + 0j, -1j * nm.sin(half) * nm.expj(phase))


def compose(seq: CompositeSequence | Sequence[Pulse], eps=0.0) -> Su2Matrix:
    """Propagator U_N ... U_1 of the sequence at relative area error ``eps``."""
    pulses = seq.pulses if isinstance(seq, CompositeSequence) else tuple(seq)
    if not pulses:
        raise DomainError("cannot compose an empty sequence")
    total = None
    for p in pulses:
        u = pulse_propagator(p.area, p.phase, eps)
        total = u if total is None else u @ total
    return total


def target_rotation(theta) -> Su2Matrix:
    """The real rotation gate R_y(theta) = [[cos, sin], [-sin, cos]] of theta/2."""
    return Su2Matrix(nm.cos(theta / 2) + 0j, nm.sin(theta / 2) + 0j)


def phase_gate(phi) -> np.ndarray:
    """diag(e^{i phi}, e^{-i phi}); a z rotation relating the R_x and R_y gate forms."""
    return np.array([[nm.expj(phi), 0], [0, nm.expj(-phi)]], dtype=complex)


def rotation_x(theta) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, 1j * s], [1j * s, c]])


def total_area(seq: CompositeSequence) -> float:
    return sum(abs(p.area) for p in seq.pulses)

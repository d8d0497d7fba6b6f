"""Numerical and closed-form solution of the error-compensation conditions.

A design problem asks for a sequence of a given family whose propagator equals
``R_y(theta)`` at eps = 0 and whose first ``n`` eps-derivatives vanish. The
conditions are stacked into a real residual vector and solved by multi-start
Levenberg iterations with a forward-difference Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import _numeric as nm
from .series import compensation_order, series_coefficients
from .su2 import PI, CompositeSequence, DomainError, Family, sequence

DEFAULT_TOL = 1e-12
FD_STEP = 1e-7
MAX_ITER = 200
BASIN_SHIFT = 5e-4 * PI
DEDUP_TOL = 1e-6


class PolishError(RuntimeError):
    """Local refinement did not converge; ``last`` holds the final iterate."""

    def __init__(self, message: str, last: CompositeSequence, residual: float):
        super().__init__(message)
        self.last = last
        self.residual = residual


@dataclass(frozen=True)
class DesignProblem:
    """Family, compensation order and target angle of a sequence to be designed.

    ``pulse_count`` defaults to 2n+1, or 2n for the alpha-beta family. Custom
    problems need explicit ``areas`` (radians) and solve for the phases only.
    """

    family: Family
    order: int
    theta: float = PI
    pulse_count: int | None = None
    areas: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.order < 1:
            raise DomainError("design order must be at least 1")
        if self.family is Family.CUSTOM:
            if not self.areas:
                raise DomainError("custom problems need explicit pulse areas")
            object.__setattr__(self, "areas", tuple(self.areas))
            if self.pulse_count is not None and self.pulse_count != len(self.areas):
                raise DomainError("pulse_count disagrees with the given areas")
            object.__setattr__(self, "pulse_count", len(self.areas))
        elif self.pulse_count is None:
            n = self.order
            default = 2 * n if self.family is Family.ASYM_ALPHA_BETA else 2 * n + 1
            object.__setattr__(self, "pulse_count", default)
        N = self.pulse_count
        if self.family is Family.SYMMETRIC_ROT and N < 3:
            raise DomainError("symmetric-rot sequences need at least three pulses")
        if self.family is Family.ASYM_ALPHA_BETA and N < 2:
            raise DomainError("alpha-beta sequences need at least two pulses")
        if self.family is Family.SYMMETRIC_X and self.theta != PI:
            raise DomainError("symmetric-x problems target the pi rotation")
        # order n needs at least 2n pulses and n + 1 free real parameters
        if N < 2 * self.order or self.parameter_count < self.order + 1:
            raise DomainError(
                f"{N} pulses with {self.parameter_count} parameters cannot reach order {self.order}"
            )

    @property
    def free_phases(self) -> int:
        N = self.pulse_count
        if self.family in (Family.SYMMETRIC_X, Family.SYMMETRIC_ROT):
            return (N + 1) // 2
        return N

    @property
    def free_areas(self) -> int:
        return {Family.SYMMETRIC_ROT: 1, Family.ASYM_ALPHA_BETA: 2}.get(self.family, 0)

    @property
    def parameter_count(self) -> int:
        return self.free_areas + self.free_phases

    def layout(self, params) -> tuple[list, list]:
        """Map a parameter vector to full (areas, phases) lists in radians."""
        params = list(params)
        if len(params) != self.parameter_count:
            raise DomainError(
                f"expected {self.parameter_count} parameters for {self.family.value}, got {len(params)}"
            )
        N = self.pulse_count
        pi = nm.pi_like(*params)
        areas = [pi] * N
        fam = self.family
        if fam in (Family.SYMMETRIC_X, Family.SYMMETRIC_ROT):
            head = params[self.free_areas :]
            phases = head + head[: N // 2][::-1]
            if fam is Family.SYMMETRIC_ROT:
                areas[0] = areas[-1] = params[0]
        elif fam is Family.ASYM_THETA:
            phases = params
            areas[0] = nm.mp_angle(self.theta) if nm.is_mp(*params) else self.theta
        elif fam is Family.ASYM_ALPHA_BETA:
            areas[0], areas[-1] = params[0], params[1]
            phases = params[2:]
        else:
            areas = [nm.mp_angle(a) for a in self.areas] if nm.is_mp(*params) else list(self.areas)
            phases = params
        return areas, phases

    def params_of(self, seq: CompositeSequence) -> list:
        """Inverse of ``layout`` for a sequence of this problem's shape."""
        if len(seq) != self.pulse_count:
            raise DomainError("sequence length does not match the problem")
        areas, phases = seq.areas, seq.phases
        fam = self.family
        if fam is Family.SYMMETRIC_X:
            return phases[: self.free_phases]
        if fam is Family.SYMMETRIC_ROT:
            return [areas[0]] + phases[: self.free_phases]
        if fam is Family.ASYM_ALPHA_BETA:
            return [areas[0], areas[-1]] + phases
        return phases

    def build(self, params, name: str = "") -> CompositeSequence:
        areas, phases = self.layout(params)
        if nm.is_mp(*params):
            return sequence(areas, phases, nm.mp_angle(self.theta), self.family, name)
        # plain floats rather than numpy scalars keep reprs and output stable
        return sequence(map(float, areas), map(float, phases), self.theta, self.family, name)

    @classmethod
    def for_sequence(cls, seq: CompositeSequence, order: int) -> "DesignProblem":
        areas = tuple(seq.areas) if seq.family is Family.CUSTOM else None
        return cls(seq.family, order, float(seq.target_theta), len(seq), areas)


def residual_vector(params, problem: DesignProblem) -> np.ndarray:
    """Real and imaginary parts of the zeroth-order gate error and coefficients 1..n.

    Entries are ordered ``[a0 - cos, b0 - sin, a_1, b_1, ..., a_n, b_n]`` before the
    real/imaginary split. mpmath parameters give an object array at working precision.
    """
    areas, phases = problem.layout(params)
    n = problem.order
    a, b = series_coefficients(areas, phases, n)
    theta = nm.mp_angle(problem.theta) if nm.is_mp(*params) else problem.theta
    a = a.copy()
    b = b.copy()
    a[0] = a[0] - nm.cos(theta / 2)
    b[0] = b[0] - nm.sin(theta / 2)
    z = np.empty(2 * (n + 1), dtype=a.dtype)
    z[0::2] = a
    z[1::2] = b
    if a.dtype == object:
        return np.array([mpmath.re(v) for v in z] + [mpmath.im(v) for v in z], dtype=object)
    return np.concatenate([z.real, z.imag])


def symmetric_x_phase_relations(phases) -> tuple[float, float]:
    """Zeroth-order relations of a palindromic sequence of 2n+1 pi pulses.

    Given phi_1..phi_n, returns phi_{n+1} = pi/2 + 2 sum_k (-1)^(n-k) phi_k together
    with the residual of 2 sum_k sin(Phi_k) = (-1)^(n+1), where
    Phi_k = 2 sum_{j<k} (-1)^(j+1) phi_j + (-1)^(k+1) phi_k.
    """
    phases = list(phases)
    n = len(phases)
    if n < 1:
        raise DomainError("need at least one phase")
    last = PI / 2 + 2 * sum((-1) ** (n - k) * p for k, p in enumerate(phases, 1))
    total, acc = 0.0, 0.0
    for k, p in enumerate(phases, 1):
        total += math.sin(2 * acc + (-1) ** (k + 1) * p)
        acc += (-1) ** (k + 1) * p
    return last % (2 * PI), 2 * total - (-1) ** (n + 1)


@dataclass
class LevenbergResult:
    params: np.ndarray
    residual: float
    iterations: int
    converged: bool


def levenberg(f, x0, tol=DEFAULT_TOL, step=FD_STEP, max_iter=MAX_ITER, damping=1e-3) -> LevenbergResult:
    """Plain Levenberg iteration with undamped-scale regularization ``J^T J + lambda I``.

    The identity (rather than diagonal) damping keeps steps minimum-norm, so on the
    flat solution manifolds of over-parametrized families the iterate does not drift.
    """
    x = np.array(x0, dtype=float)
    r = f(x)
    cost = float(r @ r)
    lam = damping
    eye = np.eye(x.size)
    for it in range(max_iter):
        if math.sqrt(cost) <= tol:
            return LevenbergResult(x, math.sqrt(cost), it, True)
        J = np.empty((r.size, x.size))
        for i in range(x.size):
            xp = x.copy()
            xp[i] += step
            J[:, i] = (f(xp) - r) / step
        g = J.T @ r
        A = J.T @ J
        while True:
            dx = np.linalg.solve(A + lam * eye, -g)
            xn = x + dx
            rn = f(xn)
            cn = float(rn @ rn)
            if cn < cost:
                x, r, cost = xn, rn, cn
                lam = max(lam / 10, 1e-15)
                break
            lam *= 10
            if lam > 1e12:
                return LevenbergResult(x, math.sqrt(cost), it, math.sqrt(cost) <= tol)
    return LevenbergResult(x, math.sqrt(cost), max_iter, math.sqrt(cost) <= tol)


def _refine_mp(f, x0, tol, max_iter=12):
    """Chord iteration at mpmath precision with a fixed double-precision Jacobian.

    Each step is the minimum-norm least-squares correction, so the iterate stays put
    along flat solution directions. The Jacobian error (~1e-10 for central
    differences) sets the contraction per step; stalls hand over to ``_levenberg_mp``.
    """
    x = [mpmath.mpf(v) for v in x0]
    xf = np.array([float(v) for v in x0])
    h = 1e-5
    cols = []
    for i in range(xf.size):
        xp, xm = xf.copy(), xf.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((f(xp) - f(xm)) / (2 * h))
    J = np.column_stack(cols).astype(float)
    r = f(x)
    norm = mpmath.norm(mpmath.matrix(list(r)))
    for _ in range(max_iter):
        if norm <= tol:
            return x, norm
        dx = np.linalg.lstsq(J, -np.array([float(v) for v in r]), rcond=None)[0]
        xn = [v + mpmath.mpf(float(d)) for v, d in zip(x, dx)]
        rn = f(xn)
        nn = mpmath.norm(mpmath.matrix(list(rn)))
        if nn >= norm / 10:
            break
        x, r, norm = xn, rn, nn
    return _levenberg_mp(f, x, tol)


def _levenberg_mp(f, x0, tol, max_iter=30):
    """Newton-like refinement at mpmath working precision (tiny Levenberg damping)."""
    x = mpmath.matrix([mpmath.mpf(v) for v in x0])
    h = mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
    lam = mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
    r = mpmath.matrix(list(f(list(x))))
    norm = mpmath.norm(r)
    for _ in range(max_iter):
        if norm <= tol:
            break
        J = mpmath.matrix(len(r), len(x))
        for i in range(len(x)):
            xp = x.copy()
            xp[i] += h
            ri = mpmath.matrix(list(f(list(xp))))
            for k in range(len(r)):
                J[k, i] = (ri[k] - r[k]) / h
        A = J.T * J + lam * mpmath.eye(len(x))
        dx = mpmath.lu_solve(A, -(J.T * r))
        xn = x + dx
        rn = mpmath.matrix(list(f(list(xn))))
        nn = mpmath.norm(rn)
        if nn >= norm:
            break
        x, r, norm = xn, rn, nn
    return list(x), norm


@dataclass(frozen=True)
class Solution:
    sequence: CompositeSequence
    residual_norm: float
    achieved_order: int
    seed_id: int
    iterations: int = 0
    max_shift: float = 0.0
    basin_escape: bool = False

    @property
    def total_area(self) -> float:
        return float(sum(self.sequence.areas))


@dataclass(frozen=True)
class SeedDiagnostic:
    seed_id: int
    converged: bool
    residual: float
    iterations: int
    note: str = ""


class SolutionList(list):
    """List of solutions that also carries one diagnostic record per start."""

    def __init__(self, items=(), diagnostics=()):
        super().__init__(items)
        self.diagnostics = list(diagnostics)


def _canonical_params(problem: DesignProblem, params) -> list | None:
    """Fold negative areas into a pi phase shift; None if an area leaves (0, 2 pi]."""
    areas, phases = problem.layout(list(params))
    phases = list(phases)
    areas = list(areas)
    for k, a in enumerate(areas):
        if a < 0:
            areas[k] = -a
            phases[k] += PI
    if not all(0 < a <= 2 * PI + 1e-12 for a in areas):
        return None
    phases = [p % (2 * PI) for p in phases]
    seq = sequence(areas, phases, problem.theta, problem.family)
    return problem.params_of(seq)


def _distance(x, y, n_areas: int) -> float:
    x, y = np.asarray(x), np.asarray(y)
    da = np.abs(x[:n_areas] - y[:n_areas])
    dp = np.abs(x[n_areas:] - y[n_areas:]) % (2 * PI)
    dp = np.minimum(dp, 2 * PI - dp)
    return float(np.max(np.concatenate([da, dp])))


def _reversed_params(problem: DesignProblem, params) -> list:
    areas, phases = problem.layout(params)
    seq = sequence(areas[::-1], phases[::-1], problem.theta, Family.CUSTOM)
    rev = problem.params_of(seq)
    return rev


def solve(
    problem: DesignProblem, seeds: int = 64, rng_seed: int = 0, tol: float = DEFAULT_TOL
) -> SolutionList:
    """Multi-start solution of the compensation conditions.

    Starts draw phases uniformly from [0, 2 pi) and areas from (0.1 pi, 1.9 pi).
    Converged roots are canonicalized, sorted by total area and deduplicated;
    for asymmetric families a sequence and its reversal count as one class. Phase
    conjugation (phi -> pi - phi) is kept as a distinct branch.
    """
    if seeds < 1:
        raise DomainError("need at least one start")
    rng = np.random.default_rng(rng_seed)
    f = lambda x: residual_vector(x, problem)
    found, diags = [], []
    for sid in range(seeds):
        x0 = np.concatenate(
            [rng.uniform(0.1 * PI, 1.9 * PI, problem.free_areas), rng.uniform(0, 2 * PI, problem.free_phases)]
        )
        res = levenberg(f, x0, tol=tol)
        note = ""
        if res.converged:
            canon = _canonical_params(problem, res.params)
            if canon is None:
                note = "area outside (0, 2pi]"
            else:
                found.append((canon, res, sid))
        diags.append(SeedDiagnostic(sid, res.converged and not note, res.residual, res.iterations, note))

    def area_of(params):
        return sum(problem.layout(params)[0])

    found.sort(key=lambda t: (round(area_of(t[0]), 9), [round(v, 9) for v in t[0]], t[2]))
    reversible = problem.family in (Family.ASYM_THETA, Family.ASYM_ALPHA_BETA, Family.CUSTOM)
    kept: list[tuple] = []
    for params, res, sid in found:
        candidates = [params]
        if reversible and not (problem.family is Family.ASYM_THETA):
            candidates.append(_reversed_params(problem, params))
        if any(_distance(c, k[0], problem.free_areas) <= DEDUP_TOL for c in candidates for k in kept):
            continue
        kept.append((params, res, sid))
    out = []
    for params, res, sid in kept:
        seq = problem.build(params)
        order = compensation_order(seq, problem.theta, tol=1e-10, max_order=problem.order + 3).order
        out.append(Solution(seq, res.residual, order, sid, res.iterations))
    return SolutionList(out, diags)


def polish(
    seq: CompositeSequence,
    order: int,
    tol: float = DEFAULT_TOL,
    dps: int | None = None,
    problem: DesignProblem | None = None,
) -> Solution:
    """Local refinement of a nearly exact sequence (e.g. a table row at 4 decimals).

    The structure (family, areas held fixed) is taken from ``seq``. A component
    shift above 5e-4 pi flags ``basin_escape``. With ``dps`` the double-precision
    root is refined further at that many mpmath digits and the returned sequence
    holds mpmath numbers.
    """
    problem = problem or DesignProblem.for_sequence(seq.to_float(), order)
    x0 = np.array([float(v) for v in problem.params_of(seq.to_float())])
    f = lambda x: residual_vector(x, problem)
    res = levenberg(f, x0, tol=tol)
    if not res.converged:
        raise PolishError(
            f"polish did not converge (residual {res.residual:.3e})", problem.build(res.params), res.residual
        )
    shift = _distance(res.params, x0, problem.free_areas)
    params: list = list(res.params)
    residual = res.residual
    if dps is not None:
        with mpmath.workdps(dps):
            params, norm = _refine_mp(lambda x: residual_vector(x, problem), params, mpmath.mpf(10) ** (8 - dps))
            residual = float(norm)
            built = problem.build(params, seq.name)
            achieved = compensation_order(built, nm.mp_angle(problem.theta), tol=1e-10, max_order=order + 3).order
        return Solution(built, residual, achieved, -1, res.iterations, shift, shift > BASIN_SHIFT)
    built = problem.build(params, seq.name)
    achieved = compensation_order(built, problem.theta, tol=1e-10, max_order=order + 3).order
    return Solution(built, residual, achieved, -1, res.iterations, shift, shift > BASIN_SHIFT)


def inverse_sinc(v: float) -> float:
    """Solve sin(pi u) / u = v for u in (0, 1], by bisection to machine precision.

    The left side decreases from pi (u -> 0) to 0 (u = 1), so v must lie in [0, pi).
    """
    if not (0 <= v < PI):
        raise DomainError(f"sin(pi u)/u = {v!r} has no solution with u in (0, 1]")
    if v == 0:
        return 1.0
    lo, hi = 0.0, 1.0  # g(lo) > v >= g(hi)
    while True:
        mid = (lo + hi) / 2
        if mid in (lo, hi):
            return hi
        if math.sin(PI * mid) / mid > v:
            lo = mid
        else:
            hi = mid


def scrofulous_solve(theta: float, branch: int = 0) -> Solution:
    """Closed-form three-pulse first-order sequence alpha_phi1 pi_phi2 alpha_phi1.

    With u = alpha / pi, the conditions reduce to sin(pi u)/u = 2 cos(theta/2),
    cos(phi1 - phi2) = -1/(2u) and sin(phi1 - phi2) = -sin(theta/2) cos(phi1).
    ``branch`` 0 takes phi1 - phi2 in (-pi, 0), branch 1 its complex-conjugate
    partner. The residual of the full conditions is computed, not assumed.
    """
    if not 0 < theta <= PI:
        raise DomainError("theta must lie in (0, pi]")
    if branch not in (0, 1):
        raise DomainError("branch is 0 or 1")
    u = inverse_sinc(2 * math.cos(theta / 2))
    alpha = PI * u
    d = math.acos(max(-1.0, min(1.0, -1 / (2 * u))))
    d = -d if branch == 0 else d
    phi1 = math.atan2(math.cos(alpha) * math.cos(d), -math.sin(d))
    phi2 = phi1 - d
    problem = DesignProblem(Family.SYMMETRIC_ROT, 1, theta)
    params = _canonical_params(problem, [alpha, phi1, phi2])
    seq = problem.build(params, f"scrofulous-{branch}")
    resid = float(np.linalg.norm(residual_vector(params, problem)))
    order = compensation_order(seq, theta, tol=1e-10, max_order=4).order
    return Solution(seq, resid, order, -1)

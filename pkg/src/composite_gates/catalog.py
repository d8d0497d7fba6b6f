"""Published composite sequences and their batch verification.

Records are stored as printed, in units of pi, in ``data/catalog.json``. The
sequence actually evaluated is derived from a record by:

1. applying annotated ``corrections`` for resolved typos,
2. for X-gate rows, recomputing the middle phase from the zeroth-order relation,
3. adding ``frame_offset_pi`` to every phase. Rows written for the mirrored gate
   R_y(-theta) carry offset 1; the global shift maps them onto R_y(theta) and
   changes neither derivative orders nor fidelity profiles.

Polished values are computed on demand and cached; they never overwrite the data.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import mpmath

from ._numeric import mp_angle
from .fidelity import NoRangeError, high_fidelity_range
from .series import compensation_order, order_slope_estimate, HIGH_DPS
from .solver import PolishError, Solution, polish, symmetric_x_phase_relations
from .su2 import PI, CompositeSequence, DomainError, Family, compose, sequence_from_pi, target_rotation, total_area

PRINTED_GATE_TOL = 5e-4
POLISHED_GATE_TOL = 1e-10
AREA_TOL = 0.01
RANGE_TOL = 1e-3
SLOPE_TOL = 0.15


class UnknownSequenceError(KeyError):
    pass


@dataclass(frozen=True)
class NamedSequence:
    name: str
    family: Family
    theta_pi: float
    areas_pi: tuple
    phases_pi: tuple
    claimed_order: int
    claimed_range_pi: tuple | None = None
    claimed_total_area_pi: float | None = None
    source: str = ""
    frame_offset_pi: float = 0.0
    corrections: tuple = ()
    reconstruct_middle: bool = False
    exact_phases_pi: tuple | None = None
    closed_form: str = ""
    aliases: tuple = ()
    duplicate_of: str | None = None
    conjugate_of: str | None = None
    notes: str = ""
    record: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_record(cls, r: dict) -> "NamedSequence":
        rng = r.get("claimed_range_pi")
        exact = r.get("exact_phases_pi")
        return cls(
            name=r["name"],
            family=Family(r["family"]),
            theta_pi=r["theta_pi"],
            areas_pi=tuple(r["areas_pi"]),
            phases_pi=tuple(r["phases_pi"]),
            claimed_order=r["claimed_order"],
            claimed_range_pi=tuple(rng) if rng else None,
            claimed_total_area_pi=r.get("claimed_total_area_pi"),
            source=r.get("source", ""),
            frame_offset_pi=r.get("frame_offset_pi", 0.0),
            corrections=tuple(r.get("corrections", ())),
            reconstruct_middle=r.get("reconstruct_middle", False),
            exact_phases_pi=tuple(exact) if exact else None,
            closed_form=r.get("closed_form", ""),
            aliases=tuple(r.get("aliases", ())),
            duplicate_of=r.get("duplicate_of"),
            conjugate_of=r.get("conjugate_of"),
            notes=r.get("notes", ""),
            record=r,
        )

    @property
    def theta(self) -> float:
        return self.theta_pi * PI

    def _build(self, areas, phases) -> CompositeSequence:
        phases = [p + self.frame_offset_pi for p in phases]
        return sequence_from_pi(areas, phases, self.theta_pi, self.family, self.name)

    def raw_sequence(self) -> CompositeSequence:
        """Printed values with only the frame offset applied."""
        return self._build(self.areas_pi, self.phases_pi)

    def printed_sequence(self) -> CompositeSequence:
        """Printed values with typo corrections and middle-phase reconstruction."""
        areas, phases = list(self.areas_pi), list(self.phases_pi)
        for c in self.corrections:
            target = areas if c["field"] == "areas_pi" else phases
            values = c["value"] if isinstance(c["value"], list) else [c["value"]] * len(c["index"])
            for i, v in zip(c["index"], values):
                target[i] = v
        if self.reconstruct_middle and len(phases) > 1:
            n = len(phases) // 2
            last, _ = symmetric_x_phase_relations([p * PI for p in phases[:n]])
            phases[n] = last / PI
        return self._build(areas, phases)

    def exact_sequence(self) -> CompositeSequence | None:
        if self.exact_phases_pi is None:
            return None
        return self._build(self.areas_pi, self.exact_phases_pi)

    @property
    def sequence(self) -> CompositeSequence:
        """Best available sequence: closed form if known, else the corrected printed one."""
        return self.exact_sequence() or self.printed_sequence()

    @property
    def total_area_pi(self) -> float:
        return sum(self.areas_pi)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class VerifyResult:
    name: str
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{c.name}={'ok' if c.passed else 'FAIL'}({c.detail})" for c in self.checks]
        return f"{status} {self.name}: " + " ".join(parts)


@dataclass(frozen=True)
class CatalogReport:
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    def render(self) -> str:
        lines = [r.render() for r in self.results]
        lines.append(f"{len(self.results) - len(self.failures)}/{len(self.results)} sequences passed")
        return "\n".join(lines) + "\n"


def gate_error(seq: CompositeSequence, theta) -> float:
    return compose(seq, 0.0).max_abs_diff(target_rotation(theta))


_POLISH_CACHE: dict[str, Solution] = {}


def polished(entry: NamedSequence) -> Solution:
    """High-precision re-polish of the corrected printed sequence (cached per record)."""
    if entry.name not in _POLISH_CACHE:
        order = max(entry.claimed_order, 1)
        _POLISH_CACHE[entry.name] = polish(entry.printed_sequence(), order, dps=HIGH_DPS)
    return _POLISH_CACHE[entry.name]


def clear_cache() -> None:
    _POLISH_CACHE.clear()


def verify(entry: NamedSequence, strict: bool = False, tol: float = POLISHED_GATE_TOL) -> VerifyResult:
    """Zeroth-order, order, area and range checks for one record."""
    checks = []
    seq = entry.printed_sequence()
    theta = entry.theta
    n = entry.claimed_order
    err = gate_error(seq, theta)
    sol_seq = seq
    if n > 0:
        try:
            sol = polished(entry)
            sol_seq = sol.sequence
            checks.append(
                Check(
                    "polish",
                    not sol.basin_escape,
                    f"shift={sol.max_shift / PI:.2e}pi residual={sol.residual_norm:.1e}",
                )
            )
        except PolishError as exc:
            checks.append(Check("polish", False, f"diverged residual={exc.residual:.3e}"))
        except DomainError as exc:
            checks.append(Check("polish", False, str(exc)))
    err_polished = err
    if sol_seq.is_mp:
        with mpmath.workdps(HIGH_DPS):
            u = compose(sol_seq, 0)
            err_polished = u.max_abs_diff(target_rotation(mp_angle(theta)))
    checks.append(
        Check(
            "gate",
            err <= PRINTED_GATE_TOL and err_polished <= tol,
            f"printed={err:.1e} polished={err_polished:.1e}",
        )
    )
    slope = order_slope_estimate(sol_seq, theta)
    ok = slope.matches_order(n, SLOPE_TOL)
    detail = "machine-limited" if slope.machine_limited else f"slope={slope.slope:.3f} want={n + 1}"
    checks.append(Check("order", ok, detail))
    if strict and n > 0:
        with mpmath.workdps(HIGH_DPS):
            rep = compensation_order(sol_seq, theta, tol=POLISHED_GATE_TOL, max_order=n + 3)
        checks.append(Check("coeff-order", rep.order >= n, f"order={rep.order} want>={n}"))
    if entry.claimed_total_area_pi is not None:
        area = entry.total_area_pi
        checks.append(
            Check(
                "area",
                abs(area - entry.claimed_total_area_pi) <= AREA_TOL,
                f"{area:.4f}pi claimed={entry.claimed_total_area_pi:.2f}pi",
            )
        )
    if entry.claimed_range_pi is not None:
        try:
            r = high_fidelity_range(sol_seq.to_float(), theta)
            lo, hi = r.area_interval_pi
            lo_c, hi_c = entry.claimed_range_pi
            ok = abs(lo - lo_c) <= RANGE_TOL + 1e-12 and abs(hi - hi_c) <= RANGE_TOL + 1e-12
            checks.append(Check("range", ok, f"[{lo:.4f},{hi:.4f}]pi claimed=[{lo_c},{hi_c}]pi"))
        except NoRangeError:
            checks.append(Check("range", False, "no range"))
    return VerifyResult(entry.name, tuple(checks))


class Catalog:
    def __init__(self, records: list[dict]):
        self.entries = [NamedSequence.from_record(r) for r in records]
        self._by_name: dict[str, NamedSequence] = {}
        for e in self.entries:
            for key in (e.name, *e.aliases):
                if key in self._by_name:
                    raise ValueError(f"duplicate catalog name {key!r}")
                self._by_name[key] = e

    @classmethod
    def from_json(cls, text: str) -> "Catalog":
        return cls(json.loads(text)["records"])

    def get(self, name: str) -> NamedSequence:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownSequenceError(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def list_sequences(self, family=None, order=None, theta_pi=None) -> list[NamedSequence]:
        fam = Family(family) if family is not None else None
        out = []
        for e in self.entries:
            if fam is not None and e.family is not fam:
                continue
            if order is not None and e.claimed_order != order:
                continue
            if theta_pi is not None and not math.isclose(e.theta_pi, theta_pi, abs_tol=1e-9):
                continue
            out.append(e)
        return out

    def verify_all(self, strict: bool = False, names=None) -> CatalogReport:
        entries = [self.get(n) for n in names] if names else self.entries
        return CatalogReport(tuple(verify(e, strict) for e in entries))

    def export(self, fmt: str = "json") -> str:
        if fmt == "json":
            body = ",\n".join(json.dumps(e.record) for e in self.entries)
            return '{"units": "pi", "records": [\n' + body + "\n]}\n"
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(
                ["name", "family", "theta_pi", "areas_pi", "phases_pi", "claimed_order",
                 "claimed_range_lo_pi", "claimed_range_hi_pi", "claimed_total_area_pi", "source"]
            )
            for e in self.entries:
                lo, hi = e.claimed_range_pi or ("", "")
                w.writerow(
                    [e.name, e.family.value, repr(e.theta_pi), " ".join(map(repr, e.areas_pi)),
                     " ".join(map(repr, e.phases_pi)), e.claimed_order, lo, hi,
                     "" if e.claimed_total_area_pi is None else e.claimed_total_area_pi, e.source]
                )
            return buf.getvalue()
        raise ValueError(f"unknown export format {fmt!r}")


@lru_cache(maxsize=1)
def load_catalog() -> Catalog:
    text = resources.files("composite_gates").joinpath("data/catalog.json").read_text()
    return Catalog.from_json(text)


def get(name: str) -> NamedSequence:
    return load_catalog().get(name)


def list_sequences(family=None, order=None, theta_pi=None) -> list[NamedSequence]:
    return load_catalog().list_sequences(family, order, theta_pi)


def verify_all(strict: bool = False) -> CatalogReport:
    return load_catalog().verify_all(strict)

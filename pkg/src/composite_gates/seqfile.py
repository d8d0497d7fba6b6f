"""JSON sequence files: a name, the target angle and a pulse list, all in units of pi.

    {"name": "mine", "theta_pi": 1.0, "claimed_order": 1,
     "pulses": [{"area_pi": 1.0, "phase_pi": 0.5}, ...]}

``family``, ``claimed_range_pi`` and ``claimed_total_area_pi`` are optional.
"""

from __future__ import annotations

import json
from pathlib import Path

from .catalog import NamedSequence
from .su2 import PI, CompositeSequence, DomainError, Family


class SequenceFileError(ValueError):
    pass


def to_record(data: dict) -> dict:
    """Validate a parsed sequence file and convert it into a catalog-style record."""
    try:
        pulses = data["pulses"]
        areas = [float(p["area_pi"]) for p in pulses]
        phases = [float(p["phase_pi"]) for p in pulses]
        theta_pi = float(data["theta_pi"])
        name = str(data.get("name", "sequence"))
        family = Family(data.get("family", Family.CUSTOM.value))
        order = int(data.get("claimed_order", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise SequenceFileError(f"malformed sequence file: {exc}") from None
    if not pulses:
        raise SequenceFileError("sequence file has no pulses")
    if any(not a > 0 for a in areas):
        raise SequenceFileError("pulse areas must be positive")
    record = dict(
        name=name, family=family.value, theta_pi=theta_pi, areas_pi=areas, phases_pi=phases,
        claimed_order=order, claimed_range_pi=data.get("claimed_range_pi"),
        claimed_total_area_pi=data.get("claimed_total_area_pi"), source="file",
    )
    return record


def load(path: str | Path) -> NamedSequence:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SequenceFileError(f"cannot read {path}: {exc}") from None
    if not isinstance(data, dict):
        raise SequenceFileError("sequence file must hold a JSON object")
    entry = NamedSequence.from_record(to_record(data))
    try:
        entry.raw_sequence()
    except DomainError as exc:
        raise SequenceFileError(str(exc)) from None
    return entry


def dumps(seq: CompositeSequence, name: str = "", claimed_order: int | None = None) -> str:
    seq = seq.to_float()
    data = {
        "name": name or seq.name or "sequence",
        "family": seq.family.value,
        "theta_pi": float(seq.target_theta) / PI,
        "pulses": [{"area_pi": p.area / PI, "phase_pi": p.phase / PI} for p in seq.pulses],
    }
    if claimed_order is not None:
        data["claimed_order"] = claimed_order
    return json.dumps(data, indent=1)


def save(path: str | Path, seq: CompositeSequence, name: str = "", claimed_order: int | None = None) -> None:
    Path(path).write_text(dumps(seq, name, claimed_order) + "\n")

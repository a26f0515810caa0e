"""Fault-coverage campaigns: one simulation per fault instance."""

from __future__ import annotations

import csv
import io
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .engine import InternalConsistencyError, Schedule, run_schedule
from .faults import FaultInstance, family
from .memory import MemorySpec

CSV_COLUMNS = ("fault_id", "primitive", "victim", "aggressor", "iter_flags", "detected")


@dataclass(frozen=True)
class CoverageRow:
    instance: FaultInstance
    flags: tuple[bool, ...]

    @property
    def detected(self) -> bool:
        return any(self.flags)

    def csv_fields(self) -> tuple[str, ...]:
        inst = self.instance
        return (inst.id, str(inst.primitive), inst.victim, inst.aggressor,
                "".join("1" if f else "0" for f in self.flags), "1" if self.detected else "0")


def _ratio(rows: Sequence[CoverageRow]) -> float | None:
    if not rows:
        return None
    return sum(r.detected for r in rows) / len(rows)


def fmt_ratio(value: float | None) -> str:
    return "NA" if value is None else f"{value:.4f}"


@dataclass
class CoverageReport:
    rows: list[CoverageRow]
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def single_rows(self) -> list[CoverageRow]:
        return [r for r in self.rows if not r.instance.primitive.two_cell]

    @property
    def two_cell_rows(self) -> list[CoverageRow]:
        return [r for r in self.rows if r.instance.primitive.two_cell]

    @property
    def r_single(self) -> float | None:
        return _ratio(self.single_rows)

    @property
    def r_two(self) -> float | None:
        return _ratio(self.two_cell_rows)

    def _grouped(self, key) -> OrderedDict[str, float]:
        groups: OrderedDict[str, list[CoverageRow]] = OrderedDict()
        for r in self.rows:
            groups.setdefault(key(r.instance.name), []).append(r)
        return OrderedDict((k, _ratio(v)) for k, v in groups.items())

    def per_primitive(self) -> OrderedDict[str, float]:
        return self._grouped(lambda name: name)

    def per_family(self) -> OrderedDict[str, float]:
        return self._grouped(family)

    def weakest_family(self, two_cell: bool) -> tuple[str, float] | None:
        fams = OrderedDict()
        for r in self.rows:
            if r.instance.primitive.two_cell == two_cell:
                fams.setdefault(family(r.instance.name), []).append(r)
        if not fams:
            return None
        name = min(fams, key=lambda f: _ratio(fams[f]))
        return name, _ratio(fams[name])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow(r.csv_fields())
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{k}: {v}" for k, v in self.metadata.items()]
        lines.append(f"instances: {len(self.rows)} "
                     f"(single {len(self.single_rows)}, two-cell {len(self.two_cell_rows)})")
        lines.append(f"R_single: {fmt_ratio(self.r_single)}")
        lines.append(f"R_two: {fmt_ratio(self.r_two)}")
        for name, r in self.per_family().items():
            lines.append(f"  {name:8s} {fmt_ratio(r)}")
        return "\n".join(lines) + "\n"


def _simulate_chunk(args) -> list[tuple[bool, ...]]:
    spec, schedule, instances = args
    return [tuple(o.detected for o in run_schedule(spec, schedule, [inst]))
            for inst in instances]


def check_fault_free(spec: MemorySpec, schedule: Schedule) -> None:
    outcomes = run_schedule(spec, schedule, [])
    for i, o in enumerate(outcomes):
        if o.detected:
            raise InternalConsistencyError(f"iteration {i} flags a fault on a fault-free memory")


def run_coverage(spec: MemorySpec, schedule: Schedule, instances: Sequence[FaultInstance],
                 jobs: int = 1, metadata: dict[str, str] | None = None) -> CoverageReport:
    """Simulate every instance alone; rows come back in instance order."""
    check_fault_free(spec, schedule)
    instances = list(instances)
    if jobs > 1 and len(instances) > 1:
        size = -(-len(instances) // (jobs * 4))
        chunks = [(spec, schedule, instances[i:i + size])
                  for i in range(0, len(instances), size)]
        with ProcessPoolExecutor(jobs) as pool:
            flags = [f for part in pool.map(_simulate_chunk, chunks) for f in part]
    else:
        flags = _simulate_chunk((spec, schedule, instances))
    meta = {"r": str(len(schedule)), "N": str(spec.n_cells), "word_bits": str(spec.word_bits),
            "scheme": ",".join(sorted({c.scheme for c in schedule.iterations}))}
    meta.update(metadata or {})
    return CoverageReport([CoverageRow(i, f) for i, f in zip(instances, flags)], meta)

"""Experiment configuration files.

Line-oriented ``key = value`` pairs grouped into sections.  ``[memory]`` and
``[faults]`` appear at most once; every ``[iteration]`` block adds one
iteration to the schedule, in file order::

    [memory]
    n_cells = 16
    word_bits = 1

    [iteration]
    q_coeffs = 1,0,0,1
    seed = 1,0,0,0
    trajectory = down
    scheme = ring
    misr_poly = 0b10011
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .engine import ConfigError, IterationConfig, LaneNetwork, Schedule, Trajectory
from .faults import PLACEMENTS
from .galois import GF2, FeedbackSpec, FieldSpec, GaloisError, first_primitive, parse_poly
from .memory import MemoryAccessError, MemorySpec


class ConfigFileError(ConfigError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


ITERATION_KEYS = {
    "p", "q", "q_coeffs", "c0", "lanes", "seed", "trajectory", "addr_poly", "addr_seed",
    "inversion", "scheme", "misr_poly", "steps", "refill",
}
SECTION_KEYS = {
    "memory": {"n_cells", "word_bits", "read_ports", "write_ports", "fill"},
    "faults": {"placement", "list"},
    "iteration": ITERATION_KEYS,
}


@dataclass(frozen=True)
class ExperimentConfig:
    spec: MemorySpec
    schedule: Schedule
    placement: str = "pairs"
    fault_list: str | None = None
    digest: str = ""
    source: str = ""


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v, 0) for v in text.replace(" ", "").split(",") if v)


def _sections(text: str) -> list[tuple[str, int, dict[str, tuple[str, int]]]]:
    sections: list[tuple[str, int, dict[str, tuple[str, int]]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigFileError(f"malformed section header {line!r}", lineno)
            name = line[1:-1].strip().lower()
            if name not in SECTION_KEYS:
                raise ConfigFileError(f"unknown section [{name}]", lineno)
            if name != "iteration" and any(s[0] == name for s in sections):
                raise ConfigFileError(f"section [{name}] given twice", lineno)
            sections.append((name, lineno, {}))
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep or not key:
            raise ConfigFileError(f"expected key = value, got {line!r}", lineno)
        if not sections:
            raise ConfigFileError("key outside any section", lineno)
        name, _, body = sections[-1]
        if key not in SECTION_KEYS[name]:
            raise ConfigFileError(f"unknown key {key!r} in [{name}]", lineno)
        if key in body:
            raise ConfigFileError(f"duplicate key {key!r}", lineno)
        body[key] = (value.strip(), lineno)
    return sections


def _feedback(body: dict[str, tuple[str, int]], word_bits: int, header: int):
    if "lanes" in body:
        text, line = body["lanes"]
        lanes = []
        for part in text.split(";"):
            p_text, sep, coeffs = part.partition("/")
            if not sep:
                raise ConfigFileError(f"lane {part.strip()!r} must read p/c1,c2,...", line)
            lanes.append(FeedbackSpec(FieldSpec(parse_poly(p_text)), _ints(coeffs)))
        return LaneNetwork(tuple(lanes))
    if "q" in body:
        text, line = body["q"]
        return FeedbackSpec.from_poly2(parse_poly(text))
    if "q_coeffs" not in body:
        raise ConfigFileError("iteration needs q, q_coeffs or lanes", header)
    if "p" in body:
        field = FieldSpec(parse_poly(body["p"][0]))
    else:
        field = GF2 if word_bits == 1 else FieldSpec(first_primitive(word_bits))
    c0 = int(body["c0"][0], 0) if "c0" in body else 1
    return FeedbackSpec(field, _ints(body["q_coeffs"][0]), c0)


def _iteration(body: dict[str, tuple[str, int]], spec: MemorySpec, header: int) -> IterationConfig:
    def get(key, default=None):
        return body[key][0] if key in body else default

    fb = _feedback(body, spec.word_bits, header)
    seed = _ints(get("seed")) if "seed" in body else (1,) + (0,) * (fb.k - 1)
    traj = Trajectory(
        get("trajectory", "up"),
        parse_poly(get("addr_poly")) if "addr_poly" in body else None,
        int(get("addr_seed", "1"), 0),
    )
    cfg = IterationConfig(
        feedback=fb,
        seed=seed,
        trajectory=traj,
        inversion=get("inversion", "none"),
        scheme=get("scheme", "ring"),
        misr_poly=parse_poly(get("misr_poly")) if "misr_poly" in body else None,
        steps=int(get("steps"), 0) if "steps" in body else None,
        refill=int(get("refill"), 0) if "refill" in body else None,
    )
    cfg.check(spec)
    traj.realize(spec.n_cells)
    return cfg


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    sections = _sections(text)
    mem_body = next((b for n, _, b in sections if n == "memory"), None)
    if mem_body is None:
        raise ConfigFileError("missing [memory] section")
    try:
        spec = MemorySpec(**{k: int(v, 0) for k, (v, _) in mem_body.items() if k != "fill"})
        fill = int(mem_body["fill"][0], 0) if "fill" in mem_body else 0
        if not 0 <= fill <= spec.mask:
            raise ConfigFileError(f"fill {fill} does not fit the word", mem_body["fill"][1])
    except (ValueError, TypeError, MemoryAccessError) as exc:
        if isinstance(exc, ConfigFileError):
            raise
        line = min((ln for _, ln in mem_body.values()), default=None)
        raise ConfigFileError(f"[memory]: {exc}", line) from None
    iterations = []
    for name, header, body in sections:
        if name != "iteration":
            continue
        try:
            iterations.append(_iteration(body, spec, header))
        except ConfigFileError:
            raise
        except (ConfigError, GaloisError, ValueError) as exc:
            raise ConfigFileError(f"[iteration]: {exc}", header) from None
    if not iterations:
        raise ConfigFileError("schedule needs at least one [iteration]")
    faults = next((b for n, _, b in sections if n == "faults"), {})
    placement = faults.get("placement", ("pairs", 0))
    if placement[0] not in PLACEMENTS:
        raise ConfigFileError(f"placement must be one of {PLACEMENTS}", placement[1])
    fault_list = faults["list"][0] if "list" in faults else None
    digest = hashlib.sha256(text.encode()).hexdigest()[:12]
    return ExperimentConfig(spec, Schedule(tuple(iterations), fill), placement[0],
                            fault_list, digest, source)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read {path}: {exc.strerror}") from None
    cfg = parse_config(text, str(path))
    if cfg.fault_list and not Path(cfg.fault_list).is_absolute():
        cfg = ExperimentConfig(cfg.spec, cfg.schedule, cfg.placement,
                               str(path.parent / cfg.fault_list), cfg.digest, cfg.source)
    return cfg


def _fmt_ints(values) -> str:
    return ",".join(str(v) for v in values)


def dump_config(spec: MemorySpec, schedule: Schedule, placement: str = "pairs") -> str:
    """Serialize back to the file format (single-field or lane feedback)."""
    lines = ["[memory]", f"n_cells = {spec.n_cells}", f"word_bits = {spec.word_bits}",
             f"read_ports = {spec.read_ports}", f"fill = {schedule.fill}", "",
             "[faults]", f"placement = {placement}"]
    for cfg in schedule.iterations:
        lines += ["", "[iteration]"]
        fb = cfg.feedback
        if isinstance(fb, LaneNetwork):
            lanes = "; ".join(f"{lane.field.p}/{_fmt_ints(lane.coeffs)}" for lane in fb.lanes)
            lines.append(f"lanes = {lanes}")
        else:
            lines += [f"p = {fb.field.p}", f"q_coeffs = {_fmt_ints(fb.coeffs)}"]
            if fb.c0 != 1:
                lines.append(f"c0 = {fb.c0}")
        lines += [f"seed = {_fmt_ints(cfg.seed)}", f"trajectory = {cfg.trajectory.kind}"]
        if cfg.trajectory.kind == "pseudorandom":
            if cfg.trajectory.addr_poly is not None:
                lines.append(f"addr_poly = {cfg.trajectory.addr_poly}")
            lines.append(f"addr_seed = {cfg.trajectory.addr_seed}")
        lines += [f"inversion = {cfg.inversion}", f"scheme = {cfg.scheme}"]
        if cfg.misr_poly is not None:
            lines.append(f"misr_poly = {cfg.misr_poly}")
        if cfg.steps is not None:
            lines.append(f"steps = {cfg.steps}")
        if cfg.refill is not None:
            lines.append(f"refill = {cfg.refill}")
    return "\n".join(lines) + "\n"

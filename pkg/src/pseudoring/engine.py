"""Pseudo-ring iterations: a virtual LFSR pushed across the memory array.

One iteration writes the seed into the first ``k`` trajectory positions,
performs ``steps`` push steps (read ``k`` consecutive positions, write the
feedback value into the next one) and reads back the final ``k``-cell
window.  The window and, in the ring scheme, a MISR signature over every
value read are compared against a memory-free software replica.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import ceil, log2
from typing import Iterable, Protocol, Sequence

from .faults import FaultInstance, FaultyMemory
from .galois import (
    FeedbackSpec,
    FieldSpec,
    GaloisError,
    Poly2,
    degree,
    first_primitive,
    is_irreducible,
    is_primitive,
    poly2_mul_mod,
    poly2_str,
)
from .memory import Memory, MemorySpec, cycles_per_step


class ConfigError(ValueError):
    pass


class InternalConsistencyError(RuntimeError):
    pass


TRAJECTORIES = ("up", "down", "pseudorandom")
INVERSIONS = ("none", "input", "output", "input_output")
SCHEMES = ("ring", "scan")


@dataclass(frozen=True)
class Trajectory:
    kind: str = "up"
    addr_poly: Poly2 | None = None
    addr_seed: int = 1

    def __post_init__(self):
        if self.kind not in TRAJECTORIES:
            raise ConfigError(f"trajectory must be one of {TRAJECTORIES}, got {self.kind!r}")
        if self.kind == "pseudorandom" and self.addr_seed < 1:
            raise ConfigError("pseudorandom trajectory needs a nonzero addr_seed")

    def realize(self, n: int) -> tuple[int, ...]:
        return realize_trajectory(self, n)


def address_bits(n: int) -> int:
    return max(1, ceil(log2(n + 1)))


@lru_cache(maxsize=256)
def realize_trajectory(t: Trajectory, n: int) -> tuple[int, ...]:
    """Address order for ``n`` cells.

    The pseudorandom order runs a maximal address LFSR over
    ``w = ceil(log2(n + 1))`` bits from ``addr_seed``, maps state ``s`` to
    address ``s - 1`` and drops addresses ``>= n``.
    """
    if n < 1:
        raise ConfigError(f"need at least one cell, got {n}")
    if t.kind == "up":
        return tuple(range(n))
    if t.kind == "down":
        return tuple(range(n - 1, -1, -1))
    w = address_bits(n)
    poly = first_primitive(w) if t.addr_poly is None else t.addr_poly
    if degree(poly) != w:
        raise ConfigError(f"addr_poly {poly_str(poly)} must have degree {w} for {n} cells")
    try:
        maximal = is_irreducible(poly) and is_primitive(poly)
    except GaloisError:
        maximal = False
    if not maximal:
        raise ConfigError(f"addr_poly {poly_str(poly)} is not maximal-length")
    if t.addr_seed >= 1 << w:
        raise ConfigError(f"addr_seed {t.addr_seed} does not fit in {w} bits")
    order = []
    s = t.addr_seed
    for _ in range((1 << w) - 1):
        if s - 1 < n:
            order.append(s - 1)
        s = poly2_mul_mod(s, 0b10, poly)
    return tuple(order)


def poly_str(p: Poly2) -> str:
    return poly2_str(p)


class Feedback(Protocol):
    k: int
    word_bits: int

    def next(self, window: Sequence[int]) -> int: ...


@dataclass(frozen=True)
class LaneNetwork:
    """Independent narrow registers side by side in one word.

    Lane 0 occupies the low bits.  All lanes share the register length ``k``;
    lanes may use different fields and taps.
    """

    lanes: tuple[FeedbackSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "lanes", tuple(self.lanes))
        if not self.lanes:
            raise ConfigError("lane network needs at least one lane")
        if len({lane.k for lane in self.lanes}) != 1:
            raise ConfigError("all lanes must have the same register length")
        if self.word_bits > 16:
            raise ConfigError(f"lanes span {self.word_bits} bits, more than 16")

    @property
    def k(self) -> int:
        return self.lanes[0].k

    @property
    def word_bits(self) -> int:
        return sum(lane.field.m for lane in self.lanes)

    @property
    def homogeneous(self) -> bool:
        return len(set(self.lanes)) == 1

    def next(self, window: Sequence[int]) -> int:
        out = 0
        shift = 0
        for lane in self.lanes:
            mask = lane.field.size - 1
            out |= lane.next([(v >> shift) & mask for v in window]) << shift
            shift += lane.field.m
        return out

    def describe(self) -> str:
        return " | ".join(lane.describe() for lane in self.lanes)


def misr_step(sig: int, value: int, misr_poly: Poly2) -> int:
    """One MISR clock: multiply the state by x modulo ``misr_poly`` and XOR in ``value``."""
    width = degree(misr_poly)
    if width < 1:
        raise ConfigError(f"MISR polynomial {misr_poly} has no degree")
    if not 0 <= sig < 1 << width or not 0 <= value < 1 << width:
        raise ConfigError(f"MISR of width {width} cannot absorb {value} (state {sig})")
    sig <<= 1
    if sig >> width:
        sig ^= misr_poly
    return sig ^ value


@dataclass(frozen=True)
class IterationConfig:
    feedback: FeedbackSpec | LaneNetwork
    seed: tuple[int, ...]
    trajectory: Trajectory = Trajectory()
    inversion: str = "none"
    scheme: str = "ring"
    misr_poly: Poly2 | None = None
    steps: int | None = None
    refill: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "seed", tuple(self.seed))
        if len(self.seed) != self.feedback.k:
            raise ConfigError(f"seed has {len(self.seed)} words, register needs {self.feedback.k}")
        limit = 1 << self.feedback.word_bits
        if any(not 0 <= v < limit for v in self.seed):
            raise ConfigError(f"seed {self.seed} does not fit {self.feedback.word_bits}-bit words")
        if self.inversion not in INVERSIONS:
            raise ConfigError(f"inversion must be one of {INVERSIONS}, got {self.inversion!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.inversion == "none" and not any(self.seed):
            raise ConfigError("all-zero seed is absorbing without inversion")
        if self.steps is not None and self.steps < 1:
            raise ConfigError(f"steps must be positive, got {self.steps}")
        if self.scheme == "ring" and degree(self.signature_poly) < self.feedback.word_bits:
            raise ConfigError("MISR narrower than the memory word")

    @property
    def k(self) -> int:
        return self.feedback.k

    @property
    def signature_poly(self) -> Poly2:
        if self.misr_poly is not None:
            return self.misr_poly
        if isinstance(self.feedback, FeedbackSpec):
            return self.feedback.field.p
        return first_primitive(self.feedback.word_bits)

    def n_steps(self, n: int) -> int:
        return n if self.steps is None else self.steps

    def check(self, spec: MemorySpec) -> None:
        if self.feedback.word_bits != spec.word_bits:
            raise ConfigError(
                f"feedback works on {self.feedback.word_bits}-bit words, memory has {spec.word_bits}")
        if spec.n_cells < self.k + 1:
            raise ConfigError(f"memory of {spec.n_cells} cells too small for k={self.k}")
        if self.refill is not None and not 0 <= self.refill <= spec.mask:
            raise ConfigError(f"refill {self.refill} does not fit the word")


@dataclass(frozen=True)
class Schedule:
    iterations: tuple[IterationConfig, ...]
    fill: int = 0

    def __post_init__(self):
        object.__setattr__(self, "iterations", tuple(self.iterations))
        if not self.iterations:
            raise ConfigError("a schedule needs at least one iteration")

    def __len__(self) -> int:
        return len(self.iterations)


@dataclass
class IterationOutcome:
    final_window: tuple[int, ...]
    golden_window: tuple[int, ...]
    signature: int | None
    golden_signature: int | None
    cycles: int

    @property
    def detected(self) -> bool:
        if self.final_window != self.golden_window:
            return True
        return self.signature is not None and self.signature != self.golden_signature


@dataclass(frozen=True)
class GoldenRun:
    """Fault-free replica: written stream, final window and signature."""

    stream: tuple[int, ...]
    window: tuple[int, ...]
    signature: int | None


def _feedback_value(cfg: IterationConfig, window: Sequence[int], mask: int) -> int:
    if cfg.inversion in ("output", "input_output"):
        window = [v ^ mask for v in window]
    value = cfg.feedback.next(window)
    if cfg.inversion in ("input", "input_output"):
        value ^= mask
    return value


@lru_cache(maxsize=1024)
def golden_run(cfg: IterationConfig, n: int) -> GoldenRun:
    k = cfg.k
    steps = cfg.n_steps(n)
    mask = (1 << cfg.feedback.word_bits) - 1
    stream = list(cfg.seed)
    for t in range(steps):
        stream.append(_feedback_value(cfg, stream[t:t + k], mask))
    signature = None
    if cfg.scheme == "ring":
        poly = cfg.signature_poly
        signature = 0
        for t in range(steps):
            for v in stream[t:t + k]:
                signature = misr_step(signature, v, poly)
        for v in stream[steps:steps + k]:
            signature = misr_step(signature, v, poly)
    return GoldenRun(tuple(stream), tuple(stream[steps:steps + k]), signature)


class PiIteration:
    """Phase-by-phase driver of one iteration on a (possibly faulty) memory."""

    def __init__(self, mem: Memory | FaultyMemory, cfg: IterationConfig):
        cfg.check(mem.spec)
        self.mem = mem
        self.cfg = cfg
        self.n = mem.spec.n_cells
        self.order = cfg.trajectory.realize(self.n)
        self.mask = mem.spec.mask
        self.signature = 0 if cfg.scheme == "ring" else None
        self.shadow: list[int] | None = None
        self.steps_done = 0
        self._cps = cycles_per_step(cfg.k, mem.spec.read_ports)
        self._faulty = bool(getattr(mem, "instances", ()))
        self._misr_poly = cfg.signature_poly
        self._misr_top = 1 << degree(self._misr_poly)

    def _addr(self, position: int) -> int:
        return self.order[position % self.n]

    def _absorb(self, value: int) -> None:
        # inlined misr_step; widths were validated with the config
        if self.signature is not None:
            sig = self.signature << 1
            if sig & self._misr_top:
                sig ^= self._misr_poly
            self.signature = sig ^ value

    def init(self) -> None:
        for j, v in enumerate(self.cfg.seed):
            self.mem.write(self._addr(j), v)
            self.mem.cycle += 1
        if self.cfg.scheme == "scan":
            self.shadow = list(self.cfg.seed)

    def push_step(self, t: int) -> int:
        k = self.cfg.k
        mem = self.mem
        ports = mem.spec.read_ports
        order, n = self.order, self.n
        base = mem.cycle
        window = []
        for j in range(k):
            mem.cycle = base + j // ports
            v = mem.read(order[(t + j) % n])
            window.append(v)
            self._absorb(v)
        mem.cycle = base + self._cps - 1
        value = _feedback_value(self.cfg, window, self.mask)
        mem.write(order[(t + k) % n], value)
        mem.cycle = base + self._cps
        if self.shadow is not None:
            self.shadow = window[1:] + [value]
        self.steps_done = t + 1
        return value

    def unload(self) -> tuple[int, ...]:
        out = []
        for j in range(self.cfg.k):
            v = self.mem.read(self._addr(self.steps_done + j))
            out.append(v)
            self._absorb(v)
            self.mem.cycle += 1
        return tuple(out)

    def run(self) -> IterationOutcome:
        cfg = self.cfg
        if cfg.refill is not None:
            self.mem.fill(cfg.refill)
        start = self.mem.cycle
        golden = golden_run(cfg, self.n)
        self.init()
        k = cfg.k
        for t in range(cfg.n_steps(self.n)):
            self.push_step(t)
            if self.shadow is not None and not self._faulty \
                    and tuple(self.shadow) != golden.stream[t + 1:t + 1 + k]:
                raise InternalConsistencyError(
                    f"shadow register diverged from the golden model at step {t}")
        final = self.unload()
        return IterationOutcome(final, golden.window, self.signature, golden.signature,
                                self.mem.cycle - start)


def run_iteration(mem: Memory | FaultyMemory, cfg: IterationConfig) -> IterationOutcome:
    return PiIteration(mem, cfg).run()


def expected_cycles(cfg: IterationConfig, spec: MemorySpec) -> int:
    return 2 * cfg.k + cfg.n_steps(spec.n_cells) * cycles_per_step(cfg.k, spec.read_ports)


def run_schedule(spec: MemorySpec, schedule: Schedule | Iterable[IterationConfig],
                 instances: Sequence[FaultInstance] = (),
                 mem: Memory | None = None) -> list[IterationOutcome]:
    """Run every iteration in order on one persistent memory."""
    if not isinstance(schedule, Schedule):
        schedule = Schedule(tuple(schedule))
    if mem is None:
        mem = Memory.new(spec, schedule.fill)
    target = FaultyMemory(mem, instances)
    return [run_iteration(target, cfg) for cfg in schedule.iterations]


def any_detected(outcomes: Iterable[IterationOutcome]) -> bool:
    return any(o.detected for o in outcomes)


@dataclass
class SimulationResult:
    instance: FaultInstance | None
    flags: list[bool] = field(default_factory=list)

    @property
    def detected(self) -> bool:
        return any(self.flags)


def simulate(spec: MemorySpec, schedule: Schedule, instance: FaultInstance | None) -> SimulationResult:
    outcomes = run_schedule(spec, schedule, [] if instance is None else [instance])
    return SimulationResult(instance, [o.detected for o in outcomes])


def whole_word(p: Poly2, coeffs: Sequence[int], c0: int = 1) -> FeedbackSpec:
    return FeedbackSpec(FieldSpec(p), tuple(coeffs), c0)

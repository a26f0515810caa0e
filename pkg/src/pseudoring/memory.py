"""Simulated RAM under test."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil
from typing import NamedTuple


class MemoryAccessError(Exception):
    pass


class AddressError(MemoryAccessError, IndexError):
    pass


class ValueRangeError(MemoryAccessError, ValueError):
    pass


@dataclass(frozen=True)
class MemorySpec:
    n_cells: int
    word_bits: int = 1
    read_ports: int = 1
    write_ports: int = 1

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueRangeError(f"n_cells must be positive, got {self.n_cells}")
        if not 1 <= self.word_bits <= 16:
            raise ValueRangeError(f"word_bits must be in 1..16, got {self.word_bits}")
        if self.read_ports not in (1, 2):
            raise ValueRangeError(f"read_ports must be 1 or 2, got {self.read_ports}")
        if self.write_ports != 1:
            raise ValueRangeError("only one write port is modeled")

    @property
    def mask(self) -> int:
        return (1 << self.word_bits) - 1


def cycles_per_step(k: int, read_ports: int) -> int:
    """Cost of one push step: k reads spread over the read ports, one write."""
    return ceil(k / read_ports) + 1


class Access(NamedTuple):
    op: str  # "r" or "w"
    address: int
    value: int
    cycle: int
    notes: tuple[str, ...] = ()

    def key(self) -> tuple[str, int, int]:
        return self.op, self.address, self.value


@dataclass
class Memory:
    """Fault-free cell array with an always-on access trace.

    ``cycle`` is advanced by whoever drives the memory; single accesses only
    stamp the current value.
    """

    spec: MemorySpec
    cells: list[int]
    trace: list[Access] = field(default_factory=list)
    cycle: int = 0

    @classmethod
    def new(cls, spec: MemorySpec, fill: int = 0) -> Memory:
        if not 0 <= fill <= spec.mask:
            raise ValueRangeError(f"fill {fill} does not fit in {spec.word_bits} bits")
        return cls(spec, [fill] * spec.n_cells)

    def _check_address(self, address: int) -> None:
        if not 0 <= address < self.spec.n_cells:
            raise AddressError(f"address {address} outside 0..{self.spec.n_cells - 1}")

    def _check_value(self, value: int) -> None:
        if not 0 <= value <= self.spec.mask:
            raise ValueRangeError(f"value {value} does not fit in {self.spec.word_bits} bits")

    def read(self, address: int) -> int:
        self._check_address(address)
        value = self.cells[address]
        self.trace.append(Access("r", address, value, self.cycle))
        return value

    def write(self, address: int, value: int) -> None:
        self._check_address(address)
        self._check_value(value)
        self.cells[address] = value
        self.trace.append(Access("w", address, value, self.cycle))

    def fill(self, value: int) -> None:
        """Overwrite every cell, address order, through :meth:`write`."""
        for a in range(self.spec.n_cells):
            self.write(a, value)

    @property
    def memory(self) -> Memory:
        return self

    def copy(self) -> Memory:
        return Memory(self.spec, list(self.cells), list(self.trace), self.cycle)


def mem_new(spec: MemorySpec, fill: int = 0) -> Memory:
    return Memory.new(spec, fill)


def mem_read(mem: Memory, address: int) -> int:
    return mem.read(address)


def mem_write(mem: Memory, address: int, value: int) -> None:
    mem.write(address, value)

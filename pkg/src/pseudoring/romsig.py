"""Two-byte running signature over a program-memory image.

The register pair (msw, lsw) is stepped once per ROM byte::

    msw' = lsw
    lsw' = lsw ^ table[msw] ^ byte

where ``table[i * 2**m + j] = c2*i + c1*j`` in GF(2^m) is the precomputed
modular-sum table.  For the default parameters (p = 1 + x + x^4, c1 = 1,
c2 = 9) ``m = 4`` and the table has 256 entries, so the whole ``msw`` byte
indexes it and its 4-bit output lands in the low nibble of ``lsw``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .galois import FieldSpec

DEFAULT_FIELD = FieldSpec(0b10011)


@dataclass(frozen=True)
class SumTable:
    field: FieldSpec
    c1: int
    c2: int
    entries: tuple[int, ...]

    def __getitem__(self, index: int) -> int:
        return self.entries[index]

    def __len__(self) -> int:
        return len(self.entries)

    def rows(self) -> list[tuple[int, ...]]:
        q = self.field.size
        return [self.entries[i * q:(i + 1) * q] for i in range(q)]

    def to_text(self) -> str:
        """16 rows of comma-separated decimals for the 4-bit table."""
        return "\n".join(",".join(map(str, row)) for row in self.rows()) + "\n"


def gen_table(field: FieldSpec = DEFAULT_FIELD, c1: int = 1, c2: int = 9) -> SumTable:
    field.check(c1)
    field.check(c2)
    q = field.size
    entries = tuple(field.mul(c2, i) ^ field.mul(c1, j) for i in range(q) for j in range(q))
    return SumTable(field, c1, c2, entries)


@dataclass(frozen=True)
class SigState:
    msw: int = 0
    lsw: int = 0

    def __post_init__(self):
        if not (0 <= self.msw < 256 and 0 <= self.lsw < 256):
            raise ValueError(f"signature bytes out of range: {self.msw}, {self.lsw}")

    def __str__(self) -> str:
        return f"{self.msw:02X}:{self.lsw:02X}"

    @classmethod
    def parse(cls, text: str) -> SigState:
        hi, sep, lo = text.partition(":")
        if not sep:
            raise ValueError(f"expected MM:LL, got {text!r}")
        return cls(int(hi, 16), int(lo, 16))


def rom_signature(rom: Iterable[int] | bytes, table: SumTable,
                  seed: SigState = SigState()) -> SigState:
    if len(table) != 256:
        raise ValueError(f"signature step needs a 256-entry table, got {len(table)}")
    t = table.entries
    msw, lsw = seed.msw, seed.lsw
    for byte in rom:
        if not 0 <= byte < 256:
            raise ValueError(f"ROM byte {byte} out of range")
        msw, lsw = lsw, lsw ^ t[msw] ^ byte
    return SigState(msw, lsw)

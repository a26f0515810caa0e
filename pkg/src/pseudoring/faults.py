"""Fault primitives: notation, catalog, placement and injection.

A primitive is written ``<S/F/R>`` for one cell or ``<Sa;Sv/F/R>`` for an
aggressor/victim pair.  ``S`` is an initial state digit optionally followed by
up to two operations (``0w1``, ``1r1``, ``0w1r1``), ``F`` is the victim value
after sensitization and ``R`` the value returned by a sensitizing read, or
``-`` when nothing is read.

Faults act on single bits.  In word-oriented memories a write sensitizes a
victim bit only when that bit's old and new values match the primitive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .memory import Access, Memory, MemorySpec


class FaultSyntaxError(ValueError):
    def __init__(self, message: str, text: str = "", position: int | None = None):
        self.text = text
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}: {text!r}" if text else message)


class FaultSemanticError(FaultSyntaxError):
    pass


@dataclass(frozen=True)
class Sensitizer:
    """Initial state plus operations, e.g. ``0w1r1`` -> init 0, (('w',1),('r',1))."""

    init: int
    ops: tuple[tuple[str, int], ...] = ()

    def state_after(self, n_ops: int) -> int:
        state = self.init
        for kind, data in self.ops[:n_ops]:
            if kind == "w":
                state = data
        return state

    def __str__(self) -> str:
        return str(self.init) + "".join(f"{k}{d}" for k, d in self.ops)


@dataclass(frozen=True)
class FaultPrimitive:
    victim: Sensitizer
    effect: int
    read_out: int | None = None
    aggressor: Sensitizer | None = None

    @property
    def two_cell(self) -> bool:
        return self.aggressor is not None

    @property
    def is_state_fault(self) -> bool:
        return not self.victim.ops and not (self.aggressor and self.aggressor.ops)

    def __str__(self) -> str:
        r = "-" if self.read_out is None else str(self.read_out)
        s = f"{self.aggressor};{self.victim}" if self.aggressor else str(self.victim)
        return f"<{s}/{self.effect}/{r}>"


_SENS = re.compile(r"\s*([01])((?:\s*[wr]\s*[01])*)\s*")
_OP = re.compile(r"([wr])\s*([01])")


def _parse_sensitizer(text: str, start: int, end: int, full: str) -> Sensitizer:
    m = _SENS.fullmatch(full, start, end)
    if not m:
        bad = start
        while bad < end and full[bad].isspace():
            bad += 1
        raise FaultSyntaxError("malformed sensitizer", full, bad)
    init = int(m.group(1))
    ops = tuple((k, int(d)) for k, d in _OP.findall(m.group(2)))
    if len(ops) > 2:
        raise FaultSemanticError("at most two sensitizing operations", full, m.start(2))
    state = init
    for kind, data in ops:
        if kind == "r" and data != state:
            raise FaultSemanticError(f"r{data} on a cell holding {state}", full, m.start(2))
        if kind == "w":
            state = data
    return Sensitizer(init, ops)


def parse_fp(text: str) -> FaultPrimitive:
    s = text.strip()
    offset = text.index(s) if s else 0
    if not s.startswith("<"):
        raise FaultSyntaxError("expected '<'", text, offset)
    if not s.endswith(">"):
        raise FaultSyntaxError("expected '>'", text, offset + len(s))
    body_start, body_end = offset + 1, offset + len(s) - 1
    slashes = [i for i in range(body_start, body_end) if text[i] == "/"]
    if len(slashes) != 2:
        raise FaultSyntaxError("expected exactly two '/' separators", text,
                               slashes[2] if len(slashes) > 2 else body_end)
    s1, s2 = slashes
    semi = [i for i in range(body_start, s1) if text[i] == ";"]
    if len(semi) > 1:
        raise FaultSyntaxError("more than one ';'", text, semi[1])
    if semi:
        aggressor = _parse_sensitizer(text, body_start, semi[0], text)
        victim = _parse_sensitizer(text, semi[0] + 1, s1, text)
    else:
        aggressor = None
        victim = _parse_sensitizer(text, body_start, s1, text)
    f_text = text[s1 + 1:s2].strip()
    if f_text not in ("0", "1"):
        raise FaultSyntaxError("fault value must be 0 or 1", text, s1 + 1)
    r_text = text[s2 + 1:body_end].strip()
    if r_text not in ("0", "1", "-"):
        raise FaultSyntaxError("read output must be 0, 1 or -", text, s2 + 1)
    read_out = None if r_text == "-" else int(r_text)
    fp = FaultPrimitive(victim, int(f_text), read_out, aggressor)
    _validate(fp, text, s2 + 1)
    return fp


def _validate(fp: FaultPrimitive, text: str, r_pos: int) -> None:
    v, a = fp.victim, fp.aggressor
    last_is_read = bool(v.ops) and v.ops[-1][0] == "r"
    if fp.read_out is not None and not last_is_read:
        raise FaultSemanticError("read output given but the victim is not read", text, r_pos)
    if a is not None and a.ops and v.ops:
        raise FaultSemanticError("only one of aggressor/victim may carry operations", text)
    good_value = v.state_after(len(v.ops))
    good_read = v.state_after(len(v.ops)) if last_is_read else None
    if fp.effect == good_value and fp.read_out in (None, good_read):
        raise FaultSemanticError("primitive describes fault-free behaviour", text)


def unparse_fp(fp: FaultPrimitive) -> str:
    return str(fp)


def _catalog_entries() -> list[tuple[str, str]]:
    single = [
        ("SF0", "<1/0/->"), ("SF1", "<0/1/->"),
        ("TF0", "<0w1/0/->"), ("TF1", "<1w0/1/->"),
        ("WDF0", "<0w0/1/->"), ("WDF1", "<1w1/0/->"),
        ("RDF0", "<0r0/1/1>"), ("RDF1", "<1r1/0/0>"),
        ("DRDF0", "<0r0/1/0>"), ("DRDF1", "<1r1/0/1>"),
        ("IRF0", "<0r0/0/1>"), ("IRF1", "<1r1/1/0>"),
    ]
    two = []
    for a in "01":
        two += [(f"CFst{a}0", f"<{a};0/1/->"), (f"CFst{a}1", f"<{a};1/0/->")]
    for sa in ("0w1", "1w0", "0r0", "1r1"):
        for v in "01":
            two.append((f"CFds{sa}{v}", f"<{sa};{v}/{1 - int(v)}/->"))
    for a in "01":
        two += [(f"CFtr{a}0", f"<{a};0w1/0/->"), (f"CFtr{a}1", f"<{a};1w0/1/->")]
    for a in "01":
        two += [(f"CFwd{a}0", f"<{a};0w0/1/->"), (f"CFwd{a}1", f"<{a};1w1/0/->")]
    for a in "01":
        two += [(f"CFrd{a}0", f"<{a};0r0/1/1>"), (f"CFrd{a}1", f"<{a};1r1/0/0>")]
    for a in "01":
        two += [(f"CFdrd{a}0", f"<{a};0r0/1/0>"), (f"CFdrd{a}1", f"<{a};1r1/0/1>")]
    for a in "01":
        two += [(f"CFir{a}0", f"<{a};0r0/0/1>"), (f"CFir{a}1", f"<{a};1r1/1/0>")]
    return single + two


class FaultCatalog:
    """Ordered, uniquely named collection of primitives."""

    def __init__(self, entries: Iterable[tuple[str, FaultPrimitive]]):
        self.entries: list[tuple[str, FaultPrimitive]] = []
        seen = set()
        for name, fp in entries:
            if name in seen:
                raise ValueError(f"duplicate catalog name {name!r}")
            seen.add(name)
            self.entries.append((name, fp))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, name: str) -> FaultPrimitive:
        for n, fp in self.entries:
            if n == name:
                return fp
        raise KeyError(name)

    def names(self) -> list[str]:
        return [n for n, _ in self.entries]

    def name_of(self, fp: FaultPrimitive) -> str | None:
        for n, other in self.entries:
            if other == fp:
                return n
        return None

    def subset(self, names: Iterable[str]) -> FaultCatalog:
        return FaultCatalog((n, self[n]) for n in names)

    def single(self) -> FaultCatalog:
        return FaultCatalog(e for e in self.entries if not e[1].two_cell)

    def two_cell(self) -> FaultCatalog:
        return FaultCatalog(e for e in self.entries if e[1].two_cell)


DEFAULT_CATALOG = FaultCatalog((name, parse_fp(text)) for name, text in _catalog_entries())


def family(name: str) -> str:
    """``WDF0 -> WDF``, ``CFtr01 -> CFtr``, ``CFds0w11 -> CFds``."""
    m = re.match(r"(CF[a-z]+|[A-Z]+)", name)
    return m.group(1) if m else name


@dataclass(frozen=True)
class FaultInstance:
    name: str
    primitive: FaultPrimitive
    victim_cell: int
    victim_bit: int = 0
    aggressor_cell: int | None = None
    aggressor_bit: int | None = None

    def __post_init__(self):
        if self.primitive.two_cell != (self.aggressor_cell is not None):
            raise ValueError("aggressor location must be given exactly for two-cell primitives")
        if self.aggressor_cell is not None:
            if self.aggressor_bit is None:
                object.__setattr__(self, "aggressor_bit", 0)
            if (self.aggressor_cell, self.aggressor_bit) == (self.victim_cell, self.victim_bit):
                raise ValueError("aggressor and victim must be distinct bit cells")

    @property
    def victim(self) -> str:
        return f"{self.victim_cell}.{self.victim_bit}"

    @property
    def aggressor(self) -> str:
        if self.aggressor_cell is None:
            return ""
        return f"{self.aggressor_cell}.{self.aggressor_bit}"

    @property
    def id(self) -> str:
        if self.aggressor_cell is None:
            return f"{self.name}@{self.victim}"
        return f"{self.name}@{self.aggressor}>{self.victim}"

    def check(self, spec: MemorySpec) -> None:
        for cell, bit in ((self.victim_cell, self.victim_bit),
                          (self.aggressor_cell, self.aggressor_bit)):
            if cell is None:
                continue
            if not 0 <= cell < spec.n_cells or not 0 <= bit < spec.word_bits:
                raise ValueError(f"{self.id} does not fit {spec}")


PLACEMENTS = ("single", "pairs", "adjacent-pairs")


def enumerate_instances(catalog: FaultCatalog | Iterable[tuple[str, FaultPrimitive]],
                        spec: MemorySpec, mode: str = "pairs") -> list[FaultInstance]:
    """Bind primitives to locations.

    Single-cell primitives go to every bit cell.  Two-cell primitives go to
    every ordered pair of distinct bit cells (``pairs``) or to pairs whose
    linear bit indices ``cell * word_bits + bit`` differ by one
    (``adjacent-pairs``).  Under ``single`` two-cell primitives are skipped.
    """
    if mode not in PLACEMENTS:
        raise ValueError(f"placement must be one of {PLACEMENTS}, got {mode!r}")
    W = spec.word_bits
    bits = [(c, b) for c in range(spec.n_cells) for b in range(W)]
    out = []
    for name, fp in catalog:
        if not fp.two_cell:
            out += [FaultInstance(name, fp, c, b) for c, b in bits]
            continue
        if mode == "single":
            continue
        for vc, vb in bits:
            for ac, ab in bits:
                if (ac, ab) == (vc, vb):
                    continue
                if mode == "adjacent-pairs" and abs((ac * W + ab) - (vc * W + vb)) != 1:
                    continue
                out.append(FaultInstance(name, fp, vc, vb, ac, ab))
    return out


class FaultyMemory:
    """Wraps a :class:`Memory` and perturbs accesses per the active instances.

    Operation-sensitized primitives fire on the matching access; two-operation
    sensitizers need the previous access to the same cell to match the first
    operation.  State primitives are re-applied after every access and once
    when the wrapper is installed.
    """

    def __init__(self, memory: Memory, instances: Sequence[FaultInstance] = ()):
        self.memory = memory
        self.instances = tuple(instances)
        for inst in self.instances:
            inst.check(memory.spec)
        self._op = [i for i in self.instances if not i.primitive.is_state_fault]
        self._state = [i for i in self.instances if i.primitive.is_state_fault]
        # cell -> (kind, old word, data word) of the most recent access
        self._last: dict[int, tuple[str, int, int]] = {}
        self.initial_cells = list(memory.cells)
        self.install_notes = self._enforce_state_faults()

    @property
    def spec(self) -> MemorySpec:
        return self.memory.spec

    @property
    def cells(self) -> list[int]:
        return self.memory.cells

    @property
    def trace(self):
        return self.memory.trace

    @property
    def cycle(self) -> int:
        return self.memory.cycle

    @cycle.setter
    def cycle(self, value: int) -> None:
        self.memory.cycle = value

    def read(self, address: int) -> int:
        return self._access("r", address, None)

    def write(self, address: int, value: int) -> None:
        self._access("w", address, value)

    def fill(self, value: int) -> None:
        for a in range(self.spec.n_cells):
            self.write(a, value)

    def _matches(self, sens: Sensitizer, cell: int, bit: int, kind: str,
                 old: int, data: int) -> bool:
        """Does this access (plus the cell's previous one) complete ``sens``?"""
        n = len(sens.ops)
        last_kind, last_data = sens.ops[-1]
        if kind != last_kind or (data >> bit & 1) != last_data:
            return False
        if (old >> bit & 1) != sens.state_after(n - 1):
            return False
        if n == 1:
            return True
        prev = self._last.get(cell)
        if prev is None:
            return False
        p_kind, p_old, p_data = prev
        first_kind, first_data = sens.ops[0]
        return (p_kind == first_kind and (p_data >> bit & 1) == first_data
                and (p_old >> bit & 1) == sens.init)

    def _access(self, kind: str, address: int, value: int | None) -> int | None:
        mem = self.memory
        mem._check_address(address)
        if kind == "w":
            mem._check_value(value)
        cells = mem.cells
        old = cells[address]
        data = value if kind == "w" else old
        new = data
        returned = old
        notes = []
        remote: list[tuple[int, int, int]] = []
        for inst in self._op:
            fp = inst.primitive
            if fp.victim.ops:
                if inst.victim_cell != address:
                    continue
                if not self._matches(fp.victim, address, inst.victim_bit, kind, old, data):
                    continue
                if fp.aggressor is not None and \
                        (cells[inst.aggressor_cell] >> inst.aggressor_bit & 1) != fp.aggressor.init:
                    continue
                vb = 1 << inst.victim_bit
                new = (new & ~vb) | (vb if fp.effect else 0)
                if kind == "r" and fp.read_out is not None:
                    returned = (returned & ~vb) | (vb if fp.read_out else 0)
                notes.append(f"{inst.id} fired")
            else:
                if inst.aggressor_cell != address:
                    continue
                if not self._matches(fp.aggressor, address, inst.aggressor_bit, kind, old, data):
                    continue
                if (cells[inst.victim_cell] >> inst.victim_bit & 1) != fp.victim.init:
                    continue
                if inst.victim_cell == address:
                    vb = 1 << inst.victim_bit
                    new = (new & ~vb) | (vb if fp.effect else 0)
                else:
                    remote.append((inst.victim_cell, inst.victim_bit, fp.effect))
                notes.append(f"{inst.id} fired")
        cells[address] = new
        for cell, bit, effect in remote:
            cells[cell] = (cells[cell] & ~(1 << bit)) | (effect << bit)
        self._last[address] = (kind, old, data)
        if self._state:
            notes += self._enforce_state_faults()
        if kind == "r":
            mem.trace.append(Access("r", address, returned, mem.cycle, tuple(notes)))
            return returned
        mem.trace.append(Access("w", address, value, mem.cycle, tuple(notes)))
        return None

    def _enforce_state_faults(self) -> list[str]:
        cells = self.memory.cells
        notes = []
        for inst in self._state:
            fp = inst.primitive
            if (cells[inst.victim_cell] >> inst.victim_bit & 1) != fp.victim.init:
                continue
            if fp.aggressor is not None and \
                    (cells[inst.aggressor_cell] >> inst.aggressor_bit & 1) != fp.aggressor.init:
                continue
            vb = 1 << inst.victim_bit
            cells[inst.victim_cell] = (cells[inst.victim_cell] & ~vb) | (vb if fp.effect else 0)
            notes.append(f"{inst.id} forced")
        return notes


def faulty_read(mem: FaultyMemory, address: int) -> int:
    return mem.read(address)


def faulty_write(mem: FaultyMemory, address: int, value: int) -> None:
    mem.write(address, value)


# -- fault-list files -------------------------------------------------------

@dataclass(frozen=True)
class FaultListEntry:
    name: str
    primitive: FaultPrimitive
    cell: tuple[int, int] | None = None
    pair: tuple[tuple[int, int], tuple[int, int]] | None = None  # (aggressor, victim)
    line: int = 0


class FaultListError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


_LINE = re.compile(
    r"^(?:(?P<name>[A-Za-z_][\w.-]*)\s*:\s*)?(?P<fp><[^>]*>)"
    r"\s*(?:@(?P<kind>cell|pair)\s*\((?P<args>[^)]*)\))?\s*$"
)


def _loc(text: str) -> tuple[int, int]:
    cell, _, bit = text.strip().partition(".")
    return int(cell), int(bit or 0)


def parse_fault_list(text: str, catalog: FaultCatalog = DEFAULT_CATALOG) -> list[FaultListEntry]:
    """Parse a fault-list file body.

    One primitive per line, ``#`` starts a comment.  A line may carry a name
    (``NAME: <...>``) and a binding (``@cell(3)``, ``@cell(3.1)``,
    ``@pair(2,3)`` meaning aggressor 2, victim 3).  Unnamed primitives take
    their catalog name when they match one, else their canonical text.
    """
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise FaultListError(f"cannot parse {line!r}", lineno)
        try:
            fp = parse_fp(m.group("fp"))
        except FaultSyntaxError as exc:
            raise FaultListError(str(exc), lineno) from None
        name = m.group("name") or catalog.name_of(fp) or str(fp)
        cell = pair = None
        if m.group("kind"):
            try:
                args = [_loc(a) for a in m.group("args").split(",")]
            except ValueError:
                raise FaultListError(f"bad binding {m.group('args')!r}", lineno) from None
            if m.group("kind") == "cell":
                if len(args) != 1 or fp.two_cell:
                    raise FaultListError("@cell takes one location and a single-cell primitive", lineno)
                cell = args[0]
            else:
                if len(args) != 2 or not fp.two_cell:
                    raise FaultListError("@pair takes two locations and a two-cell primitive", lineno)
                pair = (args[0], args[1])
        entries.append(FaultListEntry(name, fp, cell, pair, lineno))
    return entries


def load_fault_list(path: str | Path) -> list[FaultListEntry]:
    return parse_fault_list(Path(path).read_text())


def instances_from_entries(entries: Sequence[FaultListEntry], spec: MemorySpec,
                           mode: str = "pairs") -> list[FaultInstance]:
    out = []
    for e in entries:
        if e.cell is not None:
            inst = FaultInstance(e.name, e.primitive, *e.cell)
        elif e.pair is not None:
            (ac, ab), (vc, vb) = e.pair
            inst = FaultInstance(e.name, e.primitive, vc, vb, ac, ab)
        else:
            out += enumerate_instances([(e.name, e.primitive)], spec, mode)
            continue
        try:
            inst.check(spec)
        except ValueError as exc:
            raise FaultListError(str(exc), e.line) from None
        out.append(inst)
    return out

"""March-test notation and interpreter.

ASCII grammar::

    algorithm := element (';' element)*
    element   := dir ['{' [start ':'] count '}'] '(' op (',' op)* ')'
    dir       := 'u' | 'd' | 'a'            # up, down, any (run as up)
    op        := ('r' | 'w') ('0' | '1')    # classic; 1 means the all-ones word
               | 'rx'                       # read, expect the shadow value
               | 'r[' index ']'
               | 'w[' index ']=' expr
    index     := 'i' [('+' | '-') INT]
    expr      := term ('^' term)*
    term      := [INT '*'] 'r[' index ']' | INT | 'f(' ref (',' ref)* ')'

Indices are offsets along the element's traversal order, taken modulo the
array size, so ``d(r[i], r[i+1], w[i+2]=r[i]^r[i+1])`` walks downwards
reading two cells and writing their sum into the third.  ``f(...)`` applies
the feedback function bound to the algorithm.  Products ``c*r[...]`` use the
algorithm's field.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .engine import Feedback, IterationConfig
from .faults import FaultInstance, FaultyMemory
from .galois import FeedbackSpec, FieldSpec
from .memory import Memory, MemorySpec


class MarchSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}: {text!r}")


class MarchError(ValueError):
    pass


@dataclass(frozen=True)
class Ref:
    offset: int

    def __str__(self) -> str:
        if self.offset == 0:
            return "r[i]"
        sign = "+" if self.offset > 0 else "-"
        return f"r[i{sign}{abs(self.offset)}]"


@dataclass(frozen=True)
class Term:
    """``coeff * ref``, a constant (``ref is None``), or ``f(args)``."""

    coeff: int = 1
    ref: Ref | None = None
    args: tuple[Ref, ...] | None = None

    def __str__(self) -> str:
        if self.args is not None:
            return "f(" + ",".join(map(str, self.args)) + ")"
        if self.ref is None:
            return str(self.coeff)
        return str(self.ref) if self.coeff == 1 else f"{self.coeff}*{self.ref}"

    def refs(self) -> tuple[Ref, ...]:
        if self.args is not None:
            return self.args
        return () if self.ref is None else (self.ref,)


@dataclass(frozen=True)
class Op:
    kind: str  # "r" or "w"
    offset: int = 0
    value: int | None = None  # classic r0/r1/w0/w1
    expr: tuple[Term, ...] | None = None  # computed write
    indexed: bool = False

    def __str__(self) -> str:
        if not self.indexed:
            if self.value is None:
                return "rx"
            return f"{self.kind}{self.value}"
        where = str(Ref(self.offset))[2:-1]
        if self.kind == "r":
            return f"r[{where}]"
        return f"w[{where}]=" + "^".join(map(str, self.expr))


@dataclass(frozen=True)
class Element:
    direction: str
    ops: tuple[Op, ...]
    start: int = 0
    count: int | None = None

    def __str__(self) -> str:
        head = self.direction
        if self.count is not None:
            head += f"{{{self.count}}}" if self.start == 0 else f"{{{self.start}:{self.count}}}"
        return head + "(" + ", ".join(map(str, self.ops)) + ")"


@dataclass(frozen=True)
class MarchAlgorithm:
    elements: tuple[Element, ...]
    field: FieldSpec | None = None
    feedback: Feedback | None = dc_field(default=None, compare=False)

    def __str__(self) -> str:
        return "; ".join(map(str, self.elements))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: int | None = None):
        raise MarchSyntaxError(message, self.text, self.pos if pos is None else pos)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def accept(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def integer(self) -> int:
        self.skip()
        m = re.compile(r"\d+").match(self.text, self.pos)
        if not m:
            self.error("expected an integer")
        self.pos = m.end()
        return int(m.group())

    def algorithm(self) -> tuple[Element, ...]:
        if not self.peek():
            self.error("empty algorithm")
        elements = [self.element()]
        while self.accept(";"):
            if not self.peek():
                break
            elements.append(self.element())
        if self.peek():
            self.error("unexpected text")
        return tuple(elements)

    def element(self) -> Element:
        start_pos = self.pos
        d = self.peek()
        if d not in ("u", "d", "a"):
            self.error("expected direction u, d or a")
        self.pos += 1
        start, count = 0, None
        if self.accept("{"):
            first = self.integer()
            if self.accept(":"):
                start, count = first, self.integer()
            else:
                count = first
            if count < 1:
                self.error("element count must be positive")
            self.expect("}")
        self.expect("(")
        ops = [self.op()]
        while self.accept(","):
            ops.append(self.op())
        self.expect(")")
        self._check_refs(ops, start_pos)
        return Element(d, tuple(ops), start, count)

    def _check_refs(self, ops: Sequence[Op], pos: int) -> None:
        seen = set()
        for op in ops:
            if op.kind == "r":
                seen.add(op.offset)
            elif op.expr is not None:
                for term in op.expr:
                    for ref in term.refs():
                        if ref.offset not in seen:
                            self.error(f"{ref} used before it is read in the element", pos)

    def index(self) -> int:
        self.expect("[")
        if self.peek() != "i":
            self.error("expected index variable i")
        self.pos += 1
        offset = 0
        if self.accept("+"):
            offset = self.integer()
        elif self.accept("-"):
            offset = -self.integer()
        self.expect("]")
        return offset

    def ref(self) -> Ref:
        if self.peek() != "r":
            self.error("expected r[...]")
        self.pos += 1
        return Ref(self.index())

    def op(self) -> Op:
        kind = self.peek()
        if kind not in ("r", "w"):
            self.error("expected r or w")
        self.pos += 1
        nxt = self.text[self.pos] if self.pos < len(self.text) else ""
        if nxt in "01" and nxt:
            self.pos += 1
            return Op(kind, value=int(nxt))
        if kind == "r" and nxt in ("x", "X") and nxt:
            self.pos += 1
            return Op("r")
        offset = self.index()
        if kind == "r":
            return Op("r", offset, indexed=True)
        self.expect("=")
        terms = [self.term()]
        while self.accept("^"):
            terms.append(self.term())
        return Op("w", offset, expr=tuple(terms), indexed=True)

    def term(self) -> Term:
        ch = self.peek()
        if ch == "f":
            self.pos += 1
            self.expect("(")
            args = [self.ref()]
            while self.accept(","):
                args.append(self.ref())
            self.expect(")")
            return Term(args=tuple(args))
        if ch.isdigit():
            c = self.integer()
            if self.accept("*"):
                return Term(c, self.ref())
            return Term(c)
        return Term(1, self.ref())


def parse_march(text: str, field: FieldSpec | None = None,
                feedback: Feedback | None = None) -> MarchAlgorithm:
    return MarchAlgorithm(_Parser(text).algorithm(), field, feedback)


def unparse_march(alg: MarchAlgorithm) -> str:
    return str(alg)


@dataclass(frozen=True)
class ReadRecord:
    element: int
    address: int
    expected: int
    actual: int

    @property
    def mismatch(self) -> bool:
        return self.expected != self.actual


@dataclass
class MarchRun:
    reads: list[ReadRecord]

    @property
    def detected(self) -> bool:
        return any(r.mismatch for r in self.reads)

    def element_detected(self, index: int) -> bool:
        if index < 0:
            index += 1 + max((r.element for r in self.reads), default=-1)
        return any(r.mismatch for r in self.reads if r.element == index)


def _eval(alg: MarchAlgorithm, terms: Sequence[Term], values: dict[int, int]) -> int:
    acc = 0
    for term in terms:
        if term.args is not None:
            if alg.feedback is None:
                raise MarchError("f(...) used but no feedback function is bound")
            acc ^= alg.feedback.next([values[r.offset] for r in term.args])
        elif term.ref is None:
            acc ^= term.coeff
        elif term.coeff in (0, 1):
            acc ^= values[term.ref.offset] if term.coeff else 0
        else:
            if alg.field is None:
                raise MarchError(f"coefficient {term.coeff} needs a field")
            acc ^= alg.field.mul(term.coeff, values[term.ref.offset])
    return acc


def execute_march(alg: MarchAlgorithm, mem: Memory | FaultyMemory) -> MarchRun:
    """Run ``alg`` on ``mem`` and log every read against a fault-free shadow.

    Classic ``r0``/``r1`` expect their literal value; indexed reads and ``rx``
    expect the shadow's content.  Computed writes use the values actually
    read, the shadow uses its own.
    """
    n = mem.spec.n_cells
    mask = mem.spec.mask
    shadow = list(getattr(mem, "initial_cells", mem.cells))
    reads = []
    for e_index, element in enumerate(alg.elements):
        order = range(n - 1, -1, -1) if element.direction == "d" else range(n)
        order = list(order)
        count = n if element.count is None else element.count
        for s in range(element.start, element.start + count):
            actual: dict[int, int] = {}
            good: dict[int, int] = {}
            for op in element.ops:
                addr = order[(s + op.offset) % n]
                if op.kind == "r":
                    v = mem.read(addr)
                    if op.indexed or op.value is None:
                        expected = shadow[addr]
                    else:
                        expected = mask if op.value else 0
                    actual[op.offset] = v
                    good[op.offset] = shadow[addr]
                    reads.append(ReadRecord(e_index, addr, expected, v))
                else:
                    if op.indexed:
                        v = _eval(alg, op.expr, actual) & mask
                        shadow[addr] = _eval(alg, op.expr, good) & mask
                    else:
                        v = mask if op.value else 0
                        shadow[addr] = v
                    mem.write(addr, v)
                mem.cycle += 1
    return MarchRun(reads)


@dataclass
class MarchReport:
    results: list[tuple[FaultInstance, MarchRun]]

    @property
    def detected(self) -> dict[str, bool]:
        return {inst.id: run.detected for inst, run in self.results}

    def coverage(self) -> float | None:
        if not self.results:
            return None
        return sum(run.detected for _, run in self.results) / len(self.results)


def run_march(alg: MarchAlgorithm, mem: Memory | MemorySpec,
              instances: Sequence[FaultInstance]) -> MarchReport:
    """One simulation per instance, each on a private copy of ``mem``."""
    template = Memory.new(mem) if isinstance(mem, MemorySpec) else mem
    results = []
    for inst in instances:
        target = FaultyMemory(template.copy(), [inst])
        results.append((inst, execute_march(alg, target)))
    return MarchReport(results)


def _element_dir(cfg: IterationConfig) -> str:
    if cfg.trajectory.kind == "pseudorandom":
        raise MarchError("March notation needs a monotone address order")
    return "u" if cfg.trajectory.kind == "up" else "d"


def pi_push_element(cfg: IterationConfig) -> Element:
    """The single-element March form of the push phase."""
    d = _element_dir(cfg)
    if cfg.inversion != "none":
        raise MarchError("only inversion 'none' has a March form")
    if not isinstance(cfg.feedback, FeedbackSpec):
        raise MarchError("lane networks have no single-field March form")
    if cfg.k > 4:
        raise MarchError(f"k={cfg.k} exceeds the supported maximum of 4")
    ops = [Op("r", j, indexed=True) for j in range(cfg.k)]
    terms = tuple(Term(c, Ref(j)) for j, c in enumerate(cfg.feedback.coeffs) if c)
    ops.append(Op("w", cfg.k, expr=terms, indexed=True))
    return Element(d, tuple(ops), 0, cfg.steps)


def pi_as_march(cfg: IterationConfig) -> MarchAlgorithm:
    """Whole iteration as March elements: seed writes, push, final-window reads.

    The middle element is the push phase; the first and last make the access
    trace match the engine's init and unload phases.
    """
    push = pi_push_element(cfg)
    d = push.direction
    seed_ops = tuple(
        Op("w", j, expr=(Term(v),), indexed=True) for j, v in enumerate(cfg.seed))
    init = Element(d, seed_ops, 0, 1)
    start = cfg.steps or 0
    unload = Element(d, tuple(Op("r", j, indexed=True) for j in range(cfg.k)), start, 1)
    return MarchAlgorithm((init, push, unload), cfg.feedback.field, cfg.feedback)


MATS_PLUS = "a(w0); u(r0, w1); d(r1, w0)"

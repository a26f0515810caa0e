import pytest
from hypothesis import given, strategies as st

from pseudoring.memory import (
    AddressError,
    MemorySpec,
    ValueRangeError,
    cycles_per_step,
    mem_new,
    mem_read,
    mem_write,
)


def test_new_zero_fill():
    assert mem_new(MemorySpec(4), 0).cells == [0, 0, 0, 0]


def test_new_word_fill():
    assert mem_new(MemorySpec(2, word_bits=4), 15).cells == [15, 15]


def test_fill_out_of_range():
    with pytest.raises(ValueRangeError):
        mem_new(MemorySpec(1), 2)


def test_write_then_read():
    mem = mem_new(MemorySpec(4, 4))
    mem_write(mem, 1, 7)
    assert mem_read(mem, 1) == 7


def test_read_past_end():
    mem = mem_new(MemorySpec(4))
    with pytest.raises(AddressError):
        mem_read(mem, 4)
    with pytest.raises(AddressError):
        mem_read(mem, -1)


def test_write_value_range():
    mem = mem_new(MemorySpec(4, 2))
    with pytest.raises(ValueRangeError):
        mem_write(mem, 0, 4)


def test_trace_contract():
    mem = mem_new(MemorySpec(4, 4))
    mem_write(mem, 1, 7)
    assert len(mem.trace) == 1
    acc = mem.trace[0]
    assert (acc.op, acc.address, acc.value) == ("w", 1, 7)
    mem_read(mem, 1)
    assert mem.trace[1].key() == ("r", 1, 7)


@pytest.mark.parametrize("kwargs", [
    dict(n_cells=0), dict(n_cells=4, word_bits=0), dict(n_cells=4, word_bits=17),
    dict(n_cells=4, read_ports=3), dict(n_cells=4, write_ports=2),
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueRangeError):
        MemorySpec(**kwargs)


@pytest.mark.parametrize("k,ports,cost", [(1, 1, 2), (2, 1, 3), (2, 2, 2), (4, 1, 5), (4, 2, 3), (3, 2, 3)])
def test_cycles_per_step(k, ports, cost):
    assert cycles_per_step(k, ports) == cost


@given(st.integers(1, 16), st.data())
def test_last_write_wins(word_bits, data):
    spec = MemorySpec(8, word_bits)
    mem = mem_new(spec)
    model = [0] * 8
    ops = data.draw(st.lists(st.tuples(st.integers(0, 7), st.integers(0, spec.mask)), max_size=40))
    for a, v in ops:
        mem_write(mem, a, v)
        model[a] = v
    assert [mem_read(mem, a) for a in range(8)] == model
    assert len(mem.trace) == len(ops) + 8


def test_copy_is_independent():
    mem = mem_new(MemorySpec(3))
    dup = mem.copy()
    mem_write(dup, 0, 1)
    assert mem.cells == [0, 0, 0] and mem.trace == []

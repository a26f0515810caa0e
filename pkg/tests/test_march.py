import pytest

from pseudoring.engine import IterationConfig, Trajectory, run_iteration
from pseudoring.faults import DEFAULT_CATALOG, FaultInstance, FaultyMemory, enumerate_instances
from pseudoring.galois import GF2, FeedbackSpec, FieldSpec
from pseudoring.march import (
    MATS_PLUS,
    MarchError,
    MarchSyntaxError,
    execute_march,
    parse_march,
    pi_as_march,
    pi_push_element,
    run_march,
    unparse_march,
)
from pseudoring.memory import Memory, MemorySpec

SINGLE = DEFAULT_CATALOG.single()


class TestParse:
    def test_mats_plus(self):
        alg = parse_march("a(w0); u(r0,w1); d(r1,w0)")
        assert [e.direction for e in alg.elements] == ["a", "u", "d"]
        assert [len(e.ops) for e in alg.elements] == [1, 2, 2]
        assert unparse_march(alg) == MATS_PLUS

    def test_pi_element(self):
        alg = parse_march("u(r[i], r[i+1], w[i+2]=f(r[i],r[i+1]))")
        (e,) = alg.elements
        assert [op.offset for op in e.ops] == [0, 1, 2]
        assert e.ops[2].expr[0].args is not None

    def test_counts_and_coefficients(self):
        alg = parse_march("d{3:5}(r[i], r[i+1], w[i+2]=2*r[i]^r[i+1]^1); u{2}(rx)", FieldSpec(19))
        e0, e1 = alg.elements
        assert (e0.start, e0.count, e1.start, e1.count) == (3, 5, 0, 2)
        assert parse_march(unparse_march(alg), FieldSpec(19)) == alg

    @pytest.mark.parametrize("text", ["", "   ", "x(w0)", "u(w2)", "u(r0", "u()", "u(w[i]=r[i+1])",
                                      "u{0}(r0)", "u(r0) trailing", "u(w[j]=1)"])
    def test_errors(self, text):
        with pytest.raises(MarchSyntaxError):
            parse_march(text)

    def test_error_position(self):
        with pytest.raises(MarchSyntaxError) as info:
            parse_march("u(r0); d(q1)")
        assert info.value.position == 9


class TestExecute:
    def test_mats_fault_free(self):
        report = run_march(parse_march(MATS_PLUS), MemorySpec(8), [])
        assert report.coverage() is None
        run = execute_march(parse_march(MATS_PLUS), Memory.new(MemorySpec(8)))
        assert not run.detected and len(run.reads) == 16

    def test_mats_detects_stuck_at(self):
        insts = enumerate_instances(SINGLE.subset(["SF0", "SF1"]), MemorySpec(8), "single")
        report = run_march(parse_march(MATS_PLUS), MemorySpec(8), insts)
        assert len(insts) == 16 and all(report.detected.values())

    def test_mats_write_destructive(self):
        # on a zero fill only the opening w0 writes a value over itself
        insts = enumerate_instances(SINGLE.subset(["WDF0", "WDF1"]), MemorySpec(8), "single")
        flags = list(run_march(parse_march(MATS_PLUS), MemorySpec(8), insts).detected.values())
        assert flags == [True] * 8 + [False] * 8

    def test_write_only_detects_nothing(self):
        insts = enumerate_instances(SINGLE, MemorySpec(4), "single")
        assert not any(run_march(parse_march("u(w0)"), MemorySpec(4), insts).detected.values())

    def test_word_oriented_classic(self):
        run = execute_march(parse_march("u(w1); u(r1)"), Memory.new(MemorySpec(2, 4)))
        assert [r.expected for r in run.reads] == [15, 15] and not run.detected

    def test_coefficient_needs_field(self):
        with pytest.raises(MarchError):
            execute_march(parse_march("u(r[i], w[i+1]=2*r[i])"), Memory.new(MemorySpec(4, 4)))

    def test_feedback_needs_binding(self):
        with pytest.raises(MarchError):
            execute_march(parse_march("u(r[i], w[i+1]=f(r[i]))"), Memory.new(MemorySpec(4)))

    def test_element_detected(self):
        inst = FaultInstance("SF1", DEFAULT_CATALOG["SF1"], 2)
        mem = FaultyMemory(Memory.new(MemorySpec(4)), [inst])
        run = execute_march(parse_march("u(w0); u(r0); u(w1); u(r1)"), mem)
        assert run.element_detected(1) and not run.element_detected(-1)


class TestPiAsMarch:
    def test_k2_down(self):
        cfg = IterationConfig(FeedbackSpec(GF2, (1, 1)), (1, 0), Trajectory("down"))
        assert str(pi_push_element(cfg)) == "d(r[i], r[i+1], w[i+2]=r[i]^r[i+1])"

    def test_k1_up(self):
        cfg = IterationConfig(FeedbackSpec(GF2, (1,)), (1,))
        assert str(pi_push_element(cfg)) == "u(r[i], w[i+1]=r[i])"

    def test_three_elements(self):
        cfg = IterationConfig(FeedbackSpec(GF2, (1, 1)), (1, 0), steps=5)
        init, push, unload = pi_as_march(cfg).elements
        assert init.count == 1 and push.count == 5 and unload.start == 5

    @pytest.mark.parametrize("kw", [dict(trajectory=Trajectory("pseudorandom")), dict(inversion="input")])
    def test_unsupported(self, kw):
        with pytest.raises(MarchError):
            pi_as_march(IterationConfig(FeedbackSpec(GF2, (1, 1)), (1, 0), **kw))

    def test_gf16_fault_free_trace(self):
        cfg = IterationConfig(FeedbackSpec(FieldSpec(19), (2, 2)), (3, 5))
        a, b = Memory.new(MemorySpec(9, 4)), Memory.new(MemorySpec(9, 4))
        run_iteration(a, cfg)
        run = execute_march(pi_as_march(cfg), b)
        assert [x.key() for x in a.trace] == [x.key() for x in b.trace]
        assert not run.detected


@pytest.mark.parametrize("kind", ["up", "down"])
def test_engine_march_trace_sample(kind):
    """Spot check at N=16; the acceptance suite runs the full sweep."""
    cfg = IterationConfig(FeedbackSpec(GF2, (1, 1)), (1, 0), Trajectory(kind))
    alg = pi_as_march(cfg)
    for inst in enumerate_instances(SINGLE.subset(["TF0", "RDF1", "SF1"]), MemorySpec(16), "single"):
        a = FaultyMemory(Memory.new(MemorySpec(16)), [inst])
        b = FaultyMemory(Memory.new(MemorySpec(16)), [inst])
        out = run_iteration(a, cfg)
        run = execute_march(alg, b)
        assert [x.key() for x in a.trace] == [x.key() for x in b.trace]
        assert out.detected == run.detected

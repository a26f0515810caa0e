import csv
import io

import pytest

from pseudoring import cli
from pseudoring.config import ConfigFileError, dump_config, load_config, parse_config
from pseudoring.coverage import CSV_COLUMNS, CoverageReport, run_coverage
from pseudoring.engine import InternalConsistencyError, LaneNetwork
from pseudoring.faults import DEFAULT_CATALOG, enumerate_instances
from pseudoring.romsig import DEFAULT_FIELD, gen_table

from oracles import DATA

BASIC = """
[memory]
n_cells = 8
word_bits = 1

[faults]
placement = adjacent-pairs

[iteration]   # x^4 + x + 1 as a bit register
q = 0b10011
seed = 1,0,0,0

[iteration]
q_coeffs = 1,1
seed = 0,1
trajectory = pseudorandom
addr_seed = 3
inversion = input
misr_poly = 7
steps = 12
refill = 1
"""


class TestParseConfig:
    def test_basic(self):
        exp = parse_config(BASIC)
        assert exp.spec.n_cells == 8 and exp.placement == "adjacent-pairs"
        first, second = exp.schedule.iterations
        assert first.feedback.coeffs == (1, 0, 0, 1) and first.scheme == "ring"
        assert second.trajectory.kind == "pseudorandom" and second.trajectory.addr_seed == 3
        assert (second.inversion, second.misr_poly, second.steps, second.refill) == ("input", 7, 12, 1)
        assert len(exp.digest) == 12

    def test_word_field_and_lanes(self):
        exp = parse_config("""
[memory]
n_cells = 6
word_bits = 5
[iteration]
lanes = 3/1,1; 19/2,2
seed = 1,2
""")
        fb = exp.schedule.iterations[0].feedback
        assert isinstance(fb, LaneNetwork) and fb.word_bits == 5

    def test_round_trip(self):
        exp = parse_config(BASIC)
        again = parse_config(dump_config(exp.spec, exp.schedule, exp.placement))
        assert again.schedule == exp.schedule and again.spec == exp.spec

    @pytest.mark.parametrize("text,line", [
        ("[memory]\nn_cells = 8\n[iteration]\nq_coeffs = 1,1\nbogus = 1\n", 5),
        ("[memory]\nn_cells = 8\n[iteration\n", 3),
        ("n_cells = 8\n", 1),
        ("[memory]\nn_cells = 8\n[iteration]\nq_coeffs = 1,1\nq_coeffs = 1,1\n", 5),
        ("[memory]\nn_cells = 8\n[memory]\n", 3),
        ("[memory]\nn_cells = 8\n\n[iteration]\nq_coeffs = 1,1\nseed = 0,0\n", 4),
        ("[memory]\nn_cells = 8\n[iteration]\nq_coeffs = 1,1\ntrajectory = sideways\n", 3),
        ("[memory]\nn_cells = 8\n[iteration]\nq = 1\n", 3),
        ("[memory]\nn_cells = 0\n", 2),
        ("[memory]\nn_cells = 8\n[faults]\nplacement = nowhere\n[iteration]\nq_coeffs = 1\n", 4),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(ConfigFileError) as info:
            parse_config(text)
        assert info.value.line == line

    def test_needs_iteration(self):
        with pytest.raises(ConfigFileError):
            parse_config("[memory]\nn_cells = 4\n")

    def test_fault_list_relative_to_config(self, tmp_path):
        (tmp_path / "sub").mkdir()
        cfg = tmp_path / "sub" / "exp.cfg"
        cfg.write_text(BASIC.replace("[faults]", "[faults]\nlist = sf.txt"))
        assert load_config(cfg).fault_list == str(tmp_path / "sub" / "sf.txt")


class TestCoverageReport:
    def test_rows_and_csv(self):
        exp = parse_config(BASIC)
        insts = enumerate_instances(DEFAULT_CATALOG, exp.spec, exp.placement)
        report = run_coverage(exp.spec, exp.schedule, insts)
        assert len(report.rows) == len(insts) == 12 * 8 + 32 * 14
        rows = list(csv.reader(io.StringIO(report.to_csv())))
        assert tuple(rows[0]) == CSV_COLUMNS and len(rows) == len(insts) + 1
        assert sum(r[-1] == "1" for r in rows[1:]) == sum(r.detected for r in report.rows)
        assert all(len(r[4]) == 2 for r in rows[1:])
        assert 0 <= report.r_single <= 1 and 0 <= report.r_two <= 1

    def test_parallel_matches_serial(self):
        exp = parse_config(BASIC)
        insts = enumerate_instances(DEFAULT_CATALOG, exp.spec, exp.placement)
        serial = run_coverage(exp.spec, exp.schedule, insts)
        parallel = run_coverage(exp.spec, exp.schedule, insts, jobs=2)
        assert serial.to_csv() == parallel.to_csv()

    def test_empty(self):
        report = CoverageReport([])
        assert report.r_single is None and "R_single: NA" in report.summary()
        assert report.weakest_family(False) is None

    def test_fault_free_sanity(self, monkeypatch):
        import pseudoring.coverage as cov
        exp = parse_config(BASIC)
        real = cov.run_schedule

        def broken(spec, schedule, instances=()):
            outs = real(spec, schedule, instances)
            outs[0].final_window = tuple(v ^ 1 for v in outs[0].final_window)
            return outs

        monkeypatch.setattr(cov, "run_schedule", broken)
        with pytest.raises(InternalConsistencyError):
            run_coverage(exp.spec, exp.schedule, [])


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestCli:
    def test_period(self, capsys):
        assert run_cli(capsys, "period", "--p", "19", "--q", "2,2") == (0, "255\n", "")

    def test_period_bit_register(self, capsys):
        assert run_cli(capsys, "period", "--q-poly", "19")[1] == "15\n"

    def test_field_table(self, capsys):
        code, out, _ = run_cli(capsys, "field-table", "--p", "19", "--c1", "1", "--c2", "9")
        lines = [ln[3:].replace(" ", "") for ln in (DATA / "sum_table.asm").read_text().splitlines()
                 if ln.startswith(".db")]
        assert code == 0 and out == "\n".join(lines) + "\n"

    def test_march_all_stuck_at_detected(self, capsys, tmp_path):
        sf = tmp_path / "sf.txt"
        sf.write_text("<1/0/->\n<0/1/->\n")
        code, out, _ = run_cli(capsys, "march", "--alg", "a(w0);u(r0,w1);d(r1,w0)",
                               "--n", "8", "--faults", str(sf))
        assert code == 0 and "detected 16/16" in out and "missed" not in out

    def test_romsig(self, capsys, tmp_path):
        rom = tmp_path / "rom.bin"
        rom.write_bytes(bytes([1, 0]))
        assert run_cli(capsys, "romsig", "--rom", str(rom))[1] == "01:01\n"

    def test_run(self, capsys, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(BASIC)
        code, out, _ = run_cli(capsys, "run", "--config", str(cfg))
        assert code == 0 and "detected: 0" in out and "faults injected: 0" in out

    def test_coverage_empty_list(self, capsys, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(BASIC)
        empty = tmp_path / "none.txt"
        empty.write_text("# nothing\n")
        out_csv = tmp_path / "out.csv"
        code, out, _ = run_cli(capsys, "coverage", "--config", str(cfg), "--faults", str(empty),
                               "--output", str(out_csv))
        assert code == 0
        assert "R_single: NA" in out and "R_two: NA" in out
        assert out_csv.read_text() == ",".join(CSV_COLUMNS) + "\n"

    def test_coverage_deterministic(self, capsys, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(BASIC)
        outs = []
        for i in range(2):
            path = tmp_path / f"o{i}.csv"
            run_cli(capsys, "coverage", "--config", str(cfg), "--output", str(path))
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    @pytest.mark.parametrize("argv", [
        ("period", "--p", "20", "--q", "2,2"),
        ("period", "--q", "x,y"),
        ("period",),
        ("run", "--config", "/nonexistent.cfg"),
        ("march", "--alg", "u(q0)"),
        ("march", "--alg", "u(r0)", "--alg-file", "x"),
        ("romsig", "--rom", "/nonexistent.bin"),
        ("romsig", "--rom", "/dev/null", "--seed", "zz"),
    ])
    def test_config_errors_exit_2(self, capsys, argv):
        code, _, err = run_cli(capsys, *argv)
        assert code == 2 and err.startswith("error:")

    def test_fault_list_error_exit_2(self, capsys, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(BASIC)
        bad = tmp_path / "bad.txt"
        bad.write_text("<1/0/->\n<9/0/->\n")
        code, _, err = run_cli(capsys, "coverage", "--config", str(cfg), "--faults", str(bad))
        assert code == 2 and "line 2" in err

    def test_internal_error_exit_3(self, capsys, tmp_path, monkeypatch):
        import pseudoring.coverage as cov

        def boom(spec, schedule):
            raise InternalConsistencyError("fault-free run flagged")

        monkeypatch.setattr(cov, "check_fault_free", boom)
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(BASIC)
        code, _, err = run_cli(capsys, "coverage", "--config", str(cfg))
        assert code == 3 and "internal-consistency" in err


def test_table_text_shape():
    text = gen_table(DEFAULT_FIELD).to_text()
    assert text.count("\n") == 16 and all(len(r.split(",")) == 16 for r in text.splitlines())

import math

import pytest

from latkit import ConfigError, LatticeShape, benchmark_run, emit_csv, report_best
from latkit.bench import CSV_HEADER, BenchResult, run_sweep
from latkit.cli import cli_main
from latkit.memory import TransferCounters


def fake_result(kernel="binary-collision", backend="threaded", vvl=1, workers=1,
                sites_per_s=100.0, elapsed=0.5):
    return BenchResult(kernel=kernel, backend=backend, nx=8, ny=8, nz=8,
                       vvl=vvl, workers=workers, tpb=128, iters=10,
                       elapsed_s=elapsed, sites_per_s=sites_per_s,
                       bandwidth_gb_s=1.0, counters=TransferCounters())


class TestEmitCsv:
    def test_single_result_two_lines(self):
        text = emit_csv([fake_result()])
        lines = text.strip().split("\n")
        assert len(lines) == 2
        assert lines[0] == CSV_HEADER

    def test_six_significant_digits(self):
        text = emit_csv([fake_result(sites_per_s=123456789.123, elapsed=0.001234567)])
        row = text.strip().split("\n")[1].split(",")
        assert float(row[-2]) == pytest.approx(0.001234567, rel=1e-6)
        assert float(row[-1]) == pytest.approx(123456789.123, rel=1e-6)

    def test_parse_round_trip(self):
        r = fake_result(sites_per_s=98765.4321, elapsed=1.23456789)
        row = emit_csv([r]).strip().split("\n")[1].split(",")
        assert row[:9] == ["binary-collision", "threaded", "8", "8", "8", "1", "1", "128", "10"]
        assert math.isclose(float(row[9]), r.elapsed_s, rel_tol=1e-8)
        assert math.isclose(float(row[10]), r.sites_per_s, rel_tol=1e-8)

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            emit_csv([])


class TestReportBest:
    def test_simple_speedup(self):
        rows = [fake_result(vvl=1, sites_per_s=100.0), fake_result(vvl=8, sites_per_s=150.0)]
        assert report_best(rows) == ["binary-collision/threaded: best VVL=8, 1.50x over VVL=1"]

    def test_tie_break_smallest_vvl(self):
        rows = [fake_result(vvl=v, sites_per_s=100.0) for v in (1, 2, 4, 8)]
        assert report_best(rows) == ["binary-collision/threaded: best VVL=1, 1.00x over VVL=1"]

    def test_missing_baseline(self):
        with pytest.raises(ConfigError):
            report_best([fake_result(vvl=8)])

    def test_groups_by_kernel_and_backend(self):
        rows = [fake_result(kernel=k, backend=b, vvl=v, sites_per_s=s)
                for k in ("scale", "binary-collision")
                for b, v, s in (("reference", 1, 10.0), ("reference", 4, 20.0))]
        lines = report_best(rows)
        assert len(lines) == 2
        assert all("best VVL=4, 2.00x" in line for line in lines)


class TestBenchmarkRun:
    def test_elapsed_positive_finite(self):
        r = benchmark_run("scale", LatticeShape(8, 8, 8), vvl=4, workers=1,
                          backend="reference", iterations=3)
        assert r.elapsed_s > 0 and math.isfinite(r.elapsed_s)
        assert r.sites_per_s > 0
        assert r.counters.launches == 4  # warm-up + 3 timed

    def test_repeatability_sanity(self):
        # two identical runs agree within 20% (timing sanity, not physics);
        # retried because shared CI boxes occasionally stall a whole run
        shape = LatticeShape(16, 16, 16)
        spreads = []
        for _ in range(3):
            a = benchmark_run("binary-collision", shape, 8, 1, "reference", 200)
            b = benchmark_run("binary-collision", shape, 8, 1, "reference", 200)
            spreads.append(abs(a.sites_per_s - b.sites_per_s)
                           / max(a.sites_per_s, b.sites_per_s))
            if spreads[-1] < 0.20:
                break
        assert min(spreads) < 0.20, f"throughput spread across repeats: {spreads}"

    def test_invalid_iterations(self):
        with pytest.raises(ConfigError):
            benchmark_run("scale", LatticeShape(4, 4, 4), 4, 1, "reference", 0)

    def test_sweep_order_and_count(self):
        rows = run_sweep("scale", LatticeShape(8, 8, 8), [1, 4], [1, 2],
                         ["reference"], iterations=2)
        assert [(r.backend, r.workers, r.vvl) for r in rows] == [
            ("reference", 1, 1), ("reference", 1, 4),
            ("reference", 2, 1), ("reference", 2, 4),
        ]

    def test_sweep_empty_list_rejected(self):
        with pytest.raises(ConfigError):
            run_sweep("scale", LatticeShape(8, 8, 8), [], [1], ["reference"], 1)


class TestCli:
    def test_sweep_row_count(self, capsys):
        code = cli_main(["--kernel", "scale", "--shape", "16x16x16",
                         "--vvl", "1,2,4,8", "--workers", "1,4",
                         "--backend", "threaded", "--iters", "100", "--csv"])
        out = capsys.readouterr().out
        assert code == 0
        rows = [l for l in out.strip().split("\n") if l.startswith("scale,")]
        assert len(rows) == 8

    def test_verify_passes(self, capsys):
        code = cli_main(["--verify", "--kernel", "binary-collision",
                         "--shape", "8x8x8", "--iters", "1", "--vvl", "1,4",
                         "--backend", "reference"])
        out = capsys.readouterr().out
        assert code == 0
        assert any(line.startswith("PASS equivalence") for line in out.split("\n"))
        assert any(line.startswith("PASS conservation") for line in out.split("\n"))

    def test_non_dividing_vvl(self, capsys):
        code = cli_main(["--vvl", "3", "--shape", "8x8x8"])
        err = capsys.readouterr().err
        assert code == 2
        assert "VVL must divide padded extent" in err

    def test_unknown_flag(self, capsys):
        assert cli_main(["--frobnicate"]) == 2

    def test_bad_shape(self, capsys):
        assert cli_main(["--shape", "8x8"]) == 2

    def test_bad_backend(self, capsys):
        assert cli_main(["--backend", "cuda"]) == 2

    def test_csv_to_file(self, tmp_path, capsys):
        path = tmp_path / "out.csv"
        code = cli_main(["--kernel", "scale", "--shape", "8x8x8", "--vvl", "1,2",
                         "--backend", "reference", "--iters", "2", "--csv", str(path)])
        assert code == 0
        lines = path.read_text().strip().split("\n")
        assert lines[0] == CSV_HEADER and len(lines) == 3

    def test_stats_line(self, capsys):
        code = cli_main(["--kernel", "scale", "--shape", "8x8x8", "--vvl", "1",
                         "--backend", "reference", "--iters", "2"])
        assert code == 0
        code = cli_main(["--kernel", "scale", "--shape", "8x8x8", "--vvl", "1",
                         "--backend", "reference", "--iters", "2", "--stats"])
        out = capsys.readouterr().out
        assert code == 0
        assert any(line.startswith("stats:") for line in out.split("\n"))

    def test_table_output_default(self, capsys):
        code = cli_main(["--kernel", "scale", "--shape", "8x8x8", "--vvl", "1,4",
                         "--backend", "reference", "--iters", "2"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.splitlines()[0].startswith("kernel")
        assert "best VVL=" in out

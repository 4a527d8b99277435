import csv
import io
import json
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pytest

import pdhg_lp as pl
from pdhg_lp.cli import main, shifted_geomean


def run_cli(argv, stdin_text=None, monkeypatch=None):
    """Invoke the CLI in-process, capturing stdout/stderr and the exit code."""
    out, err = io.StringIO(), io.StringIO()
    if stdin_text is not None:
        assert monkeypatch is not None
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin_text))
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def toy_mps(tmp_path):
    path = tmp_path / "toy.mps"
    path.write_text(pl.write_mps(pl.generate_bilinear_toy()))
    return str(path)


class TestGenerate:
    def test_toy_to_stdout_parses_back(self):
        code, out, _ = run_cli(["generate", "toy"])
        assert code == 0
        problem = pl.parse_mps(out)
        np.testing.assert_array_equal(problem.eq_rhs, [3.0])

    def test_pagerank_deterministic(self, tmp_path):
        a = tmp_path / "a.mps"
        b = tmp_path / "b.mps"
        assert main(["generate", "pagerank", "--nodes", "40", "--seed", "3", "--out", str(a)]) == 0
        assert main(["generate", "pagerank", "--nodes", "40", "--seed", "3", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        problem = pl.read_mps(a)
        assert problem.num_variables == 40
        assert problem.nnz == 8 * 40 - 18

    def test_pagerank_flags(self, tmp_path):
        path = tmp_path / "p.mps"
        code = main(
            ["generate", "pagerank", "--nodes", "12", "--degree", "2",
             "--damping", "0.7", "--seed", "5", "--out", str(path)]
        )
        assert code == 0
        problem = pl.read_mps(path)
        assert problem.name == "pagerank_n12_d2_seed5"
        np.testing.assert_allclose(problem.ineq_rhs, (1 - 0.7) / 12)

    def test_infeasible_toys(self):
        for kind in ("primal-infeasible-toy", "dual-infeasible-toy"):
            code, out, _ = run_cli(["generate", kind])
            assert code == 0
            pl.parse_mps(out)

    def test_bad_spec_exits_one(self):
        code, _, err = run_cli(["generate", "pagerank", "--nodes", "1"])
        assert code == 1
        assert "num_nodes" in err


class TestSolve:
    def test_optimal_exit_zero_and_json_report(self, toy_mps):
        code, out, _ = run_cli(["solve", toy_mps])
        assert code == 0
        doc = json.loads(out)
        assert doc["status"] == "optimal"
        assert doc["objective"]["primal"] == pytest.approx(0.0, abs=1e-8)
        assert doc["config"]["restart"] == "adaptive"
        assert doc["config"]["step_size"] == "adaptive"

    def test_flags_echoed_in_config(self, toy_mps):
        code, out, _ = run_cli(
            ["solve", toy_mps, "--tolerance", "1e-4", "--scaling", "none",
             "--restart", "none", "--step-size", "fixed=0.5",
             "--primal-weight", "fixed=2.0", "--max-iters", "5000"]
        )
        assert code == 0
        config = json.loads(out)["config"]
        assert config["tolerance"] == 1e-4
        assert config["scaling"] == "none"
        assert config["restart"] == "none"
        assert config["step_size"] == "fixed=0.5"
        assert config["primal_weight"] == "fixed=2.0"
        assert config["max_iters"] == 5000

    def test_stdin_input(self, monkeypatch):
        text = pl.write_mps(pl.generate_bilinear_toy())
        code, out, _ = run_cli(["solve", "-"], stdin_text=text, monkeypatch=monkeypatch)
        assert code == 0
        assert json.loads(out)["status"] == "optimal"

    def test_text_report(self, toy_mps):
        code, out, _ = run_cli(["solve", toy_mps, "--report-format", "text"])
        assert code == 0
        assert "status            optimal" in out

    def test_infeasible_exit_two(self, tmp_path):
        path = tmp_path / "inf.mps"
        path.write_text(pl.write_mps(pl.generate_primal_infeasible_toy()))
        code, out, _ = run_cli(["solve", str(path)])
        assert code == 2
        doc = json.loads(out)
        assert doc["status"] == "primal_infeasible"
        assert doc["certificate"]["margin"] >= 1e-8

    def test_iteration_limit_exit_three(self, toy_mps):
        code, out, _ = run_cli(
            ["solve", toy_mps, "--max-iters", "2", "--tolerance", "1e-16"]
        )
        assert code == 3
        assert json.loads(out)["status"] == "iteration_limit"

    def test_numerical_error_exit_four(self, toy_mps):
        # an enormous fixed step overflows immediately
        code, out, _ = run_cli(
            ["solve", toy_mps, "--scaling", "none", "--step-size", "fixed=1e200",
             "--restart", "none", "--max-iters", "100000"]
        )
        assert code == 4
        assert json.loads(out)["status"] == "numerical_error"

    def test_missing_file_exits_one(self):
        code, _, err = run_cli(["solve", "/nonexistent/file.mps"])
        assert code == 1
        assert "file.mps" in err

    def test_bad_mps_exits_one(self, tmp_path):
        path = tmp_path / "bad.mps"
        path.write_text("NOT AN MPS FILE\n")
        code, _, err = run_cli(["solve", str(path)])
        assert code == 1
        assert "line" in err

    def test_usage_error_exits_one(self):
        code, _, _ = run_cli([])
        assert code == 1
        code, _, _ = run_cli(["solve", "x.mps", "--no-such-flag"])
        assert code == 1
        code, _, _ = run_cli(["frobnicate"])
        assert code == 1

    def test_report_to_file_and_solution_npz(self, toy_mps, tmp_path):
        report_path = tmp_path / "report.json"
        npz_path = tmp_path / "solution.npz"
        code, out, _ = run_cli(
            ["solve", toy_mps, "--out", str(report_path), "--solution-out", str(npz_path)]
        )
        assert code == 0
        assert out == ""
        doc = json.loads(report_path.read_text())
        assert doc["status"] == "optimal"
        data = np.load(npz_path)
        np.testing.assert_allclose(data["x"], [3.0], atol=1e-6)
        assert set(data.files) >= {"x", "y", "reduced_costs"}

    def test_include_solution_inline(self, toy_mps):
        code, out, _ = run_cli(["solve", toy_mps, "--include-solution"])
        assert code == 0
        doc = json.loads(out)
        assert doc["solution"]["x"] == pytest.approx([3.0], abs=1e-6)


class TestBench:
    @pytest.fixture
    def instances(self, tmp_path):
        directory = tmp_path / "cases"
        directory.mkdir()
        for seed in (1, 2):
            spec = pl.PagerankSpec(num_nodes=30, seed=seed)
            (directory / f"pr{seed}.mps").write_text(pl.write_mps(pl.generate_pagerank(spec)))
        return directory

    def test_csv_schema_and_summary(self, instances, tmp_path):
        csv_path = tmp_path / "bench.csv"
        code, out, _ = run_cli(
            ["bench", str(instances), "--configs", "vanilla,full",
             "--tolerance", "1e-6", "--out", str(csv_path)]
        )
        assert code == 0
        rows = list(csv.DictReader(csv_path.read_text().splitlines()))
        assert len(rows) == 4  # 2 instances x 2 configs
        assert set(rows[0]) == {
            "instance", "config", "status", "iterations", "restarts",
            "matvecs", "wall_sec", "rel_kkt_final",
        }
        for row in rows:
            assert row["status"] == "optimal"
            assert int(row["iterations"]) > 0
        assert "geo iters" in out
        assert "vanilla" in out and "full" in out

    def test_parallel_jobs_match_serial(self, instances, tmp_path):
        a = tmp_path / "serial.csv"
        b = tmp_path / "parallel.csv"
        base = ["bench", str(instances), "--configs", "full", "--tolerance", "1e-6"]
        assert main(base + ["--out", str(a)]) == 0
        assert main(base + ["--out", str(b), "--jobs", "2"]) == 0

        def stable(path):
            rows = list(csv.DictReader(path.read_text().splitlines()))
            return sorted(
                (r["instance"], r["config"], r["status"], r["iterations"]) for r in rows
            )

        assert stable(a) == stable(b)

    def test_explicit_file_inputs(self, instances):
        files = sorted(str(p) for p in instances.iterdir())
        code, out, _ = run_cli(["bench", *files, "--configs", "scaled", "--tolerance", "1e-5"])
        assert code == 0
        assert "scaled" in out

    def test_unknown_config_rejected(self, instances):
        code, _, err = run_cli(["bench", str(instances), "--configs", "warp"])
        assert code == 1
        assert "warp" in err

    def test_empty_input_dir(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        code, _, err = run_cli(["bench", str(empty)])
        assert code == 1


class TestGeomean:
    def test_shifted_geomean_formula(self):
        # exp(mean(log(v + s))) - s, the standard benchmark aggregate
        vals = [10.0, 1000.0]
        want = np.exp(np.mean(np.log(np.array(vals) + 10.0))) - 10.0
        assert shifted_geomean(vals, 10.0) == pytest.approx(want)

    def test_empty_is_nan(self):
        assert np.isnan(shifted_geomean([], 10.0))

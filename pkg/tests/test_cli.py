import csv
import io
import json
import os

import pytest

from searchplan import Instance, save_json
from searchplan.cli import main

DATA_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "data",
                        "orienteering")


@pytest.fixture
def fixture_path(tmp_path):
    inst = Instance(points=[(0, 0), (1, 0)], priors=[0.6, 0.4],
                    false_negative=[0.5, 0.5], search_costs=[1, 1], budget=3,
                    name="two-point")
    path = tmp_path / "two_point.json"
    save_json(inst, str(path), source="unit")
    return str(path)


@pytest.fixture
def corpus_dir(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for k in range(3):
        inst = Instance(points=[(0, 0), (1 + k, 0), (0, 2)],
                        priors=[0.5, 0.3, 0.2], false_negative=[0.4, 0.5, 0.6],
                        search_costs=[1, 1, 2], budget=6, name=f"c{k}")
        save_json(inst, str(corpus / f"c{k}.json"))
    return str(corpus)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSolve:
    def test_exact_on_fixture(self, capsys, fixture_path):
        code, out, _ = run(capsys, "solve", "--instance", fixture_path,
                           "--solver", "exact")
        assert code == 0
        payload = json.loads(out)
        assert payload["probability"] == pytest.approx(0.525)
        assert payload["schedule"]["visits"] == [[1, 3]]
        assert payload["runtime_ms"] >= 0

    def test_ordered_with_explicit_order(self, capsys, fixture_path):
        code, out, _ = run(capsys, "solve", "--instance", fixture_path,
                           "--solver", "ordered", "--order", "1,2", "--C", "1")
        assert code == 0
        assert json.loads(out)["probability"] == pytest.approx(0.525)

    def test_ordered_without_order_is_usage_error(self, capsys, fixture_path):
        code, _, err = run(capsys, "solve", "--instance", fixture_path,
                           "--solver", "ordered")
        assert code == 2
        assert "order" in err

    def test_dp1d_rejects_planar_instance(self, capsys, tmp_path):
        inst = Instance(points=[(0, 0), (1, 0), (0, 1)], priors=[1 / 3] * 3,
                        false_negative=[0.5] * 3, search_costs=[1] * 3, budget=5)
        path = tmp_path / "planar.json"
        save_json(inst, str(path))
        code, _, err = run(capsys, "solve", "--instance", str(path),
                           "--solver", "dp1d")
        assert code == 2
        assert "collinear" in err

    def test_dp1d_maps_indices_back(self, capsys, tmp_path):
        inst = Instance(points=[(5, 0), (0, 0), (2, 0)], priors=[0.5, 0.2, 0.3],
                        false_negative=[0.3, 0.3, 0.3], search_costs=[1, 1, 1],
                        budget=8)
        path = tmp_path / "line.json"
        save_json(inst, str(path))
        code, out, _ = run(capsys, "solve", "--instance", str(path),
                           "--solver", "dp1d")
        assert code == 0
        touched = {v[0] for v in json.loads(out)["schedule"]["visits"]}
        assert touched <= {1, 2, 3}
        assert 1 in touched  # highest-mass point sits at x=5

    def test_exact_limit_exit_code(self, capsys, tmp_path):
        inst = Instance(points=[(float(k), 0.0) for k in range(11)],
                        priors=[1 / 11] * 11, false_negative=[0.5] * 11,
                        search_costs=[1] * 11, budget=4)
        path = tmp_path / "big.json"
        save_json(inst, str(path))
        code, _, err = run(capsys, "solve", "--instance", str(path),
                           "--solver", "exact")
        assert code == 3
        assert "exact" in err

    def test_budget_override(self, capsys, fixture_path):
        code, out, _ = run(capsys, "solve", "--instance", fixture_path,
                           "--solver", "exact", "--budget", "0")
        assert code == 0
        assert json.loads(out)["probability"] == 0.0

    def test_expired_time_limit_exit_code(self, capsys, fixture_path):
        code, _, err = run(capsys, "solve", "--instance", fixture_path,
                           "--solver", "exact", "--time-limit-s", "0")
        assert code == 3
        assert "deadline" in err

    def test_uniform_solver(self, capsys, tmp_path):
        inst = Instance(points=[(0, 0), (1, 0), (2, 0)], priors=[1 / 3] * 3,
                        false_negative=[0.5] * 3, search_costs=[1] * 3,
                        budget=4, name="uniform3")
        path = tmp_path / "uniform.json"
        save_json(inst, str(path))
        code, out, _ = run(capsys, "solve", "--instance", str(path),
                           "--solver", "uniform", "--epsilon", "0.1")
        assert code == 0
        payload = json.loads(out)
        assert payload["probability"] == pytest.approx((0.75 + 0.5) / 3)
        assert payload["total_weight"] <= 1.1 * 4 + 1e-9

    def test_uniform_rejects_nonuniform_instance(self, capsys, fixture_path):
        code, _, err = run(capsys, "solve", "--instance", fixture_path,
                           "--solver", "uniform")
        assert code == 2
        assert "uniform" in err


class TestCompare:
    def test_csv_schema_and_gaps(self, capsys, corpus_dir):
        code, out, _ = run(capsys, "compare", "--instances",
                           os.path.join(corpus_dir, "*.json"),
                           "--solvers", "greedy,tsp-dp,exact",
                           "--C-values", "10")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        header = out.splitlines()[0]
        assert header == "instance,solver,C,probability,weight,runtime_ms,gap_to_best,feasible"
        assert len(rows) == 9  # 3 instances x (greedy + tsp-dp@10 + exact)
        for row in rows:
            if row["solver"] == "exact":
                assert float(row["gap_to_best"]) == pytest.approx(0.0, abs=1e-12)
            assert float(row["gap_to_best"]) >= -1e-12
            assert row["feasible"] == "true"

    def test_rows_except_runtime_are_reproducible(self, capsys, corpus_dir):
        argv = ["compare", "--instances", os.path.join(corpus_dir, "*.json"),
                "--solvers", "greedy,exact"]
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)

        def strip_runtime(text):
            rows = [r.split(",") for r in text.splitlines()]
            return [r[:5] + r[6:] for r in rows]

        assert strip_runtime(first) == strip_runtime(second)

    def test_probability_nondecreasing_in_c(self, capsys, corpus_dir):
        code, out, _ = run(capsys, "compare", "--instances",
                           os.path.join(corpus_dir, "c0.json"),
                           "--solvers", "tsp-dp", "--C-values", "1,10,20")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        probs = [float(r["probability"]) for r in rows]
        assert probs == sorted(probs)

    def test_forced_timeout_row(self, capsys, corpus_dir):
        code, out, _ = run(capsys, "compare", "--instances",
                           os.path.join(corpus_dir, "c0.json"),
                           "--solvers", "exact", "--time-limit-s", "0.000001")
        assert code == 0
        row = list(csv.DictReader(io.StringIO(out)))[0]
        assert row["feasible"] == "false"
        assert row["probability"] == ""
        assert row["gap_to_best"] == ""

    def test_empty_glob_is_usage_error(self, capsys, tmp_path):
        code, _, err = run(capsys, "compare", "--instances",
                           str(tmp_path / "nothing*.json"), "--solvers", "exact")
        assert code == 2
        assert "match" in err

    def test_plot_dir_renders_figures(self, capsys, corpus_dir, tmp_path):
        out_csv = tmp_path / "rows.csv"
        plots = tmp_path / "figs"
        code, _, err = run(capsys, "compare", "--instances",
                           os.path.join(corpus_dir, "*.json"),
                           "--solvers", "greedy,exact",
                           "--out", str(out_csv), "--plot-dir", str(plots))
        assert code == 0
        assert out_csv.exists()
        assert (plots / "gaps.png").exists()
        assert (plots / "runtimes.png").exists()
        assert "gaps.png" in err


class TestSimulateValidatePosterior:
    def test_simulate_schedule_file(self, capsys, fixture_path, tmp_path):
        sched = tmp_path / "sched.json"
        sched.write_text(json.dumps({"visits": [[1, 2], [2, 1]]}))
        code, out, _ = run(capsys, "simulate", "--instance", fixture_path,
                           "--schedule", str(sched), "--trials", "2000",
                           "--seed", "3", "--miss-distribution")
        assert code == 0
        payload = json.loads(out)
        assert payload["trials"] == 2000
        assert 0 <= payload["p_hat"] <= 1
        assert len(payload["miss_target_counts"]) == 2

    def test_simulate_accepts_solve_output(self, capsys, fixture_path, tmp_path):
        code, out, _ = run(capsys, "solve", "--instance", fixture_path,
                           "--solver", "greedy")
        solved = tmp_path / "solved.json"
        solved.write_text(out)
        code, out, _ = run(capsys, "simulate", "--instance", fixture_path,
                           "--schedule", str(solved), "--trials", "500")
        assert code == 0

    def test_validate_flags_over_budget(self, capsys, fixture_path, tmp_path):
        sched = tmp_path / "sched.json"
        sched.write_text(json.dumps({"visits": [[1, 9]]}))
        code, out, _ = run(capsys, "validate", "--instance", fixture_path,
                           "--schedule", str(sched))
        assert code == 1
        assert any("budget violation" in v for v in json.loads(out))

    def test_validate_passes_feasible(self, capsys, fixture_path, tmp_path):
        sched = tmp_path / "sched.json"
        sched.write_text(json.dumps({"visits": [[1, 1], [2, 1]]}))
        code, out, _ = run(capsys, "validate", "--instance", fixture_path,
                           "--schedule", str(sched))
        assert code == 0
        assert json.loads(out) == []

    def test_posterior_trace_worked_example(self, capsys, tmp_path):
        inst = Instance(points=[(0, 0), (1, 0)], priors=[0.5, 0.5],
                        false_negative=[0.5, 0.5], search_costs=[1, 1], budget=9)
        path = tmp_path / "even.json"
        save_json(inst, str(path))
        code, out, _ = run(capsys, "posterior", "--instance", str(path),
                           "--trace", "a=0,0;b=1,0")
        assert code == 0
        mass = json.loads(out)["mass"]
        assert mass == pytest.approx([1 / 3, 2 / 3], abs=1e-12)

    def test_posterior_observations(self, capsys, fixture_path):
        code, out, _ = run(capsys, "posterior", "--instance", fixture_path,
                           "--observations", "1:0,1:0")
        assert code == 0
        assert sum(json.loads(out)["mass"]) == pytest.approx(1.0, abs=1e-9)


class TestGenConvert:
    def test_gen_single_point(self, capsys):
        code, out, _ = run(capsys, "gen", "--n", "1", "--seed", "7")
        assert code == 0
        doc = json.loads(out)
        assert doc["points"][0]["prior"] == 1.0

    def test_gen_replay_identical(self, capsys):
        _, a, _ = run(capsys, "gen", "--n", "5", "--seed", "9")
        _, b, _ = run(capsys, "gen", "--n", "5", "--seed", "9")
        assert a == b

    def test_convert_bundled_file_with_subsample(self, capsys, tmp_path):
        out_dir = tmp_path / "converted"
        code, out, _ = run(capsys, "convert", "--input",
                           os.path.join(DATA_DIR, "scatter32.txt"),
                           "--out-dir", str(out_dir), "--seed", "5",
                           "--subsample", "7", "--instances-per-base", "4")
        assert code == 0
        written = json.loads(out)["written"]
        assert len(written) == 4
        from searchplan import load_json
        for path in written:
            inst = load_json(path)
            assert inst.n == 7
            assert inst.budget == 30.0

import json

import numpy as np
import pytest

from maglearn import cli, datagen, evaluation
from maglearn.cli import build_parser, forbidden_from_json_dict, main
from maglearn.graph import MixedGraph, is_mag


def run(argv):
    return main([str(a) for a in argv])


class TestGenerate:
    def test_er_outputs(self, tmp_path):
        out = tmp_path / "er"
        assert run(["generate", "--family", "er", "--d", "5", "--ratio", "2",
                    "--n", "100", "--seed", "1", "--out", out]) == 0
        lines = (out / "dataset.csv").read_text().splitlines()
        assert len(lines) == 101  # header + rows
        truth = json.loads((out / "truth.json").read_text())
        assert truth["d"] == 4  # one of five vertices hidden
        assert (out / "forbidden.json").exists()

    def test_er_truth_edge_count_before_hiding(self, tmp_path):
        truth = datagen.gen_er(5, 2, seed=1)
        assert int(truth.graph.directed.sum()) == 10

    def test_berkeley_family(self, tmp_path):
        out = tmp_path / "b"
        assert run(["generate", "--family", "berkeley", "--n", "200", "--seed", "3",
                    "--out", out]) == 0
        truth = json.loads((out / "truth.json").read_text())
        names = truth["names"]
        pair = sorted([names.index("gender"), names.index("admit")])
        assert pair in [sorted(p) for p in truth["bidirected"]]
        assert sorted(truth["latents"]) == ["ability", "department"]

    def test_byte_identical_reruns(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            run(["generate", "--family", "bf", "--d", "5", "--n", "50",
                 "--seed", "7", "--out", out])
        for name in ("dataset.csv", "truth.json", "forbidden.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_invalid_parameters_exit_2(self, tmp_path):
        code = run(["generate", "--family", "er", "--d", "10", "--ratio", "5",
                    "--n", "10", "--out", tmp_path / "x"])
        assert code == 2

    def test_3bf_family(self, tmp_path):
        out = tmp_path / "t"
        assert run(["generate", "--family", "3bf", "--d", "6", "--n", "50",
                    "--seed", "2", "--out", out]) == 0
        truth = json.loads((out / "truth.json").read_text())
        assert truth["d"] == 5  # 20% of six vertices hidden


class TestLearn:
    def test_learn_writes_solution_and_log(self, tmp_path):
        gen_out = tmp_path / "gen"
        run(["generate", "--family", "er", "--d", "4", "--ratio", "1",
             "--n", "100", "--seed", "2", "--out", gen_out])
        learn_out = tmp_path / "fit"
        assert run(["learn", "--data", gen_out / "dataset.csv",
                    "--forbidden", gen_out / "forbidden.json",
                    "--out", learn_out, "--heatmaps"]) == 0
        doc = json.loads((learn_out / "solution.json").read_text())
        graph, _ = MixedGraph.from_json_dict(doc)
        assert is_mag(graph).ok
        assert doc["status"] == "OPTIMAL" and doc["gap"] == 0.0
        assert (learn_out / "solver.log").read_text().startswith("node=1 ")
        assert (learn_out / "heatmap_directed.svg").read_text().startswith("<svg")
        assert (learn_out / "heatmap_bidirected.svg").exists()

    def test_defaults_follow_experiment_setting(self):
        args = build_parser().parse_args(["learn", "--data", "x", "--out", "y"])
        assert args.lam == 1.0
        assert args.time_limit == 900.0
        assert args.q == 2 and args.big_m == 100.0

    def test_missing_data_exits_3(self, tmp_path):
        assert run(["learn", "--data", tmp_path / "nope.csv", "--out", tmp_path / "o"]) == 3

    def test_timeout_still_exits_zero(self, tmp_path, capsys):
        data = datagen.Dataset(
            np.random.default_rng(1).standard_normal((50, 5)),
            tuple("abcde"),
        )
        datagen.write_csv(data, tmp_path / "d.csv")
        code = run(["learn", "--data", tmp_path / "d.csv", "--out", tmp_path / "o",
                    "--time-limit", "0"])
        captured = capsys.readouterr()
        assert code == 0
        assert "TIME_LIMIT" in captured.out
        assert "warning" in captured.err

    def test_mismatched_forbidden_exits_2(self, tmp_path):
        data = datagen.Dataset(np.random.default_rng(0).standard_normal((10, 3)), ("a", "b", "c"))
        datagen.write_csv(data, tmp_path / "d.csv")
        (tmp_path / "f.json").write_text(json.dumps({"d": 2, "names": ["a", "b"], "pairs": []}))
        assert run(["learn", "--data", tmp_path / "d.csv",
                    "--forbidden", tmp_path / "f.json", "--out", tmp_path / "o"]) == 2


class TestEval:
    def test_metrics_match_library(self, tmp_path):
        gen_out = tmp_path / "gen"
        run(["generate", "--family", "bf", "--d", "5", "--n", "200",
             "--seed", "5", "--out", gen_out])
        fit_out = tmp_path / "fit"
        run(["learn", "--data", gen_out / "dataset.csv",
             "--forbidden", gen_out / "forbidden.json", "--out", fit_out])
        metrics = tmp_path / "metrics.csv"
        assert run(["eval", "--solution", fit_out / "solution.json",
                    "--truth", gen_out / "truth.json",
                    "--dataset-name", "bf", "--n", "200", "--seed", "5",
                    "--out", metrics]) == 0
        header, row = metrics.read_text().strip().splitlines()
        assert header == cli.METRICS_HEADER
        fields = row.split(",")

        sol = json.loads((fit_out / "solution.json").read_text())
        truth_doc = json.loads((gen_out / "truth.json").read_text())
        learned, _ = MixedGraph.from_json_dict(sol)
        truth, _ = MixedGraph.from_json_dict(truth_doc)
        w = np.asarray(sol["W"])
        best, best_shd, delta = evaluation.best_over_thresholds(w, learned, truth)
        assert float(fields[5]) == pytest.approx(best_shd)
        assert float(fields[6]) == pytest.approx(evaluation.f1(truth, best, "typed"))
        assert float(fields[7]) == pytest.approx(evaluation.f1(truth, best, "skeleton"))
        assert float(fields[8]) == pytest.approx(delta)

    def test_perfect_solution_scores_zero(self, tmp_path):
        g = MixedGraph.from_edges(3, directed=[(0, 1)])
        doc = g.to_json_dict(["a", "b", "c"])
        truth_doc = dict(doc)
        w = np.zeros((3, 3))
        w[0, 1] = 1.5
        doc = dict(doc, W=[[float(v) for v in r] for r in w], gap=0.0, objective=1.0, status="OPTIMAL")
        (tmp_path / "sol.json").write_text(json.dumps(doc))
        (tmp_path / "truth.json").write_text(json.dumps(truth_doc))
        metrics = tmp_path / "m.csv"
        run(["eval", "--solution", tmp_path / "sol.json", "--truth", tmp_path / "truth.json",
             "--out", metrics])
        row = metrics.read_text().strip().splitlines()[1].split(",")
        assert float(row[5]) == 0.0 and float(row[6]) == 1.0

    def test_dimension_mismatch_exits_2(self, tmp_path):
        small = MixedGraph.empty(2).to_json_dict(["a", "b"])
        small["W"] = [[0.0, 0.0], [0.0, 0.0]]
        big = MixedGraph.empty(3).to_json_dict(["a", "b", "c"])
        (tmp_path / "sol.json").write_text(json.dumps(small))
        (tmp_path / "truth.json").write_text(json.dumps(big))
        assert run(["eval", "--solution", tmp_path / "sol.json",
                    "--truth", tmp_path / "truth.json", "--out", tmp_path / "m.csv"]) == 2


class TestBench:
    def test_small_grid(self, tmp_path):
        out = tmp_path / "bench"
        assert run(["bench", "--families", "bf", "--d-list", "4", "--n-list", "20,50",
                    "--seeds", "3", "--ratio", "1", "--out", out]) == 0
        runs = (out / "runs.csv").read_text().strip().splitlines()
        assert runs[0] == cli.METRICS_HEADER
        assert len(runs) == 1 + 2 * 3  # two cells, three seeds each
        summary = (out / "summary.csv").read_text().strip().splitlines()
        assert len(summary) == 1 + 2
        assert all(line.split(",")[3] == "3" for line in summary[1:])

    def test_parallel_workers_match_sequential(self, tmp_path, monkeypatch):
        results = {}
        for workers, name in (("1", "seq"), ("2", "par")):
            monkeypatch.setenv("MAGLEARN_WORKERS", workers)
            out = tmp_path / name
            assert run(["bench", "--families", "bf", "--d-list", "4", "--n-list", "30",
                        "--seeds", "2", "--out", out]) == 0
            runs = (out / "runs.csv").read_text().splitlines()
            results[name] = [",".join(r.split(",")[:9]) for r in runs]  # drop runtime, gap
        assert results["seq"] == results["par"]

    def test_deterministic_aggregates(self, tmp_path):
        outs = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            run(["bench", "--families", "er", "--d-list", "4", "--n-list", "30",
                 "--seeds", "2", "--ratio", "1", "--out", out])
            summary = (out / "summary.csv").read_text()
            # drop the runtime columns, which legitimately vary between runs
            trimmed = [",".join(line.split(",")[:10]) for line in summary.splitlines()]
            outs.append(trimmed)
        assert outs[0] == outs[1]


class TestForbiddenFromGroups:
    def test_two_groups(self, tmp_path):
        data = datagen.Dataset(np.zeros((2, 3)), ("a", "b", "c"))
        datagen.write_csv(data, tmp_path / "d.csv")
        out = tmp_path / "f.json"
        assert run(["forbidden-from-groups", "--data", tmp_path / "d.csv",
                    "--group", "a,b", "--group", "c", "--out", out]) == 0
        forbidden = forbidden_from_json_dict(json.loads(out.read_text()))
        assert forbidden[0, 2] == 1 and forbidden[1, 2] == 1 and forbidden[0, 1] == 0

    def test_single_group_marks_nothing(self, tmp_path):
        data = datagen.Dataset(np.zeros((2, 3)), ("a", "b", "c"))
        datagen.write_csv(data, tmp_path / "d.csv")
        out = tmp_path / "f.json"
        run(["forbidden-from-groups", "--data", tmp_path / "d.csv",
             "--group", "a,b,c", "--out", out])
        assert not forbidden_from_json_dict(json.loads(out.read_text())).any()

    def test_sector_sized_groups(self, tmp_path):
        # three sectors of sizes 8, 3 and 5 over sixteen series
        names = tuple(f"s{i}" for i in range(16))
        data = datagen.Dataset(np.zeros((2, 16)), names)
        datagen.write_csv(data, tmp_path / "d.csv")
        out = tmp_path / "f.json"
        banks = ",".join(names[:8])
        insurance = ",".join(names[8:11])
        transport = ",".join(names[11:16])
        run(["forbidden-from-groups", "--data", tmp_path / "d.csv",
             "--group", banks, "--group", insurance, "--group", transport,
             "--out", out])
        forbidden = forbidden_from_json_dict(json.loads(out.read_text()))
        assert int(forbidden.sum()) // 2 == 8 * 3 + 8 * 5 + 3 * 5

    def test_unknown_column_exits_2(self, tmp_path):
        data = datagen.Dataset(np.zeros((2, 2)), ("a", "b"))
        datagen.write_csv(data, tmp_path / "d.csv")
        assert run(["forbidden-from-groups", "--data", tmp_path / "d.csv",
                    "--group", "a,zzz", "--out", tmp_path / "f.json"]) == 2


class TestDemo:
    def test_demo_runs_and_reports(self, tmp_path, capsys):
        out = tmp_path / "demo"
        assert run(["demo", "--n", "500", "--seed", "1", "--out", out]) == 0
        printed = capsys.readouterr().out
        assert "gender <-> admit" in printed
        assert (out / "solution.json").exists()

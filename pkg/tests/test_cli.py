import json

import pytest

from cutlab.cli import main, parse_params


class TestParseParams:
    def test_values_and_fractions(self):
        from fractions import Fraction

        parsed = parse_params("r=3,k=2,eps=1/20")
        assert parsed == {"r": 3, "k": 2, "eps": Fraction(1, 20)}

    def test_range_expansion(self):
        parsed = parse_params("k=2,r=2..4", ranges=True)
        assert parsed == {"k": 2, "r": [2, 3, 4]}


class TestGenerate:
    def test_saks_node_count(self, tmp_path, capsys):
        out = tmp_path / "inst.json"
        code = main(
            ["generate", "--family", "saks", "--params", "r=3,k=2", "--out", str(out)]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert len(doc["nodes"]) == 13

    def test_generated_weight_total(self, tmp_path):
        out = tmp_path / "inst.json"
        main(
            [
                "generate",
                "--family",
                "dict-e",
                "--params",
                "a=4,b=3,r=2,R=1",
                "--out",
                str(out),
            ]
        )
        from fractions import Fraction

        doc = json.loads(out.read_text())
        total = sum(
            Fraction(e["weight"]) for e in doc["edges"] if e["weight"] is not None
        )
        assert total == 3

    def test_idempotent_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["generate", "--family", "dict-v", "--params", "a=4,b=4,r=3,R=1,eps=1/20"]
        main(argv + ["--out", str(a)])
        main(argv + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_rejects_bad_params(self, capsys):
        code = main(["generate", "--family", "saks", "--params", "r=1,k=2"])
        assert code == 1
        assert "ParamOutOfRange" in capsys.readouterr().err

    def test_size_guard_surfaced(self, capsys):
        code = main(
            [
                "generate",
                "--family",
                "saks",
                "--params",
                "r=8,k=7",
                "--max-nodes",
                "100",
            ]
        )
        assert code == 1
        err = capsys.readouterr().err
        assert "SizeGuard" in err and "2097166" in err


class TestVerify:
    def test_dict_v_passes(self, capsys):
        code = main(
            ["verify", "--family", "dict-v", "--params", "a=4,b=4,r=3,R=1,eps=1/20", "--q", "1"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "PASS" in out and "FAIL" not in out
        assert '"dist": 15' in out

    def test_dict_m_passes(self, capsys):
        code = main(
            ["verify", "--family", "dict-m", "--params", "r=2,k=2,R=1,eps=1/20"]
        )
        assert code == 0
        assert "every pair disconnected" in capsys.readouterr().out

    def test_dict_f_passes(self, capsys):
        code = main(
            ["verify", "--family", "dict-f", "--params", "b=2,R=1,eps=1/100"]
        )
        assert code == 0
        assert "target never burnt" in capsys.readouterr().out

    def test_instance_file_passes(self, tmp_path, capsys):
        path = tmp_path / "inst.json"
        main(
            [
                "generate",
                "--family",
                "dict-v",
                "--params",
                "a=4,b=4,r=3,R=1,eps=1/20",
                "--out",
                str(path),
            ]
        )
        assert main(["verify", "--instance", str(path)]) == 0
        assert "FAIL" not in capsys.readouterr().out

    def test_tampered_instance_fails(self, tmp_path, capsys):
        # relabeling one cut vertex lets a short path evade the dictator cut
        path = tmp_path / "inst.json"
        main(
            [
                "generate",
                "--family",
                "dict-v",
                "--params",
                "a=4,b=4,r=3,R=1,eps=1/20",
                "--out",
                str(path),
            ]
        )
        tampered = tmp_path / "tampered.json"
        tampered.write_text(path.read_text().replace("v[2]/[0]", "v[2]/[5]"))
        code = main(["verify", "--instance", str(tampered)])
        assert code == 1
        assert "FAIL" in capsys.readouterr().out


class TestSolverCommands:
    def test_exact_on_file(self, tmp_path, capsys):
        inst_file = tmp_path / "inst.json"
        main(["generate", "--family", "saks", "--params", "r=2,k=2", "--out", str(inst_file)])
        code = main(["exact", "--instance", str(inst_file)])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["cost"] == "3/1"

    def test_lp_on_family(self, capsys):
        code = main(["lp", "--family", "saks", "--params", "r=2,k=2"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["lp_value"] == "2/1"

    def test_interdict(self, capsys):
        code = main(
            [
                "interdict",
                "--family",
                "dict-e",
                "--params",
                "a=4,b=3,r=2,R=1",
                "--budget",
                "15/8",
            ]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["best_distance"] >= 8

    def test_rmfc_harmonic(self, capsys):
        code = main(
            ["rmfc", "--family", "dict-f", "--params", "b=2,R=1,eps=1/100", "--q", "1"]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["target_burnt"] is False

    def test_rmfc_search_small_tree(self, tmp_path, capsys):
        from fractions import Fraction

        from cutlab.graphs import (
            CutInstance,
            Rmfc,
            WeightedGraph,
            instance_to_json_str,
        )

        g = WeightedGraph()
        g.add_node("s")
        g.add_node("a", Fraction(1))
        g.add_node("t")
        g.add_edge("s", "a", directed=False)
        g.add_edge("a", "t", directed=False)
        inst = CutInstance(graph=g, mode="vertex", problem=Rmfc("s", frozenset({"t"})))
        path = tmp_path / "fire.json"
        path.write_text(instance_to_json_str(inst))
        code = main(["rmfc", "--instance", str(path), "--search-budget", "1"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["savable"] is True

    def test_rmfc_zero_budget_burns_connected_instance(self, tmp_path, capsys):
        from fractions import Fraction

        from cutlab.graphs import (
            CutInstance,
            Rmfc,
            WeightedGraph,
            instance_to_json_str,
        )

        g = WeightedGraph()
        g.add_node("s")
        g.add_node("a", Fraction(1))
        g.add_node("t")
        g.add_edge("s", "a", directed=False)
        g.add_edge("a", "t", directed=False)
        inst = CutInstance(graph=g, mode="vertex", problem=Rmfc("s", frozenset({"t"})))
        path = tmp_path / "fire.json"
        path.write_text(instance_to_json_str(inst))
        code = main(["rmfc", "--instance", str(path), "--search-budget", "0"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["savable"] is False


class TestGapTable:
    def test_csv_shape_and_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["gap-table", "--family", "saks", "--params", "k=2,r=2..3", "--seed", "7"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().strip().split("\n")
        assert lines[0] == "family,params,lp_value,integral_value,gap,wall_ms"
        assert lines[1] == "saks,k=2;r=2,2/1,3/1,3/2,0"
        assert lines[2] == "saks,k=2;r=3,3/1,5/1,5/3,0"

    def test_empty_range_header_only(self, tmp_path):
        out = tmp_path / "empty.csv"
        code = main(
            ["gap-table", "--family", "saks", "--params", "k=2,r=3..2", "--out", str(out)]
        )
        assert code == 0
        assert out.read_text().strip() == "family,params,lp_value,integral_value,gap,wall_ms"

    def test_dict_e_bound_sweep_monotone(self, tmp_path):
        from fractions import Fraction

        out = tmp_path / "edge.csv"
        code = main(
            [
                "gap-table",
                "--family",
                "dict-e",
                "--params",
                "a=2,b=2..4,r=2,R=1",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        rows = out.read_text().strip().split("\n")[1:]
        costs = [Fraction(r.split(",")[3]) for r in rows]
        assert costs == sorted(costs)


class TestGammaAndCorrelation:
    def test_gamma_value(self, capsys):
        code = main(["gamma", "--rho", "0.5", "--a", "0.5", "--b", "0.5"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["gamma"] - 1 / 6) < 1e-4

    def test_correlation_edge_family(self, capsys):
        code = main(["correlation", "--family", "edge", "--params", "r=2"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["rho"] - 0.5) < 1e-6

    def test_correlation_star_family(self, capsys):
        code = main(["correlation", "--family", "star", "--params", "r=2,eps=1/4"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["rho"] <= doc["connectedness_bound"] + 1e-9
        assert doc["alpha"] == "1/16"

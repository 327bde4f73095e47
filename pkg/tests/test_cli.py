import csv
import json
import os
from pathlib import Path

import numpy as np
import pytest

from graphlet_lp.cli import main
from graphlet_lp.graph import write_edge_list
from graphlet_lp.synthetic import erdos_renyi, preferential_attachment, triadic_closure

from conftest import data_path

FAST = ["--max-trees", "15"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def data_files(root):
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and p.name != "manifest.json"}


def usage_exit(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    return info.value.code


def test_orbits_triangle_oracle(tmp_path):
    assert main(["orbits", data_path("triangle"), "--out", str(tmp_path), "--edges", "--nodes", "--oracle"]) == 0
    nodes = read_csv(tmp_path / "nodes.csv")
    assert nodes[0] == ["node_id"] + [f"N{i}" for i in range(1, 16)]
    assert all(r[1] == "2" and r[4] == "1" for r in nodes[1:])
    assert (tmp_path / "manifest.json").exists()


def test_orbits_pair_list(tmp_path):
    pairs = tmp_path / "pairs.txt"
    pairs.write_text("0 1\n0 33\n5 6\n")
    assert main(["orbits", data_path("karate"), "--out", str(tmp_path / "o"), "--pairs", str(pairs)]) == 0
    rows = read_csv(tmp_path / "o" / "pairs.csv")
    assert len(rows) == 4 and all(len(r) == 14 for r in rows)
    assert rows[0][:3] == ["x", "y", "M1"]


def test_orbits_node_rows_equal_node_count(tmp_path, karate):
    assert main(["orbits", data_path("karate"), "--out", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "nodes.csv")) - 1 == karate.node_count


def test_orbits_oracle_refuses_large_graph(tmp_path):
    g = erdos_renyi(250, 0.02, 0)
    write_edge_list(g, tmp_path / "big.txt")
    assert main(["orbits", str(tmp_path / "big.txt"), "--out", str(tmp_path / "o"), "--oracle"]) == 2


def test_orbits_oracle_mismatch_exits_3(tmp_path, monkeypatch):
    import graphlet_lp.cli as cli
    real = cli.node_orbit_table

    def broken(*a, **k):
        t = real(*a, **k).copy()
        t[0, 3] += 1
        return t

    monkeypatch.setattr(cli, "node_orbit_table", broken)
    assert main(["orbits", data_path("triangle"), "--out", str(tmp_path), "--oracle"]) == 3


def test_exit_codes(tmp_path):
    assert usage_exit(["run", data_path("karate")]) == 1                    # missing --out
    assert usage_exit(["run", data_path("karate"), "--out", str(tmp_path), "--model", "magic"]) == 1
    assert usage_exit([]) == 1
    assert main(["run", str(tmp_path / "missing.txt"), "--out", str(tmp_path)]) == 2
    (tmp_path / "bad.txt").write_text("1 2\nthree four\n")
    assert main(["orbits", str(tmp_path / "bad.txt"), "--out", str(tmp_path)]) == 2
    assert main(["run", data_path("triangle"), "--out", str(tmp_path / "t")]) == 2   # too few edges


def test_single_m2_equals_classical_cn(tmp_path):
    base = ["run", data_path("karate"), "--runs", "3", *FAST]
    assert main(base + ["--model", "single:M2", "--out", str(tmp_path / "m2")]) == 0
    assert main(base + ["--model", "classical:CN", "--out", str(tmp_path / "cn")]) == 0
    m2 = json.loads((tmp_path / "m2" / "metrics.json").read_text())
    cn = json.loads((tmp_path / "cn" / "metrics.json").read_text())
    assert [r["auc"] for r in m2["runs"]] == [r["auc"] for r in cn["runs"]]


def test_run_schema_ten_runs(tmp_path):
    assert main(["run", data_path("karate"), "--runs", "10", "--max-trees", "5", "--out", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "metrics.json").read_text())
    assert len(m["runs"]) == 10 and set(m["aggregate"]) >= {"auc", "precision", "recall", "f1"}
    assert [r["seed"] for r in m["runs"]] == list(range(10))
    for name in ("split.json", "train.csv", "validation.csv", "test.csv", "model.json", "predictions.csv"):
        assert (tmp_path / "run_000" / name).exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "run" and manifest["seeds"] == list(range(10))


def test_run_deterministic_across_threads(tmp_path):
    args = ["run", data_path("lesmis"), "--runs", "2", "--seed", "4", *FAST]
    assert main(args + ["--out", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--threads", "1"]) == 0
    assert main(args + ["--out", str(tmp_path / "c"), "--threads", "3"]) == 0
    a = data_files(tmp_path / "a")
    assert a == data_files(tmp_path / "b") == data_files(tmp_path / "c")


def test_threads_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("GRAPHLET_LP_THREADS", "2")
    assert main(["orbits", data_path("karate"), "--out", str(tmp_path / "a"), "--edges"]) == 0
    monkeypatch.setenv("GRAPHLET_LP_THREADS", "1")
    assert main(["orbits", data_path("karate"), "--out", str(tmp_path / "b"), "--edges"]) == 0
    assert data_files(tmp_path / "a") == data_files(tmp_path / "b")
    assert json.loads((tmp_path / "a" / "manifest.json").read_text())["config"]["threads"] == 2
    monkeypatch.setenv("GRAPHLET_LP_THREADS", "many")
    assert main(["orbits", data_path("karate"), "--out", str(tmp_path / "c")]) == 2


def test_explain_m_only(tmp_path):
    assert main(["run", data_path("karate"), "--runs", "1", "--model", "m-only", *FAST,
                 "--out", str(tmp_path / "run")]) == 0
    assert main(["explain", str(tmp_path / "run"), "--out", str(tmp_path / "x")]) == 0
    shap_files = list((tmp_path / "x").rglob("shap.csv"))
    assert shap_files
    header = read_csv(shap_files[0])[0]
    assert header[:3] == ["x", "y", "label"] and not any(h.startswith("phi_N") for h in header)
    summary = json.loads(next((tmp_path / "x").rglob("shap_summary.json")).read_text())
    assert sum(summary["category_shares"].values()) == pytest.approx(1.0, abs=1e-12)
    assert len(summary["top"]) == 10


def test_explain_missing_artifacts(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["explain", str(tmp_path / "empty"), "--out", str(tmp_path / "x")]) == 2


def test_explain_deterministic(tmp_path):
    assert main(["run", data_path("karate"), "--runs", "1", *FAST, "--out", str(tmp_path / "run")]) == 0
    for sub in ("a", "b"):
        assert main(["explain", str(tmp_path / "run"), "--out", str(tmp_path / sub)]) == 0
    assert data_files(tmp_path / "a") == data_files(tmp_path / "b")


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"runs": 2, "max-trees": 3, "out": str(tmp_path / "fromcfg")}))
    assert main(["run", data_path("karate"), "--config", str(cfg)]) == 0
    assert len(json.loads((tmp_path / "fromcfg" / "metrics.json").read_text())["runs"]) == 2
    assert main(["run", data_path("karate"), "--config", str(cfg), "--runs", "1",
                 "--out", str(tmp_path / "cli")]) == 0
    assert len(json.loads((tmp_path / "cli" / "metrics.json").read_text())["runs"]) == 1
    (tmp_path / "bad.json").write_text(json.dumps({"nonsense": 1}))
    assert usage_exit(["run", data_path("karate"), "--config", str(tmp_path / "bad.json")]) == 1


def write_corpus(tmp_path, graphs):
    lines = ["path,name,domain,subdomain"]
    for name, domain, g in graphs:
        write_edge_list(g, tmp_path / f"{name}.txt")
        lines.append(f"{name}.txt,{name},{domain},")
    (tmp_path / "index.csv").write_text("\n".join(lines) + "\n")
    return str(tmp_path / "index.csv")


def test_domains_three_tiny_networks(tmp_path):
    index = write_corpus(tmp_path, [(f"g{i}", "a" if i < 2 else "b", erdos_renyi(40, 0.15, i)) for i in range(3)])
    with open(index, "a") as fh:
        fh.write("missing.txt,ghost,b,\n")
    out = tmp_path / "out"
    assert main(["domains", index, "--out", str(out), *FAST]) == 0
    assert len((out / "records.jsonl").read_text().splitlines()) == 3
    for name in ("pca.csv", "clustering.csv", "winning_rates.csv", "manifest.json"):
        assert (out / name).exists()
    assert "ghost" in json.loads((out / "manifest.json").read_text())["notes"]["failures"]


def test_domains_needs_three_networks(tmp_path):
    index = write_corpus(tmp_path, [(f"g{i}", "a", erdos_renyi(40, 0.15, i)) for i in range(2)])
    assert main(["domains", index, "--out", str(tmp_path / "o"), *FAST]) == 2


@pytest.mark.slow
def test_domains_opposite_mechanisms_separate(tmp_path):
    graphs = [(f"tc{i}", "tc", triadic_closure(500, seed=i)) for i in range(5)]
    graphs += [(f"pa{i}", "pa", preferential_attachment(500, seed=i)) for i in range(5)]
    index = write_corpus(tmp_path, graphs)
    assert main(["domains", index, "--out", str(tmp_path / "o"), "--signature", "abs", "--S", "100"]) == 0
    rows = {r[0]: r for r in read_csv(tmp_path / "o" / "clustering.csv")[1:]}
    for d in ("tc", "pa"):
        p = rows[d][3]
        assert p == "< 0.01" or float(p) < 0.05, rows[d]

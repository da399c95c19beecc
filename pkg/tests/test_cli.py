import itertools
import json

import numpy as np
import pytest

from flowclust.cli import main

from builders import block_image


@pytest.fixture
def bell_files(tmp_path):
    edges = list(itertools.combinations(range(4), 2))
    edges += list(itertools.combinations(range(4, 10), 2))
    edges.append((3, 4))
    graph_path = tmp_path / "dumbbell.el"
    graph_path.write_text("\n".join(f"{u} {v}" for u, v in edges) + "\n")
    seed_path = tmp_path / "seed.txt"
    seed_path.write_text("# K4 plus bridge endpoint\n0\n1\n2\n3\n4\n")
    return str(graph_path), str(seed_path), tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestImprove:
    def test_mqi_json(self, bell_files, capsys):
        graph, seed, _ = bell_files
        code, out, err = run(capsys, "improve", "--alg", "mqi", "-g", graph, "-s", seed)
        assert code == 0
        record = json.loads(out)
        assert record["algorithm"] == "mqi"
        assert record["set"] == [0, 1, 2, 3]
        assert record["conductance"] == pytest.approx(0.076923, abs=1e-6)

    def test_lfi_delta_zero_equals_fi(self, bell_files, capsys):
        graph, seed, _ = bell_files
        _, out_fi, _ = run(capsys, "improve", "--alg", "fi", "-g", graph, "-s", seed)
        _, out_lfi, _ = run(capsys, "improve", "--alg", "lfi", "--delta", "0",
                            "-g", graph, "-s", seed)
        fi, lfi = json.loads(out_fi), json.loads(out_lfi)
        assert fi["set"] == lfi["set"]
        assert fi["objective"] == pytest.approx(lfi["objective"])

    def test_bisection_mode(self, bell_files, capsys):
        graph, seed, _ = bell_files
        code, out, _ = run(capsys, "improve", "--alg", "mqi", "--mode", "bisection",
                           "-g", graph, "-s", seed)
        assert code == 0
        assert json.loads(out)["set"] == [0, 1, 2, 3]

    def test_invalid_seed_id_exit_1(self, bell_files, capsys):
        graph, _, tmp = bell_files
        bad = tmp / "bad_seed.txt"
        bad.write_text("0\n99\n")
        code, _, err = run(capsys, "improve", "--alg", "mqi", "-g", graph, "-s", str(bad))
        assert code == 1
        assert "line 2" in err

    def test_seed_volume_violation_exit_2(self, bell_files, capsys):
        graph, _, tmp = bell_files
        big = tmp / "big_seed.txt"
        big.write_text("\n".join(str(v) for v in range(4, 10)) + "\n")
        code, _, err = run(capsys, "improve", "--alg", "mqi", "-g", graph, "-s", str(big))
        assert code == 2
        assert "seed" in err

    def test_missing_graph_exit_1(self, bell_files, capsys):
        _, seed, _ = bell_files
        code, _, err = run(capsys, "improve", "--alg", "mqi", "-g", "/no/such/file", "-s", seed)
        assert code == 1

    def test_eps_requires_bisection(self, bell_files, capsys):
        graph, seed, _ = bell_files
        code, _, err = run(capsys, "improve", "--alg", "mqi", "--eps", "0.01",
                           "-g", graph, "-s", seed)
        assert code == 1
        assert "bisection" in err

    def test_delta_requires_lfi(self, bell_files, capsys):
        graph, seed, _ = bell_files
        code, _, err = run(capsys, "improve", "--alg", "mqi", "--delta", "1",
                           "-g", graph, "-s", seed)
        assert code == 1

    def test_inline_seed_ids(self, bell_files, capsys):
        graph, _, _ = bell_files
        code, out, _ = run(capsys, "improve", "--alg", "mqi", "-g", graph,
                           "--seed-ids", "0,1,2,3,4")
        assert code == 0
        assert json.loads(out)["set"] == [0, 1, 2, 3]

    def test_output_file(self, bell_files, capsys):
        graph, seed, tmp = bell_files
        out_path = tmp / "result.json"
        code, _, _ = run(capsys, "improve", "--alg", "mqi", "-g", graph, "-s", seed,
                         "-o", str(out_path))
        assert code == 0
        assert json.loads(out_path.read_text())["set"] == [0, 1, 2, 3]


class TestMetricsRoundTrip:
    def test_improve_then_metrics_reproduces_numbers(self, bell_files, capsys):
        graph, seed, tmp = bell_files
        _, out, _ = run(capsys, "improve", "--alg", "mqi", "-g", graph, "-s", seed)
        record = json.loads(out)
        set_path = tmp / "result_set.txt"
        set_path.write_text("\n".join(str(v) for v in record["set"]) + "\n")
        code, out2, _ = run(capsys, "metrics", "-g", graph, "-s", str(set_path))
        assert code == 0
        metrics = json.loads(out2)
        assert metrics["cut"] == record["cut"]
        assert metrics["vol"] == record["vol"]
        assert metrics["conductance"] == record["conductance"]

    def test_metrics_keys(self, bell_files, capsys):
        graph, seed, _ = bell_files
        code, out, _ = run(capsys, "metrics", "-g", graph, "-s", seed)
        assert set(json.loads(out)) == {
            "cut", "vol", "vol_bar", "size", "conductance",
            "ncut", "expansion", "sparsity", "ratio_cut",
        }


class TestDiffusionCommands:
    def test_ppr_lines(self, bell_files, capsys):
        graph, _, _ = bell_files
        code, out, _ = run(capsys, "ppr", "-g", graph, "--seed-ids", "0",
                           "--alpha", "0.15", "--rho", "1e-8")
        assert code == 0
        lines = out.strip().splitlines()
        parsed = {int(line.split()[0]): float(line.split()[1]) for line in lines}
        assert parsed[0] > 0
        assert sum(parsed.values()) <= 1.0 + 1e-9

    def test_sweep_recovers_k4(self, bell_files, capsys):
        graph, _, _ = bell_files
        code, out, _ = run(capsys, "sweep", "-g", graph, "--seed-ids", "0",
                           "--alpha", "0.1", "--rho", "1e-10")
        assert code == 0
        record = json.loads(out)
        assert record["set"] == [0, 1, 2, 3]
        assert record["conductance"] == pytest.approx(1 / 13)


class TestEmbedCommand:
    def test_csv_output(self, bell_files, capsys):
        graph, _, tmp = bell_files
        code, out, _ = run(capsys, "embed", "-g", graph, "--seed-ids", "0 1 2 3",
                           "--alg", "mqi", "--samples", "6", "--subset-size", "4",
                           "--hops", "0", "--dims", "2", "--seed", "1")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "node,c1,c2"
        assert len(lines) == 11  # header + 10 nodes


class TestImageCommand:
    def test_png_round_trip(self, tmp_path, capsys):
        from PIL import Image

        img = (block_image(12, (4, 8)) * 255).astype(np.uint8)
        png = tmp_path / "block.png"
        Image.fromarray(img, mode="L").save(png)
        edges_out = tmp_path / "img.el"
        map_out = tmp_path / "img.map"
        code, _, _ = run(capsys, "img2graph", "--image", str(png), "--radius2", "2",
                         "--sigma-d2", "1.0", "--sigma-i2", "0.05",
                         "--out-edges", str(edges_out), "--out-map", str(map_out))
        assert code == 0
        map_lines = map_out.read_text().strip().splitlines()
        assert len(map_lines) == 144
        assert map_lines[0].split() == ["0", "0", "0"]
        code, out, _ = run(capsys, "metrics", "-g", str(edges_out),
                           "--seed-ids", " ".join(
                               str(r * 12 + c) for r in range(4, 8) for c in range(4, 8)))
        assert code == 0


class TestBatchCommand:
    def test_order_and_threads(self, bell_files, capsys):
        graph, _, tmp = bell_files
        seeds = tmp / "batch.txt"
        seeds.write_text("0 1 2 3 4\n5 6\n0 1\n")
        code, out1, _ = run(capsys, "batch", "-g", graph, "--seeds-file", str(seeds),
                            "--alg", "mqi", "--threads", "1")
        assert code == 0
        code, out4, _ = run(capsys, "batch", "-g", graph, "--seeds-file", str(seeds),
                            "--alg", "mqi", "--threads", "4")
        assert code == 0
        assert out1 == out4
        records = [json.loads(line) for line in out1.strip().splitlines()]
        assert len(records) == 3
        assert records[0]["set"] == [0, 1, 2, 3]
        assert records[2]["set"] == [0, 1]

    def test_bad_seed_line_named(self, bell_files, capsys):
        graph, _, tmp = bell_files
        seeds = tmp / "batch.txt"
        seeds.write_text("0 1\nnot-a-node\n")
        code, _, err = run(capsys, "batch", "-g", graph, "--seeds-file", str(seeds),
                           "--alg", "mqi")
        assert code == 1
        assert "line 2" in err

import json

import numpy as np

from ipclust.cli import main


def test_generate_then_estimate(tmp_path, capsys):
    csv_path = tmp_path / "s1b.csv"
    assert main(["generate", "--setting", "S1b", "--seed", "4", "--out", str(csv_path)]) == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "x1,x2,x3,x4,x5,truth"
    assert len(lines) == 251
    assert {line.rsplit(",", 1)[1] for line in lines[1:]} == {"1", "2"}

    out = tmp_path / "report.json"
    argv = ["estimate-k", str(csv_path), "--header", "--label-column", "-1", "--b", "500",
            "--out", str(out)]
    assert main(argv) == 0
    report = json.loads(out.read_text())
    assert report["k_hat"] == 2
    assert report["trajectory"][0]["ari_vs_truth"] == 1.0
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first


def test_estimate_missing_file(tmp_path, capsys):
    assert main(["estimate-k", str(tmp_path / "absent.csv")]) == 1
    assert "ipclust estimate-k: error:" in capsys.readouterr().err


def test_estimate_bad_cell(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,oops\n4,5\n6,7\n")
    assert main(["estimate-k", str(path)]) == 1
    assert "row 2, column 2" in capsys.readouterr().err


def test_ari_command(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("1\n1\n2\n2\n")
    b.write_text("x\nx\ny\ny\n")
    assert main(["ari", str(a), str(b)]) == 0
    assert json.loads(capsys.readouterr().out) == {"ari": 1.0, "n": 4}


def test_gap_command(tmp_path, capsys):
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal(0, 1, (30, 2)), rng.normal(20, 1, (30, 2))])
    path = tmp_path / "blobs.csv"
    path.write_text("\n".join(",".join(map(str, row)) for row in x) + "\n")
    assert main(["gap", str(path), "--gap-refs", "5", "--gap-k-max", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["k_hat"] == 2


def test_simulate_command(tmp_path):
    out1, out2 = tmp_path / "one.json", tmp_path / "two.json"
    base = ["simulate", "--setting", "S3", "--reps", "2", "--b", "200", "--max-k", "4",
            "--restarts", "2", "--w", "3", "5", "--nearest", "mean", "median"]
    assert main(base + ["--out", str(out1)]) == 0
    assert main(base + ["--jobs", "2", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    report = json.loads(out1.read_text())
    assert set(report["efficacy_percent"]) == {"ip_w3_mean", "ip_w3_median", "ip_w5_mean", "ip_w5_median"}
    assert report["config"]["setting_options"]["shift"] == [3.0, 3.0]

import json
import subprocess
import sys

import numpy as np
import pytest

from ncprob import load_histogram
from ncprob.cli import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, defaults, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def twin_file(tmp_path):
    path = tmp_path / "twin.json"
    assert main(["gen", "--ideal-twin", "B=1", "Mp=2", "--cutoff", "12", "-o", str(path)]) == 0
    return path


@pytest.fixture
def coherent_file(tmp_path):
    path = tmp_path / "coh.csv"
    assert main(["gen", "--coherent", "mu_s=1.2", "mu_i=1.2", "--format", "csv", "-o", str(path)]) == 0
    return path


def test_gen_twin_mean(capsys):
    code, out, _ = run(capsys, "gen", "--ideal-twin", "B=8.86", "Mp=80")
    assert code == EXIT_OK
    pmf = load_histogram(out, "json")
    n = np.arange(pmf.shape[0])
    assert abs(pmf.probs.sum(axis=1) @ n - 8.86) < 1e-6


def test_gen_csv_roundtrip(coherent_file):
    pmf = load_histogram(coherent_file.read_text(), "csv")
    n = np.arange(pmf.shape[0])
    assert abs(pmf.probs.sum(axis=1) @ n - 1.2) < 1e-9


def test_eval_coherent_boundary(capsys, coherent_file):
    code, out, _ = run(capsys, "eval", "--in", str(coherent_file), "--criterion", "A:E001")
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == "criterion,representation,value,verdict"
    assert lines[1].endswith("classical boundary")


def test_eval_twin_nonclassical(capsys, twin_file):
    _, out, _ = run(capsys, "eval", "--in", str(twin_file), "--criterion", "A:E001",
                    "--representation", "moment")
    assert out.strip().splitlines()[1].endswith(",nonclassical")


def test_depth_and_nccp(capsys, twin_file):
    code, out, _ = run(capsys, "depth", "--in", str(twin_file), "--criterion", "A:E001", "--modes", "1")
    assert code == EXIT_OK
    header, row = out.strip().splitlines()
    assert header.startswith("name,indices,value_at_origin,tau")
    tau = float(row.split(",")[3])
    assert 0 < tau < 1
    code, out, _ = run(capsys, "nccp", "--in", str(twin_file), "--criterion", "A:E001", "--modes", "1")
    assert code == EXIT_OK
    assert float(out.strip().splitlines()[1].split(",")[3]) > 0


def test_scan_grid(capsys, twin_file):
    code, out, _ = run(capsys, "scan", "--in", str(twin_file), "--modes", "1", "--scenario", "grid",
                       "--family", "E3", "--range-s", "1:3", "--range-i", "1:3")
    assert code == EXIT_OK
    assert len(out.strip().splitlines()) == 1 + 9


def test_transform_noise_roundtrip(capsys, twin_file):
    code, out, _ = run(capsys, "transform", "--in", str(twin_file), "--noise", "0.5", "--modes", "1")
    assert code == EXIT_OK
    pmf = load_histogram(out, "csv")
    assert abs(pmf.probs.sum() - 1.0) < 1e-12


def test_dump_kernel(capsys):
    code, out, _ = run(capsys, "transform", "--s", "0", "--modes", "2", "--dump-kernel", "--n-in", "3")
    assert code == EXIT_OK
    assert out.startswith("n,m,value")


def test_defaults_json(capsys):
    code, out, _ = run(capsys, "defaults")
    assert code == EXIT_OK
    assert json.loads(out) == json.loads(json.dumps(defaults()))


def test_check_subset(capsys):
    code, out, _ = run(capsys, "check", "--suite", "kernel")
    assert code == EXIT_OK
    assert out.strip().endswith("1/1 suites passed")


@pytest.mark.parametrize("argv", [
    [],
    ["gen"],
    ["gen", "--coherent", "mu=1"],
    ["eval", "--in", "x.json"],
    ["transform", "--modes", "1"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == EXIT_USAGE


def test_validation_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[[0, 0, -1]]")
    assert main(["eval", "--in", str(bad), "--criterion", "A:E001"]) == EXIT_VALIDATION
    assert main(["eval", "--in", str(tmp_path / "missing.json"), "--criterion", "A:E001"]) == EXIT_VALIDATION
    good = tmp_path / "good.json"
    good.write_text("[[0, 0, 1]]")
    assert main(["eval", "--in", str(good), "--criterion", "E:9,9"]) == EXIT_VALIDATION


def test_repeated_output_identical(tmp_path, twin_file):
    outs = []
    for i in range(2):
        path = tmp_path / f"out{i}.csv"
        main(["depth", "--in", str(twin_file), "--all-appendix", "--modes", "2", "--workers", "1", "-o", str(path)])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ncprob.cli", "defaults"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "s_tol" in proc.stdout

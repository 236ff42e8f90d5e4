import subprocess
import sys
import time

import pytest

from heatsplit import harness as Hn
from heatsplit.cli import main


def run(*args):
    return subprocess.run([sys.executable, "-m", "heatsplit", *args], capture_output=True, text=True, timeout=600)


def test_selftest_quick_under_a_minute():
    t0 = time.perf_counter()
    out = run("selftest", "--quick")
    assert out.returncode == 0, out.stdout + out.stderr
    assert time.perf_counter() - t0 < 60
    assert "selftest PASS" in out.stdout


@pytest.mark.parametrize("name, suite", [("slp2d", "expansions2d"), ("dlp3d", "expansions3d"),
                                         ("coupled_vol", "coupled")])
def test_perturbation_is_caught(name, suite, capsys):
    assert main(["selftest", "--quick", "--suite", suite, "--perturb", name]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_unknown_perturbation(capsys):
    assert main(["selftest", "--perturb", "nothing"]) == 2


def test_expand_prints_coefficients(capsys):
    assert main(["expand", "--kind", "double", "--geometry", "ellipse", "--eps", "4e-4", "-P", "4"]) == 0
    out = capsys.readouterr().out
    assert "A_0" in out and "A_4" in out and "local(P=4)" in out


def test_oracle_verb(capsys):
    assert main(["oracle", "--kind", "volume", "--geometry", "ball", "--distance", "0.03", "-P", "4"]) == 0
    out = capsys.readouterr().out
    diff = float(out.split("difference")[1].split()[0])
    assert diff < 1e-6


@pytest.mark.parametrize("args", [
    ["expand", "--kind", "volume", "--geometry", "circle"],
    ["expand", "--geometry", "sphere", "--at", "0.3"],
    ["expand", "--distance", "-1"],
    ["expand", "-P", "6"],
    ["validate", "--equation", "coupled2d"],
    ["validate", "--p", "9"],
    ["validate", "--config", "/nonexistent/run.cfg"],
    ["study", "--orders", "2,7"],
])
def test_configuration_errors(args, capsys):
    assert main(args) == 2


def test_validate_pass_and_fail(capsys):
    common = ["validate", "--targets", "20", "--alpha-eps", "4", "--timing", "false"]
    assert main(common + ["--h", "0.0342"]) == 0
    out = capsys.readouterr().out
    assert "published value" in out and "validate PASS" in out
    assert main(common + ["--h", "0.0342", "--tolerance", "1e-6"]) == 1


def test_validate_reads_config_file(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("targets = 10\nalpha_eps = 4\np = 3\ntolerance = 0.5\n")
    assert main(["validate", "--config", str(path), "--h", "0.0494", "-P", "2"]) == 0
    assert "P = 2" in capsys.readouterr().out


def test_study_writes_csv_and_report(tmp_path, capsys):
    out = tmp_path / "study.csv"
    hs = ",".join("%.15e" % h for h in (Hn.FIGURE_H[0], Hn.FIGURE_H[2], Hn.FIGURE_H[6], Hn.FIGURE_H[11]))
    code = main(["study", "--targets", "20", "--alpha-eps", "4", "--h-values", hs, "--full",
                 "--orders", "0,1", "--output", str(out)])
    assert code == 0
    rows = Hn.read_csv(str(out))
    assert len(rows) == 8 and sorted({r.P for r in rows}) == [0, 1]
    assert (tmp_path / "study.report.txt").read_text().count("PASS") == 2

import json

import pytest

from hardy_lab.cli import main
from hardy_lab.config import THREADS_ENV
from hardy_lab.reports import REPORT_VERSION, SWEEP_COLUMNS

VERIFY = [
    "verify",
    "--domain",
    "disc:R=1",
    "--ineq",
    "convex-improved",
    "--band",
    "0.1,0.6",
]


def test_verify_writes_a_passing_report(tmp_path):
    out = tmp_path / "report.json"
    assert main([*VERIFY, "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["version"] == REPORT_VERSION
    assert report["config"]["command"] == "verify"
    assert "out" not in report["config"]
    (result,) = report["results"]
    assert result["passed"] is True
    assert result["inequality"] == "convex-improved"


def test_report_goes_to_stdout_without_out(capsys):
    assert main(VERIFY) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"][0]["domain"] == "disc:R=1"


def test_reports_are_byte_identical_across_runs(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main([*VERIFY, "--seed", "5", "--out", str(first)]) == 0
    assert main([*VERIFY, "--seed", "5", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_failed_computation_exits_one(tmp_path):
    out = tmp_path / "report.json"
    code = main(
        [
            "verify",
            "--domain",
            "disc:R=1",
            "--ineq",
            "general-ridge",
            "--band",
            "0.1,1.0",
            "--out",
            str(out),
        ]
    )
    assert code == 1
    (result,) = json.loads(out.read_text())["results"]
    assert result["error"] == "BandTouchesRidgeError"


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--domain", "torus:R=3,r=1", "--ineq", "convex-improved",
         "--band", "0.1,0.6"],
        ["verify", "--domain", "disc:R=1", "--band", "0.1,0.6"],
        ["verify", "--domain", "disc:R=1", "--ineq", "convex-improved",
         "--band", "0.6,0.1"],
        ["sweep", "--domain", "disc:R=1", "--ineq", "convex-improved",
         "--bands", ""],
        ["integrate"],
        [],
    ],
)
def test_invalid_configuration_exits_two(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().out == ""


def test_invalid_thread_count_exits_two(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "0")
    assert main(VERIFY) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "hardy-lab" in capsys.readouterr().out


def test_sweep_writes_sorted_csv(tmp_path, monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "2")
    out = tmp_path / "sweep.csv"
    code = main(
        [
            "sweep",
            "--domain",
            "disc:R=1",
            "--ineq",
            "convex-improved",
            "--bands",
            "0.2,0.6;0.1,0.5",
            "--profiles",
            "smooth-bump",
            "--resolutions",
            "128",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    lines = out.read_bytes().decode().split("\r\n")
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert [line.split(",")[3] for line in lines[1:3]] == ["0.1", "0.2"]
    assert lines[3] == ""


def test_fmt_sweep_has_one_row_per_alpha(tmp_path):
    out = tmp_path / "fmt.csv"
    code = main(
        [
            "sweep",
            "--domain",
            "disc:R=1",
            "--ineq",
            "fmt-comparison",
            "--alphas=-1.5;-1;0;1",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "alpha,R,n,min_margin,violations,passed"
    assert len(lines) == 5
    assert all(line.endswith(",0,true") for line in lines[1:])


def test_geometry_check_command(tmp_path):
    out = tmp_path / "geometry.json"
    code = main(
        [
            "geometry-check",
            "--domain",
            "disc:R=1",
            "--samples",
            "200",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert json.loads(out.read_text())["results"][0]["passed"] is True


def test_invariance_command(tmp_path):
    out = tmp_path / "invariance.json"
    code = main(
        [
            "invariance",
            "--map",
            "sqrt-quadratic:rho=1.5,R=3",
            "--samples",
            "100",
            "--pairs",
            "40",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    results = json.loads(out.read_text())["results"]
    assert [r.get("transform") for r in results[:3]] == [
        "scale=2",
        "rotation=0.6",
        "inversion",
    ]
    assert results[3]["univalence"]["verdict"] == "no-collision-found"

import json
import math

import numpy as np

from hardy_lab.reports import (
    REPORT_VERSION,
    SWEEP_COLUMNS,
    build_report,
    dumps_csv,
    dumps_json,
    sort_rows,
    write_text,
)


def _report(results):
    return build_report(
        {"command": "verify", "seed": 0},
        results,
        tolerances={"quadrature": 1e-3},
        truncations={},
        seed=0,
    )


def test_report_layout():
    report = _report([{"ratio": 1.5}])
    assert report["version"] == REPORT_VERSION
    assert report["environment"] == {
        "tolerances": {"quadrature": 1e-3},
        "truncations": {},
        "seed": 0,
    }
    assert report["results"] == [{"ratio": 1.5}]


def test_non_finite_values_are_spelled_out():
    report = _report(
        [
            {
                "ratio": math.inf,
                "min": -math.inf,
                "weight": np.float64("nan"),
                "ok": np.bool_(True),
                "x": np.array([1.0, 2.0]),
                "z": 1 + 2j,
            }
        ]
    )
    text = dumps_json(report)
    parsed = json.loads(text)
    assert parsed["results"][0] == {
        "ratio": "inf",
        "min": "-inf",
        "weight": "nan",
        "ok": True,
        "x": [1.0, 2.0],
        "z": [1.0, 2.0],
    }


def test_json_is_stable():
    a = dumps_json(_report([{"b": 1, "a": 2}]))
    b = dumps_json(_report([{"a": 2, "b": 1}]))
    assert a == b
    assert a.endswith("\n")


def test_csv_has_a_header_and_crlf_lines():
    rows = [
        {"domain": "disc:R=1", "ratio": 1.25, "converged": True},
        {"domain": "disc:R=1", "ratio": math.nan, "converged": False},
    ]
    text = dumps_csv(rows, ("domain", "ratio", "converged", "missing"))
    assert text.split("\r\n") == [
        "domain,ratio,converged,missing",
        "disc:R=1,1.25,true,",
        "disc:R=1,nan,false,",
        "",
    ]


def test_csv_quotes_cells_with_separators():
    text = dumps_csv([{"domain": "torus:R=3,r=1"}], ("domain",))
    assert text == 'domain\r\n"torus:R=3,r=1"\r\n'


def test_sweep_rows_sort_on_their_configuration():
    rows = [
        {"domain": "disc:R=1", "band_a": 0.2, "profile": "smooth-bump"},
        {"domain": "disc:R=1", "band_a": 0.1, "profile": "smooth-bump"},
        {"domain": "disc:R=1", "band_a": 0.1, "profile": "power-bump"},
    ]
    ordered = sort_rows(rows, ("domain", "band_a", "profile"))
    assert [(r["band_a"], r["profile"]) for r in ordered] == [
        (0.1, "power-bump"),
        (0.1, "smooth-bump"),
        (0.2, "smooth-bump"),
    ]
    assert SWEEP_COLUMNS[0] == "domain"


def test_write_text_keeps_line_endings(tmp_path):
    target = tmp_path / "table.csv"
    write_text(target, "a\r\nb\r\n")
    assert target.read_bytes() == b"a\r\nb\r\n"

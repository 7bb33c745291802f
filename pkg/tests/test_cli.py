from __future__ import annotations

import json
import math
import shutil
import subprocess

import pytest

from securesum.analysis import CSV_COLUMNS
from securesum.cli import CSV_VERSION_COMMENT, derive_run_seed, main
from securesum.source import binary_entropy

RATE_MARGIN_POINT = binary_entropy(0.1) + 0.15


def run_cli(argv, tmp_path, name="out.csv"):
    out = tmp_path / name
    rc = main(list(argv) + ["--out", str(out)])
    return rc, out.read_text() if out.exists() else ""


def parse_rows(text) -> list[dict]:
    lines = text.strip().splitlines()
    assert lines[0] == CSV_VERSION_COMMENT
    assert lines[1] == ",".join(CSV_COLUMNS)
    rows = []
    for line in lines[2:]:
        rows.append(dict(zip(CSV_COLUMNS, line.split(","))))
    return rows


def test_simulate_otp_has_no_errors(tmp_path):
    rc, text = run_cli(
        ["simulate", "--protocol", "zero-error-otp", "--n", "8",
         "--p", "0.25", "--trials", "1000", "--seed", "7"],
        tmp_path,
    )
    assert rc == 0
    (row,) = parse_rows(text)
    assert row["p_err_mc"] == "0.0"
    assert row["p_err_exact"] == "0.0"
    assert row["protocol"] == "zero-error-otp"
    assert (row["n"], row["m"]) == ("8", "8")
    assert row["in_region"] == "true"


def test_simulate_mc_tracks_exact(tmp_path):
    rc, text = run_cli(
        ["simulate", "--protocol", "secure-km", "--n", "12", "--rate", "0.9",
         "--p", "0.1", "--mode", "both", "--seed", "1", "--trials", "20000"],
        tmp_path,
    )
    assert rc == 0
    (row,) = parse_rows(text)
    assert row["m"] == "11"  # ceil(12 * 0.9), the realized size is reported
    exact, mc = float(row["p_err_exact"]), float(row["p_err_mc"])
    slack = max(float(row["mc_ci"]), 3 * math.sqrt(exact * (1 - exact) / 20000))
    assert abs(mc - exact) <= slack


def test_identical_commands_are_byte_identical(tmp_path):
    argv = ["simulate", "--protocol", "secure-km", "--n", "6", "--m", "3",
            "--p", "0.2", "--trials", "400", "--seed", "5"]
    _, first = run_cli(argv, tmp_path, "a.csv")
    _, second = run_cli(argv, tmp_path, "b.csv")
    assert first == second
    assert first.endswith("\n")


def test_leakage_secure_km(tmp_path):
    rc, text = run_cli(
        ["leakage", "--protocol", "secure-km", "--n", "4", "--m", "3",
         "--p", "0.25", "--seed", "5"],
        tmp_path,
    )
    assert rc == 0
    (row,) = parse_rows(text)
    for col in ("eps1", "eps2", "eps3"):
        assert abs(float(row[col])) <= 1e-10
    assert float(row["rho"]) == pytest.approx(0.75, abs=1e-10)
    assert float(row["eps4"]) >= 0.0
    assert row["p_err_exact"] != ""


def test_leakage_unmasked_syndromes_leak_to_charlie(tmp_path):
    rc, text = run_cli(
        ["leakage", "--protocol", "plain-km", "--n", "2", "--m", "2",
         "--p", "0.25", "--seed", "3"],
        tmp_path,
    )
    assert rc == 0
    (row,) = parse_rows(text)
    assert float(row["eps1"]) == pytest.approx(0.0, abs=1e-12)
    assert float(row["eps3"]) == pytest.approx(1.0, abs=1e-12)
    assert float(row["rho"]) == pytest.approx(0.0, abs=1e-12)


def test_leakage_otp(tmp_path):
    for p in ("0.0", "0.3", "0.5"):
        rc, text = run_cli(
            ["leakage", "--protocol", "zero-error-otp", "--n", "3", "--p", p],
            tmp_path,
        )
        assert rc == 0
        (row,) = parse_rows(text)
        for col in ("eps1", "eps2", "eps3", "eps4"):
            assert abs(float(row[col])) <= 1e-10
        for col in ("r12", "r13", "r23", "rho"):
            assert float(row[col]) == pytest.approx(1.0, abs=1e-10)
        assert row["in_region"] == "true"


def test_sweep_aggregate_means_per_point(tmp_path):
    base = ["sweep", "--protocol", "secure-km", "--n", "6,9",
            "--rate", repr(RATE_MARGIN_POINT), "--p", "0.1",
            "--seeds", "5", "--mode", "exact", "--seed", "3"]
    rc, full = run_cli(base, tmp_path, "full.csv")
    assert rc == 0
    rc, agg = run_cli(base + ["--aggregate"], tmp_path, "agg.csv")
    assert rc == 0
    rows = parse_rows(full)
    assert len(rows) == 10
    agg_rows = parse_rows(agg)
    assert [r["n"] for r in agg_rows] == ["6", "9"]
    for arow in agg_rows:
        group = [float(r["p_err_exact"]) for r in rows if r["n"] == arow["n"]]
        assert len(group) == 5
        assert float(arow["p_err_exact"]) == pytest.approx(sum(group) / 5, abs=1e-15)


def test_sweep_rows_follow_config_order(tmp_path):
    rc, text = run_cli(
        ["sweep", "--protocol", "plain-km,secure-km", "--n", "4,3",
         "--m", "2", "--p", "0.25,0.1", "--mode", "exact"],
        tmp_path,
    )
    assert rc == 0
    rows = parse_rows(text)
    got = [(r["protocol"], r["n"], r["p"]) for r in rows]
    assert got == [
        ("plain-km", "4", "0.25"), ("plain-km", "4", "0.1"),
        ("plain-km", "3", "0.25"), ("plain-km", "3", "0.1"),
        ("secure-km", "4", "0.25"), ("secure-km", "4", "0.1"),
        ("secure-km", "3", "0.25"), ("secure-km", "3", "0.1"),
    ]


def test_sweep_quad_region_over_p(tmp_path):
    rc, text = run_cli(
        ["sweep", "--quad", "1,1,1,1", "--p", "0,0.25,0.5"],
        tmp_path,
    )
    assert rc == 0
    rows = parse_rows(text)
    assert [r["in_region"] for r in rows] == ["true", "true", "true"]
    assert [r["p"] for r in rows] == ["0.0", "0.25", "0.5"]
    assert all(r["protocol"] == "" for r in rows)


def test_sweep_empty_list_is_usage_error(tmp_path):
    rc, _ = run_cli(
        ["sweep", "--protocol", "secure-km", "--n", "", "--m", "2", "--p", "0.1"],
        tmp_path,
    )
    assert rc == 2
    rc, _ = run_cli(["sweep", "--quad", "1,1,1,1", "--p", ""], tmp_path)
    assert rc == 2


def test_region_examples(tmp_path, capsys):
    assert main(["region", "--quad", "1,1,1,1", "--p", "0.25"]) == 0
    out = capsys.readouterr().out
    assert "verdict=in-region" in out
    assert "h2=0.8112781244591328" in out

    assert main(["region", "--quad", "0.8,0.9,0.9,0.9", "--p", "0.25"]) == 0
    out = capsys.readouterr().out
    assert "verdict=out-of-region" in out
    assert "min_component=0.8" in out

    assert main(["region", "--quad", "1,1,1,1", "--p", "0.5"]) == 0
    assert "verdict=in-region" in capsys.readouterr().out
    assert main(["region", "--quad", "1,1,1,0.999", "--p", "0.5"]) == 0
    assert "verdict=out-of-region" in capsys.readouterr().out


def test_usage_errors_exit_2(tmp_path, capsys):
    cases = [
        ["simulate", "--n", "4", "--p", "0.1"],  # missing protocol
        ["simulate", "--protocol", "nope", "--n", "4", "--m", "2", "--p", "0.1"],
        ["simulate", "--protocol", "secure-km", "--n", "4", "--p", "0.1"],  # no m or rate
        ["simulate", "--protocol", "secure-km", "--n", "4", "--m", "2", "--rate", "0.5", "--p", "0.1"],
        ["simulate", "--protocol", "zero-error-otp", "--n", "4", "--m", "2", "--p", "0.1"],
        ["simulate", "--protocol", "secure-km", "--n", "4", "--m", "2", "--p", "0.7"],
        ["simulate", "--protocol", "secure-km", "--n", "4", "--m", "5", "--p", "0.1"],
        ["simulate", "--protocol", "secure-km", "--n", "4", "--m", "2", "--p", "0.1", "--trials", "0"],
        ["simulate", "--protocol", "secure-km", "--n", "4", "--m", "2", "--p", "0.1", "--mode", "leakage"],
        ["region", "--quad", "1,1,1", "--p", "0.25"],
        ["region", "--quad", "1,1,1,-0.2", "--p", "0.25"],
        ["region", "--quad", "1,1,1,1", "--p", "0.6"],
    ]
    for argv in cases:
        assert main(argv) == 2, argv
        assert "usage error" in capsys.readouterr().err


def test_capacity_guard_exits_3(capsys):
    assert main(["leakage", "--protocol", "secure-km", "--n", "13", "--m", "3", "--p", "0.1"]) == 3
    assert "capacity error" in capsys.readouterr().err
    assert main(["simulate", "--protocol", "secure-km", "--n", "30", "--m", "26", "--p", "0.1"]) == 3
    assert "capacity error" in capsys.readouterr().err


def test_config_file_supplies_unset_options(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({
        "protocol": "secure-km", "n": 4, "m": 2, "p": 0.25,
        "trials": 200, "mode": "exact",
    }))
    rc, text = run_cli(["simulate", "--config", str(cfg), "--seed", "9"], tmp_path)
    assert rc == 0
    (row,) = parse_rows(text)
    assert (row["protocol"], row["n"], row["m"]) == ("secure-km", "4", "2")
    assert row["p_err_mc"] == ""  # mode exact came from the file

    # explicit flags beat the file
    rc, text = run_cli(["simulate", "--config", str(cfg), "--m", "3"], tmp_path, "o2.csv")
    assert rc == 0
    (row,) = parse_rows(text)
    assert row["m"] == "3"

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([1, 2, 3]))
    assert main(["simulate", "--config", str(bad)]) == 2


def test_p_parsing_keeps_digits(tmp_path):
    rc, text = run_cli(
        ["simulate", "--protocol", "plain-km", "--n", "4", "--m", "2",
         "--p", "0.123456789", "--mode", "exact"],
        tmp_path,
    )
    assert rc == 0
    (row,) = parse_rows(text)
    assert row["p"] == "0.123456789"


def test_rows_are_internally_consistent(tmp_path):
    from securesum.analysis import check_rate_region

    rc, text = run_cli(
        ["sweep", "--protocol", "secure-km,plain-km,zero-error-otp", "--n", "4,6",
         "--m", "2", "--p", "0.05,0.25,0.49", "--mode", "exact", "--seeds", "2"],
        tmp_path,
    )
    assert rc == 0
    rows = parse_rows(text)
    assert len(rows) == 3 * 2 * 3 * 2
    for row in rows:
        quad = tuple(float(row[c]) for c in ("r13", "r23", "r12", "rho"))
        expect = "true" if check_rate_region(quad, float(row["p"])) else "false"
        assert row["in_region"] == expect, row


def test_seed_derivation_is_stable_and_spread():
    a = derive_run_seed(0, "secure-km", 6, 3, 0.1, 0)
    assert a == derive_run_seed(0, "secure-km", 6, 3, 0.1, 0)
    others = {
        derive_run_seed(0, "secure-km", 6, 3, 0.1, 1),
        derive_run_seed(1, "secure-km", 6, 3, 0.1, 0),
        derive_run_seed(0, "plain-km", 6, 3, 0.1, 0),
        derive_run_seed(0, "secure-km", 7, 3, 0.1, 0),
        derive_run_seed(0, "secure-km", 6, 4, 0.1, 0),
        derive_run_seed(0, "secure-km", 6, 3, 0.2, 0),
    }
    assert a not in others and len(others) == 6


def test_installed_entry_point():
    exe = shutil.which("securesum")
    assert exe, "console script should be installed"
    proc = subprocess.run(
        [exe, "region", "--quad", "1,1,1,1", "--p", "0.25"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "verdict=in-region" in proc.stdout
    proc = subprocess.run([exe, "simulate"], capture_output=True, text=True)
    assert proc.returncode == 2

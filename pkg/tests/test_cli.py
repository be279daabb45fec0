import csv
import io
import json
import re
from fractions import Fraction

import pytest

from czic.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# ld-simulate

def test_simulate_very_weak(capsys):
    rc, out, _ = run(capsys, "ld-simulate", "--K", "4", "--n", "3", "--m", "1", "--seed", "7")
    assert rc == 0
    assert "9 bits/user, 4 uses, rate 3/4 == formula 3/4, PASS" in out


def test_simulate_very_strong(capsys):
    rc, out, _ = run(capsys, "ld-simulate", "--K", "4", "--n", "1", "--m", "3")
    assert rc == 0
    assert re.search(r"5 bits/user, 4 uses, rate 5/4 .*PASS", out)


def test_simulate_wrong_regime(capsys):
    rc, _, err = run(capsys, "ld-simulate", "--K", "3", "--n", "4", "--m", "3")
    assert rc == 2
    assert "very-weak" in err and "very-strong" in err


def test_simulate_bad_config_and_usage(capsys):
    assert run(capsys, "ld-simulate", "--K", "1", "--n", "3", "--m", "1")[0] == 2
    assert run(capsys, "ld-simulate", "--K", "4")[0] == 2
    assert run(capsys, "no-such-mode")[0] == 2


def test_simulate_global_and_trace(capsys, tmp_path):
    trace = tmp_path / "t.json"
    rc, out, _ = run(capsys, "ld-simulate", "--K", "3", "--n", "4", "--m", "3",
                     "--scheme", "global", "--trace", str(trace))
    assert rc == 0 and "PASS" in out
    doc = json.loads(trace.read_text())
    assert len(doc["users"]) == 3


def test_simulate_mutation_gives_exit_one(capsys):
    from czic.ld_schemes import mutated_scheme

    with mutated_scheme("very-weak"):
        rc, out, _ = run(capsys, "ld-simulate", "--K", "4", "--n", "3", "--m", "1")
    assert rc == 1 and "FAIL" in out


def test_simulate_record_output(capsys, tmp_path):
    out_path = tmp_path / "r.json"
    rc, _, _ = run(capsys, "ld-simulate", "--K", "4", "--n", "3", "--m", "1",
                   "--format", "json", "--out", str(out_path))
    assert rc == 0
    (rec,) = json.loads(out_path.read_text())
    assert rec["normalized_rate"] == {"num": 3, "den": 4} and rec["pass"] is True


# gdof-curve and ld-capacity

def test_gdof_curve_header_and_grid(capsys):
    rc, out, _ = run(capsys, "gdof-curve")
    assert rc == 0
    assert out.splitlines()[0] == "alpha,K,gdof_fb,gdof_nofb,gdof_fb_K2,global_fb"
    data = rows(out)
    assert len(data) == 73 * 4
    assert {r["K"] for r in data} == {"2", "3", "4", "10"}


def test_gdof_curve_two_user_column_is_v_curve(capsys):
    _, out, _ = run(capsys, "gdof-curve", "--format", "json")
    for r in json.loads(out):
        a = Fraction(r["alpha"]["num"], r["alpha"]["den"])
        v = max(1 - a / 2, a / 2)
        assert Fraction(r["gdof_fb_K2"]["num"], r["gdof_fb_K2"]["den"]) == v
        if r["K"] == 2:
            assert Fraction(r["gdof_fb"]["num"], r["gdof_fb"]["den"]) == v


def test_gdof_curve_named_rows(capsys):
    _, out, _ = run(capsys, "gdof-curve", "--format", "json")
    recs = json.loads(out)
    assert all(r["schema_version"] == 1 for r in recs)
    (k10,) = [r for r in recs if r["K"] == 10 and r["alpha"] == {"num": 3, "den": 1}]
    assert k10["gdof_fb"] == {"num": 11, "den": 10}
    ones = [r for r in recs if r["alpha"] == {"num": 1, "den": 1}]
    assert ones and all(r["gdof_fb"] == {"num": 1, "den": 2} for r in ones)


def test_gdof_curve_csv_values(capsys):
    _, out, _ = run(capsys, "gdof-curve", "--K", "10", "--alpha-step", "1", "--alpha-max", "3")
    data = rows(out)
    assert float(data[-1]["gdof_fb"]) == pytest.approx(1.1, abs=1e-15)


def test_bad_alpha_grid(capsys):
    assert run(capsys, "gdof-curve", "--alpha-step", "0")[0] == 2
    assert run(capsys, "gdof-curve", "--alpha-step", "x")[0] == 2


def test_ld_capacity(capsys):
    rc, out, _ = run(capsys, "ld-capacity", "--K", "4", "--alpha-step", "1/3", "--alpha-max", "1/3")
    assert rc == 0
    last = rows(out)[-1]
    assert last["regime"] == "very-weak"
    assert float(last["c_sym_fb"]) == 0.75 and float(last["type1_upper"]) == 5 / 6


# gauss-gap and gauss-gdof

def test_gauss_gap_default_passes(capsys):
    rc, out, err = run(capsys, "gauss-gap", "--workers", "1")
    assert rc == 0
    m = re.search(r"overall max gap ([0-9.]+); PASS", err)
    assert m and float(m.group(1)) <= 3


def test_gauss_gap_strong_slice(capsys):
    rc, out, err = run(capsys, "gauss-gap", "--regime", "strong", "--workers", "1")
    assert rc == 0
    data = rows(out)
    assert data and all(r["regime"] == "strong" for r in data)
    assert max(float(r["gap"]) for r in data) <= 0.5 + 1e-9


def test_gauss_gap_case_four_annotation(capsys):
    _, out, _ = run(capsys, "gauss-gap", "--regime", "very-weak", "--workers", "1")
    four = [r for r in rows(out) if r["case"] == "IV"]
    assert four and all(r["note"] == "upper <= 5/2" for r in four)


def test_gauss_gap_empty_range(capsys):
    assert run(capsys, "gauss-gap", "--snr-exp", "10", "4", "2")[0] == 2


def test_gauss_gdof(capsys):
    rc, out, _ = run(capsys, "gauss-gdof", "--alpha", "3", "--K", "4", "--exponent", "40")
    assert rc == 0
    (r,) = rows(out)
    assert float(r["gdof_fb"]) == 1.25 and float(r["abs_error"]) < 0.2


# determinism and file output

@pytest.mark.parametrize("argv", [
    ("gdof-curve",),
    ("gauss-gap", "--snr-exp", "4", "16", "4", "--workers", "1"),
])
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_outputs_byte_identical(tmp_path, capsys, argv, fmt):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([*argv, "--format", fmt, "--out", str(a)]) == 0
    assert main([*argv, "--format", fmt, "--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes() and a.stat().st_size > 0


def test_workers_do_not_change_output(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["gauss-gap", "--snr-exp", "4", "12", "4", "--workers", "1", "--out", str(a)])
    main(["gauss-gap", "--snr-exp", "4", "12", "4", "--workers", "2", "--out", str(b)])
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_invalid_workers(capsys):
    assert run(capsys, "gdof-curve", "--workers", "0")[0] == 2


# verify-all

def test_verify_all_subset(capsys):
    rc, out, _ = run(capsys, "verify-all", "--quick", "--only", "2", "3", "--workers", "1")
    assert rc == 0
    assert "[PASS] criterion  2" in out and "2/2 criteria passed" in out


def test_verify_all_mutation_fails_decode_check(capsys):
    rc, out, _ = run(capsys, "verify-all", "--quick", "--only", "1", "--workers", "1",
                     "--mutate", "very-weak")
    assert rc == 1
    assert "[FAIL] criterion  1" in out

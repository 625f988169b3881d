import json
import subprocess
import sys

import pytest

from chl.cli import main
from chl.series import TriSeries


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_series_text(capsys):
    code, out, _ = run(capsys, "series", "--name", "phi0-1", "--qmax", "0")
    assert code == 0
    assert out.strip() == "p^-1 + 10 + p"


def test_series_json_round_trips(capsys):
    code, out, _ = run(capsys, "--json", "series", "--name", "delta_N", "--N", "2", "--qmax", "5")
    assert code == 0
    s = TriSeries.from_json(out)
    assert [s.coefficient(n) for n in range(1, 6)] == [1, -8, 12, 64, -210]


def test_series_csv_is_sorted(capsys):
    code, out, _ = run(capsys, "series", "--name", "phi-tilde", "--N", "2", "--qmax", "2", "--tmax", "1", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "q,t,p,coefficient"
    assert len(lines) > 1


def test_series_is_deterministic(capsys):
    _, first, _ = run(capsys, "series", "--name", "chi10", "--qmax", "2", "--tmax", "2")
    _, second, _ = run(capsys, "series", "--name", "chi10", "--qmax", "2", "--tmax", "2")
    assert first == second


def test_p_window_flags(capsys):
    code, out, _ = run(capsys, "series", "--name", "phi0-1", "--qmax", "1", "--pmin", "0", "--pmax", "0")
    assert code == 0
    assert out.strip() == "10 + 108*q"


@pytest.mark.parametrize(
    "argv",
    [
        ("series", "--name", "nope", "--qmax", "1"),
        ("series", "--name", "chi10", "--qmax", "1"),
        ("series", "--name", "wp", "--qmax", "1"),
        ("series", "--name", "delta_N", "--N", "9", "--qmax", "2"),
        ("verify", "--suite", "nope"),
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_bad_flag_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["series", "--name", "K", "--qmax", "abc"])
    assert exc.value.code == 2


def test_verify_suite_text_and_json(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "scalars")
    assert code == 0
    assert "PASS" in out
    code, out, _ = run(capsys, "--json", "verify", "--suite", "vertex")
    assert code == 0
    data = json.loads(out)
    assert data[0]["suite"] == "vertex" and data[0]["passed"] is True


def test_verify_failure_exits_one(capsys, monkeypatch):
    from chl import suites

    def broken(r):
        r.add("deliberately false", False)

    monkeypatch.setitem(suites.SUITES, "scalars", broken)
    code, out, _ = run(capsys, "verify", "--suite", "scalars")
    assert code == 1
    assert "FAIL" in out


def test_cache_lifecycle(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CHL_CACHE_DIR", str(tmp_path))
    code, out, _ = run(capsys, "--json", "cache", "stat")
    assert code == 0 and json.loads(out)["entries"] == []
    code, out, _ = run(capsys, "cache", "warm", "--target", "lifts", "--N", "2", "--qmax", "2", "--tmax", "1")
    assert code == 0
    code, out, _ = run(capsys, "--json", "cache", "stat")
    keys = [e["key"] for e in json.loads(out)["entries"]]
    assert len(keys) == 1 and keys[0].startswith("lifts/")
    code, out, _ = run(capsys, "--json", "cache", "clear")
    assert code == 0 and json.loads(out) == {"removed": 1}
    code, out, _ = run(capsys, "--json", "cache", "stat")
    assert json.loads(out)["entries"] == []


def test_export_chat(capsys):
    code, out, _ = run(capsys, "export", "chat", "--N", "1", "--dmax", "8")
    assert code == 0
    data = json.loads(out)
    assert [0, 0, 1, -1, 2] in data["entries"]
    assert [0, 0, 0, 0, 20] in data["entries"]


def test_export_dt(capsys):
    code, out, _ = run(capsys, "export", "dt", "--kind", "untw", "--qmax", "0", "--tmax", "0", "--pmax", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "N,kind,n,s,d,value"
    assert "2,untw,1,-1,0,1/2" in lines
    code, out, _ = run(capsys, "--json", "export", "dt", "--N", "2", "--qmax", "0", "--tmax", "0", "--pmax", "2")
    assert code == 0
    assert all(row["kind"] == "chl" for row in json.loads(out))


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "chl.cli", "series", "--name", "eisenstein", "--k", "4", "--qmax", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "1 + 240*q + 2160*q^2"

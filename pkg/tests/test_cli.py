import argparse
import json
import subprocess
import sys

import pytest

from uflab import cli
from uflab.tables import parse_csv

SMALL = {
    "dsu-bench": ["--n", "2^6", "--m", "300", "--modes", "naive,ubs+pc", "--reps", "2"],
    "access-count": ["--d", "5", "--p", "0.08", "--trials", "20", "--modes", "naive,pc"],
    "threshold": ["--d", "5", "--p", "0.05,0.1", "--trials", "30"],
    "cluster-stats": ["--d", "5,7,9", "--p", "0.08", "--trials", "20"],
    "bond-perc": ["--L", "4,8", "--p", "0.4:0.6:0.1", "--trials", "30"],
    "erasure-perc": ["--L", "6", "--p", "0.05", "--trials", "20"],
    "soundness": ["--d", "5", "--p", "0.08", "--trials", "20"],
    "oracle-check": ["--trials", "10"],
}

HEADERS = {
    "dsu-bench": "n,m,mode,reps,accesses_per_merge,stderr",
    "threshold": "d,p,trials,failures,rate,lower,upper",
    "bond-perc": "L,p,trials,percolated,rate,lower,upper",
    "erasure-perc": "L,p,trials,percolated,rate,lower,upper",
}


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr().out


def test_parse_helpers():
    assert cli.parse_int("2^10") == 1024 and cli.parse_int("2**3") == 8 and cli.parse_int(" 7 ") == 7
    assert cli.int_list("2^8,300") == (256, 300)
    assert cli.float_list("0.08:0.11:0.005") == (0.08, 0.085, 0.09, 0.095, 0.1, 0.105, 0.11)
    assert cli.float_list("0.1,0.2") == (0.1, 0.2)
    for bad in ("", "a,b", "0.1:0.2:0", "1:2"):
        with pytest.raises(argparse.ArgumentTypeError):
            cli.float_list(bad)
    with pytest.raises(argparse.ArgumentTypeError):
        cli.int_list("x")
    with pytest.raises(argparse.ArgumentTypeError):
        cli.str_list(" , ")


@pytest.mark.parametrize("command", sorted(SMALL))
def test_subcommand_runs_and_is_byte_stable(command, tmp_path, capsys):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main([command, *SMALL[command], "--out", str(out1)]) == 0
    assert cli.main([command, *SMALL[command], "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    table = parse_csv(out1.read_text())
    assert table.rows
    if command in HEADERS:
        assert out1.read_text().splitlines()[0] == HEADERS[command]


def test_stdout_and_json(capsys):
    code, text = run(["threshold", *SMALL["threshold"], "--format", "json"], capsys)
    assert code == 0
    data = json.loads(text)
    assert data["columns"][0] == "d" and len(data["rows"]) == 2


def test_cluster_fits_file(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert cli.main(["cluster-stats", *SMALL["cluster-stats"], "--out", str(out)]) == 0
    fits = parse_csv((tmp_path / "c.fits.csv").read_text())
    assert fits.column("quantity") == ["size", "perimeter", "count"]
    custom = tmp_path / "f.csv"
    cli.main(["cluster-stats", *SMALL["cluster-stats"], "--out", str(out), "--fits-out", str(custom)])
    assert custom.read_text() == (tmp_path / "c.fits.csv").read_text()


def test_cluster_fits_follow_table_on_stdout(capsys):
    code, text = run(["cluster-stats", *SMALL["cluster-stats"]], capsys)
    table, fits = text.split("\n\n")
    assert table.startswith("d,p,") and fits.startswith("p,quantity,")


@pytest.mark.parametrize("argv", [
    [], ["nope"], ["threshold", "--p", "abc"], ["threshold", "--trials", "0"],
    ["threshold", "--decoder", "bp"], ["access-count", "--modes", "ubs+zz"],
    ["dsu-bench", "--linking", "random"], ["erasure-perc", "--model", "4d"], ["threshold", "--p", "1.5"],
])
def test_misuse_exits_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2
    assert capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "uflab", "bond-perc", "--L", "4", "--p", "1", "--trials", "3"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[1].startswith("4,1,3,3,1,")


def test_repro_list(capsys):
    code, text = run(["repro", "--list"], capsys)
    assert code == 0
    ids = [line.split()[0] for line in text.splitlines() if line and not line.startswith(" ")]
    assert ids[:3] == ["c1", "c2", "c3"] and "c12" in ids


def test_repro_unknown_claim(capsys):
    code, _ = run(["repro", "--claims", "c99"], capsys)
    assert code == 2

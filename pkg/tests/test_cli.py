import csv
import json
import subprocess
import sys

import pytest

from ergeom.cli import ConfigError, build_parser, main, read_config_file, resolve

SMALL = {
    "spectrum": ["--n", "80", "--d", "3", "--realizations", "3", "--bins", "20", "--mckay-points", "21"],
    "gap-scan": ["--ns", "40,80", "--d", "3", "--realizations", "3"],
    "curvature": ["--ns", "100,200", "--realizations", "2", "--triangles", "300"],
    "theory": ["--ds", "2,3", "--Deltas", "3,6", "--ns", "1000,10000", "--mc", "true", "--mc-samples", "20000"],
    "cheeger": ["--fixtures", "path:4,cycle:5", "--n", "10", "--realizations", "3"],
    "generate": ["--n", "50", "--d", "2"],
}


def run(tmp_path, command, *args):
    out = tmp_path / command
    code = main([command, "--out", str(out), *SMALL[command], *args])
    return code, out


def read_rows(path):
    with open(path) as f:
        return list(csv.reader(line for line in f if not line.startswith("#")))


def test_parser_has_every_subcommand():
    parser = build_parser()
    for command in SMALL:
        args = parser.parse_args([command])
        assert args.command == command


@pytest.mark.parametrize("command", list(SMALL))
def test_subcommand_writes_outputs_and_manifest(tmp_path, command):
    code, out = run(tmp_path, command)
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == command
    assert "out" not in manifest["config"]
    assert manifest["outputs"]
    for name in manifest["outputs"]:
        assert (out / name).exists()


def test_spectrum_columns(tmp_path):
    _, out = run(tmp_path, "spectrum")
    rows = read_rows(out / "histogram.csv")
    assert rows[0] == ["bin_left", "bin_right", "density"] and len(rows) == 21
    width = [float(r[1]) - float(r[0]) for r in rows[1:]]
    assert sum(float(r[2]) * w for r, w in zip(rows[1:], width)) == pytest.approx(1)
    assert read_rows(out / "eigenvalues.csv")[0] == ["realization", "index", "eigenvalue"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["bulk_distance"]) >= {"ks"}


def test_theory_columns(tmp_path):
    _, out = run(tmp_path, "theory")
    rows = read_rows(out / "theory.csv")
    assert rows[0][:10] == ["d", "Delta", "n", "q_log10", "rho", "rho_lower", "rho_upper", "rho_limit",
                            "p4_lower", "threshold_ok"]
    assert len(rows) == 1 + 2 * 2 * 2
    mc = read_rows(out / "theory_mc.csv")
    assert mc[0][:3] == ["n", "d", "Delta"] and len(mc) == 2


def test_cheeger_rows(tmp_path):
    _, out = run(tmp_path, "cheeger")
    rows = read_rows(out / "cheeger.csv")
    header = rows[0]
    assert header[:3] == ["graph", "n", "seed"]
    assert len(rows) == 1 + 2 + 3
    ok = header.index("sandwich_ok")
    assert all(r[ok] in ("True", "true", "1") for r in rows[1:])


def test_config_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# comment\nrealizations = 7\nd=4.0\nworkers=2\n")
    cfg = resolve("gap-scan", conf, {"d": "5"}, env={})
    assert cfg["realizations"] == 7 and cfg["d"] == 5.0 and cfg["workers"] == 2
    cfg = resolve("gap-scan", conf, {}, env={"ERGEOM_WORKERS": "3"})
    assert cfg["workers"] == 3
    cfg = resolve("gap-scan", conf, {"workers": "4"}, env={"ERGEOM_WORKERS": "3"})
    assert cfg["workers"] == 4
    assert resolve("gap-scan", env={})["ns"] == [200, 400, 800]


def test_manifest_is_a_config(tmp_path):
    _, out = run(tmp_path, "gap-scan")
    cfg = resolve("gap-scan", out / "manifest.json", env={})
    assert cfg["ns"] == [40, 80] and cfg["realizations"] == 3


@pytest.mark.parametrize("args", [["--ns", "80,40"], ["--realizations", "0"], ["--seed", "-1"], ["--d", "abc"],
                                  ["--family", "moebius"]])
def test_config_errors_exit_two(tmp_path, args):
    assert main(["gap-scan", "--out", str(tmp_path), *args]) == 2


def test_unknown_config_key(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("frobnicate=1\n")
    with pytest.raises(ConfigError):
        resolve("theory", conf, env={})
    assert main(["theory", "--config", str(conf), "--out", str(tmp_path)]) == 2
    conf.write_text("no equals sign\n")
    with pytest.raises(ConfigError):
        read_config_file(conf)


def test_computation_error_exits_one(tmp_path):
    code = main(["cheeger", "--out", str(tmp_path), "--fixtures", "path:25", "--n", "0", "--exact", "true"])
    assert code == 1


def test_subcritical_theory_row_recorded(tmp_path):
    out = tmp_path / "t"
    assert main(["theory", "--out", str(out), "--ds", "1.0,2.0", "--Deltas", "3", "--ns", "1000"]) == 0
    rows = read_rows(out / "theory.csv")
    status = rows[0].index("status")
    assert "Subcritical" in rows[1][status] and rows[2][status] == "ok"


def test_rerun_from_manifest_is_identical(tmp_path):
    _, out = run(tmp_path, "curvature")
    again = tmp_path / "again"
    assert main(["curvature", "--config", str(out / "manifest.json"), "--out", str(again), "--workers", "2"]) == 0
    first = json.loads((out / "manifest.json").read_text())["outputs"]
    second = json.loads((again / "manifest.json").read_text())["outputs"]
    assert first == second


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "ergeom.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "ergeom" in res.stdout

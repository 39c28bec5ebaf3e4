import hashlib
import json
import os
import subprocess
import sys

import pytest

from jjfab.cli import main
from jjfab.config import default_config, load_config, parse_config
from jjfab.errors import ConfigError

FAST_TOML = """\
seed = 11

[output]
dir = "{out}"

[growth]
rms_width_sites = 256
seeds = 2

[scenario]
sample_count = 3000
designs_nm = [[150, 200], [100, 100]]
"""


def _write_cfg(tmp_path, out, extra=""):
    p = tmp_path / "run.toml"
    p.write_text(FAST_TOML.format(out=out) + extra)
    return p


def _err(capsys):
    line = capsys.readouterr().err.strip()
    assert "\n" not in line
    return json.loads(line)


def _hashes(d):
    return {f: hashlib.sha256((d / f).read_bytes()).hexdigest() for f in sorted(os.listdir(d))}


# config loading

def test_defaults_have_no_seed():
    cfg = default_config()
    assert cfg.seed is None
    assert default_config(3).seed == 3
    with pytest.raises(ConfigError, match="seed"):
        cfg.scenario()


def test_unknown_key_rejected_with_valid_list():
    with pytest.raises(ConfigError, match="unknown key 'thikness_nm'.*valid keys"):
        parse_config({"scenario": {"thikness_nm": 3}})
    with pytest.raises(ConfigError, match="unknown block"):
        parse_config({"wafer": {"radius_mm": 50}})
    with pytest.raises(ConfigError, match="top level"):
        parse_config({"sede": 1})


def test_type_and_enum_errors():
    with pytest.raises(ConfigError, match="seed"):
        parse_config({"seed": "x"})
    with pytest.raises(ConfigError, match="format"):
        parse_config({"output": {"format": "xml"}})
    with pytest.raises(ConfigError, match="grouping"):
        parse_config({"scenario": {"grouping": "wafer"}})
    with pytest.raises(ConfigError, match="valid axes"):
        parse_config({"sweep": {"axis": "bottom.colour"}})


def test_load_config_round_trip(tmp_path):
    cfg = load_config(_write_cfg(tmp_path, tmp_path / "o"))
    sc = cfg.scenario()
    assert sc.rng_seed == 11 and sc.sample_count == 3000
    assert sc.designs == ((150.0, 200.0), (100.0, 100.0))
    assert cfg.with_seed(4).seed == 4 and cfg.seed == 11


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("seed = = 1\n")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(bad)


# CLI

def test_junction_frequency_query(capsys):
    assert main(["junction", "--f01-ghz", "4.3", "--ec-mhz", "250"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["rn_ohm"] == pytest.approx(13560, rel=1e-3)
    assert "warning" not in out


def test_junction_rn_query_and_warning(capsys):
    assert main(["junction", "--rn-ohm", "13566.9"]) == 0
    assert json.loads(capsys.readouterr().out)["f01_ghz"] == pytest.approx(4.3, abs=1e-4)
    assert main(["junction", "--rn-ohm", "200000"]) == 0
    assert "warning" in json.loads(capsys.readouterr().out)


def test_analyze_qubit_table(capsys, data_dir, tmp_path):
    out = tmp_path / "rep"
    assert main(["analyze", "--qubits", str(data_dir / "qubits_table1.csv"), "--out", str(out)]) == 0
    rows = json.loads(capsys.readouterr().out)["qubits"]
    total = next(r for r in rows if r["group"] == "total" and r["quantity"] == "f01_ghz")
    assert total["mean_rounded"] == 4.31
    assert total["sigma_over_mean_percent"] == 1.91
    assert {"qubit_stats.csv", "analysis_report.json", "manifest.json"} <= set(os.listdir(out))


def test_analyze_measurements_discloses_policy(capsys, data_dir):
    assert main(["analyze", "--measurements", str(data_dir / "golden_chip_measurements.csv")]) == 0
    rep = json.loads(capsys.readouterr().out)["measurements"]
    assert "MAD" in rep["outliers"]["policy"]
    assert [g["group"] for g in rep["ic_by_design"]] == ["100x100", "150x200", "150x600"]


def test_missing_config_names_file(capsys, tmp_path):
    missing = tmp_path / "missing.conf"
    assert main(["simulate", "--config", str(missing)]) == 1
    err = _err(capsys)
    assert err["error"] == "ConfigError" and str(missing) in err["message"]


def test_missing_seed_is_error(capsys, tmp_path):
    assert main(["simulate", "--out", str(tmp_path)]) == 1
    assert "seed" in _err(capsys)["message"]


def test_unknown_key_via_cli(capsys, tmp_path):
    cfg = _write_cfg(tmp_path, tmp_path / "o", "\n[oxidation]\npresure_mbar = 0.1\n")
    assert main(["simulate", "--config", str(cfg)]) == 1
    assert "presure_mbar" in _err(capsys)["message"]


@pytest.mark.parametrize("argv", [["frobnicate"], ["junction"], ["simulate", "--bogus"], []])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


@pytest.mark.parametrize("cmd", ["simulate", "sweep", "optimize", "analyze", "calibrate", "junction", "report"])
def test_help_per_subcommand(cmd, capsys):
    with pytest.raises(SystemExit) as exc:
        main([cmd, "--help"])
    assert exc.value.code == 0
    assert "usage" in capsys.readouterr().out


def test_unwritable_output_dir(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["report", "--out", str(blocker / "sub")]) == 1
    assert "output directory" in _err(capsys)["message"]


def test_simulate_deterministic_and_manifest(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, tmp_path / "unused")
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert main(["simulate", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(b)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(c), "--seed", "12"]) == 0
    assert _hashes(a) == _hashes(b)
    assert _hashes(a)["summary.csv"] != _hashes(c)["summary.csv"]
    man = json.loads((a / "manifest.json").read_text())
    declared = {f["path"]: f["sha256"] for f in man["files"]}
    actual = _hashes(a)
    actual.pop("manifest.json")
    assert declared == actual
    assert {"summary.csv", "summary_report.json", "ic_map.svg"} <= set(declared)


def test_json_output_format(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, tmp_path / "o", "\n").read_text().replace('dir = ', 'format = "json"\ndir = ')
    p = tmp_path / "j.toml"
    p.write_text(cfg)
    assert main(["simulate", "--config", str(p)]) == 0
    rows = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert [r["group"] for r in rows] == ["150x200", "100x100"]


def test_failed_run_removes_stale_manifest(tmp_path, capsys):
    out = tmp_path / "o"
    out.mkdir()
    (out / "manifest.json").write_text("{}")
    cfg = _write_cfg(tmp_path, out)
    assert main(["sweep", "--config", str(cfg), "--axis", "bottom.colour", "--values", "1,2"]) == 1
    assert not (out / "manifest.json").exists()


def test_sweep_writes_trace(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, tmp_path / "o")
    assert main(["sweep", "--config", str(cfg), "--axis", "top.angle_deg", "--values", "0,30"]) == 0
    lines = (tmp_path / "o" / "sweep_trace.csv").read_text().splitlines()
    assert lines[0].startswith("axis,value,")
    assert len(lines) == 1 + 2 * 2


def test_bad_values_and_bounds(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, tmp_path / "o")
    assert main(["sweep", "--config", str(cfg), "--axis", "top.angle_deg", "--values", "a,b"]) == 1
    assert main(["optimize", "--config", str(cfg), "--bound", "top.angle_deg"]) == 1


def test_calibrate_throw_and_oxidation(tmp_path, capsys):
    assert main(["calibrate", "throw", "--nonuniformity", "0.14", "--tilt-deg", "60"]) == 0
    assert json.loads(capsys.readouterr().out)["throw_distance_mm"] > 0
    csv = tmp_path / "ox.csv"
    csv.write_text("exposure_mbar_s,jc_a_per_um2\n1,2e-4\n10,5e-5\n100,1.25e-5\n")
    assert main(["calibrate", "oxidation", "--csv", str(csv)]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["rms_residual_log"] == pytest.approx(0.0, abs=1e-9)


def test_report_writes_maps(tmp_path, capsys):
    out = tmp_path / "g"
    assert main(["report", "--out", str(out)]) == 0
    assert {"thickness_map.csv", "thickness_map.svg", "linewidth_map.csv", "linewidth_map.svg",
            "geometry_report.json", "manifest.json"} == set(os.listdir(out))


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "jjfab.cli", "junction", "--f01-ghz", "4.3"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert json.loads(r.stdout)["ej_over_h_ghz"] == pytest.approx(10.35, abs=0.01)

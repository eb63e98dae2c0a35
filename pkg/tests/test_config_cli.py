import csv
import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptscatter.cli import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_VERIFY, main
from ptscatter.config import RunConfig, parse_run_config
from ptscatter.errors import GrammarError, NoConvergence, SchemaError
from ptscatter.spinflip import all_configs

BASE = {"v_r_ev": 0.3, "v_i_ev": 0.005, "l_um": 0.5, "config": "L0M", "e_min": 0.31, "e_max": 1.0}


def doc(**over):
    d = dict(BASE)
    d.update(over)
    return json.dumps(d)


# -- run configs -----------------------------------------------------------------

def test_parse_fills_defaults():
    cfg = parse_run_config(doc())
    assert (cfg.mass_ratio, cfg.e0_ev, cfg.n_points) == (1.0, 1.0, 4000)
    assert cfg.device().name == "L0M"
    spec = cfg.to_spec()
    assert spec.n_points == 4000 and spec.params.v_imag == 0.005


def test_device_name_is_canonical():
    assert parse_run_config(doc(config="l2mr1")).config == "L2MR1"


def test_bad_device():
    with pytest.raises(GrammarError):
        parse_run_config(doc(config="L3M"))


def test_unknown_field_is_named():
    with pytest.raises(SchemaError) as info:
        parse_run_config(doc(typo_field=1))
    assert info.value.path == "typo_field"


@pytest.mark.parametrize("text,path", [
    ("[1, 2]", "$"), ("{not json", "$"),
    (json.dumps({k: v for k, v in BASE.items() if k != "l_um"}), "l_um"),
    (doc(v_r_ev="0.3"), "v_r_ev"), (doc(n_points=True), "n_points"), (doc(n_points=10.0), "n_points"),
    (doc(v_i_ev=-1.0), "v_i_ev"), (doc(l_um=0), "l_um"), (doc(n_points=1), "n_points"),
    (doc(e_min=2.0), "e_min"), (doc(config=5), "config"),
])
def test_schema_errors(text, path):
    with pytest.raises(SchemaError) as info:
        parse_run_config(text)
    assert info.value.path == path


def test_nonfinite_numbers_rejected():
    with pytest.raises(SchemaError):
        parse_run_config('{"v_r_ev": NaN, "v_i_ev": 0, "l_um": 1, "config": "M", "e_min": 0.1, "e_max": 1}')


run_configs = st.builds(
    RunConfig,
    v_r_ev=st.floats(0, 0.5), v_i_ev=st.floats(0, 0.02), l_um=st.floats(0.1, 1.0),
    config=st.sampled_from([c.name for c in all_configs()]),
    e_min=st.floats(0.01, 1.0), e_max=st.just(2.0),
    mass_ratio=st.floats(0.05, 5), e0_ev=st.floats(0.1, 10), n_points=st.integers(2, 10**5),
    out_dir=st.text(min_size=1, max_size=20),
)


@settings(max_examples=200)
@given(run_configs)
def test_round_trip(cfg):
    assert parse_run_config(cfg.to_json()) == cfg


# -- CLI -------------------------------------------------------------------------

def run(argv):
    return main([str(a) for a in argv])


def read(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_sweep_subcommand(tmp_path):
    out = tmp_path / "o"
    rc = run(["sweep", "--vr", 0.3, "--vi", 0.005, "--l", 0.5, "--device", "M",
              "--emin", 0.31, "--emax", 1.0, "--n", 4000, "--out", out])
    assert rc == EXIT_OK
    rows = read(out / "sweep.csv")
    assert len(rows) == 4001
    assert json.loads((out / "metadata.json").read_text())["config"] == "M"


def test_config_file_with_flag_override(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(doc(n_points=50, out_dir=str(tmp_path / "from_file")))
    assert run(["sweep", "--config", path, "--n", 30]) == EXIT_OK
    assert len(read(tmp_path / "from_file" / "sweep.csv")) == 31


def test_atr_and_ssb_subcommands(tmp_path):
    assert run(["atr", "--out", tmp_path]) == EXIT_OK
    assert read(tmp_path / "atr.csv")[0] == ["E_over_E0", "side", "T", "R_min", "tangent"]
    assert run(["ssb", "--emin", 0.31, "--emax", 2.0, "--out", tmp_path]) == EXIT_OK
    crit = json.loads((tmp_path / "critical.json").read_text())
    assert crit["convention_mismatch"] and len(read(tmp_path / "ssb.csv")) == 2


def test_manifold_subcommand(tmp_path):
    assert run(["manifold", "--lengths", 0.25, 1.0, "--out", tmp_path]) == EXIT_OK
    rows = read(tmp_path / "manifold.csv")[1:]
    assert {r[0] for r in rows} == {"0.25", "1"}


def test_configs_subcommand(tmp_path):
    assert run(["configs", "--out", tmp_path]) == EXIT_OK
    rows = read(tmp_path / "table1.csv")
    assert len(rows) == 17 and all(r[5] == "true" for r in rows[1:])


def test_figures_subcommand(tmp_path):
    assert run(["figures", "--which", "fig2", "--n", 500, "--out", tmp_path]) == EXIT_OK
    assert (tmp_path / "fig2" / "sweep.csv").exists()


def test_verify_subcommand(capsys):
    assert run(["verify", "--only", "SC4", "SF7", "CL1"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split()[:2] for ln in lines] == [["SC4", "PASS"], ["SF7", "PASS"], ["CL1", "PASS"]]


def test_verify_failure_exit_code(monkeypatch):
    from ptscatter import verify

    monkeypatch.setattr(verify, "run_all", lambda ids=None: [("XX1", False, "forced")])
    assert run(["verify"]) == EXIT_VERIFY


@pytest.mark.parametrize("argv", [
    ["sweep", "--device", "L3M"], ["sweep", "--n", 1], ["sweep", "--bogus"], [],
    ["sweep", "--vi", -1], ["sweep", "--config", "/nonexistent/run.json"], ["figures"],
    ["sweep", "--emin", 1.0, "--emax", 0.5],
])
def test_invalid_input_exit_code(argv, capsys):
    assert run(argv) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "invalid input" in err or "usage" in err


def test_numerical_failure_exit_code(monkeypatch, tmp_path, capsys):
    from ptscatter import cli

    def boom(*a, **k):
        raise NoConvergence("forced")

    monkeypatch.setattr(cli, "reproduce_table1", boom)
    assert run(["configs", "--out", tmp_path]) == EXIT_NUMERICAL
    assert "NoConvergence" in capsys.readouterr().err


def test_backend_flag(tmp_path):
    from ptscatter import _backend

    before = _backend.name()
    try:
        assert run(["sweep", "--n", 10, "--backend", "python", "--out", tmp_path]) == EXIT_OK
        assert json.loads((tmp_path / "metadata.json").read_text())["backend"] == "python"
    finally:
        _backend.use_backend(before)


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ptscatter", "sweep", "--n", "8", "--out", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout == "" and "wrote" in proc.stderr


def test_cli_sweep_is_deterministic_across_workers(tmp_path):
    for w in (1, 3):
        assert run(["sweep", "--device", "L0M", "--n", 600, "--workers", w, "--out", tmp_path / f"w{w}"]) == EXIT_OK
    assert (tmp_path / "w1/sweep.csv").read_bytes() == (tmp_path / "w3/sweep.csv").read_bytes()

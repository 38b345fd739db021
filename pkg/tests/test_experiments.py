import json
import os

import numpy as np
import pytest

from kposim.cli import main as cli_main
from kposim.csvio import read_csv, write_csv
from kposim.errors import ConfigError
from kposim.experiments import (
    EXPERIMENTS,
    ExperimentConfig,
    list_experiments,
    run_experiment,
    validate_config,
)


def test_validate_config_defaults():
    cfg = validate_config({"experiment": "sensitivity_vs_p"})
    assert cfg.experiment == "sensitivity_vs_p"
    assert cfg.overrides == {}
    assert cfg.workers == 1 and not cfg.smoke


def test_validate_config_rejects_unknown_experiment():
    with pytest.raises(ConfigError):
        validate_config({"experiment": "does_not_exist"})


def test_validate_config_rejects_unknown_key():
    with pytest.raises(ConfigError):
        validate_config({"experiment": "sensitivity_vs_p", "overrides": {"bogus": 1}})


def test_validate_config_rejects_bad_range():
    with pytest.raises(ConfigError):
        validate_config({"experiment": "gamma_maps", "overrides": {"kappa_ex": -1.0}})


def test_validate_config_parses_json_text():
    raw = json.dumps({"experiment": "gamma_maps", "overrides": {"p_n": 5}, "smoke": True})
    cfg = validate_config(raw)
    assert cfg.overrides["p_n"] == 5 and cfg.smoke
    with pytest.raises(ConfigError):
        validate_config("{not json")


def test_config_roundtrip_through_serialization():
    over = {"p_min": 9.0, "omega_a": 0.1}
    cfg = validate_config({"experiment": "sensitivity_vs_p", "overrides": over})
    again = validate_config(json.dumps({"experiment": cfg.experiment, "overrides": cfg.overrides}))
    assert again.overrides == over


def test_every_experiment_is_listed():
    listed = {name for name, _, _ in list_experiments()}
    assert listed == set(EXPERIMENTS)
    assert len(listed) == 14


def test_csv_roundtrip(tmp_path):
    path = str(tmp_path / "t.csv")
    write_csv(path, {"a": 1.5, "b": "x"}, ["c1", "c2"], [(1.0, 2.0), (0.1, -3.5e-7)])
    meta, cols, vals = read_csv(path)
    assert meta["a"] == "1.5" and meta["b"] == "x"
    assert cols == ["c1", "c2"]
    assert vals[1, 1] == -3.5e-7


def test_sensitivity_experiment_bytes_identical(tmp_path):
    cfg = ExperimentConfig(
        "sensitivity_vs_omega",
        overrides={"omega_step": 0.1},
        out_dir=str(tmp_path / "a"),
        smoke=True,
    )
    paths1 = run_experiment(cfg)
    cfg2 = ExperimentConfig(
        "sensitivity_vs_omega",
        overrides={"omega_step": 0.1},
        out_dir=str(tmp_path / "b"),
        smoke=True,
    )
    paths2 = run_experiment(cfg2)
    for pa, pb in zip(paths1, paths2):
        with open(pa, "rb") as fa, open(pb, "rb") as fb:
            assert fa.read() == fb.read()


def test_workers_do_not_change_output(tmp_path):
    base = {"experiment": "sensitivity_vs_p", "overrides": {"p_step": 4.0}, "smoke": True}
    p1 = run_experiment(validate_config({**base, "out_dir": str(tmp_path / "w1")}))
    p2 = run_experiment(validate_config({**base, "out_dir": str(tmp_path / "w2"), "workers": 2}))
    for pa, pb in zip(p1, p2):
        with open(pa, "rb") as fa, open(pb, "rb") as fb:
            assert fa.read() == fb.read()


def test_gamma_complex_plane_collinear(tmp_path):
    cfg = ExperimentConfig("gamma_complex_plane", out_dir=str(tmp_path), smoke=True)
    paths = run_experiment(cfg)
    fixed = [p for p in paths if "fixed_w20" in p][0]
    _, cols, vals = read_csv(fixed)
    on_res = vals[np.isclose(vals[:, 0], 0.0)]
    pts = on_res[:, 2] + 1j * on_res[:, 3]
    # five points affine in rho00: residual of a linear least-squares fit
    a = np.vstack([on_res[:, 1], np.ones(len(pts))]).T
    _, res, _, _ = np.linalg.lstsq(a, pts, rcond=None)
    assert len(pts) == 5
    assert (res[0] if len(res) else 0.0) < 1e-10


def test_sensitivity_vs_p_tail_near_asymptote(tmp_path):
    cfg = ExperimentConfig(
        "sensitivity_vs_p", overrides={"p_min": 28.0, "p_step": 1.0}, out_dir=str(tmp_path)
    )
    paths = run_experiment(cfg)
    _, cols, vals = read_csv([p for p in paths if "omega0.1" in p][0])
    assert abs(vals[-1, cols.index("sens_w20")] - 4.0 / 3.0) / (4.0 / 3.0) < 0.05


def test_header_metadata_complete(tmp_path):
    cfg = ExperimentConfig("sensitivity_vs_omega", overrides={"omega_step": 0.2},
                           out_dir=str(tmp_path), smoke=True)
    (path,) = run_experiment(cfg)
    meta, _, _ = read_csv(path)
    assert meta["experiment"] == "sensitivity_vs_omega"
    assert meta["version"] == "0.1.0"
    assert meta["param.omega_step"] == "0.20000000000000001"
    assert "param.p" in meta and "param.kappa_ex" in meta


def test_cli_list_and_exit_codes(tmp_path, capsys):
    assert cli_main(["list"]) == 0
    out = capsys.readouterr().out
    assert "sensitivity_vs_p" in out and "wigner_reconstruction" in out

    rc = cli_main(["run", "--experiment", "nope", "--out", str(tmp_path)])
    assert rc == 2
    rc = cli_main(["run", "--experiment", "gamma_maps", "--set", "bogus=3",
                   "--out", str(tmp_path)])
    assert rc == 2


def test_cli_numeric_failure_exit_code(tmp_path, capsys):
    # all rates zero puts the resonant denominator at exactly zero
    rc = cli_main(["run", "--experiment", "nominal_rates", "--out", str(tmp_path),
                   "--set", "kappa_ex=0", "--set", "kappa_int=0", "--set", "gamma=0",
                   "--set", "alpha_step=0.5"])
    assert rc == 3
    err = capsys.readouterr().err
    assert "sweep point" in err and "alpha=1.5" in err


def test_ramp_relaxation_experiment_schema(tmp_path):
    cfg = ExperimentConfig(
        "ramp_relaxation",
        overrides={"t_max": 30.0, "sample_dt": 5.0, "dim": 42},
        out_dir=str(tmp_path),
    )
    (path,) = run_experiment(cfg)
    _, cols, vals = read_csv(path)
    assert cols == ["t", "infidelity", "pop00", "pop11", "offdiag_abs"]
    late = vals[vals[:, 0] >= 10.0]
    assert late[:, 1].max() < 1e-3


def test_cli_run_with_config_file_and_overrides(tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({
        "experiment": "sensitivity_vs_omega",
        "overrides": {"omega_step": 0.35},
        "smoke": True,
    }))
    rc = cli_main(["run", "--config", str(cfgfile), "--out", str(tmp_path / "r")])
    assert rc == 0
    meta, _, vals = read_csv(str(tmp_path / "r" / "sensitivity_vs_omega.csv"))
    assert meta["param.omega_step"] == "0.34999999999999998"
    assert len(vals) == 2

import json
import math

import numpy as np
import pytest

from ctqw_defect.cli import main
from ctqw_defect.experiments import (
    ConfigError,
    ExperimentConfig,
    build_config,
    cmd_bound_energy,
    cmd_defect_prob,
    cmd_evolve,
    cmd_sigma,
    format_cell,
    parse_sweep,
    read_config_file,
    to_csv,
)
from ctqw_defect.lattice import make_params


def _cfg(**values):
    return build_config(values)


def test_parse_sweep_inclusive():
    s = parse_sweep("alpha:-1:1:0.5")
    assert s.variable == "alpha" and s.values == (-1.0, -0.5, 0.0, 0.5, 1.0)
    assert len(parse_sweep("alpha:-6:6:0.1").values) == 121
    assert parse_sweep("jd:0:3:1").values == (0, 1, 2, 3)


@pytest.mark.parametrize("text", ["alpha:0:1", "gamma:0:1:0.1", "alpha:1:0:0.1", "alpha:0:1:0"])
def test_parse_sweep_rejects(text):
    with pytest.raises(ConfigError):
        parse_sweep(text)


def test_config_rejects_negative_time():
    with pytest.raises(ConfigError):
        ExperimentConfig(make_params(2, 1, 0, 0, 0), times=(-1.0,))


def test_format_cell_twelve_digits():
    assert format_cell(0.692427) == "6.92427000000e-01"
    assert format_cell(3) == "3" and format_cell(None) == ""


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 3  # position defect\nbeta = 0.5\nt = 5, 10\nsweep = jd:0:2:1\n")
    values = read_config_file(cfg)
    assert values == {"alpha": 3.0, "beta": 0.5, "t": [5.0, 10.0], "sweep": "jd:0:2:1"}
    out = tmp_path / "out"
    assert main(["evolve", "--config", str(cfg), "--alpha", "-1", "--t", "2",
                 "--out", str(out)]) == 0
    meta = json.loads((out / "evolve_jd_1_t_2.json").read_text())
    assert meta["point_params"]["alpha"] == -1.0
    assert meta["point_params"]["beta"] == 0.5


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("alpah = 3\n")
    with pytest.raises(ConfigError):
        read_config_file(cfg)
    assert main(["evolve", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_bound_energy_alpha_sweep():
    ds = cmd_bound_energy(_cfg(sweep="alpha:-6:6:0.1"))
    for alpha, count, lam1, lam2 in ds.rows:
        assert lam2 is None
        if alpha == 0:
            assert count == 0
        else:
            assert count == 1
            assert (lam1 > 4) if alpha > 0 else (lam1 < 0)


def test_bound_energy_beta_sweep():
    ds = cmd_bound_energy(_cfg(sweep="beta:-4:4:0.1"))
    for beta, count, *_ in ds.rows:
        assert count == (0 if -2 <= beta <= 0 else 2), beta
    assert "oracle (forced)" in ds.metadata["methods"]


def test_evolve_time_zero_delta():
    (ds,) = cmd_evolve(_cfg(alpha=3.0, j0=2, t=[0.0]))
    P = {j: p for j, p in ds.rows}
    assert P[2] == pytest.approx(1.0)
    assert sum(P.values()) == pytest.approx(1.0)
    for key in ("backend", "window", "norm_deviation", "bound_states", "runtime", "quadrature"):
        assert key in ds.metadata


def test_evolve_fig2a_and_both_backends():
    (ds,) = cmd_evolve(_cfg(alpha=3.0, backend="both"))
    assert ds.header == ["j", "P_spectral", "P_oracle"]
    row = next(r for r in ds.rows if r[0] == 0)
    assert row[1] == pytest.approx(0.692427, abs=1e-4)
    assert ds.metadata["max_backend_diff"] <= 1e-8


def test_evolve_disconnected_is_labeled():
    (ds,) = cmd_evolve(_cfg(beta=-1.0, t=[10.0]))
    assert ds.metadata["backend"] == "oracle (forced)"


def test_defect_prob_alpha_symmetry():
    ds = cmd_defect_prob(_cfg(sweep="alpha:-4:4:0.5"))
    P = dict(ds.rows)
    for a in np.arange(0.5, 4.01, 0.5):
        assert P[a] == pytest.approx(P[-a], abs=1e-9)
    pos = [P[a] for a in np.arange(0.5, 4.01, 0.5)]
    assert all(x < y for x, y in zip(pos, pos[1:]))


def test_defect_prob_beta_minus_one():
    ds = cmd_defect_prob(_cfg(sweep="beta:-1.5:-0.5:0.5"))
    P = dict(ds.rows)
    assert P[-1.0] == pytest.approx(1.0, abs=1e-12)
    assert ds.metadata["backends"][1] == "oracle (forced)"


def test_defect_prob_far_defect_rises_then_falls():
    ds = cmd_defect_prob(_cfg(jd=2, sweep="alpha:0:6:0.5"))
    P = [p for _, p in ds.rows]
    peak = int(np.argmax(P))
    assert 0 < peak < len(P) - 1 and P[-1] < 0.1 * P[peak]


def test_defect_prob_needs_single_time():
    with pytest.raises(ConfigError):
        cmd_defect_prob(_cfg(sweep="alpha:0:1:1", t=[1.0, 2.0]))


def test_sigma_series():
    ds = cmd_sigma(_cfg(alpha=3.0, sweep="jd:0:1:1", t=[5.0, 30.0]))
    assert ds.header == ["t", "free", "jd=0", "jd=1"]
    t5, t30 = ds.rows
    assert t5[1] / 5 == pytest.approx(math.sqrt(2), rel=1e-3)
    assert t30[1] / 30 == pytest.approx(math.sqrt(2), rel=1e-3)
    assert t30[2] < t30[3] < t30[1]


def test_sigma_negative_beta_exceeds_free():
    (_, free, defect), = cmd_sigma(_cfg(beta=-0.5, t=[30.0])).rows
    assert defect > free


def test_csv_byte_identical_and_sidecar(tmp_path):
    args = ["defect-prob", "--sweep", "alpha:-1:1:0.5", "--t", "30", "--jobs", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args[:-2] + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "defect_prob.csv").read_bytes()
    b = (tmp_path / "b" / "defect_prob.csv").read_bytes()
    assert a == b and b"\r" not in a
    assert a.splitlines()[0] == b"alpha,P_jd"
    meta = json.loads((tmp_path / "a" / "defect_prob.json").read_text())
    for key in ("params", "backend", "quadrature", "window_buffer", "code_version"):
        assert key in meta


def test_to_csv_row_order():
    ds = cmd_bound_energy(_cfg(sweep="alpha:-1:1:1"))
    lines = to_csv(ds).splitlines()
    assert lines[0] == "alpha,count,lambda_1,lambda_2"
    assert [line.split(",")[0] for line in lines[1:]] == [
        format_cell(-1.0), format_cell(0.0), format_cell(1.0)]


def test_exit_codes(tmp_path, capsys):
    assert main(["validate", "--out", str(tmp_path / "report.json")]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] and report["n_failed"] == 0
    assert any(c["id"] == "AC6" for c in report["criteria"])
    assert main(["validate", "--tolerance-scale", "1e-30"]) == 1
    assert main(["bound-energy", "--out", str(tmp_path)]) == 2
    assert main(["evolve", "--gamma", "0", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["evolve", "--backend", "magic"])
    assert exc.value.code == 2


def test_figure_preset_writes_into_subdir(tmp_path):
    assert main(["fig4", "--out", str(tmp_path)]) == 0
    assert list((tmp_path / "fig4").glob("*.csv"))

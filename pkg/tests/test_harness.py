import numpy as np
import pytest

from xlris import cli
from xlris.config import ConfigError, Mode, build_config, load_config
from xlris.experiments import (run_baseline, run_convergence, run_distance_sweep, run_element_sweep,
                               run_stochastic_phase_baseline, stochastic_ris)
from xlris.output import emit_outputs, read_rows


def test_defaults_empty_file(tmp_path):
    f = tmp_path / "empty.toml"
    f.write_text("")
    cfg = load_config(f)
    assert (cfg.array.M, cfg.array.N1, cfg.array.N2) == (4, 16, 4)
    assert abs(cfg.array.wavelength - 0.02998) < 1e-4
    assert abs(cfg.limits.sigma2 - 1e-11) < 1e-25 and abs(cfg.limits.p_max - 0.01) < 1e-15
    assert cfg.limits.r_th == 1.0 and cfg.geometry.user_polar == (15.0, np.pi / 4)
    full = load_config(f, full_scale=True)
    assert (full.array.M, full.array.N1, full.array.N2) == (8, 64, 8)


def test_config_overrides():
    cfg = build_config({"array": {"N1": 8, "frequency_hz": 28e9}, "limits": {"p_max_dbm": 20},
                        "geometry": {"eve_radius": 7.5}, "run": {"mode": "discrete:2", "trials": 3},
                        "solver": {"variant": "verbatim", "eps_ao": 1e-2}})
    assert cfg.array.N1 == 8 and abs(cfg.limits.p_max - 0.1) < 1e-12
    assert cfg.geometry.eve_polar[0] == 7.5 and cfg.mode == Mode("discrete", 2) and cfg.trials == 3
    assert cfg.solver.p2.variant == "verbatim" and cfg.solver.eps_ao == 1e-2


@pytest.mark.parametrize("doc", [
    {"bogus": {}}, {"array": {"Q": 1}}, {"array": {"M": 0}}, {"limits": {"r_th": -1}},
    {"geometry": {"user_radius": -3}}, {"run": {"trials": 0}}, {"run": {"mode": "discrete:x"}},
    {"solver": {"variant": "other"}}, {"array": {"frequency_hz": 0}}, {"sweep": {"radii": [1, -2]}},
])
def test_config_errors(doc):
    with pytest.raises(ConfigError):
        build_config(doc)


def test_bad_toml(tmp_path):
    f = tmp_path / "bad.toml"
    f.write_text("[array\nM=")
    with pytest.raises(ConfigError):
        load_config(f)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")


def test_mode_parse():
    assert Mode.parse("discrete") == Mode("discrete", 3)
    assert Mode.parse("discrete:1").bits == 1
    assert str(Mode.parse("nojam")) == "nojam"
    for bad in ("foo", "discrete:0", "ff:2"):
        with pytest.raises(ConfigError):
            Mode.parse(bad)


@pytest.fixture(scope="module")
def small_cfg():
    return build_config({"array": {"N1": 4, "N2": 2, "M": 2}}).replace(trials=3)


def test_convergence_rows(small_cfg):
    res = run_convergence(small_cfg)
    for r in res:
        assert len(r.rows) == r.trials * len(r.values) - r.total_skipped
        assert all(row.rate_bits >= 0 for row in r.rows)
        for s in r.summary():
            x = [row.rate_bits for row in r.rows if row.sweep_value == s["sweep_value"]]
            assert s["median"] == np.median(x)


def test_distance_sweep_pairs_seeds(small_cfg):
    res = run_distance_sweep(small_cfg, radii=[8.0, 15.0])
    assert [r.name for r in res] == ["dist_nf_az45", "dist_ff_az45"]
    for r in res:
        assert [row.seed for row in r.rows if row.sweep_value == 8.0] == [0, 1, 2]
    with pytest.raises(ValueError):
        run_distance_sweep(small_cfg, radii=[0.0])


def test_element_sweep_and_baselines(small_cfg):
    res = run_element_sweep(small_cfg, [2, 4], [Mode("continuous"), Mode("stochastic")])
    assert [r.values for r in res] == [[4, 8], [4, 8]]
    opt, sto = res[0].medians(), res[1].medians()
    assert np.all(np.isfinite(opt)) and np.all(np.isfinite(sto))
    st = run_stochastic_phase_baseline(small_cfg)
    assert st.values == [small_cfg.array.N] and len(st.rows) + st.total_skipped == 3
    assert run_baseline(small_cfg, Mode("nojam")).name == "baseline_nojam"


def test_stochastic_phases():
    a = stochastic_ris(16, np.random.default_rng(0))
    b = stochastic_ris(16, np.random.default_rng(1))
    assert a.modulus_error() < 1e-12 and not np.allclose(a.v, b.v)


def test_stochastic_not_better_than_optimized():
    cfg = build_config({}).replace(trials=6)
    opt = run_baseline(cfg, Mode("continuous"))
    sto = run_stochastic_phase_baseline(cfg)
    assert np.median(sto.rates_at(cfg.array.N)) <= np.median(opt.rates_at(cfg.array.N))


def test_emit_and_roundtrip(small_cfg, tmp_path):
    res = run_distance_sweep(small_cfg, radii=[9.0, 12.0], far_field=False)
    paths = emit_outputs(res, tmp_path)
    names = sorted(p.name for p in paths)
    assert names == ["dist_nf_az45.csv", "dist_nf_az45.svg", "dist_nf_az45_summary.csv"]
    assert read_rows(tmp_path / "dist_nf_az45.csv") == res[0].rows
    text = (tmp_path / "dist_nf_az45.csv").read_bytes()
    assert text.startswith(b"sweep_value,trial,seed,rate_bits,rate_user,rate_eve,iters,status\n")
    assert b"\r" not in text
    summ = (tmp_path / "dist_nf_az45_summary.csv").read_text().splitlines()
    assert summ[0] == "sweep_value,mean,median,p10,p90,skip_fraction" and len(summ) == 3


def test_emit_unwritable(small_cfg, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        emit_outputs(run_stochastic_phase_baseline(small_cfg), blocker / "sub")


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[nope]\n")
    assert cli.run(["baseline", "--scenario", str(bad), "--out", str(tmp_path / "a")]) == 2
    assert cli.run(["baseline", "--mode", "wat", "--out", str(tmp_path / "a")]) == 2
    dead = tmp_path / "dead.toml"
    dead.write_text("[limits]\np_max_dbm = -120\n[array]\nN1 = 4\nN2 = 2\nM = 2\n")
    assert cli.run(["baseline", "--scenario", str(dead), "--trials", "2", "--out", str(tmp_path / "b")]) == 3
    with pytest.raises(SystemExit) as exc:
        cli.run(["nosuch"])
    assert exc.value.code == 2


def test_cli_deterministic(tmp_path):
    scen = tmp_path / "s.toml"
    scen.write_text("[array]\nN1 = 4\nN2 = 2\nM = 2\n")
    for d in ("x", "y"):
        assert cli.run(["dist-sweep", "--scenario", str(scen), "--trials", "2", "--radii", "8,15",
                        "--seed", "7", "--out", str(tmp_path / d)]) == 0
    for name in ("dist_nf_az45.csv", "dist_ff_az45.csv", "dist_nf_az30.csv", "dist_nf_az45_summary.csv"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()
    assert (tmp_path / "x" / "dist_nf_az45.svg").read_bytes() == (tmp_path / "y" / "dist_nf_az45.svg").read_bytes()

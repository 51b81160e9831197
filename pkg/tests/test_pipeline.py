"""End-to-end pipeline tests on noiseless synthetic data.

With zero measurement noise every stage should reproduce the generating
parameters to numerical precision, so these tests double as a wiring
check for the whole CSV -> report chain.
"""

import dataclasses
import hashlib
import math

import numpy as np
import pytest

import deltamag.pipeline as pipeline
from deltamag import (
    AnalysisConfig,
    Dataset,
    Geometry,
    SweepRecord,
    SynthConfig,
    __version__,
    generate_dataset,
    load_datasets,
    parse_sweep_csv,
    run_analysis,
    write_report,
    write_sweep_csv,
)

TEMPS = (0.4, 0.7, 1.0, 1.5)
N_2D_CM2 = 2.14e13
MOBILITY = 38.9          # cm^2/Vs
DELTA_NM = 0.42
AMP_NM = 35.5
EXPONENT = -0.31
F_TRUE = 0.5


def synth_dict(temps=TEMPS, num=81, **over):
    d = {
        "sample_id": "S1",
        "sample": {
            "n_2d_cm2": N_2D_CM2,
            "mobility_cm2_Vs": MOBILITY,
            "delta_nm": DELTA_NM,
            "F": F_TRUE,
        },
        "l_phi_law": {"amplitude_nm": AMP_NM, "exponent": EXPONENT},
        "t_sat_K": 0.0,
        "noise": {"relative_sigma": 0.0, "seed": 7},
        "sweep_plan": [
            {
                "T_bath_K": T,
                "theta_deg": th,
                "B_T": {"start": -2.0, "stop": 2.0, "num": num},
            }
            for T in temps
            for th in (0.0, 90.0)
        ],
    }
    d.update(over)
    return d


def build_dataset(tmpdir, cfg_dict, analysis=None):
    cfg = SynthConfig.from_dict(cfg_dict)
    path = tmpdir / f"{cfg.sample_id}_sweeps.csv"
    write_sweep_csv(path, generate_dataset(cfg))
    datasets = load_datasets([path], analysis or AnalysisConfig())
    assert len(datasets) == 1
    return cfg, path, datasets[0]


@pytest.fixture(scope="module")
def clean_run(tmp_path_factory):
    tmpdir = tmp_path_factory.mktemp("pipeline")
    cfg, path, ds = build_dataset(tmpdir, synth_dict())
    return {"cfg": cfg, "path": path, "ds": ds, "report": run_analysis(ds)}


def test_all_stages_ok(clean_run):
    statuses = pipeline.stage_statuses(clean_run["report"])
    assert statuses == {
        "hall": "ok",
        "wl": "ok",
        "powerlaw": "ok",
        "collapse": "ok",
    }


def test_hall_stage_recovers_truth(clean_run):
    cfg = clean_run["cfg"]
    hall = clean_run["report"].stages["hall"]
    assert hall["T_K"] == max(TEMPS)  # warmest Hall sweep wins
    assert hall["n_points"] == 81
    assert hall["n_2d_m2"]["value"] == pytest.approx(cfg.n_2d, rel=1e-9)
    assert hall["sigma_xx_S"]["value"] == pytest.approx(cfg.sigma0, rel=1e-9)
    assert hall["mobility_m2_Vs"]["value"] == pytest.approx(cfg.mobility, rel=1e-9)
    assert hall["l_mfp_m"]["value"] == pytest.approx(cfg.l_mfp, rel=1e-9)
    assert hall["kf_l"]["value"] == pytest.approx(cfg.sigma0 / 3.874045865e-5, rel=1e-6)


def test_wl_stage_recovers_coherence_lengths(clean_run):
    cfg = clean_run["cfg"]
    wl = clean_run["report"].stages["wl"]
    fits = wl["per_temperature"]
    assert [f["T_bath_K"] for f in fits] == sorted(TEMPS)
    assert wl["skipped"] == []
    for f in fits:
        assert f["converged"]
        assert f["n_points"] == 81
        assert f["l_phi_m"]["value"] == pytest.approx(
            cfg.l_phi_at(f["T_bath_K"]), rel=1e-6
        )
        assert f["delta_m"]["value"] == pytest.approx(cfg.delta, rel=1e-4)


def test_wl_pooled_thickness(clean_run):
    pooled = clean_run["report"].stages["wl"]["delta_m"]
    assert pooled["value"] == pytest.approx(DELTA_NM * 1e-9, rel=1e-6)
    assert pooled["stderr"] > 0.0


def test_powerlaw_stage(clean_run):
    pl = clean_run["report"].stages["powerlaw"]
    assert pl["T_c_K"] == 0.3
    assert pl["n_points"] == len(TEMPS)
    assert pl["exponent"]["value"] == pytest.approx(EXPONENT, abs=1e-6)
    assert pl["amplitude_m"]["value"] == pytest.approx(AMP_NM * 1e-9, rel=1e-6)


def test_collapse_stage(clean_run):
    col = clean_run["report"].stages["collapse"]
    assert col["anchor_T_bath_K"] == max(TEMPS)
    assert col["h_min"] == 3.0
    temps = col["temperatures"]
    assert [t["T_bath_K"] for t in temps] == sorted(TEMPS)
    for t in temps:
        # t_sat = 0, so every effective temperature is the bath value
        assert t["T_eff_K"] == pytest.approx(t["T_bath_K"], rel=1e-3)
    anchor = [t for t in temps if t["T_bath_K"] == max(TEMPS)][0]
    assert anchor["T_eff_K"] == anchor["T_bath_K"]
    assert col["dispersion"] < 1e-16
    assert col["dispersion_at_bath"] < 1e-16
    assert col["F"]["value"] == pytest.approx(F_TRUE, abs=5e-3)
    assert col["intercept_check"] == pytest.approx(1.3, rel=2e-2)


def test_plot_tables_present(clean_run):
    plots = clean_run["report"].plots
    assert set(plots) == {"wl_difference", "l_phi", "sigma0", "aa_collapse", "aa_master"}
    for columns in plots.values():
        sizes = {arr.size for _, arr in columns}
        assert len(sizes) == 1 and sizes.pop() > 0
    names = [name for name, _ in plots["wl_difference"]]
    assert names == ["T_bath_K", "B_T", "d_sigma_S", "d_sigma_fit_S"]
    # fitted curve should track the measured difference closely
    cols = dict(plots["wl_difference"])
    assert np.allclose(cols["d_sigma_S"], cols["d_sigma_fit_S"], atol=1e-12)


def test_report_json_deterministic(clean_run):
    ds2 = load_datasets([clean_run["path"]], AnalysisConfig())[0]
    assert run_analysis(ds2).to_json() == clean_run["report"].to_json()


def test_write_report_files(clean_run, tmp_path):
    report = clean_run["report"]
    json_path = write_report(report, tmp_path)
    assert json_path == tmp_path / "S1_report.json"
    assert json_path.read_text(encoding="utf-8") == report.to_json()
    for key in report.plots:
        csv_path = tmp_path / f"S1_{key}.csv"
        assert csv_path.exists()
        with pytest.raises(ValueError, match="plot-data file"):
            parse_sweep_csv(csv_path)
    # a second write produces byte-identical files
    second = tmp_path / "again"
    write_report(report, second)
    assert (second / "S1_report.json").read_bytes() == json_path.read_bytes()
    assert (second / "S1_aa_master.csv").read_bytes() == (
        tmp_path / "S1_aa_master.csv"
    ).read_bytes()


def test_provenance_block(clean_run):
    prov = clean_run["report"].provenance
    path = clean_run["path"]
    assert prov["inputs"] == [
        {"name": path.name, "sha256": hashlib.sha256(path.read_bytes()).hexdigest()}
    ]
    assert prov["config"] == clean_run["ds"].config.to_dict()
    assert prov["version"] == __version__
    assert prov["sigma0_method"] == pipeline.SIGMA0_METHOD


def test_round_floats():
    out = pipeline._round_floats(
        {
            "a": 0.123456789,
            "b": [math.nan, math.inf, True, 3],
            "c": {"d": np.float64(1.2345678e-7)},
        }
    )
    assert out["a"] == 0.123457
    assert out["b"] == [None, None, True, 3]
    assert out["b"][2] is True
    assert out["c"]["d"] == 1.23457e-7


def test_config_defaults_and_round_trip():
    cfg = AnalysisConfig()
    assert cfg.g_factor == 2.0
    assert cfg.T_c == 0.3
    assert cfg.h_min == 3.0
    assert cfg.fit_window == (0.0, 2.0)
    assert cfg.kappa == pytest.approx(3.37e9)
    assert cfg.anchor_T is None
    assert AnalysisConfig.from_dict({}) == cfg
    # geometry goes through a um conversion, so allow float round-off there
    rt = AnalysisConfig.from_dict(cfg.to_dict())
    assert rt.geometry.L == pytest.approx(cfg.geometry.L, rel=1e-12)
    assert rt.geometry.W == pytest.approx(cfg.geometry.W, rel=1e-12)
    assert dataclasses.replace(rt, geometry=cfg.geometry) == cfg

    full = AnalysisConfig.from_dict(
        {
            "g": 1.4,
            "T_c_K": 0.5,
            "h_min": 5.0,
            "fit_window_T": [0.1, 1.5],
            "kappa_nm": 2.0,
            "anchor_T_K": 0.7,
            "geometry_um": [100.0, 10.0],
            "extrapolate_l_phi": True,
        }
    )
    assert full.g_factor == 1.4
    assert full.kappa == pytest.approx(2.0e9)
    assert full.anchor_T == 0.7
    assert full.geometry.L == pytest.approx(100e-6, rel=1e-12)
    assert full.geometry.W == pytest.approx(10e-6, rel=1e-12)
    assert full.geometry.squares == pytest.approx(10.0)
    assert full.extrapolate_l_phi is True
    rt = AnalysisConfig.from_dict(full.to_dict())
    assert rt.kappa == pytest.approx(full.kappa, rel=1e-12)
    assert rt.geometry.squares == pytest.approx(full.geometry.squares, rel=1e-12)


def test_dataset_rejects_mismatched_sample():
    rec = SweepRecord("S1", 0.5, 0.0, [0.0, 0.1, 0.2], [10.0, 10.1, 10.2], None, 1e-9)
    with pytest.raises(ValueError, match="differs"):
        Dataset(sample_id="S2", geometry=Geometry(200e-6, 20e-6), sweeps=[rec],
                config=AnalysisConfig())


def test_dataset_rejects_odd_orientation():
    rec = SweepRecord("S1", 0.5, 45.0, [0.0, 0.1, 0.2], [10.0, 10.1, 10.2], None, 1e-9)
    with pytest.raises(ValueError, match="unsupported orientation"):
        Dataset(sample_id="S1", geometry=Geometry(200e-6, 20e-6), sweeps=[rec],
                config=AnalysisConfig())


def test_perp_only_degrades_gracefully(tmp_path):
    d = synth_dict(temps=(0.4, 0.7, 1.0), num=41)
    d["sweep_plan"] = [e for e in d["sweep_plan"] if e["theta_deg"] == 0.0]
    _, _, ds = build_dataset(tmp_path, d)
    report = run_analysis(ds)
    assert report.stages["hall"]["status"] == "ok"
    wl = report.stages["wl"]
    assert wl["status"] == "skipped"
    assert "both orientations" in wl["reason"]
    for name in ("powerlaw", "collapse"):
        stage = report.stages[name]
        assert stage["status"] == "skipped"
        assert stage["reason"] == "wl stage unavailable"
    # sigma0 traces are still plottable without the model stages
    assert set(report.plots) == {"sigma0"}


def test_no_hall_data_is_an_error(tmp_path):
    d = synth_dict(temps=(0.4, 0.7), num=41)
    d["sweep_plan"] = [e for e in d["sweep_plan"] if e["theta_deg"] == 90.0]
    _, _, ds = build_dataset(tmp_path, d)
    report = run_analysis(ds)
    hall = report.stages["hall"]
    assert hall["status"] == "error"
    assert "no sweep with Hall data" in hall["message"]
    assert report.stages["wl"] == {"status": "skipped", "reason": "hall stage unavailable"}


def test_partial_temperatures_are_reported(tmp_path):
    # one unpaired temperature and one pair with too few shared points
    d = synth_dict(temps=(0.4, 0.7, 1.0), num=41)
    d["sweep_plan"].append(
        {"T_bath_K": 2.0, "theta_deg": 0.0, "B_T": {"start": -2.0, "stop": 2.0, "num": 41}}
    )
    for th in (0.0, 90.0):
        d["sweep_plan"].append(
            {"T_bath_K": 3.0, "theta_deg": th, "B_T": {"start": -2.0, "stop": 2.0, "num": 8}}
        )
    _, path, ds = build_dataset(tmp_path, d)
    report = run_analysis(ds)
    wl = report.stages["wl"]
    assert wl["status"] == "ok"
    assert [f["T_bath_K"] for f in wl["per_temperature"]] == [0.4, 0.7, 1.0]
    reasons = {s["T_bath_K"]: s["reason"] for s in wl["skipped"]}
    assert reasons == {
        2.0: "missing orientation pair",
        3.0: "fewer than 10 shared points in window",
    }
    assert report.stages["powerlaw"]["status"] == "ok"
    # the 2 K and 3 K sweeps lie outside the fitted coherence table, so the
    # collapse refuses them unless extrapolation is requested explicitly
    col = report.stages["collapse"]
    assert col["status"] == "error"
    assert "outside the fitted range" in col["message"]

    allow = AnalysisConfig(extrapolate_l_phi=True)
    report2 = run_analysis(load_datasets([path], allow)[0])
    col2 = report2.stages["collapse"]
    assert col2["status"] == "ok"
    assert [t["T_bath_K"] for t in col2["temperatures"]] == [0.4, 0.7, 1.0, 2.0, 3.0]


def test_sigma0_quadratic():
    B = np.linspace(-0.5, 0.5, 11)
    sigma = 2.0e-4 - 3.0e-5 * B + 4.0e-5 * B * B
    R_xx = 10.0 / sigma
    assert pipeline._sigma0_quadratic(B, R_xx, 10.0) == pytest.approx(2.0e-4, rel=1e-12)
    with pytest.raises(ValueError, match="at least 3 points"):
        pipeline._sigma0_quadratic(B[:2], R_xx[:2], 10.0)
    with pytest.raises(ValueError, match="degenerate"):
        pipeline._sigma0_quadratic([0.0, 0.0, 0.1], [10.0, 10.0, 10.0], 10.0)

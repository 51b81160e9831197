"""Staged analysis: Hall -> WL difference fits -> power law -> collapse.

Each stage consumes the previous one's output and records its own status;
a failed stage is reported and everything downstream is marked skipped, so
a partial dataset still yields a partial report. Reports render to JSON
deterministically (sorted keys, 6 significant digits), with input hashes
and the configuration echoed for provenance.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._version import __version__
from .collapse import (
    OrientedCurve,
    WlFitTable,
    collapse_teff,
    dispersion,
    isolate_aa,
)
from .constants import G0
from .fit import Measured, fit_coherence_power_law, fit_wl_difference
from .hall import (
    Geometry,
    HallSweep,
    KAPPA_DEFAULT,
    density_from_hall,
    fermi_wavevector,
    interaction_rs,
    mean_free_path,
    mobility,
)
from .sweepio import SweepRecord, parse_sweep_csv, write_plot_csv

SIGMA0_METHOD = "quadratic extrapolation of the three lowest-|B| points"


class MissingDataError(ValueError):
    """The dataset lacks the sweeps a stage needs (degradation, not failure)."""


@dataclass
class AnalysisConfig:
    """Analysis options with their defaults.

    kappa is in m^-1 internally; the JSON schema and CLI take nm^-1.
    """

    g_factor: float = 2.0
    T_c: float = 0.3                 # K, power-law validity floor
    h_min: float = 3.0               # reduced-field floor of the log branch
    fit_window: Tuple[float, float] = (0.0, 2.0)  # T, on |B|
    kappa: float = KAPPA_DEFAULT     # m^-1
    anchor_T: Optional[float] = None  # K; None picks the highest T_bath
    geometry: Geometry = field(default_factory=lambda: Geometry(200e-6, 20e-6))
    extrapolate_l_phi: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisConfig":
        geo = d.get("geometry_um")
        kwargs = {}
        if "g" in d:
            kwargs["g_factor"] = float(d["g"])
        if "T_c_K" in d:
            kwargs["T_c"] = float(d["T_c_K"])
        if "h_min" in d:
            kwargs["h_min"] = float(d["h_min"])
        if "fit_window_T" in d:
            a, b = d["fit_window_T"]
            kwargs["fit_window"] = (float(a), float(b))
        if "kappa_nm" in d:
            kwargs["kappa"] = float(d["kappa_nm"]) * 1e9
        if "anchor_T_K" in d and d["anchor_T_K"] is not None:
            kwargs["anchor_T"] = float(d["anchor_T_K"])
        if geo is not None:
            kwargs["geometry"] = Geometry(float(geo[0]) * 1e-6, float(geo[1]) * 1e-6)
        if "extrapolate_l_phi" in d:
            kwargs["extrapolate_l_phi"] = bool(d["extrapolate_l_phi"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "g": self.g_factor,
            "T_c_K": self.T_c,
            "h_min": self.h_min,
            "fit_window_T": list(self.fit_window),
            "kappa_nm": self.kappa / 1e9,
            "anchor_T_K": self.anchor_T,
            "geometry_um": [self.geometry.L * 1e6, self.geometry.W * 1e6],
            "extrapolate_l_phi": self.extrapolate_l_phi,
        }


@dataclass
class Dataset:
    """All sweeps of one sample plus the analysis options."""

    sample_id: str
    geometry: Geometry
    sweeps: List[SweepRecord]
    config: AnalysisConfig
    sources: List[Tuple[str, str]] = field(default_factory=list)  # (name, sha256)

    def __post_init__(self):
        for s in self.sweeps:
            if s.sample_id != self.sample_id:
                raise ValueError("sweep sample_id differs from dataset sample_id")
            if s.theta_deg not in (0.0, 90.0):
                raise ValueError(
                    f"unsupported orientation theta = {s.theta_deg} deg "
                    "(only 0 and 90 are measured)"
                )


def load_datasets(paths: Sequence, config: AnalysisConfig) -> List[Dataset]:
    """Parse sweep files and group them into per-sample datasets."""
    sources = []
    records: List[SweepRecord] = []
    for p in paths:
        raw = Path(p).read_bytes()
        sources.append((Path(p).name, hashlib.sha256(raw).hexdigest()))
        records.extend(parse_sweep_csv(p))
    by_sample: Dict[str, List[SweepRecord]] = {}
    for r in records:
        by_sample.setdefault(r.sample_id, []).append(r)
    return [
        Dataset(
            sample_id=sid,
            geometry=config.geometry,
            sweeps=sw,
            config=config,
            sources=sources,
        )
        for sid, sw in sorted(by_sample.items())
    ]


def _sigma0_quadratic(B, R_xx, squares: float) -> float:
    """Zero-field conductivity from the three lowest-|B| points (Lagrange)."""
    B = np.asarray(B, dtype=float)
    sigma = squares / np.asarray(R_xx, dtype=float)
    if B.size < 3:
        raise ValueError("need at least 3 points to extrapolate sigma0")
    idx = np.argsort(np.abs(B), kind="stable")[:3]
    b, s = B[idx], sigma[idx]
    if len(set(b.tolist())) < 3:
        raise ValueError("degenerate field values near B = 0")
    total = 0.0
    for i in range(3):
        li = 1.0
        for j in range(3):
            if j != i:
                li *= (0.0 - b[j]) / (b[i] - b[j])
        total += s[i] * li
    return float(total)


def _measured(m: Measured) -> dict:
    return {"value": m.value, "stderr": m.stderr}


def _hall_stage(ds: Dataset) -> dict:
    hall_sweeps = [s for s in ds.sweeps if s.R_xy is not None and len(s.B) >= 3]
    if not hall_sweeps:
        raise ValueError("no sweep with Hall data (R_xy)")
    sweep = max(hall_sweeps, key=lambda s: (s.T_bath, len(s.B)))
    hs = HallSweep(
        B=sweep.B,
        R_xy=sweep.R_xy,
        R_xx=sweep.R_xx,
        T_bath=sweep.T_bath,
        geometry=ds.geometry,
    )
    n = density_from_hall(hs)
    sigma0 = _sigma0_quadratic(sweep.B, sweep.R_xx, ds.geometry.squares)
    mu = mobility(n.value, sigma0)
    k_f = fermi_wavevector(n.value)
    l_mfp = mean_free_path(n.value, mu)
    r_s = interaction_rs(n.value, ds.config.kappa)
    rel_n = n.stderr / n.value
    return {
        "status": "ok",
        "T_K": sweep.T_bath,
        "n_points": int(len(sweep.B)),
        "n_2d_m2": _measured(n),
        "sigma_xx_S": {"value": sigma0, "stderr": None},
        "mobility_m2_Vs": _measured(Measured(mu, mu * rel_n)),
        "k_f_m1": _measured(Measured(k_f, 0.5 * k_f * rel_n)),
        "l_mfp_m": _measured(Measured(l_mfp, 0.5 * l_mfp * rel_n)),
        "kf_l": {"value": k_f * l_mfp, "stderr": None},
        "r_s": _measured(Measured(r_s, 0.5 * r_s * rel_n)),
    }


def _difference_curve(perp: SweepRecord, inpl: SweepRecord, squares: float):
    """Perpendicular minus in-plane conductivity on the shared field grid."""
    key_p = {round(float(b), 9): i for i, b in enumerate(perp.B)}
    key_i = {round(float(b), 9): i for i, b in enumerate(inpl.B)}
    common = sorted(set(key_p) & set(key_i))
    if not common:
        return np.array([]), np.array([])
    B = np.array(common)
    d = np.array(
        [
            squares * (1.0 / perp.R_xx[key_p[b]] - 1.0 / inpl.R_xx[key_i[b]])
            for b in common
        ]
    )
    return B, d


def _wl_stage(ds: Dataset, hall: dict) -> dict:
    n_2d = hall["n_2d_m2"]["value"]
    l_mfp = hall["l_mfp_m"]["value"]
    lo, hi = ds.config.fit_window

    by_T: Dict[float, Dict[float, SweepRecord]] = {}
    for s in ds.sweeps:
        by_T.setdefault(round(s.T_bath, 9), {}).setdefault(s.theta_deg, s)

    fits = []
    skipped = []
    for T_key in sorted(by_T):
        pair = by_T[T_key]
        if 0.0 not in pair or 90.0 not in pair:
            skipped.append({"T_bath_K": T_key, "reason": "missing orientation pair"})
            continue
        B, d = _difference_curve(pair[0.0], pair[90.0], ds.geometry.squares)
        keep = (np.abs(B) >= lo) & (np.abs(B) <= hi)
        if int(keep.sum()) < 10:
            skipped.append(
                {"T_bath_K": T_key, "reason": "fewer than 10 shared points in window"}
            )
            continue
        res = fit_wl_difference(B[keep], d[keep], l_mfp, n_2d)
        fits.append(
            {
                "T_bath_K": T_key,
                "n_points": int(keep.sum()),
                "l_phi_m": _measured(res.l_phi),
                "gamma_T2": _measured(res.gamma),
                "delta_m": _measured(res.delta),
                "converged": bool(res.fit.converged),
                "iterations": int(res.fit.iterations),
                "residual_norm": res.fit.residual_norm,
            }
        )
    if not fits:
        raise MissingDataError(
            "no temperature has both orientations with enough shared points"
        )

    good = [f for f in fits if f["converged"]]
    dvals = np.array([f["delta_m"]["value"] for f in good])
    derrs = np.array([f["delta_m"]["stderr"] for f in good])
    if good and np.all(derrs > 0.0):
        w = 1.0 / derrs**2
        pooled = Measured(float(np.sum(w * dvals) / np.sum(w)), float(np.sqrt(1.0 / np.sum(w))))
    elif good:
        pooled = Measured(float(dvals.mean()), 0.0)
    else:
        pooled = Measured(math.nan, math.nan)
    return {
        "status": "ok",
        "per_temperature": fits,
        "skipped": skipped,
        "delta_m": _measured(pooled),
    }


def _powerlaw_stage(wl: dict, T_c: float) -> dict:
    pts = [
        (f["T_bath_K"], f["l_phi_m"]["value"])
        for f in wl["per_temperature"]
        if f["converged"] and f["T_bath_K"] > T_c
    ]
    if len(pts) < 3:
        raise MissingDataError(f"need at least 3 converged fits above T_c = {T_c:g} K")
    T = np.array([p[0] for p in pts])
    lp = np.array([p[1] for p in pts])
    res = fit_coherence_power_law(T, lp)
    return {
        "status": "ok",
        "T_c_K": T_c,
        "n_points": int(len(pts)),
        "exponent": _measured(res.exponent),
        "amplitude_m": _measured(res.amplitude),
    }


def _oriented_curves(ds: Dataset):
    """Measured Delta sigma(B) per sweep, baseline removed per sweep."""
    curves = []
    for s in ds.sweeps:
        if len(s.B) < 3:
            continue
        sigma = ds.geometry.squares / s.R_xx
        sigma0 = _sigma0_quadratic(s.B, s.R_xx, ds.geometry.squares)
        curves.append(
            (
                OrientedCurve(
                    T_bath=s.T_bath,
                    theta_deg=s.theta_deg,
                    B=s.B,
                    delta_sigma=sigma - sigma0,
                ),
                sigma0,
            )
        )
    return curves


def _collapse_stage(ds: Dataset, wl: dict, l_mfp: float) -> tuple:
    fits = [f for f in wl["per_temperature"] if f["converged"]]
    if len(fits) < 3:
        raise MissingDataError("need WL fits at 3 or more temperatures")
    table = WlFitTable(
        T=np.array([f["T_bath_K"] for f in fits]),
        l_phi=np.array([f["l_phi_m"]["value"] for f in fits]),
        gamma=np.array([max(f["gamma_T2"]["value"], 0.0) for f in fits]),
        l_mfp=l_mfp,
    )
    curves = [c for c, _ in _oriented_curves(ds)]
    aa = isolate_aa(curves, table, extrapolate=ds.config.extrapolate_l_phi)
    if len(aa) < 3:
        raise MissingDataError("need interaction residues at 3 or more temperatures")

    anchor = None
    if ds.config.anchor_T is not None:
        anchor = int(
            np.argmin([abs(c.T_bath - ds.config.anchor_T) for c in aa])
        )
    at_bath = dispersion(aa, g_factor=ds.config.g_factor)
    result = collapse_teff(
        aa,
        anchor,
        g_factor=ds.config.g_factor,
        h_min=ds.config.h_min,
    )
    stage = {
        "status": "ok",
        "anchor_T_bath_K": float(result.t_bath[result.anchor]),
        "dispersion": result.dispersion,
        "dispersion_at_bath": at_bath,
        "h_min": ds.config.h_min,
        "F": _measured(result.F),
        "intercept_check": result.intercept_check,
        "temperatures": [
            {"T_bath_K": float(tb), "T_eff_K": float(te)}
            for tb, te in zip(result.t_bath, result.t_eff)
        ],
    }
    return stage, result, aa


@dataclass
class Report:
    """Analysis output: stage results plus provenance, JSON-renderable."""

    sample: str
    stages: dict
    provenance: dict
    plots: dict = field(default_factory=dict, repr=False)  # not serialized

    def to_json(self) -> str:
        body = {
            "sample": self.sample,
            "stages": self.stages,
            "provenance": self.provenance,
        }
        return json.dumps(_round_floats(body), sort_keys=True, indent=2) + "\n"


def _round_floats(obj):
    """Round every float to 6 significant digits; NaN and inf become null."""
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.6g}")
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj


def run_analysis(ds: Dataset) -> Report:
    """Execute all stages, tolerating missing data with explicit markers."""
    stages: dict = {}
    plots: dict = {}

    try:
        hall = _hall_stage(ds)
    except ValueError as exc:
        hall = {"status": "error", "message": str(exc)}
    stages["hall"] = hall

    if hall["status"] == "ok":
        try:
            wl = _wl_stage(ds, hall)
        except MissingDataError as exc:
            wl = {"status": "skipped", "reason": str(exc)}
        except ValueError as exc:
            wl = {"status": "error", "message": str(exc)}
    else:
        wl = {"status": "skipped", "reason": "hall stage unavailable"}
    stages["wl"] = wl

    if wl["status"] == "ok":
        try:
            powerlaw = _powerlaw_stage(wl, ds.config.T_c)
        except MissingDataError as exc:
            powerlaw = {"status": "skipped", "reason": str(exc)}
        except ValueError as exc:
            powerlaw = {"status": "error", "message": str(exc)}
        try:
            collapse_out, collapse_result, aa_curves = _collapse_stage(
                ds, wl, hall["l_mfp_m"]["value"]
            )
        except MissingDataError as exc:
            collapse_out, collapse_result, aa_curves = (
                {"status": "skipped", "reason": str(exc)},
                None,
                None,
            )
        except ValueError as exc:
            collapse_out, collapse_result, aa_curves = (
                {"status": "error", "message": str(exc)},
                None,
                None,
            )
    else:
        reason = "wl stage unavailable"
        powerlaw = {"status": "skipped", "reason": reason}
        collapse_out, collapse_result, aa_curves = (
            {"status": "skipped", "reason": reason},
            None,
            None,
        )
    stages["powerlaw"] = powerlaw
    stages["collapse"] = collapse_out

    plots.update(_plot_tables(ds, stages, collapse_result, aa_curves))

    provenance = {
        "inputs": [{"name": n, "sha256": h} for n, h in ds.sources],
        "config": ds.config.to_dict(),
        "version": __version__,
        "sigma0_method": SIGMA0_METHOD,
    }
    return Report(sample=ds.sample_id, stages=stages, provenance=provenance, plots=plots)


def _plot_tables(ds, stages, collapse_result, aa_curves) -> dict:
    """Column tables for the standard figures; keys become CSV file names."""
    plots = {}
    wl = stages["wl"]
    hall = stages["hall"]

    if wl.get("status") == "ok" and hall.get("status") == "ok":
        from .models import wl_perp_shape  # local import to avoid cycles

        l_mfp = hall["l_mfp_m"]["value"]
        rows_T, rows_B, rows_d, rows_fit = [], [], [], []
        by_T: Dict[float, Dict[float, SweepRecord]] = {}
        for s in ds.sweeps:
            by_T.setdefault(round(s.T_bath, 9), {}).setdefault(s.theta_deg, s)
        fit_by_T = {f["T_bath_K"]: f for f in wl["per_temperature"]}
        for T_key, pair in sorted(by_T.items()):
            if T_key not in fit_by_T or 0.0 not in pair or 90.0 not in pair:
                continue
            B, d = _difference_curve(pair[0.0], pair[90.0], ds.geometry.squares)
            f = fit_by_T[T_key]
            lphi = f["l_phi_m"]["value"]
            gam = f["gamma_T2"]["value"]
            model = (G0 / math.pi) * (
                wl_perp_shape(np.abs(B), lphi, l_mfp)
            ) - (G0 / math.pi) * np.log1p(gam * B * B)
            rows_T.extend([T_key] * len(B))
            rows_B.extend(B.tolist())
            rows_d.extend(d.tolist())
            rows_fit.extend(model.tolist())
        if rows_T:
            plots["wl_difference"] = [
                ("T_bath_K", np.array(rows_T)),
                ("B_T", np.array(rows_B)),
                ("d_sigma_S", np.array(rows_d)),
                ("d_sigma_fit_S", np.array(rows_fit)),
            ]

        T_fit = np.array([f["T_bath_K"] for f in wl["per_temperature"]])
        lp_fit = np.array([f["l_phi_m"]["value"] for f in wl["per_temperature"]])
        pl = stages["powerlaw"]
        if pl.get("status") == "ok":
            amp = pl["amplitude_m"]["value"]
            ex = pl["exponent"]["value"]
            lp_model = amp * T_fit**ex
        else:
            lp_model = np.full_like(T_fit, math.nan)
        plots["l_phi"] = [
            ("T_bath_K", T_fit),
            ("l_phi_m", lp_fit),
            ("l_phi_powerlaw_m", lp_model),
        ]

    sig_T, sig_th, sig_s = [], [], []
    for s in ds.sweeps:
        if len(s.B) < 3:
            continue
        try:
            s0 = _sigma0_quadratic(s.B, s.R_xx, ds.geometry.squares)
        except ValueError:
            continue
        sig_T.append(s.T_bath)
        sig_th.append(s.theta_deg)
        sig_s.append(s0)
    if sig_T:
        plots["sigma0"] = [
            ("T_bath_K", np.array(sig_T)),
            ("theta_deg", np.array(sig_th)),
            ("sigma0_S", np.array(sig_s)),
        ]

    if aa_curves is not None and collapse_result is not None:
        from .models import reduced_field  # local import keeps header tidy

        rows = {"T_bath_K": [], "B_T": [], "ln_h_bath": [], "ln_h_eff": [], "d_sigma_aa_S": []}
        for c, te in zip(aa_curves, collapse_result.t_eff):
            keep = np.abs(c.B) > 0.0
            absB = np.abs(c.B[keep])
            rows["T_bath_K"].extend([c.T_bath] * int(keep.sum()))
            rows["B_T"].extend(c.B[keep].tolist())
            rows["ln_h_bath"].extend(
                np.log(reduced_field(absB, c.T_bath, ds.config.g_factor)).tolist()
            )
            rows["ln_h_eff"].extend(
                np.log(reduced_field(absB, te, ds.config.g_factor)).tolist()
            )
            rows["d_sigma_aa_S"].extend(c.delta_sigma[keep].tolist())
        plots["aa_collapse"] = [(k, np.array(v)) for k, v in rows.items()]
        plots["aa_master"] = [
            ("ln_h", collapse_result.master_curve[:, 0]),
            ("d_sigma_S", collapse_result.master_curve[:, 1]),
        ]
    return plots


def stage_statuses(report: Report) -> Dict[str, str]:
    return {k: v.get("status", "error") for k, v in report.stages.items()}


def write_report(report: Report, outdir) -> Path:
    """Write the JSON report and the plot-data CSVs; returns the JSON path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    json_path = outdir / f"{report.sample}_report.json"
    json_path.write_text(report.to_json(), encoding="utf-8")
    for key, columns in report.plots.items():
        write_plot_csv(outdir / f"{report.sample}_{key}.csv", key.replace("_", " "), columns)
    return json_path

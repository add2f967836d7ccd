"""Named experiment scenarios, parameter sweeps, and run orchestration.

A run manifest (YAML) lists scenarios; each scenario is one of eight run
kinds (classical trajectories, amplitude scan, stability scan, covariance
propagation, power/mismatch/thermal sweeps, Wigner panels) with
kind-specific options.  Execution writes CSV artifacts (plus binary
snapshots for covariance and Wigner data) under ``<out>/<scenario>/`` and a
machine-readable ``report.json`` at the output root.

Reproducibility: all compute paths are deterministic, floats are printed as
shortest round-trip decimals, and files are written atomically, so
re-running an identical manifest yields byte-identical CSVs.  Wall-clock
times live only in the report, never in data files.

Sweep points that go unstable (runaway covariance growth past
``UNSTABLE_COVARIANCE``) or fail to integrate appear as gaps - empty metric
fields with a status note - rather than aborting the sweep.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from . import classical, fluctuations, io, metrics
from .model import ConfigError, SystemParams, validate
from .parallel import parallel_map

MANIFEST_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1

RUN_KINDS = (
    "classical",
    "covariance",
    "stability_scan",
    "amplitude_scan",
    "power_sweep",
    "mismatch_sweep",
    "thermal_sweep",
    "wigner_panel",
)

#: Covariance magnitude marking a sweep point as unstable (gap, not value).
UNSTABLE_COVARIANCE = 1e7

#: Integration tolerances: single-trajectory scenarios use the tight
#: default; multi-point sweeps trade one digit for throughput (override via
#: scenario options where needed).
RTOL_DEFAULT = 1e-9
ATOL_DEFAULT = 1e-12
RTOL_SWEEP = 1e-8
ATOL_SWEEP = 1e-11


class ManifestError(ValueError):
    """Raised for malformed manifests."""


@dataclass
class Scenario:
    name: str
    kind: str
    params: SystemParams
    options: dict = field(default_factory=dict)


@dataclass
class RunManifest:
    scenarios: list
    out_dir: str = "out"
    seed: int = 0
    schema_version: int = MANIFEST_SCHEMA_VERSION


@dataclass
class ScenarioResult:
    name: str
    kind: str
    status: str                 # "ok" | "failed"
    outputs: list
    wall_time_s: float
    error: Optional[str] = None


@dataclass
class RunReport:
    scenarios: list
    tool_version: str
    seed: int

    @property
    def failed(self) -> bool:
        return any(s.status != "ok" for s in self.scenarios)

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "scenarios": [
                {
                    "name": s.name,
                    "kind": s.kind,
                    "status": s.status,
                    "outputs": s.outputs,
                    "wall_time_s": s.wall_time_s,
                    "error": s.error,
                }
                for s in self.scenarios
            ],
        }


# --------------------------------------------------------------------------
# Manifest parsing

def parse_manifest(text: str) -> RunManifest:
    errors, manifest = _parse_manifest_checked(text)
    if errors:
        raise ManifestError("; ".join(errors))
    return manifest


def validate_manifest_text(text: str):
    """All problems found in a manifest document, without raising."""
    errors, _ = _parse_manifest_checked(text)
    return errors


def _parse_manifest_checked(text: str):
    errors = []
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        return [f"invalid YAML: {exc}"], None
    if not isinstance(doc, dict):
        return ["manifest must be a mapping"], None

    known = {"schema_version", "out_dir", "seed", "scenarios"}
    unknown = sorted(set(doc) - known)
    if unknown:
        errors.append(f"unknown manifest keys: {', '.join(unknown)}")
    if doc.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        errors.append(
            f"schema_version must be {MANIFEST_SCHEMA_VERSION}, "
            f"got {doc.get('schema_version')!r}"
        )
    raw_scenarios = doc.get("scenarios")
    if not isinstance(raw_scenarios, list) or not raw_scenarios:
        if raw_scenarios == []:
            raw_scenarios = []
        else:
            errors.append("scenarios must be a list")
            raw_scenarios = []

    scenarios = []
    seen = set()
    for i, raw in enumerate(raw_scenarios):
        label = f"scenario[{i}]"
        if not isinstance(raw, dict):
            errors.append(f"{label} must be a mapping")
            continue
        unknown = sorted(set(raw) - {"name", "kind", "params", "options"})
        if unknown:
            errors.append(f"{label}: unknown keys: {', '.join(unknown)}")
        name = raw.get("name")
        if not isinstance(name, str) or not name:
            errors.append(f"{label}: missing name")
            continue
        if name in seen:
            errors.append(f"{label}: duplicate scenario name {name!r}")
            continue
        seen.add(name)
        kind = raw.get("kind")
        if kind not in RUN_KINDS:
            errors.append(f"scenario {name!r}: unknown kind {kind!r}")
            continue
        try:
            params = SystemParams.from_dict(raw.get("params") or {})
        except ConfigError as exc:
            errors.append(f"scenario {name!r}: {exc}")
            continue
        report = validate(params)
        for err in report.errors:
            errors.append(f"scenario {name!r}: invalid params: {err}")
        options = raw.get("options") or {}
        if not isinstance(options, dict):
            errors.append(f"scenario {name!r}: options must be a mapping")
            continue
        scenarios.append(Scenario(name=name, kind=kind, params=params, options=dict(options)))

    if errors:
        return errors, None
    return [], RunManifest(
        scenarios=scenarios,
        out_dir=str(doc.get("out_dir", "out")),
        seed=int(doc.get("seed", 0)),
    )


def load_manifest(path) -> RunManifest:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_manifest(fh.read())


# --------------------------------------------------------------------------
# Sweep primitives (library API)

@dataclass
class SweepRow:
    drive: float
    s_p_avg: Optional[float]
    e_n_avg: Optional[float]
    status: str                       # "ok" | "unstable" | "failed"
    n_thermal: Optional[float] = None
    delta_omega: Optional[float] = None
    post_ep: Optional[bool] = None


def _metric_averages(series, avg_fraction: float):
    ms = metrics.metric_series(series)
    t0 = ms.t[0] + (1.0 - avg_fraction) * (ms.t[-1] - ms.t[0])
    sp = metrics.time_average(ms.t, ms.s_p, t_start=t0)
    en = metrics.time_average(ms.t, ms.e_n, t_start=t0)
    return sp, en


def _cov_sweep_job(args):
    (params, t_end, dt_out, avg_fraction, rtol, atol) = args
    try:
        series = fluctuations.propagate(
            params, t_end, dt_out, rtol=rtol, atol=atol
        )
    except classical.IntegrationFailure as exc:
        return ("failed", str(exc), None, None)
    if series.status != "done" or series.max_abs_cov > UNSTABLE_COVARIANCE:
        return ("unstable", f"max|V|={series.max_abs_cov:.3e}", None, None)
    sp, en = _metric_averages(series, avg_fraction)
    return ("ok", None, sp, en)


def power_sweep(
    params: SystemParams,
    drives,
    t_end: float = 5000.0,
    dt_out: float = 1.0,
    avg_fraction: float = 0.5,
    rtol: float = RTOL_SWEEP,
    atol: float = ATOL_SWEEP,
    workers: Optional[int] = None,
):
    """Trailing-window averages of S_p and E_n against drive strength.

    Each drive propagates independently; unstable or failed points become
    gap rows.  ``post_ep`` flags drives whose fixed-point discriminant has
    crossed the exceptional point (weak-coupling side).
    """
    from . import effective

    drives = [float(d) for d in drives]
    jobs = [
        (params.replace(drive=d), t_end, dt_out, avg_fraction, rtol, atol)
        for d in drives
    ]
    results = parallel_map(_cov_sweep_job, jobs, workers=workers)
    rows = []
    for d, (status, _err, sp, en) in zip(drives, results):
        p = params.replace(drive=d)
        try:
            fp = classical.fixed_point(p)
            spec_ = effective.spectrum_from_params(p, fp.a1, fp.a2)
            post_ep = spec_.discriminant < 0
        except RuntimeError:
            post_ep = None
        rows.append(SweepRow(d, sp, en, status, post_ep=post_ep))
    return rows


def mismatch_sweep(
    params: SystemParams,
    delta_omega_list,
    drives,
    t_end: float = 5000.0,
    dt_out: float = 1.0,
    avg_fraction: float = 0.5,
    rtol: float = RTOL_SWEEP,
    atol: float = ATOL_SWEEP,
    workers: Optional[int] = None,
):
    """Sweep over mechanical frequency mismatch and drive.

    ``delta_omega_list`` holds fractional mismatches: omega_m2 becomes
    omega_m1 * (1 + delta).  Returns rows keyed (delta_omega, drive).
    """
    delta_omega_list = [float(x) for x in delta_omega_list]
    drives = [float(d) for d in drives]
    jobs = []
    keys = []
    for delta in delta_omega_list:
        p_delta = params.replace(omega_m2=params.omega_m1 * (1.0 + delta))
        for d in drives:
            jobs.append((p_delta.replace(drive=d), t_end, dt_out,
                         avg_fraction, rtol, atol))
            keys.append((delta, d))
    results = parallel_map(_cov_sweep_job, jobs, workers=workers)
    return [
        SweepRow(d, sp, en, status, delta_omega=delta)
        for (delta, d), (status, _err, sp, en) in zip(keys, results)
    ]


def _thermal_job(args):
    (params, t_end, dt_out, rtol, atol) = args
    try:
        series = fluctuations.propagate(params, t_end, dt_out, rtol=rtol, atol=atol)
    except classical.IntegrationFailure as exc:
        return ("failed", str(exc), None)
    if series.status != "done" or series.max_abs_cov > UNSTABLE_COVARIANCE:
        return ("unstable", f"max|V|={series.max_abs_cov:.3e}", None)
    return ("ok", None, series)


def thermal_sweep(
    params: SystemParams,
    n_thermal_list,
    drive: float,
    t_end: float = 5000.0,
    dt_out: float = 1.0,
    avg_fraction: float = 0.5,
    rtol: float = RTOL_SWEEP,
    atol: float = ATOL_SWEEP,
    workers: Optional[int] = None,
):
    """Metric series and averages at several thermal occupancies.

    Returns ``(series_by_n, rows)`` where ``series_by_n`` maps each n_thermal
    to its :class:`~epomc.metrics.MetricSeries` (None for failed points).
    """
    n_list = [float(n) for n in n_thermal_list]
    jobs = [
        (params.replace(drive=float(drive), n_thermal=n), t_end, dt_out, rtol, atol)
        for n in n_list
    ]
    results = parallel_map(_thermal_job, jobs, workers=workers)
    series_by_n = {}
    rows = []
    for n, (status, _err, series) in zip(n_list, results):
        if status != "ok":
            series_by_n[n] = None
            rows.append(SweepRow(float(drive), None, None, status, n_thermal=n))
            continue
        ms = metrics.metric_series(series)
        series_by_n[n] = ms
        t0 = ms.t[0] + (1.0 - avg_fraction) * (ms.t[-1] - ms.t[0])
        rows.append(SweepRow(
            float(drive),
            metrics.time_average(ms.t, ms.s_p, t_start=t0),
            metrics.time_average(ms.t, ms.e_n, t_start=t0),
            "ok",
            n_thermal=n,
        ))
    return series_by_n, rows


@dataclass
class WignerPanel:
    drive: float
    t_snapshot: float
    oscillator: int
    grid: metrics.WignerGrid
    squeeze: metrics.SqueezeRotation


def _wigner_job(args):
    (params, t_end, dt_out, rtol, atol, snapshots, grid_n, n_sigma) = args
    try:
        series = fluctuations.propagate(params, t_end, dt_out, rtol=rtol, atol=atol)
    except classical.IntegrationFailure as exc:
        return ("failed", str(exc), None)
    panels = []
    for t_snap in snapshots:
        k = int(np.argmin(np.abs(series.t - t_snap)))
        vp = metrics.mech_submatrix(series.covs[k])
        for osc, vm in ((1, vp[:2, :2]), (2, vp[2:, 2:])):
            grid = metrics.wigner(vm, metrics.grid_for_covariance(vm, n=grid_n, n_sigma=n_sigma))
            panels.append(WignerPanel(
                drive=params.drive,
                t_snapshot=float(series.t[k]),
                oscillator=osc,
                grid=grid,
                squeeze=metrics.squeeze_rotation(vm),
            ))
    return ("ok", None, panels)


def wigner_panel(
    params: SystemParams,
    drives,
    snapshots,
    dt_out: float = 1.0,
    grid_n: int = 201,
    n_sigma: float = 6.0,
    rtol: float = RTOL_SWEEP,
    atol: float = ATOL_SWEEP,
    workers: Optional[int] = None,
):
    """Wigner surfaces and squeeze/rotation values per drive and oscillator.

    Propagates each drive to the last snapshot time and evaluates both
    mechanical modes' Wigner functions at every requested snapshot.
    """
    snapshots = sorted(float(t) for t in snapshots)
    t_end = snapshots[-1]
    jobs = [
        (params.replace(drive=float(d)), t_end, dt_out, rtol, atol,
         snapshots, grid_n, n_sigma)
        for d in drives
    ]
    results = parallel_map(_wigner_job, jobs, workers=workers)
    panels = []
    failures = []
    for d, (status, err, ps) in zip(drives, results):
        if status != "ok":
            failures.append((float(d), err))
        else:
            panels.extend(ps)
    return panels, failures


# --------------------------------------------------------------------------
# Scenario execution

def _opt(options: dict, key: str, default):
    return options[key] if key in options else default


def _check_options(scenario: Scenario, allowed):
    unknown = sorted(set(scenario.options) - set(allowed))
    if unknown:
        raise ManifestError(
            f"scenario {scenario.name!r}: unknown options: {', '.join(unknown)}"
        )


def _scenario_dir(out_dir: str, name: str) -> str:
    path = os.path.join(out_dir, name)
    os.makedirs(path, exist_ok=True)
    return path


def _run_classical(scenario: Scenario, out_dir: str, workers) -> list:
    _check_options(scenario, {"drives", "t_end", "dt_out", "rtol", "atol"})
    o = scenario.options
    drives = [float(d) for d in _opt(o, "drives", [scenario.params.drive])]
    t_end = float(_opt(o, "t_end", 5000.0))
    dt_out = float(_opt(o, "dt_out", 0.5))
    rtol = float(_opt(o, "rtol", RTOL_DEFAULT))
    atol = float(_opt(o, "atol", ATOL_DEFAULT))
    outputs = []
    for d in drives:
        traj = classical.integrate(
            scenario.params.replace(drive=d), t_end, dt_out, rtol=rtol, atol=atol
        )
        path = os.path.join(out_dir, f"trajectory_E{d:g}.csv")
        io.write_trajectory_csv(path, traj)
        outputs.append(path)
    return outputs


def _run_amplitude_scan(scenario: Scenario, out_dir: str, workers) -> list:
    _check_options(scenario, {
        "drives", "t_end", "window", "dt_out", "rtol", "atol", "trajectory_drives",
    })
    o = scenario.options
    if "drives" not in o:
        raise ManifestError(f"scenario {scenario.name!r}: amplitude_scan needs drives")
    scan = classical.amplitude_scan(
        scenario.params,
        [float(d) for d in o["drives"]],
        t_end=float(_opt(o, "t_end", 5000.0)),
        window=float(_opt(o, "window", 500.0)),
        dt_out=float(_opt(o, "dt_out", 0.4)),
        rtol=float(_opt(o, "rtol", RTOL_DEFAULT)),
        atol=float(_opt(o, "atol", ATOL_DEFAULT)),
        workers=workers,
    )
    rows = []
    for pt in scan.points:
        if pt.report is None:
            rows.append([pt.drive, "failed", None, None, None, None, pt.error or ""])
        else:
            r = pt.report
            rows.append([
                pt.drive, r.regime, r.amplitude1, r.amplitude2,
                r.decay_rate, r.locked_phase, "",
            ])
    scan_path = os.path.join(out_dir, "amplitude_scan.csv")
    io.write_csv(
        scan_path,
        ("E", "regime", "A1", "A2", "decay_rate", "locked_phase", "error"),
        rows,
    )
    thresh_path = os.path.join(out_dir, "thresholds.csv")
    io.write_csv(thresh_path, ("E_p", "E_lc"), [[scan.e_p, scan.e_lc]])
    outputs = [scan_path, thresh_path]

    for d in [float(x) for x in _opt(o, "trajectory_drives", [])]:
        traj = classical.integrate(
            scenario.params.replace(drive=d),
            float(_opt(o, "t_end", 5000.0)),
            float(_opt(o, "dt_out", 0.4)),
            rtol=float(_opt(o, "rtol", RTOL_DEFAULT)),
            atol=float(_opt(o, "atol", ATOL_DEFAULT)),
        )
        path = os.path.join(out_dir, f"trajectory_E{d:g}.csv")
        io.write_trajectory_csv(path, traj)
        outputs.append(path)
    return outputs


def _run_stability_scan(scenario: Scenario, out_dir: str, workers) -> list:
    _check_options(scenario, {"drives", "gamma_m1_values", "dead_band"})
    o = scenario.options
    if "drives" not in o:
        raise ManifestError(f"scenario {scenario.name!r}: stability_scan needs drives")
    drives = [float(d) for d in o["drives"]]
    gammas = [float(g) for g in _opt(o, "gamma_m1_values", [scenario.params.gamma_m1])]
    dead_band = float(_opt(o, "dead_band", fluctuations.STABILITY_DEAD_BAND))
    outputs = []
    for g in gammas:
        points = fluctuations.stability_scan(
            scenario.params.replace(gamma_m1=g), drives, dead_band=dead_band
        )
        rows = [
            [p.drive, p.max_re_eig if p.error is None else None,
             "1" if p.stable else "0", p.error or ""]
            for p in points
        ]
        path = os.path.join(out_dir, f"stability_gamma_m1_{g:g}.csv")
        io.write_csv(path, ("E", "max_re_eig", "stable", "error"), rows)
        outputs.append(path)
    return outputs


def _cov_series_job(args):
    (params, t_end, dt_out, rtol, atol) = args
    series = fluctuations.propagate(params, t_end, dt_out, rtol=rtol, atol=atol)
    return series


def _run_covariance(scenario: Scenario, out_dir: str, workers) -> list:
    _check_options(scenario, {"drives", "t_end", "dt_out", "rtol", "atol", "snapshot"})
    o = scenario.options
    drives = [float(d) for d in _opt(o, "drives", [scenario.params.drive])]
    t_end = float(_opt(o, "t_end", 5000.0))
    dt_out = float(_opt(o, "dt_out", 1.0))
    rtol = float(_opt(o, "rtol", RTOL_DEFAULT))
    atol = float(_opt(o, "atol", ATOL_DEFAULT))
    want_snapshot = bool(_opt(o, "snapshot", True))
    jobs = [
        (scenario.params.replace(drive=d), t_end, dt_out, rtol, atol)
        for d in drives
    ]
    series_list = parallel_map(_cov_series_job, jobs, workers=workers)
    outputs = []
    for d, series in zip(drives, series_list):
        tag = f"E{d:g}"
        cov_path = os.path.join(out_dir, f"covariance_{tag}.csv")
        io.write_covariance_csv(cov_path, series)
        outputs.append(cov_path)
        if want_snapshot:
            snap_path = os.path.join(out_dir, f"covariance_{tag}.covbin")
            io.write_covariance_snapshot(snap_path, series)
            outputs.append(snap_path)
        ms = metrics.metric_series(series)
        met_path = os.path.join(out_dir, f"metrics_{tag}.csv")
        io.write_metrics_csv(met_path, ms)
        outputs.append(met_path)
    return outputs


def _sweep_rows_csv(rows, keys):
    header = keys + ("S_p_avg", "E_n_avg", "status")
    table = []
    for row in rows:
        cells = []
        for key in keys:
            if key == "E":
                cells.append(row.drive)
            elif key == "delta_omega":
                cells.append(row.delta_omega)
            elif key == "n_thermal":
                cells.append(row.n_thermal)
            elif key == "post_ep":
                cells.append("" if row.post_ep is None else ("1" if row.post_ep else "0"))
        cells += [row.s_p_avg, row.e_n_avg, row.status]
        table.append(cells)
    return header, table


def _run_power_sweep(scenario: Scenario, out_dir: str, workers) -> list:
    _check_options(scenario, {
        "drives", "t_end", "dt_out", "avg_fraction", "rtol", "atol",
    })
    o = scenario.options
    if "drives" not in o:
        raise ManifestError(f"scenario {scenario.name!r}: power_sweep needs drives")
    rows = power_sweep(
        scenario.params,
        [float(d) for d in o["drives"]],
        t_end=float(_opt(o, "t_end", 5000.0)),
        dt_out=float(_opt(o, "dt_out", 1.0)),
        avg_fraction=float(_opt(o, "avg_fraction", 0.5)),
        rtol=float(_opt(o, "rtol", RTOL_SWEEP)),
        atol=float(_opt(o, "atol", ATOL_SWEEP)),
        workers=workers,
    )
    header, table = _sweep_rows_csv(rows, ("E", "post_ep"))
    path = os.path.join(out_dir, "power_sweep.csv")
    io.write_csv(path, header, table)
    return [path]


def _run_mismatch_sweep(scenario: Scenario, out_dir: str, workers) -> list:
    _check_options(scenario, {
        "mismatches", "drives", "t_end", "dt_out", "avg_fraction", "rtol", "atol",
    })
    o = scenario.options
    for need in ("mismatches", "drives"):
        if need not in o:
            raise ManifestError(
                f"scenario {scenario.name!r}: mismatch_sweep needs {need}"
            )
    rows = mismatch_sweep(
        scenario.params,
        [float(x) for x in o["mismatches"]],
        [float(d) for d in o["drives"]],
        t_end=float(_opt(o, "t_end", 5000.0)),
        dt_out=float(_opt(o, "dt_out", 1.0)),
        avg_fraction=float(_opt(o, "avg_fraction", 0.5)),
        rtol=float(_opt(o, "rtol", RTOL_SWEEP)),
        atol=float(_opt(o, "atol", ATOL_SWEEP)),
        workers=workers,
    )
    header, table = _sweep_rows_csv(rows, ("delta_omega", "E"))
    path = os.path.join(out_dir, "mismatch_sweep.csv")
    io.write_csv(path, header, table)
    return [path]


def _run_thermal_sweep(scenario: Scenario, out_dir: str, workers) -> list:
    _check_options(scenario, {
        "n_thermal", "drive", "t_end", "dt_out", "avg_fraction", "rtol", "atol",
    })
    o = scenario.options
    for need in ("n_thermal", "drive"):
        if need not in o:
            raise ManifestError(
                f"scenario {scenario.name!r}: thermal_sweep needs {need}"
            )
    series_by_n, rows = thermal_sweep(
        scenario.params,
        [float(n) for n in o["n_thermal"]],
        float(o["drive"]),
        t_end=float(_opt(o, "t_end", 5000.0)),
        dt_out=float(_opt(o, "dt_out", 1.0)),
        avg_fraction=float(_opt(o, "avg_fraction", 0.5)),
        rtol=float(_opt(o, "rtol", RTOL_SWEEP)),
        atol=float(_opt(o, "atol", ATOL_SWEEP)),
        workers=workers,
    )
    outputs = []
    for n, ms in series_by_n.items():
        if ms is None:
            continue
        path = os.path.join(out_dir, f"metrics_n{n:g}.csv")
        io.write_metrics_csv(path, ms)
        outputs.append(path)
    header, table = _sweep_rows_csv(rows, ("n_thermal", "E"))
    avg_path = os.path.join(out_dir, "averages.csv")
    io.write_csv(avg_path, header, table)
    outputs.append(avg_path)
    return outputs


def _run_wigner_panel(scenario: Scenario, out_dir: str, workers) -> list:
    _check_options(scenario, {
        "drives", "snapshots", "dt_out", "grid_n", "n_sigma", "rtol", "atol",
    })
    o = scenario.options
    if "drives" not in o:
        raise ManifestError(f"scenario {scenario.name!r}: wigner_panel needs drives")
    panels, failures = wigner_panel(
        scenario.params,
        [float(d) for d in o["drives"]],
        [float(t) for t in _opt(o, "snapshots", [5000.0])],
        dt_out=float(_opt(o, "dt_out", 1.0)),
        grid_n=int(_opt(o, "grid_n", 201)),
        n_sigma=float(_opt(o, "n_sigma", 6.0)),
        rtol=float(_opt(o, "rtol", RTOL_SWEEP)),
        atol=float(_opt(o, "atol", ATOL_SWEEP)),
        workers=workers,
    )
    if failures:
        raise RuntimeError(
            "wigner_panel integration failures: "
            + ", ".join(f"E={d:g}: {err}" for d, err in failures)
        )
    outputs = []
    squeeze_rows = []
    for p in panels:
        tag = f"E{p.drive:g}_t{p.t_snapshot:g}_m{p.oscillator}"
        base = os.path.join(out_dir, f"wigner_{tag}")
        io.write_wigner_csv(base + ".csv", p.grid)
        io.write_wigner_header(base + ".hdr.json", p.grid)
        io.write_wigner_snapshot(base + ".wigbin", p.grid)
        outputs += [base + ".csv", base + ".hdr.json", base + ".wigbin"]
        squeeze_rows.append([
            p.drive, p.t_snapshot, float(p.oscillator),
            p.squeeze.r, p.squeeze.phi, p.squeeze.n_eff,
        ])
    squeeze_path = os.path.join(out_dir, "squeeze.csv")
    io.write_csv(
        squeeze_path, ("E", "t", "oscillator", "r", "phi", "n_eff"), squeeze_rows
    )
    outputs.append(squeeze_path)
    return outputs


_EXECUTORS = {
    "classical": _run_classical,
    "covariance": _run_covariance,
    "stability_scan": _run_stability_scan,
    "amplitude_scan": _run_amplitude_scan,
    "power_sweep": _run_power_sweep,
    "mismatch_sweep": _run_mismatch_sweep,
    "thermal_sweep": _run_thermal_sweep,
    "wigner_panel": _run_wigner_panel,
}


def run(manifest: RunManifest, workers: Optional[int] = None) -> RunReport:
    """Execute every scenario in a manifest and write ``report.json``.

    Scenarios run in manifest order, each fanning its independent sweep
    points out over the worker pool; per-scenario failures are recorded in
    the report without stopping the run.
    """
    from . import __version__

    os.makedirs(manifest.out_dir, exist_ok=True)
    results = []
    for scenario in manifest.scenarios:
        sdir = _scenario_dir(manifest.out_dir, scenario.name)
        start = time.monotonic()
        try:
            outputs = _EXECUTORS[scenario.kind](scenario, sdir, workers)
            rel = [os.path.relpath(p, manifest.out_dir) for p in outputs]
            results.append(ScenarioResult(
                scenario.name, scenario.kind, "ok", rel,
                wall_time_s=time.monotonic() - start,
            ))
        except Exception as exc:  # per-scenario isolation
            results.append(ScenarioResult(
                scenario.name, scenario.kind, "failed", [],
                wall_time_s=time.monotonic() - start,
                error=f"{type(exc).__name__}: {exc}",
            ))
    report = RunReport(scenarios=results, tool_version=__version__, seed=manifest.seed)
    io.write_json(os.path.join(manifest.out_dir, "report.json"), report.to_dict())
    return report


# --------------------------------------------------------------------------
# Bundled figure scenarios

def builtin_scenarios(params: Optional[SystemParams] = None) -> dict:
    """The bundled figure-reproduction scenarios, keyed by name.

    Each maps one figure of the reference study onto a run kind with the
    study's parameter values; drive grids for the sweep figures use the
    post-instability window the study discusses.
    """
    p = params or SystemParams()
    drives_scan = [float(d) for d in range(300, 701, 10)]
    drives_stab = [float(d) for d in range(100, 701, 20)]
    drives_sweep = [500.0, 550.0, 600.0, 650.0, 700.0, 750.0, 800.0]
    return {
        "fig2": Scenario("fig2", "amplitude_scan", p, {
            "drives": drives_scan,
            "t_end": 5000.0, "window": 500.0,
            "trajectory_drives": [100.0, 500.0],
        }),
        "fig3": Scenario("fig3", "stability_scan", p, {
            "drives": drives_stab,
            "gamma_m1_values": [1e-2, 1e-3, 1e-4],
        }),
        "fig4": Scenario("fig4", "covariance", p, {
            "drives": [500.0, 600.0], "t_end": 5000.0, "dt_out": 1.0,
        }),
        "fig5": Scenario("fig5", "wigner_panel", p, {
            "drives": [100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0],
            "snapshots": [5000.0],
        }),
        "fig6": Scenario("fig6", "wigner_panel", p, {
            "drives": [600.0], "snapshots": [3000.0, 4000.0, 5000.0],
        }),
        "fig7": Scenario("fig7", "covariance", p, {
            "drives": [400.0, 500.0, 600.0], "t_end": 5000.0, "dt_out": 1.0,
        }),
        "fig8": Scenario("fig8", "mismatch_sweep", p, {
            "mismatches": [0.002, 0.004, 0.006, 0.008],
            "drives": drives_sweep,
        }),
        "fig9": Scenario("fig9", "thermal_sweep", p, {
            "n_thermal": [0.0, 10.0, 20.0], "drive": 600.0,
        }),
    }


def figure_manifest(names, out_dir: str, params: Optional[SystemParams] = None) -> RunManifest:
    known = builtin_scenarios(params)
    missing = [n for n in names if n not in known]
    if missing:
        raise ManifestError(f"unknown figure scenarios: {', '.join(missing)}")
    return RunManifest(
        scenarios=[known[n] for n in names],
        out_dir=out_dir,
    )

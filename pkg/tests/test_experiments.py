"""Output formats, manifests, scenario execution, and the CLI."""

import json
import os

import numpy as np
import pytest

from epomc import classical, cli, experiments, fluctuations, io, metrics
from epomc.model import PAPER_DEFAULTS

TINY_COV = {"drives": [50.0], "t_end": 30.0, "dt_out": 5.0,
            "rtol": 1e-7, "atol": 1e-10}


def tiny_manifest_text(out_dir):
    return f"""
schema_version: 1
out_dir: {out_dir}
seed: 7
scenarios:
  - name: quick_classical
    kind: classical
    params: {{drive: 50}}
    options: {{t_end: 20, dt_out: 2}}
  - name: quick_cov
    kind: covariance
    options:
      drives: [50]
      t_end: 30
      dt_out: 5
      rtol: 1e-7
      atol: 1e-10
"""


class TestFormatting:
    def test_shortest_round_trip(self):
        assert io.format_float(0.1) == "0.1"
        assert io.format_float(1e-4) == "0.0001"
        assert io.format_float(1 / 3) == repr(1 / 3)
        assert float(io.format_float(np.pi)) == np.pi

    def test_nan_becomes_empty(self):
        assert io.format_float(float("nan")) == ""

    def test_covariance_labels(self):
        labels = io.covariance_column_labels()
        assert labels[0] == "V_qq11"
        assert labels[1] == "V_qp11"
        assert "V_qq12" in labels
        assert len(labels) == 36


class TestWriters:
    def test_trajectory_csv(self, tmp_path):
        traj = classical.integrate(PAPER_DEFAULTS.replace(drive=10.0), 5.0, 1.0)
        path = tmp_path / "traj.csv"
        io.write_trajectory_csv(path, traj)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,re_a1,im_a1,q1,p1,re_a2,im_a2,q2,p2"
        assert len(lines) == len(traj.t) + 1
        # every field parses back to the exact double
        row = lines[2].split(",")
        assert float(row[0]) == traj.t[1]
        assert float(row[1]) == traj.states[1, 0]

    def test_covariance_snapshot_round_trip(self, tmp_path):
        series = fluctuations.propagate(
            PAPER_DEFAULTS.replace(drive=10.0), 10.0, 2.0, rtol=1e-7, atol=1e-10
        )
        path = tmp_path / "cov.covbin"
        io.write_covariance_snapshot(path, series)
        t, tris = io.read_covariance_snapshot(path)
        assert np.array_equal(t, series.t)
        for k in range(len(t)):
            assert np.array_equal(tris[k], fluctuations.pack_upper(series.covs[k]))

    def test_wigner_snapshot_round_trip(self, tmp_path):
        vm = np.array([[0.8, 0.1], [0.1, 0.6]])
        grid = metrics.wigner(vm, metrics.grid_for_covariance(vm, n=41))
        path = tmp_path / "w.wigbin"
        io.write_wigner_snapshot(path, grid)
        back = io.read_wigner_snapshot(path)
        assert np.allclose(back["q"], grid.q)
        assert np.array_equal(back["w"], grid.w)

    def test_metrics_csv_empty_fields_for_nan(self, tmp_path):
        ms = metrics.MetricSeries(
            t=np.array([0.0, 1.0]),
            s_p=np.array([1.0, np.nan]),
            e_n=np.zeros(2), nu_minus=np.full(2, 0.5),
            r1=np.zeros(2), phi1=np.zeros(2),
            r2=np.zeros(2), phi2=np.zeros(2),
            f=np.array([np.nan, 1.0]),
            amp1=np.zeros(2), amp2=np.zeros(2), qp_ratio=np.ones(2),
        )
        path = tmp_path / "m.csv"
        io.write_metrics_csv(path, ms)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,S_p,E_n,nu_minus,r1,phi1,r2,phi2,f"
        assert lines[1].endswith(",")          # f missing on first row
        assert ",," in lines[2]                # S_p missing on second row
        assert "nan" not in path.read_text().lower()

    def test_atomic_write_leaves_no_partial(self, tmp_path):
        target = tmp_path / "x.csv"
        io.atomic_write_text(target, "ok\n")
        assert target.read_text() == "ok\n"
        assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]


class TestManifest:
    def test_parse_round_trip(self, tmp_path):
        m = experiments.parse_manifest(tiny_manifest_text(tmp_path / "out"))
        assert [s.name for s in m.scenarios] == ["quick_classical", "quick_cov"]
        assert m.scenarios[0].params.drive == 50.0
        assert m.seed == 7

    @pytest.mark.parametrize("text,fragment", [
        ("schema_version: 2\nscenarios: []\n", "schema_version"),
        ("schema_version: 1\nscenarios: [{kind: classical}]\n", "missing name"),
        ("schema_version: 1\nscenarios: [{name: a, kind: nope}]\n", "unknown kind"),
        ("schema_version: 1\nbogus: 1\nscenarios: []\n", "unknown manifest keys"),
        ("schema_version: 1\nscenarios: [{name: a, kind: classical, params: {kappa: -1}}]\n",
         "kappa"),
        ("schema_version: 1\nscenarios: [{name: a, kind: classical, params: {oops: 1}}]\n",
         "oops"),
        ("schema_version: 1\nscenarios: [{name: a, kind: classical}, {name: a, kind: classical}]\n",
         "duplicate"),
    ])
    def test_validation_errors(self, text, fragment):
        errors = experiments.validate_manifest_text(text)
        assert any(fragment in e for e in errors)

    def test_empty_scenarios_ok(self):
        assert experiments.validate_manifest_text(
            "schema_version: 1\nscenarios: []\n") == []


class TestRun:
    def test_tiny_manifest(self, tmp_path):
        out = tmp_path / "out"
        manifest = experiments.parse_manifest(tiny_manifest_text(out))
        report = experiments.run(manifest, workers=1)
        assert not report.failed
        assert (out / "report.json").exists()
        doc = json.loads((out / "report.json").read_text())
        assert doc["schema_version"] == 1
        assert {s["name"] for s in doc["scenarios"]} == {"quick_classical", "quick_cov"}
        for s in doc["scenarios"]:
            assert s["status"] == "ok"
            for rel in s["outputs"]:
                assert (out / rel).exists()

    def test_empty_manifest(self, tmp_path):
        report = experiments.run(
            experiments.RunManifest(scenarios=[], out_dir=str(tmp_path / "o")),
            workers=1,
        )
        assert not report.failed
        assert report.scenarios == []

    def test_invalid_params_reported_per_scenario(self, tmp_path):
        # Construct a scenario whose execution fails (bad option), and check
        # the run records the failure and exits nonzero through the CLI.
        sc = experiments.Scenario(
            "broken", "amplitude_scan", PAPER_DEFAULTS, {"nope": 1}
        )
        report = experiments.run(
            experiments.RunManifest(scenarios=[sc], out_dir=str(tmp_path / "o")),
            workers=1,
        )
        assert report.failed
        assert report.scenarios[0].status == "failed"
        assert "nope" in report.scenarios[0].error

    def test_byte_reproducibility(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            manifest = experiments.parse_manifest(tiny_manifest_text(out))
            experiments.run(manifest, workers=1)
        for rel in ("quick_classical/trajectory_E50.csv",
                    "quick_cov/covariance_E50.csv",
                    "quick_cov/metrics_E50.csv"):
            assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes()

    def test_unknown_option_rejected(self, tmp_path):
        sc = experiments.Scenario(
            "s", "covariance", PAPER_DEFAULTS, dict(TINY_COV, bogus=1)
        )
        with pytest.raises(experiments.ManifestError, match="bogus"):
            experiments._run_covariance(sc, str(tmp_path), workers=1)


class TestSweeps:
    def test_power_sweep_rows(self):
        # Trailing window past the switch-on transient; at E = 100 the
        # steady state is unentangled and the drive sits before the
        # exceptional point.
        rows = experiments.power_sweep(
            PAPER_DEFAULTS, [40.0, 100.0], t_end=300.0, dt_out=2.0,
            rtol=1e-7, atol=1e-10, workers=1,
        )
        assert [r.drive for r in rows] == [40.0, 100.0]
        assert all(r.status == "ok" for r in rows)
        assert rows[1].e_n_avg == 0.0
        assert 0.3 < rows[1].s_p_avg < 1.5
        assert all(r.post_ep is False for r in rows)

    def test_thermal_sweep_zero_matches_direct(self):
        # n = 0 row must reproduce the directly-propagated metric series.
        series_by_n, rows = experiments.thermal_sweep(
            PAPER_DEFAULTS, [0.0], 30.0, t_end=40.0, dt_out=2.0,
            rtol=1e-7, atol=1e-10, workers=1,
        )
        direct = fluctuations.propagate(
            PAPER_DEFAULTS.replace(drive=30.0), 40.0, 2.0, rtol=1e-7, atol=1e-10
        )
        ms = metrics.metric_series(direct)
        assert np.array_equal(series_by_n[0.0].s_p, ms.s_p)
        assert np.array_equal(series_by_n[0.0].e_n, ms.e_n)

    def test_wigner_panel_near_vacuum(self):
        panels, failures = experiments.wigner_panel(
            PAPER_DEFAULTS, [20.0], [40.0], dt_out=4.0,
            grid_n=61, rtol=1e-7, atol=1e-10, workers=1,
        )
        assert not failures
        assert len(panels) == 2
        for p in panels:
            assert p.squeeze.r < 0.1
            assert 0.99 < p.grid.riemann_sum() < 1.01


class TestBuiltinScenarios:
    def test_catalog(self):
        cat = experiments.builtin_scenarios()
        assert set(cat) == {f"fig{i}" for i in range(2, 10)}
        for sc in cat.values():
            assert sc.kind in experiments.RUN_KINDS

    def test_figure_manifest_unknown(self):
        with pytest.raises(experiments.ManifestError):
            experiments.figure_manifest(["fig99"], "out")


class TestCli:
    def test_validate_ok(self, tmp_path, capsys):
        path = tmp_path / "m.yaml"
        path.write_text(tiny_manifest_text(tmp_path / "out"))
        assert cli.main(["validate", str(path)]) == 0
        assert "manifest ok" in capsys.readouterr().out

    def test_validate_bad(self, tmp_path, capsys):
        path = tmp_path / "m.yaml"
        path.write_text("schema_version: 3\nscenarios: []\n")
        assert cli.main(["validate", str(path)]) == 2
        assert "schema_version" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert cli.main(["run", "/nonexistent/m.yaml"]) == 2

    def test_list_scenarios(self, capsys):
        assert cli.main(["list-scenarios"]) == 0
        out = capsys.readouterr().out
        assert "fig2" in out and "fig9" in out

    def test_run_with_param_override(self, tmp_path, capsys):
        path = tmp_path / "m.yaml"
        out = tmp_path / "out"
        path.write_text(f"""
schema_version: 1
out_dir: {out}
scenarios:
  - name: c
    kind: classical
    options: {{t_end: 10, dt_out: 2}}
""")
        assert cli.main(["run", str(path), "--param", "drive=25", "--workers", "1"]) == 0
        csv = (out / "c" / "trajectory_E25.csv").read_text()
        assert csv.splitlines()[0].startswith("t,")

    def test_run_bad_param(self, tmp_path, capsys):
        path = tmp_path / "m.yaml"
        path.write_text(tiny_manifest_text(tmp_path / "out"))
        assert cli.main(["run", str(path), "--param", "bogus=1"]) == 2

    def test_scenario_failure_exit_code(self, tmp_path):
        path = tmp_path / "m.yaml"
        path.write_text(f"""
schema_version: 1
out_dir: {tmp_path / 'out'}
scenarios:
  - name: broken
    kind: amplitude_scan
    options: {{}}
""")
        assert cli.main(["run", str(path), "--workers", "1"]) == 1

"""Tests for the figure renderer.

Inputs are produced through the primary package's public CLI, never by
importing its internals; the renderer is then checked against the frozen
schemas and the region-figure acceptance criterion.
"""

import csv
import json
import math
import os
import subprocess
import sys

import pytest

import render

LAMBDA0 = (math.e**2 - 1.0) / 2.0


def cli(*argv):
    proc = subprocess.run([sys.executable, "-m", "ntdball", *argv],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


@pytest.fixture(scope="module")
def report_bundle(tmp_path_factory):
    """Region CSVs for N in {3, 3.5, 4}, a small sweep CSV, and a ladder
    JSON, all generated via the CLI."""
    tmp = tmp_path_factory.mktemp("reports")
    regions = []
    for N in ("3", "3.5", "4"):
        path = tmp / f"region_{N}.csv"
        cli("region-grid", "--N", N, "--pmax", "4", "--step", "0.25",
            "--out", str(path))
        regions.append(path)

    sweep_cfg = tmp / "sweep.json"
    sweep_csv = tmp / "sweep.csv"
    sweep_cfg.write_text(json.dumps({
        "N": 3, "p1": 2.0, "p2": 2.0,
        "b1_grid": [0.01 / LAMBDA0, 0.05 / LAMBDA0],
        "b2_grid": [0.01 / LAMBDA0, 0.05 / LAMBDA0],
        "solver": {"Lmax": 4, "tol": 1e-12},
        "output": str(sweep_csv),
    }))
    cli("verify-bound", "--config", str(sweep_cfg))

    solve_cfg = tmp / "solve.json"
    solve_out = tmp / "sol.json"
    ladder_json = tmp / "ladder.json"
    solve_cfg.write_text(json.dumps({
        "Lmax": 6, "tol": 1e-12,
        "f": {"kind": "AffinePower", "b": 0.05 / LAMBDA0, "p": 2.0},
        "g": {"kind": "AffinePower", "b": 0.05 / LAMBDA0, "p": 2.0},
    }))
    cli("solve", "--config", str(solve_cfg), "--out", str(solve_out))
    cli("moser", "--solution", str(solve_out), "--ladder", "10",
        "--ladder-out", str(ladder_json))

    return {"regions": regions, "sweep": sweep_csv, "ladder": ladder_json, "tmp": tmp}


class TestRegionFigure:
    def test_renders_all_panels(self, report_bundle, tmp_path):
        bundle = render.ReportBundle(
            region_csvs=tuple(str(p) for p in report_bundle["regions"]),
            sweep_csv=str(report_bundle["sweep"]),
            ladder_json=str(report_bundle["ladder"]),
            outdir=str(tmp_path),
        )
        files = render.render(bundle)
        assert len(files) == (3 + 1 + 1) * 2  # svg + png each
        for path in files:
            assert os.path.getsize(path) > 0

    def test_acceptance_region_criterion(self, report_bundle):
        # N = 3: the point (3,3) lies on the critical curve and the
        # comparison square corner sits at N/(N-2) = 3; N = 4: corner 2.
        rows3 = render.read_rows(report_bundle["regions"][0], render.REGION_COLUMNS)
        hit = [r for r in rows3 if float(r["p1"]) == 3.0 and float(r["p2"]) == 3.0]
        assert len(hit) == 1
        assert hit[0]["region"] == "OnHyperbola"
        assert float(hit[0]["square_bound"]) == pytest.approx(3.0)

        rows4 = render.read_rows(report_bundle["regions"][2], render.REGION_COLUMNS)
        assert float(rows4[0]["square_bound"]) == pytest.approx(2.0)

    def test_classifications_match_primary_classifier(self, report_bundle):
        # every plotted point agrees with the classifier behind the CLI:
        # delta0's sign at the 1e-12 tolerance decides the class label
        for path in report_bundle["regions"]:
            for r in render.read_rows(path, render.REGION_COLUMNS):
                d0 = float(r["delta0"])
                want = ("StrictlyBelow" if d0 > 1e-12
                        else "Above" if d0 < -1e-12 else "OnHyperbola")
                assert r["region"] == want

    def test_spot_check_against_cli_classifier(self, report_bundle):
        doc = json.loads(cli("exponents", "--N", "3", "--p1", "3", "--p2", "3", "--json"))
        assert doc["region"] == "OnHyperbola"
        doc = json.loads(cli("exponents", "--N", "3", "--p1", "1.5", "--p2", "1.5", "--json"))
        assert doc["region"] == "StrictlyBelow"


class TestRatioFigure:
    def test_empty_sweep_renders_axes(self, tmp_path):
        empty = tmp_path / "empty.csv"
        with open(empty, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(render.SWEEP_COLUMNS)
        files = render.render_ratio(str(empty), str(tmp_path))
        assert all(os.path.getsize(f) > 0 for f in files)

    def test_schema_mismatch_names_column(self, tmp_path):
        bad = tmp_path / "bad.csv"
        cols = list(render.SWEEP_COLUMNS)
        cols[4] = "h1u"
        with open(bad, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(cols)
        with pytest.raises(render.SchemaError, match="h1_u"):
            render.render_ratio(str(bad), str(tmp_path))


class TestLadderFigure:
    def test_renders(self, report_bundle, tmp_path):
        files = render.render_ladder(str(report_bundle["ladder"]), str(tmp_path))
        assert len(files) == 2

    def test_missing_key_aborts(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"rows": []}))
        with pytest.raises(render.SchemaError, match="linf_u"):
            render.render_ladder(str(bad), str(tmp_path))


class TestCliAndDeterminism:
    def test_cli_end_to_end(self, report_bundle, tmp_path):
        out = tmp_path / "figs"
        proc = subprocess.run(
            [sys.executable, "render.py",
             "--region", *(str(p) for p in report_bundle["regions"]),
             "--sweep", str(report_bundle["sweep"]),
             "--ladder", str(report_bundle["ladder"]),
             "--out", str(out)],
            capture_output=True, text=True, cwd=render.__file__.rsplit("/", 1)[0])
        assert proc.returncode == 0, proc.stderr
        listed = proc.stdout.split()
        assert len(listed) == 10

    def test_pixel_identical_rerender(self, report_bundle, tmp_path):
        mk = lambda sub: render.ReportBundle(
            region_csvs=(str(report_bundle["regions"][0]),),
            sweep_csv=str(report_bundle["sweep"]),
            ladder_json=str(report_bundle["ladder"]),
            outdir=str(tmp_path / sub),
        )
        files_a = render.render(mk("a"))
        files_b = render.render(mk("b"))
        for fa, fb in zip(files_a, files_b):
            if fa.endswith(".png"):
                assert open(fa, "rb").read() == open(fb, "rb").read()

    def test_schema_error_exit_code(self, report_bundle, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y\n")
        code = render.main(["--region", str(bad),
                            "--sweep", str(report_bundle["sweep"]),
                            "--ladder", str(report_bundle["ladder"]),
                            "--out", str(tmp_path)])
        assert code == 1

import json
import os

import numpy as np
import pytest

from markup_guarantee.cli import main


def run(args):
    return main(list(args))


def write_cfg(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestGuarantee:
    def test_default_battery_passes(self, tmp_path, capsys):
        code = run(["guarantee", "--eta", "2", "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "[pass]" in out and "[fail]" not in out
        assert (tmp_path / "guarantee.csv").exists()

    def test_missing_eta_is_config_error(self, capsys):
        assert run(["guarantee"]) == 2

    def test_empty_battery_exit_2(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "c.json", {"version": 1, "battery": []})
        assert run(["guarantee", "--eta", "2", "--config", cfg]) == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_config_field_rejected(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "c.json", {"version": 1, "surprise": 1})
        assert run(["guarantee", "--eta", "2", "--config", cfg]) == 2

    def test_version_mismatch_rejected(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {"version": 99, "battery": []})
        assert run(["guarantee", "--eta", "2", "--config", cfg]) == 2


class TestFrontier:
    def test_single_point_csv_and_svg(self, tmp_path):
        code = run(["frontier", "--eta", "2", "--grid", "1",
                    "--out", str(tmp_path)])
        assert code == 0
        rows = (tmp_path / "frontier.csv").read_text().strip().splitlines()
        assert len(rows) == 2  # header + one point
        svg = (tmp_path / "frontier.svg").read_text()
        assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")

    def test_endpoints(self, tmp_path):
        run(["frontier", "--eta", "2", "--grid", "11", "--out", str(tmp_path)])
        rows = (tmp_path / "frontier.csv").read_text().strip().splitlines()[1:]
        first = rows[0].split(",")
        last = rows[-1].split(",")
        assert float(first[1]) == pytest.approx(0.25)
        assert float(first[2]) == pytest.approx(0.5)
        assert float(last[1]) == pytest.approx(1.0)
        assert float(last[2]) == pytest.approx(0.0, abs=1e-12)

    def test_deterministic_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run(["frontier", "--eta", "3", "--grid", "7", "--out", str(a)])
        run(["frontier", "--eta", "3", "--grid", "7", "--out", str(b)])
        assert (a / "frontier.csv").read_bytes() == (b / "frontier.csv").read_bytes()
        assert (a / "frontier.svg").read_bytes() == (b / "frontier.svg").read_bytes()


class TestBoundary:
    def test_overlays_never_exterior(self, tmp_path, capsys):
        code = run(["boundary", "--grid", "10", "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        verdicts = [line for line in out.splitlines()
                    if line.startswith("overlay")]
        assert verdicts and all(line.endswith(("interior", "boundary"))
                                for line in verdicts)
        body = (tmp_path / "boundary.csv").read_text()
        assert "upper" in body and "lower" in body and "zero_cs" in body


class TestVerify:
    def test_lower_bound_scenario(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "v.json",
                        {"version": 1, "scenario": "lower_bound", "eta": 2.0})
        assert run(["verify", "--config", cfg]) == 0
        assert "certificates pass" in capsys.readouterr().out

    def test_requires_config(self):
        assert run(["verify"]) == 2

    def test_unknown_scenario(self, tmp_path):
        cfg = write_cfg(tmp_path, "v.json",
                        {"version": 1, "scenario": "nope"})
        assert run(["verify", "--config", cfg]) == 2

    def test_quantity_scenario(self, tmp_path):
        cfg = write_cfg(tmp_path, "v.json", {
            "version": 1, "scenario": "quantity",
            "model": {"kind": "separable_quantity", "eta": -2.0},
            "battery": [{"kind": "uniform", "a": 0.5, "b": 2.0},
                        {"kind": "point_mass", "v0": 1.0}]})
        assert run(["verify", "--config", cfg]) == 0


class TestOracle:
    def test_two_type_instance(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "o.json", {
            "version": 1, "eta": 2.0,
            "values": [1.0, 2.0], "masses": [0.5, 0.5],
            "quality_grid": list(np.linspace(0.0, 2.5, 26))})
        assert run(["oracle", "--config", cfg]) == 0
        assert "pass" in capsys.readouterr().out


class TestProcure:
    def test_quality_table(self, tmp_path, capsys):
        code = run(["procure", "--side", "quality", "--eta", "2",
                    "--out", str(tmp_path)])
        assert code == 0
        row = (tmp_path / "procure_quality.csv").read_text().splitlines()[1]
        _, _, price, share = row.split(",")
        assert float(price) == 0.5 and float(share) == 0.5

    def test_quantity_side(self, tmp_path):
        code = run(["procure", "--side", "quantity", "--eta", "-2",
                    "--out", str(tmp_path)])
        assert code == 0

    def test_bad_eta(self):
        assert run(["procure", "--side", "quality", "--eta", "0.5"]) == 2


class TestSweep:
    def test_csv_roundtrip(self, tmp_path):
        cfg = write_cfg(tmp_path, "s.json", {
            "version": 1, "eta": 2.0, "mechanism": "guarantee",
            "battery": [{"kind": "uniform", "a": 0.0, "b": 1.0}]})
        assert run(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
        rows = (tmp_path / "sweep.csv").read_text().strip().splitlines()
        assert len(rows) == 2
        assert "pi_ratio" in rows[0]

    def test_thread_env_respected(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MARKUP_GUARANTEE_THREADS", "2")
        cfg = write_cfg(tmp_path, "s.json", {
            "version": 1, "eta": 2.0, "mechanism": "guarantee",
            "battery": [{"kind": "uniform", "a": 0.0, "b": 1.0},
                        {"kind": "power", "alpha": 2.0},
                        {"kind": "point_mass", "v0": 1.0}]})
        assert run(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
        rows = (tmp_path / "sweep.csv").read_text().strip().splitlines()[1:]
        # output preserved in input order despite the worker pool
        assert "uniform" in rows[0] and "power" in rows[1]

"""Command surface: scenario ingestion, reports, exit codes, determinism."""

from __future__ import annotations

import json
import math
import warnings
from pathlib import Path

import pytest

from dstab.cli import dumps, main

DATA = Path(__file__).resolve().parent.parent / "src" / "dstab" / "data"
TOY = str(DATA / "toy3.json")


def run(capsys, *argv) -> tuple[int, str, str]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def toy_copy(tmp_path) -> Path:
    target = tmp_path / "toy.json"
    target.write_text(Path(TOY).read_text())
    return target


def toy_variant(tmp_path, mutate) -> Path:
    raw = json.loads(Path(TOY).read_text())
    mutate(raw)
    target = tmp_path / "variant.json"
    target.write_text(json.dumps(raw))
    return target


class TestPoles:
    def test_toy_has_five_poles(self, capsys):
        code, out, _ = run(capsys, "poles", TOY)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "re,im,margin"
        assert len(lines) == 1 + 5  # two second-order sources + one load state

    def test_all_margins_positive_for_certified_toy(self, capsys):
        _, out, _ = run(capsys, "poles", TOY)
        margins = [float(line.split(",")[2]) for line in out.strip().splitlines()[1:]]
        assert min(margins) >= 0.0

    def test_malformed_json_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _, err = run(capsys, "poles", str(bad))
        assert code == 2
        assert '"error":"input"' in err

    def test_region_override(self, capsys):
        code, out, _ = run(capsys, "poles", TOY, "--region", '{"kind": "lhp", "alpha": -1000000.0}')
        assert code == 0
        margins = [float(line.split(",")[2]) for line in out.strip().splitlines()[1:]]
        assert max(margins) < 0.0

    def test_bad_region_override_exits_2(self, capsys):
        code, _, err = run(capsys, "poles", TOY, "--region", "{oops")
        assert code == 2
        code, _, _ = run(capsys, "poles", TOY, "--region", '{"kind": "disk"}')
        assert code == 2


class TestGridcode:
    def test_toy_bound(self, capsys):
        code, out, _ = run(capsys, "gridcode", TOY)
        assert code == 0
        payload = json.loads(out)
        entry = payload["grid_codes"][0]
        assert entry["ll_assumption_ok"] is True
        assert entry["y_s_lower_bound"] > 0.0
        assert len(entry["y_virtual"]) == 1

    def test_overload_intervention_note(self, capsys, tmp_path):
        def overload(raw):
            for block in raw["devices"]:
                if block["type"] == "cpl":
                    block["P_watt"] = 150000.0
            raw["equilibrium"] = None

        path = toy_variant(tmp_path, overload)
        code, out, _ = run(capsys, "gridcode", str(path))
        # deep overload either breaks the power flow (numerical, exit 3) or
        # reports the damping violation with the operator note (exit 1)
        if code == 1:
            payload = json.loads(capsys and out)
            entry = payload["grid_codes"][0]
            assert entry["ll_assumption_ok"] is False
            assert "shed" in entry["note"]
        else:
            assert code == 3

    def test_demanding_region_intervention_note(self, capsys):
        # a decay requirement so deep that the load virtual admittance
        # exceeds the network's damping capacity
        code, out, _ = run(capsys, "gridcode", TOY, "--region", '{"kind": "lhp", "alpha": -15000.0}')
        assert code == 1
        entry = json.loads(out)["grid_codes"][0]
        assert entry["ll_assumption_ok"] is False
        assert "relax" in entry["note"]


class TestCheck:
    def test_theorem2_certifies_toy(self, capsys):
        code, out, _ = run(capsys, "check", TOY, "--theorem", "2")
        assert code == 0
        payload = json.loads(out)
        assert payload["certified"] is True and payload["theorem"] == "thm2"

    def test_theorem1_certifies_toy(self, capsys):
        code, out, _ = run(capsys, "check", TOY, "--theorem", "1")
        assert code == 0
        assert json.loads(out)["theorem"] == "thm1"

    def test_uncertifiable_region_exits_1(self, capsys):
        code, out, _ = run(capsys, "check", TOY, "--region", '{"kind": "lhp", "alpha": -30.0}')
        assert code == 1
        assert json.loads(out)["certified"] is False

    def test_schema_violation_exits_2(self, capsys, tmp_path):
        path = toy_variant(tmp_path, lambda raw: raw["devices"].pop())
        code, _, err = run(capsys, "check", str(path))
        assert code == 2

    def test_pinned_equilibrium_validated(self, capsys, tmp_path):
        def corrupt(raw):
            raw["equilibrium"]["u_star_volt"][0] += 5.0

        path = toy_variant(tmp_path, corrupt)
        code, _, err = run(capsys, "check", str(path))
        assert code == 2
        assert "equilibrium" in err


class TestSynthesize:
    def test_toy_compliant(self, capsys):
        code, out, _ = run(capsys, "synthesize", TOY)
        assert code == 0
        payload = json.loads(out)
        assert payload["all_compliant"] is True
        assert len(payload["y_s"][0]) == 2

    def test_matches_device_bounds(self, capsys):
        import dstab.devices as dev
        from dstab.scenario import load_scenario, resolve_equilibrium, source_coefficients, grid_codes

        sc = load_scenario(TOY)
        eq = resolve_equilibrium(sc)
        coeffs = source_coefficients(sc, eq)
        code = grid_codes(sc, eq)[0]
        _, out, _ = run(capsys, "synthesize", TOY)
        payload = json.loads(out)
        for pos, entry in enumerate(payload["parts"][0]):
            rep = dev.check_compliance(coeffs[pos], code)
            assert entry["compliant"] == rep.compliant
            assert entry["y_s"] == pytest.approx(rep.y_s)


class TestSimulateCmd:
    def test_writes_csv_and_metrics(self, capsys, tmp_path):
        out_base = tmp_path / "run"
        code, _, _ = run(capsys, "simulate", TOY, "--out", str(out_base))
        assert code == 0
        csv_text = out_base.with_suffix(".csv").read_text()
        header = csv_text.splitlines()[0]
        assert header == "t,du_1,du_2,du_3"
        stats = json.loads(out_base.with_suffix(".metrics.json").read_text())
        assert stats["peak_dev"] > 0

    def test_missing_disturbance_exits_2(self, capsys, tmp_path):
        path = toy_variant(tmp_path, lambda raw: raw.update(disturbance=None))
        code, _, _ = run(capsys, "simulate", str(path))
        assert code == 2


class TestPositivityCmd:
    def test_reports_all_nodes(self, capsys):
        code, out, _ = run(capsys, "positivity", TOY)
        assert code == 0
        payload = json.loads(out)
        assert len(payload["parts"][0]["devices"]) == 3
        assert all(d["is_positive"] for d in payload["parts"][0]["devices"])


class TestDeterminism:
    def test_byte_identical_reports(self, capsys):
        _, out1, _ = run(capsys, "check", TOY)
        _, out2, _ = run(capsys, "check", TOY)
        assert out1 == out2

    def test_float_format(self):
        assert dumps({"x": 1.5}) == '{"x":1.500000000000e+00}'
        assert dumps({"x": float("nan"), "y": [True, None]}) == '{"x":"nan","y":[true,null]}'
        assert dumps({"z": -0.0}) == '{"z":0.000000000000e+00}'


class TestNumericalFailure:
    def test_power_flow_collapse_exits_3(self, capsys, tmp_path):
        def collapse(raw):
            for block in raw["devices"]:
                if block["type"] == "cpl":
                    block["P_watt"] = 500000.0
            raw["equilibrium"] = None

        path = toy_variant(tmp_path, collapse)
        code, _, err = run(capsys, "check", str(path))
        assert code == 3
        assert '"error":"numerical"' in err

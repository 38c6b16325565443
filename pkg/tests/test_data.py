"""Sanity of the shipped scenario files."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from dstab.scenario import load_scenario, resolve_equilibrium

DATA = Path(__file__).resolve().parent.parent / "src" / "dstab" / "data"


@pytest.fixture(scope="module")
def default():
    return load_scenario(DATA / "ieee39_default.json")


@pytest.fixture(scope="module")
def tuned():
    return load_scenario(DATA / "ieee39_synthesized.json")


class TestIeee39Files:
    def test_topology_shape(self, default):
        assert default.n_nodes == 39
        assert len(default.edges) == 46
        assert all(r == pytest.approx(0.1) for _, _, r in default.edges)
        assert len(default.partition.source_ids) == 24
        assert len(default.partition.load_ids) == 15

    def test_both_files_share_topology(self, default, tuned):
        assert default.edges == tuned.edges
        assert default.partition == tuned.partition

    def test_pinned_equilibria_validate(self, default, tuned):
        for sc in (default, tuned):
            eq = resolve_equilibrium(sc)
            assert min(eq.u_star) > 0.9 * sc.nominal_voltage

    def test_retuning_preserves_operating_point(self, default, tuned):
        eq_default = resolve_equilibrium(default)
        eq_tuned = resolve_equilibrium(tuned)
        drift = max(abs(a - b) for a, b in zip(eq_default.u_star, eq_tuned.u_star))
        assert drift < 1e-8

    def test_synthesized_gains(self, tuned):
        raw = json.loads((DATA / "ieee39_synthesized.json").read_text())
        boost = [b for b in raw["devices"] if b["type"] == "ess_boost"]
        assert all(b["kI_u"] == 26.5 for b in boost)
        assert {b["kP_u"] for b in boost} == {0.35, 0.36}
        assert all(b["R_d_ohm"] in (pytest.approx(0.6 * 1.18), pytest.approx(0.6 * 1.19)) for b in boost)
        buck = [b for b in raw["devices"] if b["type"] == "ess_buck"]
        assert all(b["kP_u"] == 0.38 and b["kI_u"] == 21.0 for b in buck)
        pv = [b for b in raw["devices"] if b["type"] == "pv"]
        assert all(b["kI_u"] == 1.0 for b in pv)

    def test_region_is_three_part_intersection(self, default):
        from dstab.regions import CompositeRegion

        assert isinstance(default.region, CompositeRegion)
        assert len(default.region.parts) == 3


class TestToyFile:
    def test_loads_and_validates(self):
        sc = load_scenario(DATA / "toy3.json")
        assert sc.n_nodes == 3
        assert sc.disturbance is not None
        eq = resolve_equilibrium(sc)
        assert len(eq.u_star) == 3

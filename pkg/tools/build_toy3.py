#!/usr/bin/env python3
"""Regenerate the shipped 3-node demonstration scenario.

Two storage units feed one constant-power load over a star of 0.1-ohm
lines; gains are chosen so the grid-code certificate passes for a shifted
left-half-plane target."""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dstab import devices as dev
from dstab.cli import dumps
from dstab.network import NodePartition, build_admittance

NOMINAL = 105.0

BLOCKS = [
    {"node": 1, "type": "ess_boost", "C_farad": 2e-3, "E_volt": 50.0, "U_r_volt": 105.0,
     "R_d_ohm": 0.6, "kP_u": 0.35, "kI_u": 26.5},
    {"node": 2, "type": "ess_buck", "C_farad": 3e-3, "E_volt": 200.0, "U_r_volt": 105.0,
     "R_d_ohm": 0.7, "kP_u": 0.38, "kI_u": 21.0},
    {"node": 3, "type": "cpl", "C_l_farad": 2e-3, "P_watt": 1500.0},
]


def main() -> None:
    part = NodePartition((0, 1), (2,))
    Y = build_admittance([(0, 2, 0.1), (1, 2, 0.1)], 3, part)
    devices = [
        dev.EssBoostParams(C=2e-3, E=50.0, U_r=105.0, R_d=0.6, kP_u=0.35, kI_u=26.5),
        dev.EssBuckParams(C=3e-3, E=200.0, U_r=105.0, R_d=0.7, kP_u=0.38, kI_u=21.0),
        dev.CplParams(C_l=2e-3, P=1500.0),
    ]
    eq = dev.equilibrium_solve(Y, devices, NOMINAL)
    print("toy equilibrium:", [f"{u:.4f}" for u in eq.u_star])
    scenario = {
        "name": "toy3",
        "nominal_voltage_volt": NOMINAL,
        "topology": {
            "nodes": 3,
            "edges": [[1, 3, 0.1], [2, 3, 0.1]],
            "sources": [1, 2],
            "loads": [3],
        },
        "devices": BLOCKS,
        "region": {"kind": "lhp", "alpha": -2.0},
        "equilibrium": {"u_star_volt": list(eq.u_star), "i_star_amp": list(eq.i_star)},
        "disturbance": {"node": 3, "magnitude": 0.01, "start_s": 0.05, "duration_s": 0.02, "shape": "pulse"},
        "simulation": {"t_end_s": 0.6, "dt_s": 2e-5, "band": 0.02},
    }
    out = Path(__file__).resolve().parent.parent / "src" / "dstab" / "data" / "toy3.json"
    out.write_text(dumps(scenario) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()

"""Linear time-domain simulation of the closed-loop small-signal model.

The load disturbance is modeled as an additive current injection of
``magnitude * P / u*`` amps at the disturbed load node (the small-signal
equivalent of a fractional load-power step), integrated with fixed-step RK4.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dstability import SystemModel, assemble_closed_loop
from .errors import DstabError


@dataclass(frozen=True)
class DisturbanceSpec:
    """Pulse load step at one load node."""

    node: int
    magnitude: float
    start: float
    duration: float
    shape: str = "pulse"

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ValueError(f"disturbance duration must be positive, got {self.duration}")
        if self.shape != "pulse":
            raise ValueError(f"unsupported disturbance shape {self.shape!r}")


@dataclass(frozen=True)
class Trajectory:
    """Time grid and per-node voltage deviations (rows = samples)."""

    t: np.ndarray
    du: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        du = np.asarray(self.du, dtype=float)
        if du.shape[0] != t.shape[0]:
            raise ValueError("time grid and series lengths differ")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "du", du)


def simulate(m: SystemModel, d: DisturbanceSpec, t_end: float = 0.5, dt: float = 1e-4) -> Trajectory:
    """Integrate the disturbed closed-loop model over [0, t_end].

    Warns (without aborting) when the step size is large relative to the
    fastest closed-loop mode.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end <= d.start + d.duration:
        raise ValueError("t_end must exceed the end of the disturbance pulse")
    part = m.network.partition
    if d.node not in part.load_ids:
        raise ValueError(f"disturbance node {d.node} is not a load node")
    if m.load_cy is None or m.equilibrium_u is None:
        raise DstabError("simulation needs load parameters and an equilibrium on the model")

    a_cl = assemble_closed_loop(m)
    eigs = np.linalg.eigvals(a_cl)
    fastest = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    if fastest > 0 and dt > 0.1 / fastest:
        warnings.warn(
            f"step dt = {dt:.3g} s is coarse for the fastest mode |eig| = {fastest:.3g} 1/s",
            RuntimeWarning,
            stacklevel=2,
        )

    load_pos = part.load_ids.index(d.node)
    c_l, y_l = m.load_cy[load_pos]
    u_star = m.equilibrium_u[d.node]
    amps = d.magnitude * y_l * u_star  # magnitude * P / u*

    # Input column of the disturbed subsystem; an extra load draw enters the
    # device input with the same sign as the network current.
    dims = [g.den.degree for g in m.subsystems]
    offset = sum(dims[:d.node])
    b_d = np.zeros(a_cl.shape[0])
    b_d[offset + dims[d.node] - 1] = -amps

    c_rows = np.zeros((len(dims), a_cl.shape[0]))
    pos = 0
    for k, g in enumerate(m.subsystems):
        for i, coeff in enumerate(g.num.coeffs):
            c_rows[k, pos + i] = coeff.real
        pos += dims[k]

    n_steps = int(round(t_end / dt))
    t = np.linspace(0.0, n_steps * dt, n_steps + 1)
    x = np.zeros(a_cl.shape[0])
    du = np.zeros((n_steps + 1, len(dims)))

    def pulse(tau: float) -> float:
        return 1.0 if d.start <= tau < d.start + d.duration else 0.0

    for step in range(n_steps):
        tau = t[step]
        # The pulse is held constant over each step (sampled at the midpoint);
        # exact whenever the edges align with the time grid.
        w = pulse(tau + 0.5 * dt)
        k1 = a_cl @ x + b_d * w
        k2 = a_cl @ (x + 0.5 * dt * k1) + b_d * w
        k3 = a_cl @ (x + 0.5 * dt * k2) + b_d * w
        k4 = a_cl @ (x + dt * k3) + b_d * w
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        du[step + 1] = c_rows @ x
    return Trajectory(t, du)


def metrics(tr: Trajectory, band: float = 0.02) -> dict[str, float]:
    """Settling time (last exit from the +-band*peak tube), peak deviation,
    and the dominant oscillation frequency of the most-deviated node."""
    du = tr.du
    peak = float(np.max(np.abs(du))) if du.size else 0.0
    if peak == 0.0:
        return {"settling_time": 0.0, "peak_dev": 0.0, "dominant_freq": 0.0}

    threshold = band * peak
    outside = np.max(np.abs(du), axis=1) > threshold
    settling = float(tr.t[int(np.max(np.nonzero(outside)[0]))]) if np.any(outside) else 0.0

    worst_node = int(np.argmax(np.max(np.abs(du), axis=0)))
    sig = du[:, worst_node]
    active = np.abs(sig) > 1e-3 * peak
    if np.any(active):
        first, last = int(np.argmax(active)), int(len(sig) - 1 - np.argmax(active[::-1]))
    else:
        first, last = 0, len(sig) - 1
    segment = sig[first : last + 1]
    span = float(tr.t[last] - tr.t[first])
    crossings = int(np.sum(np.signbit(segment[:-1]) != np.signbit(segment[1:])))
    dominant = math.pi * crossings / span if span > 0 and crossings > 0 else 0.0
    return {"settling_time": settling, "peak_dev": peak, "dominant_freq": dominant}

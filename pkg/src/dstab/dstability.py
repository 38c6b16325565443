"""System-level certification and the centralized pole oracle.

Two independent routes to the same question.  The decentralized certifiers
(`certify_decentralized`, `certify_grid_code`) verify only local positivity
of the mapped, rotated, loop-transformed subsystems plus a semidefiniteness
condition on the modified network, and never touch the coupled dynamics.
The brute-force oracle (`closed_loop_poles` / `verify_region`) assembles the
full closed-loop state matrix and computes its spectrum, which makes the
certifiers falsifiable in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cpoly import CRational, feedback
from .devices import map_subsystem, virtual_admittance_from_conductance
from .errors import NonProperError
from .network import AdmittanceMatrix, GridCode, check_rotated_psd, rotate_network
from .positivity import PositivityReport, check_positive_siso
from .regions import HalfPlaneRegion, Region, parts


@dataclass(frozen=True)
class SystemModel:
    """Interconnected small-signal model: one SISO subsystem per node coupled
    through the admittance matrix.

    ``phi`` (compensation angles) defaults to the region angle theta0 of the
    part being certified; ``rho`` (loop-transform gains) defaults to the load
    virtual admittances and minus the source positivity indices, derived from
    ``load_cy`` (per-load (capacitance, conductance) pairs) and ``y_s``.
    Explicit ``phi`` / ``rho`` override the defaults for every part.
    """

    subsystems: tuple[CRational, ...]
    network: AdmittanceMatrix
    region: Region
    phi: tuple[float, ...] | None = None
    rho: tuple[complex, ...] | None = None
    load_cy: tuple[tuple[float, float], ...] | None = None
    y_s: tuple[tuple[float, ...], ...] | None = None
    equilibrium_u: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "subsystems", tuple(self.subsystems))
        n = self.network.n_nodes
        if len(self.subsystems) != n:
            raise ValueError(f"expected {n} subsystems, got {len(self.subsystems)}")
        for k, g in enumerate(self.subsystems):
            if not g.is_proper:
                raise NonProperError(f"subsystem {k} is not proper")
        if self.load_cy is not None and len(self.load_cy) != len(self.network.partition.load_ids):
            raise ValueError("load_cy must align with the load partition")

    @property
    def n_parts(self) -> int:
        return len(parts(self.region))

    def y_s_for_part(self, part_index: int) -> tuple[float, ...]:
        n_s = len(self.network.partition.source_ids)
        if self.y_s is None:
            return (0.0,) * n_s
        table = self.y_s
        if len(table) == self.n_parts:
            row = table[part_index]
        else:
            row = table[0]
        if len(row) != n_s:
            raise ValueError(f"expected {n_s} source indices, got {len(row)}")
        return tuple(float(v) for v in row)

    def part_phi(self, part: HalfPlaneRegion) -> np.ndarray:
        if self.phi is not None:
            return np.asarray(self.phi, dtype=float)
        return np.full(self.network.n_nodes, part.theta0)

    def part_rho(self, part: HalfPlaneRegion, part_index: int) -> np.ndarray:
        if self.rho is not None:
            return np.asarray(self.rho, dtype=complex)
        rho = np.zeros(self.network.n_nodes, dtype=complex)
        y_s = self.y_s_for_part(part_index)
        for pos, k in enumerate(self.network.partition.source_ids):
            rho[k] = -y_s[pos]
        if self.load_cy is not None:
            for pos, k in enumerate(self.network.partition.load_ids):
                c_l, y_l = self.load_cy[pos]
                rho[k] = virtual_admittance_from_conductance(c_l, y_l, part)
        return rho


@dataclass(frozen=True)
class PartCertificate:
    """Certification outcome for one half-plane part of the target region."""

    region: HalfPlaneRegion
    network_ok: bool
    network_lambda_min: float
    device_reports: tuple[PositivityReport, ...]
    certified: bool
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class CertificationReport:
    """Aggregate report; certified iff every part certifies."""

    theorem: str
    parts: tuple[PartCertificate, ...]
    certified: bool
    notes: tuple[str, ...] = ()

    @property
    def network_ok(self) -> bool:
        return all(p.network_ok for p in self.parts)

    @property
    def device_reports(self) -> tuple[PositivityReport, ...]:
        """Per-node reports: the first failing part's report, else part 0's."""
        n = len(self.parts[0].device_reports)
        out = []
        for k in range(n):
            chosen = self.parts[0].device_reports[k]
            for part in self.parts:
                if not part.device_reports[k].is_positive:
                    chosen = part.device_reports[k]
                    break
            out.append(chosen)
        return tuple(out)

    def as_dict(self) -> dict:
        from .regions import region_to_spec

        return {
            "theorem": self.theorem,
            "certified": self.certified,
            "network_ok": self.network_ok,
            "parts": [
                {
                    "region": region_to_spec(p.region),
                    "network_ok": p.network_ok,
                    "network_lambda_min": p.network_lambda_min,
                    "certified": p.certified,
                    "devices": [r.as_dict() for r in p.device_reports],
                    "notes": list(p.notes),
                }
                for p in self.parts
            ],
            "notes": list(self.notes),
        }


def _realization(g: CRational) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Controllable canonical form of a strictly proper real-rational function."""
    if not g.is_strictly_proper:
        raise NonProperError("closed-loop assembly requires strictly proper subsystems")
    den = g.den.real_coeffs(tol=1e-9)
    num = g.num.real_coeffs(tol=1e-9)
    m = den.degree
    a = np.zeros((m, m))
    for i in range(m - 1):
        a[i, i + 1] = 1.0
    for i in range(m):
        a[m - 1, i] = -den.coeffs[i].real
    b = np.zeros((m, 1))
    b[m - 1, 0] = 1.0
    c = np.zeros((1, m))
    for i, coeff in enumerate(num.coeffs):
        c[0, i] = coeff.real
    return a, b, c


def assemble_closed_loop(m: SystemModel) -> np.ndarray:
    """Closed-loop state matrix A - B Y C of the interconnection u = -Y y."""
    blocks = [_realization(g) for g in m.subsystems]
    dims = [a.shape[0] for a, _, _ in blocks]
    n_states = sum(dims)
    n = len(blocks)
    A = np.zeros((n_states, n_states))
    B = np.zeros((n_states, n))
    C = np.zeros((n, n_states))
    offset = 0
    for k, (a, b, c) in enumerate(blocks):
        d = dims[k]
        A[offset : offset + d, offset : offset + d] = a
        B[offset : offset + d, k] = b[:, 0]
        C[k, offset : offset + d] = c[0, :]
        offset += d
    return A - B @ m.network.Y @ C


def closed_loop_poles(m: SystemModel) -> list[complex]:
    """Eigenvalues of the closed-loop state matrix, conjugate-symmetrized."""
    a_cl = assemble_closed_loop(m)
    eigs = np.linalg.eigvals(a_cl)
    # A real matrix yields exactly paired eigenvalues; collapse rounding noise
    # in the imaginary parts of essentially-real ones.
    scale = max(1.0, float(np.max(np.abs(eigs))) if eigs.size else 1.0)
    cleaned = [complex(e.real, 0.0) if abs(e.imag) < 1e-9 * scale else complex(e) for e in eigs]
    return sorted(cleaned, key=lambda z: (z.real, z.imag))


def _certify_part(
    m: SystemModel, part: HalfPlaneRegion, part_index: int, *, theorem: str,
    grid_code: GridCode | None = None,
) -> PartCertificate:
    phi = m.part_phi(part)
    rho = m.part_rho(part, part_index)
    notes: list[str] = []

    device_reports = []
    for k, g in enumerate(m.subsystems):
        g_hat = map_subsystem(g, part, float(phi[k]))
        g_tilde = feedback(g_hat, complex(rho[k])) if rho[k] != 0 else g_hat
        device_reports.append(check_positive_siso(g_tilde))

    if theorem == "thm2":
        assert grid_code is not None
        y_s = m.y_s_for_part(part_index)
        network_ok = grid_code.ll_assumption_ok and (
            min(y_s) >= grid_code.bound - 1e-9 if y_s else True
        )
        lam = grid_code.lambda_min_xi
        if not grid_code.ll_assumption_ok:
            notes.append("network damping assumption violated: relax the target region or shed loads")
        elif y_s and min(y_s) < grid_code.bound - 1e-9:
            notes.append(f"source index {min(y_s):.6g} below the network floor {grid_code.bound:.6g}")
    else:
        y_tilde = rotate_network(m.network, phi) - np.diag(rho)
        network_ok, lam = check_rotated_psd(y_tilde)
        if not network_ok:
            notes.append(f"modified network has lambda_min = {lam:.6g} < 0")

    devices_ok = all(r.is_positive for r in device_reports)
    return PartCertificate(
        region=part,
        network_ok=bool(network_ok),
        network_lambda_min=float(lam) if lam == lam else math.nan,
        device_reports=tuple(device_reports),
        certified=bool(network_ok and devices_ok),
        notes=tuple(notes),
    )


def certify_thm1(m: SystemModel) -> CertificationReport:
    """Decentralized certificate: rotated-network semidefiniteness plus local
    positivity of every mapped, rotated, loop-transformed subsystem, verified
    part by part for composite regions."""
    certs = [
        _certify_part(m, part, idx, theorem="thm1")
        for idx, part in enumerate(parts(m.region))
    ]
    return CertificationReport("thm1", tuple(certs), all(c.certified for c in certs))


def certify_thm2(
    m: SystemModel,
    grid_codes: GridCode | list[GridCode],
    y_s: list[list[float]] | list[float] | None = None,
) -> CertificationReport:
    """Grid-code certificate: every source index above the broadcast floor
    plus positivity of the modified sources and loads."""
    region_parts = parts(m.region)
    codes = grid_codes if isinstance(grid_codes, list) else [grid_codes]
    if len(codes) != len(region_parts):
        raise ValueError(f"expected {len(region_parts)} grid codes, got {len(codes)}")
    model = m
    if y_s is not None:
        rows = y_s if y_s and isinstance(y_s[0], (list, tuple)) else [y_s] * len(region_parts)
        model = SystemModel(
            m.subsystems, m.network, m.region, m.phi, m.rho, m.load_cy,
            tuple(tuple(float(v) for v in row) for row in rows), m.equilibrium_u,
        )
    certs = [
        _certify_part(model, part, idx, theorem="thm2", grid_code=codes[idx])
        for idx, part in enumerate(region_parts)
    ]
    return CertificationReport("thm2", tuple(certs), all(c.certified for c in certs))


def verify_region(m: SystemModel) -> tuple[bool, float, list[complex]]:
    """Brute-force oracle: all closed-loop poles inside the region within
    margin -1e-6.  Returns (ok, worst margin, poles)."""
    poles = closed_loop_poles(m)
    if not poles:
        return True, math.inf, poles
    worst = min(m.region.margin(p) for p in poles)
    return worst >= -1e-6, worst, poles


def pole_margins(m: SystemModel) -> list[tuple[complex, float]]:
    """Poles with their region margins, for reports and CSV output."""
    return [(p, m.region.margin(p)) for p in closed_loop_poles(m)]

"""DC-microgrid device catalog.

Source converters (boost/buck storage interfaces and PV units under voltage
PI control) reduce to a generic strictly proper second-order transfer
function (c1*s + c0) / (s^2 + d1*s + d0); constant-power loads reduce to
1 / (C_l*s - y_l) with the incremental negative conductance y_l = P/u*^2.

This module maps physical parameters onto those coefficient forms, builds
the region-rotated and loop-transformed devices, computes the closed-form
synthesis bounds for the three region families, solves the DC power flow for
the operating point, and checks per-device compliance against a grid code.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np

from .cpoly import CRational, feedback, rotate, substitute_affine
from .errors import ConvergenceError, DstabError, NetworkError
from .positivity import PositivityReport, check_positive_siso
from .regions import HalfPlaneRegion, family

if TYPE_CHECKING:
    from .network import AdmittanceMatrix, GridCode, NodePartition


@dataclass(frozen=True)
class GenericSecondOrder:
    """Coefficients of the generic source form (c1*s + c0)/(s^2 + d1*s + d0)."""

    c1: float
    c0: float
    d1: float
    d0: float

    def __post_init__(self) -> None:
        if self.c1 <= 0:
            raise ValueError(f"c1 must be positive, got {self.c1}")
        if self.c0 < 0:
            raise ValueError(f"c0 must be nonnegative, got {self.c0}")

    @property
    def tf(self) -> CRational:
        return CRational.from_coeffs([self.c0, self.c1], [self.d0, self.d1, 1.0])


@dataclass(frozen=True)
class EssBoostParams:
    """Boost-interfaced storage unit (battery voltage below the bus).

    Gains may be zero (a switched-off integral loop is a legitimate corner);
    the droop coefficient must be positive because it divides the d1 mapping.
    """

    C: float
    E: float
    U_r: float
    R_d: float
    kP_u: float
    kI_u: float

    def __post_init__(self) -> None:
        _require_positive(C=self.C, E=self.E, U_r=self.U_r, R_d=self.R_d)
        _require_nonnegative(kP_u=self.kP_u, kI_u=self.kI_u)
        if self.E >= self.U_r:
            raise ValueError(f"boost interface requires E < U_r, got E={self.E}, U_r={self.U_r}")


@dataclass(frozen=True)
class EssBuckParams:
    """Buck-interfaced storage unit (battery voltage above the bus)."""

    C: float
    E: float
    U_r: float
    R_d: float
    kP_u: float
    kI_u: float

    def __post_init__(self) -> None:
        _require_positive(C=self.C, E=self.E, U_r=self.U_r)
        _require_nonnegative(R_d=self.R_d, kP_u=self.kP_u, kI_u=self.kI_u)


@dataclass(frozen=True)
class PvParams:
    """PV unit; equilibrium quantities (panel current and incremental
    conductance at the operating point) are supplied by the scenario."""

    C: float
    kP_u: float
    kI_u: float
    U_r_pv: float
    i_pv_star: float
    g_pv_star: float = -0.5

    def __post_init__(self) -> None:
        _require_positive(C=self.C, U_r_pv=self.U_r_pv)
        _require_nonnegative(kP_u=self.kP_u, kI_u=self.kI_u, i_pv_star=self.i_pv_star)


@dataclass(frozen=True)
class CplParams:
    """Constant-power load behind a node capacitance (P = 0 degenerates to a
    pure capacitor)."""

    C_l: float
    P: float

    def __post_init__(self) -> None:
        _require_positive(C_l=self.C_l)
        _require_nonnegative(P=self.P)


DeviceParams = Union[EssBoostParams, EssBuckParams, PvParams, CplParams]
SourceParams = Union[EssBoostParams, EssBuckParams, PvParams]


def _require_positive(**fields: float) -> None:
    for name, value in fields.items():
        if value <= 0:
            raise ValueError(f"{name} must be positive, got {value}")


def _require_nonnegative(**fields: float) -> None:
    for name, value in fields.items():
        if value < 0:
            raise ValueError(f"{name} must be nonnegative, got {value}")


@dataclass(frozen=True)
class Equilibrium:
    """Per-node operating point (voltages and injected currents)."""

    u_star: tuple[float, ...]
    i_star: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.u_star) != len(self.i_star):
            raise ValueError("u_star and i_star must have the same length")
        object.__setattr__(self, "u_star", tuple(float(u) for u in self.u_star))
        object.__setattr__(self, "i_star", tuple(float(i) for i in self.i_star))


def coeffs_ess_boost(p: EssBoostParams, u_star: float) -> GenericSecondOrder:
    if u_star <= 0:
        raise ValueError(f"equilibrium voltage must be positive, got {u_star}")
    cu = p.C * u_star
    return GenericSecondOrder(
        c1=(p.E * p.kP_u * p.R_d + u_star) / cu,
        c0=p.E * p.R_d * p.kI_u / cu,
        d1=(p.U_r - u_star + p.E * p.R_d * p.kP_u) / (cu * p.R_d),
        d0=p.E * p.kI_u / cu,
    )


def coeffs_ess_buck(p: EssBuckParams) -> GenericSecondOrder:
    return GenericSecondOrder(
        c1=(p.R_d * p.kP_u + 1.0) / p.C,
        c0=p.R_d * p.kI_u / p.C,
        d1=p.kP_u / p.C,
        d0=p.kI_u / p.C,
    )


def coeffs_pv(p: PvParams, u_star: float) -> GenericSecondOrder:
    if u_star <= 0:
        raise ValueError(f"equilibrium voltage must be positive, got {u_star}")
    c_eq = p.C * (p.kP_u * u_star + 1.0)
    ratio = p.U_r_pv / u_star
    a = p.C * p.kI_u * u_star + p.i_pv_star * p.kP_u * ratio - ratio * ratio * p.g_pv_star
    return GenericSecondOrder(
        c1=(p.kP_u * u_star + 1.0) / c_eq,
        c0=p.kI_u * u_star / c_eq,
        d1=a / c_eq,
        d0=p.i_pv_star * p.kI_u * p.U_r_pv / (u_star * c_eq),
    )


def source_coeffs(device: SourceParams, u_star: float) -> GenericSecondOrder:
    if isinstance(device, EssBoostParams):
        return coeffs_ess_boost(device, u_star)
    if isinstance(device, EssBuckParams):
        return coeffs_ess_buck(device)
    if isinstance(device, PvParams):
        return coeffs_pv(device, u_star)
    raise TypeError(f"not a source device: {device!r}")


def cpl_conductance(p: CplParams, u_star: float) -> float:
    """Incremental (negative-sign-dropped) conductance y_l = P / u*^2."""
    if u_star <= 0:
        raise ValueError(f"equilibrium voltage must be positive, got {u_star}")
    return p.P / (u_star * u_star)


def cpl_tf(p: CplParams, u_star: float) -> CRational:
    """Small-signal load model 1 / (C_l s - y_l); unstable on its own."""
    y_l = cpl_conductance(p, u_star)
    return CRational.from_coeffs([1.0], [-y_l, p.C_l])


def virtual_admittance_from_conductance(c_l: float, y_l: float, region: HalfPlaneRegion) -> float:
    """Load-side parallel admittance that projects the rotated load pole onto
    the imaginary axis: y_v = -C_l sigma0 + y_l cos(theta0) - C_l omega0 sin(theta0)."""
    return (
        -c_l * region.sigma0
        + y_l * math.cos(region.theta0)
        - c_l * region.omega0 * math.sin(region.theta0)
    )


def virtual_admittance(p: CplParams, u_star: float, region: HalfPlaneRegion) -> float:
    return virtual_admittance_from_conductance(p.C_l, cpl_conductance(p, u_star), region)


def modified_cpl(p: CplParams, u_star: float, region: HalfPlaneRegion) -> CRational:
    """Loop-transformed load 1 / (C_l (nu - j Im{nu_p})): a positive function
    with a simple imaginary-axis pole of residue 1/C_l."""
    y_l = cpl_conductance(p, u_star)
    nu_p = (
        -region.sigma0
        + (y_l / p.C_l) * cmath.exp(-1j * region.theta0)
        - region.omega0 * cmath.exp(1j * (math.pi / 2 - region.theta0))
    )
    result = CRational.from_coeffs([1.0], [-1j * p.C_l * nu_p.imag, p.C_l])
    report = check_positive_siso(result)
    if not report.is_positive:
        raise DstabError(
            f"modified load lost positivity ({report.failed_condition.value}); "
            "this indicates a formula or tolerance bug"
        )
    return result


def map_subsystem(tf: CRational, region: HalfPlaneRegion, phi: float) -> CRational:
    """Map an s-domain subsystem into the nu-domain and rotate by e^{j phi}."""
    a = cmath.exp(1j * region.theta0)
    b = cmath.exp(1j * region.theta0) * region.sigma0 + 1j * region.omega0
    return rotate(substitute_affine(tf, a, b), phi)


def rotated_source(g: GenericSecondOrder, region: HalfPlaneRegion) -> CRational:
    """Region-mapped source with the canonical compensation angle theta0."""
    return map_subsystem(g.tf, region, region.theta0)


def modified_source(g_hat: CRational, y_s: float) -> CRational:
    """Source with positivity index y_s absorbed: [1 - y_s g_hat]^{-1} g_hat."""
    return feedback(g_hat, -float(y_s))


def bound_lhp(g: GenericSecondOrder, alpha: float) -> tuple[bool, float]:
    """Admissibility and the upper limit on y_s for the shifted LHP family.

    Infeasible regions (alpha < -c0/c1) return (False, nan).  The second
    bound is strict; callers picking the maximum index should back off it.
    """
    if alpha > 0:
        raise ValueError(f"shifted LHP requires alpha <= 0, got {alpha}")
    ratio = g.c0 / g.c1
    if alpha < -ratio:
        return False, math.nan
    bound1 = (g.d1 + alpha - ratio) / g.c1
    a0 = g.c1 * alpha + g.c0
    num2 = alpha * alpha + g.d1 * alpha + g.d0
    if a0 > 1e-300:
        bound2 = num2 / a0
    else:
        bound2 = math.inf if num2 > 0 else -math.inf
    return True, min(bound1, bound2)


def bound_sector(g: GenericSecondOrder, beta: float) -> float:
    """Upper limit (strict) on y_s for the sector family."""
    if not (0.0 < beta < math.pi / 2):
        raise ValueError(f"sector requires 0 < beta < pi/2, got {beta}")
    sb = math.sin(beta)
    cb = math.cos(beta)
    b1 = g.d0 * sb / g.c0 if g.c0 > 0 else math.inf
    b2 = (g.c1 * g.d1 - g.c0) / (g.c1 * g.c1 * sb)
    if g.c0 > 0:
        b2 -= g.d0 * cb * cb / (g.c0 * sb)
    return min(b1, b2)


def bound_hs(g: GenericSecondOrder) -> float:
    """Minimum admissible strip half-width (compliance needs gamma > this,
    with y_s = 0)."""
    ratio = g.c0 / g.c1
    radicand = ratio * ratio - ratio * g.d1 + g.d0
    return math.sqrt(radicand) if radicand > 0 else 0.0


def rescale_droop(
    p: EssBoostParams | EssBuckParams, factor: float, u_star: float, i_star: float
) -> EssBoostParams | EssBuckParams:
    """Scale the droop coefficient while keeping the operating point fixed:
    the voltage reference moves to u* + R_d_new * i*."""
    r_new = p.R_d * factor
    kwargs = dict(C=p.C, E=p.E, U_r=u_star + r_new * i_star, R_d=r_new, kP_u=p.kP_u, kI_u=p.kI_u)
    return type(p)(**kwargs)


def _classify(devices: Sequence[DeviceParams], partition: NodePartition) -> None:
    for k in partition.source_ids:
        if isinstance(devices[k], CplParams):
            raise NetworkError(f"node {k} is a source node but carries a load device")
    for k in partition.load_ids:
        if not isinstance(devices[k], CplParams):
            raise NetworkError(f"node {k} is a load node but carries a source device")


def power_flow_residual(
    Y: AdmittanceMatrix, devices: Sequence[DeviceParams], u: np.ndarray
) -> np.ndarray:
    """Residual of the DC power-flow equations at voltage vector ``u``.

    Droop sources contribute u_k + R_d i_k - U_r (volts); PV units inject
    their panel power U_r_pv * i_pv_star and loads draw P, both contributing
    current-balance residuals i_k -+ P/u_k (amps).
    """
    i = Y.Y @ u
    r = np.empty_like(u)
    for k, dev in enumerate(devices):
        if isinstance(dev, (EssBoostParams, EssBuckParams)):
            r[k] = u[k] + dev.R_d * i[k] - dev.U_r
        elif isinstance(dev, PvParams):
            r[k] = i[k] - dev.U_r_pv * dev.i_pv_star / u[k]
        else:
            r[k] = i[k] + dev.P / u[k]
    return r


def equilibrium_solve(
    Y: AdmittanceMatrix,
    devices: Sequence[DeviceParams],
    nominal_voltage: float,
    *,
    tol: float = 1e-9,
    max_iter: int = 100,
) -> Equilibrium:
    """Newton iteration on the DC power-flow residual from a flat start.

    Rejects low-voltage solutions (any node below half nominal) and raises
    :class:`ConvergenceError` if the infinity norm of the residual does not
    drop below ``tol`` within ``max_iter`` iterations.
    """
    n = Y.n_nodes
    if len(devices) != n:
        raise NetworkError(f"expected {n} devices, got {len(devices)}")
    _classify(devices, Y.partition)
    if not any(isinstance(d, (EssBoostParams, EssBuckParams)) for d in devices):
        raise NetworkError("power flow needs at least one droop-controlled source")

    u = np.full(n, float(nominal_voltage))
    for _ in range(max_iter):
        r = power_flow_residual(Y, devices, u)
        if float(np.max(np.abs(r))) < tol:
            break
        J = np.array(Y.Y)
        for k, dev in enumerate(devices):
            if isinstance(dev, (EssBoostParams, EssBuckParams)):
                J[k, :] = dev.R_d * Y.Y[k, :]
                J[k, k] += 1.0
            elif isinstance(dev, PvParams):
                J[k, k] += dev.U_r_pv * dev.i_pv_star / (u[k] * u[k])
            else:
                J[k, k] -= dev.P / (u[k] * u[k])
        try:
            du = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular power-flow Jacobian: {exc}") from exc
        u = u + du
        if not np.all(np.isfinite(u)):
            raise ConvergenceError("power-flow iteration diverged")
    else:
        raise ConvergenceError(f"power flow did not converge in {max_iter} iterations")

    if np.any(u < 0.5 * nominal_voltage):
        raise ConvergenceError("power flow converged to a low-voltage solution; rejected")
    return Equilibrium(tuple(u), tuple(Y.Y @ u))


@dataclass(frozen=True)
class ComplianceReport:
    """Outcome of checking one source device against a grid code."""

    compliant: bool
    region_kind: str
    y_s: float | None
    y_s_floor: float
    y_s_cap: float | None
    gamma_bar: float | None
    binding: str
    positivity: PositivityReport | None

    def as_dict(self) -> dict:
        return {
            "compliant": self.compliant,
            "region_kind": self.region_kind,
            "y_s": self.y_s,
            "y_s_floor": self.y_s_floor,
            "y_s_cap": self.y_s_cap,
            "gamma_bar": self.gamma_bar,
            "binding": self.binding,
            "positivity": self.positivity.as_dict() if self.positivity else None,
        }


def check_compliance(
    device: GenericSecondOrder | SourceParams,
    grid_code: GridCode,
    u_star: float | None = None,
) -> ComplianceReport:
    """Decide whether the source admits an index y_s between the network
    floor -lambda_min(Xi) and its region-specific upper bound, and pick the
    maximum admissible one (positivity is monotone: anything below a working
    index also works).
    """
    if not grid_code.ll_assumption_ok:
        raise DstabError("grid code is invalid: network damping assumption violated")
    if isinstance(device, GenericSecondOrder):
        g = device
    else:
        if u_star is None and not isinstance(device, EssBuckParams):
            raise ValueError("u_star is required to derive coefficients for this device")
        g = source_coeffs(device, u_star if u_star is not None else 1.0)

    region = grid_code.region
    kind = family(region)
    floor = grid_code.bound

    if kind == "hstrip":
        gb = bound_hs(g)
        ok = region.omega0 > gb and floor <= 1e-9
        return ComplianceReport(
            compliant=ok,
            region_kind=kind,
            y_s=0.0 if ok else None,
            y_s_floor=floor,
            y_s_cap=None,
            gamma_bar=gb,
            binding="none" if ok else "frequency_bound",
            positivity=check_positive_siso(rotated_source(g, region)) if ok else None,
        )

    if kind == "lhp":
        feasible, cap = bound_lhp(g, region.sigma0)
        if not feasible:
            return ComplianceReport(False, kind, None, floor, None, None, "region_feasibility", None)
        closed_cap = (g.d1 + region.sigma0 - g.c0 / g.c1) / g.c1
        # The first bound is attainable; the stability bound is strict.
        strict_cap = cap < closed_cap
    elif kind == "sector":
        cap = bound_sector(g, math.pi / 2 - region.theta0)
        strict_cap = True
    else:
        raise ValueError(f"no closed-form synthesis bound for region family {kind!r}")

    if not math.isfinite(cap) and cap < 0:
        return ComplianceReport(False, kind, None, floor, cap, None, "device", None)
    pick = cap - 1e-9 * max(1.0, abs(cap)) if strict_cap else cap
    if pick < floor - 1e-9:
        return ComplianceReport(False, kind, None, floor, cap, None, "network", None)

    report = check_positive_siso(modified_source(rotated_source(g, region), pick))
    if not report.is_positive:
        backed = pick - max(1e-9, 1e-6 * abs(pick))
        if backed >= floor - 1e-9:
            retry = check_positive_siso(modified_source(rotated_source(g, region), backed))
            if retry.is_positive:
                return ComplianceReport(True, kind, backed, floor, cap, None, "none", retry)
        return ComplianceReport(False, kind, None, floor, cap, None, "device", report)
    return ComplianceReport(True, kind, pick, floor, cap, None, "none", report)

"""Resistive-network admittance matrices and the broadcastable grid code.

The network is a weighted Laplacian built from line resistances.  The grid
code computation rotates the network by the region angle, absorbs the load
virtual admittances, and reduces the resulting semidefiniteness condition to
the minimum eigenvalue of a Schur complement on the source block; the
broadcast value lower-bounds every source's positivity index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LLAssumptionError, NetworkError
from .regions import HalfPlaneRegion


@dataclass(frozen=True)
class NodePartition:
    """Ordered split of node indices into source and load nodes."""

    source_ids: tuple[int, ...]
    load_ids: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "source_ids", tuple(int(i) for i in self.source_ids))
        object.__setattr__(self, "load_ids", tuple(int(i) for i in self.load_ids))
        overlap = set(self.source_ids) & set(self.load_ids)
        if overlap:
            raise NetworkError(f"nodes {sorted(overlap)} appear as both source and load")
        if len(set(self.source_ids)) != len(self.source_ids) or len(set(self.load_ids)) != len(self.load_ids):
            raise NetworkError("duplicate node index in partition")

    @property
    def n_nodes(self) -> int:
        return len(self.source_ids) + len(self.load_ids)

    def covers(self, n: int) -> bool:
        return set(self.source_ids) | set(self.load_ids) == set(range(n))


@dataclass(frozen=True)
class AdmittanceMatrix:
    """Dense symmetric admittance matrix with a source/load partition.

    Invariants: symmetric, zero row sums (pure resistive Laplacian, no
    shunts), nonpositive off-diagonal entries.
    """

    Y: np.ndarray
    partition: NodePartition

    def __post_init__(self) -> None:
        Y = np.array(self.Y, dtype=float)
        n = Y.shape[0]
        if Y.shape != (n, n):
            raise NetworkError("admittance matrix must be square")
        scale = max(float(np.max(np.abs(Y))), 1e-300)
        if float(np.max(np.abs(Y - Y.T))) > 1e-12 * scale:
            raise NetworkError("admittance matrix must be symmetric")
        if float(np.max(np.abs(Y.sum(axis=1)))) > 1e-9 * scale:
            raise NetworkError("admittance matrix must have zero row sums")
        off = Y - np.diag(np.diag(Y))
        if float(np.max(off)) > 1e-12 * scale:
            raise NetworkError("off-diagonal admittance entries must be <= 0")
        if not self.partition.covers(n):
            raise NetworkError("partition must cover every node exactly once")
        Y.flags.writeable = False
        object.__setattr__(self, "Y", Y)

    @property
    def n_nodes(self) -> int:
        return self.Y.shape[0]

    def _block(self, rows: tuple[int, ...], cols: tuple[int, ...]) -> np.ndarray:
        return self.Y[np.ix_(rows, cols)]

    @property
    def Yss(self) -> np.ndarray:
        return self._block(self.partition.source_ids, self.partition.source_ids)

    @property
    def Ysl(self) -> np.ndarray:
        return self._block(self.partition.source_ids, self.partition.load_ids)

    @property
    def Yls(self) -> np.ndarray:
        return self._block(self.partition.load_ids, self.partition.source_ids)

    @property
    def Yll(self) -> np.ndarray:
        return self._block(self.partition.load_ids, self.partition.load_ids)


@dataclass(frozen=True)
class GridCode:
    """Broadcastable compliance data for one target region.

    ``-lambda_min_xi`` is the uniform lower bound on every source's
    positivity index; the object is only meaningful when
    ``ll_assumption_ok`` is true.
    """

    region: HalfPlaneRegion
    lambda_min_xi: float
    y_virtual: tuple[float, ...]
    ll_assumption_ok: bool

    @property
    def bound(self) -> float:
        """Lower bound on the source positivity indices."""
        return -self.lambda_min_xi

    def as_dict(self) -> dict:
        from .regions import region_to_spec

        return {
            "region": region_to_spec(self.region),
            "ll_assumption_ok": self.ll_assumption_ok,
            "lambda_min_xi": self.lambda_min_xi if self.ll_assumption_ok else None,
            "y_s_lower_bound": self.bound if self.ll_assumption_ok else None,
            "y_virtual": list(self.y_virtual),
        }


def build_admittance(
    edges: list[tuple[int, int, float]], n_nodes: int, partition: NodePartition
) -> AdmittanceMatrix:
    """Weighted Laplacian from a line list (i, j, resistance in ohms)."""
    if n_nodes < 1:
        raise NetworkError("network needs at least one node")
    Y = np.zeros((n_nodes, n_nodes))
    adj: list[set[int]] = [set() for _ in range(n_nodes)]
    for i, j, r in edges:
        i, j = int(i), int(j)
        if not (0 <= i < n_nodes and 0 <= j < n_nodes) or i == j:
            raise NetworkError(f"bad edge ({i}, {j}) for {n_nodes} nodes")
        if r <= 0:
            raise NetworkError(f"line resistance must be positive, got {r} on ({i}, {j})")
        g = 1.0 / float(r)
        Y[i, j] -= g
        Y[j, i] -= g
        Y[i, i] += g
        Y[j, j] += g
        adj[i].add(j)
        adj[j].add(i)
    # connectivity via breadth-first search
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    if len(seen) != n_nodes:
        raise NetworkError(f"network graph is disconnected ({len(seen)} of {n_nodes} nodes reachable)")
    return AdmittanceMatrix(Y, partition)


def rotate_network(Y: AdmittanceMatrix | np.ndarray, phi: float | np.ndarray) -> np.ndarray:
    """Rotated network matrix diag(e^{-j phi_k}) Y."""
    mat = Y.Y if isinstance(Y, AdmittanceMatrix) else np.asarray(Y)
    n = mat.shape[0]
    phi_arr = np.broadcast_to(np.asarray(phi, dtype=float), (n,))
    return np.exp(-1j * phi_arr)[:, None] * mat.astype(complex)


def check_rotated_psd(Y_hat: np.ndarray) -> tuple[bool, float]:
    """Whether Y_hat + Y_hat^H is positive semidefinite; returns lambda_min."""
    Y_hat = np.asarray(Y_hat, dtype=complex)
    if Y_hat.shape[0] != Y_hat.shape[1]:
        raise NetworkError("rotated network matrix must be square")
    s = Y_hat + Y_hat.conj().T
    eigs = np.linalg.eigvalsh(s)
    lam_min = float(eigs[0])
    scale = max(1.0, float(np.max(np.abs(eigs))))
    return lam_min >= -1e-9 * scale, lam_min


def schur_xi(Y: AdmittanceMatrix, theta0: float, y_virtual: list[float] | np.ndarray) -> np.ndarray:
    """Schur complement of the rotated, loop-transformed network condition.

    Requires Y^ll cos(theta0) - diag(y_virtual) to be positive definite
    (raises :class:`LLAssumptionError` otherwise -- the network's damping
    capacity is exhausted and no source-side index can restore it).
    """
    y_v = np.asarray(y_virtual, dtype=float)
    n_l = len(Y.partition.load_ids)
    if y_v.shape != (n_l,):
        raise NetworkError(f"expected {n_l} virtual admittances, got shape {y_v.shape}")
    c = math.cos(theta0)
    m_ll = Y.Yll * c - np.diag(y_v)
    lam = np.linalg.eigvalsh((m_ll + m_ll.T) / 2.0)
    scale = max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)
    if lam.size and float(lam[0]) <= 1e-12 * scale:
        raise LLAssumptionError(
            f"Y^ll cos(theta0) - diag(y_v) is not positive definite (lambda_min = {float(lam[0]):.6e})"
        )
    xi = Y.Yss * c - (c * c) * (Y.Ysl @ np.linalg.solve(m_ll, Y.Yls))
    return (xi + xi.T) / 2.0


def grid_code(
    Y: AdmittanceMatrix,
    region: HalfPlaneRegion,
    loads: list[tuple[float, float]],
) -> GridCode:
    """Grid code for one region: per-load virtual admittances and the uniform
    source bound -lambda_min(Xi).

    ``loads`` holds one (capacitance, load conductance) pair per load node in
    partition order.  A violated damping assumption is reported through
    ``ll_assumption_ok = False`` rather than raised: the operator must relax
    the target region or shed constant-power loads.
    """
    from .devices import virtual_admittance_from_conductance

    if not Y.partition.source_ids or not Y.partition.load_ids:
        raise NetworkError("grid code needs nonempty source and load sets")
    if len(loads) != len(Y.partition.load_ids):
        raise NetworkError(f"expected {len(Y.partition.load_ids)} load parameter pairs, got {len(loads)}")
    y_v = tuple(virtual_admittance_from_conductance(c_l, y_l, region) for c_l, y_l in loads)
    try:
        xi = schur_xi(Y, region.theta0, list(y_v))
    except LLAssumptionError:
        return GridCode(region, math.nan, y_v, False)
    lam_min = float(np.linalg.eigvalsh(xi)[0])
    return GridCode(region, lam_min, y_v, True)

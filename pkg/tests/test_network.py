"""Admittance construction, rotation, and the Schur-complement grid code."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import random_laplacian, random_partition
from dstab.errors import LLAssumptionError, NetworkError
from dstab.network import (
    AdmittanceMatrix,
    NodePartition,
    build_admittance,
    check_rotated_psd,
    grid_code,
    rotate_network,
    schur_xi,
)
from dstab.regions import horizontal_strip, sector, shifted_lhp


@pytest.fixture
def star3() -> AdmittanceMatrix:
    return build_admittance([(0, 2, 0.1), (1, 2, 0.1)], 3, NodePartition((0, 1), (2,)))


class TestBuild:
    def test_two_node_line(self):
        Y = build_admittance([(0, 1, 0.1)], 2, NodePartition((0,), (1,)))
        assert np.allclose(Y.Y, [[10.0, -10.0], [-10.0, 10.0]])

    def test_three_node_star(self, star3):
        assert np.allclose(np.diag(star3.Y), [10.0, 10.0, 20.0])
        assert star3.Y[0, 2] == pytest.approx(-10.0)
        assert star3.Y[0, 1] == pytest.approx(0.0)

    def test_parallel_edges_add_conductance(self):
        Y = build_admittance([(0, 1, 0.2), (0, 1, 0.2)], 2, NodePartition((0,), (1,)))
        assert Y.Y[0, 0] == pytest.approx(10.0)

    def test_nonpositive_resistance_rejected(self):
        with pytest.raises(NetworkError):
            build_admittance([(0, 1, 0.0)], 2, NodePartition((0,), (1,)))

    def test_disconnected_rejected(self):
        with pytest.raises(NetworkError):
            build_admittance([(0, 1, 0.1)], 3, NodePartition((0, 1), (2,)))

    def test_partition_must_cover(self):
        with pytest.raises(NetworkError):
            build_admittance([(0, 1, 0.1), (1, 2, 0.1)], 3, NodePartition((0,), (2,)))

    def test_laplacian_zero_mode(self, rng):
        for _ in range(10):
            n = int(rng.integers(3, 8))
            Y = random_laplacian(rng, n)
            assert np.allclose(Y @ np.ones(n), 0.0, atol=1e-9)
            eigs = np.linalg.eigvalsh(Y)
            assert eigs[0] == pytest.approx(0.0, abs=1e-9)

    def test_load_block_positive_definite(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 9))
            part = random_partition(rng, n)
            Y = AdmittanceMatrix(random_laplacian(rng, n), part)
            if not part.load_ids:
                continue
            assert np.linalg.eigvalsh(Y.Yll)[0] > 0


class TestRotation:
    def test_zero_angle_identity(self, star3):
        assert np.allclose(rotate_network(star3, 0.0), star3.Y)

    def test_uniform_angle_hermitian_part(self, star3):
        theta = 0.4
        y_hat = rotate_network(star3, theta)
        assert np.allclose(y_hat + y_hat.conj().T, 2.0 * math.cos(theta) * star3.Y)

    def test_right_angle_kills_hermitian_part(self, star3):
        y_hat = rotate_network(star3, math.pi / 2)
        assert np.allclose(y_hat + y_hat.conj().T, 0.0, atol=1e-12)

    def test_laplacian_psd_at_zero(self, star3):
        ok, lam = check_rotated_psd(rotate_network(star3, 0.0))
        assert ok and lam == pytest.approx(0.0, abs=1e-9)

    def test_negative_rotation_fails(self):
        ok, lam = check_rotated_psd(np.array([[np.exp(-2j * math.pi / 3)]]))
        assert not ok and lam == pytest.approx(2 * math.cos(2 * math.pi / 3))

    def test_star_sector_angle_psd(self, star3):
        ok, _ = check_rotated_psd(rotate_network(star3, math.pi / 12))
        assert ok


class TestSchur:
    def test_star_no_virtual_admittance(self, star3):
        xi = schur_xi(star3, 0.0, [0.0])
        assert np.allclose(xi, [[5.0, -5.0], [-5.0, 5.0]])

    def test_star_with_virtual_admittance(self, star3):
        xi = schur_xi(star3, 0.0, [5.0])
        expected = np.array([[10.0, 0.0], [0.0, 10.0]]) - np.full((2, 2), 100.0 / 15.0)
        assert np.allclose(xi, expected)

    def test_damping_capacity_exhausted(self, star3):
        with pytest.raises(LLAssumptionError):
            schur_xi(star3, 0.0, [25.0])

    def test_symmetry(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 9))
            part = random_partition(rng, n)
            if not part.source_ids or not part.load_ids:
                continue
            Y = AdmittanceMatrix(random_laplacian(rng, n), part)
            y_v = rng.uniform(-0.1, 0.2, size=len(part.load_ids))
            try:
                xi = schur_xi(Y, float(rng.uniform(0, math.pi / 2 - 0.05)), y_v)
            except LLAssumptionError:
                continue
            assert float(np.max(np.abs(xi - xi.T))) < 1e-10 * max(1.0, float(np.max(np.abs(xi))))

    def test_block_psd_equivalence_sample(self, rng):
        # light version of the full acceptance sweep
        for _ in range(25):
            n = int(rng.integers(3, 8))
            part = random_partition(rng, n)
            if not part.source_ids or not part.load_ids:
                continue
            Y = AdmittanceMatrix(random_laplacian(rng, n), part)
            theta = float(rng.uniform(0, 1.4))
            y_v = rng.uniform(0.0, 0.3, size=len(part.load_ids))
            try:
                xi = schur_xi(Y, theta, y_v)
            except LLAssumptionError:
                continue
            floor = -float(np.linalg.eigvalsh(xi)[0])
            for y_s in (floor + 0.05, floor - 0.05):
                diag = np.zeros(n)
                for k in part.source_ids:
                    diag[k] = y_s
                for pos, k in enumerate(part.load_ids):
                    diag[k] = -y_v[pos]
                lam = float(np.linalg.eigvalsh(math.cos(theta) * Y.Y + np.diag(diag))[0])
                assert (lam >= -1e-9) == (y_s >= floor - 1e-9)


class TestGridCode:
    def test_star_bound(self, star3):
        gc = grid_code(star3, shifted_lhp(0.0), [(2e-3, 5.0)])
        assert gc.ll_assumption_ok
        assert gc.bound == pytest.approx(10.0 / 3.0)

    def test_strip_is_trivial(self, star3):
        gc = grid_code(star3, horizontal_strip(10.0), [(2e-3, 5.0)])
        assert gc.ll_assumption_ok
        assert gc.bound == pytest.approx(0.0, abs=1e-12)

    def test_zero_virtual_admittance_bound_nonpositive(self, rng):
        # Schur complement of a PSD Laplacian stays PSD
        for _ in range(10):
            n = int(rng.integers(3, 8))
            part = random_partition(rng, n)
            if not part.source_ids or not part.load_ids:
                continue
            Y = AdmittanceMatrix(random_laplacian(rng, n), part)
            gc = grid_code(Y, shifted_lhp(0.0), [(1e-3, 0.0)] * len(part.load_ids))
            assert gc.bound <= 1e-9

    def test_overload_reports_violation(self, star3):
        gc = grid_code(star3, shifted_lhp(0.0), [(2e-3, 25.0)])
        assert not gc.ll_assumption_ok

    def test_needs_both_sides(self):
        Y = build_admittance([(0, 1, 0.1)], 2, NodePartition((0, 1), ()))
        with pytest.raises(NetworkError):
            grid_code(Y, shifted_lhp(0.0), [])

    def test_sector_uses_cos_theta(self, star3):
        beta = 5 * math.pi / 12
        gc = grid_code(star3, sector(beta), [(2e-3, 5.0)])
        xi = schur_xi(star3, math.pi / 2 - beta, list(gc.y_virtual))
        assert gc.lambda_min_xi == pytest.approx(float(np.linalg.eigvalsh(xi)[0]))

"""Tests for the dense complex linear-algebra kernel."""

import numpy as np
import pytest

from secmimo.errors import (
    DegenerateChannelError,
    InvalidInputError,
    NoNullspaceError,
    NotPositiveDefiniteError,
    ShapeError,
)
from secmimo.linalg import (
    as_matrix,
    gaussian_mi,
    hermitian_part,
    left_nullspace_basis,
    logdet_pd,
    nullspace_basis,
    qr_tall,
    random_gaussian_matrix,
    random_truncated_unitary,
    svd,
)


def _reconstruct_svd(dec):
    sigma = np.zeros((dec.U.shape[0], dec.V.shape[0]))
    np.fill_diagonal(sigma, dec.singular_values)
    return dec.U @ sigma @ dec.V.conj().T


class TestSvd:
    def test_identity(self):
        dec = svd(np.eye(3))
        np.testing.assert_allclose(dec.singular_values, [1.0, 1.0, 1.0], atol=1e-12)

    def test_diagonal(self):
        dec = svd(np.diag([3.0, 0.0]))
        np.testing.assert_allclose(dec.singular_values, [3.0, 0.0], atol=1e-12)
        # U and V are permutation/identity up to phase
        assert np.allclose(np.abs(dec.U), np.eye(2), atol=1e-12)
        assert np.allclose(np.abs(dec.V), np.eye(2), atol=1e-12)

    def test_reconstruction_random(self):
        rng = np.random.default_rng(1)
        a = random_gaussian_matrix(4, 6, rng)
        dec = svd(a)
        err = np.linalg.norm(_reconstruct_svd(dec) - a) / np.linalg.norm(a)
        assert err < 1e-9

    def test_sorted_nonincreasing_and_unitary(self):
        rng = np.random.default_rng(2)
        a = random_gaussian_matrix(5, 3, rng)
        dec = svd(a)
        assert np.all(np.diff(dec.singular_values) <= 0)
        assert np.linalg.norm(dec.U.conj().T @ dec.U - np.eye(5)) < 1e-10
        assert np.linalg.norm(dec.V.conj().T @ dec.V - np.eye(3)) < 1e-10

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        a = random_gaussian_matrix(4, 4, rng)
        d1, d2 = svd(a), svd(a)
        np.testing.assert_array_equal(d1.U, d2.U)
        np.testing.assert_array_equal(d1.singular_values, d2.singular_values)

    def test_nonfinite_rejected(self):
        bad = np.array([[1.0, np.inf], [0.0, 1.0]])
        with pytest.raises(InvalidInputError):
            svd(bad)


class TestQrTall:
    def test_already_orthonormal(self):
        a = np.vstack([np.eye(2), np.zeros((2, 2))])
        dec = qr_tall(a)
        np.testing.assert_allclose(dec.F, a, atol=1e-12)
        np.testing.assert_allclose(dec.C, np.eye(2), atol=1e-12)

    def test_scaling_case(self):
        a = np.array([[2.0], [0.0]])
        dec = qr_tall(a)
        np.testing.assert_allclose(dec.F, [[1.0], [0.0]], atol=1e-12)
        np.testing.assert_allclose(dec.C, [[2.0]], atol=1e-12)

    def test_residual_random(self):
        rng = np.random.default_rng(4)
        hd = random_gaussian_matrix(2, 4, rng)
        dec = qr_tall(hd.conj().T)
        err = np.linalg.norm(dec.F @ dec.C - hd.conj().T) / np.linalg.norm(hd)
        assert err < 1e-9
        assert np.linalg.norm(dec.F.conj().T @ dec.F - np.eye(2)) < 1e-10
        assert abs(np.linalg.det(dec.C)) > 0
        # upper triangular with positive real diagonal (fixed convention)
        assert np.allclose(np.tril(dec.C, -1), 0, atol=1e-12)
        assert np.all(np.real(np.diag(dec.C)) > 0)

    def test_rank_deficient_rejected(self):
        col = np.arange(1.0, 5.0).reshape(4, 1)
        with pytest.raises(DegenerateChannelError):
            qr_tall(np.hstack([col, 2 * col]))

    def test_wide_rejected(self):
        with pytest.raises(ShapeError):
            qr_tall(np.ones((2, 3)))


class TestNullspaces:
    def test_coordinate_case(self):
        a = np.hstack([np.eye(2), np.zeros((2, 2))])
        b = nullspace_basis(a)
        assert b.shape == (4, 2)
        assert np.linalg.norm(a @ b) < 1e-12
        # spans the last two coordinates up to unitary mixing
        proj = b @ b.conj().T
        expected = np.diag([0.0, 0.0, 1.0, 1.0])
        assert np.linalg.norm(proj - expected) < 1e-10

    def test_hand_vector(self):
        a = np.array([[1.0, 1.0]]) / np.sqrt(2)
        b = nullspace_basis(a)
        target = np.array([[1.0], [-1.0]]) / np.sqrt(2)
        # equality up to phase: projectors coincide
        assert np.linalg.norm(b @ b.conj().T - target @ target.conj().T) < 1e-10

    def test_random_invariants(self):
        rng = np.random.default_rng(5)
        a = random_gaussian_matrix(2, 4, rng)
        b = nullspace_basis(a)
        assert np.linalg.norm(b.conj().T @ b - np.eye(2)) < 1e-10
        assert np.linalg.norm(a @ b) < 1e-10

    def test_no_nullspace(self):
        with pytest.raises(NoNullspaceError):
            nullspace_basis(np.eye(3))

    def test_rank_deficient(self):
        row = np.ones((1, 4))
        with pytest.raises(DegenerateChannelError):
            nullspace_basis(np.vstack([row, row]))

    def test_left_hand_cases(self):
        u = left_nullspace_basis(np.array([[1.0], [0.0]]))
        assert np.linalg.norm(u @ u.conj().T - np.diag([0.0, 1.0])) < 1e-10
        u = left_nullspace_basis(np.vstack([np.eye(2), np.zeros((1, 2))]))
        assert np.linalg.norm(u @ u.conj().T - np.diag([0.0, 0.0, 1.0])) < 1e-10

    def test_left_random(self):
        rng = np.random.default_rng(6)
        a = random_gaussian_matrix(4, 1, rng)
        u = left_nullspace_basis(a)
        assert u.shape == (4, 3)
        assert np.linalg.norm(u.conj().T @ u - np.eye(3)) < 1e-10
        assert np.linalg.norm(u.conj().T @ a) < 1e-10

    def test_left_zero_columns_identity(self):
        u = left_nullspace_basis(np.zeros((3, 0)))
        np.testing.assert_array_equal(u, np.eye(3))


def test_decomposition_reconstruction_sweep():
    """Residual below 1e-9 relative on 1000 random instances."""
    rng = np.random.default_rng(7)
    for _ in range(1000):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, 7))
        a = random_gaussian_matrix(m, n, rng)
        dec = svd(a)
        assert np.linalg.norm(_reconstruct_svd(dec) - a) <= 1e-9 * max(1, np.linalg.norm(a))
        if m >= n:
            q = qr_tall(a)
            assert np.linalg.norm(q.F @ q.C - a) <= 1e-9 * max(1, np.linalg.norm(a))


def test_nullspace_annihilation_sweep():
    """Orthonormality and annihilation below 1e-10 on random full-rank inputs."""
    rng = np.random.default_rng(8)
    for _ in range(300):
        p = int(rng.integers(1, 4))
        q = p + int(rng.integers(1, 4))
        a = random_gaussian_matrix(p, q, rng)
        b = nullspace_basis(a)
        assert np.linalg.norm(b.conj().T @ b - np.eye(q - p)) < 1e-10
        assert np.linalg.norm(a @ b) < 1e-10
        u = left_nullspace_basis(a.conj().T)
        assert np.linalg.norm(u.conj().T @ a.conj().T) < 1e-10


class TestLogdet:
    def test_identity(self):
        assert logdet_pd(np.eye(3)) == pytest.approx(0.0, abs=1e-12)

    def test_diag(self):
        assert logdet_pd(np.diag([2.0, 2.0])) == pytest.approx(2.0, abs=1e-12)

    def test_eigenvalue_oracle(self):
        rng = np.random.default_rng(9)
        m = random_gaussian_matrix(3, 3, rng)
        a = hermitian_part(m @ m.conj().T) + np.eye(3)
        expected = float(np.sum(np.log2(np.linalg.eigvalsh(a))))
        assert logdet_pd(a) == pytest.approx(expected, abs=1e-9)

    def test_scaling_property(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            n = int(rng.integers(1, 5))
            m = random_gaussian_matrix(n, n, rng)
            a = hermitian_part(m @ m.conj().T) + np.eye(n)
            c = float(rng.uniform(0.1, 10.0))
            assert logdet_pd(c * a) == pytest.approx(
                n * np.log2(c) + logdet_pd(a), abs=1e-9
            )

    def test_not_pd_carries_eigenvalue(self):
        with pytest.raises(NotPositiveDefiniteError) as err:
            logdet_pd(np.diag([1.0, -2.0]))
        assert err.value.min_eigenvalue == pytest.approx(-2.0, abs=1e-9)

    def test_non_hermitian_rejected(self):
        with pytest.raises(InvalidInputError):
            logdet_pd(np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestRandomEnsembles:
    def test_gaussian_deterministic(self):
        a = random_gaussian_matrix(2, 2, np.random.default_rng(77))
        b = random_gaussian_matrix(2, 2, np.random.default_rng(77))
        np.testing.assert_array_equal(a, b)

    def test_gaussian_unit_power(self):
        z = random_gaussian_matrix(1000, 1, np.random.default_rng(11))
        assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.15)

    def test_gaussian_finite(self):
        z = random_gaussian_matrix(3, 4, np.random.default_rng(12))
        assert np.all(np.isfinite(z))

    def test_truncated_unitary_square(self):
        q = random_truncated_unitary(3, 3, np.random.default_rng(13))
        assert abs(abs(np.linalg.det(q)) - 1.0) < 1e-9
        assert np.linalg.norm(q.conj().T @ q - np.eye(3)) < 1e-10

    def test_truncated_unitary_seeded(self):
        a = random_truncated_unitary(4, 2, np.random.default_rng(14))
        b = random_truncated_unitary(4, 2, np.random.default_rng(14))
        np.testing.assert_array_equal(a, b)

    def test_independent_draws_distinct(self):
        rng = np.random.default_rng(15)
        a = random_truncated_unitary(6, 3, rng)
        b = random_truncated_unitary(6, 3, rng)
        diff = a @ a.conj().T - b @ b.conj().T
        assert np.linalg.norm(diff) / np.sqrt(2) > 1e-6

    def test_bad_shape(self):
        with pytest.raises(ShapeError):
            random_truncated_unitary(2, 3, np.random.default_rng(0))
        with pytest.raises(ShapeError):
            random_gaussian_matrix(0, 2, np.random.default_rng(0))


class TestGaussianMi:
    def test_scalar_awgn(self):
        assert gaussian_mi(np.eye(1), np.eye(1), None, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_zero_channel(self):
        assert gaussian_mi(np.zeros((2, 3)), np.eye(3), None, 1.0) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_matches_direct_logdet(self):
        rng = np.random.default_rng(16)
        h = random_gaussian_matrix(2, 3, rng)
        k = 2.0 * np.eye(3)
        m = random_gaussian_matrix(2, 2, rng)
        s_int = hermitian_part(m @ m.conj().T)
        direct = logdet_pd(
            hermitian_part(h @ k @ h.conj().T) + s_int + 0.5 * np.eye(2)
        ) - logdet_pd(s_int + 0.5 * np.eye(2))
        assert gaussian_mi(h, k, s_int, 0.5) == pytest.approx(direct, abs=1e-9)

    def test_nonnegative_and_monotone(self):
        rng = np.random.default_rng(17)
        h = random_gaussian_matrix(3, 2, rng)
        prev = 0.0
        for scale in (0.1, 1.0, 10.0, 100.0):
            mi = gaussian_mi(h, scale * np.eye(2), None, 1.0)
            assert mi >= prev - 1e-12
            prev = mi

    def test_non_psd_interference_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            gaussian_mi(np.eye(2), np.eye(2), np.diag([1.0, -1.0]), 1.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            gaussian_mi(np.eye(2), np.eye(3), None, 1.0)


def test_as_matrix_guards():
    with pytest.raises(ShapeError):
        as_matrix(np.ones(3))
    with pytest.raises(InvalidInputError):
        as_matrix(np.array([[np.nan, 0.0], [0.0, 1.0]]))

"""Dense complex linear-algebra kernel.

Decompositions, subspace bases, log-determinants (base 2), random matrix
ensembles and a generic Gaussian mutual-information evaluator. All rate
formulas elsewhere in the package are cross-validated against
:func:`gaussian_mi`, so this module deliberately keeps two independent
routes to the same quantities.

Matrices are plain ``numpy`` arrays with complex128 entries. Every function
is a pure function of its arguments; random ensembles take an explicit
``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateChannelError,
    InvalidInputError,
    NoNullspaceError,
    NotPositiveDefiniteError,
    ShapeError,
)

# Relative singular-value cutoff for rank decisions. Channels are full rank
# almost surely; this guards sampled degenerate inputs.
RANK_RTOL = 1e-12

# Orthonormality / annihilation and reconstruction tolerances used by the
# invariant checks (double precision, matrices at most ~8x8).
ORTHO_TOL = 1e-10
RECON_RTOL = 1e-9

LOG2_E = math.log2(math.e)


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex128 array, validating shape and entries.

    Parameters
    ----------
    a : array_like
        Input matrix.
    name : str
        Label used in error messages.

    Returns
    -------
    numpy.ndarray
        The validated complex128 matrix.
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one row and column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Return (A + A*)/2, killing round-off asymmetry before factorizations."""
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class SvdResult:
    """Full SVD ``A = U @ diag(s) @ V*`` with s sorted nonincreasing."""

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class QrTallResult:
    """Thin QR ``A = F @ C`` with orthonormal F (m x k) and invertible upper-triangular C."""

    F: np.ndarray
    C: np.ndarray


def svd(a) -> SvdResult:
    """Full singular value decomposition of a complex matrix.

    Parameters
    ----------
    a : array_like
        Finite matrix of shape (m, n).

    Returns
    -------
    SvdResult
        U (m x m), singular values (length min(m, n), nonincreasing) and
        V (n x n) such that ``A = U @ diag_rect(s) @ V.conj().T``.
    """
    arr = as_matrix(a, "svd input")
    u, s, vh = np.linalg.svd(arr, full_matrices=True)
    return SvdResult(U=u, singular_values=s, V=vh.conj().T)


def qr_tall(a) -> QrTallResult:
    """QR factorization of a tall full-column-rank matrix.

    Returns F with orthonormal columns spanning Col(A) and invertible
    upper-triangular C with ``A = F @ C``.

    Raises
    ------
    ShapeError
        If the input has fewer rows than columns.
    DegenerateChannelError
        If the smallest singular value is below ``RANK_RTOL`` times the largest.
    """
    arr = as_matrix(a, "qr input")
    m, k = arr.shape
    if m < k:
        raise ShapeError(f"qr_tall needs a tall matrix, got {m}x{k}")
    s = np.linalg.svd(arr, compute_uv=False)
    if s[-1] < RANK_RTOL * s[0]:
        raise DegenerateChannelError(
            f"rank-deficient input to qr_tall (sigma_min/sigma_max = {s[-1] / s[0]:.3e})"
        )
    f, c = np.linalg.qr(arr)
    # Fix the LAPACK sign ambiguity: make diag(C) positive real so the
    # factorization is a deterministic function of the input.
    d = np.diag(c).copy()
    d[d == 0] = 1.0
    phases = d / np.abs(d)
    return QrTallResult(F=f * phases[np.newaxis, :], C=phases.conj()[:, np.newaxis] * c)


def nullspace_basis(a) -> np.ndarray:
    """Orthonormal basis of the (right) nullspace of a wide full-row-rank matrix.

    Parameters
    ----------
    a : array_like
        Matrix of shape (p, q) with p < q and full row rank.

    Returns
    -------
    numpy.ndarray
        q x (q - p) matrix with orthonormal columns, ``A @ result ~ 0``.
    """
    arr = as_matrix(a, "nullspace input")
    p, q = arr.shape
    if p >= q:
        raise NoNullspaceError(f"no generic nullspace for shape {p}x{q} (need p < q)")
    _, s, vh = np.linalg.svd(arr, full_matrices=True)
    if s[-1] < RANK_RTOL * s[0]:
        raise DegenerateChannelError("rank-deficient input to nullspace_basis")
    return vh.conj().T[:, p:]


def left_nullspace_basis(a) -> np.ndarray:
    """Orthonormal basis of the left nullspace of a tall full-column-rank matrix.

    For A of shape (p, q) with p > q this is the U_0 block of the SVD:
    ``result.conj().T @ A ~ 0``. A zero-column input yields the identity
    (the whole space annihilates nothing).
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeError(f"left_nullspace input must be 2-D, got ndim={arr.ndim}")
    p, q = arr.shape
    if p < 1:
        raise ShapeError("left_nullspace input must have at least one row")
    if q == 0:
        return np.eye(p, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("left_nullspace input contains non-finite entries")
    if p <= q:
        raise NoNullspaceError(f"no left nullspace for shape {p}x{q} (need p > q)")
    u, s, _ = np.linalg.svd(arr, full_matrices=True)
    if s[-1] < RANK_RTOL * s[0]:
        raise DegenerateChannelError("rank-deficient input to left_nullspace_basis")
    return u[:, q:]


def logdet_pd(a) -> float:
    """log2-determinant of a Hermitian positive-definite matrix.

    Computed via Cholesky factorization, never through a raw determinant.

    Raises
    ------
    InvalidInputError
        If the matrix is not Hermitian to relative tolerance 1e-10.
    NotPositiveDefiniteError
        If the factorization fails; carries the smallest eigenvalue.
    """
    arr = as_matrix(a, "logdet input")
    n, m = arr.shape
    if n != m:
        raise ShapeError(f"logdet_pd needs a square matrix, got {n}x{m}")
    scale = max(1.0, float(np.linalg.norm(arr)))
    if np.linalg.norm(arr - arr.conj().T) > 1e-10 * scale:
        raise InvalidInputError("logdet_pd input is not Hermitian to tolerance 1e-10")
    try:
        chol = np.linalg.cholesky(arr)
    except np.linalg.LinAlgError:
        eigs = np.linalg.eigvalsh(hermitian_part(arr))
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (min eigenvalue {eigs[0]:.6e})",
            min_eigenvalue=float(eigs[0]),
        ) from None
    return float(2.0 * np.sum(np.log2(np.real(np.diag(chol)))))


def random_gaussian_matrix(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """m x n matrix with i.i.d. CN(0, 1) entries.

    Real and imaginary parts are independent N(0, 1/2), so each entry has
    unit mean square magnitude.
    """
    if m < 1 or n < 1:
        raise ShapeError(f"matrix dimensions must be positive, got ({m}, {n})")
    parts = rng.standard_normal(size=(2, m, n))
    return (parts[0] + 1j * parts[1]) / math.sqrt(2.0)


def random_truncated_unitary(m: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random m x k matrix with orthonormal columns.

    QR of a complex Gaussian matrix with the R-diagonal phases absorbed into
    Q, which makes the column span Haar distributed on the Grassmannian.
    """
    if m < k:
        raise ShapeError(f"need m >= k for a truncated unitary, got ({m}, {k})")
    z = random_gaussian_matrix(m, k, rng)
    q, r = np.linalg.qr(z)
    d = np.diag(r).copy()
    d[d == 0] = 1.0  # measure-zero guard
    return q * (d / np.abs(d)).conj()[np.newaxis, :]


def gaussian_mi(
    channel,
    signal_cov,
    interference_cov=None,
    noise_var: float = 1.0,
) -> float:
    """Mutual information (bits) of ``y = H x + z + n`` with Gaussian inputs.

    ``x ~ CN(0, K)``, interference ``z ~ CN(0, S_int)`` independent of x, and
    white noise ``n ~ CN(0, noise_var I)``. Returns::

        log2 det(H K H* + S_int + noise_var I) - log2 det(S_int + noise_var I)

    This is the generic oracle used to cross-check every closed-form rate
    term in :mod:`secmimo.rates`.

    Parameters
    ----------
    channel : array_like
        H of shape (p, q).
    signal_cov : array_like
        Positive-definite K of shape (q, q).
    interference_cov : array_like or None
        Positive-semidefinite S_int of shape (p, p); None means zero.
    noise_var : float
        Noise variance, strictly positive.
    """
    h = as_matrix(channel, "channel")
    k = as_matrix(signal_cov, "signal covariance")
    p, q = h.shape
    if k.shape != (q, q):
        raise ShapeError(f"signal covariance must be {q}x{q}, got {k.shape}")
    if noise_var <= 0:
        raise InvalidInputError(f"noise variance must be positive, got {noise_var}")
    if interference_cov is None:
        s_int = np.zeros((p, p), dtype=np.complex128)
    else:
        s_int = as_matrix(interference_cov, "interference covariance")
        if s_int.shape != (p, p):
            raise ShapeError(f"interference covariance must be {p}x{p}, got {s_int.shape}")
        w = np.linalg.eigvalsh(hermitian_part(s_int))
        if w[0] < -1e-10 * max(1.0, float(w[-1])):
            raise NotPositiveDefiniteError(
                f"interference covariance has negative eigenvalue {w[0]:.3e}",
                min_eigenvalue=float(w[0]),
            )
    k_eigs = np.linalg.eigvalsh(hermitian_part(k))
    if k_eigs[0] <= 0:
        raise NotPositiveDefiniteError(
            f"signal covariance must be PD (min eigenvalue {k_eigs[0]:.3e})",
            min_eigenvalue=float(k_eigs[0]),
        )
    denom = hermitian_part(s_int) + noise_var * np.eye(p)
    numer = hermitian_part(h @ k @ h.conj().T) + denom
    return logdet_pd(numer) - logdet_pd(denom)

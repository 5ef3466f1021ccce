"""System-model construction for one transmission trial.

Samples the three channels (transmitter-to-receiver, transmitter-to-
eavesdropper, jammer-to-receiver), builds the transmit precoders that split
power between the information signal and artificial noise, the receive-side
jammer nuller and post-processing filter, and the artificial-noise leakage
quantities that appear when the transmitter only has quantized knowledge of
the direct channel.

Conventions: the information precoder W1 is n_t x n_r, the artificial-noise
precoder W2 is n_t x (n_t - n_r), both with orthonormal columns and mutually
orthogonal. With perfect knowledge W2 spans the nullspace of the direct
channel, so the receiver sees no artificial noise at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateChannelError,
    DegenerateGeometryError,
    InsufficientAntennasError,
    InvalidInputError,
    NoNullspaceError,
    ShapeError,
)
from .grassmann import GrassmannPoint, quant_error_bound
from .linalg import (
    ORTHO_TOL,
    as_matrix,
    left_nullspace_basis,
    nullspace_basis,
    qr_tall,
    random_gaussian_matrix,
    random_truncated_unitary,
    svd,
)


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts of the four terminals plus the derived dimensions.

    Validity requires n_t > n_r > n_j >= 0 (nullspaces for artificial noise
    and jammer nulling both exist) and n_e <= n_t - n_r (the eavesdropper
    cannot escape the artificial noise).
    """

    n_t: int
    n_r: int
    n_j: int
    n_e: int

    def __post_init__(self):
        if not (self.n_t > self.n_r > self.n_j >= 0):
            raise InvalidInputError(
                f"need n_t > n_r > n_j >= 0, got ({self.n_t}, {self.n_r}, {self.n_j})"
            )
        if not (1 <= self.n_e <= self.n_t - self.n_r):
            raise InvalidInputError(
                f"need 1 <= n_e <= n_t - n_r, got n_e={self.n_e} with "
                f"n_t - n_r = {self.n_t - self.n_r}"
            )

    @property
    def d_s(self) -> int:
        """Number of securable data streams, n_r - n_j."""
        return self.n_r - self.n_j

    @property
    def quantization_dim(self) -> int:
        """Real dimension 2 n_r (n_t - n_r) of the quantized manifold."""
        return 2 * self.n_r * (self.n_t - self.n_r)


@dataclass(frozen=True)
class PowerPolicy:
    """Transmit power split and noise levels for one operating point.

    `rho` is the fraction of the power budget P on the information signal;
    the rest drives artificial noise with covariance P/(n_t - n_r) I. The
    information covariance is kxs_scale * P * I, defaulting to P/n_r.
    """

    P: float
    rho: float
    sigma2: float = 1.0
    sigma2_eve: float = 1.0
    kxs_scale: float | None = None

    def __post_init__(self):
        if self.P <= 0:
            raise InvalidInputError(f"transmit power must be positive, got {self.P}")
        if not 0.0 < self.rho < 1.0:
            raise InvalidInputError(f"rho must lie in (0, 1), got {self.rho}")
        if self.sigma2 <= 0 or self.sigma2_eve <= 0:
            raise InvalidInputError("noise variances must be positive")

    @classmethod
    def from_snr_db(cls, snr_db: float, rho: float = 0.5, **kwargs) -> "PowerPolicy":
        """Unit-noise policy with P = 10^(snr_db / 10)."""
        return cls(P=10.0 ** (snr_db / 10.0), rho=rho, **kwargs)

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.P)

    def kxs(self, n_r: int) -> float:
        """Scalar multiplier c of the information covariance c * P * I."""
        scale = 1.0 / n_r if self.kxs_scale is None else self.kxs_scale
        if not 0.0 < scale <= 1.0 / n_r + 1e-12:
            raise InvalidInputError(
                f"kxs_scale must lie in (0, 1/n_r], got {scale} for n_r={n_r}"
            )
        return scale

    def an_cov_scale(self, n_t: int, n_r: int) -> float:
        """Effective artificial-noise covariance scale (1 - rho) P / (n_t - n_r)."""
        return (1.0 - self.rho) * self.P / (n_t - n_r)


@dataclass(frozen=True)
class ChannelSet:
    """The three channel matrices of one trial (fixed during transmission)."""

    Hd: np.ndarray  # n_r x n_t, transmitter to receiver
    He: np.ndarray  # n_e x n_t, transmitter to eavesdropper
    Hj: np.ndarray  # n_r x n_j, jammer to receiver (zero columns if no jammer)


@dataclass(frozen=True)
class Precoders:
    """Transmit precoders: W1 for data, W2 for artificial noise."""

    W1: np.ndarray
    W2: np.ndarray
    mode: str  # "perfect" or "quantized"

    def __post_init__(self):
        w1 = as_matrix(self.W1, "W1")
        w2 = as_matrix(self.W2, "W2")
        if np.linalg.norm(w1.conj().T @ w1 - np.eye(w1.shape[1])) > ORTHO_TOL:
            raise InvalidInputError("W1 columns are not orthonormal")
        if np.linalg.norm(w2.conj().T @ w2 - np.eye(w2.shape[1])) > ORTHO_TOL:
            raise InvalidInputError("W2 columns are not orthonormal")
        if np.linalg.norm(w1.conj().T @ w2) > ORTHO_TOL:
            raise InvalidInputError("W1 and W2 are not orthogonal")


@dataclass(frozen=True)
class ReceiverFilters:
    """Receive-side matrices: jammer nuller V, post-filter G and its factors.

    F and C are the orthonormal/triangular factors of the conjugated direct
    channel, B is the tall truncated-unitary design matrix, and G satisfies
    G* = B* F C V (V* C* C V)^{-1}.
    """

    V: np.ndarray  # n_r x d_s
    B: np.ndarray  # n_t x d_s
    G: np.ndarray  # d_s x d_s
    F: np.ndarray  # n_t x n_r
    C: np.ndarray  # n_r x n_r


def sample_channels(config: AntennaConfig, rng: np.random.Generator) -> ChannelSet:
    """Draw one i.i.d. CN(0,1) channel realization for every link."""
    hd = random_gaussian_matrix(config.n_r, config.n_t, rng)
    he = random_gaussian_matrix(config.n_e, config.n_t, rng)
    if config.n_j == 0:
        hj = np.zeros((config.n_r, 0), dtype=np.complex128)
    else:
        hj = random_gaussian_matrix(config.n_r, config.n_j, rng)
    return ChannelSet(Hd=hd, He=he, Hj=hj)


def eve_effective_channel(Ge, Gj) -> np.ndarray:
    """Jammer-free eavesdropper channel after projecting out the jammer.

    For an eavesdropper with N_e antennas seeing transmitter channel Ge and
    jammer channel Gj, projecting onto the left nullspace of Gj removes the
    jammer entirely and leaves an (N_e - n_j) x n_t effective channel.
    """
    ge = as_matrix(Ge, "Ge")
    gj = np.asarray(Gj, dtype=np.complex128)
    if gj.ndim != 2 or gj.shape[0] != ge.shape[0]:
        raise ShapeError(f"Gj rows must match Ge rows, got {gj.shape} vs {ge.shape}")
    if gj.shape[1] == 0:
        return ge
    if ge.shape[0] <= gj.shape[1]:
        raise InsufficientAntennasError(
            f"eavesdropper needs more antennas than jammer streams "
            f"({ge.shape[0]} <= {gj.shape[1]})"
        )
    u0 = left_nullspace_basis(gj)
    return u0.conj().T @ ge


def tx_precoders_perfect(Hd) -> Precoders:
    """Precoders from the direct channel's SVD (perfect transmitter CSI).

    W2 spans the nullspace of Hd so artificial noise vanishes at the
    receiver; W1 spans the orthogonal complement (the row space).
    """
    hd = as_matrix(Hd, "Hd")
    n_r, n_t = hd.shape
    if n_t <= n_r:
        raise ShapeError(f"need n_t > n_r for an artificial-noise nullspace, got {hd.shape}")
    dec = svd(hd)
    s = dec.singular_values
    if s[-1] < 1e-12 * s[0]:
        raise DegenerateChannelError("rank-deficient direct channel")
    w1 = dec.V[:, :n_r]
    w2 = dec.V[:, n_r:]
    return Precoders(W1=w1, W2=w2, mode="perfect")


def tx_precoders_quantized(fhat) -> Precoders:
    """Precoders from a quantized subspace representative.

    W1 is the representative itself; W2 spans the nullspace of its conjugate
    transpose, which only approximately nulls the true channel.
    """
    if not isinstance(fhat, GrassmannPoint):
        fhat = GrassmannPoint(np.asarray(fhat, dtype=np.complex128))
    f = fhat.matrix
    w2 = nullspace_basis(f.conj().T)
    return Precoders(W1=f, W2=w2, mode="quantized")


def rx_nuller(Hj) -> np.ndarray:
    """Receive projection V with orthonormal columns annihilating the jammer.

    The left-nullspace basis of the jammer channel; identity when there is
    no jammer.
    """
    hj = np.asarray(Hj, dtype=np.complex128)
    if hj.ndim != 2:
        raise ShapeError("Hj must be 2-D")
    n_r, n_j = hj.shape
    if n_j == 0:
        return np.eye(n_r, dtype=np.complex128)
    if n_r <= n_j:
        raise InsufficientAntennasError(
            f"receiver needs more antennas than the jammer, got n_r={n_r}, n_j={n_j}"
        )
    try:
        return left_nullspace_basis(hj)
    except NoNullspaceError as exc:  # pragma: no cover - shape guard above
        raise InsufficientAntennasError(str(exc)) from exc


def rx_postfilter(Hd, Hj, B=None, rng: np.random.Generator | None = None) -> ReceiverFilters:
    """Two-stage receive filter: jammer nulling then channel-matched mixing.

    Factors the conjugated direct channel as Hd* = F C, nulls the jammer
    with V, and builds G* = B* F C V (V* C* C V)^{-1} for a tall
    truncated-unitary B (Haar-sampled when not supplied).
    """
    hd = as_matrix(Hd, "Hd")
    n_r, n_t = hd.shape
    dec = qr_tall(hd.conj().T)
    f, c = dec.F, dec.C
    v = rx_nuller(Hj)
    d_s = v.shape[1]
    if B is None:
        if rng is None:
            raise InvalidInputError("rx_postfilter needs either B or an rng to sample it")
        b = random_truncated_unitary(n_t, d_s, rng)
    else:
        b = as_matrix(B, "B")
        if b.shape != (n_t, d_s):
            raise ShapeError(f"B must be {n_t}x{d_s}, got {b.shape}")
        if np.linalg.norm(b.conj().T @ b - np.eye(d_s)) > ORTHO_TOL:
            raise InvalidInputError("B columns are not orthonormal")
    cv = c @ v
    gram = cv.conj().T @ cv  # V* C* C V, Hermitian PD almost surely
    eigs = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    if eigs[0] < 1e-12 * max(1.0, eigs[-1]):
        raise DegenerateGeometryError(
            f"V* C* C V is numerically singular (min eigenvalue {eigs[0]:.3e})"
        )
    # G* = (B* F C V) gram^{-1}; right-solve via the Hermitian of gram.
    g_star = np.linalg.solve(gram, (b.conj().T @ f @ cv).conj().T).conj().T
    g = g_star.conj().T
    gg = g.conj().T @ g
    gg_eigs = np.linalg.eigvalsh(0.5 * (gg + gg.conj().T))
    if gg_eigs[0] < 1e-12 * max(1.0, gg_eigs[-1]):
        raise DegenerateGeometryError("G* G is not positive definite")
    return ReceiverFilters(V=v, B=b, G=g, F=f, C=c)


def leakage_power(filters: ReceiverFilters, Hd, W2Q, policy: PowerPolicy) -> float:
    """Mean artificial-noise power reaching the post-processed receiver.

    The leakage term is sqrt(1-rho) G* V* Hd W2Q x_an with x_an white of
    covariance P/(n_t - n_r) I; its expected squared norm evaluates in
    closed form to (1-rho) P/(n_t - n_r) ||G* V* Hd W2Q||_F^2. Exactly zero
    when W2Q spans the true channel nullspace.
    """
    hd = as_matrix(Hd, "Hd")
    w2q = as_matrix(W2Q, "W2Q")
    an_cols = w2q.shape[1]
    coupling = filters.G.conj().T @ filters.V.conj().T @ hd @ w2q
    return float(
        (1.0 - policy.rho) * policy.P / an_cols * np.linalg.norm(coupling) ** 2
    )


def leakage_bound(policy: PowerPolicy, n_f: int, config: AntennaConfig) -> float:
    """Worst-case leakage power for a sphere-packing codebook with n_f bits.

    2 (1-rho) P / (n_t - n_r) * delta(n_f)^2 with delta the quantization
    error bound (higher-order factor dropped). Under the power-matched bit
    schedule this expression is independent of P.
    """
    delta = quant_error_bound(n_f, config.n_t, config.n_r)
    return (
        2.0 * (1.0 - policy.rho) * policy.P / (config.n_t - config.n_r) * delta**2
    )

"""Subspace quantization on the Grassmann manifold G(n_t, n_r).

A point of the manifold is an n_r-dimensional subspace of complex n_t-space,
represented by a tall matrix with orthonormal columns. Representatives are
unique only up to a right-unitary factor, so subspace equality is always
tested through the chordal distance, never entrywise.

Two quantizers live here: the exhaustive minimum-distance search against an
explicit codebook (tractable for small bit budgets, used as the oracle), and
a random-perturbation surrogate that constructs a neighbor at exactly the
worst-case distance the sphere-packing bound predicts for a given bit
budget. Experiments use the surrogate because packing-based codebooks are
infeasible beyond a few tens of bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CodebookTooLargeError,
    InvalidInputError,
    PerturbationError,
    ShapeError,
)
from .linalg import ORTHO_TOL, as_matrix, random_gaussian_matrix, random_truncated_unitary

# Largest bit budget for which an explicit codebook is still generated and
# scanned exhaustively. Beyond this use perturb_quantize.
MAX_EXHAUSTIVE_BITS = 20

# Achieved-vs-target distance tolerance of the perturbation quantizer.
PERTURB_TOL = 1e-6

# Target clamp just inside the manifold diameter so the bisection stays
# well posed at tiny bit budgets.
_DIAMETER_CLAMP = 0.999


@dataclass(frozen=True)
class GrassmannPoint:
    """Subspace representative: a tall matrix with orthonormal columns."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = as_matrix(self.matrix, "subspace representative")
        n_t, n_r = mat.shape
        if n_t < n_r:
            raise ShapeError(f"representative must be tall, got {n_t}x{n_r}")
        gram = mat.conj().T @ mat
        if np.linalg.norm(gram - np.eye(n_r)) > ORTHO_TOL:
            raise InvalidInputError("representative columns are not orthonormal to 1e-10")
        object.__setattr__(self, "matrix", mat)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def _rep(point) -> np.ndarray:
    """Accept a GrassmannPoint or a bare orthonormal ndarray."""
    if isinstance(point, GrassmannPoint):
        return point.matrix
    return np.asarray(point, dtype=np.complex128)


@dataclass(frozen=True)
class Codebook:
    """Ordered quantization codebook shared by transmitter and receiver."""

    points: tuple
    bits: int
    ambient: tuple[int, int]

    def __post_init__(self):
        if not 1 <= len(self.points) <= 2**self.bits:
            raise InvalidInputError(
                f"codebook must hold between 1 and 2^{self.bits} points, got {len(self.points)}"
            )
        for p in self.points:
            if _rep(p).shape != self.ambient:
                raise ShapeError("codebook points must share the ambient shape")

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class FeedbackSchedule:
    """How the feedback bit budget is chosen: a fixed count or power-scaled."""

    mode: str
    fixed_bits: int | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if self.mode == "fixed":
            if self.fixed_bits is None or self.fixed_bits < 1:
                raise InvalidInputError("fixed schedule needs fixed_bits >= 1")
        elif self.mode == "scaled":
            if self.epsilon is None or self.epsilon < 0:
                raise InvalidInputError("scaled schedule needs epsilon >= 0")
        else:
            raise InvalidInputError(f"unknown schedule mode {self.mode!r}")

    @classmethod
    def fixed(cls, bits: int) -> "FeedbackSchedule":
        return cls(mode="fixed", fixed_bits=int(bits))

    @classmethod
    def scaled(cls, epsilon: float = 0.0) -> "FeedbackSchedule":
        return cls(mode="scaled", epsilon=float(epsilon))


def chordal_distance(a, b) -> float:
    """Chordal distance (1/sqrt(2)) * ||A A* - B B*||_F between two subspaces.

    Symmetric, zero iff the column spaces coincide, invariant under
    right-unitary changes of representative, and bounded by
    sqrt(min(n_r, n_t - n_r)).
    """
    s = _rep(a)
    f = _rep(b)
    if s.shape != f.shape:
        raise ShapeError(f"subspace shapes differ: {s.shape} vs {f.shape}")
    diff = s @ s.conj().T - f @ f.conj().T
    return float(np.linalg.norm(diff) / math.sqrt(2.0))


def _log_ball_volume_coefficient(n_t: int, n_r: int) -> float:
    # log of  [1 / (n_r (n_t - n_r))!] * prod_{i=1..n_r} (n_t - i)! / (n_r - i)!
    log_c = -math.lgamma(n_r * (n_t - n_r) + 1)
    for i in range(1, n_r + 1):
        log_c += math.lgamma(n_t - i + 1) - math.lgamma(n_r - i + 1)
    return log_c


def ball_volume_coefficient(n_t: int, n_r: int) -> float:
    """Coefficient of the metric-ball volume on G(n_t, n_r).

    Evaluated in log space so large antenna counts do not overflow the
    intermediate factorials.
    """
    if n_t <= n_r or n_r < 1:
        raise InvalidInputError(f"need n_t > n_r >= 1, got ({n_t}, {n_r})")
    return math.exp(_log_ball_volume_coefficient(n_t, n_r))


def quant_error_bound(n_f: int, n_t: int, n_r: int) -> float:
    """Worst-case quantization distance for a sphere-packing codebook.

    delta = 2 / (c * 2^n_f)^(1/N) with N = 2 n_r (n_t - n_r); the vanishing
    higher-order factor is dropped. Monotone decreasing in n_f.
    """
    if n_f < 1:
        raise InvalidInputError(f"bit budget must be >= 1, got {n_f}")
    n_dim = 2 * n_r * (n_t - n_r)
    log_c = _log_ball_volume_coefficient(n_t, n_r)
    exponent = -(log_c + n_f * math.log(2.0)) / n_dim
    # exp() underflows to 0.0 for huge bit budgets, which is the right limit
    return 2.0 * math.exp(exponent) if exponent > -700 else 0.0


def codebook_generate(n_t: int, n_r: int, n_f: int, rng: np.random.Generator) -> Codebook:
    """Random codebook of 2^n_f independent Haar-distributed subspaces.

    A stand-in for Grassmannian sphere packing in the exhaustive-search
    regime; guarded to n_f <= 20 because the codebook is materialized.
    """
    if n_f < 1:
        raise InvalidInputError(f"bit budget must be >= 1, got {n_f}")
    if n_f > MAX_EXHAUSTIVE_BITS:
        raise CodebookTooLargeError(
            f"2^{n_f} codewords is beyond the exhaustive regime "
            f"(max {MAX_EXHAUSTIVE_BITS} bits); use perturb_quantize instead"
        )
    size = 2**n_f
    # Batched Haar draws: QR of a stack of Gaussian matrices.
    z = (
        rng.standard_normal(size=(size, n_t, n_r))
        + 1j * rng.standard_normal(size=(size, n_t, n_r))
    ) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2).copy()
    d[d == 0] = 1.0
    q = q * (d / np.abs(d)).conj()[:, np.newaxis, :]
    points = tuple(GrassmannPoint(q[i]) for i in range(size))
    return Codebook(points=points, bits=n_f, ambient=(n_t, n_r))


def quantize(point, book: Codebook) -> tuple[GrassmannPoint, int, float]:
    """Exhaustive minimum-chordal-distance quantization against a codebook.

    Returns the winning codeword, its index, and the achieved distance.
    Ties break toward the lowest index. The scan uses the Gram-norm identity
    d^2 = n_r - ||S* F||_F^2, which orders codewords identically to the
    projector-difference definition.
    """
    f = _rep(point)
    if len(book) == 0:
        raise InvalidInputError("cannot quantize against an empty codebook")
    if f.shape != book.ambient:
        raise ShapeError(f"point shape {f.shape} does not match codebook ambient {book.ambient}")
    stack = np.stack([_rep(p) for p in book.points])
    cross = np.einsum("kij,il->kjl", stack.conj(), f)
    d_sq = f.shape[1] - np.sum(np.abs(cross) ** 2, axis=(1, 2))
    idx = int(np.argmin(d_sq))
    best = book.points[idx]
    return best, idx, chordal_distance(best, f)


def _orthonormalize(mat: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(mat)
    return q


def perturb_to_distance(
    point, distance: float, rng: np.random.Generator, tol: float = PERTURB_TOL
) -> GrassmannPoint:
    """Construct a subspace at a prescribed chordal distance from `point`.

    Orthonormalizes F + eps * Z for a Gaussian direction Z confined to the
    orthogonal complement of span(F), with eps found by bisection on the
    achieved distance. Retries with a fresh Z up to 8 times if the target
    cannot be bracketed, then raises.
    """
    f = _rep(point)
    n_t, n_r = f.shape
    diameter = math.sqrt(min(n_r, n_t - n_r))
    if distance < 0 or distance >= diameter:
        raise InvalidInputError(
            f"target distance {distance} outside [0, sqrt(min(n_r, n_t - n_r)))"
        )
    if distance < 1e-15:
        return GrassmannPoint(f.copy())
    proj_perp = np.eye(n_t) - f @ f.conj().T
    for _ in range(8):
        # Restricting the Gaussian direction to the orthogonal complement of
        # span(F) makes every distance up to the manifold diameter reachable
        # by scaling; a raw direction saturates at the (random) distance of
        # an independent subspace, which cannot bracket near-diameter
        # targets. For small eps the two constructions agree to first order.
        z = proj_perp @ random_gaussian_matrix(n_t, n_r, rng)

        def achieved(eps: float) -> float:
            return chordal_distance(f, _orthonormalize(f + eps * z))

        hi = 1.0
        while achieved(hi) < distance and hi < 1e9:
            hi *= 2.0
        if achieved(hi) < distance:
            continue  # this Z cannot reach the target; redraw
        lo = 0.0
        best_eps, best_err = hi, abs(achieved(hi) - distance)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            d_mid = achieved(mid)
            err = abs(d_mid - distance)
            if err < best_err:
                best_eps, best_err = mid, err
            if err <= 0.1 * tol or (hi - lo) < 1e-18:
                break
            if d_mid < distance:
                lo = mid
            else:
                hi = mid
        candidate = _orthonormalize(f + best_eps * z)
        if abs(chordal_distance(f, candidate) - distance) <= tol:
            return GrassmannPoint(candidate)
    raise PerturbationError(
        f"could not reach chordal distance {distance:.6g} after 8 perturbation attempts"
    )


def perturb_quantize(point, n_f: int, rng: np.random.Generator) -> GrassmannPoint:
    """Random-perturbation surrogate for quantization with n_f bits.

    Returns a subspace whose distance from `point` equals the sphere-packing
    worst case for n_f bits (clamped just inside the manifold diameter).
    Requires n_t >= 2 n_r so the perturbation approximation is valid.
    """
    f = _rep(point)
    n_t, n_r = f.shape
    if n_t < 2 * n_r:
        raise ShapeError(f"perturbation quantizer needs n_t >= 2 n_r, got ({n_t}, {n_r})")
    diameter = math.sqrt(min(n_r, n_t - n_r))
    target = min(quant_error_bound(n_f, n_t, n_r), _DIAMETER_CLAMP * diameter)
    return perturb_to_distance(f, target, rng)


def feedback_bits(power: float, schedule: FeedbackSchedule, n_t: int, n_r: int) -> int:
    """Bit budget for a transmit power under the given schedule.

    Scaled mode implements n_f = ceil((1 + eps) * n_r (n_t - n_r) * log2 P);
    rounding up keeps the sufficiency direction of the scaling law. Fixed
    mode ignores the power.
    """
    if schedule.mode == "fixed":
        return int(schedule.fixed_bits)
    if power <= 1.0:
        raise InvalidInputError(
            f"scaled schedule needs P > 1 for a positive bit budget, got P={power}"
        )
    half_dim = n_r * (n_t - n_r)
    return math.ceil((1.0 + schedule.epsilon) * half_dim * math.log2(power))


def haar_point(n_t: int, n_r: int, rng: np.random.Generator) -> GrassmannPoint:
    """Haar-random point of G(n_t, n_r)."""
    return GrassmannPoint(random_truncated_unitary(n_t, n_r, rng))

"""Moore-Penrose machinery and the pseudoinverse-gradient observable.

For a smoothed field g on a matrix space, the quantity of interest is the
trace pairing of (X^+)^T with grad g(X).  For invertible X the first factor
is the gradient of log-determinant, so the pairing feeds the drift term of
the generator probe; the smoothing pipeline is what keeps it continuous
across rank drops.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .catalog import project_fixed_rank, tangent_projector_fixed_rank
from .linalg import fd_laplacian, frobenius, svd

RANK_DECISION_RTOL = 1e-10


class PseudoInversePair(NamedTuple):
    X: np.ndarray
    pinv: np.ndarray        # X^+
    sharp: np.ndarray       # (X^+)^T
    rank: int
    threshold: float


def pinv_pair(X: np.ndarray, rtol: float = RANK_DECISION_RTOL) -> PseudoInversePair:
    """SVD pseudoinverse with an explicit, recorded rank decision."""
    X = np.asarray(X, dtype=float)
    f = svd(X)
    scale = f.sigma[0] if f.sigma.size and f.sigma[0] > 0 else 1.0
    threshold = rtol * scale
    inv = np.where(f.sigma > threshold, 1.0 / np.where(f.sigma > threshold, f.sigma, 1.0), 0.0)
    rank = int(np.sum(f.sigma > threshold))
    n, m = X.shape
    S = np.zeros((m, n))
    S[: len(inv), : len(inv)] = np.diag(inv)
    pinv = f.V @ S @ f.U.T
    return PseudoInversePair(X=X, pinv=pinv, sharp=pinv.T, rank=rank, threshold=threshold)


def penrose_residuals(pair: PseudoInversePair) -> dict:
    """The four defining identities, as relative residuals."""
    X, P = pair.X, pair.pinv
    scale = max(1.0, frobenius(X) ** 2)
    return {
        "XPX=X": frobenius(X @ P @ X - X) / scale,
        "PXP=P": frobenius(P @ X @ P - P) / scale,
        "sym(XP)": frobenius(X @ P - (X @ P).T) / scale,
        "sym(PX)": frobenius(P @ X - (P @ X).T) / scale,
    }


def mp_tangent_projection_check(X: np.ndarray, k: int) -> float:
    """Residual of projecting (X^+)^T onto the tangent space at the rank-k foot.

    The projection of the sharp pseudoinverse onto the tangent space of the
    rank-k stratum at Y = P_{rank k}(X) equals Y's own sharp pseudoinverse;
    this returns the observed residual of that identity (normalized).
    Requires a singular-value gap so the foot is single-valued.
    """
    X = np.asarray(X, dtype=float)
    Y = project_fixed_rank(X, k)
    T = tangent_projector_fixed_rank(Y, k)
    sharp_x = pinv_pair(X).sharp
    sharp_y = pinv_pair(Y).sharp
    projected = (T @ sharp_x.reshape(-1)).reshape(X.shape)
    return frobenius(projected - sharp_y) / (1.0 + frobenius(sharp_x))


def _as_matrix(x: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(shape)


def _field_shape(g) -> tuple[int, int]:
    strat = getattr(g, "stratification", None)
    shape = getattr(strat, "matrix_shape", None)
    if shape is None:
        raise ValueError("observable requires a field built on a matrix-space stratification")
    return tuple(shape)


def pinv_pairing(g, X: np.ndarray) -> float:
    """Trace inner product of (X^+)^T with grad g(X).

    ``g`` is a SmoothedField built on a matrix stratification (or anything
    with .grad and .stratification.matrix_shape); ``X`` may be a matrix or
    its flattened vector.
    """
    shape = _field_shape(g)
    Xm = _as_matrix(X, shape)
    grad = _as_matrix(g.grad(Xm.reshape(-1)), shape)
    sharp = pinv_pair(Xm).sharp
    return float(np.sum(sharp * grad))


def generator_probe(g, X: np.ndarray, bessel_delta: float = 1.0, step: float | None = None) -> float:
    """Pointwise drift-diffusion probe: half the Laplacian of g plus the
    weighted pseudoinverse pairing.

    Uses a finite-difference Laplacian (step 1e-4 * (1 + |X|)); intended as a
    boundedness probe near strata, not as a high-accuracy second derivative.
    """
    shape = _field_shape(g)
    Xm = _as_matrix(X, shape)
    x = Xm.reshape(-1)
    if step is None:
        step = 1e-4 * (1.0 + float(np.linalg.norm(x)))
    lap = fd_laplacian(g.value, x, h=step)
    return 0.5 * lap + 0.5 * (bessel_delta - 1.0) * pinv_pairing(g, X)

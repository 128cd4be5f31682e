"""Dense small-matrix decompositions and finite-difference utilities.

Everything here is deterministic: factorizations carry a fixed sign/order
convention so downstream projection formulas are reproducible across runs.
Matrix-valued problems are handled by flattening to row-major vectors; the
structured (n, m) view is only used by the decompositions themselves.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

# Rank decisions for orthonormalization / projector construction.
DROP_TOL = 1e-10


class DecompositionError(RuntimeError):
    """A matrix factorization could not be completed."""


class ContractViolation(ValueError):
    """An input violates a documented precondition."""


class SVDFactors(NamedTuple):
    U: np.ndarray       # (n, n) orthogonal
    sigma: np.ndarray   # (min(n, m),) nonincreasing, nonnegative
    V: np.ndarray       # (m, m) orthogonal, X = U @ Diag(sigma) @ V.T


class EigFactors(NamedTuple):
    U: np.ndarray           # (n, n) orthogonal
    eigenvalues: np.ndarray  # (n,) nonincreasing, X = U @ diag(w) @ U.T


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


def spectral_norm(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _fix_signs(U: np.ndarray, V: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray | None]:
    """Flip column signs so the largest-magnitude entry of each U column is positive.

    Paired columns of V (when given) flip together, which leaves the product
    U @ Diag(s) @ V.T unchanged.  Ties on the magnitude go to the lowest index.
    """
    U = U.copy()
    V = V.copy() if V is not None else None
    k = V.shape[1] if V is not None else 0
    for i in range(U.shape[1]):
        j = int(np.argmax(np.abs(U[:, i])))
        if U[j, i] < 0:
            U[:, i] = -U[:, i]
            if V is not None and i < k:
                V[:, i] = -V[:, i]
    return U, V


def svd(X: np.ndarray) -> SVDFactors:
    """Full SVD with descending singular values and a deterministic sign convention."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ContractViolation(f"expected a matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ContractViolation("matrix has non-finite entries")
    try:
        U, s, Vh = np.linalg.svd(X, full_matrices=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise DecompositionError(f"SVD did not converge: {exc}") from None
    V = Vh.T
    U, V = _fix_signs(U, V)
    # Sign rule also applied to the unpaired null-space columns of V.
    k = len(s)
    if V.shape[1] > k:
        V[:, k:], _ = _fix_signs(V[:, k:])
    return SVDFactors(U=U, sigma=s, V=V)


def reconstruct(f: SVDFactors) -> np.ndarray:
    n, m = f.U.shape[0], f.V.shape[0]
    S = np.zeros((n, m))
    k = len(f.sigma)
    S[:k, :k] = np.diag(f.sigma)
    return f.U @ S @ f.V.T


def sym_eig(X: np.ndarray) -> EigFactors:
    """Symmetric eigendecomposition, eigenvalues descending, deterministic signs."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ContractViolation("matrix has non-finite entries")
    norm = frobenius(X)
    if frobenius(X - X.T) > 1e-12 * norm:
        raise ContractViolation("matrix is not symmetric within 1e-12 relative tolerance")
    w, U = np.linalg.eigh(0.5 * (X + X.T))
    order = np.argsort(-w, kind="stable")
    w = w[order]
    U = U[:, order]
    U, _ = _fix_signs(U)
    residual = frobenius(U @ np.diag(w) @ U.T - X)
    if residual > 1e-10 * max(1.0, norm):
        raise DecompositionError(f"eigendecomposition residual {residual:.3e} too large")
    return EigFactors(U=U, eigenvalues=w)


def default_step(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return 1e-6 * max(1.0, float(np.linalg.norm(x)))


def fd_gradient(
    field: Callable[[np.ndarray], float],
    x: np.ndarray,
    h: float | None = None,
    richardson: bool = True,
) -> np.ndarray:
    """Central-difference gradient, optionally with one Richardson halving."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = default_step(x)
    if h <= 0:
        raise ContractViolation("finite-difference step must be positive")

    def central(step: float) -> np.ndarray:
        g = np.empty_like(x)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = step
            fp = field(x + e)
            fm = field(x - e)
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise ContractViolation("field evaluated to a non-finite value on the stencil")
            g[i] = (fp - fm) / (2.0 * step)
        return g

    if not richardson:
        return central(h)
    coarse = central(h)
    fine = central(0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def fd_jacobian(mapping: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of a vector map; rows index outputs."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = default_step(x)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        yp = np.asarray(mapping(x + e), dtype=float)
        ym = np.asarray(mapping(x - e), dtype=float)
        if not (np.all(np.isfinite(yp)) and np.all(np.isfinite(ym))):
            raise ContractViolation("mapping evaluated to non-finite values on the stencil")
        cols.append((yp - ym) / (2.0 * h))
    return np.stack(cols, axis=1)


def fd_laplacian(field: Callable[[np.ndarray], float], x: np.ndarray, h: float) -> float:
    """Second-order finite-difference Laplacian on the standard 2n-point stencil."""
    x = np.asarray(x, dtype=float)
    f0 = field(x)
    total = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fp = field(x + e)
        fm = field(x - e)
        if not (np.isfinite(fp) and np.isfinite(fm) and np.isfinite(f0)):
            raise ContractViolation("field evaluated to a non-finite value on the stencil")
        total += (fp - 2.0 * f0 + fm) / (h * h)
    return float(total)


def fd_second_directional(field: Callable[[np.ndarray], float], x: np.ndarray, v: np.ndarray, h: float) -> float:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return float((field(x + h * v) - 2.0 * field(x) + field(x - h * v)) / (h * h))


def orthogonal_projector(basis: Sequence[np.ndarray] | np.ndarray, dim: int | None = None) -> np.ndarray:
    """Orthogonal projector onto the span of the given vectors.

    Near-dependent directions are dropped by a rank-revealing SVD at relative
    tolerance DROP_TOL, so rank-deficient input is fine.  An empty basis gives
    the zero projector (``dim`` is then required to size it).
    """
    vectors = [np.asarray(v, dtype=float) for v in basis]
    if not vectors:
        if dim is None:
            raise ContractViolation("empty basis requires an explicit ambient dimension")
        return np.zeros((dim, dim))
    A = np.stack(vectors, axis=1)
    if not np.all(np.isfinite(A)):
        raise ContractViolation("basis vectors must be finite")
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        return np.zeros((A.shape[0], A.shape[0]))
    rank = int(np.sum(s > DROP_TOL * max(s[0], 1.0)))
    Q = U[:, :rank]
    return Q @ Q.T


def complement_projector(P: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    return np.eye(P.shape[0]) - P


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random orthogonal matrix (QR of a Gaussian, R-diagonal sign fix)."""
    A = rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(A)
    return Q * np.sign(np.diag(R))


def power_softmin(values: Sequence[float], order: int = 8) -> float:
    """Smooth underestimate of min over positive values: (sum v^-q)^(-1/q).

    Returns +inf for an empty collection.  Any +inf entries drop out; a zero
    or negative entry short-circuits to 0 (the softmin is only meaningful for
    positive clearances).
    """
    if order < 2 or order % 2 != 0:
        raise ContractViolation("softmin order must be an even integer >= 2")
    vals = [float(v) for v in values if not np.isinf(v)]
    if not vals:
        return float("inf")
    if min(vals) <= 0.0:
        return 0.0
    # Factor out the minimum to avoid overflow of v^-q for tiny clearances.
    lo = min(vals)
    acc = sum((lo / v) ** order for v in vals)
    return lo * acc ** (-1.0 / order)

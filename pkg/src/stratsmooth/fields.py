"""Scalar fields with gradient contracts, and the built-in field library.

The library is a closed set of expressions (coordinates, squared norms,
determinants, distances, compactly supported bumps, constants) so every
field carries an analytic gradient and an honest Lipschitz estimate over the
sampling box.  There is deliberately no general expression parser.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class ScalarField:
    """An evaluatable field R^n -> R with gradient and Lipschitz metadata.

    ``smoothness`` is the claimed differentiability order (np.inf for
    C-infinity, 0 for merely continuous).  ``support`` optionally describes a
    ball ("ball", center, radius) outside of which the field vanishes.
    ``lip`` is an upper estimate of the Lipschitz modulus on the region of
    interest; stages multiply it by their worst-case inflation factor.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    dim: int
    lip: float
    smoothness: float = np.inf
    support: Optional[tuple] = None
    name: str = ""
    grad_is_fd: bool = False

    def __call__(self, x) -> float:
        return float(self.value(np.asarray(x, dtype=float)))

    def grad(self, x) -> np.ndarray:
        return np.asarray(self.gradient(np.asarray(x, dtype=float)), dtype=float)

    def scaled(self, factor: float) -> "ScalarField":
        return replace(
            self,
            value=lambda x, v=self.value: factor * v(x),
            gradient=lambda x, g=self.gradient: factor * g(x),
            lip=abs(factor) * self.lip,
            name=f"{factor}*{self.name}",
        )


def _box_max_norm(box: tuple[np.ndarray, np.ndarray]) -> float:
    lo, hi = np.asarray(box[0], float), np.asarray(box[1], float)
    return float(np.sqrt(np.sum(np.maximum(lo ** 2, hi ** 2))))


def constant_field(value: float, dim: int) -> ScalarField:
    return ScalarField(
        value=lambda x: float(value),
        gradient=lambda x: np.zeros(dim),
        dim=dim, lip=0.0, smoothness=np.inf, name=f"const({value})",
    )


def coordinate_field(index: int, dim: int) -> ScalarField:
    e = np.zeros(dim)
    e[index] = 1.0
    return ScalarField(
        value=lambda x: float(x[index]),
        gradient=lambda x: e.copy(),
        dim=dim, lip=1.0, smoothness=np.inf, name=f"coord({index})",
    )


def squared_norm_field(dim: int, box=None) -> ScalarField:
    lip = 2.0 * _box_max_norm(box) if box is not None else 8.0
    return ScalarField(
        value=lambda x: float(np.dot(x, x)),
        gradient=lambda x: 2.0 * x,
        dim=dim, lip=lip, smoothness=np.inf, name="frobsq",
    )


def distance_field(point: np.ndarray) -> ScalarField:
    """|x - p|: 1-Lipschitz, smooth away from p (zero gradient reported at p)."""
    point = np.asarray(point, dtype=float)

    def grad(x):
        d = x - point
        n = np.linalg.norm(d)
        if n < 1e-300:
            return np.zeros_like(d)
        return d / n

    return ScalarField(
        value=lambda x: float(np.linalg.norm(x - point)),
        gradient=grad,
        dim=point.size, lip=1.0, smoothness=0.0, name="dist",
    )


def _cofactor(X: np.ndarray) -> np.ndarray:
    n = X.shape[0]
    if n == 1:
        return np.ones((1, 1))
    C = np.empty_like(X)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(X, i, axis=0), j, axis=1)
            C[i, j] = (-1.0) ** (i + j) * np.linalg.det(minor)
    return C


def det_field(n: int, box=None) -> ScalarField:
    """Determinant of the (n, n) matrix view of a flattened vector."""
    dim = n * n

    def value(x):
        return float(np.linalg.det(x.reshape(n, n)))

    def gradient(x):
        return _cofactor(x.reshape(n, n)).reshape(-1)

    if box is not None:
        # |grad det(X)|_F = |cofactor(X)|_F <= |X|_F^(n-1); box corner bound
        b = _box_max_norm(box)
        lip = float(max(1.0, b) ** (n - 1))
    else:
        lip = 12.0
    return ScalarField(value=value, gradient=gradient, dim=dim, lip=lip, smoothness=np.inf, name=f"det({n})")


def bump_field(center: np.ndarray, radius: float, height: float = 1.0) -> ScalarField:
    """Compactly supported smooth bump on the ball of given radius."""
    center = np.asarray(center, dtype=float)

    def value(x):
        u = float(np.dot(x - center, x - center)) / (radius * radius)
        if u >= 1.0:
            return 0.0
        return height * np.exp(1.0 - 1.0 / (1.0 - u))

    def gradient(x):
        d = x - center
        u = float(np.dot(d, d)) / (radius * radius)
        if u >= 1.0:
            return np.zeros_like(d)
        v = height * np.exp(1.0 - 1.0 / (1.0 - u))
        return v * (-1.0 / (1.0 - u) ** 2) * (2.0 * d / (radius * radius))

    # peak radial slope of the profile, found on a dense grid once
    rr = np.linspace(0.0, 0.999, 4000)
    slope = np.exp(1.0 - 1.0 / (1.0 - rr ** 2)) / (1.0 - rr ** 2) ** 2 * 2.0 * rr
    lip = float(height * slope.max() / radius)
    return ScalarField(
        value=value, gradient=gradient, dim=center.size, lip=lip,
        smoothness=np.inf, support=("ball", center.copy(), float(radius)), name="bump",
    )


def fd_backed(value: Callable[[np.ndarray], float], dim: int, lip: float, name: str = "fd") -> ScalarField:
    """Wrap a bare evaluator with a finite-difference gradient (flagged as such)."""
    from .linalg import fd_gradient

    return ScalarField(
        value=value,
        gradient=lambda x: fd_gradient(value, x),
        dim=dim, lip=lip, smoothness=0.0, name=name, grad_is_fd=True,
    )


_LIBRARY = {"const", "coord", "frobsq", "det", "dist", "bump"}


def make_field(spec, dim: int, box=None) -> ScalarField:
    """Build a library field from an id string or {"id": ..., "params": ...} dict.

    Ids: ``const`` (value), ``coord`` (index), ``frobsq``, ``det`` (square
    matrix ambient), ``dist`` (point), ``bump`` (center, radius, height).
    """
    if isinstance(spec, ScalarField):
        return spec
    if isinstance(spec, str):
        spec = {"id": spec, "params": {}}
    fid = spec["id"]
    params = spec.get("params", {})
    if fid not in _LIBRARY:
        raise ValueError(f"unknown field id {fid!r}; known: {sorted(_LIBRARY)}")
    if fid == "const":
        return constant_field(float(params.get("value", 1.0)), dim)
    if fid == "coord":
        return coordinate_field(int(params.get("index", 0)), dim)
    if fid == "frobsq":
        return squared_norm_field(dim, box=box)
    if fid == "det":
        n = int(params.get("n", round(np.sqrt(dim))))
        if n * n != dim:
            raise ValueError(f"det field needs a square matrix ambient, got dim {dim}")
        return det_field(n, box=box)
    if fid == "dist":
        return distance_field(np.asarray(params.get("point", np.zeros(dim)), dtype=float))
    if fid == "bump":
        center = np.asarray(params.get("center", np.zeros(dim)), dtype=float)
        return bump_field(center, float(params.get("radius", 1.0)), float(params.get("height", 1.0)))
    raise AssertionError


def make_epsilon(spec, dim: int, box=None) -> ScalarField:
    """Tolerance field: a positive constant or any library field."""
    if isinstance(spec, (int, float)):
        return constant_field(float(spec), dim)
    return make_field(spec, dim, box=box)


def check_positive_on_box(field: ScalarField, box, samples: int = 2000, seed: int = 0) -> float:
    """Smallest sampled value of the field over the box; raises if nonpositive."""
    lo, hi = np.asarray(box[0], float), np.asarray(box[1], float)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(samples, field.dim))
    values = np.array([field(p) for p in pts])
    corners = np.stack([lo, hi])
    m = float(min(values.min(), min(field(c) for c in corners)))
    if m <= 0.0:
        raise ValueError(f"tolerance field must be strictly positive on the sampling box (min {m:.3e})")
    return m

"""Concrete stratified sets with analytic projections and clearances.

The catalog covers: affine/polyhedral complexes (loaded from JSON or built
programmatically), fixed-rank matrix strata with the positive-determinant
variant of the top stratum, spectral lifts of invariant model sets, and the
z = x*y half-surface that is Whitney-regular but not normally flat.

Matrix strata live on the flattened (row-major) ambient space R^{n*m}; the
structured view is used only inside the decompositions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .linalg import ContractViolation, orthogonal_projector, random_orthogonal, svd, sym_eig
from .strata import DomainError, NonUniqueProjection, ProjectionError, Stratification, Stratum

RANK_GAP_RTOL = 1e-8


# ---------------------------------------------------------------------------
# Affine and polyhedral strata
# ---------------------------------------------------------------------------

def project_affine(basepoint: np.ndarray, onb: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Exact orthogonal projection onto an affine subspace.

    ``onb`` has orthonormal rows spanning the subspace directions; a 0-row
    matrix projects onto the basepoint itself.
    """
    basepoint = np.asarray(basepoint, dtype=float)
    x = np.asarray(x, dtype=float)
    if onb.size == 0:
        return basepoint.copy()
    d = x - basepoint
    return basepoint + onb.T @ (onb @ d)


def affine_distance(basepoint: np.ndarray, onb: np.ndarray, x: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(x, float) - project_affine(basepoint, onb, x)))


def _orthonormalize_rows(basis: np.ndarray) -> np.ndarray:
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    if basis.size == 0:
        return basis.reshape(0, basis.shape[-1] if basis.ndim == 2 else 0)
    U, s, Vh = np.linalg.svd(basis, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * max(s[0], 1.0)))
    return Vh[:rank]


@dataclass(frozen=True)
class Face:
    """One relatively open polyhedral face.

    ``halfspaces`` constrain the local coordinates u (with respect to the
    orthonormal row basis): each (a, b) means a . u < b strictly.  A face
    without halfspaces is a whole affine subspace; ``chart_halfwidth`` bounds
    the sampling chart in that case.
    """

    id: str
    basepoint: np.ndarray
    onb: np.ndarray                                  # (d, n), orthonormal rows
    halfspaces: tuple[tuple[np.ndarray, float], ...] = ()
    parents: tuple[str, ...] = ()
    chart_halfwidth: float = 2.0

    @property
    def dim(self) -> int:
        return self.onb.shape[0]

    def local(self, x: np.ndarray) -> np.ndarray:
        if self.dim == 0:
            return np.zeros(0)
        return self.onb @ (np.asarray(x, float) - self.basepoint)

    def embed(self, u: np.ndarray) -> np.ndarray:
        if self.dim == 0:
            return self.basepoint.copy()
        return self.basepoint + self.onb.T @ np.asarray(u, float)

    def contains_local(self, u: np.ndarray, margin: float = 1e-12) -> bool:
        return all(float(a @ u) < b - margin for a, b in self.halfspaces)

    def project(self, x: np.ndarray) -> np.ndarray:
        """Metric projection onto the open face; defined only where the
        affine foot lands strictly inside the face."""
        y = project_affine(self.basepoint, self.onb, x)
        if self.halfspaces and not self.contains_local(self.local(y)):
            raise ProjectionError(f"projection onto face {self.id!r} falls outside the open face")
        return y

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.dim == 0:
            return np.tile(self.basepoint, (count, 1))
        out = np.empty((count, self.basepoint.size))
        hw = self.chart_halfwidth
        got = 0
        attempts = 0
        while got < count:
            u = rng.uniform(-hw, hw, size=self.dim)
            attempts += 1
            if attempts > 10000 * count:
                raise RuntimeError(f"rejection sampler stalled on face {self.id!r}")
            if self.halfspaces and not self.contains_local(u, margin=1e-6):
                continue
            out[got] = self.embed(u)
            got += 1
        return out


def _transitive_closure(pairs: set[tuple[str, str]]) -> set[tuple[str, str]]:
    closure = set(pairs)
    changed = True
    while changed:
        changed = False
        for a, b in list(closure):
            for c, d in list(closure):
                if b == c and (a, d) not in closure:
                    closure.add((a, d))
                    changed = True
    return closure


def polyhedral_stratification(source, name: str = "") -> Stratification:
    """Build a stratification from a polyhedral complex description.

    ``source`` is a path to a JSON document or an already-parsed dict with a
    ``faces`` list; each face carries ``id``, ``basepoint``, ``basis`` (row
    vectors, orthonormalized at load), optional strict ``halfspaces`` in local
    coordinates, and ``parents`` (ids of higher-dimensional faces whose
    closure contains this one).
    """
    if isinstance(source, (str, bytes)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = source
    faces = {}
    for spec in doc["faces"]:
        basepoint = np.asarray(spec["basepoint"], dtype=float)
        raw_basis = np.asarray(spec.get("basis", []), dtype=float)
        if raw_basis.size == 0:
            onb = np.zeros((0, basepoint.size))
            halfspaces: tuple = ()
        else:
            raw_basis = np.atleast_2d(raw_basis)
            onb = _orthonormalize_rows(raw_basis)
            if onb.shape[0] != raw_basis.shape[0]:
                raise ValueError(f"face {spec['id']!r} basis is rank-deficient")
            # Halfspaces are written in the coordinates of the supplied basis;
            # re-express them in the orthonormalized coordinates u_new = S u_old.
            S = onb @ raw_basis.T
            Sinv_T = np.linalg.inv(S).T
            halfspaces = tuple(
                (Sinv_T @ np.asarray(h["normal"], dtype=float), float(h["offset"]))
                for h in spec.get("halfspaces", [])
            )
        faces[spec["id"]] = Face(
            id=spec["id"],
            basepoint=basepoint,
            onb=onb,
            halfspaces=halfspaces,
            parents=tuple(spec.get("parents", [])),
            chart_halfwidth=float(spec.get("chart_halfwidth", 2.0)),
        )

    pairs = set()
    for f in faces.values():
        for p in f.parents:
            if p not in faces:
                raise ValueError(f"face {f.id!r} lists unknown parent {p!r}")
            pairs.add((f.id, p))
    pairs = _transitive_closure(pairs)

    ambient = next(iter(faces.values())).basepoint.size
    strata = []
    for f in sorted(faces.values(), key=lambda f: (f.dim, f.id)):
        lower = [faces[l] for l, h in pairs if h == f.id]
        unrelated = [
            g for g in faces.values()
            if g.id != f.id and g.dim <= f.dim
            and (g.id, f.id) not in pairs and (f.id, g.id) not in pairs
        ]
        tangent = f.onb.T @ f.onb

        def make_clearance(g: Face):
            return lambda y, g=g: affine_distance(g.basepoint, g.onb, y)

        strata.append(Stratum(
            id=f.id,
            dim=f.dim,
            ambient_dim=ambient,
            project=f.project,
            tangent_projector=lambda y, P=tangent: P,
            sampler=f.sample,
            frontier_clearances=tuple(make_clearance(g) for g in sorted(lower, key=lambda g: g.id)),
            extra_clearances=tuple(make_clearance(g) for g in sorted(unrelated, key=lambda g: g.id)),
            projection_differential=lambda y, P=tangent: P,
        ))
    return Stratification(
        strata=tuple(strata),
        frontier=frozenset(pairs),
        claimed_whitney=True,
        claimed_normally_flat=True,
        name=name or doc.get("name", "polyhedral"),
    )


def simplex2d_document() -> dict:
    """JSON-ready description of the standard 2-simplex complex in R^2."""
    v0, v1, v2 = [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]
    seg = [{"normal": [-1.0], "offset": 0.0}, {"normal": [1.0], "offset": 1.0}]
    tri = [
        {"normal": [-1.0, 0.0], "offset": 0.0},
        {"normal": [0.0, -1.0], "offset": 0.0},
        {"normal": [1.0, 1.0], "offset": 1.0},
    ]
    return {
        "name": "simplex2d",
        "faces": [
            {"id": "v0", "basepoint": v0, "basis": [], "parents": ["e01", "e02"]},
            {"id": "v1", "basepoint": v1, "basis": [], "parents": ["e01", "e12"]},
            {"id": "v2", "basepoint": v2, "basis": [], "parents": ["e02", "e12"]},
            {"id": "e01", "basepoint": v0, "basis": [[1.0, 0.0]], "halfspaces": seg, "parents": ["int"]},
            {"id": "e02", "basepoint": v0, "basis": [[0.0, 1.0]], "halfspaces": seg, "parents": ["int"]},
            {"id": "e12", "basepoint": v1, "basis": [[-1.0, 1.0]],
             "halfspaces": [{"normal": [-1.0], "offset": 0.0}, {"normal": [1.0], "offset": 1.0}],
             "parents": ["int"]},
            {"id": "int", "basepoint": v0, "basis": [[1.0, 0.0], [0.0, 1.0]], "halfspaces": tri, "parents": []},
        ],
    }


def simplex2d_stratification() -> Stratification:
    return polyhedral_stratification(simplex2d_document())


def axis_stratification(ambient_dim: int = 2) -> Stratification:
    """Single stratum: the first coordinate axis in R^n (empty frontier)."""
    basepoint = np.zeros(ambient_dim)
    basis = np.zeros((1, ambient_dim))
    basis[0, 0] = 1.0
    doc = {"name": f"axis-r{ambient_dim}",
           "faces": [{"id": "axis", "basepoint": list(basepoint), "basis": basis.tolist(), "parents": []}]}
    return polyhedral_stratification(doc)


def punctured_axis_stratification() -> Stratification:
    """The origin plus the punctured first axis in R^2 (two strata)."""

    def project_axis(x):
        x = np.asarray(x, dtype=float)
        if abs(x[0]) <= 1e-12:
            raise NonUniqueProjection("equidistant from both rays of the punctured axis")
        return np.array([x[0], 0.0])

    def sample_axis(count, rng):
        vals = rng.uniform(0.05, 2.0, size=count) * rng.choice([-1.0, 1.0], size=count)
        return np.stack([vals, np.zeros(count)], axis=1)

    tangent = np.diag([1.0, 0.0])
    axis = Stratum(
        id="axis", dim=1, ambient_dim=2,
        project=project_axis,
        tangent_projector=lambda y: tangent,
        sampler=sample_axis,
        frontier_clearances=(lambda y: float(abs(y[0])),),
        projection_differential=lambda y: tangent,
    )
    origin = Stratum(
        id="origin", dim=0, ambient_dim=2,
        project=lambda x: np.zeros(2),
        tangent_projector=lambda y: np.zeros((2, 2)),
        sampler=lambda count, rng: np.zeros((count, 2)),
    )
    return Stratification(
        strata=(origin, axis),
        frontier=frozenset({("origin", "axis")}),
        claimed_whitney=True,
        claimed_normally_flat=True,
        name="punctured-axis",
    )


# ---------------------------------------------------------------------------
# Fixed-rank matrix strata
# ---------------------------------------------------------------------------

def project_fixed_rank(X: np.ndarray, k: int, gap_rtol: float = RANK_GAP_RTOL) -> np.ndarray:
    """Nearest matrix of rank exactly k: truncation of the singular values.

    Requires a singular-value gap at position k; a tie (or effectively lower
    rank) raises NonUniqueProjection, which tube machinery treats as "outside".
    """
    X = np.asarray(X, dtype=float)
    if k == 0:
        return np.zeros_like(X)
    f = svd(X)
    s = f.sigma
    if k > s.size:
        raise ContractViolation(f"rank {k} exceeds min(n, m) = {s.size}")
    scale = s[0] if s[0] > 0 else 1.0
    trailing = s[k] if k < s.size else 0.0
    if s[k - 1] - trailing <= gap_rtol * scale:
        raise NonUniqueProjection(
            f"singular values {k} and {k+1} are within {gap_rtol:g} relative tolerance"
        )
    return f.U[:, :k] @ np.diag(s[:k]) @ f.V[:, :k].T


def tangent_projector_fixed_rank(Y: np.ndarray, k: int, rtol: float = RANK_GAP_RTOL) -> np.ndarray:
    """Projector (on row-major flattened matrices) onto the tangent space of
    the rank-k stratum at Y.

    In the SVD frame of Y the tangent matrices are those with vanishing
    trailing (n-k) x (m-k) block, so the normal projector is the Kronecker
    product of the trailing left/right subspace projectors.
    """
    Y = np.asarray(Y, dtype=float)
    n, m = Y.shape
    if k == 0:
        if float(np.linalg.norm(Y)) > 1e-10:
            raise DomainError("rank-0 tangent projector requested away from the zero matrix")
        return np.zeros((n * m, n * m))
    f = svd(Y)
    s = f.sigma
    scale = max(s[0], 1e-300)
    if s[k - 1] <= rtol * scale or (k < s.size and s[k] >= rtol * scale):
        raise DomainError(f"matrix does not have numerical rank {k}")
    U2 = f.U[:, k:]
    V2 = f.V[:, k:]
    if U2.shape[1] == 0 or V2.shape[1] == 0:
        return np.eye(n * m)
    normal = np.kron(U2 @ U2.T, V2 @ V2.T)  # row-major vec: (AZB) -> (A (x) B^T) z
    return np.eye(n * m) - normal


def _sigma(X: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(X, dtype=float), compute_uv=False)


def rank_stratification(
    n: int,
    m: int | None = None,
    positive_det: bool = False,
    sigma_range: tuple[float, float] = (0.4, 2.5),
    name: str = "",
) -> Stratification:
    """Rank strata of n x m matrices (n <= m), flattened row-major.

    With ``positive_det`` (square case) the top stratum is replaced by the
    open set of positive-determinant matrices, making the family stratify
    the matrices with nonnegative determinant.
    """
    m = n if m is None else m
    if n > m:
        raise ContractViolation("rank_stratification expects n <= m")
    if positive_det and n != m:
        raise ContractViolation("positive-determinant variant requires square matrices")
    ambient = n * m

    def mat(x):
        return np.asarray(x, dtype=float).reshape(n, m)

    def make_project(k, top):
        def project(x):
            X = mat(x)
            if top:
                s = _sigma(X)
                if s[-1] <= RANK_GAP_RTOL * max(s[0], 1.0):
                    raise ProjectionError("point is rank-deficient; open top stratum undefined there")
                if positive_det and np.linalg.det(X) <= 0.0:
                    raise ProjectionError("point has nonpositive determinant")
                return np.asarray(x, dtype=float).copy()
            return project_fixed_rank(X, k).reshape(-1)
        return project

    def make_tangent(k, top):
        def tangent(y):
            if top:
                return np.eye(ambient)
            return tangent_projector_fixed_rank(mat(y), k)
        return tangent

    def make_sampler(k, top):
        def sampler(count, rng):
            out = np.empty((count, ambient))
            for i in range(count):
                if k == 0:
                    out[i] = 0.0
                    continue
                while True:
                    U = random_orthogonal(n, rng)
                    V = random_orthogonal(m, rng)
                    s = np.sort(rng.uniform(*sigma_range, size=k))[::-1]
                    X = U[:, :k] @ np.diag(s) @ V[:, :k].T
                    if positive_det and top and np.linalg.det(X) <= 0.0:
                        U[:, 0] = -U[:, 0]
                        X = U[:, :k] @ np.diag(s) @ V[:, :k].T
                    sv = _sigma(X)
                    gaps_ok = k == 0 or sv[min(k, n) - 1] > 10 * RANK_GAP_RTOL
                    if gaps_ok:
                        break
                out[i] = X.reshape(-1)
            return out
        return sampler

    def sigma_clearance(k):
        # distance from a rank-k matrix to the closed set of rank <= k-1
        return lambda y: float(_sigma(mat(y))[k - 1])

    strata = []
    ids = []
    for k in range(n + 1):
        top = k == n
        sid = "rank-n+" if (top and positive_det) else f"rank-{k}"
        ids.append(sid)
        dim = k * (n + m - k)
        strata.append(Stratum(
            id=sid,
            dim=dim,
            ambient_dim=ambient,
            project=make_project(k, top),
            tangent_projector=make_tangent(k, top),
            sampler=make_sampler(k if not top else n, top),
            frontier_clearances=(sigma_clearance(k),) if k >= 1 else (),
        ))
    pairs = frozenset((ids[j], ids[k]) for j in range(n + 1) for k in range(j + 1, n + 1))
    default = f"rank-{n}x{m}" + ("-posdet" if positive_det else "")
    return Stratification(
        strata=tuple(strata),
        frontier=pairs,
        claimed_whitney=True,
        claimed_normally_flat=True,
        name=name or default,
        matrix_shape=(n, m),
    )


# ---------------------------------------------------------------------------
# Spectral lifts of invariant model sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralModelSet:
    """Invariant model set Q in R^n with a projection oracle.

    ``kind`` is "singular" (Q absolutely permutation-invariant, lifted through
    the singular-value map) or "eigen" (Q permutation-invariant, lifted
    through the eigenvalue map on symmetric matrices).  ``project`` must raise
    NonUniqueProjection on distance ties.
    """

    name: str
    kind: str
    contains: Callable[[np.ndarray], bool]
    project: Callable[[np.ndarray], np.ndarray]


def normalize_signed_perm(y: np.ndarray, kind: str = "singular") -> np.ndarray:
    """Canonical representative of y under the model set's invariance group.

    Singular kind: absolute values sorted descending (signed permutations);
    eigen kind: sorted descending (permutations only).
    """
    y = np.asarray(y, dtype=float)
    if kind == "singular":
        return np.sort(np.abs(y))[::-1]
    if kind == "eigen":
        return np.sort(y)[::-1]
    raise ContractViolation(f"unknown lift kind {kind!r}")


def project_spectral(model: SpectralModelSet, X: np.ndarray) -> np.ndarray:
    """Projection onto the lifted set: decompose, project the spectrum, recompose."""
    X = np.asarray(X, dtype=float)
    if model.kind == "singular":
        f = svd(X)
        z = normalize_signed_perm(model.project(f.sigma), "singular")
        n, m = X.shape
        S = np.zeros((n, m))
        S[: len(z), : len(z)] = np.diag(z)
        return f.U @ S @ f.V.T
    f = sym_eig(X)
    z = normalize_signed_perm(model.project(f.eigenvalues), "eigen")
    return f.U @ np.diag(z) @ f.U.T


def box_model(radius: float, n: int) -> SpectralModelSet:
    """Q = {|z_i| <= radius}: absolutely permutation-invariant; projection clamps."""
    return SpectralModelSet(
        name=f"box-{radius}",
        kind="singular",
        contains=lambda z: bool(np.all(np.abs(z) <= radius + 1e-12)),
        project=lambda z: np.clip(np.asarray(z, dtype=float), -radius, radius),
    )


def nonnegative_model(n: int) -> SpectralModelSet:
    """Q = R^n_+ lifted through eigenvalues: the PSD cone."""
    return SpectralModelSet(
        name="orthant",
        kind="eigen",
        contains=lambda z: bool(np.all(np.asarray(z) >= -1e-12)),
        project=lambda z: np.maximum(np.asarray(z, dtype=float), 0.0),
    )


def full_space_model(n: int, kind: str = "singular") -> SpectralModelSet:
    return SpectralModelSet(
        name="all",
        kind=kind,
        contains=lambda z: True,
        project=lambda z: np.asarray(z, dtype=float).copy(),
    )


def validate_invariance(model: SpectralModelSet, n: int, samples: int = 50, seed: int = 0) -> bool:
    """Sampled check that membership respects the claimed invariance group."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        z = rng.uniform(-2.0, 2.0, size=n)
        member = model.contains(z)
        perm = rng.permutation(n)
        zp = z[perm]
        if model.kind == "singular":
            zp = zp * rng.choice([-1.0, 1.0], size=n)
        if model.contains(zp) != member:
            return False
    return True


# ---------------------------------------------------------------------------
# The z = x*y counterexample surface
# ---------------------------------------------------------------------------

_GRAPH_TIE_TOL = 1e-12


def _graph_point(t: float, s: float) -> np.ndarray:
    return np.array([t, s, t * s])


def graph_project(x: np.ndarray, starts: Optional[Sequence[tuple[float, float]]] = None) -> np.ndarray:
    """Projection onto the open half-surface {(t, s, t*s) : t > 0}.

    Damped least squares on the graph parametrization with four deterministic
    starts; distinct minimizers at tied distance raise NonUniqueProjection,
    and minimizers escaping to the t = 0 boundary raise ProjectionError.
    """
    x = np.asarray(x, dtype=float)
    if starts is None:
        t0 = max(x[0], 0.2)
        starts = [(t0, x[1]), (0.2, x[1]), (1.0, 0.0), (t0, x[1] + 0.5)]

    def residual(p):
        t, s = p
        return np.array([t - x[0], s - x[1], t * s - x[2]])

    solutions = []
    for start in starts:
        res = least_squares(
            residual, np.array(start, dtype=float),
            bounds=([1e-14, -np.inf], [np.inf, np.inf]),
            xtol=3e-16, ftol=3e-16, gtol=3e-16, max_nfev=400,
        )
        t, s = res.x
        solutions.append((float(np.sum(residual(res.x) ** 2)), float(t), float(s)))
    solutions.sort()
    best = solutions[0]
    if best[1] <= 1e-8:
        raise ProjectionError("projection onto the open graph escapes to the t=0 boundary")
    # tie detection among distinct minimizers
    for d2, t, s in solutions[1:]:
        distinct = abs(t - best[1]) + abs(s - best[2]) > 1e-6
        if distinct and abs(d2 - best[0]) <= _GRAPH_TIE_TOL * (1.0 + best[0]):
            raise NonUniqueProjection("two graph points attain the projection distance")
    return _graph_point(best[1], best[2])


def graph_tangent_projector(y: np.ndarray) -> np.ndarray:
    t, s = float(y[0]), float(y[1])
    return orthogonal_projector([np.array([1.0, 0.0, s]), np.array([0.0, 1.0, t])])


def counterexample_stratification() -> Stratification:
    """Whitney-regular stratification of {z = x*y, x >= 0} that is not normally flat.

    Strata: the full y-axis and the open graph part over x > 0.
    """

    def project_axis(x):
        x = np.asarray(x, dtype=float)
        return np.array([0.0, x[1], 0.0])

    def sample_axis(count, rng):
        canonical = np.array([0.0, 0.75, -0.75, 1.5, -1.5])
        ys = np.concatenate([canonical, rng.uniform(-1.5, 1.5, size=max(0, count - len(canonical)))])[:count]
        return np.stack([np.zeros(count), ys, np.zeros(count)], axis=1)

    axis_tangent = np.zeros((3, 3))
    axis_tangent[1, 1] = 1.0

    axis = Stratum(
        id="yaxis", dim=1, ambient_dim=3,
        project=project_axis,
        tangent_projector=lambda y: axis_tangent,
        sampler=sample_axis,
        projection_differential=lambda y: axis_tangent,
    )

    def sample_graph(count, rng):
        out = np.empty((count, 3))
        for i in range(count):
            t = rng.uniform(0.15, 1.8)
            s = rng.uniform(-1.5, 1.5)
            out[i] = _graph_point(t, s)
        return out

    def graph_clearance(y):
        # exact distance from (t, s, t*s) to the y-axis
        return float(np.hypot(y[0], y[2]))

    graph = Stratum(
        id="graph", dim=2, ambient_dim=3,
        project=graph_project,
        tangent_projector=graph_tangent_projector,
        sampler=sample_graph,
        frontier_clearances=(graph_clearance,),
    )
    return Stratification(
        strata=(axis, graph),
        frontier=frozenset({("yaxis", "graph")}),
        claimed_whitney=True,
        claimed_normally_flat=False,
        name="counterexample",
    )


def counterexample_projections(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(projection onto the y-axis, projection onto the open graph part)."""
    x = np.asarray(x, dtype=float)
    axis = np.array([0.0, x[1], 0.0])
    return axis, graph_project(x)


# ---------------------------------------------------------------------------
# Catalog ids
# ---------------------------------------------------------------------------

def _parse_kv(body: str) -> dict:
    out = {}
    if body:
        for part in body.split(","):
            key, _, value = part.partition("=")
            out[key.strip()] = value.strip()
    return out


def load_problem(problem: str) -> Stratification:
    """Resolve a catalog id string like ``rank:n=3,m=3`` or ``counterexample``.

    Supported: ``rank:n=..,m=..``, ``Aplus:n=..``, ``poly:file=..``,
    ``counterexample``, ``axis:n=..``, ``simplex2d``, ``puncturedaxis``.
    """
    head, _, body = problem.partition(":")
    kv = _parse_kv(body)
    if head == "rank":
        n = int(kv["n"])
        m = int(kv.get("m", n))
        return rank_stratification(n, m)
    if head == "Aplus":
        n = int(kv["n"])
        return rank_stratification(n, n, positive_det=True, name=f"Aplus-{n}")
    if head == "poly":
        return polyhedral_stratification(kv["file"])
    if head == "counterexample":
        return counterexample_stratification()
    if head == "axis":
        return axis_stratification(int(kv.get("n", 2)))
    if head == "simplex2d":
        return simplex2d_stratification()
    if head == "puncturedaxis":
        return punctured_axis_stratification()
    raise ValueError(f"unknown catalog id {problem!r}")

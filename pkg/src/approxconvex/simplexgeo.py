"""Near-face search and subset selection for simplices inscribed in the
Euclidean unit sphere.

For an n-simplex with vertices on the unit sphere and the origin in its
interior, some k-face lies within alpha(n, k) = sqrt((n-k)/(n(k+1))) of
the origin, with equality for the regular simplex.  The face is found
constructively: take the nearest facet, recenter at its nearest point,
rescale the facet back onto a unit sphere, and recurse one dimension
down.  Nearest points on facets are computed by the Frank-Wolfe
quadratic kernel so that the whole module shares one code path with the
hull distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Vector, index_sort_key
from .optim import min_distance_over_simplex, min_quadratic_over_simplex

__all__ = ["FaceResult", "alpha", "near_face", "face_chain", "best_subset"]

_UNIT_TOL = 1e-9
_INTERIOR_TOL = 1e-10
_JITTER = 1e-8
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class FaceResult:
    """A chosen face (as vertex indices into the input) and its distance
    from the origin, recomputed directly on the chosen vertices."""

    vertex_index_set: tuple[int, ...]
    distance: float


def alpha(n: int, k: int) -> float:
    """Guaranteed distance sqrt((n-k)/(n(k+1))) to some k-face."""
    if n < 1:
        raise ValueError(f"alpha needs n >= 1, got {n}")
    if not 0 <= k <= n - 1:
        raise ValueError(f"alpha needs 0 <= k <= n-1, got k={k} for n={n}")
    return math.sqrt((n - k) / (n * (k + 1)))


def _as_matrix(vertices) -> np.ndarray:
    if isinstance(vertices, np.ndarray):
        return np.array(vertices, dtype=float)
    rows = list(vertices)
    if rows and isinstance(rows[0], Vector):
        universe = set()
        for v in rows:
            universe.update(v.support())
        indices = sorted(universe, key=index_sort_key)
        return np.array([v.to_array(indices) for v in rows])
    return np.array(rows, dtype=float)


def _origin_barycentric(V: np.ndarray) -> np.ndarray:
    """Affine coordinates of the origin; rejects degenerate input or an
    origin outside the affine hull."""
    s, d = V.shape
    G = V @ V.T
    K = np.zeros((s + 1, s + 1))
    K[:s, :s] = 2.0 * G
    K[:s, s] = 1.0
    K[s, :s] = 1.0
    rhs = np.zeros(s + 1)
    rhs[s] = 1.0
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    lam = sol[:s]
    resid = float(np.linalg.norm(V.T @ lam))
    if resid > 1e-7:
        raise ValueError(
            f"origin is {resid:.3e} from the affine hull of the vertices"
        )
    spread = V[1:] - V[0]
    sv = np.linalg.svd(spread, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]) or sv[0] / max(sv[-1], 1e-300) > 1e12:
        raise ValueError("degenerate simplex: vertices are affinely dependent")
    return lam


def _validated(vertices) -> np.ndarray:
    V = _as_matrix(vertices)
    if V.ndim != 2 or V.shape[0] < 2:
        raise ValueError("need at least two vertices")
    norms = np.linalg.norm(V, axis=1)
    if np.any(np.abs(norms - 1.0) > _UNIT_TOL):
        raise ValueError("vertices must lie on the unit sphere")
    lam = _origin_barycentric(V)
    if lam.min() < _INTERIOR_TOL:
        # Mirror the boundary case by a deterministic jitter and retry.
        rng = np.random.default_rng(0)
        W = V + _JITTER * rng.standard_normal(V.shape)
        W /= np.linalg.norm(W, axis=1, keepdims=True)
        lam = _origin_barycentric(W)
        if lam.min() <= 0.0:
            raise ValueError("origin is not strictly inside the simplex")
        V = W
    return V


def _descend(V: np.ndarray, stop_dim: int) -> list[tuple[int, ...]]:
    """Nearest-facet descent; returns the vertex index sets of every
    visited simplex, largest first, down to dimension stop_dim."""
    idx = list(range(V.shape[0]))
    coords = V.copy()
    chain = [tuple(idx)]
    while len(idx) - 1 > stop_dim:
        # Iterate facets so that on ties the lexicographically smallest
        # vertex set (drop the largest index) wins.
        order = sorted(range(len(idx)), key=lambda a: -idx[a])
        best_d2, best_a, best_q = np.inf, None, None
        for a in order:
            rows = [r for r in range(len(idx)) if r != a]
            Lf = coords[rows].T
            t, f = min_quadratic_over_simplex(Lf, np.zeros(Lf.shape[0]), tol=1e-13)
            if f < best_d2 - _TIE_TOL:
                best_d2, best_a = f, a
                best_q = Lf @ t.values
        rows = [r for r in range(len(idx)) if r != best_a]
        coords = coords[rows] - best_q
        norms = np.linalg.norm(coords, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        coords = coords / norms
        idx = [idx[r] for r in rows]
        chain.append(tuple(idx))
    return chain


def near_face(vertices, k: int) -> FaceResult:
    """A k-face within alpha(n, k) of the origin.

    ``vertices`` are the n+1 simplex vertices (rows of an array, or
    Vectors) on the unit sphere with the origin strictly inside; inputs
    on the boundary within 1e-10 are jittered by 1e-8 and retried.
    """
    V = _validated(vertices)
    n = V.shape[0] - 1
    if not 0 <= k <= n - 1:
        raise ValueError(f"near_face needs 0 <= k <= n-1, got k={k} for n={n}")
    subset = _descend(V, k)[-1]
    _, dist = min_distance_over_simplex(V[list(subset)].T, np.zeros(V.shape[1]), tol=1e-11)
    return FaceResult(vertex_index_set=tuple(sorted(subset)), distance=dist)


def face_chain(vertices) -> list[FaceResult]:
    """FaceResults for every k = 0..n-1 from a single descent."""
    V = _validated(vertices)
    chain = _descend(V, 0)
    out: list[FaceResult] = []
    for subset in reversed(chain[1:]):  # sizes 1..n, i.e. k = 0..n-1
        _, dist = min_distance_over_simplex(
            V[list(subset)].T, np.zeros(V.shape[1]), tol=1e-11
        )
        out.append(FaceResult(vertex_index_set=tuple(sorted(subset)), distance=dist))
    return out


def best_subset(points, j: int) -> FaceResult:
    """A j-element subset whose hull passes within sqrt((n+1-j)/(nj)) of
    the origin, given n+1 points of the unit ball whose hull contains 0.

    Normalizes the points onto the sphere, finds a near (j-1)-face there,
    and reports the distance for the original (un-normalized) subset,
    which can only be smaller.
    """
    P = _as_matrix(points)
    n = P.shape[0] - 1
    if not 1 <= j <= n:
        raise ValueError(f"best_subset needs 1 <= j <= n, got j={j} for n={n}")
    norms = np.linalg.norm(P, axis=1)
    if np.any(norms < 1e-12):
        raise ValueError("zero vector cannot be normalized onto the sphere")
    if np.any(norms > 1.0 + _UNIT_TOL):
        raise ValueError("points must lie in the unit ball")
    _, hull_dist = min_distance_over_simplex(P.T, np.zeros(P.shape[1]), tol=1e-9)
    if hull_dist > 1e-7:
        raise ValueError(f"origin is {hull_dist:.3e} from the hull of the points")
    Y = P / norms[:, None]
    face = near_face(Y, j - 1)
    subset = list(face.vertex_index_set)
    _, dist = min_distance_over_simplex(P[subset].T, np.zeros(P.shape[1]), tol=1e-11)
    return FaceResult(vertex_index_set=tuple(subset), distance=dist)

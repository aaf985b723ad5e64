import numpy as np
import pytest


def regular_simplex(n: int) -> np.ndarray:
    """n+1 unit vectors with common pairwise angle, centered at 0."""
    E = np.eye(n + 1)
    V = E - E.mean(axis=0)
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def origin_barycentric(V: np.ndarray) -> np.ndarray:
    s = V.shape[0]
    K = np.zeros((s + 1, s + 1))
    K[:s, :s] = 2.0 * V @ V.T
    K[:s, s] = 1.0
    K[s, :s] = 1.0
    rhs = np.zeros(s + 1)
    rhs[s] = 1.0
    return np.linalg.lstsq(K, rhs, rcond=None)[0][:s]


def random_interior_simplex(rng, n: int, margin: float = 1e-2) -> np.ndarray:
    """Unit-sphere vertices with the origin comfortably inside."""
    while True:
        V = rng.standard_normal((n + 1, n))
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        if origin_barycentric(V).min() > margin:
            return V


def exact_simplex_distance(P: np.ndarray) -> float:
    """Independent oracle: distance from 0 to the hull of the rows of P
    by enumerating all affine-support candidates (exact for small P)."""
    from itertools import combinations

    m = P.shape[0]
    best = np.inf
    for size in range(1, m + 1):
        for sub in combinations(range(m), size):
            Q = P[list(sub)]
            k = len(sub)
            K = np.zeros((k + 1, k + 1))
            K[:k, :k] = 2.0 * Q @ Q.T
            K[:k, k] = 1.0
            K[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            try:
                sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            except np.linalg.LinAlgError:
                continue
            mu = sol[:k]
            if mu.min() < -1e-10:
                continue
            mu = np.clip(mu, 0.0, None)
            mu /= mu.sum()
            best = min(best, float(np.linalg.norm(Q.T @ mu)))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(0)

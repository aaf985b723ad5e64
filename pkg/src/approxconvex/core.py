"""Sparse vectors over arbitrary finite index sets, the norms used
throughout (lp, weighted l1), and simplex grid generation.

Coordinates are 64-bit floats and all comparisons elsewhere use explicit
tolerances.  Vectors are sparse maps so that points of lp^n and points of
the tree space share one representation.  Everything here is immutable
after construction and safe to use concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .labels import TreeLabel, label_sort_key

__all__ = [
    "Vector",
    "SimplexPoint",
    "NormSpec",
    "lp_norm",
    "weighted_l1_norm",
    "simplex_grid",
    "simplex_grid_array",
    "index_sort_key",
]


def index_sort_key(index):
    """Total order over mixed index universes (ints before tree labels)."""
    if isinstance(index, TreeLabel):
        lev, name = label_sort_key(index)
        return (1, lev, name)
    return (0, index, "")


class Vector:
    """Finitely supported real vector over an opaque index set.

    Entries that are exactly zero are dropped, so two vectors are equal
    iff their stored entries agree.  Instances are immutable.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping | Iterable[tuple] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        self._entries = {k: float(v) for k, v in items if float(v) != 0.0}

    @classmethod
    def unit(cls, index) -> "Vector":
        return cls({index: 1.0})

    @classmethod
    def from_array(cls, values, indices=None) -> "Vector":
        values = np.asarray(values, dtype=float)
        if indices is None:
            indices = range(len(values))
        return cls(zip(indices, values))

    def get(self, index) -> float:
        return self._entries.get(index, 0.0)

    def items(self):
        return self._entries.items()

    def support(self):
        return self._entries.keys()

    def sorted_support(self) -> list:
        return sorted(self._entries, key=index_sort_key)

    def to_array(self, indices) -> np.ndarray:
        return np.array([self._entries.get(i, 0.0) for i in indices])

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __add__(self, other: "Vector") -> "Vector":
        merged = dict(self._entries)
        for k, v in other._entries.items():
            merged[k] = merged.get(k, 0.0) + v
        return Vector(merged)

    def __sub__(self, other: "Vector") -> "Vector":
        merged = dict(self._entries)
        for k, v in other._entries.items():
            merged[k] = merged.get(k, 0.0) - v
        return Vector(merged)

    def __mul__(self, scalar: float) -> "Vector":
        s = float(scalar)
        return Vector({k: v * s for k, v in self._entries.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "Vector":
        return self * -1.0

    def __eq__(self, other) -> bool:
        return isinstance(other, Vector) and self._entries == other._entries

    def __hash__(self):
        return hash(frozenset(self._entries.items()))

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{k!r}: {v:g}" for k, v in sorted(self._entries.items(), key=lambda kv: index_sort_key(kv[0]))
        )
        return f"Vector({{{inner}}})"


class SimplexPoint:
    """Probability vector: nonnegative coordinates summing to one.

    The sum is checked to within 1e-12 at construction; use
    :meth:`from_array` for numerically computed points that may need a
    tiny cleanup (clipping of roundoff negatives, renormalisation).
    """

    __slots__ = ("_t",)

    SUM_TOL = 1e-12

    def __init__(self, values: Iterable[float]):
        t = np.array(list(values), dtype=float)
        if t.ndim != 1 or len(t) == 0:
            raise ValueError("SimplexPoint needs a non-empty 1-d coordinate sequence")
        if np.any(t < 0.0):
            raise ValueError(f"negative coordinate in simplex point: {t}")
        if abs(float(t.sum()) - 1.0) > self.SUM_TOL:
            raise ValueError(f"coordinates sum to {t.sum()!r}, not 1")
        t.setflags(write=False)
        self._t = t

    @classmethod
    def from_array(cls, values, tol: float = 1e-9) -> "SimplexPoint":
        t = np.asarray(values, dtype=float)
        if np.any(t < -tol) or abs(float(t.sum()) - 1.0) > tol:
            raise ValueError(f"not a simplex point within tolerance {tol}: {t}")
        t = np.clip(t, 0.0, None)
        return cls(t / t.sum())

    @property
    def values(self) -> np.ndarray:
        return self._t

    @property
    def dim(self) -> int:
        return len(self._t)

    def __len__(self) -> int:
        return len(self._t)

    def __getitem__(self, i: int) -> float:
        return float(self._t[i])

    def __iter__(self):
        return iter(self._t.tolist())

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplexPoint) and np.array_equal(self._t, other._t)

    def __repr__(self) -> str:
        return f"SimplexPoint({self._t.tolist()})"


@dataclass(frozen=True)
class NormSpec:
    """Which norm a computation runs under.

    kind is one of ``lp`` (with exponent ``p`` in [1, inf]),
    ``weighted_l1`` (leaf weight ``M`` over tree labels) or ``tree``
    (the decomposition norm with scale ``M``; evaluated in the treespace
    module since it requires a linear program).
    """

    kind: str
    p: float = float("nan")
    M: float = float("nan")
    dim: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == "lp":
            if not self.p >= 1.0:
                raise ValueError(f"lp norm needs p >= 1, got {self.p}")
        elif self.kind in ("weighted_l1", "tree"):
            if not self.M > 0.0:
                raise ValueError(f"{self.kind} norm needs M > 0, got {self.M}")
        else:
            raise ValueError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def lp(cls, p: float, dim: int | None = None) -> "NormSpec":
        return cls(kind="lp", p=float(p), dim=dim)

    @classmethod
    def weighted_l1(cls, M: float) -> "NormSpec":
        return cls(kind="weighted_l1", M=float(M))

    @classmethod
    def tree(cls, M: float) -> "NormSpec":
        return cls(kind="tree", M=float(M))

    def norm_of(self, x: Vector) -> float:
        """Evaluate the norm of a sparse vector (lp and weighted_l1 only)."""
        if self.kind == "lp":
            return lp_norm(x, self.p)
        if self.kind == "weighted_l1":
            return weighted_l1_norm(x, self.M)
        raise ValueError("tree norm requires an LP; use treespace.tree_norm")


def lp_norm(x: Vector, p: float) -> float:
    """The lp norm of a sparse vector, p in [1, inf]."""
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"lp_norm needs p >= 1, got {p}")
    vals = [abs(v) for v in dict(x.items()).values()]
    if not vals:
        return 0.0
    if math.isinf(p):
        return max(vals)
    if p == 1.0:
        return float(sum(vals))
    if p == 2.0:
        return float(math.sqrt(sum(v * v for v in vals)))
    m = max(vals)
    return float(m * sum((v / m) ** p for v in vals) ** (1.0 / p))


def weighted_l1_norm(x: Vector, M: float) -> float:
    """Weighted l1 norm over tree labels: leaf entries carry weight M."""
    if not M > 0.0:
        raise ValueError(f"weighted_l1_norm needs M > 0, got {M}")
    total = 0.0
    for idx, v in x.items():
        if not isinstance(idx, TreeLabel):
            raise ValueError(f"weighted_l1_norm needs tree-label indices, got {idx!r}")
        total += (M if idx.is_leaf else 1.0) * abs(v)
    return total


def simplex_grid(n: int, m: int) -> list[SimplexPoint]:
    """All points of the standard simplex with coordinates k_i/m.

    Enumerates the compositions of m into n nonnegative parts; the count
    is C(m+n-1, n-1).
    """
    return [SimplexPoint(row) for row in simplex_grid_array(n, m)]


def simplex_grid_array(n: int, m: int) -> np.ndarray:
    """Like :func:`simplex_grid` but returning a (count, n) float array."""
    if n < 1 or m < 1:
        raise ValueError(f"simplex_grid needs n >= 1 and m >= 1, got n={n}, m={m}")
    if n == 1:
        return np.ones((1, 1))
    # Stars and bars: bar positions inside m+n-1 slots determine the counts.
    bars = np.array(list(combinations(range(m + n - 1), n - 1)), dtype=np.int64)
    first = bars[:, 0:1]
    gaps = np.diff(bars, axis=1) - 1
    last = (m + n - 2) - bars[:, -1:]
    counts = np.hstack([first, gaps, last])
    return counts / float(m)

"""Self-contained optimization kernels.

Three solvers used by every distance computation in the package:

* a dense two-phase simplex LP solver (Dantzig pricing with a permanent
  switch to Bland's rule once degeneracy is detected, which guarantees
  termination),
* minimization of ``f(t) = ||c - L t||^2`` over the probability simplex
  by Frank-Wolfe with exact line search and away steps (the away steps
  restore linear convergence, which plain Frank-Wolfe lacks on the
  boundary, so tight duality-gap certificates are reachable within the
  iteration budget),
* multi-start projected gradient descent for general smooth objectives
  over the simplex, whose result is only ever used as an upper bound.

Instances are immutable and solver state is confined to one invocation,
so concurrent solves of different instances are safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import SimplexPoint, simplex_grid_array

__all__ = [
    "ConvergenceError",
    "LPInstance",
    "LPSolution",
    "lp_solve",
    "min_quadratic_over_simplex",
    "min_distance_over_simplex",
    "min_smooth_over_simplex",
    "project_to_simplex",
]

FW_MAX_ITER = 10_000
PG_MAX_ITER = 2_000


class ConvergenceError(RuntimeError):
    """A solver failed to reach its certificate within budget."""


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------

_RELATIONS = ("<=", "=", ">=")


@dataclass(frozen=True)
class LPInstance:
    """A dense LP: optimize c.x subject to rows (a, rel, b) and bounds.

    ``bounds[j] = (lo, hi)`` with ``None`` for an unbounded side;
    the default for every variable is ``(0, None)``.
    """

    c: np.ndarray
    A: np.ndarray
    rel: tuple[str, ...]
    b: np.ndarray
    bounds: tuple[tuple[float | None, float | None], ...] = field(default=None)
    maximize: bool = False

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, len(c))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.ndim != 2 or A.shape[1] != len(c) or A.shape[0] != len(b):
            raise ValueError(
                f"inconsistent LP dimensions: c has {len(c)} entries, "
                f"A is {A.shape}, b has {len(b)} entries"
            )
        rel = tuple(self.rel)
        if len(rel) != A.shape[0] or any(r not in _RELATIONS for r in rel):
            raise ValueError(f"relations must be {_RELATIONS}, one per row")
        bounds = self.bounds
        if bounds is None:
            bounds = ((0.0, None),) * len(c)
        bounds = tuple((lo, hi) for lo, hi in bounds)
        if len(bounds) != len(c):
            raise ValueError("one bound pair per variable required")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rel", rel)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "bounds", bounds)

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class LPSolution:
    """Solver outcome. When status is ``optimal``, ``x`` is feasible
    within tolerance and ``gap`` is the certified primal-dual gap."""

    status: str  # optimal | infeasible | unbounded
    value: float | None = None
    x: np.ndarray | None = None
    dual: np.ndarray | None = None
    gap: float | None = None
    iterations: int = 0


class _Tableau:
    """Dense simplex tableau with two cost rows (phase 1 and phase 2)."""

    def __init__(self, A, b, cost2, n_real, art_cols, basis, tol):
        m = A.shape[0]
        self.T = np.array(A, dtype=float)  # copies: pivots must not alias inputs
        self.rhs = np.array(b, dtype=float)
        self.n_real = n_real  # columns that belong to the real LP
        self.basis = list(basis)
        self.tol = tol
        self.iterations = 0
        self.bland = False
        self._stall = 0
        # Phase-2 reduced costs (initial basis has zero real cost).
        self.r2 = np.concatenate([cost2, np.zeros(len(art_cols))])
        self.v2 = 0.0
        # Phase-1 reduced costs: cost 1 on artificials, priced out.
        self.r1 = np.zeros(self.T.shape[1])
        art_rows = [i for i, j in enumerate(self.basis) if j >= n_real]
        for i in art_rows:
            self.r1 -= self.T[i]
        self.r1[n_real:] += 1.0
        self.v1 = -float(self.rhs[art_rows].sum()) if art_rows else 0.0

    def _pivot(self, row, col):
        T, rhs = self.T, self.rhs
        piv = T[row, col]
        T[row] /= piv
        rhs[row] /= piv
        colvals = T[:, col].copy()
        colvals[row] = 0.0
        T -= np.outer(colvals, T[row])
        rhs -= colvals * rhs[row]
        if self.r1[col] != 0.0:
            self.v1 -= self.r1[col] * rhs[row]
            self.r1 = self.r1 - self.r1[col] * T[row]
        if self.r2[col] != 0.0:
            self.v2 -= self.r2[col] * rhs[row]
            self.r2 = self.r2 - self.r2[col] * T[row]
        self.basis[row] = col
        self.iterations += 1

    def run(self, phase: int, allowed: np.ndarray, max_iter: int) -> str:
        """Pivot until optimal/unbounded for the given phase objective."""
        r = self.r1 if phase == 1 else self.r2
        rc_tol = self.tol * (1.0 + float(np.abs(r).max(initial=0.0)))
        piv_tol = 1e-10
        while True:
            if self.iterations > max_iter:
                raise ConvergenceError(
                    f"simplex exceeded {max_iter} pivots in phase {phase}"
                )
            r = self.r1 if phase == 1 else self.r2
            candidates = allowed & (r < -rc_tol)
            if not candidates.any():
                return "optimal"
            if self.bland:
                col = int(np.flatnonzero(candidates)[0])
            else:
                masked = np.where(candidates, r, np.inf)
                col = int(np.argmin(masked))
            colvals = self.T[:, col]
            pos = colvals > piv_tol
            if not pos.any():
                return "unbounded"
            ratios = np.where(pos, self.rhs / np.where(pos, colvals, 1.0), np.inf)
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12)
            row = int(min(ties, key=lambda i: self.basis[i]))
            before = self.v1 if phase == 1 else self.v2
            self._pivot(row, col)
            after = self.v1 if phase == 1 else self.v2
            # v tracks the negated objective, so progress means v grows.
            if after - before <= 1e-13 * (1.0 + abs(before)):
                self._stall += 1
                if self._stall > 100:
                    self.bland = True
            else:
                self._stall = 0


def _standardize(lp: LPInstance):
    """Rewrite to min c.u, A u (rel) b with u >= 0 and b >= 0.

    Returns the pieces plus the bookkeeping needed to map a standard-form
    solution and its row duals back to the original instance.
    """
    n = lp.n_vars
    c = -lp.c if lp.maximize else lp.c
    shift = np.zeros(n)
    cols = []  # (orig_index, sign)
    extra_rows = []  # (col_in_std, rhs) for residual upper bounds
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            if hi is not None and hi < lo:
                return None  # trivially infeasible bounds
            shift[j] = lo
            cols.append((j, 1.0))
            if hi is not None:
                extra_rows.append((len(cols) - 1, hi - lo))
        elif hi is not None:
            shift[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    n_std = len(cols)
    A_std = np.zeros((lp.n_rows + len(extra_rows), n_std))
    for k, (j, sign) in enumerate(cols):
        A_std[: lp.n_rows, k] = sign * lp.A[:, j]
    b_std = np.concatenate([lp.b - lp.A @ shift, [r for _, r in extra_rows]])
    rel_std = list(lp.rel)
    for i, (k, _) in enumerate(extra_rows):
        A_std[lp.n_rows + i, k] = 1.0
        rel_std.append("<=")
    c_std = np.array([sign * c[j] for j, sign in cols])
    return A_std, b_std, rel_std, c_std, cols, shift


def lp_solve(lp: LPInstance, tol: float = 1e-9, max_iter: int | None = None) -> LPSolution:
    """Two-phase dense simplex with a certified duality gap.

    The reported optimum always comes with a dual vector whose objective
    agrees with the primal within ``tol`` (scaled); a numerical failure
    raises :class:`ConvergenceError` instead of returning a wrong
    ``optimal``.
    """
    std = _standardize(lp)
    if std is None:
        return LPSolution(status="infeasible")
    A, b, rel, c, cols, shift = std
    m, n_std = A.shape
    if max_iter is None:
        max_iter = 20_000 + 40 * (m + n_std)

    # Flip rows to make the rhs nonnegative, remembering the sign for duals.
    row_sign = np.where(b < 0.0, -1.0, 1.0)
    A = A * row_sign[:, None]
    b = b * row_sign
    rel = [
        r if (r == "=" or s > 0) else ("<=" if r == ">=" else ">=")
        for r, s in zip(rel, row_sign)
    ]

    # Slack / surplus columns; remember each row's initial identity column.
    n_slack = sum(1 for r in rel if r != "=")
    S = np.zeros((m, n_slack))
    slack_of_row = {}
    k = 0
    for i, r in enumerate(rel):
        if r == "<=":
            S[i, k] = 1.0
            slack_of_row[i] = n_std + k
            k += 1
        elif r == ">=":
            S[i, k] = -1.0
            k += 1
    body = np.hstack([A, S])
    n_real = n_std + n_slack
    cost2 = np.concatenate([c, np.zeros(n_slack)])

    # Artificials for rows without a natural basic column.
    art_rows = [i for i in range(m) if i not in slack_of_row]
    art = np.zeros((m, len(art_rows)))
    basis = [0] * m
    identity_col = [0] * m  # column whose reduced cost encodes the row dual
    for k, i in enumerate(art_rows):
        art[i, k] = 1.0
        basis[i] = n_real + k
        identity_col[i] = n_real + k
    for i, jcol in slack_of_row.items():
        basis[i] = jcol
        identity_col[i] = jcol

    tab = _Tableau(np.hstack([body, art]), b, cost2, n_real, art_rows, basis, tol)
    n_all = tab.T.shape[1]
    allowed = np.ones(n_all, dtype=bool)

    feas_tol = tol * (1.0 + float(np.abs(b).sum()))
    if art_rows:
        status = tab.run(1, allowed, max_iter)
        if status == "unbounded":  # phase-1 objective is bounded below by 0
            raise ConvergenceError("phase 1 reported unbounded: numerical failure")
        if -tab.v1 > feas_tol:  # v1 tracks the negated phase-1 objective
            return LPSolution(status="infeasible", iterations=tab.iterations)
        # Pivot leftover artificials out of the basis where possible; a row
        # with no usable entry is redundant and its artificial stays at zero.
        for i in range(m):
            if tab.basis[i] >= n_real:
                row = tab.T[i, :n_real]
                cand = np.flatnonzero(np.abs(row) > 1e-7)
                if len(cand):
                    tab._pivot(i, int(cand[0]))
    allowed[n_real:] = False

    status = tab.run(2, allowed, max_iter)
    if status == "unbounded":
        return LPSolution(status="unbounded", iterations=tab.iterations)

    # Recover the structural solution.
    x_std = np.zeros(n_all)
    for i, j in enumerate(tab.basis):
        x_std[j] = tab.rhs[i]
    x = np.array(shift, dtype=float)
    for k, (j, sign) in enumerate(cols):
        x[j] += sign * x_std[k]

    # Row duals from the reduced costs of the initial identity columns.
    y = np.zeros(m)
    for i in range(m):
        y[i] = -tab.r2[identity_col[i]]
    y *= row_sign
    # Report duals in the sense of the original problem, so that the dual
    # objective b.dual reproduces the reported optimal value.
    dual = -y[: lp.n_rows] if lp.maximize else y[: lp.n_rows]

    value_std = -tab.v2
    dual_std = float(np.dot(y * row_sign, b))  # duals in flipped coordinates
    gap = abs(value_std - dual_std)
    gap_tol = tol * (1.0 + abs(value_std) + abs(dual_std))
    value = float(np.dot(lp.c, x))

    # Certify feasibility on the original instance before reporting.
    resid = lp.A @ x - lp.b if lp.n_rows else np.zeros(0)
    for i, r in enumerate(lp.rel):
        scale = tol * (1.0 + abs(lp.b[i]))
        ok = (
            resid[i] <= scale
            if r == "<="
            else (resid[i] >= -scale if r == ">=" else abs(resid[i]) <= scale)
        )
        if not ok:
            raise ConvergenceError(
                f"optimal basis violates row {i} by {resid[i]:.3e}"
            )
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None and x[j] < lo - tol * (1 + abs(lo)):
            raise ConvergenceError(f"variable {j} violates its lower bound")
        if hi is not None and x[j] > hi + tol * (1 + abs(hi)):
            raise ConvergenceError(f"variable {j} violates its upper bound")
    if gap > gap_tol:
        raise ConvergenceError(
            f"duality gap {gap:.3e} exceeds tolerance {gap_tol:.3e}"
        )

    return LPSolution(
        status="optimal",
        value=value,
        x=x,
        dual=dual,
        gap=float(gap),
        iterations=tab.iterations,
    )


# ---------------------------------------------------------------------------
# Quadratics over the simplex: Frank-Wolfe with away steps
# ---------------------------------------------------------------------------


def _ls_polish(L, c, lam):
    """Project onto the affine hull of the active vertices (KKT solve).

    Returns an improved feasible point or None.  Near convergence the
    active support is exact, so this step typically lands on the true
    minimizer to machine precision.
    """
    active = np.flatnonzero(lam > 1e-12)
    if len(active) == 0:
        return None
    Ls = L[:, active]
    k = len(active)
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = 2.0 * (Ls.T @ Ls)
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.concatenate([2.0 * (Ls.T @ c), [1.0]])
    try:
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    except np.linalg.LinAlgError:
        return None
    mu = sol[:k]
    if mu.min() < -1e-10:
        return None
    mu = np.clip(mu, 0.0, None)
    s = mu.sum()
    if s <= 0.0:
        return None
    out = np.zeros_like(lam)
    out[active] = mu / s
    return out


def _active_set_guess(L, c):
    """Heuristic exact solve for small problems: equality-constrained
    least squares on a shrinking support, dropping the most negative
    coefficient until feasible.  Only ever used behind the Frank-Wolfe
    gap certificate, so a wrong guess costs nothing."""
    N = L.shape[1]
    support = list(range(N))
    for _ in range(N):
        Ls = L[:, support]
        k = len(Ls.T)
        K = np.zeros((k + 1, k + 1))
        K[:k, :k] = 2.0 * (Ls.T @ Ls)
        K[:k, k] = 1.0
        K[k, :k] = 1.0
        rhs = np.concatenate([2.0 * (Ls.T @ c), [1.0]])
        try:
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        except np.linalg.LinAlgError:
            return None
        mu = sol[:k]
        if mu.min() >= -1e-12:
            lam = np.zeros(N)
            mu = np.clip(mu, 0.0, None)
            s = mu.sum()
            if s <= 0.0:
                return None
            lam[support] = mu / s
            return lam
        support.pop(int(np.argmin(mu)))
        if not support:
            return None
    return None


def _afw(L, c, stop, max_iter):
    """Away-step Frank-Wolfe core for f(lam) = ||c - L lam||^2.

    ``stop(f, gap)`` decides termination from the current value and the
    Frank-Wolfe gap (a valid bound on f - f_min for this convex f).
    Returns (lam, f, gap, iterations).
    """
    L = np.asarray(L, dtype=float)
    c = np.asarray(c, dtype=float)
    d, N = L.shape
    if N == 1:
        r = L[:, 0] - c
        return np.ones(1), float(r @ r), 0.0, 0

    # Start from the best vertex, improved by an active-set guess when
    # the problem is small; the gap check below certifies either way.
    dists = ((L - c[:, None]) ** 2).sum(axis=0)
    lam = np.zeros(N)
    lam[int(np.argmin(dists))] = 1.0
    if N <= 32:
        guess = _active_set_guess(L, c)
        if guess is not None:
            rg = L @ guess - c
            if float(rg @ rg) < float(dists.min()):
                lam = guess
    r = L @ lam - c
    f = float(r @ r)
    gap = np.inf
    it = 0
    while it < max_iter:
        g = 2.0 * (L.T @ r)
        glam = float(g @ lam)
        s = int(np.argmin(g))
        gap = glam - float(g[s])
        if stop(f, gap):
            return lam, f, gap, it
        active = np.flatnonzero(lam > 0.0)
        v = int(active[np.argmax(g[active])])
        use_away = (float(g[v]) - glam) > gap and lam[v] < 1.0
        if use_away:
            step_dir = (r + c) - L[:, v]
            gamma_max = lam[v] / (1.0 - lam[v])
        else:
            step_dir = L[:, s] - (r + c)
            gamma_max = 1.0
        denom = float(step_dir @ step_dir)
        if denom <= 0.0:
            break
        gamma = -float(r @ step_dir) / denom
        gamma = min(max(gamma, 0.0), gamma_max)
        if gamma == 0.0:
            break
        if use_away:
            lam *= 1.0 + gamma
            lam[v] -= gamma
        else:
            lam *= 1.0 - gamma
            lam[s] += gamma
        r = r + gamma * step_dir
        it += 1
        if it % 100 == 0:
            # Periodic exact refresh against floating-point drift.
            np.clip(lam, 0.0, None, out=lam)
            lam /= lam.sum()
            r = L @ lam - c
        if it % 200 == 0:
            polished = _ls_polish(L, c, lam)
            if polished is not None:
                rp = L @ polished - c
                if float(rp @ rp) <= float(r @ r):
                    lam, r = polished, rp
        f = float(r @ r)

    np.clip(lam, 0.0, None, out=lam)
    lam /= lam.sum()
    r = L @ lam - c
    f = float(r @ r)
    polished = _ls_polish(L, c, lam)
    if polished is not None:
        rp = L @ polished - c
        fp = float(rp @ rp)
        if fp <= f:
            lam, r, f = polished, rp, fp
    g = 2.0 * (L.T @ r)
    gap = float(g @ lam) - float(g.min())
    if stop(f, gap):
        return lam, f, gap, it
    raise ConvergenceError(
        f"Frank-Wolfe gap {gap:.3e} after {it} iterations (budget {max_iter})"
    )


def min_quadratic_over_simplex(
    L: np.ndarray,
    c: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = FW_MAX_ITER,
) -> tuple[SimplexPoint, float]:
    """Minimize ``||c - L t||^2`` over the probability simplex.

    Returns ``(t, value)`` with ``value - min <= tol``, certified by the
    Frank-Wolfe duality gap; raises :class:`ConvergenceError` if the gap
    cannot be certified within the iteration budget.
    """
    lam, f, _, _ = _afw(L, c, lambda f_, g_: g_ <= tol, max_iter)
    return SimplexPoint.from_array(lam), f


def min_distance_over_simplex(
    L: np.ndarray,
    c: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = FW_MAX_ITER,
) -> tuple[SimplexPoint, float]:
    """Minimize ``||c - L t||`` (the distance itself) to accuracy ``tol``.

    Same kernel as :func:`min_quadratic_over_simplex` but with the gap
    threshold adapted to the distance scale, so the returned distance is
    within ``tol`` of the true minimum even when the optimum is far from
    zero.
    """

    def stop(f, gap):
        # The 1e-15 floor is the float64 limit: |sqrt(f)-sqrt(f*)| <=
        # sqrt(gap), so it still pins the distance to ~3e-8 absolute.
        return gap <= max(tol * tol, 0.5 * tol * np.sqrt(max(f, 0.0)), 1e-15 * (1.0 + abs(f)))

    lam, f, _, _ = _afw(L, c, stop, max_iter)
    return SimplexPoint.from_array(lam), float(np.sqrt(max(f, 0.0)))


# ---------------------------------------------------------------------------
# Smooth minimization over the simplex: multi-start projected gradient
# ---------------------------------------------------------------------------


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort method)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.flatnonzero(u * np.arange(1, len(v) + 1) > (css - 1.0))[-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.clip(v - theta, 0.0, None)


def _pg_descent(f, grad, t0, tol, max_iter):
    t = np.array(t0, dtype=float)
    fx = f(t)
    # Scale the first trial step to the local gradient so that boundary
    # starts (where capped entropy-type gradients are huge) do not get
    # thrown onto a symmetric vertex in one jump.
    g0 = float(np.linalg.norm(grad(t)))
    step = 1.0 / (1.0 + g0)
    for _ in range(max_iter):
        g = grad(t)
        moved = False
        while step > 1e-18:
            t_new = project_to_simplex(t - step * g)
            delta = t_new - t
            nd2 = float(delta @ delta)
            if nd2 == 0.0:
                break
            f_new = f(t_new)
            if f_new <= fx - 1e-4 * nd2 / step:
                t, fx = t_new, f_new
                step = min(step * 1.5, 1e6)
                moved = True
                break
            step *= 0.5
        if not moved:
            break
        if np.sqrt(nd2) <= max(tol, 1e-13):
            break
    return t, fx


def min_smooth_over_simplex(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    n: int,
    starts: int = 8,
    tol: float = 1e-9,
    max_iter: int = PG_MAX_ITER,
    seed: int = 0,
) -> tuple[SimplexPoint, float]:
    """Best local minimizer found by multi-start projected gradient.

    Starts from every vertex, the barycenter, coarse grid points,
    asymmetric two-support edge points (symmetric edge midpoints can be
    fixed points of the projected dynamics) and ``starts`` seeded
    Dirichlet samples.  The returned value is an upper bound on the true
    minimum; no global certificate is implied.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if n == 1:
        t = np.ones(1)
        return SimplexPoint(t), float(f(t))
    points = [np.eye(n)[i] for i in range(n)]
    points.append(np.full(n, 1.0 / n))
    if n <= 12:
        points.extend(simplex_grid_array(n, 2))
    if n <= 20:
        for i in range(n):
            for j in range(n):
                if i != j:
                    t = np.zeros(n)
                    t[i], t[j] = 0.9, 0.1
                    points.append(t)
    rng = np.random.default_rng(seed)
    for _ in range(max(0, starts)):
        points.append(rng.dirichlet(np.ones(n)))
    best_t, best_f = None, np.inf
    for t0 in points:
        t, fx = _pg_descent(f, grad, t0, tol, max_iter)
        if fx < best_f:
            best_t, best_f = t, fx
    return SimplexPoint.from_array(best_t), float(best_f)

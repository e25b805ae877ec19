"""The θ half-step as a linear program, and a dense two-phase simplex solver.

With (w, b) fixed, the hinge sum over θ on the simplex is rewritten with
per-sample slacks ε_i ≥ hinge_i:

    min  sum_i ε_i
    s.t. sum_k θ_k = 1,  y_i w'X_i θ + ε_i ≥ 1 - y_i b,  θ ≥ 0, ε ≥ 0
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import FramePoolError, HyperplaneModel, LabeledDataset, PoolingWeights, _check_dims

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-10
BLAND_AFTER = 50


class LPError(FramePoolError, RuntimeError):
    pass


@dataclass(frozen=True)
class StandardFormResult:
    x: np.ndarray
    objective: float
    iterations: int


def _crash_basis(A: np.ndarray) -> np.ndarray:
    """Per row, the first column equal to that row's unit vector, or -1."""
    rows = A.shape[0]
    basis = np.full(rows, -1, dtype=np.int64)
    nz = A != 0
    unit = (nz.sum(axis=0) == 1) & (A.max(axis=0) == 1.0)
    for j in np.flatnonzero(unit):
        r = int(np.argmax(nz[:, j]))
        if basis[r] < 0:
            basis[r] = j
    return basis


def linprog_standard(c, A, b, tol: float = PIVOT_TOL, max_iter: int | None = None,
                     bland_after: int = BLAND_AFTER) -> StandardFormResult:
    """Minimize ``c'x`` subject to ``Ax = b``, ``x >= 0`` (two-phase simplex).

    Returns an optimal basic feasible solution. Raises :class:`LPError` on
    infeasibility, unboundedness or iteration exhaustion.
    """
    c = np.asarray(c, dtype=np.float64)
    A = np.array(A, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    rows, cols = A.shape
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    if max_iter is None:
        max_iter = 50 * (rows + cols) + 1000

    basis = _crash_basis(A)
    missing = np.flatnonzero(basis < 0)
    n_art = missing.size
    tab = np.zeros((rows + 1, cols + n_art + 1))
    tab[:rows, :cols] = A
    tab[:rows, -1] = b
    for k, r in enumerate(missing):
        tab[r, cols + k] = 1.0
        basis[r] = cols + k
    total_iter = 0

    if n_art:
        tab[rows, :] = -tab[missing].sum(axis=0)
        tab[rows, cols:cols + n_art] = 0.0
        status, it = _kernels.simplex_iterate(tab, basis, cols, tol, max_iter, bland_after)
        total_iter += it
        if status != _kernels.OPTIMAL:
            raise LPError(f"phase 1 stopped with status {status} after {it} iterations")
        infeas = -tab[rows, -1]
        if infeas > 1e-8 * max(1.0, np.abs(b).max()):
            raise LPError(f"problem is infeasible (phase 1 residual {infeas:.3g})")
        keep = np.ones(rows + 1, dtype=bool)
        for r in np.flatnonzero(basis >= cols):
            cand = np.flatnonzero(np.abs(tab[r, :cols]) > tol)
            if cand.size:
                _kernels.pivot(tab, int(r), int(cand[0]))
                basis[r] = cand[0]
            else:
                keep[r] = False  # redundant row
        tab = np.ascontiguousarray(np.delete(tab[keep], np.s_[cols:cols + n_art], axis=1))
        basis = np.ascontiguousarray(basis[keep[:rows]])
        A_kept, b_kept = A[keep[:rows]], b[keep[:rows]]
    else:
        A_kept, b_kept = A, b

    m = tab.shape[0] - 1
    tab[m, :] = 0.0
    tab[m, :cols] = c
    for r in range(m):
        cb = c[basis[r]]
        if cb != 0.0:
            tab[m] -= cb * tab[r]
    status, it = _kernels.simplex_iterate(tab, basis, cols, tol, max_iter, bland_after)
    total_iter += it
    if status == _kernels.UNBOUNDED:
        raise LPError("problem is unbounded")
    if status != _kernels.OPTIMAL:
        raise LPError(
            f"simplex did not converge: {total_iter} iterations, "
            f"Bland fallback after {bland_after} degenerate pivots, "
            f"min reduced cost {tab[m, :cols].min():.3g}"
        )

    x = np.zeros(cols)
    x[basis] = tab[:m, -1]
    # refine the basic solution against the original data
    try:
        xb = np.linalg.solve(A_kept[:, basis], b_kept)
    except np.linalg.LinAlgError:
        xb = None
    if xb is not None and np.all(np.isfinite(xb)):
        if np.abs(xb - x[basis]).max() <= 1e-6 * (1.0 + np.abs(xb).max()):
            x[basis] = xb
    x[np.abs(x) < 1e-14] = 0.0
    return StandardFormResult(x, float(c @ x), total_iter)


@dataclass(frozen=True)
class ThetaLpProblem:
    """Variables ``α = [θ (T), ε (n)]``.

    ``cost`` is zeros over θ then ones over ε, ``equality`` is ones over θ
    with right-hand side 1, and row ``i`` of ``inequality`` is
    ``[y_i w'X_i, e_i]`` constrained ``>= ineq_rhs[i] = 1 - y_i b``.
    """

    cost: np.ndarray
    equality: np.ndarray
    inequality: np.ndarray
    ineq_rhs: np.ndarray
    T: int
    n: int

    @property
    def margin_coefs(self) -> np.ndarray:
        """The ``(n, T)`` block ``y_i w'X_i``."""
        return self.inequality[:, : self.T]

    def hinge(self, theta: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, self.ineq_rhs - self.margin_coefs @ theta)


@dataclass(frozen=True)
class ThetaSolution:
    weights: PoolingWeights
    epsilons: np.ndarray
    raw_epsilons: np.ndarray
    optimal_cost: float
    iterations: int

    @property
    def theta(self) -> np.ndarray:
        return self.weights.theta


def build_theta_lp(dataset: LabeledDataset, model: HyperplaneModel) -> ThetaLpProblem:
    _check_dims(dataset, model, PoolingWeights(np.full(dataset.T, 1.0 / dataset.T)))
    T, n = dataset.T, len(dataset)
    y = dataset.labels
    coefs = y[:, None] * np.einsum("m,nmt->nt", model.w, dataset.tensor)
    cost = np.concatenate([np.zeros(T), np.ones(n)])
    equality = np.concatenate([np.ones(T), np.zeros(n)])
    inequality = np.hstack([coefs, np.eye(n)])
    rhs = 1.0 - y * model.b
    for a in (cost, equality, inequality, rhs):
        a.setflags(write=False)
    return ThetaLpProblem(cost, equality, inequality, rhs, T, n)


def solve_theta_lp(problem: ThetaLpProblem) -> ThetaSolution:
    T, n = problem.T, problem.n
    # standard form: [θ, ε, surplus s], rows: simplex equality, then ηα - s = rhs
    A = np.zeros((n + 1, T + 2 * n))
    A[0, : T + n] = problem.equality
    A[1:, : T + n] = problem.inequality
    A[1:, T + n:] = -np.eye(n)
    b = np.concatenate([[1.0], problem.ineq_rhs])
    c = np.concatenate([problem.cost, np.zeros(n)])
    res = linprog_standard(c, A, b)

    theta = res.x[:T]
    if theta.min() < -1e-9 or abs(theta.sum() - 1.0) > 1e-9:
        raise LPError(
            f"θ left the simplex (min {theta.min():.3g}, sum {theta.sum():.12g}) "
            f"after {res.iterations} iterations"
        )
    weights = PoolingWeights.from_raw(theta)
    eps = problem.hinge(weights.theta)
    cost = float(eps.sum())
    if abs(cost - res.objective) > 1e-7 * (1.0 + abs(cost)):
        raise LPError(
            f"LP objective {res.objective!r} disagrees with hinge sum {cost!r} "
            f"after {res.iterations} iterations"
        )
    return ThetaSolution(weights, eps, res.x[T: T + n].copy(), cost, res.iterations)


def simplex_lattice(T: int, step: float) -> np.ndarray:
    """All points of the simplex whose coordinates are multiples of ``step``."""
    K = round(1.0 / step)
    if abs(K * step - 1.0) > 1e-9:
        raise ValueError(f"grid step {step} does not divide 1")
    pts = []
    for bars in itertools.combinations(range(K + T - 1), T - 1):
        edges = (-1,) + bars + (K + T - 1,)
        pts.append([edges[k + 1] - edges[k] - 1 for k in range(T)])
    return np.array(pts, dtype=np.float64) / K


def brute_force_theta(dataset: LabeledDataset, model: HyperplaneModel, grid_step: float = 0.01):
    """Exhaustive hinge-sum minimization over a simplex lattice (test oracle)."""
    if dataset.T > 4 or grid_step < 0.01:
        raise ValueError("brute force limited to T <= 4 and grid_step >= 0.01")
    lattice = simplex_lattice(dataset.T, grid_step)
    problem = build_theta_lp(dataset, model)
    margins = problem.margin_coefs @ lattice.T
    costs = np.maximum(0.0, problem.ineq_rhs[:, None] - margins).sum(axis=0)
    best = int(np.argmin(costs))
    return lattice[best], float(costs[best])

"""Linear hinge-loss SVM for the (w, b) half-step.

Solves ``min_{w,b} C * sum_i max(0, 1 - y_i (w'x_i + b)) + 0.5 w'w`` with an
unregularized bias. A short run of two-coordinate dual descent (SMO, the
compiled kernel) gives a warm start; active-set iterations on the dual QP
then finish the job exactly. The bias is set to an exact minimizer of the
hinge sum for the final ``w`` and a solve is accepted only once the
duality gap is within ``SvmConfig.tolerance``.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .core import FramePoolError, HyperplaneModel

log = logging.getLogger(__name__)


class SvmError(FramePoolError):
    pass


class SingleClassError(SvmError, ValueError):
    pass


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    tolerance: float = 1e-6
    max_passes: int = 1000
    standardize: bool = False

    def __post_init__(self):
        if not (self.C > 0 and self.tolerance > 0 and self.max_passes > 0):
            raise ValueError(f"SvmConfig fields must be positive: {self}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SvmSolution:
    model: HyperplaneModel
    alpha: np.ndarray
    primal: float
    dual: float
    iterations: int

    @property
    def gap(self) -> float:
        return self.primal - self.dual


def primal_objective(X, y, w, b, C) -> float:
    margins = y * (X @ w + b)
    return float(C * np.maximum(0.0, 1.0 - margins).sum() + 0.5 * w @ w)


def optimal_bias(f: np.ndarray, y: np.ndarray) -> float:
    """Exact minimizer of ``sum_i max(0, 1 - y_i (f_i + b))`` over ``b``.

    The hinge sum is piecewise linear with kinks at ``b = y_i - f_i``; its
    slope at ``b`` is ``#{neg: b > kink} - #{pos: b < kink}``. Returns the
    midpoint of the optimal interval.
    """
    kinks = y - f
    pos = np.sort(kinks[y > 0])
    neg = np.sort(kinks[y < 0])
    cand = np.unique(kinks)

    def slope(side):
        return np.searchsorted(neg, cand, side=side) - (pos.size - np.searchsorted(pos, cand, side=side))

    # a kink is optimal when the slope changes sign across it
    opt = cand[(slope("left") <= 0) & (slope("right") >= 0)]
    if opt.size == 0:  # pragma: no cover - impossible with both classes present
        raise SvmError("hinge sum has no minimizer; is one class missing?")
    return float(0.5 * (opt[0] + opt[-1]))


def refine_active_set(X, y, C, alpha, max_iter=None, tol=1e-12):
    """Primal active-set iterations on the dual QP, warm-started from ``alpha``.

    SMO reaches the neighbourhood of the optimum quickly but crawls once
    there, because the linear-kernel dual is rank-deficient. Each iteration
    here takes the exact Newton step restricted to the free variables (or a
    null-space descent direction when the restricted problem is unbounded),
    stops at the first bound it hits, and otherwise releases the bound
    variable with the most violated multiplier. ``alpha`` must be feasible;
    the returned iterate is feasible too.
    """
    n = X.shape[0]
    Z = y[:, None] * X
    alpha = alpha.copy()
    free = (alpha > 0) & (alpha < C)
    if max_iter is None:
        max_iter = 4 * n + 100
    for _ in range(max_iter):
        w = Z.T @ alpha
        g = Z @ w - 1.0
        F = np.flatnonzero(free)
        nu = None
        if F.size:
            ZF, yF = Z[F], y[F]
            k = F.size
            K = np.zeros((k + 1, k + 1))
            K[:k, :k] = ZF @ ZF.T
            K[:k, k] = yF
            K[k, :k] = yF
            rhs = np.append(-g[F], 0.0)
            evals, evecs = np.linalg.eigh(K)
            small = np.abs(evals) <= 1e-10 * max(1.0, np.abs(evals).max())
            drift = evecs[:, small].T @ rhs
            unbounded = drift.size > 0 and np.abs(drift).max() > 1e-9 * (1.0 + np.abs(rhs).max())
            if unbounded:
                step = (evecs[:, small] @ drift)[:k]
            else:
                inv = np.where(small, 0.0, 1.0 / np.where(small, 1.0, evals))
                sol = evecs @ (inv * (evecs.T @ rhs))
                step, nu = sol[:k], float(sol[k])
            if unbounded or np.abs(step).max() > tol:
                a = alpha[F]
                with np.errstate(divide="ignore", invalid="ignore"):
                    t_hi = np.where(step > tol, (C - a) / step, np.inf)
                    t_lo = np.where(step < -tol, -a / step, np.inf)
                t_bound = np.minimum(t_hi, t_lo)
                blk = int(np.argmin(t_bound))
                t = float(t_bound[blk])
                if unbounded or t < 1.0:
                    if not np.isfinite(t):  # pragma: no cover - dual bounded by the box
                        return alpha
                    alpha[F] = np.clip(a + t * step, 0.0, C)
                    alpha[F[blk]] = C if t_hi[blk] <= t_lo[blk] else 0.0
                    free[F[blk]] = False
                    continue
                alpha[F] = np.clip(a + step, 0.0, C)
                w = Z.T @ alpha
                g = Z @ w - 1.0
        if nu is None:
            nu = optimal_bias(X @ w, y)
        kkt = g + nu * y
        viol = np.where(free, 0.0, np.where(alpha <= 0, -kkt, kkt))
        i = int(np.argmax(viol))
        if viol[i] <= tol * (1.0 + np.abs(g).max()):
            return alpha
        free[i] = True
    return alpha


def _certify(X, y, alpha, C):
    w = (alpha * y) @ X
    b = optimal_bias(X @ w, y)
    return w, b, primal_objective(X, y, w, b, C), float(alpha.sum() - 0.5 * w @ w)


def _standardize(X):
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    return (X - mu) / sd, mu, sd


def train_svm_arrays(X, y, config: SvmConfig = SvmConfig()) -> SvmSolution:
    """Train on an ``(n, m)`` array of pooled vectors and ±1 labels."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError(f"expected X (n, m) and y (n,), got {X.shape} and {y.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite feature values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if X.shape[0] < 2 or not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClassError("both classes are required to train; skip this event")

    if config.standardize:
        Xs, mu, sd = _standardize(X)
    else:
        Xs = X
    C = config.C
    n, m = Xs.shape
    alpha = np.zeros(n)
    budget = config.max_passes * n
    stage = 20 * n
    eps = 1e-3
    total = 0
    while True:
        w = (alpha * y) @ Xs
        it, _ = _kernels.smo(Xs, y, C, eps, min(stage, budget - total), alpha, w)
        total += it
        w, b, primal, dual = _certify(Xs, y, alpha, C)
        if primal - dual <= config.tolerance:
            break
        # active-set steps only decrease the dual objective, so keep them
        alpha = refine_active_set(Xs, y, C, alpha)
        w, b, primal, dual = _certify(Xs, y, alpha, C)
        if primal - dual <= config.tolerance:
            break
        if total >= budget or eps < 1e-14:
            raise SvmError(
                f"SVM did not reach duality gap {config.tolerance:g} "
                f"(gap {primal - dual:.3g} after {total} iterations)"
            )
        eps *= 0.1
        stage *= 2
    log.debug("svm: n=%d m=%d iters=%d gap=%.3g", n, m, total, primal - dual)

    if config.standardize:
        w_out = w / sd
        b_out = b - float(w_out @ mu)
        model = HyperplaneModel(w_out, b_out)
        primal = primal_objective(X, y, model.w, model.b, C)
    else:
        model = HyperplaneModel(w, b)
    return SvmSolution(model, alpha, primal, dual, total)


def train_svm(pooled, config: SvmConfig = SvmConfig()) -> HyperplaneModel:
    """Train from a list of ``(vector, label)`` pairs."""
    pooled = list(pooled)
    if not pooled:
        raise SingleClassError("no training data")
    X = np.array([np.asarray(v, dtype=np.float64) for v, _ in pooled])
    y = np.array([lab for _, lab in pooled], dtype=np.float64)
    return train_svm_arrays(X, y, config).model

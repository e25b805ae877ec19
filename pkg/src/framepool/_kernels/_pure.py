"""Pure numpy kernels; reference twin of ``_fast.pyx``."""
import numpy as np

TAU = 1e-12

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2


def smo(X, y, C, eps, max_iter, alpha, w):
    """Two-coordinate descent on the bias-constrained hinge SVM dual.

    Minimizes ``0.5 a'Qa - sum(a)`` with ``0 <= a <= C`` and ``y'a = 0``,
    ``Q_ij = y_i y_j x_i'x_j``, using second-order working-set selection.
    ``alpha`` and ``w = sum a_i y_i x_i`` are updated in place.
    Returns ``(iterations, converged)``.
    """
    n = X.shape[0]
    kdiag = np.einsum("ij,ij->i", X, X)
    G = y * (X @ w) - 1.0
    pos = y > 0
    for it in range(max_iter):
        myg = -y * G
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        if not up.any() or not low.any():
            return it, True
        vals = np.where(up, myg, -np.inf)
        i = int(np.argmax(vals))
        gmax = vals[i]
        gmin = np.where(low, myg, np.inf).min()
        if gmax - gmin < eps:
            return it, True

        ki = X @ X[i]
        grad_diff = gmax - myg
        quad = kdiag[i] + kdiag - 2.0 * ki
        quad[quad <= 0] = TAU
        score = np.where(low & (grad_diff > 0), -(grad_diff * grad_diff) / quad, np.inf)
        j = int(np.argmin(score))

        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        ai, aj = ai_old, aj_old
        if yi != yj:
            qc = kdiag[i] + kdiag[j] - 2.0 * ki[j]
            if qc <= 0:
                qc = TAU
            delta = (-G[i] - G[j]) / qc
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            elif ai < 0:
                ai = 0.0
                aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            elif aj > C:
                aj = C
                ai = C + diff
        else:
            qc = kdiag[i] + kdiag[j] - 2.0 * ki[j]
            if qc <= 0:
                qc = TAU
            delta = (G[i] - G[j]) / qc
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
            elif aj < 0:
                aj = 0.0
                ai = total
            if total > C:
                if aj > C:
                    aj = C
                    ai = total - C
            elif ai < 0:
                ai = 0.0
                aj = total

        dai = ai - ai_old
        daj = aj - aj_old
        alpha[i] = ai
        alpha[j] = aj
        step = dai * yi * X[i] + daj * yj * X[j]
        w += step
        G += y * (X @ step)
    return max_iter, False


def simplex_iterate(tab, basis, n_cols, tol, max_iter, bland_after):
    """Primal simplex iterations on a dense tableau, in place.

    Rows ``0..r-1`` are constraints with the right-hand side in the last
    column; the last row holds reduced costs. Only columns ``< n_cols``
    may enter. Pivoting starts with the most negative reduced cost and
    switches to Bland's rule after ``bland_after`` consecutive degenerate
    pivots. Returns ``(status, iterations)``.
    """
    r = tab.shape[0] - 1
    degenerate = 0
    bland = False
    for it in range(max_iter):
        rc = tab[r, :n_cols]
        if bland:
            cand = np.flatnonzero(rc < -tol)
            if cand.size == 0:
                return OPTIMAL, it
            q = int(cand[0])
        else:
            q = int(np.argmin(rc))
            if rc[q] >= -tol:
                return OPTIMAL, it
        col = tab[:r, q]
        ok = col > tol
        if not ok.any():
            return UNBOUNDED, it
        rhs = tab[:r, -1]
        ratios = np.full(r, np.inf)
        ratios[ok] = rhs[ok] / col[ok]
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + tol)
        p = int(ties[np.argmin(basis[ties])])
        if rmin <= tol:
            degenerate += 1
            if degenerate > bland_after:
                bland = True
        else:
            degenerate = 0
        pivot(tab, p, q)
        basis[p] = q
    return ITERATION_LIMIT, max_iter


def pivot(tab, p, q):
    tab[p] /= tab[p, q]
    factors = tab[:, q].copy()
    factors[p] = 0.0
    tab -= np.outer(factors, tab[p])
    tab[:, q] = 0.0
    tab[p, q] = 1.0

"""Least squares, ridge and lasso regression with an unpenalized intercept.

All three fit on column-centered data, so the intercept is recovered as
``mean(y) - mean(X) @ coefficients``.  Sparse inputs are densified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

# shared regularization grid for ridge and lasso: 1e-5 .. 1e4
ALPHA_GRID = tuple(10.0 ** k for k in range(-5, 5))


@dataclass
class LinearModel:
    kind: str
    coefficients: np.ndarray
    intercept: float
    alpha: Optional[float] = None
    rank_deficient: bool = False
    n_sweeps: int = 0
    objective_history: list = field(default_factory=list, repr=False)

    def predict(self, X) -> np.ndarray:
        if X.shape[1] != len(self.coefficients):
            raise ValueError(
                f"expected {len(self.coefficients)} features, got {X.shape[1]}"
            )
        return np.asarray(X @ self.coefficients).ravel() + self.intercept


def _center(X, y):
    X = X.toarray() if sp.issparse(X) else np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ValueError(f"X has shape {X.shape} but y has {len(y)} entries")
    if len(y) == 0:
        raise ValueError("cannot fit on zero rows")
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    return X - x_mean, y - y_mean, x_mean, y_mean


def fit_ols(X, y) -> LinearModel:
    """Least squares via SVD; minimum-norm solution when the design is rank deficient."""
    Xc, yc, x_mean, y_mean = _center(X, y)
    beta, _, rank, _ = np.linalg.lstsq(Xc, yc, rcond=None)
    return LinearModel(
        kind="ols",
        coefficients=beta,
        intercept=float(y_mean - x_mean @ beta),
        rank_deficient=bool(rank < Xc.shape[1]),
    )


def fit_ridge(X, y, alpha: float) -> LinearModel:
    """Solve ``(Xc'Xc + alpha I) beta = Xc'yc``.

    With more features than rows the equivalent dual system
    ``beta = Xc' (Xc Xc' + alpha I)^-1 yc`` is solved instead.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == 0:
        model = fit_ols(X, y)
        model.kind, model.alpha = "ridge", 0.0
        return model
    Xc, yc, x_mean, y_mean = _center(X, y)
    n, p = Xc.shape
    if p <= n:
        A = Xc.T @ Xc
        A[np.diag_indices_from(A)] += alpha
        beta = scipy.linalg.solve(A, Xc.T @ yc, assume_a="pos")
    else:
        G = Xc @ Xc.T
        G[np.diag_indices_from(G)] += alpha
        beta = Xc.T @ scipy.linalg.solve(G, yc, assume_a="pos")
    return LinearModel(
        kind="ridge", coefficients=beta, intercept=float(y_mean - x_mean @ beta), alpha=alpha
    )


def lasso_objective(Xc, yc, beta, alpha) -> float:
    r = yc - Xc @ beta
    return float(r @ r / (2 * len(yc)) + alpha * np.abs(beta).sum())


def lasso_alpha_max(X, y) -> float:
    """Smallest alpha at which every lasso coefficient is zero."""
    Xc, yc, _, _ = _center(X, y)
    return float(np.abs(Xc.T @ yc).max() / len(yc))


def fit_lasso(X, y, alpha: float, tol: float = 1e-6, max_sweeps: int = 1000) -> LinearModel:
    """Cyclic coordinate descent on ``||yc - Xc b||^2 / 2n + alpha ||b||_1``.

    Full sweeps alternate with sweeps over the current non-zero coefficients
    only; the fit is converged when a full sweep moves no coefficient by
    ``tol`` or more.  The objective after every sweep is recorded.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    Xc, yc, x_mean, y_mean = _center(X, y)
    n, p = Xc.shape
    Xc = np.asfortranarray(Xc)
    col_sq = (Xc * Xc).sum(axis=0) / n
    beta = np.zeros(p)
    r = yc.copy()
    history = [lasso_objective(Xc, yc, beta, alpha)]
    sweeps = 0

    def sweep(coords) -> float:
        biggest = 0.0
        for j in coords:
            z = col_sq[j]
            if z == 0.0:
                continue
            xj = Xc[:, j]
            old = beta[j]
            rho = xj @ r / n + z * old
            excess = abs(rho) - alpha
            # treat rounding-level excess as zero so alpha_max gives exact zeros
            new = np.sign(rho) * excess / z if excess > 1e-12 * alpha else 0.0
            if new != old:
                r[:] -= xj * (new - old)
                beta[j] = new
                biggest = max(biggest, abs(new - old))
        return biggest

    all_coords = range(p)
    while sweeps < max_sweeps:
        change = sweep(all_coords)
        sweeps += 1
        history.append(lasso_objective(Xc, yc, beta, alpha))
        if change < tol:
            break
        while sweeps < max_sweeps:
            active = np.flatnonzero(beta)
            change = sweep(active)
            sweeps += 1
            history.append(lasso_objective(Xc, yc, beta, alpha))
            if change < tol:
                break
    return LinearModel(
        kind="lasso",
        coefficients=beta,
        intercept=float(y_mean - x_mean @ beta),
        alpha=alpha,
        n_sweeps=sweeps,
        objective_history=history,
    )

"""Epsilon-tube support vector regression via a pairwise SMO solver.

Three pool variants differ only by kernel: Gaussian RBF (bandwidth from the
median pairwise distance heuristic), linear, and cubic polynomial.  The dual
is solved by the maximal-violating-pair SMO kernel; the reported gap is the
KKT residual at termination.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .. import kernels as _k
from ..errors import TrainingError

log = logging.getLogger(__name__)

KERNEL_NAMES = ("rbf", "linear", "poly")

DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITER = 200_000
MAX_TRAIN_ROWS = 2000
# Workable box-constraint ranges differ a lot by kernel: the rank-deficient
# linear Gram and the sharply curved cubic kernel both want small C.
C_GRIDS = {"rbf": (1.0, 10.0), "linear": (0.3, 1.0),
           "poly": (0.01, 0.03, 0.1)}
DEFAULT_EPS_TUBE = 0.1


def kernel_matrix(U, V, name, sigma=1.0):
    if name == "linear":
        return U @ V.T
    if name == "poly":
        # Cubic kernel with the inner product scaled by the feature count
        # (libsvm's default gamma); keeps kernel values well conditioned.
        return (U @ V.T / U.shape[1] + 1.0) ** 3
    if name == "rbf":
        sq = (np.sum(U ** 2, axis=1)[:, None] + np.sum(V ** 2, axis=1)[None, :]
              - 2.0 * (U @ V.T))
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-sq / (2.0 * sigma ** 2))
    raise TrainingError("unknown kernel %r" % (name,))


def median_sigma(X, max_rows=512):
    """Median pairwise distance over an evenly spaced row subsample."""
    n = len(X)
    if n > max_rows:
        idx = np.linspace(0, n - 1, max_rows).astype(int)
        X = X[idx]
    sq = (np.sum(X ** 2, axis=1)[:, None] + np.sum(X ** 2, axis=1)[None, :]
          - 2.0 * (X @ X.T))
    d = np.sqrt(np.maximum(sq[np.triu_indices(len(X), k=1)], 0.0))
    d = d[d > 0]
    return float(np.median(d)) if len(d) else 1.0


@dataclass
class SvrModel:
    X_sv: np.ndarray
    beta: np.ndarray
    b: float
    kernel: str
    sigma: float
    y_mean: float
    y_std: float
    kkt_gap: float
    n_iter: int

    def predict(self, Xs):
        K = kernel_matrix(np.asarray(Xs, dtype=float), self.X_sv, self.kernel,
                          self.sigma)
        return (K @ self.beta + self.b) * self.y_std + self.y_mean


def fit_svr(Xs, ys, kernel, sigma, C, eps_tube, tol=DEFAULT_TOL,
            max_iter=DEFAULT_MAX_ITER):
    """Solve the SVR dual on standardized targets; keeps support rows only."""
    K = kernel_matrix(Xs, Xs, kernel, sigma)
    K = np.ascontiguousarray(K, dtype=np.float64)
    beta, b, n_iter, gap = _k.smo_solve(K, np.ascontiguousarray(ys),
                                        float(C), float(eps_tube), float(tol),
                                        int(max_iter))
    if gap > tol:
        log.warning("SMO hit iteration cap (%d); KKT residual %.3e > %.0e",
                    n_iter, gap, tol)
    sv = np.abs(beta) > 1e-12
    return np.asarray(beta)[sv], float(b), sv, int(n_iter), float(gap)


def train_svr(Xs_train, y_train, Xs_val, y_val, kernel, seed=None,
              C_grid=None, eps_tube=DEFAULT_EPS_TUBE, tol=DEFAULT_TOL,
              max_iter=DEFAULT_MAX_ITER, max_rows=MAX_TRAIN_ROWS):
    """Train one SVR variant, picking the box constraint C on validation MSE.

    Training is restricted to the most recent ``max_rows`` rows so the dense
    kernel matrix and the SMO pass stay tractable.
    """
    if kernel not in KERNEL_NAMES:
        raise TrainingError("unknown kernel %r" % (kernel,))
    if C_grid is None:
        C_grid = C_GRIDS[kernel]
    Xs_train = np.asarray(Xs_train, dtype=float)
    if len(Xs_train) > max_rows:
        Xs_train = Xs_train[-max_rows:]
        y_train = y_train[-max_rows:]

    y_mean = float(np.mean(y_train))
    y_std = float(np.std(y_train)) or 1.0
    ys = (y_train - y_mean) / y_std
    yv = (y_val - y_mean) / y_std

    sigma = median_sigma(Xs_train) if kernel == "rbf" else 1.0
    Kv = kernel_matrix(np.asarray(Xs_val, dtype=float), Xs_train, kernel,
                       sigma)

    best = None
    for C in C_grid:
        beta_sv, b, sv, n_iter, gap = fit_svr(Xs_train, ys, kernel, sigma, C,
                                              eps_tube, tol, max_iter)
        val = float(np.mean((Kv[:, sv] @ beta_sv + b - yv) ** 2))
        log.debug("svr/%s C=%g sv=%d iters=%d gap=%.2e val_mse=%.5f",
                  kernel, C, sv.sum(), n_iter, gap, val)
        if best is None or val < best[0]:
            best = (val, C, beta_sv, b, sv, n_iter, gap)
    val, C, beta_sv, b, sv, n_iter, gap = best
    log.info("svr/%s selected C=%g (%d support vectors, val mse %.5f)",
             kernel, C, len(beta_sv), val)
    return SvrModel(X_sv=Xs_train[sv].copy(), beta=beta_sv, b=b,
                    kernel=kernel, sigma=sigma, y_mean=y_mean, y_std=y_std,
                    kkt_gap=gap, n_iter=n_iter)

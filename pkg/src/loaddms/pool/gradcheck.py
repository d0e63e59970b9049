"""Finite-difference checks for the hand-written gradients.

Used by the test suite to certify the MLP backprop pass and the GBM
pseudo-residuals against central differences.
"""

import numpy as np

from .gbm import loss_value, pseudo_residuals
from .mlp import MlpNet, loss_and_grads


def mlp_grad_error(net, X, y, h=1e-6):
    """Largest relative gap between backprop and central differences."""
    _, grads = loss_and_grads(net, X, y)
    worst = 0.0
    for key, g_ana in zip(("W1", "b1", "w2", "b2"), grads):
        base = np.asarray(getattr(net, key), dtype=float)
        g_ana = np.atleast_1d(np.asarray(g_ana, dtype=float))
        flat = base.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]

            def loss_at(v):
                pert = base.copy().reshape(-1)
                pert[i] = v
                trial = MlpNet(net.W1.copy(), net.b1.copy(), net.w2.copy(),
                               float(net.b2))
                setattr(trial, key,
                        pert.reshape(base.shape) if base.ndim else float(pert[0]))
                return loss_and_grads(trial, X, y)[0]

            g_num = (loss_at(orig + h) - loss_at(orig - h)) / (2.0 * h)
            ga = g_ana.reshape(-1)[i]
            rel = abs(g_num - ga) / max(1e-6, abs(g_num) + abs(ga))
            worst = max(worst, rel)
    return worst


def gbm_pseudo_residual_error(loss, y, F, h=1e-6):
    """Largest gap between the pseudo-residuals and -dL/dF by differences."""
    analytic = pseudo_residuals(loss, y, F)
    numeric = -(loss_value(loss, y, F + h) - loss_value(loss, y, F - h)) / (2.0 * h)
    return float(np.max(np.abs(analytic - numeric)))

"""Single-hidden-layer MLP regressors trained by three gradient schemes.

The three pool variants share the same architecture (tanh hidden layer,
linear output, half mean squared error loss) and differ only in how the
full-batch gradient is applied: plain descent, classical momentum, or the
sign-based resilient update (iRprop-).  Hidden width is picked on the
validation split.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError

log = logging.getLogger(__name__)

WIDTH_GRID = (8, 16, 32)

RPROP_ETA_PLUS = 1.2
RPROP_ETA_MINUS = 0.5
RPROP_DELTA0 = 0.1
RPROP_DELTA_MIN = 1e-6
RPROP_DELTA_MAX = 50.0


@dataclass
class MlpNet:
    W1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    def copy(self):
        return MlpNet(self.W1.copy(), self.b1.copy(), self.w2.copy(),
                      float(self.b2))


def init_net(n_inputs, width, rng):
    W1 = rng.standard_normal((width, n_inputs)) / np.sqrt(n_inputs)
    b1 = np.zeros(width)
    w2 = rng.standard_normal(width) / np.sqrt(width)
    return MlpNet(W1, b1, w2, 0.0)


def forward(net, X):
    H = np.tanh(X @ net.W1.T + net.b1)
    return H @ net.w2 + net.b2


def loss_and_grads(net, X, y):
    """Half-MSE loss and its gradients w.r.t. all four parameter blocks."""
    n = len(y)
    H = np.tanh(X @ net.W1.T + net.b1)
    yhat = H @ net.w2 + net.b2
    resid = yhat - y
    loss = 0.5 * np.mean(resid ** 2)
    r = resid / n
    g_b2 = float(np.sum(r))
    g_w2 = H.T @ r
    dH = np.outer(r, net.w2) * (1.0 - H ** 2)
    g_W1 = dH.T @ X
    g_b1 = dH.sum(axis=0)
    return loss, (g_W1, g_b1, g_w2, g_b2)


def _apply_gd(net, grads, lr):
    g_W1, g_b1, g_w2, g_b2 = grads
    net.W1 -= lr * g_W1
    net.b1 -= lr * g_b1
    net.w2 -= lr * g_w2
    net.b2 -= lr * g_b2


def _apply_momentum(net, grads, vel, lr, mu):
    for key, g in zip(("W1", "b1", "w2", "b2"), grads):
        v = mu * vel[key] - lr * g
        vel[key] = v
        setattr(net, key, getattr(net, key) + v)


def _apply_rprop(net, grads, state):
    for key, g in zip(("W1", "b1", "w2", "b2"), grads):
        g = np.asarray(g, dtype=float)
        delta = state["delta"][key]
        g_prev = state["g_prev"][key]
        prod = g_prev * g
        delta = np.where(prod > 0,
                         np.minimum(delta * RPROP_ETA_PLUS, RPROP_DELTA_MAX),
                         delta)
        delta = np.where(prod < 0,
                         np.maximum(delta * RPROP_ETA_MINUS, RPROP_DELTA_MIN),
                         delta)
        g = np.where(prod < 0, 0.0, g)
        step = -np.sign(g) * delta
        state["delta"][key] = delta
        state["g_prev"][key] = g
        new = getattr(net, key) + step
        setattr(net, key, float(new) if key == "b2" else new)


@dataclass
class MlpModel:
    net: MlpNet
    variant: str
    width: int
    y_mean: float
    y_std: float
    train_curve: np.ndarray = field(repr=False, default=None)

    def predict(self, Xs):
        return forward(self.net, Xs) * self.y_std + self.y_mean


def _fit_one(variant, Xs, ys, width, epochs, lr, mu, rng, Xv, yv_scaled):
    net = init_net(Xs.shape[1], width, rng)
    curve = np.empty(epochs)
    best_net = net.copy()
    best_val = np.inf
    if variant == "momentum":
        vel = {"W1": np.zeros_like(net.W1), "b1": np.zeros_like(net.b1),
               "w2": np.zeros_like(net.w2), "b2": 0.0}
    elif variant == "rprop":
        state = {
            "delta": {k: np.full_like(np.asarray(getattr(net, k), dtype=float),
                                      RPROP_DELTA0)
                      for k in ("W1", "b1", "w2", "b2")},
            "g_prev": {k: np.zeros_like(np.asarray(getattr(net, k),
                                                   dtype=float))
                       for k in ("W1", "b1", "w2", "b2")},
        }
    for ep in range(epochs):
        loss, grads = loss_and_grads(net, Xs, ys)
        curve[ep] = loss
        if not np.isfinite(loss):
            raise TrainingError("loss diverged at epoch %d" % ep)
        if variant == "gd":
            _apply_gd(net, grads, lr)
        elif variant == "momentum":
            _apply_momentum(net, grads, vel, lr, mu)
        else:
            _apply_rprop(net, grads, state)
        if (ep + 1) % 10 == 0 or ep == epochs - 1:
            val = float(np.mean((forward(net, Xv) - yv_scaled) ** 2))
            if val < best_val:
                best_val = val
                best_net = net.copy()
    return best_net, best_val, curve


def train_mlp(Xs_train, y_train, Xs_val, y_val, variant, seed,
              widths=WIDTH_GRID, epochs=None, lr=None, mu=0.9):
    """Train one MLP variant, choosing the hidden width on validation MSE."""
    if variant not in ("gd", "momentum", "rprop"):
        raise TrainingError("unknown MLP variant %r" % (variant,))
    defaults = {"gd": (600, 0.2), "momentum": (400, 0.05),
                "rprop": (250, 0.0)}
    d_epochs, d_lr = defaults[variant]
    epochs = d_epochs if epochs is None else epochs
    lr = d_lr if lr is None else lr

    y_mean = float(np.mean(y_train))
    y_std = float(np.std(y_train)) or 1.0
    ys = (y_train - y_mean) / y_std
    yv = (y_val - y_mean) / y_std

    rng = np.random.default_rng(seed)
    best = None
    for width in widths:
        net, val, curve = _fit_one(variant, Xs_train, ys, width, epochs, lr,
                                   mu, rng, Xs_val, yv)
        log.debug("mlp/%s width=%d val_mse=%.5f", variant, width, val)
        if best is None or val < best[1]:
            best = (net, val, width, curve)
    net, val, width, curve = best
    log.info("mlp/%s selected width=%d (val mse %.5f)", variant, width, val)
    return MlpModel(net=net, variant=variant, width=width, y_mean=y_mean,
                    y_std=y_std, train_curve=curve)

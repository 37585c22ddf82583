"""Pure numpy/scipy mini-batch softmax trainer, used when the compiled
kernel is unavailable (or forced via DERMPATH_PURE=1)."""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def sgd_epoch(X, y, W, b, lr, l2, order, batch_size):
    """One pass of mini-batch gradient descent; updates W and b in place.

    X is CSR, ``order`` the shuffled row order for this epoch.  The batch
    gradient is evaluated at the pre-update weights; L2 enters as a
    multiplicative decay of W (bias unregularized).
    """
    n = len(order)
    n_classes = W.shape[0]
    decay = 1.0 - 2.0 * lr * l2
    for start in range(0, n, batch_size):
        rows = order[start : start + batch_size]
        Xb = X[rows]
        P = _softmax(Xb @ W.T + b)
        P[np.arange(len(rows)), y[rows]] -= 1.0
        P /= len(rows)
        grad_W = P.T @ Xb
        if l2 != 0.0:
            W *= decay
        W -= lr * np.asarray(grad_W)
        b -= lr * P.sum(axis=0)

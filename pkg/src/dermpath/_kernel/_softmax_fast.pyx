# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled mini-batch softmax trainer operating directly on CSR arrays."""

import numpy as np

cimport numpy as np
from libc.math cimport exp

NAME = "cython"


def sgd_epoch_csr(double[::1] data, int[::1] indices, int[::1] indptr,
                  long[::1] y, double[:, ::1] W, double[::1] b,
                  double lr, double l2, long[::1] order, int batch_size):
    """One epoch of mini-batch SGD; updates W and b in place.

    Matches the numpy fallback: batch gradients are evaluated at the
    pre-update weights, L2 is a multiplicative decay of W applied once
    per batch, bias is unregularized.
    """
    cdef int n = order.shape[0]
    cdef int K = W.shape[0]
    cdef int F = W.shape[1]
    cdef int start, nb, i, k, j, p, row
    cdef double zmax, zsum, v, g, decay
    cdef double[:, ::1] probs = np.empty((batch_size, K), dtype=np.float64)
    cdef double[::1] z = np.empty(K, dtype=np.float64)

    decay = 1.0 - 2.0 * lr * l2
    start = 0
    while start < n:
        nb = min(batch_size, n - start)
        # forward pass at current weights
        for i in range(nb):
            row = <int> order[start + i]
            for k in range(K):
                z[k] = b[k]
            for p in range(indptr[row], indptr[row + 1]):
                j = indices[p]
                v = data[p]
                for k in range(K):
                    z[k] += W[k, j] * v
            zmax = z[0]
            for k in range(1, K):
                if z[k] > zmax:
                    zmax = z[k]
            zsum = 0.0
            for k in range(K):
                z[k] = exp(z[k] - zmax)
                zsum += z[k]
            for k in range(K):
                probs[i, k] = z[k] / zsum
        # weight decay, then sparse gradient updates
        if l2 != 0.0:
            for k in range(K):
                for j in range(F):
                    W[k, j] *= decay
        for i in range(nb):
            row = <int> order[start + i]
            for k in range(K):
                g = probs[i, k]
                if y[row] == k:
                    g -= 1.0
                g /= nb
                b[k] -= lr * g
                for p in range(indptr[row], indptr[row + 1]):
                    W[k, indices[p]] -= lr * g * data[p]
        start += batch_size

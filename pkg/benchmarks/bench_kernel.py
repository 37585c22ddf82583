"""Compare the compiled training kernel against the numpy fallback.

Runs one SGD epoch per backend on identical random sparse data, checks
the resulting models agree, and reports wall-clock timings.

    python3 benchmarks/bench_kernel.py [--docs 20000] [--features 5000]
"""

import argparse
import time

import numpy as np
import scipy.sparse as sp

from dermpath import _kernel


def make_problem(n_docs, n_features, n_classes, density, seed):
    X = sp.random(
        n_docs, n_features, density=density, random_state=np.random.RandomState(seed), format="csr"
    )
    X.data = np.ascontiguousarray(X.data, dtype=np.float64)
    y = np.random.default_rng(seed).integers(0, n_classes, size=n_docs).astype(np.int64)
    return X, y


def run_backend(name, X, y, n_classes, epochs, lr, l2, batch_size, seed):
    fn = _kernel.get_backend(name)
    W = np.zeros((n_classes, X.shape[1]))
    b = np.zeros(n_classes)
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    for _ in range(epochs):
        order = rng.permutation(X.shape[0]).astype(np.int64)
        fn(X, y, W, b, lr, l2, order, batch_size)
    elapsed = time.perf_counter() - start
    return W, b, elapsed


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=20_000)
    parser.add_argument("--features", type=int, default=5_000)
    parser.add_argument("--classes", type=int, default=25)
    parser.add_argument("--density", type=float, default=0.01)
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = _kernel.available_backends()
    print(f"available backends: {backends} (active: {_kernel.BACKEND})")
    X, y = make_problem(args.docs, args.features, args.classes, args.density, args.seed)
    print(f"problem: {args.docs} docs x {args.features} features, {args.classes} classes, nnz={X.nnz}")

    results = {}
    for name in backends:
        W, b, elapsed = run_backend(
            name, X, y, args.classes, args.epochs, 0.1, 1e-4, args.batch_size, args.seed
        )
        results[name] = (W, b)
        per_epoch = elapsed / args.epochs
        print(f"{name:>8}: {elapsed:.3f}s total, {per_epoch:.3f}s/epoch")

    if len(results) == 2:
        (W1, b1), (W2, b2) = results.values()
        dw = float(np.abs(W1 - W2).max())
        db = float(np.abs(b1 - b2).max())
        print(f"max |dW| between backends: {dw:.3e}, max |db|: {db:.3e}")
        assert np.allclose(W1, W2, atol=1e-10) and np.allclose(b1, b2, atol=1e-10), (
            "backends disagree beyond tolerance"
        )
        print("backends agree within 1e-10")


if __name__ == "__main__":
    main()

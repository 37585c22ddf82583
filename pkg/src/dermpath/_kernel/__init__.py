"""Training-kernel backend selection.

The compiled Cython kernel is preferred; the pure numpy/scipy fallback is
used when the extension is missing or DERMPATH_PURE=1 is set.  Both
expose ``sgd_epoch(X, y, W, b, lr, l2, order, batch_size)`` updating the
model in place.
"""

from __future__ import annotations

import os

from . import fallback

_forced_pure = os.environ.get("DERMPATH_PURE", "") not in ("", "0")

try:
    from . import _softmax_fast  # type: ignore[attr-defined]
except ImportError:
    _softmax_fast = None

if _softmax_fast is not None and not _forced_pure:
    BACKEND = "cython"

    def sgd_epoch(X, y, W, b, lr, l2, order, batch_size):
        _softmax_fast.sgd_epoch_csr(
            X.data, X.indices, X.indptr, y, W, b, float(lr), float(l2), order, int(batch_size)
        )

else:
    BACKEND = "numpy"
    sgd_epoch = fallback.sgd_epoch


def available_backends() -> list[str]:
    names = ["numpy"]
    if _softmax_fast is not None:
        names.insert(0, "cython")
    return names


def get_backend(name: str):
    """Explicit backend lookup, used by the benchmark."""
    if name == "numpy":
        return fallback.sgd_epoch
    if name == "cython":
        if _softmax_fast is None:
            raise RuntimeError("compiled kernel not available")

        def _run(X, y, W, b, lr, l2, order, batch_size):
            _softmax_fast.sgd_epoch_csr(
                X.data, X.indices, X.indptr, y, W, b, float(lr), float(l2), order, int(batch_size)
            )

        return _run
    raise ValueError(f"unknown backend: {name!r}")

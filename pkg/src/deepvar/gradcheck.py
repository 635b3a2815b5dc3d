"""Central finite differences, the independent oracle for reverse-mode gradients."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .numerics import Tensor, backward

# Gradients smaller than this are compared in absolute terms; the central
# difference itself carries ~1e-9 truncation noise at eps 1e-4.
REL_FLOOR = 1e-6


def numeric_gradient(f: Callable[[], float], array: np.ndarray, eps: float = 1e-4) -> np.ndarray:
    """d f / d array by central differences, perturbing ``array`` in place."""
    grad = np.zeros_like(array)
    flat, gflat = array.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = f()
        flat[i] = orig - eps
        lo = f()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * eps)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = REL_FLOOR) -> float:
    """Max over elements of ``|a - n| / max(|a|, |n|, floor)``."""
    a, n = np.asarray(analytic), np.asarray(numeric)
    if a.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom))


def check_gradients(build_loss: Callable[[], Tensor], tensors: Sequence[Tensor], eps: float = 1e-4) -> dict:
    """Compare reverse-mode and finite-difference gradients for each tensor.

    ``build_loss`` must rebuild the scalar loss from the current ``.data`` of
    ``tensors`` (which must require gradients). Returns ``{index: rel_error}``.
    """
    for t in tensors:
        t.grad = np.zeros_like(t.data)
    loss = build_loss()
    backward(loss)
    analytic = [t.grad.copy() for t in tensors]
    errors = {}
    for k, t in enumerate(tensors):
        numeric = numeric_gradient(lambda: float(build_loss().data), t.data, eps)
        errors[k] = relative_error(analytic[k], numeric)
    return errors

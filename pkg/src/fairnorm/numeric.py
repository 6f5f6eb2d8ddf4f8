"""Dense float64 primitives for the differentiable stack.

A batch sits in the rows of a row-major float64 matrix. Everything here
is a pure function; the layer classes own whatever caching backward
passes need.
"""

import numpy as np

from .errors import DomainError, ShapeError
from .validation import as_float_matrix


def matmul(a, b):
    """Matrix product with shape checking (float64, BLAS-backed)."""
    a = as_float_matrix(a, "a")
    b = as_float_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def sigmoid(x):
    """Logistic function, stable for arguments of either sign."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def silu_forward(x):
    """y = x * sigmoid(x)."""
    x = np.asarray(x, dtype=np.float64)
    return x * sigmoid(x)


def silu_backward(x, upstream):
    """Chain rule through y = x * sigmoid(x).

    dy/dx = s * (1 + x * (1 - s)) with s = sigmoid(x).
    """
    x = np.asarray(x, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != x.shape:
        raise ShapeError(f"upstream shape {upstream.shape} != input shape {x.shape}")
    s = sigmoid(x)
    return upstream * (s * (1.0 + x * (1.0 - s)))


def bce_with_logits(logits, targets):
    """Mean binary cross-entropy on raw logits.

    Uses the overflow-free form max(z, 0) - z*t + log(1 + exp(-|z|)).
    Returns (loss, gradient with respect to the logits); the gradient is
    (sigmoid(z) - t) / batch_size, shaped like the input logits.
    """
    z = np.asarray(logits, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    zf = z.reshape(-1)
    tf = t.reshape(-1)
    if zf.size == 0:
        raise DomainError("empty batch")
    if zf.shape != tf.shape:
        raise ShapeError(f"logits ({zf.size}) and targets ({tf.size}) differ in length")
    if not np.all((tf == 0.0) | (tf == 1.0)):
        raise DomainError("targets must contain only 0 and 1")
    loss = float(np.mean(np.maximum(zf, 0.0) - zf * tf + np.log1p(np.exp(-np.abs(zf)))))
    grad = (sigmoid(zf) - tf) / zf.size
    return loss, grad.reshape(z.shape)

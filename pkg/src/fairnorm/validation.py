"""Input validation helpers used by the estimators and the layer code."""

import numpy as np

from .errors import DomainError, ShapeError


def as_float_matrix(X, name="X"):
    """Coerce to a C-order float64 2-D array and verify finiteness."""
    X = np.asarray(X, dtype=np.float64, order="C")
    if X.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        raise DomainError(f"{name} contains NaN or Inf")
    return X


def as_float_vector(x, name="x"):
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} contains NaN or Inf")
    return x


def as_binary_vector(y, n_rows=None, name="y"):
    y = np.asarray(y).reshape(-1)
    if n_rows is not None and y.shape[0] != n_rows:
        raise ShapeError(f"{name} has length {y.shape[0]}, expected {n_rows}")
    yf = y.astype(np.float64)
    if not np.all((yf == 0.0) | (yf == 1.0)):
        raise DomainError(f"{name} must contain only 0 and 1")
    return yf.astype(np.int64)


def as_group_vector(s, n_rows=None, name="groups"):
    s = np.asarray(s).reshape(-1)
    if n_rows is not None and s.shape[0] != n_rows:
        raise ShapeError(f"{name} has length {s.shape[0]}, expected {n_rows}")
    si = np.asarray(s, dtype=np.int64)
    if not np.array_equal(si, np.asarray(s, dtype=np.float64)):
        raise DomainError(f"{name} must contain integer group ids")
    if si.size and si.min() < 0:
        raise DomainError(f"{name} must contain nonnegative group ids")
    return si


def check_probability_scores(scores, name="scores"):
    scores = as_float_vector(scores, name)
    if scores.size and (scores.min() < 0.0 or scores.max() > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")
    return scores

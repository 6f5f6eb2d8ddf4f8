"""Group-statistics mixing normalization.

During training, every sample is standardized by its own group's batch
statistics and then rescaled by one convex combination of all groups'
statistics, shared across the batch. All groups therefore leave the
layer with identical first and second moments, which removes
group-separable structure from the representation. The layer has no
learnable parameters and is inactive at inference time, so predictions
never consume the group labels.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError, StateError
from .validation import as_float_matrix, as_group_vector


@dataclass
class GroupStats:
    """Per-dimension batch statistics of one group."""

    group: int
    count: int
    mean: np.ndarray
    std: np.ndarray  # sqrt(population variance + epsilon)


@dataclass
class MixedMoments:
    """Convex mix of group statistics: the shared rescaling target.

    scale is the weighted sum of group stds, shift the weighted sum of
    group means; weights is the convex weight vector that produced them.
    """

    scale: np.ndarray
    shift: np.ndarray
    weights: np.ndarray


@dataclass
class MixNormConfig:
    """Hyperparameters of the mixing layer.

    alpha is the Beta/Dirichlet concentration of the mix-weight draw
    (small alpha pushes the draw towards a single group's statistics);
    epsilon stabilizes the variance of constant features.
    """

    alpha: float = 0.1
    epsilon: float = 1e-5
    training_mode: bool = True

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not self.epsilon > 0.0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")


@dataclass
class MixNormCache:
    """Bookkeeping from a training-mode forward, consumed by backward."""

    group_ids: np.ndarray
    group_rows: list  # row indices per group, same order as stats
    stats: list
    mixed: MixedMoments
    normalized: np.ndarray  # (Z - own mean) / own std, per sample


def compute_group_stats(Z, group_ids, epsilon=1e-5):
    """Mean and stabilized std per group and dimension.

    Uses the population (1/N) variance. Groups come back in sorted label
    order, which fixes which group each mix weight applies to.
    """
    Z = as_float_matrix(Z, "Z")
    if Z.shape[0] == 0:
        raise DomainError("empty batch")
    s = as_group_vector(group_ids, Z.shape[0])
    if epsilon < 0.0:
        raise DomainError("epsilon must be nonnegative")
    out = []
    for g in np.unique(s):
        rows = Z[s == g]
        mean = rows.mean(axis=0)
        var = rows.var(axis=0)
        out.append(GroupStats(int(g), rows.shape[0], mean, np.sqrt(var + epsilon)))
    return out


def sample_mix_weights(n_groups, alpha, rng):
    """One convex weight vector, shared by all samples and dimensions.

    Two groups draw a symmetric Beta(alpha, alpha) coefficient; more
    groups draw Dirichlet(alpha * 1), which restricts to the same law at
    two groups. A single group gets weight 1.
    """
    if n_groups < 1:
        raise DomainError("need at least one group")
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if n_groups == 1:
        return np.ones(1)
    if n_groups == 2:
        lam = rng.beta(alpha, alpha)
        return np.array([lam, 1.0 - lam])
    return rng.dirichlet(np.full(n_groups, alpha))


def mix_statistics(stats, weights):
    """Weighted average of group stds (scale) and means (shift)."""
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if len(stats) != weights.shape[0]:
        raise ShapeError(
            f"{weights.shape[0]} weights for {len(stats)} groups"
        )
    if weights.size and weights.min() < 0.0:
        raise DomainError("mix weights must be nonnegative")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise DomainError(f"mix weights must sum to 1, got {weights.sum()!r}")
    dim = stats[0].mean.shape[0]
    for st in stats:
        if st.mean.shape[0] != dim or st.std.shape[0] != dim:
            raise ShapeError("group statistics disagree on feature dimension")
    scale = np.zeros(dim)
    shift = np.zeros(dim)
    for w, st in zip(weights, stats):
        scale += w * st.std
        shift += w * st.mean
    return MixedMoments(scale, shift, weights)


def groupmix_forward(Z, group_ids, config, rng=None, weights=None):
    """Apply the mixing transform to one batch.

    Outside training mode the input passes through untouched and no
    cache is produced. In training mode each sample is normalized by its
    own group's (mean, std) and rescaled by the shared mixed moments;
    `weights` overrides the random draw (used by gradient checks).
    """
    if not config.training_mode:
        return Z, None
    Z = as_float_matrix(Z, "Z")
    s = as_group_vector(group_ids, Z.shape[0])
    stats = compute_group_stats(Z, s, config.epsilon)
    if weights is None:
        if rng is None:
            raise StateError("training-mode forward needs an rng or explicit weights")
        weights = sample_mix_weights(len(stats), config.alpha, rng)
    mixed = mix_statistics(stats, weights)
    normalized = np.empty_like(Z)
    out = np.empty_like(Z)
    group_rows = []
    for st in stats:
        rows = np.flatnonzero(s == st.group)
        group_rows.append(rows)
        normalized[rows] = (Z[rows] - st.mean) / st.std
        out[rows] = mixed.scale * normalized[rows] + mixed.shift
    cache = MixNormCache(s, group_rows, stats, mixed, normalized)
    return out, cache


def groupmix_backward(upstream, cache):
    """Gradient of the mixing transform with respect to its input.

    The mixed moments are functions of the whole batch, so each sample's
    gradient has two parts: the batch-norm-style term through its own
    group's normalization, and a coupling term through the shared
    (scale, shift) that touches every sample. With mean/std/normalized
    values x of group k, count B, mix weight w and shared scale g:

        dZ[p in k] = (g / std_k) * (U_p - mean(U_k) - x_p * mean(U_k x_k))
                     + (w / B) * (sum(U x) * x_p + sum(U))

    where the first means/sums run over group k and the last two over
    the whole batch. The mix weights are externally drawn constants.
    """
    if cache is None:
        raise StateError("backward needs the cache of a training-mode forward")
    U = as_float_matrix(upstream, "upstream")
    if U.shape != cache.normalized.shape:
        raise ShapeError(
            f"upstream shape {U.shape} != forward shape {cache.normalized.shape}"
        )
    xhat = cache.normalized
    scale = cache.mixed.scale
    sum_u = U.sum(axis=0)
    sum_ux = (U * xhat).sum(axis=0)
    grad = np.empty_like(U)
    for w, st, rows in zip(cache.mixed.weights, cache.stats, cache.group_rows):
        Ug = U[rows]
        xg = xhat[rows]
        n = st.count
        own = (Ug - Ug.mean(axis=0) - xg * (Ug * xg).mean(axis=0)) * (scale / st.std)
        coupling = (w / n) * (sum_ux * xg + sum_u)
        grad[rows] = own + coupling
    return grad

"""Differentiable layers and the sequential stack used by the classifier.

Each layer caches exactly what its backward pass needs and returns the
gradient with respect to its input. Parameters live on the layers and
are registered by reference into a ParamSet for the optimizer.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, ShapeError, StateError
from .groupmix import MixNormConfig, groupmix_backward, groupmix_forward
from .numeric import matmul, sigmoid, silu_backward, silu_forward
from .optim import ParamSet

LAYER_KINDS = ("affine", "silu", "groupmixnorm", "sigmoid-output")


@dataclass
class LayerSpec:
    """Kind plus input/output width of one layer in a stack."""

    kind: str
    in_dim: int
    out_dim: int

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise DomainError(f"unknown layer kind {self.kind!r}")
        if self.in_dim < 1 or self.out_dim < 1:
            raise DomainError("layer dimensions must be positive")
        if self.kind != "affine" and self.in_dim != self.out_dim:
            raise ShapeError(f"{self.kind} layers keep their width")


def check_spec_chain(specs):
    """Verify consecutive specs have matching widths."""
    for a, b in zip(specs, specs[1:]):
        if a.out_dim != b.in_dim:
            raise ShapeError(
                f"{a.kind}({a.out_dim}) feeds {b.kind}({b.in_dim}): width mismatch"
            )
    return specs


@dataclass
class ForwardContext:
    """Per-call state threaded through the stack."""

    training: bool = False
    groups: np.ndarray | None = None
    rng: np.random.Generator | None = None


class Affine:
    """y = x W + b, fan-in uniform init, zero bias."""

    kind = "affine"

    def __init__(self, in_dim, out_dim, rng=None):
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        bound = 1.0 / np.sqrt(self.in_dim)
        if rng is None:
            self.W = np.zeros((self.in_dim, self.out_dim))
        else:
            self.W = rng.uniform(-bound, bound, size=(self.in_dim, self.out_dim))
        self.b = np.zeros(self.out_dim)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self._x = None

    def forward(self, x, ctx):
        self._x = x
        return matmul(x, self.W) + self.b

    def backward(self, upstream):
        if self._x is None:
            raise StateError("backward before forward")
        self.dW += self._x.T @ upstream
        self.db += upstream.sum(axis=0)
        return upstream @ self.W.T

    def spec(self):
        return LayerSpec("affine", self.in_dim, self.out_dim)


class SiLU:
    """Elementwise x * sigmoid(x)."""

    kind = "silu"

    def __init__(self, dim):
        self.dim = int(dim)
        self._x = None

    def forward(self, x, ctx):
        self._x = x
        return silu_forward(x)

    def backward(self, upstream):
        if self._x is None:
            raise StateError("backward before forward")
        return silu_backward(self._x, upstream)

    def spec(self):
        return LayerSpec("silu", self.dim, self.dim)


class SigmoidOutput:
    """Elementwise logistic squashing (not used by the default model)."""

    kind = "sigmoid-output"

    def __init__(self, dim):
        self.dim = int(dim)
        self._y = None

    def forward(self, x, ctx):
        self._y = sigmoid(x)
        return self._y

    def backward(self, upstream):
        if self._y is None:
            raise StateError("backward before forward")
        return upstream * self._y * (1.0 - self._y)

    def spec(self):
        return LayerSpec("sigmoid-output", self.dim, self.dim)


class GroupMixNorm:
    """Group-statistics mixing layer; identity outside training mode.

    Training-mode forward needs the batch's group labels and either an
    rng or `fixed_weights` (a debugging hook that freezes the mix
    weights, used by gradient checks).
    """

    kind = "groupmixnorm"

    def __init__(self, dim, alpha=0.1, epsilon=1e-5):
        self.dim = int(dim)
        self.config = MixNormConfig(alpha=alpha, epsilon=epsilon, training_mode=False)
        self.fixed_weights = None
        self._cache = None

    def forward(self, x, ctx):
        if not ctx.training:
            self._cache = None
            return x
        if ctx.groups is None:
            raise DomainError("training-mode GroupMixNorm needs group labels")
        cfg = replace(self.config, training_mode=True)
        out, cache = groupmix_forward(
            x, ctx.groups, cfg, rng=ctx.rng, weights=self.fixed_weights
        )
        self._cache = cache
        return out

    def backward(self, upstream):
        if self._cache is None:
            # inference-mode pass-through differentiates to the identity
            return upstream
        return groupmix_backward(upstream, self._cache)

    def spec(self):
        return LayerSpec("groupmixnorm", self.dim, self.dim)


class LayerStack:
    """Ordered layers with a shared forward/backward contract."""

    def __init__(self, layers):
        self.layers = list(layers)
        check_spec_chain([layer.spec() for layer in self.layers])

    @property
    def in_dim(self):
        return self.layers[0].spec().in_dim

    @property
    def out_dim(self):
        return self.layers[-1].spec().out_dim

    def forward(self, x, training=False, groups=None, rng=None):
        ctx = ForwardContext(training=training, groups=groups, rng=rng)
        for layer in self.layers:
            x = layer.forward(x, ctx)
        return x

    def backward(self, upstream):
        for layer in reversed(self.layers):
            upstream = layer.backward(upstream)
        return upstream

    def forward_hidden(self, x):
        """Inference-mode activations entering the final layer."""
        ctx = ForwardContext(training=False)
        for layer in self.layers[:-1]:
            x = layer.forward(x, ctx)
        return x

    def param_set(self):
        ps = ParamSet()
        for name, value, grad in self.named_parameters():
            ps.register(name, value, grad)
        return ps

    def named_parameters(self):
        k = 0
        for layer in self.layers:
            if isinstance(layer, Affine):
                yield f"fc{k}.W", layer.W, layer.dW
                yield f"fc{k}.b", layer.b, layer.db
                k += 1

    def affine_layers(self):
        return [layer for layer in self.layers if isinstance(layer, Affine)]

    def mixnorm_layers(self):
        return [layer for layer in self.layers if isinstance(layer, GroupMixNorm)]

    def specs(self):
        return [layer.spec() for layer in self.layers]

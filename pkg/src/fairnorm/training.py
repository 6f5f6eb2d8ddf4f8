"""Model construction, the seeded training loop, and the multi-run protocol.

The architecture is a stack of fully connected layers with SiLU
activations; with mixing enabled, a GroupMixNorm layer follows every
hidden activation but not the output head. Training runs mini-batch
Adam on binary cross-entropy. Across runs the protocol draws a fresh
split per run, selects the best validation-AP epoch within each run,
and aggregates test metrics over runs.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .data import SplitSpec, encode, filter_groups, split
from .errors import DomainError, ShapeError
from .groupmix import MixNormConfig
from .layers import Affine, GroupMixNorm, LayerStack, SiLU
from .metrics import PredictionSet, ap_from_scores, full_report
from .numeric import bce_with_logits, sigmoid
from .optim import adam_step
from .rng import stream


@dataclass
class ModelConfig:
    """Architecture switches for the classifier stack."""

    hidden_dims: tuple = (50, 50, 50)
    activation: str = "silu"
    use_groupmixnorm: bool = True
    mixnorm: MixNormConfig = field(default_factory=MixNormConfig)

    def __post_init__(self):
        if self.activation != "silu":
            raise DomainError(f"unsupported activation {self.activation!r}")
        if len(self.hidden_dims) == 0:
            raise DomainError("need at least one hidden layer")
        if any(int(h) < 1 for h in self.hidden_dims):
            raise DomainError("hidden dims must be positive")
        self.hidden_dims = tuple(int(h) for h in self.hidden_dims)


@dataclass
class TrainConfig:
    """Optimization and protocol settings."""

    epochs: int = 10
    batch_size: int = 1000
    lr: float = 1e-4
    runs: int = 10
    seed: int = 0
    split: SplitSpec = field(default_factory=SplitSpec)
    threshold: float = 0.5

    def __post_init__(self):
        if self.epochs < 0:
            raise DomainError("epochs must be nonnegative")
        if self.batch_size < 1 or self.runs < 1:
            raise DomainError("batch_size and runs must be at least 1")


def build_model(cfg, input_dim, rng=None):
    """Assemble the layer stack; rng seeds the affine weights."""
    if input_dim < 1:
        raise DomainError("input_dim must be positive")
    layers = []
    width = int(input_dim)
    for h in cfg.hidden_dims:
        layers.append(Affine(width, h, rng))
        layers.append(SiLU(h))
        if cfg.use_groupmixnorm:
            layers.append(
                GroupMixNorm(h, alpha=cfg.mixnorm.alpha, epsilon=cfg.mixnorm.epsilon)
            )
        width = h
    layers.append(Affine(width, 1, rng))
    return LayerStack(layers)


class TrainedModel:
    """A trained stack plus its configuration and per-epoch log."""

    def __init__(self, stack, model_config, train_config, log, best_epoch):
        self.stack = stack
        self.model_config = model_config
        self.train_config = train_config
        self.log = log
        self.best_epoch = best_epoch

    def predict_scores(self, X):
        """Probability of the positive class; never consumes group ids."""
        logits = self.stack.forward(np.asarray(X, dtype=np.float64), training=False)
        return sigmoid(logits).reshape(-1)

    def predict_labels(self, X, threshold=0.5):
        return (self.predict_scores(X) >= threshold).astype(np.int64)

    def hidden_activations(self, X):
        """Inference-mode activations entering the output head."""
        return self.stack.forward_hidden(np.asarray(X, dtype=np.float64))


def _epoch_metrics(stack, ds, threshold):
    logits = stack.forward(ds.X, training=False)
    scores = sigmoid(logits).reshape(-1)
    pred = PredictionSet(scores, ds.y, ds.s, threshold=threshold)
    report = full_report(pred)
    return report


def train(stack, train_ds, val_ds, cfg, shuffle_rng, mix_rng):
    """Mini-batch Adam on BCE; returns the best-validation-AP parameters.

    Without a validation set the final-epoch parameters are kept. The
    last incomplete mini-batch is trained on, not dropped.
    """
    n = train_ds.n_rows
    if n == 0:
        raise DomainError("empty training set")
    params = stack.param_set()
    log = []
    best_ap = -math.inf
    best_values = None
    best_epoch = None
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            logits = stack.forward(
                train_ds.X[idx], training=True, groups=train_ds.s[idx], rng=mix_rng
            )
            loss, grad = bce_with_logits(logits, train_ds.y[idx])
            stack.backward(grad)
            adam_step(params, cfg.lr)
            total += loss * len(idx)
        entry = {"epoch": epoch, "loss": total / n}
        if val_ds is not None:
            report = _epoch_metrics(stack, val_ds, cfg.threshold)
            entry.update(
                val_ap=report.ap, val_dp=report.dp, val_eop=report.eop,
                val_eod=report.eod,
            )
            if report.ap is not None and report.ap > best_ap:
                best_ap = report.ap
                best_values = params.copy_values()
                best_epoch = epoch
        log.append(entry)
    if best_values is not None:
        params.load_values(best_values)
    elif cfg.epochs > 0:
        best_epoch = cfg.epochs - 1
    return TrainedModel(stack, None, cfg, log, best_epoch)


def train_fresh(input_dim, model_cfg, cfg, train_ds, val_ds, run_index=0):
    """Build a model from the run's named streams and train it."""
    init_rng = stream(cfg.seed, "init", run_index)
    shuffle_rng = stream(cfg.seed, "shuffle", run_index)
    mix_rng = stream(cfg.seed, "mix", run_index)
    stack = build_model(model_cfg, input_dim, init_rng)
    model = train(stack, train_ds, val_ds, cfg, shuffle_rng, mix_rng)
    model.model_config = model_cfg
    return model


@dataclass
class RunResult:
    run: int
    split_seed: int
    best_epoch: int
    report: object
    model: TrainedModel
    log: list


@dataclass
class ProtocolResult:
    per_run: list
    mean: dict
    std: dict
    attribute: str
    threshold: float

    def metric_values(self, name):
        return [getattr(r.report, name) for r in self.per_run]


def aggregate_reports(results, attribute, threshold):
    """Mean and population std of the headline metrics over runs."""
    mean = {}
    std = {}
    for name in ("ap", "dp", "eop", "eod"):
        values = [getattr(r.report, name) for r in results]
        if any(v is None for v in values):
            mean[name] = None
            std[name] = None
        else:
            mean[name] = float(np.mean(values))
            std[name] = float(np.std(values))
    return ProtocolResult(
        per_run=list(results), mean=mean, std=std,
        attribute=attribute, threshold=threshold,
    )


def run_protocol(raw, attribute, model_cfg, cfg, train_group_filter=None):
    """Independent runs: fresh split, fresh model, test-set evaluation.

    Run r splits with seed cfg.seed + r, trains with the run's own
    streams, restores the best-validation-AP epoch, and evaluates the
    test split in inference mode. train_group_filter restricts the
    train and validation splits (not the test split) to the given group
    ids, which is how generalization to unseen groups is probed.
    """
    ds = encode(raw, attribute)
    results = []
    for r in range(1, cfg.runs + 1):
        split_seed = cfg.seed + r
        spec = replace(cfg.split, seed=split_seed)
        train_ds, val_ds, test_ds = split(ds, spec)
        if train_group_filter is not None:
            train_ds = filter_groups(train_ds, train_group_filter)
            val_ds = filter_groups(val_ds, train_group_filter)
        model = train_fresh(
            train_ds.n_features, model_cfg, cfg, train_ds, val_ds, run_index=r
        )
        scores = model.predict_scores(test_ds.X)
        pred = PredictionSet(scores, test_ds.y, test_ds.s, threshold=cfg.threshold)
        report = full_report(pred)
        results.append(
            RunResult(
                run=r,
                split_seed=split_seed,
                best_epoch=model.best_epoch,
                report=report,
                model=model,
                log=model.log,
            )
        )
    return aggregate_reports(results, attribute, cfg.threshold)


def finetune(pretrained, new_cfg, train_ds, cfg, run_index=0):
    """Warm-start a new stack from a trained one and keep training.

    The new architecture must have the same affine shapes; mixing layers
    are inserted per new_cfg. Training uses the provided dataset without
    validation-based selection (the final parameters are returned), so
    zero epochs reproduces the pretrained predictions exactly.
    """
    stack = build_model(new_cfg, pretrained.stack.in_dim, rng=None)
    src = pretrained.stack.affine_layers()
    dst = stack.affine_layers()
    if len(src) != len(dst):
        raise ShapeError("affine layer counts differ")
    for a, b in zip(src, dst):
        if a.W.shape != b.W.shape:
            raise ShapeError(f"affine shape {a.W.shape} != {b.W.shape}")
        b.W[...] = a.W
        b.b[...] = a.b
    shuffle_rng = stream(cfg.seed, "shuffle", run_index)
    mix_rng = stream(cfg.seed, "mix", run_index)
    model = train(stack, train_ds, None, cfg, shuffle_rng, mix_rng)
    model.model_config = new_cfg
    return model

"""Scikit-learn style estimator around the stack trainer.

FairMLPClassifier follows the fit/predict contract: constructor
arguments are plain hyperparameters (get_params/set_params work as
usual), fit accepts the protected-group labels as an optional
sample-aligned argument, and predict/predict_proba never consume them.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .data import Dataset
from .errors import DomainError
from .metrics import PredictionSet, full_report
from .training import ModelConfig, TrainConfig, train_fresh
from .groupmix import MixNormConfig
from .rng import stream
from .validation import as_binary_vector, as_float_matrix, as_group_vector


class FairMLPClassifier(BaseEstimator, ClassifierMixin):
    """Binary MLP with optional group-statistics mixing layers.

    With use_groupmixnorm=True, fit requires `groups`; a mixing layer
    after every hidden activation aligns the groups' feature statistics
    during training. Inference is group-blind either way.

    validation_fraction > 0 carves a validation subset out of the
    training data and keeps the epoch with the best validation AP,
    mirroring the MLPClassifier early-stopping convention.
    """

    def __init__(
        self,
        hidden_dims=(50, 50, 50),
        use_groupmixnorm=True,
        alpha=0.1,
        epsilon=1e-5,
        epochs=10,
        batch_size=1000,
        lr=1e-4,
        validation_fraction=0.0,
        threshold=0.5,
        seed=0,
    ):
        self.hidden_dims = hidden_dims
        self.use_groupmixnorm = use_groupmixnorm
        self.alpha = alpha
        self.epsilon = epsilon
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.validation_fraction = validation_fraction
        self.threshold = threshold
        self.seed = seed

    def _configs(self):
        model_cfg = ModelConfig(
            hidden_dims=tuple(self.hidden_dims),
            use_groupmixnorm=self.use_groupmixnorm,
            mixnorm=MixNormConfig(alpha=self.alpha, epsilon=self.epsilon),
        )
        train_cfg = TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            seed=self.seed,
            threshold=self.threshold,
        )
        return model_cfg, train_cfg

    def fit(self, X, y, groups=None):
        X = as_float_matrix(X)
        y = as_binary_vector(y, X.shape[0])
        if groups is None:
            if self.use_groupmixnorm:
                raise DomainError("use_groupmixnorm=True requires groups in fit")
            groups = np.zeros(X.shape[0], dtype=np.int64)
        else:
            groups = as_group_vector(groups, X.shape[0])

        model_cfg, train_cfg = self._configs()
        train_idx = np.arange(X.shape[0])
        val_idx = None
        if self.validation_fraction:
            if not 0.0 < self.validation_fraction < 1.0:
                raise DomainError("validation_fraction must lie in (0, 1)")
            rng = stream(self.seed, "split")
            perm = rng.permutation(X.shape[0])
            n_val = max(1, int(self.validation_fraction * X.shape[0]))
            val_idx, train_idx = perm[:n_val], perm[n_val:]

        def subset(idx):
            return Dataset(
                X=X[idx], y=y[idx], s=groups[idx], attribute="groups",
                encoder=None, feature_names=[], group_names=[],
            )

        val_ds = subset(val_idx) if val_idx is not None else None
        self.model_ = train_fresh(
            X.shape[1], model_cfg, train_cfg, subset(train_idx), val_ds
        )
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("fit must be called before predicting")

    def predict_proba(self, X):
        self._check_fitted()
        X = as_float_matrix(X)
        p = self.model_.predict_scores(X)
        return np.column_stack([1.0 - p, p])

    def decision_function(self, X):
        self._check_fitted()
        return self.model_.predict_scores(as_float_matrix(X))

    def predict(self, X):
        return (self.decision_function(X) >= self.threshold).astype(np.int64)

    def fairness_report(self, X, y, groups):
        """FairnessReport of this model's predictions on (X, y, groups)."""
        self._check_fitted()
        X = as_float_matrix(X)
        pred = PredictionSet(
            self.model_.predict_scores(X), y, groups, threshold=self.threshold
        )
        return full_report(pred)

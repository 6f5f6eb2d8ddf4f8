"""Representation diagnostics: kernel projections and linear probes.

Two views of what a trained stack encodes: a sigmoid-kernel PCA
projection of the penultimate activations for plotting, and a pair of
linear probes (class label vs group label) whose weight-vector cosine
similarity measures how entangled the two signals are.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import DomainError
from .layers import Affine, LayerStack
from .numeric import bce_with_logits
from .optim import adam_step
from .validation import as_binary_vector, as_float_matrix


@dataclass
class Embedding:
    """Penultimate-layer activations with row-aligned labels."""

    H: np.ndarray
    y: np.ndarray
    s: np.ndarray


def extract_embeddings(model, ds):
    """Inference-mode activations after the last hidden activation."""
    H = model.hidden_activations(ds.X)
    return Embedding(H=H, y=np.asarray(ds.y), s=np.asarray(ds.s))


class SigmoidKernelPCA(BaseEstimator, TransformerMixin):
    """Kernel PCA with the (indefinite) sigmoid kernel tanh(g <x,z> + c).

    Eigenvalues are clipped at 1e-10 before the 1/sqrt scaling since the
    kernel is not positive semidefinite. Components carry a fixed sign
    convention: the entry of largest magnitude is positive. gamma
    defaults to 1 / n_features.
    """

    def __init__(self, n_components=2, gamma=None, coef0=1.0):
        self.n_components = n_components
        self.gamma = gamma
        self.coef0 = coef0

    def _kernel(self, A, B):
        g = self.gamma if self.gamma is not None else 1.0 / A.shape[1]
        return np.tanh(g * (A @ B.T) + self.coef0)

    def fit(self, X, y=None):
        X = as_float_matrix(X)
        if X.shape[0] < max(3, self.n_components):
            raise DomainError(f"need at least {max(3, self.n_components)} samples")
        K = self._kernel(X, X)
        n = K.shape[0]
        row_means = K.mean(axis=1)
        grand = K.mean()
        Kc = K - row_means[:, None] - row_means[None, :] + grand
        eigvals, eigvecs = np.linalg.eigh(Kc)
        order = np.argsort(eigvals)[::-1][: self.n_components]
        lams = np.maximum(eigvals[order], 1e-10)
        vecs = eigvecs[:, order]
        for j in range(vecs.shape[1]):
            k = np.argmax(np.abs(vecs[:, j]))
            if vecs[k, j] < 0:
                vecs[:, j] = -vecs[:, j]
        self.X_fit_ = X
        self.row_means_ = row_means
        self.grand_mean_ = grand
        self.eigenvalues_ = lams
        self.components_ = vecs  # unit-norm eigenvectors of the centered kernel
        self.projection_ = vecs * np.sqrt(lams)
        return self

    def transform(self, X):
        if not hasattr(self, "projection_"):
            raise NotFittedError("SigmoidKernelPCA is not fitted")
        X = as_float_matrix(X)
        K = self._kernel(X, self.X_fit_)
        Kc = (
            K
            - K.mean(axis=1)[:, None]
            - self.row_means_[None, :]
            + self.grand_mean_
        )
        return Kc @ (self.components_ / np.sqrt(self.eigenvalues_))

    def fit_transform(self, X, y=None):
        return self.fit(X).projection_


def kernel_pca_sigmoid(H, out_dims=2, gamma=None, coef0=1.0):
    """Training-set projection of H onto the top kernel components."""
    return SigmoidKernelPCA(n_components=out_dims, gamma=gamma, coef0=coef0).fit_transform(H)


@dataclass
class ProbePair:
    """Linear probes for class and group labels on shared embeddings."""

    w_cls: np.ndarray
    w_sens: np.ndarray
    cosine: float  # |cos| between the flattened weight vectors, biases excluded


def _train_probe(H, targets, rng, lr=1e-2, epochs=200):
    stack = LayerStack([Affine(H.shape[1], 1, rng)])
    params = stack.param_set()
    for _ in range(epochs):
        logits = stack.forward(H)
        _, grad = bce_with_logits(logits, targets)
        stack.backward(grad)
        adam_step(params, lr)
    return stack.layers[0].W.reshape(-1)


def auxiliary_probe(emb, rng, lr=1e-2, epochs=200):
    """Cosine similarity between class-probe and group-probe weights.

    Both probes are full-batch logistic regressions trained with Adam on
    the frozen embeddings. Group labels must be binary here.
    """
    H = as_float_matrix(emb.H, "H")
    y = as_binary_vector(emb.y, H.shape[0], "y")
    s = np.asarray(emb.s).reshape(-1)
    if len(np.unique(y)) < 2:
        raise DomainError("class labels are single-valued")
    uniq = np.unique(s)
    if len(uniq) != 2:
        raise DomainError(f"group probe needs exactly 2 groups, got {len(uniq)}")
    s01 = (s == uniq[1]).astype(np.int64)
    w_cls = _train_probe(H, y, rng, lr=lr, epochs=epochs)
    w_sens = _train_probe(H, s01, rng, lr=lr, epochs=epochs)
    denom = np.linalg.norm(w_cls) * np.linalg.norm(w_sens)
    if denom == 0.0:
        raise DomainError("a probe learned an all-zero weight vector")
    cosine = float(abs(np.dot(w_cls, w_sens) / denom))
    return ProbePair(w_cls=w_cls, w_sens=w_sens, cosine=cosine)

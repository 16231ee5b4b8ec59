"""Small feed-forward networks trained in lockstep with numpy.

All neural nets in this package share one shape of problem: a few dense
layers, ReLU hidden activations, a single sigmoid output, full-batch Adam.
Ensembles are the hot path, so instead of looping over members we stack E
independent parameter sets into (E, d_in, d_out) tensors and advance every
member with one broadcast matmul per layer. A single network is just E=1.

Per-example weights let callers express both bagging (bootstrap multiplicity
counts) and soft/noise-aware targets: the gradient of the weighted sigmoid
cross entropy w.r.t. the pre-activation is (sigmoid(z) - target) * w with w
normalized to sum to 1 per member, so fractional targets in [0, 1] work
unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = ["MLPConfig", "MLPEnsemble", "bootstrap_weights"]


@dataclass(frozen=True)
class MLPConfig:
    """Architecture and Adam schedule for one ensemble."""

    hidden: tuple[int, ...] = (10, 10)
    epochs: int = 200
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise ConfigurationError(f"hidden sizes must be positive, got {self.hidden}")
        if self.epochs < 1 or self.learning_rate <= 0:
            raise ConfigurationError("epochs must be >= 1 and learning_rate > 0")


def _init_layers(n_members: int, dims: list[int], seeds: np.ndarray):
    """He-normal weights, zero biases; each member seeded independently."""
    weights, biases = [], []
    for k in range(len(dims) - 1):
        w = np.empty((n_members, dims[k], dims[k + 1]))
        for e in range(n_members):
            rng = np.random.default_rng(np.random.SeedSequence((int(seeds[e]), k)))
            w[e] = rng.normal(0.0, np.sqrt(2.0 / dims[k]), size=(dims[k], dims[k + 1]))
        weights.append(w)
        biases.append(np.zeros((n_members, 1, dims[k + 1])))
    return weights, biases


@dataclass
class MLPEnsemble:
    """E sigmoid-output MLPs with identical architecture, distinct weights."""

    n_members: int
    d_in: int
    config: MLPConfig
    weights: list[np.ndarray] = field(repr=False)
    biases: list[np.ndarray] = field(repr=False)

    @classmethod
    def init(cls, n_members: int, d_in: int, config: MLPConfig, seeds) -> "MLPEnsemble":
        seeds = np.asarray(seeds, dtype=np.int64)
        if seeds.shape != (n_members,):
            raise ConfigurationError(f"need {n_members} member seeds, got shape {seeds.shape}")
        dims = [d_in, *config.hidden, 1]
        weights, biases = _init_layers(n_members, dims, seeds)
        return cls(n_members, d_in, config, weights, biases)

    def _forward(self, x: np.ndarray):
        """Returns per-layer activations; x is (n, d_in) shared by all members."""
        acts = [np.broadcast_to(x[None, :, :], (self.n_members, *x.shape))]
        a = acts[0]
        for k in range(len(self.weights) - 1):
            a = np.maximum(np.matmul(a, self.weights[k]) + self.biases[k], 0.0)
            acts.append(a)
        z = np.matmul(a, self.weights[-1]) + self.biases[-1]
        acts.append(z)
        return acts

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Member probabilities, shape (E, n)."""
        z = self._forward(np.asarray(x, dtype=np.float64))[-1][:, :, 0]
        return 1.0 / (1.0 + np.exp(-z))

    def fit(self, x: np.ndarray, targets: np.ndarray, sample_weight: np.ndarray | None = None) -> "MLPEnsemble":
        """Full-batch Adam on weighted sigmoid cross entropy.

        targets: (n,) shared or (E, n) per member, values in [0, 1].
        sample_weight: same broadcast rules; zero weight drops an example.
        """
        x = np.asarray(x, dtype=np.float64)
        n = x.shape[0]
        t = np.asarray(targets, dtype=np.float64)
        t = np.broadcast_to(t if t.ndim == 2 else t[None, :], (self.n_members, n))
        if sample_weight is None:
            w = np.full((self.n_members, n), 1.0 / n)
        else:
            w = np.asarray(sample_weight, dtype=np.float64)
            w = np.broadcast_to(w if w.ndim == 2 else w[None, :], (self.n_members, n)).copy()
            totals = w.sum(axis=1, keepdims=True)
            if np.any(totals <= 0):
                raise ConfigurationError("each member needs positive total sample weight")
            w /= totals
        w3 = w[:, :, None]

        cfg = self.config
        params = self.weights + self.biases
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        n_layers = len(self.weights)

        for step in range(1, cfg.epochs + 1):
            acts = self._forward(x)
            z = acts[-1]
            delta = (1.0 / (1.0 + np.exp(-z)) - t[:, :, None]) * w3
            grads_w = [None] * n_layers
            grads_b = [None] * n_layers
            for k in range(n_layers - 1, -1, -1):
                grads_w[k] = np.matmul(acts[k].swapaxes(1, 2), delta)
                grads_b[k] = delta.sum(axis=1, keepdims=True)
                if k > 0:
                    delta = np.matmul(delta, self.weights[k].swapaxes(1, 2))
                    delta *= acts[k] > 0.0
            grads = grads_w + grads_b
            bc1 = 1.0 - cfg.beta1**step
            bc2 = 1.0 - cfg.beta2**step
            for p, g, mk, vk in zip(params, grads, m, v):
                mk *= cfg.beta1
                mk += (1.0 - cfg.beta1) * g
                vk *= cfg.beta2
                vk += (1.0 - cfg.beta2) * g * g
                p -= cfg.learning_rate * (mk / bc1) / (np.sqrt(vk / bc2) + cfg.eps)
        return self


def bootstrap_weights(n: int, n_members: int, rng: np.random.Generator) -> np.ndarray:
    """Multiplicity counts of with-replacement resamples, shape (E, n).

    Training on the shared design matrix with these counts as sample weights
    is exactly equivalent to training each member on its own bootstrap
    resample, but keeps every member on the same matmul.
    """
    return rng.multinomial(n, np.full(n, 1.0 / n), size=n_members).astype(np.float64)

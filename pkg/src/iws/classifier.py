"""Downstream classifier trained on probabilistic labels, plus AUC.

The training loss is the expected cross entropy under the soft labels,
-(p_i log f(x_i) + (1 - p_i) log(1 - f(x_i))), so hard labels reduce to
ordinary cross entropy through the exact same code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigurationError, ValidationError
from .mlp import MLPConfig, MLPEnsemble

__all__ = ["TrainConfig", "Classifier", "train_noise_aware", "predict_proba", "auc"]


@dataclass(frozen=True)
class TrainConfig:
    """End-classifier architecture and schedule."""

    hidden: tuple[int, ...] = (20, 20)
    epochs: int = 300
    learning_rate: float = 1e-3


@dataclass
class Classifier:
    """Fitted network plus the input standardization it was trained with."""

    net: MLPEnsemble
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    seed: int


def train_noise_aware(
    features: np.ndarray,
    soft_labels: np.ndarray,
    seed: int = 0,
    config: TrainConfig = TrainConfig(),
    covered: np.ndarray | None = None,
) -> Classifier:
    """Fit the network on soft labels; optionally restrict rows via `covered`.

    Rows whose soft label is exactly the uninformative prior should be
    excluded by passing the coverage mask of the LF matrix.
    """
    x = np.asarray(features, dtype=np.float64)
    p = np.asarray(soft_labels, dtype=np.float64)
    if x.shape[0] != p.shape[0]:
        raise ValidationError("features and labels must align")
    if covered is not None:
        x, p = x[covered], p[covered]
    if x.shape[0] == 0:
        raise ConfigurationError("no covered samples to train on")
    if np.any((p < 0) | (p > 1)):
        raise ValidationError("soft labels must lie in [0, 1]")
    mean = x.mean(axis=0)
    scale = np.maximum(x.std(axis=0), 1e-12)
    net = MLPEnsemble.init(
        1,
        x.shape[1],
        MLPConfig(hidden=config.hidden, epochs=config.epochs, learning_rate=config.learning_rate),
        [seed],
    )
    net.fit((x - mean) / scale, p)
    return Classifier(net=net, feature_mean=mean, feature_scale=scale, seed=seed)


def predict_proba(clf: Classifier, features: np.ndarray) -> np.ndarray:
    """P(y = +1 | x) per row, deterministic."""
    x = (np.asarray(features, dtype=np.float64) - clf.feature_mean) / clf.feature_scale
    return clf.net.predict(x)[0]


def auc(scores: np.ndarray, gold: np.ndarray) -> float:
    """Mann-Whitney AUC; tied scores count half per positive-negative pair."""
    scores = np.asarray(scores, dtype=np.float64)
    gold = np.asarray(gold)
    if scores.shape != gold.shape:
        raise ValidationError("scores and gold must align")
    if not np.all(np.isin(gold, (-1, 1))):
        raise ValidationError("gold labels must be -1 or +1")
    pos = gold == 1
    n_pos = int(pos.sum())
    n_neg = gold.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("AUC needs both classes present")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))

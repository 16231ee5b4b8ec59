"""Generative label model over conditionally independent labeling functions.

The joint over a binary label y and one sample's LF votes factorizes per LF:

    p(y, row) = pi_y * prod_j psi_j(row_j, y) / Z_j
    psi_j(v, y) = exp(theta_acc_j * 1{v == y} + theta_lab_j * 1{v != 0})
    Z_j = e^{theta_acc_j + theta_lab_j} + e^{theta_lab_j} + 1

Z_j sums psi_j over v in {-1, 0, +1} and is the same for both y, so the
normalizer of the joint is the product of the Z_j. That makes the marginal
likelihood, its gradient, and the label posterior all exact and cheap: the
posterior reduces to a sigmoid of the accuracy-weighted vote sum plus the
class-prior log odds, with the propensity weights cancelling.
"""

from __future__ import annotations

from dataclasses import dataclass
import json

import numpy as np

from .errors import ConfigurationError, ValidationError
from .lf import LFMatrix

__all__ = [
    "LabelModelParams",
    "FitConfig",
    "log_marginal_likelihood",
    "gradient",
    "fit_mle",
    "posterior_prob_labels",
    "closed_form_theta",
    "implied_accuracy_propensity",
    "theorem_bound",
    "majority_vote",
]


@dataclass(frozen=True)
class LabelModelParams:
    """theta_acc rewards agreement with y, theta_lab rewards voting at all."""

    theta_acc: np.ndarray
    theta_lab: np.ndarray
    class_prior: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "theta_acc", np.asarray(self.theta_acc, dtype=np.float64))
        object.__setattr__(self, "theta_lab", np.asarray(self.theta_lab, dtype=np.float64))
        if self.theta_acc.shape != self.theta_lab.shape or self.theta_acc.ndim != 1:
            raise ValidationError("theta_acc and theta_lab must be 1-d and aligned")
        if not (np.all(np.isfinite(self.theta_acc)) and np.all(np.isfinite(self.theta_lab))):
            raise ValidationError("theta must be finite")
        if not 0.0 < self.class_prior < 1.0:
            raise ValidationError("class_prior must lie strictly inside (0, 1)")

    @property
    def m(self) -> int:
        return self.theta_acc.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "theta_acc": self.theta_acc.tolist(),
                "theta_lab": self.theta_lab.tolist(),
                "prior": self.class_prior,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "LabelModelParams":
        obj = json.loads(text)
        return cls(np.asarray(obj["theta_acc"]), np.asarray(obj["theta_lab"]), obj["prior"])


@dataclass(frozen=True)
class FitConfig:
    """Deterministic full-gradient ascent schedule."""

    step: float = 0.1
    max_steps: int = 2000
    tol: float = 1e-6


def _vote_masks(lam) -> tuple[np.ndarray, np.ndarray]:
    """Dense indicator matrices for +1 votes and -1 votes."""
    if isinstance(lam, LFMatrix):
        a = lam.matrix.toarray()
    else:
        a = np.asarray(lam)
    if a.ndim != 2:
        raise ValidationError("LF matrix must be 2-d")
    return (a == 1).astype(np.float64), (a == -1).astype(np.float64)


def _log_odds(pi: float) -> float:
    return float(np.log(pi / (1.0 - pi)))


def log_marginal_likelihood(lam, params: LabelModelParams) -> float:
    """Total log p(Lambda) with y summed out, exact via the factorized Z."""
    pos, neg = _vote_masks(lam)
    if pos.shape[1] != params.m:
        raise ValidationError("matrix columns must match params size")
    th1, th2, pi = params.theta_acc, params.theta_lab, params.class_prior
    base = (pos + neg) @ th2
    s_pos = pos @ th1
    s_neg = neg @ th1
    # log(pi*e^{s_pos} + (1-pi)*e^{s_neg}) per sample, stabilized
    hi = np.maximum(s_pos, s_neg)
    mix = np.log(pi * np.exp(s_pos - hi) + (1.0 - pi) * np.exp(s_neg - hi)) + hi
    log_z = np.sum(np.logaddexp(np.logaddexp(th1 + th2, th2), 0.0))
    return float(np.sum(base + mix) - pos.shape[0] * log_z)


def gradient(lam, params: LabelModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradient of log_marginal_likelihood in (theta_acc, theta_lab).

    Expected factor counts under the label posterior minus n times the
    model-expected counts e^{th1+th2}/Z_j (accuracy factor) and
    (e^{th1+th2}+e^{th2})/Z_j (propensity factor).
    """
    pos, neg = _vote_masks(lam)
    if pos.shape[1] != params.m:
        raise ValidationError("matrix columns must match params size")
    n = pos.shape[0]
    th1, th2, pi = params.theta_acc, params.theta_lab, params.class_prior
    q = 1.0 / (1.0 + np.exp(-((pos - neg) @ th1 + _log_odds(pi))))
    e12 = np.exp(th1 + th2)
    e2 = np.exp(th2)
    z = e12 + e2 + 1.0
    g1 = pos.T @ q + neg.T @ (1.0 - q) - n * e12 / z
    g2 = (pos + neg).sum(axis=0) - n * (e12 + e2) / z
    return g1, g2


def _prior_init(pos: np.ndarray, neg: np.ndarray, acc: float = 0.7) -> tuple[np.ndarray, np.ndarray]:
    """Better-than-chance accuracy prior; propensity matches observed coverage.

    Breaks the theta_acc sign symmetry of the likelihood, which would
    otherwise pull sparse-coverage data into the label-flipped optimum.
    """
    m = pos.shape[1]
    cov = np.clip((pos + neg).mean(axis=0), 1e-6, 1.0 - 1e-3)
    th1 = np.full(m, np.log(acc / (1.0 - acc)))
    th2 = np.log(cov / ((1.0 + np.exp(th1)) * (1.0 - cov)))
    return th1, th2


def _vote_anchored_init(pos: np.ndarray, neg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Parameters implied by scoring each LF against the panel's majority vote.

    With the vote estimate y_hat fixed, the per-LF likelihood is a plain
    three-cell multinomial (agree / disagree / abstain), so theta has the
    closed form theta_acc = ln(agree/disagree), theta_lab =
    ln(disagree/abstain), smoothed by half a count per cell.
    """
    votes = pos - neg
    up = (votes.sum(axis=1) >= 0.0)[:, None]
    n = pos.shape[0]
    agree = (pos * up).sum(axis=0) + (neg * ~up).sum(axis=0)
    dis = (pos * ~up).sum(axis=0) + (neg * up).sum(axis=0)
    absent = n - agree - dis
    th1 = np.log((agree + 0.5) / (dis + 0.5))
    th2 = np.log((dis + 0.5) / (absent + 0.5))
    return th1, th2


def fit_mle(
    lam,
    class_prior: float = 0.5,
    init: str | tuple[np.ndarray, np.ndarray] = "prior",
    config: FitConfig = FitConfig(),
) -> LabelModelParams:
    """Maximum-likelihood parameters by exact gradient ascent.

    Ascends the mean per-sample log likelihood with a fixed step until the
    gradient max-norm drops below config.tol or max_steps is hit. init is
    "prior" (default), "mv", "zeros", or an explicit (theta_acc, theta_lab)
    pair.

    Panels of one-sided LFs (vote their target or abstain, as keyword LFs
    do) deserve care: the likelihood admits a class-uninformative optimum
    that explains column co-occurrence instead of the label, and it can
    dominate the class-aligned one. For such panels use init="mv", which
    anchors the ascent on the majority-vote solution, and keep max_steps
    modest so refinement stays on the class-aligned ridge.
    """
    pos, neg = _vote_masks(lam)
    n, m = pos.shape
    if m < 1:
        raise ValidationError("need at least one LF column")
    if np.any((pos + neg).sum(axis=0) == 0):
        raise ValidationError("zero-coverage LF columns cannot be fitted")
    if init == "prior":
        th1, th2 = _prior_init(pos, neg)
    elif init == "mv":
        th1, th2 = _vote_anchored_init(pos, neg)
    elif init == "zeros":
        th1, th2 = np.zeros(m), np.zeros(m)
    else:
        th1 = np.asarray(init[0], dtype=np.float64).copy()
        th2 = np.asarray(init[1], dtype=np.float64).copy()
    log_odds = _log_odds(class_prior)
    nnz = (pos + neg).sum(axis=0)
    diff = pos - neg
    for _ in range(config.max_steps):
        q = 1.0 / (1.0 + np.exp(-(diff @ th1 + log_odds)))
        e12 = np.exp(th1 + th2)
        e2 = np.exp(th2)
        z = e12 + e2 + 1.0
        g1 = (pos.T @ q + neg.T @ (1.0 - q)) / n - e12 / z
        g2 = nnz / n - (e12 + e2) / z
        if max(np.abs(g1).max(), np.abs(g2).max()) < config.tol:
            break
        th1 += config.step * g1
        th2 += config.step * g2
    return LabelModelParams(th1, th2, class_prior)


def posterior_prob_labels(lam, params: LabelModelParams) -> np.ndarray:
    """P(y=+1 | row) per sample; propensity weights cancel out."""
    pos, neg = _vote_masks(lam)
    if pos.shape[1] != params.m:
        raise ValidationError("matrix columns must match params size")
    s = (pos - neg) @ params.theta_acc + _log_odds(params.class_prior)
    return 1.0 / (1.0 + np.exp(-s))


def closed_form_theta(
    alpha: float,
    propensity: float | None = None,
    n_classes: int = 2,
    model: str = "acc_prop",
) -> tuple[float, float | None]:
    """Optimal weights for a single LF with known accuracy and coverage.

    acc_prop: theta_acc = ln((L-1) a / (1-a)), theta_lab = ln((1-a) l / ((L-1)(1-l))).
    acc_only: alpha is read as P(vote == y) including abstains, and
    theta = ln(alpha L / (1 - alpha)).
    """
    big_l = n_classes
    if model == "acc_only":
        if not 0.0 < alpha < 1.0:
            raise ConfigurationError("P(H=Y) must lie strictly inside (0, 1)")
        return float(np.log(alpha * big_l / (1.0 - alpha))), None
    if model != "acc_prop":
        raise ConfigurationError(f"unknown model {model!r}")
    if propensity is None:
        raise ConfigurationError("acc_prop model needs a propensity")
    if not (0.0 < alpha < 1.0 and 0.0 < propensity < 1.0):
        raise ConfigurationError("alpha and propensity must lie strictly inside (0, 1)")
    th1 = np.log((big_l - 1) * alpha / (1.0 - alpha))
    th2 = np.log((1.0 - alpha) * propensity / ((big_l - 1) * (1.0 - propensity)))
    return float(th1), float(th2)


def implied_accuracy_propensity(
    theta_acc: float, theta_lab: float, n_classes: int = 2
) -> tuple[float, float]:
    """Model-implied (accuracy on votes, coverage) for one LF; inverts
    closed_form_theta(acc_prop)."""
    e12 = np.exp(theta_acc + theta_lab)
    e2 = np.exp(theta_lab)
    z = e12 + (n_classes - 1) * e2 + 1.0
    return float(e12 / (e12 + (n_classes - 1) * e2)), float(1.0 - 1.0 / z)


def theorem_bound(theta_acc, alphas, propensities) -> float:
    """Lower bound on P(weighted-vote prediction is correct), clamped to [0,1].

    1 - exp(-(sum_j th_j (2 a_j - 1) l_j)^2 / (2 ||th||^2)), valid when the
    expected weighted margin is positive.
    """
    th = np.asarray(theta_acc, dtype=np.float64)
    a = np.asarray(alphas, dtype=np.float64)
    l = np.asarray(propensities, dtype=np.float64)
    norm_sq = float(th @ th)
    if norm_sq == 0.0:
        raise ConfigurationError("theta_acc must not be identically zero")
    margin = float(np.sum(th * (2.0 * a - 1.0) * l))
    val = 1.0 - np.exp(-(margin**2) / (2.0 * norm_sq))
    return float(min(max(val, 0.0), 1.0))


def majority_vote(lam) -> np.ndarray:
    """sign of the vote sum per sample; ties (and all-abstain) go to +1."""
    pos, neg = _vote_masks(lam)
    s = (pos - neg).sum(axis=1)
    return np.where(s < 0, -1, 1).astype(np.int8)

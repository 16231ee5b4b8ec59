"""Expert-feedback model: estimate each LF's chance of being useful.

Expert verdicts about individual LFs accumulate in a QueryDataset. A bagging
ensemble of small MLPs maps an unsupervised feature vector per LF (SVD of its
vote column) to a probability of usefulness; the spread across members acts
as the uncertainty of a posterior over latent LF accuracy. Identity link:
member outputs are read directly as accuracy samples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InsufficientFeedbackError, ValidationError
from .lf import LFMatrix
from .mlp import MLPConfig, MLPEnsemble, bootstrap_weights

__all__ = [
    "USEFUL",
    "NOT_USEFUL",
    "UNSURE",
    "RESPONSES",
    "QueryRecord",
    "QueryDataset",
    "LFFeatures",
    "EnsembleConfig",
    "EnsembleModel",
    "featurize_lfs",
    "fit_ensemble",
    "posterior_accuracy",
    "cold_start_posterior",
]

USEFUL = "useful"
NOT_USEFUL = "not_useful"
UNSURE = "unsure"
RESPONSES = (USEFUL, NOT_USEFUL, UNSURE)

# Expert confidence multipliers on the log loss.
WEIGHT_CONFIDENT = 1.0
WEIGHT_UNSURE_LEANING = 0.5

COLD_START_MEAN = 0.5
COLD_START_STD = 0.25


@dataclass(frozen=True)
class QueryRecord:
    """One expert verdict; unsure verdicts consume a turn but carry no label."""

    lf_id: int
    response: str
    weight: float = WEIGHT_CONFIDENT
    iteration: int = 1

    def __post_init__(self):
        if self.response not in RESPONSES:
            raise ValidationError(f"response must be one of {RESPONSES}")
        if self.weight not in (WEIGHT_CONFIDENT, WEIGHT_UNSURE_LEANING):
            raise ValidationError("weight must be 1.0 or 0.5")
        if self.lf_id < 0 or self.iteration < 1:
            raise ValidationError("lf_id must be >= 0 and iteration >= 1")


@dataclass
class QueryDataset:
    """Ordered history of verdicts; one per LF, iterations strictly increasing."""

    records: list[QueryRecord] = field(default_factory=list)

    def __post_init__(self):
        seen: set[int] = set()
        last = 0
        for r in self.records:
            if r.lf_id in seen:
                raise ValidationError(f"duplicate verdict for LF {r.lf_id}")
            if r.iteration <= last:
                raise ValidationError("iterations must be strictly increasing")
            seen.add(r.lf_id)
            last = r.iteration
        self._ids = seen

    def add(self, record: QueryRecord) -> None:
        if record.lf_id in self._ids:
            raise ValidationError(f"duplicate verdict for LF {record.lf_id}")
        if self.records and record.iteration <= self.records[-1].iteration:
            raise ValidationError("iterations must be strictly increasing")
        self.records.append(record)
        self._ids.add(record.lf_id)

    def __len__(self) -> int:
        return len(self.records)

    def queried_ids(self) -> set[int]:
        return set(self._ids)

    def useful_ids(self) -> list[int]:
        return sorted(r.lf_id for r in self.records if r.response == USEFUL)

    def labeled(self) -> list[QueryRecord]:
        """Non-unsure records in canonical (lf_id) order."""
        return sorted((r for r in self.records if r.response != UNSURE), key=lambda r: r.lf_id)

    def prefix(self, iteration: int) -> "QueryDataset":
        """History restricted to verdicts recorded at or before `iteration`."""
        return QueryDataset([r for r in self.records if r.iteration <= iteration])

    def to_json(self) -> str:
        return json.dumps(
            [
                {"lf_id": r.lf_id, "response": r.response, "weight": r.weight, "iteration": r.iteration}
                for r in self.records
            ]
        )

    @classmethod
    def from_json(cls, text: str) -> "QueryDataset":
        return cls([QueryRecord(**obj) for obj in json.loads(text)])


@dataclass(frozen=True)
class LFFeatures:
    """Row j is the SVD projection of LF j's mean-centered vote column."""

    matrix: np.ndarray

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


def featurize_lfs(lfm: LFMatrix | np.ndarray, d_prime: int = 150, seed: int = 0) -> LFFeatures:
    """Project LF vote columns to min(d_prime, p, n) dims by truncated SVD.

    Each column is centered by its own mean over samples first; features are
    the left singular vectors scaled by their singular values, with a fixed
    per-component sign convention so output is reproducible bit for bit.
    """
    a = lfm.matrix.toarray() if isinstance(lfm, LFMatrix) else np.asarray(lfm)
    n, p = a.shape
    if p < 2:
        raise ValidationError("need at least two LFs to featurize")
    if not np.any(a):
        raise ConfigurationError("LF matrix is all abstains; nothing to featurize")
    x = a.T.astype(np.float64)
    x -= x.mean(axis=1, keepdims=True)
    k = min(d_prime, p, n)
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    u, s, vt = u[:, :k], s[:k], vt[:k]
    for i in range(k):
        j = int(np.argmax(np.abs(vt[i])))
        if vt[i, j] < 0:
            vt[i] = -vt[i]
            u[:, i] = -u[:, i]
    return LFFeatures(matrix=np.ascontiguousarray(u * s))


@dataclass(frozen=True)
class EnsembleConfig:
    """Bagging ensemble shape and training schedule.

    The default step size is tuned for full-batch training on the handful of
    verdicts a session accumulates; smaller steps leave pool predictions
    shrunk toward 0.5.
    """

    n_members: int = 50
    mlp: MLPConfig = MLPConfig(hidden=(10, 10), epochs=200, learning_rate=1e-2)

    def __post_init__(self):
        if self.n_members < 1:
            raise ConfigurationError("n_members must be >= 1")


@dataclass
class EnsembleModel:
    """Fitted bagging ensemble plus the input conditioning it was fit with.

    Features are centered per column and divided by one global RMS scalar,
    which keeps the relative variance ordering of the SVD components intact.
    """

    ensemble: MLPEnsemble
    feature_mean: np.ndarray
    feature_scale: float
    seed: int

    def member_outputs(self, features: LFFeatures) -> np.ndarray:
        x = (features.matrix - self.feature_mean) / self.feature_scale
        return self.ensemble.predict(x)


_SEED_MEMBERS = 101
_SEED_BOOTSTRAP = 102


def fit_ensemble(
    features: LFFeatures,
    q: QueryDataset,
    seed: int = 0,
    config: EnsembleConfig = EnsembleConfig(),
) -> EnsembleModel:
    """Train the bagging ensemble on all labeled (non-unsure) verdicts.

    Each member sees a bootstrap resample (realized as multiplicity weights)
    of the labeled records, with each record's log loss scaled by its
    confidence weight. Needs at least one useful and one not-useful verdict;
    otherwise raises InsufficientFeedbackError and the caller should fall
    back to cold_start_posterior.
    """
    labeled = q.labeled()
    targets = np.asarray([1.0 if r.response == USEFUL else 0.0 for r in labeled])
    if len(labeled) < 2 or targets.min() == targets.max():
        raise InsufficientFeedbackError("need at least one useful and one not-useful verdict")
    if max(r.lf_id for r in labeled) >= features.p:
        raise ValidationError("verdict references an LF outside the feature matrix")
    mean = features.matrix.mean(axis=0)
    scale = max(float(np.sqrt(np.mean(features.matrix**2))), 1e-12)
    x = (features.matrix[[r.lf_id for r in labeled]] - mean) / scale
    conf = np.asarray([r.weight for r in labeled])

    member_seeds = np.random.SeedSequence((seed, _SEED_MEMBERS)).generate_state(config.n_members)
    ens = MLPEnsemble.init(config.n_members, x.shape[1], config.mlp, member_seeds.astype(np.int64))
    boot_rng = np.random.default_rng(np.random.SeedSequence((seed, _SEED_BOOTSTRAP)))
    counts = bootstrap_weights(len(labeled), config.n_members, boot_rng)
    ens.fit(x, targets, sample_weight=counts * conf[None, :])
    return EnsembleModel(ensemble=ens, feature_mean=mean, feature_scale=scale, seed=seed)


def posterior_accuracy(model: EnsembleModel, features: LFFeatures) -> tuple[np.ndarray, np.ndarray]:
    """Per-LF posterior mean and population std across ensemble members."""
    outputs = model.member_outputs(features)
    return outputs.mean(axis=0), outputs.std(axis=0)


def cold_start_posterior(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform posterior used before any informative feedback exists."""
    return np.full(p, COLD_START_MEAN), np.full(p, COLD_START_STD)

"""Acquisition scores and final LF-set selection for the three scenarios.

Scenario a keeps every LF whose posterior usefulness clears the threshold r.
Scenario ac additionally ranks qualifying LFs by the accuracy-coverage
trade-off (2 mu - 1) * coverage and caps the set size. Scenario as (active
search) trusts only LFs the expert explicitly confirmed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ValidationError
from .feedback import USEFUL, QueryDataset

__all__ = [
    "MODES",
    "AcquisitionConfig",
    "straddle_score",
    "as_score",
    "select_next",
    "final_set_a",
    "final_set_ac",
    "final_set_as",
]

MODES = ("lse_a", "lse_ac", "active_search", "random")

STRADDLE_COEFF = 1.96


@dataclass(frozen=True)
class AcquisitionConfig:
    """Which strategy drives queries and how final sets are cut."""

    mode: str = "lse_a"
    r: float = 0.7
    m_tilde: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}")
        if not 0.5 < self.r < 1.0:
            raise ConfigurationError("r must lie strictly inside (0.5, 1)")
        if self.mode == "lse_ac" and self.m_tilde < 1:
            raise ConfigurationError("m_tilde must be >= 1 for lse_ac")


def straddle_score(mu, sigma, r: float = 0.7):
    """1.96 * sigma - |mu - r|: high near the threshold, high when uncertain."""
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    return STRADDLE_COEFF * sigma - np.abs(mu - r)


def as_score(mu):
    """Active search greedily queries the most probably useful LF."""
    return np.asarray(mu, dtype=np.float64)


def select_next(
    scores,
    queried: set[int],
    mode: str = "argmax",
    rng: np.random.Generator | None = None,
) -> int:
    """Next LF to show the expert; never repeats a queried LF.

    argmax mode takes the highest score with ties going to the lowest lf_id.
    random mode ignores scores and draws uniformly from the unqueried pool
    using the supplied generator.
    """
    scores = np.asarray(scores, dtype=np.float64)
    open_ids = np.setdiff1d(np.arange(scores.shape[0]), np.asarray(sorted(queried), dtype=int))
    if open_ids.size == 0:
        raise ValidationError("LF pool exhausted; nothing left to query")
    if mode == "random":
        if rng is None:
            raise ConfigurationError("random selection needs a generator")
        return int(open_ids[rng.integers(open_ids.size)])
    best = open_ids[np.argmax(scores[open_ids])]
    return int(best)


def final_set_a(mu, r: float = 0.7) -> set[int]:
    """All LFs whose posterior usefulness strictly clears r."""
    mu = np.asarray(mu, dtype=np.float64)
    return set(np.flatnonzero(mu > r).tolist())


def final_set_ac(mu, coverage, r: float = 0.7, m: int = 1) -> set[int]:
    """Top-m qualifying LFs by (2 mu - 1) * coverage; ties to lowest lf_id."""
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    mu = np.asarray(mu, dtype=np.float64)
    cov = np.asarray(coverage, dtype=np.float64)
    if mu.shape != cov.shape:
        raise ValidationError("mu and coverage must align")
    qualifying = np.flatnonzero(mu > r)
    if qualifying.size == 0:
        return set()
    rank = (2.0 * mu[qualifying] - 1.0) * cov[qualifying]
    order = np.lexsort((qualifying, -rank))
    return set(qualifying[order[:m]].tolist())


def final_set_as(q: QueryDataset) -> set[int]:
    """Exactly the LFs the expert marked useful."""
    return {r.lf_id for r in q.records if r.response == USEFUL}

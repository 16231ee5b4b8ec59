"""Bundled synthetic two-class corpus with controllable LF quality.

Documents are bags of synthetic tokens. Token k is planted with a target
accuracy rho_k and coverage cov_k: given the document's class, the token
appears with probability 2*cov*rho on its preferred class and 2*cov*(1-rho)
on the other, so the keyword LF (token, preferred label) has vote accuracy
rho_k and coverage cov_k in expectation. Accuracies span [0.5, 0.95] on a
power-skewed grid: most tokens sit near chance and high-accuracy tokens are
scarce, the shape real keyword pools have. The complementary-label twin LFs
populate [0.05, 0.5], and the accuracy band used for seed queries stays
non-empty.
"""

from __future__ import annotations

import numpy as np

from .corpus import Dataset, Document

__all__ = ["make_synthetic_corpus"]


def _docs(
    prefix: str,
    n: int,
    tokens: list[str],
    prob_pos: np.ndarray,
    prob_neg: np.ndarray,
    rng: np.random.Generator,
) -> list[Document]:
    labels = np.where(rng.random(n) < 0.5, 1, -1)
    probs = np.where((labels == 1)[:, None], prob_pos[None, :], prob_neg[None, :])
    present = rng.random((n, len(tokens))) < probs
    docs = []
    for i in range(n):
        text = " ".join(tokens[k] for k in np.flatnonzero(present[i]))
        docs.append(Document(id=f"{prefix}-{i:05d}", text=text, gold_label=int(labels[i])))
    return docs


def make_synthetic_corpus(
    n_train: int = 5000,
    n_test: int = 1000,
    vocab_size: int = 400,
    seed: int = 7,
    acc_range: tuple[float, float] = (0.5, 0.95),
    acc_skew: float = 2.5,
    cov_range: tuple[float, float] = (0.01, 0.12),
) -> Dataset:
    """Generate train and test splits with gold labels; deterministic in seed.

    acc_skew is the power applied to the uniform grid before mapping into
    acc_range; values above 1 thin out the high-accuracy end.
    """
    tokens = [f"w{k:04d}" for k in range(vocab_size)]
    grid = np.linspace(0.0, 1.0, vocab_size) ** acc_skew
    rho = acc_range[0] + (acc_range[1] - acc_range[0]) * grid
    cov = np.geomspace(cov_range[0], cov_range[1], vocab_size)
    cov = cov[np.random.default_rng(np.random.SeedSequence((seed, 0))).permutation(vocab_size)]
    preferred = np.where(np.arange(vocab_size) % 2 == 0, 1, -1)
    p_preferred = 2.0 * cov * rho
    p_other = 2.0 * cov * (1.0 - rho)
    prob_pos = np.where(preferred == 1, p_preferred, p_other)
    prob_neg = np.where(preferred == -1, p_preferred, p_other)

    train = _docs("train", n_train, tokens, prob_pos, prob_neg,
                  np.random.default_rng(np.random.SeedSequence((seed, 1))))
    test = _docs("test", n_test, tokens, prob_pos, prob_neg,
                 np.random.default_rng(np.random.SeedSequence((seed, 2))))
    return Dataset(train=train, test=test)

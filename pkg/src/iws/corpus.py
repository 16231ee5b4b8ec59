"""Corpus loading, tokenization, vocabulary, and SVD bag-of-words features.

A corpus is JSON Lines, one record per sample. Two formats:

  jsonl-text     {"id": "doc-1", "text": "...", "label": 1}
  jsonl-vectors  {"id": "doc-1", "vector": [0.1, ...], "label": -1}

`label` is optional gold truth in {-1, +1} and is never consumed by the
modeling pipeline itself (only by simulated oracles and evaluation).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg

from .errors import ConfigurationError, MalformedRecordError, ValidationError

__all__ = [
    "Document",
    "Dataset",
    "Vocabulary",
    "SvdEmbedding",
    "tokenize",
    "load_corpus",
    "save_corpus",
    "load_split",
    "build_vocab",
    "embed_svd",
]

_TOKEN_RE = re.compile(r"[a-z0-9]+")

FORMATS = ("jsonl-text", "jsonl-vectors")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric run."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Document:
    """One sample: raw text or a precomputed feature vector, optional gold label."""

    id: str
    text: str | None = None
    vector: tuple[float, ...] | None = None
    gold_label: int | None = None

    def __post_init__(self):
        if (self.text is None) == (self.vector is None):
            raise ValidationError(f"document {self.id!r} must carry exactly one of text/vector")
        if self.gold_label is not None and self.gold_label not in (-1, 1):
            raise ValidationError(f"document {self.id!r} gold label must be -1 or +1")


@dataclass
class Dataset:
    """Train split plus an optional held-out test split.

    `embeddings` / `test_embeddings`, when present, are dense float matrices
    whose rows align with `train` / `test` respectively.
    """

    train: list[Document]
    test: list[Document] = field(default_factory=list)
    embeddings: np.ndarray | None = None
    test_embeddings: np.ndarray | None = None

    def __post_init__(self):
        ids = [d.id for d in self.train] + [d.id for d in self.test]
        if len(set(ids)) != len(ids):
            raise ValidationError("document ids must be unique across train and test")
        if self.embeddings is not None and self.embeddings.shape[0] != len(self.train):
            raise ValidationError("embeddings rows must align with train documents")
        if self.test_embeddings is not None and self.test_embeddings.shape[0] != len(self.test):
            raise ValidationError("test_embeddings rows must align with test documents")

    @property
    def n_train(self) -> int:
        return len(self.train)

    @property
    def n_test(self) -> int:
        return len(self.test)

    def gold_train(self) -> np.ndarray | None:
        """Gold labels for the train split, or None if any are missing."""
        return _gold_array(self.train)

    def gold_test(self) -> np.ndarray | None:
        return _gold_array(self.test)


def _gold_array(docs: list[Document]) -> np.ndarray | None:
    labels = [d.gold_label for d in docs]
    if any(g is None for g in labels):
        return None
    return np.asarray(labels, dtype=np.int8)


def _parse_record(obj, line_no: int, fmt: str, dim: int | None) -> tuple[Document, int | None]:
    if not isinstance(obj, dict):
        raise MalformedRecordError(line_no, "record must be a JSON object")
    doc_id = obj.get("id")
    if not isinstance(doc_id, str) or not doc_id:
        raise MalformedRecordError(line_no, "field 'id' must be a non-empty string")
    label = obj.get("label")
    if label is not None and (isinstance(label, bool) or not isinstance(label, int) or label not in (-1, 1)):
        raise MalformedRecordError(line_no, "field 'label' must be -1 or 1 when present")
    if fmt == "jsonl-text":
        text = obj.get("text")
        if not isinstance(text, str):
            raise MalformedRecordError(line_no, "field 'text' must be a string")
        return Document(id=doc_id, text=text, gold_label=label), dim
    vec = obj.get("vector")
    if not isinstance(vec, list) or not vec or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vec):
        raise MalformedRecordError(line_no, "field 'vector' must be a non-empty list of numbers")
    if dim is not None and len(vec) != dim:
        raise MalformedRecordError(line_no, f"vector has {len(vec)} dims, expected {dim}")
    return Document(id=doc_id, vector=tuple(float(v) for v in vec), gold_label=label), len(vec)


def load_corpus(path: str, fmt: str = "jsonl-text") -> Dataset:
    """Read one JSONL file into a Dataset (all records land in the train split)."""
    if fmt not in FORMATS:
        raise ConfigurationError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
    docs: list[Document] = []
    seen: set[str] = set()
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(line_no, f"invalid JSON ({exc.msg})") from exc
            doc, dim = _parse_record(obj, line_no, fmt, dim)
            if doc.id in seen:
                raise MalformedRecordError(line_no, f"duplicate id {doc.id!r}")
            seen.add(doc.id)
            docs.append(doc)
    embeddings = None
    if fmt == "jsonl-vectors":
        embeddings = np.asarray([d.vector for d in docs], dtype=np.float64) if docs else None
    return Dataset(train=docs, embeddings=embeddings)


def save_corpus(docs: list[Document], path: str, fmt: str = "jsonl-text") -> None:
    """Write documents as canonical JSONL; load_corpus(save_corpus(x)) round-trips."""
    if fmt not in FORMATS:
        raise ConfigurationError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            obj: dict = {"id": doc.id}
            if fmt == "jsonl-text":
                if doc.text is None:
                    raise ValidationError(f"document {doc.id!r} has no text")
                obj["text"] = doc.text
            else:
                if doc.vector is None:
                    raise ValidationError(f"document {doc.id!r} has no vector")
                obj["vector"] = list(doc.vector)
            if doc.gold_label is not None:
                obj["label"] = doc.gold_label
            fh.write(json.dumps(obj) + "\n")


def load_split(train_path: str, test_path: str | None, fmt: str = "jsonl-text") -> Dataset:
    """Load train and optional test files into one Dataset."""
    train = load_corpus(train_path, fmt)
    if test_path is None:
        return train
    test = load_corpus(test_path, fmt)
    return Dataset(
        train=train.train,
        test=test.train,
        embeddings=train.embeddings,
        test_embeddings=test.embeddings,
    )


@dataclass(frozen=True)
class Vocabulary:
    """Unigram vocabulary with document frequencies, tokens sorted ascending."""

    tokens: tuple[str, ...]
    doc_freqs: tuple[int, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.doc_freqs):
            raise ValidationError("tokens and doc_freqs must align")
        if any(self.tokens[i] >= self.tokens[i + 1] for i in range(len(self.tokens) - 1)):
            raise ValidationError("tokens must be strictly sorted")

    def __len__(self) -> int:
        return len(self.tokens)

    def index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.tokens)}


def build_vocab(ds: Dataset, df_min: int = 10, df_max_frac: float = 0.20) -> Vocabulary:
    """Vocabulary over the train split, pruned by document frequency.

    A token survives iff df_min <= df(token) <= df_max_frac * n_train, both
    bounds inclusive. Test documents never influence the vocabulary.
    """
    if df_min < 1 or not (0 < df_max_frac <= 1):
        raise ConfigurationError("df_min must be >= 1 and df_max_frac in (0, 1]")
    if not ds.train:
        raise ConfigurationError("cannot build a vocabulary from an empty train split")
    if ds.train[0].text is None:
        raise ConfigurationError("vocabulary requires a text corpus")
    df: dict[str, int] = {}
    for doc in ds.train:
        for tok in set(tokenize(doc.text or "")):
            df[tok] = df.get(tok, 0) + 1
    cap = df_max_frac * ds.n_train
    kept = sorted(t for t, c in df.items() if c >= df_min and c <= cap)
    return Vocabulary(tokens=tuple(kept), doc_freqs=tuple(df[t] for t in kept))


@dataclass(frozen=True)
class SvdEmbedding:
    """Truncated SVD of train bag-of-words counts, test rows projected in.

    components has orthonormal rows (right singular vectors); scores are
    counts @ components.T for both splits, so train and test share one map.
    """

    train: np.ndarray
    test: np.ndarray
    components: np.ndarray
    singular_values: np.ndarray


def _count_matrix(docs: list[Document], index: dict[str, int]) -> sparse.csr_matrix:
    rows, cols, vals = [], [], []
    for i, doc in enumerate(docs):
        counts: dict[int, int] = {}
        for tok in tokenize(doc.text or ""):
            j = index.get(tok)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        for j, c in counts.items():
            rows.append(i)
            cols.append(j)
            vals.append(c)
    return sparse.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (rows, cols)),
        shape=(len(docs), len(index)),
    )


def _fix_signs(vt: np.ndarray) -> np.ndarray:
    """Flip each component so its largest-magnitude entry is positive."""
    out = vt.copy()
    for i in range(out.shape[0]):
        j = int(np.argmax(np.abs(out[i])))
        if out[i, j] < 0:
            out[i] = -out[i]
    return out


def embed_svd(ds: Dataset, vocab: Vocabulary, d: int = 300) -> SvdEmbedding:
    """Rank-d truncated SVD of the train count matrix; deterministic output.

    Components are computed from train counts only and applied to both splits.
    Signs are fixed per component, so repeated calls agree bit for bit.
    """
    if len(vocab) == 0:
        raise ConfigurationError("vocabulary is empty; nothing to embed")
    if d < 1:
        raise ConfigurationError("d must be >= 1")
    index = vocab.index()
    x_train = _count_matrix(ds.train, index)
    k = min(d, ds.n_train, len(vocab))
    if k >= min(x_train.shape) or k > 0.5 * min(x_train.shape):
        u, s, vt = np.linalg.svd(x_train.toarray(), full_matrices=False)
        s, vt = s[:k], vt[:k]
    else:
        v0 = np.full(min(x_train.shape), 1.0 / np.sqrt(min(x_train.shape)))
        _, s, vt = sparse.linalg.svds(x_train, k=k, v0=v0)
        order = np.argsort(s)[::-1]
        s, vt = s[order], vt[order]
    vt = np.ascontiguousarray(_fix_signs(vt))
    train_scores = np.asarray(x_train @ vt.T)
    if ds.test:
        test_scores = np.asarray(_count_matrix(ds.test, index) @ vt.T)
    else:
        test_scores = np.zeros((0, k))
    return SvdEmbedding(train=train_scores, test=test_scores, components=vt, singular_values=s)

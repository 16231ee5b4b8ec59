"""Candidate labeling-function pools and their evaluation matrix.

A labeling function (LF) votes -1 or +1 on some samples and abstains on the
rest. Pools are generated exhaustively from a family (keyword presence, or
mutual-kNN clusters in embedding space) and evaluated into a sparse ternary
matrix with abstains stored as absence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from .corpus import Dataset, Vocabulary, tokenize
from .errors import ConfigurationError, ValidationError

__all__ = [
    "LabelingFunction",
    "LFMatrix",
    "LFStats",
    "generate_keyword_lfs",
    "generate_mknn_lfs",
    "build_lf_matrix",
    "lf_stats",
    "sample_snippets",
    "save_pool",
    "load_pool",
]

KIND_KEYWORD = "keyword"
KIND_MKNN = "mknn-cluster"

SNIPPET_WINDOW = 10


@dataclass(frozen=True)
class LabelingFunction:
    """One heuristic: id is its index in the pool it belongs to."""

    id: int
    kind: str
    target_label: int
    keyword: str | None = None
    member_ids: frozenset[str] | None = None
    core_ids: frozenset[str] | None = None

    def __post_init__(self):
        if self.target_label not in (-1, 1):
            raise ValidationError("target_label must be -1 or +1")
        if self.kind == KIND_KEYWORD:
            if not self.keyword:
                raise ValidationError("keyword LFs need a keyword")
        elif self.kind == KIND_MKNN:
            if self.keyword is not None or not self.member_ids:
                raise ValidationError("cluster LFs need member_ids and no keyword")
            if self.core_ids is not None and not self.core_ids <= self.member_ids:
                raise ValidationError("core_ids must be a subset of member_ids")
        else:
            raise ValidationError(f"unknown LF kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == KIND_KEYWORD:
            return f"vote {self.target_label:+d} if document contains '{self.keyword}'"
        return f"vote {self.target_label:+d} on a cluster of {len(self.member_ids)} similar items"


class LFMatrix:
    """Sparse n x p matrix of LF votes; values in {-1, +1}, abstain = absent."""

    def __init__(self, matrix: sparse.spmatrix):
        m = sparse.csc_matrix(matrix, dtype=np.int8)
        m.sum_duplicates()
        if m.nnz and not np.all(np.isin(m.data, (-1, 1))):
            raise ValidationError("LF matrix entries must be -1 or +1")
        self._m = m

    @property
    def n(self) -> int:
        return self._m.shape[0]

    @property
    def p(self) -> int:
        return self._m.shape[1]

    @property
    def matrix(self) -> sparse.csc_matrix:
        return self._m

    def coverage(self) -> np.ndarray:
        """Fraction of samples each LF votes on."""
        counts = np.diff(self._m.indptr)
        return counts / max(self.n, 1)

    def column(self, j: int) -> np.ndarray:
        return np.asarray(self._m[:, j].todense()).ravel()

    def to_json(self) -> str:
        coo = self._m.tocoo()
        order = np.lexsort((coo.row, coo.col))
        entries = [[int(coo.row[i]), int(coo.col[i]), int(coo.data[i])] for i in order]
        return json.dumps({"n": self.n, "p": self.p, "entries": entries})

    @classmethod
    def from_json(cls, text: str) -> "LFMatrix":
        obj = json.loads(text)
        entries = obj["entries"]
        rows = [e[0] for e in entries]
        cols = [e[1] for e in entries]
        vals = [e[2] for e in entries]
        m = sparse.coo_matrix((vals, (rows, cols)), shape=(obj["n"], obj["p"]))
        return cls(m)


@dataclass(frozen=True)
class LFStats:
    """Empirical coverage and, when gold labels exist, accuracy on votes."""

    coverage: float
    true_accuracy: float | None = None


def generate_keyword_lfs(ds: Dataset, vocab: Vocabulary, min_coverage: float = 0.002) -> list[LabelingFunction]:
    """Two LFs per token (vote +1 / vote -1 when present); prune rare tokens.

    Order is deterministic: tokens ascending, +1 before -1. Ids are assigned
    after pruning, so they index the returned pool densely.
    """
    if len(vocab) == 0:
        raise ConfigurationError("vocabulary is empty")
    n = ds.n_train
    presence: dict[str, int] = {t: 0 for t in vocab.tokens}
    for doc in ds.train:
        for tok in set(tokenize(doc.text or "")):
            if tok in presence:
                presence[tok] += 1
    lfs: list[LabelingFunction] = []
    for tok in vocab.tokens:
        if presence[tok] / n < min_coverage:
            continue
        for label in (1, -1):
            lfs.append(LabelingFunction(id=len(lfs), kind=KIND_KEYWORD, target_label=label, keyword=tok))
    if not lfs:
        raise ConfigurationError("all keyword LFs fell below min_coverage")
    return lfs


def _knn_lists(points: np.ndarray, k: int) -> list[np.ndarray]:
    """k nearest neighbors per point (self excluded), ties broken by index."""
    n = points.shape[0]
    sq = np.einsum("ij,ij->i", points, points)
    out: list[np.ndarray] = []
    chunk = max(1, min(n, 8 * 1024 * 1024 // max(n, 1)))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (points[start:stop] @ points.T)
        for i in range(start, stop):
            row = d2[i - start].copy()
            row[i] = np.inf
            # stable sort so distance ties resolve to the lower index, even
            # across the k-boundary
            out.append(np.argsort(row, kind="stable")[: min(k, n - 1)])
    return out


def generate_mknn_lfs(ds: Dataset, k1: int = 20, k2: int = 1500, target_label: int = 1) -> list[LabelingFunction]:
    """Cluster LFs from mutual k1-nearest-neighbor cliques, widened by k2.

    Core clusters are built greedily by ascending point index: the lowest
    unassigned point seeds a cluster, unassigned candidates join in distance
    order if they are mutual k1-neighbors with every current member, size is
    capped at k1, singletons are dropped. Cores are therefore pairwise
    disjoint. Each core is then extended with every point that appears in the
    k2-nearest-neighbor lists of at least two core members, and clusters with
    identical extended member sets collapse to one LF.
    """
    if ds.embeddings is None:
        raise ConfigurationError("mutual-kNN LFs need embeddings")
    if k1 < 2 or k2 < k1:
        raise ConfigurationError("need k1 >= 2 and k2 >= k1")
    points = np.asarray(ds.embeddings, dtype=np.float64)
    n = points.shape[0]
    if n < k1 + 1:
        raise ConfigurationError(f"need at least k1+1={k1 + 1} points, got {n}")
    nn1 = _knn_lists(points, min(k1, n - 1))
    nn2 = nn1 if k2 == k1 else _knn_lists(points, min(k2, n - 1))
    neigh1 = [set(a.tolist()) for a in nn1]

    assigned = np.zeros(n, dtype=bool)
    cores: list[list[int]] = []
    for seed in range(n):
        if assigned[seed]:
            continue
        members = [seed]
        for cand in nn1[seed]:
            if len(members) >= k1:
                break
            c = int(cand)
            if assigned[c] or seed not in neigh1[c]:
                continue
            if all(m in neigh1[c] and c in neigh1[m] for m in members):
                members.append(c)
        if len(members) > 1:
            for m in members:
                assigned[m] = True
            cores.append(sorted(members))

    doc_ids = [d.id for d in ds.train]
    lfs: list[LabelingFunction] = []
    seen: set[frozenset[str]] = set()
    for core in cores:
        hits = np.zeros(n, dtype=np.int32)
        for c in core:
            hits[nn2[c]] += 1
        extended = sorted(set(core) | set(np.flatnonzero(hits >= 2).tolist()))
        member_ids = frozenset(doc_ids[i] for i in extended)
        if member_ids in seen:
            continue
        seen.add(member_ids)
        lfs.append(
            LabelingFunction(
                id=len(lfs),
                kind=KIND_MKNN,
                target_label=target_label,
                member_ids=member_ids,
                core_ids=frozenset(doc_ids[i] for i in core),
            )
        )
    return lfs


def _match_rows(ds: Dataset, lf: LabelingFunction) -> list[int]:
    if lf.kind == KIND_KEYWORD:
        rows = []
        for i, doc in enumerate(ds.train):
            if doc.text is None:
                raise ValidationError(f"keyword LF {lf.id} cannot evaluate vector document {doc.id!r}")
            if lf.keyword in tokenize(doc.text):
                rows.append(i)
        return rows
    index = {d.id: i for i, d in enumerate(ds.train)}
    rows = []
    for did in lf.member_ids or ():
        if did not in index:
            raise ValidationError(f"LF {lf.id} references unknown document id {did!r}")
        rows.append(index[did])
    return sorted(rows)


def build_lf_matrix(ds: Dataset, lfs: list[LabelingFunction]) -> LFMatrix:
    """Evaluate every LF on the train split into the sparse vote matrix."""
    rows: list[int] = []
    cols: list[int] = []
    vals: list[int] = []
    for j, lf in enumerate(lfs):
        if lf.id != j:
            raise ValidationError("LF ids must equal their pool positions")
        for i in _match_rows(ds, lf):
            rows.append(i)
            cols.append(j)
            vals.append(lf.target_label)
    m = sparse.coo_matrix((vals, (rows, cols)), shape=(ds.n_train, len(lfs)), dtype=np.int8)
    return LFMatrix(m)


def lf_stats(lfm: LFMatrix, gold: np.ndarray | None = None) -> list[LFStats]:
    """Coverage per LF; accuracy over non-abstain votes when gold is given."""
    cov = lfm.coverage()
    if gold is None:
        return [LFStats(coverage=float(c)) for c in cov]
    gold = np.asarray(gold)
    if gold.shape[0] != lfm.n:
        raise ValidationError("gold labels must align with matrix rows")
    m = lfm.matrix
    stats = []
    for j in range(lfm.p):
        sl = slice(m.indptr[j], m.indptr[j + 1])
        votes = m.data[sl]
        if votes.size == 0:
            stats.append(LFStats(coverage=0.0, true_accuracy=None))
            continue
        correct = int(np.sum(votes == gold[m.indices[sl]]))
        stats.append(LFStats(coverage=float(cov[j]), true_accuracy=correct / votes.size))
    return stats


def sample_snippets(ds: Dataset, lf: LabelingFunction, k: int = 4, seed: int = 0) -> list[str]:
    """Up to k matching documents, trimmed for display, seeded sampling."""
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    matches = _match_rows(ds, lf)
    if not matches:
        raise ValidationError(f"LF {lf.id} matches no documents")
    rng = np.random.default_rng(np.random.SeedSequence((seed, lf.id)))
    if len(matches) > k:
        picked = sorted(rng.choice(len(matches), size=k, replace=False).tolist())
        matches = [matches[i] for i in picked]
    snippets = []
    for i in matches:
        doc = ds.train[i]
        if lf.kind == KIND_KEYWORD and doc.text is not None:
            toks = tokenize(doc.text)
            pos = toks.index(lf.keyword)
            lo = max(0, pos - SNIPPET_WINDOW)
            snippets.append(" ".join(toks[lo : pos + SNIPPET_WINDOW + 1]))
        elif doc.text is not None:
            snippets.append(doc.text)
        else:
            snippets.append(doc.id)
    return snippets


def save_pool(lfs: list[LabelingFunction], path: str) -> None:
    out = []
    for lf in lfs:
        obj: dict = {"id": lf.id, "kind": lf.kind, "target_label": lf.target_label}
        if lf.kind == KIND_KEYWORD:
            obj["keyword"] = lf.keyword
        else:
            obj["member_ids"] = sorted(lf.member_ids or ())
            obj["core_ids"] = sorted(lf.core_ids or ())
        out.append(obj)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(out, fh)


def load_pool(path: str) -> list[LabelingFunction]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    lfs = []
    for obj in raw:
        member_ids = frozenset(obj["member_ids"]) if "member_ids" in obj else None
        core_ids = frozenset(obj.get("core_ids", ())) or member_ids if member_ids else None
        lfs.append(
            LabelingFunction(
                id=obj["id"],
                kind=obj["kind"],
                target_label=obj["target_label"],
                keyword=obj.get("keyword"),
                member_ids=member_ids,
                core_ids=core_ids,
            )
        )
    return lfs

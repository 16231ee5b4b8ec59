"""LF pools, the sparse vote matrix, and snippet sampling.

The mutual-kNN generator is checked against a brute-force reimplementation
of its clustering rule, written with plain loops over exact integer-valued
squared distances so both sides agree on every tie.
"""

import numpy as np
import pytest
import scipy.sparse as sparse
from hypothesis import given, settings
from hypothesis import strategies as st

from iws.corpus import Dataset, Document, Vocabulary
from iws.errors import ConfigurationError, ValidationError
from iws.lf import (
    LabelingFunction,
    LFMatrix,
    build_lf_matrix,
    generate_keyword_lfs,
    generate_mknn_lfs,
    lf_stats,
    load_pool,
    sample_snippets,
    save_pool,
)


def _text_ds():
    texts = [
        "alpha beta gamma",
        "alpha beta",
        "beta delta",
        "alpha epsilon",
        "zeta eta theta",
        "alpha beta delta",
    ]
    return Dataset(train=[Document(id=f"d{i}", text=t, gold_label=(1 if i % 2 == 0 else -1)) for i, t in enumerate(texts)])


def _vocab(*tokens):
    return Vocabulary(tokens=tuple(sorted(tokens)), doc_freqs=tuple(1 for _ in tokens))


# ---------------------------------------------------------------- keyword LFs


def test_keyword_pool_order_and_dense_ids():
    lfs = generate_keyword_lfs(_text_ds(), _vocab("beta", "alpha"), min_coverage=0.0)
    assert [(lf.keyword, lf.target_label) for lf in lfs] == [
        ("alpha", 1),
        ("alpha", -1),
        ("beta", 1),
        ("beta", -1),
    ]
    assert [lf.id for lf in lfs] == [0, 1, 2, 3]
    assert all(lf.kind == "keyword" for lf in lfs)


def test_keyword_pool_prunes_rare_tokens():
    # zeta appears in 1 of 6 docs; at min_coverage 0.3 only alpha (4/6) and
    # beta (4/6) survive
    lfs = generate_keyword_lfs(_text_ds(), _vocab("alpha", "beta", "zeta"), min_coverage=0.3)
    assert sorted({lf.keyword for lf in lfs}) == ["alpha", "beta"]
    assert [lf.id for lf in lfs] == [0, 1, 2, 3]
    with pytest.raises(ConfigurationError):
        generate_keyword_lfs(_text_ds(), _vocab("zeta"), min_coverage=0.9)
    with pytest.raises(ConfigurationError):
        generate_keyword_lfs(_text_ds(), Vocabulary(tokens=(), doc_freqs=()))


def test_labeling_function_validation():
    with pytest.raises(ValidationError):
        LabelingFunction(id=0, kind="keyword", target_label=0, keyword="x")
    with pytest.raises(ValidationError):
        LabelingFunction(id=0, kind="keyword", target_label=1)
    with pytest.raises(ValidationError):
        LabelingFunction(id=0, kind="mknn-cluster", target_label=1, member_ids=frozenset())
    with pytest.raises(ValidationError):
        LabelingFunction(
            id=0,
            kind="mknn-cluster",
            target_label=1,
            member_ids=frozenset({"a"}),
            core_ids=frozenset({"b"}),
        )
    with pytest.raises(ValidationError):
        LabelingFunction(id=0, kind="regex", target_label=1, keyword="x")
    assert "alpha" in LabelingFunction(id=0, kind="keyword", target_label=1, keyword="alpha").describe()
    clustered = LabelingFunction(id=1, kind="mknn-cluster", target_label=-1, member_ids=frozenset({"a", "b"}))
    assert "2" in clustered.describe()


# ---------------------------------------------------------------- matrix


def test_build_lf_matrix_votes_and_coverage():
    ds = _text_ds()
    lfs = generate_keyword_lfs(ds, _vocab("alpha", "beta"), min_coverage=0.0)
    lfm = build_lf_matrix(ds, lfs)
    assert (lfm.n, lfm.p) == (6, 4)
    np.testing.assert_array_equal(lfm.column(0), [1, 1, 0, 1, 0, 1])   # alpha, +1
    np.testing.assert_array_equal(lfm.column(3), [-1, -1, -1, 0, 0, -1])  # beta, -1
    np.testing.assert_allclose(lfm.coverage(), [4 / 6, 4 / 6, 4 / 6, 4 / 6])


def test_build_lf_matrix_rejects_misnumbered_pool():
    ds = _text_ds()
    lf = LabelingFunction(id=3, kind="keyword", target_label=1, keyword="alpha")
    with pytest.raises(ValidationError):
        build_lf_matrix(ds, [lf])


def test_build_lf_matrix_cluster_membership_and_errors():
    ds = _text_ds()
    lf = LabelingFunction(
        id=0, kind="mknn-cluster", target_label=1, member_ids=frozenset({"d1", "d4"})
    )
    lfm = build_lf_matrix(ds, [lf])
    np.testing.assert_array_equal(lfm.column(0), [0, 1, 0, 0, 1, 0])
    bad = LabelingFunction(
        id=0, kind="mknn-cluster", target_label=1, member_ids=frozenset({"nope"})
    )
    with pytest.raises(ValidationError):
        build_lf_matrix(ds, [bad])


def test_lf_matrix_validation_and_json_round_trip():
    with pytest.raises(ValidationError):
        LFMatrix(sparse.coo_matrix(([2], ([0], [0])), shape=(2, 2)))
    m = sparse.coo_matrix(([1, -1, 1], ([0, 2, 1], [0, 0, 1])), shape=(3, 2))
    lfm = LFMatrix(m)
    back = LFMatrix.from_json(lfm.to_json())
    assert (back.matrix != lfm.matrix).nnz == 0
    assert lfm.to_json() == back.to_json()


def test_lf_stats_hand_values():
    ds = _text_ds()
    gold = ds.gold_train()
    m = sparse.coo_matrix(
        ([1, 1, -1], ([0, 1, 3], [0, 0, 1])), shape=(6, 3)
    )
    lfm = LFMatrix(m)
    stats = lf_stats(lfm, gold)
    # LF0 votes +1 on rows 0 (gold +1) and 1 (gold -1): half right
    assert stats[0].coverage == pytest.approx(2 / 6)
    assert stats[0].true_accuracy == pytest.approx(0.5)
    # LF1 votes -1 on row 3 (gold -1): perfect
    assert stats[1].true_accuracy == pytest.approx(1.0)
    # LF2 never votes
    assert stats[2].coverage == 0.0 and stats[2].true_accuracy is None

    blind = lf_stats(lfm)
    assert all(s.true_accuracy is None for s in blind)
    assert blind[0].coverage == pytest.approx(2 / 6)
    with pytest.raises(ValidationError):
        lf_stats(lfm, gold[:-1])


# ---------------------------------------------------------------- snippets


def test_keyword_snippets_window():
    filler = " ".join(f"w{i}" for i in range(30))
    ds = Dataset(train=[Document(id="d0", text=filler + " needle " + filler)])
    lf = LabelingFunction(id=0, kind="keyword", target_label=1, keyword="needle")
    (snippet,) = sample_snippets(ds, lf, k=4)
    toks = snippet.split()
    assert "needle" in toks
    assert len(toks) <= 21
    assert toks[10] == "needle"  # 10 tokens of context on each side


def test_snippets_sampling_rules():
    ds = _text_ds()
    lf = LabelingFunction(id=5, kind="keyword", target_label=1, keyword="alpha")
    all_matches = sample_snippets(ds, lf, k=10, seed=0)
    assert len(all_matches) == 4  # fewer matches than k: all returned
    two_a = sample_snippets(ds, lf, k=2, seed=3)
    assert two_a == sample_snippets(ds, lf, k=2, seed=3)
    assert len(two_a) == 2
    with pytest.raises(ConfigurationError):
        sample_snippets(ds, lf, k=0)
    miss = LabelingFunction(id=1, kind="keyword", target_label=1, keyword="missing")
    with pytest.raises(ValidationError):
        sample_snippets(ds, miss)


def test_cluster_snippets_fall_back_to_text_or_id():
    ds = _text_ds()
    lf = LabelingFunction(id=0, kind="mknn-cluster", target_label=1, member_ids=frozenset({"d0", "d2"}))
    assert sample_snippets(ds, lf) == ["alpha beta gamma", "beta delta"]
    vds = Dataset(train=[Document(id="v0", vector=(1.0,)), Document(id="v1", vector=(2.0,))])
    vlf = LabelingFunction(id=0, kind="mknn-cluster", target_label=1, member_ids=frozenset({"v1"}))
    assert sample_snippets(vds, vlf) == ["v1"]


# ---------------------------------------------------------------- pool io


def test_pool_round_trip(tmp_path):
    ds = _text_ds()
    pool = generate_keyword_lfs(ds, _vocab("alpha", "beta"), min_coverage=0.0)
    pool.append(
        LabelingFunction(
            id=4,
            kind="mknn-cluster",
            target_label=-1,
            member_ids=frozenset({"d0", "d1", "d2"}),
            core_ids=frozenset({"d0", "d1"}),
        )
    )
    path = str(tmp_path / "pool.json")
    save_pool(pool, path)
    assert load_pool(path) == pool


# ---------------------------------------------------------------- mutual kNN


def _knn_oracle(points, k):
    """All-pairs exact squared distances; neighbors sorted by (d2, index)."""
    n = len(points)
    lists = []
    for i in range(n):
        d2 = [
            (sum((points[i][c] - points[j][c]) ** 2 for c in range(len(points[i]))), j)
            for j in range(n)
            if j != i
        ]
        d2.sort()
        lists.append([j for _, j in d2[: min(k, n - 1)]])
    return lists


def _mknn_oracle(points, k1, k2):
    """Greedy mutual-clique cores by ascending seed, widened by shared k2 lists."""
    n = len(points)
    nn1 = _knn_oracle(points, min(k1, n - 1))
    nn2 = _knn_oracle(points, min(k2, n - 1))
    neigh = [set(a) for a in nn1]
    assigned = set()
    cores = []
    for seed in range(n):
        if seed in assigned:
            continue
        members = [seed]
        for cand in nn1[seed]:
            if len(members) >= k1:
                break
            if cand in assigned:
                continue
            if all(cand in neigh[m] and m in neigh[cand] for m in members):
                members.append(cand)
        if len(members) > 1:
            assigned.update(members)
            cores.append(members)
    out = []
    seen = set()
    for core in cores:
        counts = {}
        for c in core:
            for j in nn2[c]:
                counts[j] = counts.get(j, 0) + 1
        extended = frozenset(core) | {j for j, c in counts.items() if c >= 2}
        if extended in seen:
            continue
        seen.add(extended)
        out.append((frozenset(core), extended))
    return out


def _vector_ds(points):
    docs = [Document(id=f"d{i}", vector=tuple(map(float, p))) for i, p in enumerate(points)]
    return Dataset(train=docs, embeddings=np.asarray(points, dtype=np.float64))


def test_mknn_two_blob_hand_case():
    blob_a = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)]
    blob_b = [(100, 100), (101, 100), (100, 101), (101, 101), (102, 100)]
    ds = _vector_ds(blob_a + blob_b)
    lfs = generate_mknn_lfs(ds, k1=4, k2=4, target_label=1)
    assert len(lfs) == 2
    for lf, base in zip(lfs, (0, 5)):
        assert lf.kind == "mknn-cluster" and lf.target_label == 1
        assert lf.member_ids == frozenset(f"d{base + i}" for i in range(5))
        assert len(lf.core_ids) == 4 and lf.core_ids <= lf.member_ids
    assert [lf.id for lf in lfs] == [0, 1]


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_mknn_matches_brute_force_oracle(data):
    k1 = data.draw(st.integers(min_value=2, max_value=5))
    k2 = data.draw(st.integers(min_value=k1, max_value=8))
    n = data.draw(st.integers(min_value=k1 + 1, max_value=18))
    coords = st.tuples(
        st.integers(min_value=-5, max_value=5), st.integers(min_value=-5, max_value=5)
    )
    points = data.draw(st.lists(coords, min_size=n, max_size=n))
    ds = _vector_ds(points)
    lfs = generate_mknn_lfs(ds, k1=k1, k2=k2)
    expected = _mknn_oracle(points, k1, k2)
    assert len(lfs) == len(expected)
    for lf, (core, extended) in zip(lfs, expected):
        assert lf.core_ids == frozenset(f"d{i}" for i in core)
        assert lf.member_ids == frozenset(f"d{i}" for i in extended)


def test_mknn_validation():
    ds = _vector_ds([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(ConfigurationError):
        generate_mknn_lfs(Dataset(train=_text_ds().train), k1=2, k2=2)
    with pytest.raises(ConfigurationError):
        generate_mknn_lfs(ds, k1=1, k2=2)
    with pytest.raises(ConfigurationError):
        generate_mknn_lfs(ds, k1=3, k2=2)
    with pytest.raises(ConfigurationError):
        generate_mknn_lfs(ds, k1=3, k2=3)  # needs k1+1 points

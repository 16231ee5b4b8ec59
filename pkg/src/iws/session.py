"""Interactive session loop: queries, verdicts, finalization, baselines.

A session walks the acquisition loop for up to T iterations: the first 8
queries follow a pre-drawn schedule (4 LFs from the true-accuracy band
[0.70, 0.75] when gold labels allow, plus 4 uniform draws), after which the
feedback ensemble is refit on the verdict history and the acquisition rule
picks the next LF. Finalization cuts the final LF set for a scenario, fits
the label model on the selected columns, trains the end classifier on the
resulting soft labels, and reports coverage/AUC metrics.

Every random choice draws from a stream keyed by (seed, stream tag,
iteration), so a session resumed from disk continues bit-for-bit identically
to one that never stopped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .acquisition import (
    AcquisitionConfig,
    as_score,
    final_set_a,
    final_set_ac,
    final_set_as,
    select_next,
    straddle_score,
)
from .classifier import TrainConfig, auc, predict_proba, train_noise_aware
from .corpus import Dataset, Vocabulary, build_vocab, embed_svd
from .errors import (
    ConfigurationError,
    InsufficientFeedbackError,
    ProtocolError,
    SessionComplete,
    ValidationError,
)
from .feedback import (
    NOT_USEFUL,
    USEFUL,
    EnsembleConfig,
    LFFeatures,
    QueryDataset,
    QueryRecord,
    RESPONSES,
    cold_start_posterior,
    featurize_lfs,
    fit_ensemble,
    posterior_accuracy,
)
from .label_model import FitConfig, fit_mle, posterior_prob_labels
from .lf import (
    LabelingFunction,
    LFMatrix,
    LFStats,
    build_lf_matrix,
    generate_keyword_lfs,
    lf_stats,
    sample_snippets,
)

__all__ = [
    "SESSION_FORMAT_VERSION",
    "DEFAULT_CHECKPOINTS",
    "OracleConfig",
    "SessionState",
    "SessionContext",
    "Session",
    "build_context",
    "init_session",
    "resume_session",
    "oracle_response",
    "run_with_oracle",
    "active_learning_baseline",
    "results_to_csv",
    "save_session",
    "load_session",
]

SESSION_FORMAT_VERSION = 1
DEFAULT_CHECKPOINTS = (25, 50, 100, 150, 200)

SEED_QUERY_COUNT = 8
SEED_BAND = (0.70, 0.75)
SEED_BAND_COUNT = 4
SNIPPETS_PER_QUERY = 4

SCENARIOS = ("a", "ac", "as")
_MODE_SCENARIO = {"lse_a": "a", "lse_ac": "ac", "active_search": "as", "random": "a"}

# Stream tags for SeedSequence-derived generators.
_SS_INIT = 11
_SS_RANDOM = 12
_SS_ENS = 13
_SS_ENS_FINAL = 14
_SS_CLF = 15
_SS_SNIP = 16
_SS_AL = 17


def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(tuple(int(x) for x in parts)).generate_state(1)[0])


@dataclass(frozen=True)
class OracleConfig:
    """Simulated expert: useful iff gold-measured LF accuracy >= threshold."""

    threshold: float = 0.7

    def __post_init__(self):
        if not 0.5 < self.threshold < 1.0:
            raise ConfigurationError("oracle threshold must lie strictly inside (0.5, 1)")


@dataclass
class SessionState:
    """Everything needed to resume a session; serializable as versioned JSON."""

    config: AcquisitionConfig
    T: int
    seed: int
    schedule: list[int]
    queries: QueryDataset = field(default_factory=QueryDataset)
    pending: int | None = None
    finalized: dict | None = None
    warnings: list[str] = field(default_factory=list)
    pool_ref: str = ""

    @property
    def iteration(self) -> int:
        return len(self.queries) + (1 if self.pending is not None else 0)

    def to_dict(self) -> dict:
        return {
            "version": SESSION_FORMAT_VERSION,
            "config": {
                "mode": self.config.mode,
                "r": self.config.r,
                "m_tilde": self.config.m_tilde,
                "seed": self.config.seed,
            },
            "T": self.T,
            "seed": self.seed,
            "schedule": list(self.schedule),
            "records": [
                {"lf_id": r.lf_id, "response": r.response, "weight": r.weight, "iteration": r.iteration}
                for r in self.queries.records
            ],
            "pending": self.pending,
            "finalized": self.finalized,
            "warnings": list(self.warnings),
            "pool_ref": self.pool_ref,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SessionState":
        if obj.get("version") != SESSION_FORMAT_VERSION:
            raise ConfigurationError(
                f"session format version {obj.get('version')!r} not supported "
                f"(expected {SESSION_FORMAT_VERSION})"
            )
        cfg = obj["config"]
        return cls(
            config=AcquisitionConfig(mode=cfg["mode"], r=cfg["r"], m_tilde=cfg["m_tilde"], seed=cfg["seed"]),
            T=obj["T"],
            seed=obj["seed"],
            schedule=list(obj["schedule"]),
            queries=QueryDataset([QueryRecord(**r) for r in obj["records"]]),
            pending=obj["pending"],
            finalized=obj["finalized"],
            warnings=list(obj["warnings"]),
            pool_ref=obj["pool_ref"],
        )


# Keyword LFs vote their target or abstain, and on such one-sided panels a
# long unsupervised ascent drifts off the class-aligned ridge into the
# co-occurrence optimum (see fit_mle). Finalize therefore refines the
# vote-anchored init for a short, fixed budget.
FINALIZE_FIT = FitConfig(step=0.1, max_steps=200)


@dataclass
class SessionContext:
    """Immutable per-corpus artifacts shared by every session and baseline."""

    ds: Dataset
    pool: list[LabelingFunction]
    lfm: LFMatrix
    features: LFFeatures
    stats: list[LFStats]
    train_x: np.ndarray
    test_x: np.ndarray
    class_prior: float = 0.5
    ensemble_config: EnsembleConfig = field(default_factory=EnsembleConfig)
    fit_config: FitConfig = FINALIZE_FIT
    clf_config: TrainConfig = field(default_factory=TrainConfig)
    refit_stride: int = 1
    checkpoints: tuple[int, ...] = DEFAULT_CHECKPOINTS
    pool_ref: str = ""

    def __post_init__(self):
        if self.refit_stride < 1:
            raise ConfigurationError("refit_stride must be >= 1")
        self._coverage = self.lfm.coverage()

    @property
    def coverage(self) -> np.ndarray:
        return self._coverage

    @property
    def p(self) -> int:
        return len(self.pool)


def build_context(
    ds: Dataset,
    pool: list[LabelingFunction] | None = None,
    *,
    vocab: Vocabulary | None = None,
    min_coverage: float = 0.002,
    svd_dim: int = 300,
    feature_dim: int = 150,
    class_prior: float = 0.5,
    ensemble_config: EnsembleConfig | None = None,
    fit_config: FitConfig | None = None,
    clf_config: TrainConfig | None = None,
    refit_stride: int = 1,
    checkpoints: tuple[int, ...] = DEFAULT_CHECKPOINTS,
    pool_ref: str = "",
) -> SessionContext:
    """Assemble the shared artifacts: pool, vote matrix, features, embeddings."""
    if ds.embeddings is None and vocab is None:
        vocab = build_vocab(ds)
    if pool is None:
        if vocab is None:
            raise ConfigurationError("a vector corpus needs an explicit LF pool")
        pool = generate_keyword_lfs(ds, vocab, min_coverage)
    lfm = build_lf_matrix(ds, pool)
    features = featurize_lfs(lfm, feature_dim)
    if ds.embeddings is not None:
        train_x = np.asarray(ds.embeddings, dtype=np.float64)
        test_x = (
            np.asarray(ds.test_embeddings, dtype=np.float64)
            if ds.test_embeddings is not None
            else np.zeros((0, train_x.shape[1]))
        )
    else:
        emb = embed_svd(ds, vocab, svd_dim)
        train_x, test_x = emb.train, emb.test
    gold = ds.gold_train()
    stats = lf_stats(lfm, gold)
    return SessionContext(
        ds=ds,
        pool=pool,
        lfm=lfm,
        features=features,
        stats=stats,
        train_x=train_x,
        test_x=test_x,
        class_prior=class_prior,
        ensemble_config=ensemble_config or EnsembleConfig(),
        fit_config=fit_config or FINALIZE_FIT,
        clf_config=clf_config or TrainConfig(),
        refit_stride=refit_stride,
        checkpoints=checkpoints,
        pool_ref=pool_ref,
    )


def _draw_schedule(ctx: SessionContext, config: AcquisitionConfig) -> tuple[list[int], list[str]]:
    rng = np.random.default_rng(np.random.SeedSequence((config.seed, _SS_INIT)))
    warnings: list[str] = []
    band_ids = [
        j
        for j, s in enumerate(ctx.stats)
        if s.true_accuracy is not None and SEED_BAND[0] <= s.true_accuracy <= SEED_BAND[1]
    ]
    chosen: list[int] = []
    if band_ids:
        take = min(SEED_BAND_COUNT, len(band_ids))
        picked = rng.choice(len(band_ids), size=take, replace=False)
        chosen.extend(band_ids[i] for i in picked)
        if take < SEED_BAND_COUNT:
            warnings.append(
                f"only {take} LFs in the {SEED_BAND} accuracy band; filled the rest randomly"
            )
    elif any(s.true_accuracy is not None for s in ctx.stats):
        warnings.append(f"no LFs in the {SEED_BAND} accuracy band; all seed queries random")
    remaining = sorted(set(range(ctx.p)) - set(chosen))
    need = SEED_QUERY_COUNT - len(chosen)
    picked = rng.choice(len(remaining), size=need, replace=False)
    chosen.extend(remaining[i] for i in picked)
    return chosen, warnings


def init_session(ctx: SessionContext, config: AcquisitionConfig, T: int) -> "Session":
    """Fresh session with the 8-query seed schedule drawn up front."""
    if T < SEED_QUERY_COUNT:
        raise ConfigurationError(f"T must be >= {SEED_QUERY_COUNT}")
    if ctx.p < SEED_QUERY_COUNT:
        raise ConfigurationError(f"pool must hold at least {SEED_QUERY_COUNT} LFs")
    schedule, warnings = _draw_schedule(ctx, config)
    state = SessionState(
        config=config,
        T=T,
        seed=config.seed,
        schedule=schedule,
        warnings=warnings,
        pool_ref=ctx.pool_ref,
    )
    return Session(ctx, state)


def resume_session(ctx: SessionContext, state: SessionState) -> "Session":
    return Session(ctx, state)


class Session:
    """Binds mutable SessionState to its immutable SessionContext."""

    def __init__(self, ctx: SessionContext, state: SessionState):
        self.ctx = ctx
        self.state = state
        self._posteriors: dict[tuple[str, int], tuple[np.ndarray, np.ndarray]] = {}

    def _fit_posterior(self, q: QueryDataset, seed: int) -> tuple[np.ndarray, np.ndarray]:
        try:
            model = fit_ensemble(self.ctx.features, q, seed=seed, config=self.ctx.ensemble_config)
        except InsufficientFeedbackError:
            return cold_start_posterior(self.ctx.p)
        return posterior_accuracy(model, self.ctx.features)

    def _loop_posterior(self, t_next: int) -> tuple[np.ndarray, np.ndarray]:
        """Posterior used to pick query t_next; stride controls refit cadence."""
        stride = self.ctx.refit_stride
        t_used = SEED_QUERY_COUNT + 1 + ((t_next - SEED_QUERY_COUNT - 1) // stride) * stride
        key = ("loop", t_used)
        if key not in self._posteriors:
            q = self.state.queries.prefix(t_used - 1)
            seed = _derive_seed(self.state.seed, _SS_ENS, t_used)
            self._posteriors[key] = self._fit_posterior(q, seed)
        return self._posteriors[key]

    def next_query(self) -> dict:
        """Pick and present the next LF; marks it pending until answered."""
        st = self.state
        if st.finalized is not None:
            raise ProtocolError("session already finalized")
        if st.pending is not None:
            raise ProtocolError(f"LF {st.pending} is awaiting a response")
        t_next = len(st.queries) + 1
        if t_next > st.T:
            raise SessionComplete(f"iteration budget T={st.T} exhausted")
        if len(st.queries) >= self.ctx.p:
            raise SessionComplete("LF pool exhausted")
        if t_next <= SEED_QUERY_COUNT:
            lf_id = st.schedule[t_next - 1]
        elif st.config.mode == "random":
            rng = np.random.default_rng(np.random.SeedSequence((st.seed, _SS_RANDOM, t_next)))
            lf_id = select_next(
                np.zeros(self.ctx.p), st.queries.queried_ids(), mode="random", rng=rng
            )
        else:
            mu, sigma = self._loop_posterior(t_next)
            if st.config.mode == "active_search":
                scores = as_score(mu)
            else:
                scores = straddle_score(mu, sigma, st.config.r)
            lf_id = select_next(scores, st.queries.queried_ids())
        st.pending = lf_id
        return self._query_payload(lf_id, t_next)

    def _query_payload(self, lf_id: int, t_next: int) -> dict:
        st = self.state
        lf = self.ctx.pool[lf_id]
        snippets = sample_snippets(
            self.ctx.ds, lf, SNIPPETS_PER_QUERY, seed=_derive_seed(st.seed, _SS_SNIP, t_next)
        )
        return {
            "lf_id": lf_id,
            "kind": lf.kind,
            "target_label": lf.target_label,
            "keyword": lf.keyword,
            "cluster_size": len(lf.member_ids) if lf.member_ids else None,
            "description": lf.describe(),
            "snippets": snippets,
            "iteration": st.iteration,
            "T": st.T,
        }

    def pending_query(self) -> dict | None:
        """Re-derive the payload of the currently pending query, if any."""
        st = self.state
        if st.pending is None:
            return None
        return self._query_payload(st.pending, len(st.queries) + 1)

    def record_response(self, lf_id: int, response: str, confident: bool = True) -> None:
        st = self.state
        if st.pending is None or lf_id != st.pending:
            raise ProtocolError(f"LF {lf_id} is not the pending query")
        if response not in RESPONSES:
            raise ValidationError(f"response must be one of {RESPONSES}")
        st.queries.add(
            QueryRecord(
                lf_id=lf_id,
                response=response,
                weight=1.0 if confident else 0.5,
                iteration=len(st.queries) + 1,
            )
        )
        st.pending = None

    def posterior_at(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        """Finalization-time posterior from the first t verdicts."""
        key = ("final", t)
        if key not in self._posteriors:
            q = self.state.queries.prefix(t)
            seed = _derive_seed(self.state.seed, _SS_ENS_FINAL, t)
            self._posteriors[key] = self._fit_posterior(q, seed)
        return self._posteriors[key]

    def finalize(self, scenario: str, at: int | None = None, store: bool = True) -> dict:
        """Cut the final LF set, fit label model + classifier, report metrics.

        An empty final set yields a null result (auc None) rather than an
        error. `at` evaluates the pipeline as of an earlier iteration.
        """
        if scenario not in SCENARIOS:
            raise ConfigurationError(f"scenario must be one of {SCENARIOS}")
        st = self.state
        t = len(st.queries) if at is None else at
        if t < SEED_QUERY_COUNT:
            raise ValidationError(f"need at least {SEED_QUERY_COUNT} responses before finalizing")
        if t > len(st.queries):
            raise ValidationError(f"only {len(st.queries)} responses recorded")
        prefix = st.queries.prefix(t)
        if scenario == "as":
            selected = final_set_as(prefix)
        else:
            mu, _ = self.posterior_at(t)
            if scenario == "a":
                selected = final_set_a(mu, st.config.r)
            else:
                m = len(prefix.useful_ids()) + st.config.m_tilde
                selected = final_set_ac(mu, self.ctx.coverage, st.config.r, m)
        chosen = sorted(selected)
        metrics: dict = {
            "scenario": scenario,
            "iteration": t,
            "n_selected": len(chosen),
            "selected": chosen,
            "mean_lf_coverage": 0.0,
            "label_coverage": 0.0,
            "auc": None,
        }
        if chosen:
            sub = LFMatrix(self.ctx.lfm.matrix[:, chosen])
            params = fit_mle(sub, self.ctx.class_prior, init="mv", config=self.ctx.fit_config)
            probs = posterior_prob_labels(sub, params)
            covered = np.diff(sub.matrix.tocsr().indptr) > 0
            clf = train_noise_aware(
                self.ctx.train_x,
                probs,
                seed=_derive_seed(st.seed, _SS_CLF, t),
                config=self.ctx.clf_config,
                covered=covered,
            )
            metrics["mean_lf_coverage"] = float(np.mean(self.ctx.coverage[chosen]))
            metrics["label_coverage"] = float(covered.mean())
            gold_test = self.ctx.ds.gold_test()
            if gold_test is not None and self.ctx.test_x.shape[0] == gold_test.shape[0] > 0:
                metrics["auc"] = auc(predict_proba(clf, self.ctx.test_x), gold_test)
        if store:
            st.finalized = metrics
        return metrics


def oracle_response(lf_id: int, stats: list[LFStats], oracle: OracleConfig = OracleConfig()) -> str:
    """Deterministic expert stand-in; never answers unsure."""
    acc = stats[lf_id].true_accuracy
    if acc is None:
        raise ValidationError(f"LF {lf_id} has no measurable accuracy (zero coverage or no gold)")
    return USEFUL if acc >= oracle.threshold else NOT_USEFUL


def _active_checkpoints(checkpoints: tuple[int, ...], T: int) -> list[int]:
    return sorted(c for c in set(checkpoints) if SEED_QUERY_COUNT <= c <= T)


def run_with_oracle(
    ctx: SessionContext,
    config: AcquisitionConfig,
    T: int,
    oracle: OracleConfig = OracleConfig(),
    scenario: str | None = None,
    checkpoints: tuple[int, ...] | None = None,
) -> list[dict]:
    """Run one full simulated session; one metrics row per checkpoint."""
    if any(s.true_accuracy is None for s in ctx.stats):
        raise ConfigurationError("oracle runs need gold train labels covering every LF")
    scenario = scenario or _MODE_SCENARIO[config.mode]
    cps = _active_checkpoints(checkpoints or ctx.checkpoints, T)
    sess = init_session(ctx, config, T)
    rows: list[dict] = []
    while len(sess.state.queries) < T:
        try:
            query = sess.next_query()
        except SessionComplete:
            break
        lf_id = query["lf_id"]
        sess.record_response(lf_id, oracle_response(lf_id, ctx.stats, oracle))
        t = len(sess.state.queries)
        if t in cps:
            metrics = sess.finalize(scenario, at=t, store=False)
            rows.append(
                {
                    "iteration": t,
                    "mode": config.mode,
                    "seed": config.seed,
                    "n_lfs": metrics["n_selected"],
                    "coverage": metrics["label_coverage"],
                    "auc": metrics["auc"],
                }
            )
    return rows


def active_learning_baseline(
    ctx: SessionContext,
    T: int,
    seed: int = 0,
    checkpoints: tuple[int, ...] | None = None,
) -> list[dict]:
    """Uncertainty-sampling baseline with a noiseless per-sample oracle.

    Seeds 8 random gold labels (mirroring the session initialization size),
    then repeatedly labels the sample whose classifier score sits closest to
    0.5, retraining after every acquisition.
    """
    gold = ctx.ds.gold_train()
    gold_test = ctx.ds.gold_test()
    if gold is None:
        raise ConfigurationError("active-learning baseline needs gold train labels")
    n = ctx.ds.n_train
    if T < SEED_QUERY_COUNT or T > n:
        raise ConfigurationError(f"need {SEED_QUERY_COUNT} <= T <= n_train")
    hard = (gold == 1).astype(np.float64)
    cps = _active_checkpoints(checkpoints or ctx.checkpoints, T)
    rng = np.random.default_rng(np.random.SeedSequence((seed, _SS_AL)))
    labeled = sorted(rng.choice(n, size=SEED_QUERY_COUNT, replace=False).tolist())
    unlabeled = np.ones(n, dtype=bool)
    unlabeled[labeled] = False
    rows: list[dict] = []
    for t in range(SEED_QUERY_COUNT, T + 1):
        clf = train_noise_aware(
            ctx.train_x[labeled],
            hard[labeled],
            seed=_derive_seed(seed, _SS_CLF, t),
            config=ctx.clf_config,
        )
        if t in cps:
            auc_val = None
            if gold_test is not None and ctx.test_x.shape[0] == gold_test.shape[0] > 0:
                auc_val = auc(predict_proba(clf, ctx.test_x), gold_test)
            rows.append(
                {
                    "iteration": t,
                    "mode": "al",
                    "seed": seed,
                    "n_lfs": 0,
                    "coverage": t / n,
                    "auc": auc_val,
                }
            )
        if t == T:
            break
        scores = predict_proba(clf, ctx.train_x)
        open_ids = np.flatnonzero(unlabeled)
        pick = int(open_ids[np.argmin(np.abs(scores[open_ids] - 0.5))])
        labeled.append(pick)
        unlabeled[pick] = False
    return rows


def results_to_csv(rows: list[dict]) -> str:
    """Canonical CSV used by the CLI and the acceptance experiments."""
    lines = ["iteration,mode,seed,n_lfs,coverage,auc"]
    for r in rows:
        auc_txt = "" if r["auc"] is None else f"{r['auc']:.6f}"
        lines.append(
            f"{r['iteration']},{r['mode']},{r['seed']},{r['n_lfs']},{r['coverage']:.6f},{auc_txt}"
        )
    return "\n".join(lines) + "\n"


def save_session(state: SessionState, path: str) -> None:
    """Canonical JSON so save -> load -> save is byte-identical."""
    text = json.dumps(state.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_session(path: str) -> SessionState:
    with open(path, encoding="utf-8") as fh:
        return SessionState.from_dict(json.load(fh))

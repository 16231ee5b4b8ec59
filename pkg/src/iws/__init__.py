"""Interactive weak supervision: annotate labeling functions, not samples.

An expert answers a stream of "is this heuristic useful?" queries. The
answers train a feedback model that steers which heuristic to show next;
the validated pool then feeds a generative label model whose probabilistic
labels train the downstream classifier.
"""

from .acquisition import (
    AcquisitionConfig,
    as_score,
    final_set_a,
    final_set_ac,
    final_set_as,
    select_next,
    straddle_score,
)
from .classifier import Classifier, TrainConfig, auc, predict_proba, train_noise_aware
from .corpus import (
    Dataset,
    Document,
    SvdEmbedding,
    Vocabulary,
    build_vocab,
    embed_svd,
    load_corpus,
    load_split,
    save_corpus,
    tokenize,
)
from .errors import (
    ConfigurationError,
    InsufficientFeedbackError,
    IWSError,
    MalformedRecordError,
    ProtocolError,
    SessionComplete,
    ValidationError,
)
from .feedback import (
    NOT_USEFUL,
    UNSURE,
    USEFUL,
    EnsembleConfig,
    EnsembleModel,
    LFFeatures,
    QueryDataset,
    QueryRecord,
    cold_start_posterior,
    featurize_lfs,
    fit_ensemble,
    posterior_accuracy,
)
from .label_model import (
    FitConfig,
    LabelModelParams,
    closed_form_theta,
    fit_mle,
    gradient,
    implied_accuracy_propensity,
    log_marginal_likelihood,
    majority_vote,
    posterior_prob_labels,
    theorem_bound,
)
from .lf import (
    LabelingFunction,
    LFMatrix,
    LFStats,
    build_lf_matrix,
    generate_keyword_lfs,
    generate_mknn_lfs,
    lf_stats,
    load_pool,
    sample_snippets,
    save_pool,
)
from .session import (
    OracleConfig,
    Session,
    SessionContext,
    SessionState,
    active_learning_baseline,
    build_context,
    init_session,
    load_session,
    oracle_response,
    resume_session,
    results_to_csv,
    run_with_oracle,
    save_session,
)
from .synthetic import make_synthetic_corpus

__version__ = "0.1.0"

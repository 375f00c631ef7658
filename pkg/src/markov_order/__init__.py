"""Markov chain order selection for path corpora."""

from .bayes import log_evidence, model_posterior, posterior_mean, posterior_mean_model
from .corpus import (RESET_ID, RESET_LABEL, CorpusError, PathCorpus, StateVocabulary,
                     generate_markov_corpus, generate_uniform_corpus, load_corpus,
                     prepare_sequences)
from .counts import ContextCounts, count_transitions, merge
from .crossval import cross_validate, rank_in_row, stratified_folds, topk_hit_rate
from .infocrit import aic, bic, select_order
from .likelihood import MarkovModel, fit_mle, likelihood_ratio, log_likelihood, lrt_test
from .numerics import chi2_sf, log_gamma, log_sum_exp
from .report import SelectionReport, run_selection
from .structure import (global_heatmap, local_graph, self_transition_profile,
                        split_by_endpoints)

__version__ = "0.1.0"

__all__ = [
    "RESET_ID", "RESET_LABEL", "ContextCounts", "CorpusError", "MarkovModel", "PathCorpus",
    "SelectionReport", "StateVocabulary", "aic", "bic", "chi2_sf", "count_transitions",
    "cross_validate", "fit_mle", "generate_markov_corpus", "generate_uniform_corpus",
    "global_heatmap", "likelihood_ratio", "load_corpus", "local_graph", "log_evidence",
    "log_gamma", "log_likelihood", "log_sum_exp", "lrt_test", "merge", "model_posterior",
    "posterior_mean", "posterior_mean_model", "prepare_sequences", "rank_in_row",
    "run_selection", "select_order", "self_transition_profile", "split_by_endpoints",
    "stratified_folds", "topk_hit_rate",
]

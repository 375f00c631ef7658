"""Maximum-likelihood fitting, log-likelihoods and likelihood-ratio tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .corpus import PathCorpus
from .counts import ContextCounts, context_keys, count_transitions
from .numerics import chi2_sf, int_to_float

# tolerated negative slack in a likelihood ratio before inputs count as non-nested
NESTING_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class MarkovModel:
    """Order-``k`` transition rows over ``n_states`` next states.

    Rows are stored sparsely: observed cells carry their own probability and
    every other entry of an observed row equals ``row_default[c]``.  Contexts
    never seen in training use ``default_row`` (``None`` means no row, i.e.
    probability zero everywhere, which is the pure-MLE convention).
    """

    order: int
    n_states: int
    contexts: np.ndarray
    cell_context: np.ndarray
    cell_next: np.ndarray
    cell_prob: np.ndarray
    row_default: np.ndarray
    smoothing: float = 0.0
    default_row: np.ndarray | None = None

    @classmethod
    def from_counts(cls, counts: ContextCounts, alpha: float = 0.0) -> "MarkovModel":
        """Rows ``(n_ij + alpha) / (n_i + |S| alpha)``; ``alpha = 0`` is the MLE."""
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        if alpha == 0 and counts.n_total == 0:
            raise ValueError("cannot fit a maximum-likelihood model to empty counts")
        S = counts.n_states
        denom = counts.row_totals.astype(float) + S * alpha
        cell_prob = (counts.cell_count + alpha) / denom[counts.cell_context]
        row_default = alpha / denom
        default_row = np.full(S, 1.0 / S) if alpha > 0 else None
        return cls(counts.order, S, counts.contexts, counts.cell_context, counts.cell_next,
                   cell_prob, row_default, float(alpha), default_row)

    @cached_property
    def keys(self) -> np.ndarray:
        return context_keys(self.contexts, self.n_states)

    @cached_property
    def row_starts(self) -> np.ndarray:
        return np.searchsorted(self.cell_context, np.arange(len(self.contexts) + 1))

    @cached_property
    def _cell_codes(self) -> np.ndarray:
        return self.cell_context * self.n_states + self.cell_next

    def find_contexts(self, keys: np.ndarray) -> np.ndarray:
        if len(self.contexts) == 0:
            return np.full(len(keys), -1, dtype=np.int64)
        pos = np.minimum(np.searchsorted(self.keys, keys), len(self.contexts) - 1)
        return np.where(self.keys[pos] == keys, pos, -1).astype(np.int64)

    def row(self, context) -> np.ndarray:
        """Dense next-state distribution for one context."""
        ctx = np.asarray(context, dtype=np.int64).reshape(1, self.order)
        c = int(self.find_contexts(context_keys(ctx, self.n_states))[0])
        if c < 0:
            if self.default_row is None:
                return np.zeros(self.n_states)
            return self.default_row.copy()
        out = np.full(self.n_states, self.row_default[c])
        lo, hi = self.row_starts[c], self.row_starts[c + 1]
        out[self.cell_next[lo:hi]] = self.cell_prob[lo:hi]
        return out

    def prob(self, context, next_state: int) -> float:
        return float(self.row(context)[next_state])

    def locate(self, contexts: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Model context index and cell index (``-1`` when absent) of each pair."""
        ctx_idx = self.find_contexts(context_keys(contexts, self.n_states))
        codes = np.where(ctx_idx >= 0, ctx_idx * self.n_states + targets, -1)
        if len(self._cell_codes) == 0:
            return ctx_idx, np.full(len(codes), -1, dtype=np.int64)
        pos = np.minimum(np.searchsorted(self._cell_codes, codes), len(self._cell_codes) - 1)
        cell_idx = np.where((codes >= 0) & (self._cell_codes[pos] == codes), pos, -1)
        return ctx_idx, cell_idx.astype(np.int64)

    def probabilities(self, contexts: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """Vectorized ``p(target | context)`` for arrays of pairs."""
        targets = np.asarray(targets, dtype=np.int64)
        ctx_idx, cell_idx = self.locate(contexts, targets)
        unseen = 0.0 if self.default_row is None else 1.0 / self.n_states
        out = np.full(len(targets), unseen)
        seen = ctx_idx >= 0
        out[seen] = self.row_default[ctx_idx[seen]]
        has_cell = cell_idx >= 0
        out[has_cell] = self.cell_prob[cell_idx[has_cell]]
        return out

    def row_sums(self) -> np.ndarray:
        """Sum of every materialized row (should be 1)."""
        nnz = np.diff(self.row_starts)
        cell_sums = np.zeros(len(self.contexts))
        np.add.at(cell_sums, self.cell_context, self.cell_prob)
        return cell_sums + (self.n_states - nnz) * self.row_default

    @property
    def rows(self) -> dict[tuple[int, ...], np.ndarray]:
        return {tuple(c): self.row(c) for c in self.contexts.tolist()}


def fit_mle(counts: ContextCounts) -> MarkovModel:
    """Row-normalized counts; contexts never observed get no row."""
    return MarkovModel.from_counts(counts, 0.0)


def log_likelihood(counts: ContextCounts, model: MarkovModel) -> float:
    """``sum n_ij log p_ij`` over the observed cells; ``-inf`` if any p_ij is 0."""
    if model.order != counts.order:
        raise ValueError("model and counts have different orders")
    if counts.n_cells == 0:
        return 0.0
    p = model.probabilities(counts.cell_contexts(), counts.cell_next)
    if np.any(p <= 0):
        return -math.inf
    return float(math.fsum(counts.cell_count * np.log(p)))


def mle_log_likelihood(counts: ContextCounts) -> float:
    """Log-likelihood of counts under their own MLE, straight from the counts."""
    if counts.n_cells == 0:
        return 0.0
    n = counts.cell_count.astype(float)
    totals = counts.row_totals.astype(float)[counts.cell_context]
    return float(math.fsum(n * (np.log(n) - np.log(totals))))


def likelihood_ratio(ll_null: float, ll_alt: float) -> float:
    """``-2 (ll_null - ll_alt)``, clipped at zero for round-off."""
    eta = -2.0 * (ll_null - ll_alt)
    if eta < -NESTING_TOLERANCE * max(1.0, abs(ll_null), abs(ll_alt)):
        raise ValueError(
            f"negative likelihood ratio {eta!r}: null model is not nested in the alternative"
        )
    return max(eta, 0.0)


def degrees_of_freedom(n_states: int, k: int, m: int) -> float:
    """``(|S|^m - |S|^k)(|S| - 1)`` as a float, ``inf`` on overflow."""
    return int_to_float((n_states ** m - n_states ** k) * (n_states - 1))


@dataclass(frozen=True)
class LrtResult:
    k_null: int
    m_alt: int
    eta: float
    df: float
    p_value: float

    def stars(self) -> str:
        """``**`` below 0.1 %, ``*`` below 1 %."""
        if self.p_value < 0.001:
            return "**"
        if self.p_value < 0.01:
            return "*"
        return ""


def lrt_from_loglik(ll_null: float, ll_alt: float, n_states: int, k: int, m: int) -> LrtResult:
    if not k < m:
        raise ValueError("null order must be smaller than the alternative order")
    eta = likelihood_ratio(ll_null, ll_alt)
    df = degrees_of_freedom(n_states, k, m)
    return LrtResult(k, m, eta, df, chi2_sf(eta, df))


def lrt_test(corpus: PathCorpus, k: int, m: int, include_reset: bool = True) -> LrtResult:
    """Likelihood-ratio test of order ``k`` (null) against order ``m``.

    With ``include_reset=False`` the degrees of freedom use the number of
    input states without the RESET state.
    """
    if not 0 <= k < m:
        raise ValueError("need 0 <= k < m")
    counts_k = count_transitions(corpus, k)
    counts_m = count_transitions(corpus, m)
    ll_k = log_likelihood(counts_k, fit_mle(counts_k))
    ll_m = log_likelihood(counts_m, fit_mle(counts_m))
    n_states = corpus.n_states if include_reset else corpus.n_states - 1
    return lrt_from_loglik(ll_k, ll_m, n_states, k, m)

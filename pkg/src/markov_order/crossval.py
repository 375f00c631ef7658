"""Stratified k-fold cross-validation scored by the rank of the true next state."""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bayes import posterior_mean_model
from .corpus import RESET_ID, PathCorpus
from .counts import ContextCounts, count_transitions
from .likelihood import MarkovModel


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    n_folds: int
    fold_of_path: np.ndarray
    fold_clicks: tuple[int, ...]

    def paths_in(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_path == fold)

    def paths_outside(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_path != fold)


def stratified_folds(corpus: PathCorpus, n_folds: int = 10, seed: int = 0) -> FoldAssignment:
    """Shuffle whole paths, then hand each to the fold with the fewest clicks so far."""
    if n_folds < 2:
        raise ValueError("need at least two folds")
    if corpus.n_paths < n_folds:
        raise ValueError(f"{corpus.n_paths} paths cannot fill {n_folds} folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(corpus.n_paths)
    lengths = corpus.lengths
    heap = [(0, f) for f in range(n_folds)]
    fold_of_path = np.empty(corpus.n_paths, dtype=np.int64)
    for p in order.tolist():
        clicks, f = heapq.heappop(heap)
        fold_of_path[p] = f
        heapq.heappush(heap, (clicks + int(lengths[p]), f))
    totals = np.bincount(fold_of_path, weights=lengths, minlength=n_folds).astype(np.int64)
    return FoldAssignment(n_folds, fold_of_path, tuple(int(t) for t in totals))


def rank_in_row(row, target: int) -> int:
    """Modified competition rank of ``target`` in a probability row.

    Ties all receive the largest rank of their class ("1 4 4 4 5"), so an
    all-tied row ranks every target last.
    """
    row = np.asarray(row, dtype=float)
    if not 0 <= target < len(row):
        raise IndexError(f"target {target} outside a row of {len(row)} states")
    return int(np.count_nonzero(row >= row[target]))


def cell_ranks(model: MarkovModel) -> np.ndarray:
    """Rank of every stored cell of ``model`` within its own row."""
    n = len(model.cell_prob)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    ctx, p = model.cell_context, model.cell_prob
    order = np.lexsort((-p, ctx))
    ctx_s, p_s = ctx[order], p[order]
    new_run = np.r_[True, (ctx_s[1:] != ctx_s[:-1]) | (p_s[1:] != p_s[:-1])]
    run_id = np.cumsum(new_run) - 1
    run_last = np.r_[np.flatnonzero(new_run)[1:], n] - 1
    starts = model.row_starts
    ranks_sorted = run_last[run_id] - starts[ctx_s] + 1
    nnz = np.diff(starts)[ctx_s]
    ranks_sorted += np.where(model.row_default[ctx_s] >= p_s, model.n_states - nnz, 0)
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = ranks_sorted
    return ranks


def transition_ranks(model: MarkovModel, contexts: np.ndarray, targets: np.ndarray,
                     ranks: np.ndarray | None = None) -> np.ndarray:
    """Rank of each target in its context's row.

    Targets without a stored cell (including every target of an unseen
    context) sit in the all-tied tail of their row and get rank ``n_states``.
    """
    ranks = cell_ranks(model) if ranks is None else ranks
    _, cell_idx = model.locate(contexts, np.asarray(targets, dtype=np.int64))
    out = np.full(len(cell_idx), model.n_states, dtype=np.int64)
    hit = cell_idx >= 0
    out[hit] = ranks[cell_idx[hit]]
    return out


def average_rank(model: MarkovModel, test_counts: ContextCounts,
                 include_reset_targets: bool = True) -> float:
    """Count-weighted mean rank of held-out transitions."""
    keep = np.ones(test_counts.n_cells, dtype=bool)
    if not include_reset_targets:
        keep = test_counts.cell_next != RESET_ID
    n = test_counts.cell_count[keep]
    if n.sum() == 0:
        return math.nan
    r = transition_ranks(model, test_counts.cell_contexts()[keep], test_counts.cell_next[keep])
    return float(np.dot(n, r) / n.sum())


def topk_hit_rate(model: MarkovModel, test_counts: ContextCounts, K: int = 5,
                  seed: int = 0) -> float:
    """Share of held-out transitions whose next state is among the top ``K`` of its row.

    When the K-th place is shared, the remaining slots are filled by a seeded
    draw without replacement from the tied states.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if test_counts.n_total == 0:
        return math.nan
    rng = np.random.default_rng(seed)
    hits = 0
    starts = test_counts.row_starts
    for c, ctx in enumerate(test_counts.contexts):
        row = model.row(ctx)
        chosen = top_k_states(row, K, rng)
        lo, hi = starts[c], starts[c + 1]
        nxt = test_counts.cell_next[lo:hi]
        hits += int(test_counts.cell_count[lo:hi][chosen[nxt]].sum())
    return hits / test_counts.n_total


def top_k_states(row: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """Boolean mask of the K chosen states of a row (random among boundary ties)."""
    row = np.asarray(row, dtype=float)
    S = len(row)
    mask = np.zeros(S, dtype=bool)
    if K >= S:
        mask[:] = True
        return mask
    threshold = np.sort(row)[::-1][K - 1]
    above = row > threshold
    mask[above] = True
    ties = np.flatnonzero(row == threshold)
    slots = K - int(above.sum())
    mask[rng.choice(ties, size=slots, replace=False)] = True
    return mask


@dataclass(frozen=True)
class CvResult:
    order: int
    fold_ranks: tuple[float, ...]
    topk_rates: tuple[float, ...] | None = field(default=None)

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_ranks))

    @property
    def std(self) -> float:
        return float(np.std(self.fold_ranks))

    @property
    def topk_mean(self) -> float | None:
        if self.topk_rates is None:
            return None
        return float(np.mean(self.topk_rates))


def _evaluate_fold(corpus: PathCorpus, folds: FoldAssignment, fold: int, k: int,
                   alpha: float, include_reset_targets: bool, topk: int | None,
                   seed: int) -> tuple[float, float | None]:
    train = count_transitions(corpus.subset(folds.paths_outside(fold)), k)
    test = count_transitions(corpus.subset(folds.paths_in(fold)), k)
    model = posterior_mean_model(train, alpha)
    rank = average_rank(model, test, include_reset_targets)
    rate = None
    if topk is not None:
        rate = topk_hit_rate(model, test, topk, seed=seed + fold)
    return rank, rate


def cross_validate(corpus: PathCorpus, k: int, n_folds: int = 10, alpha: float = 1.0,
                   seed: int = 0, *, folds: FoldAssignment | None = None,
                   include_reset_targets: bool = True, topk: int | None = None,
                   threads: int = 1) -> CvResult:
    """Train a posterior-mean model on all other folds and rank each held-out fold."""
    if not alpha > 0:
        raise ValueError("cross-validation needs alpha > 0 to rank unseen transitions")
    if folds is None:
        folds = stratified_folds(corpus, n_folds, seed)

    def run(f):
        return _evaluate_fold(corpus, folds, f, k, alpha, include_reset_targets, topk, seed)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, range(folds.n_folds)))
    else:
        results = [run(f) for f in range(folds.n_folds)]
    ranks = tuple(r for r, _ in results)
    rates = tuple(t for _, t in results) if topk is not None else None
    return CvResult(k, ranks, rates)

"""Sparse order-k transition counts keyed by compound-state contexts."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .corpus import PathCorpus, prepare_sequences

_INT_KEY_LIMIT = 2 ** 62


def context_keys(contexts: np.ndarray, n_states: int) -> np.ndarray:
    """Collision-free sortable keys for the rows of a ``(n, k)`` context array.

    Small context spaces use the base-``n_states`` integer code; otherwise the
    big-endian bytes of each row are used as an opaque (void) key.  Both sort
    lexicographically by context tuple, oldest position first.
    """
    contexts = np.asarray(contexts, dtype=np.int64)
    n, k = contexts.shape
    if k == 0:
        return np.zeros(n, dtype=np.int64)
    if n_states ** k < _INT_KEY_LIMIT:
        weights = np.array([n_states ** (k - 1 - i) for i in range(k)], dtype=np.int64)
        return contexts @ weights
    be = np.ascontiguousarray(contexts, dtype=">i8")
    return be.view(np.dtype((np.void, 8 * k))).ravel()


@dataclass(frozen=True, eq=False)
class ContextCounts:
    """Observed transitions of an order-``k`` chain.

    Only observed contexts are stored.  ``contexts`` (shape ``(C, k)``) is
    sorted by key; each stored cell ``m`` is the transition
    ``contexts[cell_context[m]] -> cell_next[m]`` seen ``cell_count[m]`` times.
    Cells are sorted by (context, next).
    """

    order: int
    n_states: int
    contexts: np.ndarray
    cell_context: np.ndarray
    cell_next: np.ndarray
    cell_count: np.ndarray

    def __post_init__(self):
        for name in ("contexts", "cell_context", "cell_next", "cell_count"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def empty(cls, order: int, n_states: int) -> "ContextCounts":
        z = np.zeros(0, dtype=np.int64)
        return cls(order, n_states, np.zeros((0, order), dtype=np.int64), z, z, z)

    @classmethod
    def from_pairs(cls, contexts: np.ndarray, targets: np.ndarray, n_states: int,
                   weights: np.ndarray | None = None) -> "ContextCounts":
        contexts = np.asarray(contexts, dtype=np.int64)
        order = contexts.shape[1]
        if len(targets) == 0:
            return cls.empty(order, n_states)
        keys = context_keys(contexts, n_states)
        _, first, ctx_idx = np.unique(keys, return_index=True, return_inverse=True)
        ctx_idx = ctx_idx.ravel()
        codes = ctx_idx * n_states + np.asarray(targets, dtype=np.int64)
        if weights is None:
            cell_codes, cell_counts = np.unique(codes, return_counts=True)
        else:
            # integer reduction keeps 64-bit counts exact
            perm = np.argsort(codes, kind="stable")
            sorted_codes = codes[perm]
            starts = np.flatnonzero(np.r_[True, sorted_codes[1:] != sorted_codes[:-1]])
            cell_codes = sorted_codes[starts]
            cell_counts = np.add.reduceat(np.asarray(weights, dtype=np.int64)[perm], starts)
        return cls(order, n_states, contexts[first], cell_codes // n_states,
                   cell_codes % n_states, cell_counts)

    @cached_property
    def keys(self) -> np.ndarray:
        return context_keys(self.contexts, self.n_states)

    @property
    def n_contexts(self) -> int:
        return len(self.contexts)

    @property
    def n_cells(self) -> int:
        return len(self.cell_count)

    @cached_property
    def n_total(self) -> int:
        return int(self.cell_count.sum())

    @cached_property
    def row_totals(self) -> np.ndarray:
        if self.n_contexts == 0:
            return np.zeros(0, dtype=np.int64)
        return np.add.reduceat(self.cell_count, self.row_starts[:-1])

    @cached_property
    def row_starts(self) -> np.ndarray:
        """``cells[row_starts[c]:row_starts[c+1]]`` belong to context ``c``."""
        return np.searchsorted(self.cell_context, np.arange(self.n_contexts + 1))

    def find_contexts(self, keys: np.ndarray) -> np.ndarray:
        """Indices of the given context keys, ``-1`` where unobserved."""
        if self.n_contexts == 0:
            return np.full(len(keys), -1, dtype=np.int64)
        pos = np.searchsorted(self.keys, keys)
        pos = np.minimum(pos, self.n_contexts - 1)
        return np.where(self.keys[pos] == keys, pos, -1).astype(np.int64)

    def context_index(self, context) -> int:
        ctx = np.asarray(context, dtype=np.int64).reshape(1, self.order)
        return int(self.find_contexts(context_keys(ctx, self.n_states))[0])

    def row(self, context) -> dict[int, int]:
        """Sparse next-state counts of one context (empty if unobserved)."""
        c = self.context_index(context)
        if c < 0:
            return {}
        lo, hi = self.row_starts[c], self.row_starts[c + 1]
        return dict(zip(self.cell_next[lo:hi].tolist(), self.cell_count[lo:hi].tolist()))

    @property
    def rows(self) -> dict[tuple[int, ...], dict[int, int]]:
        out: dict[tuple[int, ...], dict[int, int]] = {}
        ctx_tuples = [tuple(c) for c in self.contexts.tolist()]
        for c, j, n in zip(self.cell_context.tolist(), self.cell_next.tolist(),
                           self.cell_count.tolist()):
            out.setdefault(ctx_tuples[c], {})[j] = n
        return out

    def cell_contexts(self) -> np.ndarray:
        """Context tuple of every cell, shape ``(n_cells, k)``."""
        return self.contexts[self.cell_context]

    def dense(self) -> np.ndarray:
        """Dense ``(n_contexts, n_states)`` count matrix in context order."""
        mat = np.zeros((self.n_contexts, self.n_states), dtype=np.int64)
        mat[self.cell_context, self.cell_next] = self.cell_count
        return mat

    def marginalize(self, order: int) -> "ContextCounts":
        """Drop the oldest context positions down to ``order``."""
        if not 0 <= order <= self.order:
            raise ValueError("can only marginalize to a lower order")
        ctx = self.cell_contexts()[:, self.order - order:]
        return ContextCounts.from_pairs(ctx, self.cell_next, self.n_states, self.cell_count)

    def to_csv(self, labels=None) -> str:
        """Rows ``context labels..., next label, count``."""
        labels = labels if labels is not None else [str(i) for i in range(self.n_states)]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"ctx{i + 1}" for i in range(self.order)] + ["next", "count"])
        for ctx, j, n in zip(self.cell_contexts().tolist(), self.cell_next.tolist(),
                             self.cell_count.tolist()):
            writer.writerow([labels[c] for c in ctx] + [labels[j], n])
        return buf.getvalue()


def count_transitions(corpus: PathCorpus, k: int) -> ContextCounts:
    """Order-``k`` transition counts of the RESET-padded corpus."""
    prepared = prepare_sequences(corpus, k)
    return ContextCounts.from_pairs(prepared.contexts, prepared.targets, corpus.n_states)


def merge(counts_a: ContextCounts, counts_b: ContextCounts) -> ContextCounts:
    """Cellwise sum of two count tables of the same order and state space."""
    if counts_a.order != counts_b.order or counts_a.n_states != counts_b.n_states:
        raise ValueError("cannot merge counts of different order or state count")
    return merge_all([counts_a, counts_b])


def merge_all(tables: list[ContextCounts]) -> ContextCounts:
    if not tables:
        raise ValueError("nothing to merge")
    order, n_states = tables[0].order, tables[0].n_states
    if any(t.order != order or t.n_states != n_states for t in tables):
        raise ValueError("cannot merge counts of different order or state count")
    ctx = np.concatenate([t.cell_contexts() for t in tables])
    nxt = np.concatenate([t.cell_next for t in tables])
    cnt = np.concatenate([t.cell_count for t in tables])
    return ContextCounts.from_pairs(ctx, nxt, n_states, cnt)

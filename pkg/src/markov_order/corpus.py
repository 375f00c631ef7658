"""Path corpora: loading, RESET-padded preparation and synthetic generators."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

RESET_LABEL = "RESET"
RESET_ID = 0


class CorpusError(ValueError):
    """Invalid or unusable corpus input."""


@dataclass(frozen=True)
class StateVocabulary:
    """Bijection between state labels and integer ids; id 0 is RESET."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels or self.labels[0] != RESET_LABEL:
            raise CorpusError("vocabulary must start with the RESET label")
        if RESET_LABEL in self.labels[1:]:
            raise CorpusError(f"{RESET_LABEL!r} is reserved")
        if len(set(self.labels)) != len(self.labels):
            raise CorpusError("duplicate state labels")
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.labels)})

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "StateVocabulary":
        return cls((RESET_LABEL, *labels))

    @property
    def reset_id(self) -> int:
        return RESET_ID

    @property
    def index(self) -> dict[str, int]:
        return dict(self._index)

    def id_of(self, label: str) -> int:
        return self._index[label]

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_states(self) -> int:
        """Number of states including RESET."""
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class PathCorpus:
    """Immutable collection of RESET-free paths over a vocabulary.

    Paths are stored flat: ``tokens[offsets[i]:offsets[i+1]]`` is path ``i``.
    """

    vocabulary: StateVocabulary
    tokens: np.ndarray
    offsets: np.ndarray
    n_dropped: int = 0

    def __post_init__(self):
        tokens = np.ascontiguousarray(self.tokens, dtype=np.int64)
        offsets = np.ascontiguousarray(self.offsets, dtype=np.int64)
        if offsets.ndim != 1 or len(offsets) < 1 or offsets[0] != 0 or offsets[-1] != len(tokens):
            raise CorpusError("malformed path offsets")
        if np.any(np.diff(offsets) < 1):
            raise CorpusError("paths must be non-empty")
        if len(tokens) and (tokens.min() < 1 or tokens.max() >= self.vocabulary.n_states):
            raise CorpusError("path contains RESET or an out-of-vocabulary id")
        tokens.flags.writeable = False
        offsets.flags.writeable = False
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def from_paths(cls, paths: Iterable[Sequence[int]], vocabulary: StateVocabulary,
                   n_dropped: int = 0) -> "PathCorpus":
        paths = [np.asarray(p, dtype=np.int64) for p in paths]
        lengths = np.fromiter((len(p) for p in paths), dtype=np.int64, count=len(paths))
        offsets = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
        tokens = np.concatenate(paths) if paths else np.zeros(0, dtype=np.int64)
        return cls(vocabulary, tokens, offsets, n_dropped)

    @classmethod
    def from_label_paths(cls, paths: Iterable[Sequence[str]]) -> "PathCorpus":
        """Build a corpus from label sequences; labels are ordered by first appearance."""
        paths = [list(p) for p in paths]
        seen: dict[str, None] = {}
        for p in paths:
            for lab in p:
                seen.setdefault(lab, None)
        vocab = StateVocabulary.from_labels(seen)
        idx = vocab.index
        return cls.from_paths([[idx[lab] for lab in p] for p in paths], vocab)

    @property
    def n_paths(self) -> int:
        return len(self.offsets) - 1

    @property
    def n_clicks(self) -> int:
        return len(self.tokens)

    @property
    def n_states(self) -> int:
        return self.vocabulary.n_states

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.offsets)

    def path(self, i: int) -> np.ndarray:
        return self.tokens[self.offsets[i]:self.offsets[i + 1]]

    @property
    def paths(self) -> list[tuple[int, ...]]:
        return [tuple(int(t) for t in self.path(i)) for i in range(self.n_paths)]

    def __iter__(self) -> Iterator[np.ndarray]:
        for i in range(self.n_paths):
            yield self.path(i)

    def __len__(self) -> int:
        return self.n_paths

    def label_paths(self) -> list[list[str]]:
        labels = self.vocabulary.labels
        return [[labels[t] for t in p] for p in self.paths]

    def subset(self, indices: Sequence[int] | np.ndarray) -> "PathCorpus":
        """Corpus made of the given paths (in the given order), same vocabulary."""
        indices = np.asarray(indices, dtype=np.int64)
        lengths = self.lengths[indices]
        starts = self.offsets[indices]
        offsets = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
        if len(indices):
            # gather positions without a Python loop over paths
            pos = np.repeat(starts - offsets[:-1], lengths) + np.arange(offsets[-1])
            tokens = self.tokens[pos]
        else:
            tokens = np.zeros(0, dtype=np.int64)
        return PathCorpus(self.vocabulary, tokens, offsets)

    def to_text(self, delimiter: str = "\t") -> str:
        return "".join(delimiter.join(p) + "\n" for p in self.label_paths())

    def write(self, path: str | os.PathLike, delimiter: str = "\t") -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text(delimiter))


@dataclass(frozen=True, eq=False)
class PreparedSequence:
    """All (context, next) pairs of a corpus for one order ``k``.

    ``contexts`` has shape ``(n_pairs, k)``; ``targets`` shape ``(n_pairs,)``.
    """

    order: int
    contexts: np.ndarray
    targets: np.ndarray
    path_index: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.targets)

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], int]]:
        for ctx, nxt in zip(self.contexts.tolist(), self.targets.tolist()):
            yield tuple(ctx), nxt

    @property
    def pairs(self) -> list[tuple[tuple[int, ...], int]]:
        return list(self)


def prepare_sequences(corpus: PathCorpus, k: int) -> PreparedSequence:
    """Pad every path with ``k`` leading RESETs and one trailing RESET.

    Each path of length ``n`` yields ``n + 1`` (context, next) pairs, the last
    one predicting RESET.  Contexts never span two paths.
    """
    if k < 0:
        raise ValueError("order must be non-negative")
    n_paths = corpus.n_paths
    lengths = corpus.lengths
    padded_len = lengths + k + 1
    pad_offsets = np.concatenate([[0], np.cumsum(padded_len)]).astype(np.int64)
    padded = np.zeros(int(pad_offsets[-1]), dtype=np.int64)
    # token j of path i goes to pad_offsets[i] + k + j
    shift = np.repeat(pad_offsets[:-1] + k - corpus.offsets[:-1], lengths)
    padded[np.arange(corpus.n_clicks) + shift] = corpus.tokens

    # targets are every padded slot except the k leading RESETs
    n_pairs = corpus.n_clicks + n_paths
    pair_path = np.repeat(np.arange(n_paths), lengths + 1)
    pair_starts = np.concatenate([[0], np.cumsum(lengths + 1)])[:-1].astype(np.int64)
    within = np.arange(n_pairs) - np.repeat(pair_starts, lengths + 1)
    target_pos = pad_offsets[:-1][pair_path] + k + within
    targets = padded[target_pos]
    if k == 0 or n_pairs == 0:
        contexts = np.zeros((n_pairs, k), dtype=np.int64)
    else:
        windows = np.lib.stride_tricks.sliding_window_view(padded, k)
        contexts = np.ascontiguousarray(windows[target_pos - k])
    return PreparedSequence(k, contexts, targets, pair_path)


def parse_corpus(lines: Iterable[str], delimiter: str = "\t",
                 min_path_length: int = 2) -> PathCorpus:
    """Parse line-oriented paths.  Blank lines and ``#`` comments are skipped."""
    if min_path_length < 1:
        raise ValueError("min_path_length must be >= 1")
    kept: list[list[str]] = []
    dropped = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if delimiter.isspace():
            tokens = line.split(delimiter)
            tokens = [t for t in tokens if t != ""]
        else:
            tokens = [t.strip() for t in line.split(delimiter)]
        if RESET_LABEL in tokens:
            raise CorpusError(f"line {lineno}: {RESET_LABEL!r} is a reserved state label")
        if len(tokens) < min_path_length:
            dropped += 1
            continue
        kept.append(tokens)
    if not kept:
        raise CorpusError("corpus is empty after filtering")
    corpus = PathCorpus.from_label_paths(kept)
    return PathCorpus(corpus.vocabulary, corpus.tokens, corpus.offsets, dropped)


def load_corpus(source, delimiter: str = "\t", min_path_length: int = 2) -> PathCorpus:
    """Load a corpus from a file path, an open text stream or a string of lines."""
    if isinstance(source, (str, os.PathLike)) and not (isinstance(source, str) and "\n" in source):
        with open(source, encoding="utf-8") as fh:
            return parse_corpus(fh, delimiter, min_path_length)
    if isinstance(source, str):
        source = io.StringIO(source)
    return parse_corpus(source, delimiter, min_path_length)


def load_msnbc(source, min_path_length: int = 2) -> PathCorpus:
    """Load the UCI MSNBC ``.seq`` format.

    The ``%``-prefixed header lists the category names; each following line
    is one session of space-separated 1-based category numbers.  Numbers are
    replaced by their category names.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    else:
        lines = source.read().splitlines()
    try:
        start = next(i for i, ln in enumerate(lines) if ln.startswith("% Sequences"))
    except StopIteration:
        raise CorpusError("no '% Sequences:' header found") from None
    names = [ln.split() for ln in lines[:start] if ln.strip() and not ln.startswith("%")]
    categories = names[0] if names else None
    corpus = parse_corpus(lines[start + 1:], " ", min_path_length)
    if categories is None:
        return corpus
    try:
        relabeled = [[categories[int(tok) - 1] for tok in path] for path in corpus.label_paths()]
    except (ValueError, IndexError):
        raise CorpusError("session refers to an unknown category number") from None
    out = PathCorpus.from_label_paths(relabeled)
    return PathCorpus(out.vocabulary, out.tokens, out.offsets, corpus.n_dropped)


def _default_labels(n: int) -> list[str]:
    if n <= 26:
        return [chr(ord("A") + i) for i in range(n)]
    width = len(str(n - 1))
    return [f"s{i:0{width}d}" for i in range(n)]


def generate_uniform_corpus(n_states: int, total_clicks: int, seed: int,
                            labels: Sequence[str] | None = None) -> PathCorpus:
    """Random paths: each step picks one of ``n_states`` symbols or the terminal
    symbol uniformly.  The terminal closes the current path; empty paths are
    not emitted.  Generation stops after the path that reaches ``total_clicks``.
    """
    if n_states < 2:
        raise ValueError("n_states must be >= 2")
    labels = list(labels) if labels is not None else _default_labels(n_states)
    vocab = StateVocabulary.from_labels(labels)
    if total_clicks <= 0:
        raise CorpusError("generated corpus is empty")
    rng = np.random.default_rng(seed)
    chunk = int(total_clicks * (n_states + 1) / n_states) + 1024
    stream = np.zeros(0, dtype=np.int64)
    while True:
        stream = np.concatenate([stream, rng.integers(0, n_states + 1, size=chunk)])
        click_no = np.cumsum(stream != 0)
        if click_no[-1] < total_clicks:
            continue
        first = int(np.searchsorted(click_no, total_clicks))
        closing = np.flatnonzero(stream[first:] == 0)
        if len(closing):
            stream = stream[: first + int(closing[0]) + 1]
            break
    # symbol 0 is the terminal; symbols 1..n map straight onto vocabulary ids
    is_term = stream == 0
    seg = np.cumsum(is_term) - is_term
    tokens = stream[~is_term]
    seg = seg[~is_term]
    lengths = np.bincount(seg)
    lengths = lengths[lengths > 0]
    offsets = np.concatenate([[0], np.cumsum(lengths)])
    return PathCorpus(vocab, tokens, offsets)


@dataclass(frozen=True, eq=False)
class MarkovGroundTruth:
    """Generating chain of :func:`generate_markov_corpus`.

    ``tensor[c_1, ..., c_k, j]`` is the probability of input state ``j + 1``
    after context ``(c_1, ..., c_k)`` (context ids include RESET = 0).
    """

    order: int
    tensor: np.ndarray
    mean_path_length: float

    def next_state_distribution(self, context: Sequence[int]) -> np.ndarray:
        """Distribution over all vocabulary ids (RESET first) for a context.

        Paths are never empty, so the all-RESET start context has no stop mass.
        For order 0 the single row describes every step after the first.
        """
        stop = 1.0 / self.mean_path_length
        if self.order and not any(context):
            stop = 0.0
        row = self.tensor[tuple(context)] if self.order else self.tensor
        return np.concatenate([[stop], (1.0 - stop) * row])


def generate_markov_corpus(k: int, row_concentration=1.0, n_states: int = 5,
                           n_paths: int | None = None, mean_path_length: float = 20.0,
                           seed: int = 0, total_clicks: int | None = None,
                           labels: Sequence[str] | None = None,
                           ) -> tuple[PathCorpus, MarkovGroundTruth]:
    """Sample paths from a true order-``k`` chain.

    ``row_concentration`` is either a positive float (each row is drawn once
    from a symmetric Dirichlet with that concentration) or an explicit tensor
    of shape ``(n_states + 1,) * k + (n_states,)``.  Path lengths are
    geometric with mean ``mean_path_length``.  Give either ``n_paths`` or
    ``total_clicks`` (paths are drawn until the click total is reached).
    """
    if k < 0:
        raise ValueError("order must be non-negative")
    if mean_path_length < 1:
        raise ValueError("mean_path_length must be >= 1")
    if (n_paths is None) == (total_clicks is None):
        raise ValueError("give exactly one of n_paths or total_clicks")
    rng = np.random.default_rng(seed)
    shape = (n_states + 1,) * k + (n_states,)
    if np.isscalar(row_concentration):
        if not row_concentration > 0:
            raise ValueError("row_concentration must be positive")
        tensor = rng.dirichlet(np.full(n_states, float(row_concentration)),
                               size=(n_states + 1) ** k).reshape(shape)
    else:
        tensor = np.asarray(row_concentration, dtype=float)
        if tensor.shape != shape:
            raise ValueError(f"transition tensor must have shape {shape}, got {tensor.shape}")
        if np.any(tensor < 0) or not np.allclose(tensor.sum(axis=-1), 1.0, atol=1e-9):
            raise ValueError("every transition row must be a probability distribution")
    labels = list(labels) if labels is not None else _default_labels(n_states)
    vocab = StateVocabulary.from_labels(labels)

    flat = tensor.reshape(-1, n_states)
    cdf = np.cumsum(flat, axis=1)
    cdf[:, -1] = 1.0
    n_rows = flat.shape[0]
    p_stop = 1.0 / mean_path_length

    paths: list[np.ndarray] = []
    clicks = 0
    while True:
        if n_paths is not None and len(paths) >= n_paths:
            break
        if total_clicks is not None and clicks >= total_clicks:
            break
        length = int(rng.geometric(p_stop))
        u = rng.random(length)
        row = 0  # all-RESET context
        out = np.empty(length, dtype=np.int64)
        for t in range(length):
            nxt = int(np.searchsorted(cdf[row], u[t], side="right")) + 1
            out[t] = nxt
            if k:
                row = (row * (n_states + 1)) % n_rows + nxt
        paths.append(out)
        clicks += length
    corpus = PathCorpus.from_paths(paths, vocab)
    return corpus, MarkovGroundTruth(k, tensor, float(mean_path_length))

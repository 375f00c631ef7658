"""Transition-structure summaries: global heatmaps, local graphs, self-transition profiles."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import RESET_ID, PathCorpus
from .counts import ContextCounts, count_transitions
from .likelihood import fit_mle

CENTRALITIES = ("incoming", "outgoing")


def global_heatmap(counts: ContextCounts) -> np.ndarray:
    """First-order count matrix divided by the total number of transitions.

    Rows are source states, columns targets; RESET is row/column 0.
    """
    if counts.order != 1:
        raise ValueError("the global heatmap needs first-order counts")
    mat = np.zeros((counts.n_states, counts.n_states))
    if counts.n_total == 0:
        return mat
    src = counts.cell_contexts()[:, 0]
    mat[src, counts.cell_next] = counts.cell_count / counts.n_total
    return mat


def heatmap_csv(matrix: np.ndarray, labels: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["from\\to", *labels])
    for lab, row in zip(labels, matrix):
        writer.writerow([lab, *(repr(float(v)) for v in row)])
    return buf.getvalue()


@dataclass
class LocalGraph:
    order: int
    anchor: tuple[int, ...]
    centrality: str
    nodes: list[dict] = field(default_factory=list)
    edges: list[dict] = field(default_factory=list)
    anchor_found: bool = True

    def to_json(self, labels: Sequence[str] | None = None, indent: int | None = 2) -> str:
        def lab(i):
            return labels[i] if labels is not None else i

        doc = {
            "order": self.order,
            "anchor": [lab(a) for a in self.anchor],
            "centrality": self.centrality,
            "anchor_found": self.anchor_found,
            "nodes": [{"label": lab(n["state"]), "size": n["size"]} for n in self.nodes],
            "edges": [{"src": lab(e["src"]), "dst": lab(e["dst"]), "weight": e["weight"]}
                      for e in self.edges],
        }
        return json.dumps(doc, indent=indent)


def local_graph(counts: ContextCounts, top_nodes: int = 4, top_edges: int = 4,
                anchor: Sequence[int] = (), centrality: str = "incoming",
                include_reset: bool = False) -> LocalGraph:
    """Top states and their strongest outgoing MLE transitions.

    For order ``k`` the rows considered are contexts ``anchor + (s,)`` with an
    anchor of length ``k - 1``; node ``s`` stands for that context.  Node
    size is the summed transition probability into ``s`` from the other
    nodes (``incoming``) or out of ``s`` to other states (``outgoing``).
    Edges only connect listed nodes; each node keeps its ``top_edges``
    heaviest ones.  Edge weights are the MLE row entries.
    """
    if centrality not in CENTRALITIES:
        raise ValueError(f"centrality must be one of {CENTRALITIES}")
    anchor = tuple(int(a) for a in anchor)
    k = counts.order
    if k < 1:
        raise ValueError("local graphs need order >= 1")
    if len(anchor) != k - 1:
        raise ValueError(f"anchor must have length {k - 1} for order {k}")
    graph = LocalGraph(k, anchor, centrality)
    S = counts.n_states
    if counts.n_contexts == 0:
        graph.anchor_found = False
        return graph

    # probability matrix restricted to anchored rows: P[s, j] = p(j | anchor + (s,))
    model = fit_mle(counts)
    ctx = counts.contexts
    anchored = np.all(ctx[:, : k - 1] == np.array(anchor, dtype=np.int64), axis=1) if k > 1 \
        else np.ones(counts.n_contexts, dtype=bool)
    if not anchored.any():
        graph.anchor_found = False
        return graph
    P = np.zeros((S, S))
    observed = np.zeros(S, dtype=bool)
    for c in np.flatnonzero(anchored):
        s = int(ctx[c, -1])
        P[s] = model.row(ctx[c])
        observed[s] = True

    off_diag = P * (1 - np.eye(S))
    if centrality == "incoming":
        size = off_diag.sum(axis=0)
        candidates = np.ones(S, dtype=bool)
    else:
        size = off_diag.sum(axis=1)
        candidates = observed.copy()
    if not include_reset:
        candidates[RESET_ID] = False
    cand = np.flatnonzero(candidates)
    # stable sort: ties keep the smaller state id first
    ranked = cand[np.argsort(-size[cand], kind="stable")][:top_nodes]
    nodes = [int(s) for s in ranked]
    graph.nodes = [{"state": s, "size": float(size[s])} for s in nodes]
    listed = np.array(nodes, dtype=np.int64)
    for s in nodes:
        if not observed[s]:
            continue
        weights = P[s, listed]
        order = np.argsort(-weights, kind="stable")[:top_edges]
        for i in order:
            if weights[i] > 0:
                graph.edges.append({"src": s, "dst": int(listed[i]), "weight": float(weights[i])})
    return graph


@dataclass(frozen=True)
class ProfilePoint:
    state: int
    k: int
    stay: float
    switch: float
    n: int


@dataclass
class SelfProfile:
    points: list[ProfilePoint]
    missing: list[tuple[int, int]]

    def to_csv(self, labels: Sequence[str] | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["state", "k", "stay", "switch", "n"])
        for p in self.points:
            writer.writerow([labels[p.state] if labels else p.state, p.k,
                             repr(p.stay), repr(p.switch), p.n])
        return buf.getvalue()


def self_transition_profile(corpus: PathCorpus, max_k: int, top_states: int = 3,
                            states: Sequence[int] | None = None,
                            counts_by_order: dict[int, ContextCounts] | None = None) -> SelfProfile:
    """``P(next = t | last k states all t)`` for k = 1..max_k.

    Reported states default to the ``top_states`` states with the most
    first-order outgoing transitions (RESET excluded).  Points whose context
    ``(t,)*k`` never occurs are listed in ``missing``.
    """
    if max_k < 1:
        raise ValueError("max_k must be >= 1")
    counts_by_order = dict(counts_by_order or {})

    def counts(k):
        if k not in counts_by_order:
            counts_by_order[k] = count_transitions(corpus, k)
        return counts_by_order[k]

    if states is None:
        c1 = counts(1)
        mass = np.zeros(corpus.n_states, dtype=np.int64)
        mass[c1.contexts[:, 0]] = c1.row_totals
        mass[RESET_ID] = -1
        states = [int(s) for s in np.argsort(-mass, kind="stable")[:top_states] if mass[s] > 0]
    points, missing = [], []
    for t in states:
        for k in range(1, max_k + 1):
            row = counts(k).row((t,) * k)
            total = sum(row.values())
            if total == 0:
                missing.append((t, k))
                continue
            stay = row.get(t, 0) / total
            points.append(ProfilePoint(t, k, stay, 1.0 - stay, total))
    return SelfProfile(points, missing)


def split_by_endpoints(corpus: PathCorpus) -> tuple[PathCorpus, PathCorpus]:
    """Paths whose first and last states agree, and the rest."""
    first = corpus.tokens[corpus.offsets[:-1]]
    last = corpus.tokens[corpus.offsets[1:] - 1]
    same = first == last
    return corpus.subset(np.flatnonzero(same)), corpus.subset(np.flatnonzero(~same))

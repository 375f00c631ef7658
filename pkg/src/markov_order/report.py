"""Runs every order-selection method on one corpus and collects the results."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bayes import PRIORS, log_evidence, model_posterior
from .corpus import PathCorpus
from .counts import count_transitions
from .crossval import cross_validate, stratified_folds
from .infocrit import criterion_table, select_order
from .likelihood import lrt_from_loglik, mle_log_likelihood

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SIGNIFICANCE = 0.01


@dataclass
class SelectionReport:
    corpus: dict
    max_order: int
    alpha: float
    n_folds: int
    seed: int
    n_observations: int
    log_likelihoods: list[float]
    lrt: list[dict]
    aic: list[float]
    bic: list[float]
    log_evidence: list[float]
    posterior: dict[str, list[float]]
    cv_mean: list[float]
    cv_std: list[float]
    cv_fold_ranks: list[list[float]]
    selected: dict[str, int]
    recommendation: int
    priors_agree: bool
    options: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @property
    def orders(self) -> list[int]:
        return list(range(self.max_order + 1))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "SelectionReport":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {doc.get('schema_version')!r}")
        return cls(**doc)

    def to_json(self, pretty: bool = True) -> str:
        if pretty:
            return json.dumps(self.to_dict(), indent=2, sort_keys=True)
        return json.dumps(self.to_dict(), separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SelectionReport":
        return cls.from_dict(json.loads(text))

    def panel_csvs(self) -> dict[str, str]:
        """One CSV per result table, keyed by table name."""
        def table(header, rows):
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
            return buf.getvalue()

        ks = self.orders
        return {
            "loglik": table(["k", "log_likelihood"], zip(ks, map(repr, self.log_likelihoods))),
            "lrt": table(["k", "m", "eta", "df", "p_value", "stars"],
                         [[r["k"], r["m"], repr(r["eta"]), repr(r["df"]), repr(r["p_value"]),
                           r["stars"]] for r in self.lrt]),
            "aic": table(["k", "aic"], zip(ks, map(repr, self.aic))),
            "bic": table(["k", "bic"], zip(ks, map(repr, self.bic))),
            "evidence": table(["k", "log_evidence"], zip(ks, map(repr, self.log_evidence))),
            "posterior": table(["k", *PRIORS],
                               [[k, *(repr(self.posterior[p][k]) for p in PRIORS)] for k in ks]),
            "cv": table(["k", "mean_rank", "std_rank"],
                        zip(ks, map(repr, self.cv_mean), map(repr, self.cv_std))),
        }

    def summary(self) -> str:
        lines = [f"paths={self.corpus['n_paths']} clicks={self.corpus['n_clicks']} "
                 f"states={self.corpus['n_states']} (incl. RESET)"]
        for name, k in self.selected.items():
            lines.append(f"  {name:>18}: {k}")
        lines.append(f"  {'recommendation':>18}: {self.recommendation}")
        return "\n".join(lines)


def derive_seed(seed: int, name: str) -> int:
    """Independent, reproducible sub-seed of ``seed`` for the named consumer."""
    tag = int.from_bytes(name.encode("utf-8"), "little")
    return int(np.random.SeedSequence([seed, tag]).generate_state(1, np.uint64)[0])


def sequential_lrt_order(lrt_rows: list[dict], max_order: int,
                         level: float = SIGNIFICANCE) -> int:
    """Raise the order while the adjacent test (k vs k+1) is significant."""
    adjacent = {(r["k"], r["m"]): r["p_value"] for r in lrt_rows}
    k = 0
    while k < max_order and adjacent[(k, k + 1)] < level:
        k += 1
    return k


def run_selection(corpus: PathCorpus, max_order: int = 5, alpha: float = 1.0,
                  n_folds: int = 10, seed: int = 0, *, threads: int = 1,
                  df_include_reset: bool = True, bic_n_include_reset: bool = True,
                  cv_include_reset_targets: bool = True) -> SelectionReport:
    """Likelihoods, LRTs, AIC/BIC, Bayesian evidence and CV ranks for orders 0..max_order.

    The recommended order is the one with the highest posterior under the
    uniform model prior.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    orders = list(range(max_order + 1))
    S = corpus.n_states
    S_df = S if df_include_reset else S - 1

    def per_order(k):
        counts = count_transitions(corpus, k)
        return mle_log_likelihood(counts), log_evidence(counts, alpha), counts.n_total

    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        results = list(pool.map(per_order, orders)) if pool else [per_order(k) for k in orders]
        lls = [r[0] for r in results]
        evidences = [r[1] for r in results]
        n_total = results[0][2]
        log.info("log-likelihoods %s", lls)

        lrt_rows = []
        for k in orders:
            for m in orders[k + 1:]:
                res = lrt_from_loglik(lls[k], lls[m], S_df, k, m)
                lrt_rows.append({"k": k, "m": m, "eta": res.eta, "df": res.df,
                                 "p_value": res.p_value, "stars": res.stars()})

        n_obs = n_total if bic_n_include_reset else corpus.n_clicks
        crit = criterion_table(lls, S_df, n_obs)
        posts = {p: model_posterior(evidences, p, S, orders) for p in PRIORS}

        folds = stratified_folds(corpus, n_folds, derive_seed(seed, "folds"))

        def cv(k):
            return cross_validate(corpus, k, alpha=alpha, folds=folds,
                                  include_reset_targets=cv_include_reset_targets)

        cv_results = list(pool.map(cv, orders)) if pool else [cv(k) for k in orders]
    finally:
        if pool:
            pool.shutdown()

    cv_mean = [r.mean for r in cv_results]
    selected = {
        "lrt": sequential_lrt_order(lrt_rows, max_order),
        "aic": crit.selected_aic,
        "bic": crit.selected_bic,
        "bayes_uniform": posts["uniform"].selected,
        "bayes_exponential": posts["exponential"].selected,
        "cross_validation": select_order(cv_mean),
    }
    return SelectionReport(
        corpus={"n_paths": corpus.n_paths, "n_clicks": corpus.n_clicks, "n_states": S,
                "n_dropped": corpus.n_dropped, "labels": list(corpus.vocabulary.labels)},
        max_order=max_order,
        alpha=float(alpha),
        n_folds=n_folds,
        seed=seed,
        n_observations=n_obs,
        log_likelihoods=lls,
        lrt=lrt_rows,
        aic=list(crit.aic),
        bic=list(crit.bic),
        log_evidence=evidences,
        posterior={p: [float(v) for v in posts[p].posterior] for p in PRIORS},
        cv_mean=cv_mean,
        cv_std=[r.std for r in cv_results],
        cv_fold_ranks=[list(r.fold_ranks) for r in cv_results],
        selected=selected,
        recommendation=selected["bayes_uniform"],
        priors_agree=selected["bayes_uniform"] == selected["bayes_exponential"],
        options={"df_include_reset": df_include_reset,
                 "bic_n_include_reset": bic_n_include_reset,
                 "cv_include_reset_targets": cv_include_reset_targets},
    )

import csv
import io

import pytest

from markov_order.report import SelectionReport, derive_seed, run_selection, sequential_lrt_order
from conftest import cycle_corpus, random_corpus


@pytest.fixture(scope="module")
def report():
    import numpy as np
    return run_selection(random_corpus(np.random.default_rng(7), n_labels=4, n_paths=60),
                         max_order=3, n_folds=5, seed=2)


def test_arrays_have_one_entry_per_order(report):
    for name in ("log_likelihoods", "aic", "bic", "log_evidence", "cv_mean", "cv_std",
                 "cv_fold_ranks"):
        assert len(getattr(report, name)) == 4
    assert all(len(v) == 4 for v in report.posterior.values())
    assert len(report.lrt) == 6
    assert all(0 <= k <= 3 for k in report.selected.values())


def test_loglik_monotone(report):
    lls = report.log_likelihoods
    assert all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))


def test_recommendation_is_uniform_bayes(report):
    assert report.recommendation == report.selected["bayes_uniform"]
    assert report.priors_agree == (report.selected["bayes_uniform"]
                                   == report.selected["bayes_exponential"])


def test_json_roundtrip(report):
    for pretty in (True, False):
        back = SelectionReport.from_json(report.to_json(pretty))
        assert back == report


def test_unknown_schema_rejected(report):
    doc = report.to_dict()
    doc["schema_version"] = 99
    with pytest.raises(ValueError):
        SelectionReport.from_dict(doc)


def test_panel_csvs(report):
    panels = report.panel_csvs()
    assert set(panels) == {"loglik", "lrt", "aic", "bic", "evidence", "posterior", "cv"}
    rows = list(csv.reader(io.StringIO(panels["posterior"])))
    assert rows[0] == ["k", "uniform", "exponential"]
    assert len(rows) == 5
    assert float(rows[1][1]) == report.posterior["uniform"][0]


def test_deterministic():
    corpus = cycle_corpus(30, 12)
    a = run_selection(corpus, 2, n_folds=5, seed=9)
    b = run_selection(corpus, 2, n_folds=5, seed=9, threads=2)
    assert a.to_json() == b.to_json()


def test_cycle_selects_order_one_or_more():
    rep = run_selection(cycle_corpus(30, 12), 2, n_folds=5)
    assert rep.selected["bayes_uniform"] >= 1
    assert rep.selected["cross_validation"] >= 1


def test_validation():
    with pytest.raises(ValueError):
        run_selection(cycle_corpus(), 0)
    with pytest.raises(ValueError):
        run_selection(cycle_corpus(), 2, alpha=0)


def test_derive_seed():
    assert derive_seed(1, "folds") == derive_seed(1, "folds")
    assert derive_seed(1, "folds") != derive_seed(1, "ties")
    assert derive_seed(1, "folds") != derive_seed(2, "folds")


def test_sequential_lrt_order():
    rows = [{"k": 0, "m": 1, "p_value": 1e-5}, {"k": 1, "m": 2, "p_value": 0.5},
            {"k": 2, "m": 3, "p_value": 1e-9}]
    assert sequential_lrt_order(rows, 3) == 1
    rows[1]["p_value"] = 0.001
    assert sequential_lrt_order(rows, 3) == 3

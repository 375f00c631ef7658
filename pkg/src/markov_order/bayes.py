"""Dirichlet-multinomial evidence, posterior-mean rows and posteriors over orders."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .counts import ContextCounts
from .likelihood import MarkovModel
from .numerics import int_to_float, log_gamma, log_sum_exp

PRIORS = ("uniform", "exponential")


def log_evidence(counts: ContextCounts, alpha: float = 1.0) -> float:
    """Log marginal likelihood of the counts under a symmetric Dirichlet(alpha) prior per row.

    Each observed context contributes
    ``lnG(S a) - S lnG(a) + sum_j lnG(n_ij + a) - lnG(n_i + S a)``.
    Unobserved contexts contribute exactly zero.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha!r}")
    if counts.n_cells == 0:
        return 0.0
    S = counts.n_states
    lg_alpha = log_gamma(alpha)
    per_row = log_gamma(S * alpha)
    # -S lnG(a) is spread over the cells; zero cells cancel, so only stored cells are summed
    cell_terms = gammaln(counts.cell_count + alpha) - lg_alpha
    row_terms = gammaln(counts.row_totals + S * alpha)
    return float(math.fsum(cell_terms) + counts.n_contexts * per_row - math.fsum(row_terms))


def row_log_evidence(row_counts: Mapping[int, int] | Sequence[int], alpha: float,
                     n_states: int) -> float:
    """Dirichlet-multinomial log marginal of a single row of counts."""
    values = list(row_counts.values()) if isinstance(row_counts, Mapping) else list(row_counts)
    total = sum(values)
    out = log_gamma(n_states * alpha) - n_states * log_gamma(alpha)
    out += sum(log_gamma(n + alpha) for n in values)
    out += (n_states - len(values)) * log_gamma(alpha)
    return out - log_gamma(total + n_states * alpha)


def posterior_mean(row_counts: Mapping[int, int], alpha: float, n_states: int) -> np.ndarray:
    """Dense posterior-mean row ``(n_ij + alpha) / (n_i + S alpha)``."""
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    vec = np.full(n_states, float(alpha))
    for j, n in row_counts.items():
        vec[j] += n
    return vec / vec.sum()


def posterior_mean_model(counts: ContextCounts, alpha: float = 1.0) -> MarkovModel:
    """Posterior-mean model; unseen contexts fall back to the uniform prior mean."""
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    return MarkovModel.from_counts(counts, alpha)


def free_parameters(n_states: int, k: int) -> float:
    """``|S|^k (|S| - 1)``, saturating to ``inf``."""
    return int_to_float(n_states ** k * (n_states - 1))


def log_model_prior(orders: Sequence[int], prior_kind: str, n_states: int) -> np.ndarray:
    """Normalized log prior over the given orders."""
    if prior_kind == "uniform":
        return np.full(len(orders), -math.log(len(orders)))
    if prior_kind in ("exponential", "exponential-penalty"):
        raw = [-free_parameters(n_states, k) for k in orders]
        norm = log_sum_exp(raw)
        return np.array([r - norm for r in raw])
    raise ValueError(f"unknown prior {prior_kind!r}")


@dataclass(frozen=True)
class ModelPosterior:
    orders: tuple[int, ...]
    log_evidence: tuple[float, ...]
    prior_kind: str
    log_prior: tuple[float, ...]
    log_posterior: tuple[float, ...]

    @property
    def posterior(self) -> np.ndarray:
        return np.exp(np.array(self.log_posterior))

    @property
    def selected(self) -> int:
        # np.argmax returns the first maximum, i.e. the smallest order on ties
        return self.orders[int(np.argmax(self.log_posterior))]


def model_posterior(log_evidences: Sequence[float], prior_kind: str = "uniform",
                    n_states: int = 2, orders: Sequence[int] | None = None) -> ModelPosterior:
    """``P(M_k | D)`` over orders, computed in log space."""
    log_evidences = [float(e) for e in log_evidences]
    orders = tuple(range(len(log_evidences))) if orders is None else tuple(orders)
    if len(orders) != len(log_evidences):
        raise ValueError("one log-evidence per order is required")
    if len(orders) < 2:
        raise ValueError("need at least two models to compare")
    prior = log_model_prior(orders, prior_kind, n_states)
    joint = [e + p for e, p in zip(log_evidences, prior)]
    norm = log_sum_exp(joint)
    post = tuple(j - norm for j in joint)
    return ModelPosterior(orders, tuple(log_evidences), prior_kind,
                          tuple(float(p) for p in prior), post)

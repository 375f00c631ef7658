"""AIC and BIC relative to a high reference order, and minimum-criterion selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .likelihood import degrees_of_freedom


def aic(eta: float, n_states: int, k: int, m: int) -> float:
    """``eta - 2 (|S|^m - |S|^k)(|S| - 1)`` for null order k against reference m."""
    if k > m:
        raise ValueError("k must not exceed the reference order m")
    return eta - 2.0 * degrees_of_freedom(n_states, k, m)


def bic(eta: float, n_states: int, k: int, m: int, n: int) -> float:
    """``eta - (|S|^m - |S|^k)(|S| - 1) ln(n)``."""
    if k > m:
        raise ValueError("k must not exceed the reference order m")
    if n < 1:
        raise ValueError("n must be >= 1")
    df = degrees_of_freedom(n_states, k, m)
    if df == 0:
        return eta
    return eta - df * math.log(n)


def select_order(scores: Sequence[float]) -> int:
    """Index of the smallest score; ties go to the smallest order."""
    if not scores:
        raise ValueError("no scores to select from")
    best = 0
    for i, s in enumerate(scores):
        if s < scores[best]:
            best = i
    return best


@dataclass(frozen=True)
class CriterionTable:
    reference_order: int
    n: int
    aic: tuple[float, ...]
    bic: tuple[float, ...]

    @property
    def selected_aic(self) -> int:
        return select_order(self.aic)

    @property
    def selected_bic(self) -> int:
        return select_order(self.bic)


def criterion_table(log_likelihoods: Sequence[float], n_states: int, n: int) -> CriterionTable:
    """AIC/BIC of every order against the highest order in ``log_likelihoods``."""
    m = len(log_likelihoods) - 1
    ll_m = log_likelihoods[m]
    etas = [max(0.0, -2.0 * (ll - ll_m)) for ll in log_likelihoods]
    return CriterionTable(
        reference_order=m,
        n=n,
        aic=tuple(aic(etas[k], n_states, k, m) for k in range(m + 1)),
        bic=tuple(bic(etas[k], n_states, k, m, n) for k in range(m + 1)),
    )

"""Statistical aggregation for Monte-Carlo experiments.

All lemma checks in the lab use one-sided bounds at a fixed 0.99 level.
Frequencies get exact (Clopper-Pearson style) binomial bounds via the
beta inverse CDF; means get a normal approximation.  The method used is
recorded in the summary so reports stay auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta

CONFIDENCE = 0.99
Z_99 = 2.3263478740408408  # one-sided 0.99 normal quantile


def binomial_upper(successes: int, trials: int, level: float = CONFIDENCE) -> float:
    """Exact one-sided upper confidence bound for a binomial proportion."""
    if not 0 <= successes <= trials or trials <= 0:
        raise ValueError("need 0 <= successes <= trials, trials >= 1")
    if successes == trials:
        return 1.0
    return float(beta.ppf(level, successes + 1, trials - successes))


def binomial_lower(successes: int, trials: int, level: float = CONFIDENCE) -> float:
    """Exact one-sided lower confidence bound for a binomial proportion."""
    if not 0 <= successes <= trials or trials <= 0:
        raise ValueError("need 0 <= successes <= trials, trials >= 1")
    if successes == 0:
        return 0.0
    return float(beta.ppf(1.0 - level, successes, trials - successes + 1))


@dataclass(frozen=True)
class Summary:
    """Point estimate with one-sided 0.99 bounds and provenance."""

    n: int
    estimate: float
    lower: float
    upper: float
    method: str
    flag: str | None = None


def aggregate(values, kind: str) -> Summary:
    """Summarize trial outcomes.

    kind="frequency": values are 0/1 indicators, exact binomial bounds.
    kind="mean": real values, one-sided normal bounds; constant inputs get a
    zero-width bound and a single trial is flagged "insufficient-n".
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("aggregate needs at least one trial")
    n = int(arr.size)
    if kind == "frequency":
        k = int(round(float(arr.sum())))
        est = k / n
        return Summary(n, est, binomial_lower(k, n), binomial_upper(k, n), "binomial-exact")
    if kind == "mean":
        est = float(arr.mean())
        if n == 1:
            return Summary(n, est, -math.inf, math.inf, "degenerate", flag="insufficient-n")
        sd = float(arr.std(ddof=1))
        if sd == 0.0:
            return Summary(n, est, est, est, "degenerate")
        half = Z_99 * sd / math.sqrt(n)
        return Summary(n, est, est - half, est + half, "normal")
    raise ValueError(f"unknown estimator kind {kind!r}")

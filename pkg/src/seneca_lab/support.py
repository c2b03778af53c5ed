"""Support-size estimation and sampling-regime thresholds.

The self-consistent missing-mass solver needs a guess at how many labels
went unobserved; the Chao1 family supplies it from the first two
fingerprint entries. `support_from_missing_mass` converts a coverage
estimate into a support size, and `support_risky_threshold` marks where
consistent support estimation becomes impossible for a given sample size.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

from .sample import Fingerprint

# Any callable with this shape can drive the self-consistent solver.
SupportEstimator = Callable[[Fingerprint, int], "SupportEstimate"]


@dataclass(frozen=True)
class SupportEstimate:
    """An estimated number of distinct labels, with the method that made it."""

    value: float
    method: str


def support_chao1(fp: Fingerprint, observed: int) -> SupportEstimate:
    """Chao1 estimate ``observed + phi1^2 / (2 phi2)``.

    With singletons but no doubletons the quotient is undefined, so the
    estimate silently reroutes to the bias-corrected form (the method tag
    says so). With no singletons the estimate is the observed support.
    """
    if observed < 1:
        raise ValueError("observed support must be at least 1")
    phi1, phi2 = fp[1], fp[2]
    if phi1 == 0:
        return SupportEstimate(float(observed), "chao1")
    if phi2 == 0:
        bc = support_chao1_bc(fp, observed)
        return SupportEstimate(bc.value, "chao1-bc-fallback")
    return SupportEstimate(observed + phi1 * phi1 / (2.0 * phi2), "chao1")


def support_chao1_bc(fp: Fingerprint, observed: int) -> SupportEstimate:
    """Bias-corrected Chao1, ``observed + phi1 (phi1 - 1) / (2 (phi2 + 1))``.

    Finite for every fingerprint, which is why it is the default feeding
    the self-consistent solver.
    """
    if observed < 1:
        raise ValueError("observed support must be at least 1")
    phi1, phi2 = fp[1], fp[2]
    return SupportEstimate(
        observed + phi1 * (phi1 - 1) / (2.0 * (phi2 + 1)), "chao1-bc"
    )


def support_from_missing_mass(observed: int, m: float) -> SupportEstimate:
    """Convert a missing-mass estimate to a support size, ``observed/(1-m)``."""
    if observed < 1:
        raise ValueError("observed support must be at least 1")
    if m < 0.0:
        raise ValueError("missing mass must be non-negative")
    if m >= 1.0:
        raise ValueError("total missing mass leaves the support size undefined")
    return SupportEstimate(observed / (1.0 - m), "missing-mass-conversion")


def support_risky_threshold(n: int) -> int | None:
    """Largest support size still consistently estimable from n draws.

    Returns the largest integer gamma with ``n > gamma / ln(gamma)``, or
    None when no integer qualifies (n <= e, since gamma/ln(gamma) >= e for
    every integer gamma >= 2). Settings with more labels than this are
    tagged support-risky in the benchmark.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    # gamma/ln(gamma) is increasing beyond e, so this bound is safely past
    # the last qualifying integer.
    bound = 4 * n * max(1, math.ceil(math.log(max(n, 3))))
    best: int | None = None
    for gamma in range(2, bound + 1):
        if n > gamma / math.log(gamma):
            best = gamma
    return best

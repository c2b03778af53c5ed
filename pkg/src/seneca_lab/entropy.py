"""Entropy estimators for small discrete samples.

All estimators consume a :class:`~seneca_lab.sample.SampleCounts` and
return nats. The registry :data:`ESTIMATORS` maps the canonical tag of
each estimator to a callable taking only the counts, which is the shape
the benchmark engine and the CLI expect.

Two of the estimators (Chao-Shen and the self-consistent one) share the
same coverage-adjusted Horvitz-Thompson form

    H = - sum_u q_u ln q_u / (1 - (1 - q_u)^n),   q_u = C * c_u / n,

and differ only in where the coverage factor C comes from: the adjusted
Good-Turing estimate for Chao-Shen, one minus the self-consistent
missing-mass fixed point for the latter.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

from scipy.special import psi

from .missing_mass import (
    SelfConsistentSolve,
    missing_mass_good_turing,
    solve_with_estimated_support,
)
from .sample import SampleCounts, fingerprint
from .support import SupportEstimator, support_chao1_bc


@dataclass(frozen=True)
class EntropyEstimate:
    """An entropy value in nats plus the method tag that produced it.

    ``diagnostics`` is method-specific: the coverage factor (float) for
    Chao-Shen, the full solve record for the self-consistent estimator,
    None elsewhere.
    """

    value: float
    method: str
    diagnostics: SelfConsistentSolve | float | None = None


def _horvitz_thompson(scaled: list[float], n: int) -> float:
    """-sum q ln q / (1 - (1-q)^n) over coverage-scaled frequencies.

    A frequency numerically equal to 1 contributes 0 (its limit), and the
    inclusion-probability denominator never vanishes for q in (0, 1).
    """
    acc = 0.0
    for q in scaled:
        if q >= 1.0:
            continue
        acc -= q * math.log(q) / (1.0 - (1.0 - q) ** n)
    return acc


def entropy_plugin(counts: SampleCounts) -> EntropyEstimate:
    """Maximum-likelihood estimate -sum p ln p over empirical frequencies."""
    n = counts.n
    acc = 0.0
    for c in counts.counts:
        p = c / n
        if p < 1.0:
            acc -= p * math.log(p)
    return EntropyEstimate(acc, "plugin")


def entropy_chao_shen(counts: SampleCounts) -> EntropyEstimate:
    """Coverage-adjusted Horvitz-Thompson estimate with Good-Turing coverage.

    Coverage is 1 minus the adjusted Good-Turing missing mass, so samples
    without singletons use coverage 1 and the estimate reduces to a pure
    Horvitz-Thompson correction of the plug-in frequencies.
    """
    n = counts.n
    coverage = 1.0 - missing_mass_good_turing(counts, adjusted=True)
    scaled = [coverage * c / n for c in counts.counts]
    return EntropyEstimate(_horvitz_thompson(scaled, n), "chao-shen", coverage)


def entropy_seneca(
    counts: SampleCounts, support_estimator: SupportEstimator = support_chao1_bc
) -> EntropyEstimate:
    """Self-consistent coverage estimate, then Horvitz-Thompson.

    Coverage comes from the fixed point of the missing-mass consistency
    map (see :mod:`seneca_lab.missing_mass`), with the support estimate
    feeding the unobserved-label count. A degenerate solve with coverage
    below 1e-12 yields value 0; the solve record in ``diagnostics`` keeps
    that visible.
    """
    solve = solve_with_estimated_support(counts, support_estimator)
    if solve.coverage < 1e-12:
        return EntropyEstimate(0.0, "seneca", solve)
    n = counts.n
    scaled = [solve.coverage * c / n for c in counts.counts]
    return EntropyEstimate(_horvitz_thompson(scaled, n), "seneca", solve)


@lru_cache(maxsize=None)
def _grassberger_g(k: int) -> float:
    # G(k) = psi(k) + (-1)^k (psi((k+1)/2) - psi(k/2)) / 2
    sign = 1.0 if k % 2 == 0 else -1.0
    return float(psi(k)) + 0.5 * sign * float(psi((k + 1) / 2.0) - psi(k / 2.0))


def entropy_grassberger(counts: SampleCounts) -> EntropyEstimate:
    """Grassberger's digamma-based bias correction of the plug-in estimate."""
    n = counts.n
    acc = 0.0
    for c in counts.counts:
        acc += c * _grassberger_g(c)
    return EntropyEstimate(math.log(n) - acc / n, "grassberger")


def entropy_james_stein(counts: SampleCounts) -> EntropyEstimate:
    """Plug-in entropy of frequencies shrunk toward the uniform target.

    The target is uniform over the observed support (unseen labels keep
    probability zero). The shrinkage intensity is the closed-form
    James-Stein weight, clamped to [0, 1]; a zero denominator (sample
    already at the target) uses lambda = 1. Needs n >= 2.
    """
    n = counts.n
    if n < 2:
        raise ValueError("James-Stein shrinkage needs a sample of size >= 2")
    k = len(counts.counts)
    target = 1.0 / k
    ps = [c / n for c in counts.counts]
    sum_sq = math.fsum(p * p for p in ps)
    denom = (n - 1) * math.fsum((target - p) ** 2 for p in ps)
    if denom == 0.0:
        lam = 1.0
    else:
        lam = min(max((1.0 - sum_sq) / denom, 0.0), 1.0)
    acc = 0.0
    for p in ps:
        q = lam * target + (1.0 - lam) * p
        if q < 1.0:
            acc -= q * math.log(q)
    return EntropyEstimate(acc, "james-stein")


@lru_cache(maxsize=None)
def _harmonic_prefix(limit: int) -> tuple[float, ...]:
    """(H_0, H_1, ..., H_limit) with H_j = sum_{i=1..j} 1/i."""
    out = [0.0]
    for i in range(1, limit + 1):
        out.append(out[-1] + 1.0 / i)
    return tuple(out)


def entropy_bonachela(counts: SampleCounts) -> EntropyEstimate:
    """Bonachela-Hinrichsen-Munoz balanced estimator.

    H = 1/(n+2) * sum_u (c_u + 1) * sum_{j=c_u+2}^{n+2} 1/j, a low-variance
    estimator aimed at very short samples.
    """
    n = counts.n
    h = _harmonic_prefix(n + 2)
    acc = 0.0
    for c in counts.counts:
        acc += (c + 1) * (h[n + 2] - h[c + 1])
    return EntropyEstimate(acc / (n + 2), "bonachela")


def entropy_chao_wang_jost(counts: SampleCounts) -> EntropyEstimate:
    """Chao-Wang-Jost estimator: harmonic head plus singleton tail.

    The head sums (c/n) * sum_{k=c}^{n-1} 1/k over labels with c <= n-1.
    The tail multiplies the singleton fraction by a series in
    A = 2*phi_2 / ((n-1)*phi_1 + 2*phi_2) (with the phi_2 = 0 variants);
    A = 1 zeroes the tail exactly, short-circuited here because the
    written form hits 0^0 and inf * 0 at that point. Needs n >= 2.
    """
    n = counts.n
    if n < 2:
        raise ValueError("Chao-Wang-Jost needs a sample of size >= 2")
    h = _harmonic_prefix(n)
    head = 0.0
    for c in counts.counts:
        if c <= n - 1:
            head += (c / n) * (h[n - 1] - h[c - 1])
    fp = fingerprint(counts)
    phi1, phi2 = fp[1], fp[2]
    if phi2 > 0:
        a = 2.0 * phi2 / ((n - 1) * phi1 + 2.0 * phi2)
    elif phi1 > 1:
        a = 2.0 / ((n - 1) * (phi1 - 1) + 2.0)
    else:
        a = 1.0
    if phi1 == 0 or a == 1.0:
        return EntropyEstimate(head, "chao-wang-jost")
    series = math.fsum((1.0 / r) * (1.0 - a) ** r for r in range(1, n))
    tail = (phi1 / n) * (1.0 - a) ** (1 - n) * (-math.log(a) - series)
    return EntropyEstimate(head + tail, "chao-wang-jost")


ESTIMATORS: dict[str, Callable[[SampleCounts], EntropyEstimate]] = {
    "plugin": entropy_plugin,
    "grassberger": entropy_grassberger,
    "james-stein": entropy_james_stein,
    "bonachela": entropy_bonachela,
    "chao-shen": entropy_chao_shen,
    "chao-wang-jost": entropy_chao_wang_jost,
    "seneca": entropy_seneca,
}

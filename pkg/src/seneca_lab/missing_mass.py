"""Missing-mass estimators and the self-consistent fixed-point solver.

The missing mass of a sample is the total prevalence of labels it never
saw. The classic Good-Turing estimate is the singleton fraction phi_1/n.
The self-consistent estimate instead looks for the value m* that, when
used both to shrink the observed empirical prevalences and to spread mass
over a guessed number of unobserved labels, predicts itself back:

    mu(m, upsilon, X) = (1-m) * sum_u p_u (1 - (1-m) p_u)^n
                        + m * (1 - m / max(upsilon, 1))^n,
    m* : mu(m*, upsilon, X) = m*,

where p_u are the empirical label frequencies and upsilon the estimated
number of unobserved labels. The solver runs Steffensen-accelerated
fixed-point iteration, decrementing upsilon when an attempt diverges, and
falls back to the adjusted Good-Turing value if every attempt fails.
"""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

from .sample import SampleCounts, fingerprint
from .support import SupportEstimate, SupportEstimator, support_chao1_bc

# Successive-iterate stop for Steffensen; intentionally tighter than the
# 1e-8 residual bound that converged solves must satisfy.
_STEP_TOL = 1e-10
_RESIDUAL_TOL = 1e-8
_MAX_CYCLES = 100
_DIVERGE_LO, _DIVERGE_HI = -0.25, 1.25


@dataclass(frozen=True)
class SelfConsistentSolve:
    """Outcome of the self-consistent missing-mass solve.

    Attributes
    ----------
    m_star : float
        The accepted missing-mass value (fixed point, or the fallback).
    upsilon_used : int
        Unobserved-label count in effect when iteration converged; the
        last value tried (1) when the fallback engaged.
    m0 : float
        Initial iterate, (5n-3)/(8(n+1)).
    coverage : float
        1 - m_star, the single shrinkage factor applied to observed
        frequencies.
    iterations : int
        Total Steffensen cycles spent across all upsilon attempts.
    fallback : bool
        True when no upsilon converged and the adjusted Good-Turing value
        was returned instead.
    """

    m_star: float
    upsilon_used: int
    m0: float
    coverage: float
    iterations: int
    fallback: bool


def missing_mass_good_turing(counts: SampleCounts, adjusted: bool = False) -> float:
    """Good-Turing missing mass phi_1/n.

    With ``adjusted=True`` an all-singleton sample (phi_1 = n) returns
    (phi_1 - 1)/n instead, keeping the implied coverage away from zero.
    """
    phi1 = sum(1 for c in counts.counts if c == 1)
    if adjusted and phi1 == counts.n:
        phi1 -= 1
    return phi1 / counts.n


def mu(m: float, upsilon: int, counts: SampleCounts) -> float:
    """The missing-mass consistency map.

    Shrinks observed empirical frequencies by (1-m), assigns m/upsilon to
    each of the assumed unobserved labels, and returns the missing mass
    those prevalences would be expected to leave after n fresh draws. For
    m in [0,1] and any upsilon >= 0 the value lies in [0,1]: the observed
    component is at most (1-m) and the unobserved component at most m.
    """
    n = counts.n
    u = max(upsilon, 1)
    om = 1.0 - m
    acc = 0.0
    for c in counts.counts:
        p = c / n
        acc += p * (1.0 - om * p) ** n
    return om * acc + m * (1.0 - m / u) ** n


def _consistency_map(counts: SampleCounts, upsilon: int) -> Callable[[float], float]:
    """`mu` with counts and upsilon bound, for the solver's inner loop."""
    n = counts.n
    u = max(upsilon, 1)
    ps = [c / n for c in counts.counts]

    def g(m: float) -> float:
        om = 1.0 - m
        acc = 0.0
        for p in ps:
            acc += p * (1.0 - om * p) ** n
        return om * acc + m * (1.0 - m / u) ** n

    return g


def _steffensen(g: Callable[[float], float], x0: float) -> tuple[float | None, int]:
    """Steffensen-accelerated iteration toward a fixed point of g.

    Returns (fixed point, cycles) or (None, cycles) on divergence: any
    iterate leaving [-0.25, 1.25], a non-finite value, or running out of
    cycles. Each cycle spends two map evaluations and one Aitken update.
    """
    x = x0
    for cycle in range(1, _MAX_CYCLES + 1):
        x1 = g(x)
        x2 = g(x1)
        if not (math.isfinite(x1) and math.isfinite(x2)):
            return None, cycle
        if not (_DIVERGE_LO <= x1 <= _DIVERGE_HI and _DIVERGE_LO <= x2 <= _DIVERGE_HI):
            return None, cycle
        denom = x2 - 2.0 * x1 + x
        if abs(denom) < 1e-300:
            nxt = x2
        else:
            nxt = x - (x1 - x) ** 2 / denom
        if not math.isfinite(nxt) or not (_DIVERGE_LO <= nxt <= _DIVERGE_HI):
            return None, cycle
        if abs(nxt - x) < _STEP_TOL:
            return nxt, cycle
        x = nxt
    return None, _MAX_CYCLES


def solve_self_consistent(counts: SampleCounts, support: SupportEstimate) -> SelfConsistentSolve:
    """Solve m* = mu(m*, upsilon, X) for the given support estimate.

    upsilon starts at max(round-half-up(support) - observed, 1). Each
    attempt runs Steffensen iteration from m0 = (5n-3)/(8(n+1)) and is
    accepted when it converges to m* in [0,1] with residual
    |mu(m*) - m*| < 1e-8; otherwise upsilon is decremented (floor 1) and
    the solve retried. When upsilon = 1 also fails, the adjusted
    Good-Turing value (clamped to [0, 1-1e-9]) is returned with
    ``fallback=True``.
    """
    observed = len(counts.counts)
    if support.value < observed:
        raise ValueError(
            f"support estimate {support.value!r} below observed support {observed}"
        )
    n = counts.n
    m0 = (5.0 * n - 3.0) / (8.0 * (n + 1.0))
    upsilon0 = max(int(math.floor(support.value + 0.5)) - observed, 1)

    total_cycles = 0
    for upsilon in range(upsilon0, 0, -1):
        g = _consistency_map(counts, upsilon)
        x, cycles = _steffensen(g, m0)
        total_cycles += cycles
        if x is None:
            continue
        # The Aitken update can overshoot a boundary fixed point by float
        # noise, and a degenerate root at 0 (single-label samples, where
        # g(m) - m ~ -n m^2) makes the iteration stall a few nanounits
        # short of it. Snap to the boundary when within the residual
        # tolerance; the acceptance test below re-validates the snapped
        # value, so this never replaces a good answer with a bad one.
        if -_RESIDUAL_TOL < x < 0.0 or (
            0.0 <= x < _RESIDUAL_TOL and abs(g(0.0)) < _RESIDUAL_TOL
        ):
            x = 0.0
        elif 1.0 < x < 1.0 + _RESIDUAL_TOL:
            x = 1.0
        if 0.0 <= x <= 1.0 and abs(g(x) - x) < _RESIDUAL_TOL:
            return SelfConsistentSolve(
                m_star=x,
                upsilon_used=upsilon,
                m0=m0,
                coverage=1.0 - x,
                iterations=total_cycles,
                fallback=False,
            )

    fallback_m = min(missing_mass_good_turing(counts, adjusted=True), 1.0 - 1e-9)
    fallback_m = max(fallback_m, 0.0)
    return SelfConsistentSolve(
        m_star=fallback_m,
        upsilon_used=1,
        m0=m0,
        coverage=1.0 - fallback_m,
        iterations=total_cycles,
        fallback=True,
    )


def solve_with_estimated_support(
    counts: SampleCounts, support_estimator: SupportEstimator = support_chao1_bc
) -> SelfConsistentSolve:
    """Full solve: estimate the support, clip it, find the fixed point.

    The support estimate is lower-clipped to observed + 1 so at least one
    unobserved label is always assumed.
    """
    fp = fingerprint(counts)
    observed = len(counts.counts)
    raw = support_estimator(fp, observed)
    clipped = SupportEstimate(max(raw.value, observed + 1.0), raw.method)
    return solve_self_consistent(counts, clipped)


def missing_mass_from_support(observed: int, support: SupportEstimate) -> float:
    """Missing mass implied by a support estimate, 1 - observed/support.

    Clamped to [0, 1]; estimates below the observed support clamp to 0.
    """
    if observed < 1:
        raise ValueError("observed support must be at least 1")
    if support.value <= 0.0:
        raise ValueError("support estimate must be positive")
    return min(max(1.0 - observed / support.value, 0.0), 1.0)

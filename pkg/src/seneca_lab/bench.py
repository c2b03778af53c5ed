"""Benchmark engine: simulation grids, bootstrap intervals, rankings.

The engine evaluates entropy estimators over a grid of (family, support
size) settings at a fixed sample size, reporting per-setting RMSE with
its bias-variance decomposition and BCa confidence intervals, regime
averages with pivot intervals, missing-mass residual diagnostics, and a
subsample-from-population benchmark aggregated by Borda count.

Determinism contract: every random draw comes from a stream derived by a
keyed hash of (master_seed, family, params, support size, trial index,
purpose tag), see :mod:`seneca_lab.seeding`. Results are therefore
independent of execution order and of the degree of parallelism, and
re-runs with the same seed are bit-identical.
"""
from __future__ import annotations

import json
import math
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.stats import norm

from .distributions import (
    FAMILIES,
    TrueDistribution,
    expected_missing_mass,
    make_distribution,
    realized_missing_mass,
    sample,
    sample_with_indices,
    true_entropy,
)
from .entropy import ESTIMATORS, entropy_plugin
from .missing_mass import mu, solve_self_consistent, solve_with_estimated_support
from .sample import SampleCounts
from .seeding import derive_rng
from .support import SupportEstimate, support_risky_threshold

Statistic = Callable[[np.ndarray], float]

RESIDUAL_MODES = ("oracle-mu", "known-support", "estimated-support")


@dataclass(frozen=True)
class FamilySpec:
    """A distribution family tag plus its parameters, e.g. zipf alpha=0.5."""

    family: str
    params: Mapping[str, float] = field(default_factory=dict)

    @property
    def params_json(self) -> str:
        """Canonical JSON rendering of the parameters, used in seeds and CSVs."""
        return json.dumps(
            {k: float(v) for k, v in sorted(self.params.items())},
            separators=(",", ":"),
        )


@dataclass(frozen=True)
class GridConfig:
    families: tuple[FamilySpec, ...]
    support_sizes: tuple[int, ...]
    n: int
    trials: int
    estimators: tuple[str, ...]
    master_seed: int
    bootstrap_reps: int = 1000
    confidence: float = 0.95

    def __post_init__(self) -> None:
        if not self.families:
            raise ValueError("at least one family is required")
        if not self.support_sizes:
            raise ValueError("at least one support size is required")
        if not self.estimators:
            raise ValueError("at least one estimator is required")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n < 1:
            raise ValueError("sample size must be >= 1")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must be in (0, 1)")
        for spec in self.families:
            if spec.family not in FAMILIES:
                raise ValueError(
                    f"unknown family {spec.family!r}; valid: {', '.join(FAMILIES)}"
                )
        for tag in self.estimators:
            if tag not in ESTIMATORS:
                raise ValueError(
                    f"unknown estimator {tag!r}; valid: {', '.join(sorted(ESTIMATORS))}"
                )


@dataclass(frozen=True)
class SettingSummary:
    """Error statistics for one (family, support size, estimator) cell."""

    family: str
    params: str
    support_size: int
    n: int
    estimator: str
    rmse: float
    bias: float
    variance: float
    ci_low: float
    ci_high: float
    trials: int


@dataclass(frozen=True)
class SettingFailure:
    """A setting the grid skipped, with the reason; the run continues."""

    family: str
    params: str
    support_size: int
    message: str


@dataclass(frozen=True)
class TrialRecord:
    family: str
    params: str
    support_size: int
    n: int
    trial: int
    estimator: str
    estimate: float
    truth: float


@dataclass(frozen=True)
class ResidualRecord:
    family: str
    params: str
    support_size: int
    n: int
    trial: int
    mode: str
    residual: float


class PivotInterval(NamedTuple):
    low: float
    high: float
    radius: float


@dataclass(frozen=True)
class GridResult:
    """Everything run_grid produces.

    ``errors`` maps (family, params, support_size, estimator) to the
    per-trial error array, kept so regime-level pivot intervals can be
    bootstrapped without re-simulating. ``records`` is populated only
    when the grid was run with ``keep_trials=True``.
    """

    config: GridConfig
    summaries: tuple[SettingSummary, ...]
    failures: tuple[SettingFailure, ...]
    errors: Mapping[tuple[str, str, int, str], np.ndarray]
    records: tuple[TrialRecord, ...] | None = None


def error_stats(estimates: Sequence[float], truths: Sequence[float]) -> dict[str, float]:
    """RMSE of estimates vs truths, decomposed as rmse^2 = bias^2 + variance."""
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truths, dtype=float)
    if est.ndim != 1 or est.shape != tru.shape:
        raise ValueError("estimates and truths must be 1-d and the same length")
    if est.size == 0:
        raise ValueError("empty input")
    err = est - tru
    bias = float(err.mean())
    mean_sq = float(np.mean(err * err))
    return {
        "rmse": math.sqrt(mean_sq),
        "bias": bias,
        "variance": mean_sq - bias * bias,
    }


def rmse_of_errors(errors: np.ndarray) -> float:
    """sqrt(mean(e^2)); the statistic bootstrapped for per-setting CIs."""
    errors = np.asarray(errors, dtype=float)
    return math.sqrt(float(np.mean(errors * errors)))


def _resample_statistics(
    values: np.ndarray, statistic: Statistic, reps: int, rng: np.random.Generator
) -> np.ndarray:
    m = values.size
    idx = rng.integers(0, m, size=(reps, m))
    out = np.empty(reps)
    for i in range(reps):
        out[i] = statistic(values[idx[i]])
    return out


def bootstrap_bca(
    values: Sequence[float],
    statistic: Statistic,
    *,
    reps: int = 1000,
    level: float = 0.95,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Bias-corrected and accelerated bootstrap interval for a statistic.

    z0 comes from the fraction of bootstrap replicates strictly below the
    point estimate (clipped away from 0 and 1 so the normal quantile stays
    finite), the acceleration from jackknife skewness. Degenerate inputs
    or replicate sets collapse to the point estimate.
    """
    vals = np.asarray(values, dtype=float)
    if vals.size < 2:
        raise ValueError("need at least two values to bootstrap")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    theta = float(statistic(vals))
    if np.all(vals == vals[0]):
        return theta, theta
    boot = _resample_statistics(vals, statistic, reps, rng)
    if np.all(boot == boot[0]):
        return theta, theta

    frac = float(np.mean(boot < theta))
    frac = min(max(frac, 1.0 / (reps + 1)), reps / (reps + 1.0))
    z0 = float(norm.ppf(frac))

    m = vals.size
    jack = np.empty(m)
    for i in range(m):
        jack[i] = statistic(np.delete(vals, i))
    dev = jack.mean() - jack
    denom = 6.0 * float(np.sum(dev * dev)) ** 1.5
    accel = float(np.sum(dev**3)) / denom if denom > 0.0 else 0.0

    alpha = 1.0 - level
    ends = []
    for a_i in (alpha / 2.0, 1.0 - alpha / 2.0):
        z = float(norm.ppf(a_i))
        adj = float(norm.cdf(z0 + (z0 + z) / (1.0 - accel * (z0 + z))))
        adj = min(max(adj, 0.0), 1.0)
        ends.append(float(np.quantile(boot, adj)))
    low, high = sorted(ends)
    return low, high


def bootstrap_pivot(
    values: Sequence[float],
    statistic: Statistic,
    *,
    reps: int = 1000,
    level: float = 0.95,
    rng: np.random.Generator,
) -> PivotInterval:
    """Pivot interval (2*theta - q_hi, 2*theta - q_lo) plus its radius.

    The radius is max(theta - low, high - theta), the symmetric
    half-width used for +/- style reporting.
    """
    vals = np.asarray(values, dtype=float)
    if vals.size < 2:
        raise ValueError("need at least two values to bootstrap")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    theta = float(statistic(vals))
    if np.all(vals == vals[0]):
        return PivotInterval(theta, theta, 0.0)
    boot = _resample_statistics(vals, statistic, reps, rng)
    alpha = 1.0 - level
    q_lo, q_hi = (
        float(np.quantile(boot, alpha / 2.0)),
        float(np.quantile(boot, 1.0 - alpha / 2.0)),
    )
    low, high = 2.0 * theta - q_hi, 2.0 * theta - q_lo
    return PivotInterval(low, high, max(theta - low, high - theta))


def regime_pivot(
    error_arrays: Sequence[np.ndarray],
    *,
    reps: int = 1000,
    level: float = 0.95,
    rng: np.random.Generator,
) -> PivotInterval:
    """Pivot interval for a regime-averaged RMSE.

    Each replicate resamples trial-level errors within every setting,
    recomputes each setting's RMSE, and averages across settings; the
    pivot transform then runs on those replicate means.
    """
    arrays = [np.asarray(a, dtype=float) for a in error_arrays]
    if not arrays:
        raise ValueError("at least one setting is required")
    theta = float(np.mean([rmse_of_errors(a) for a in arrays]))
    boot = np.zeros(reps)
    for arr in arrays:
        m = arr.size
        idx = rng.integers(0, m, size=(reps, m))
        sq = arr[idx]
        boot += np.sqrt(np.mean(sq * sq, axis=1))
    boot /= len(arrays)
    if np.all(boot == boot[0]):
        return PivotInterval(theta, theta, 0.0)
    alpha = 1.0 - level
    q_lo, q_hi = (
        float(np.quantile(boot, alpha / 2.0)),
        float(np.quantile(boot, 1.0 - alpha / 2.0)),
    )
    low, high = 2.0 * theta - q_hi, 2.0 * theta - q_lo
    return PivotInterval(low, high, max(theta - low, high - theta))


def regime_average(summaries: Sequence[SettingSummary], n: int) -> dict[str, object]:
    """Unweighted per-regime RMSE means over a single estimator's settings.

    Returns a dict with "well" (support <= n) and "under" (support > n)
    entries, each the mean RMSE over that regime's settings; an empty
    regime contributes no entry. "support_risky" lists the support sizes
    exceeding the gamma(n) threshold (empty when gamma is undefined).
    """
    if not summaries:
        raise ValueError("no summaries to average")
    tags = {s.estimator for s in summaries}
    sizes_n = {s.n for s in summaries}
    if len(tags) > 1 or len(sizes_n) > 1:
        raise ValueError("regime averages mix estimators or sample sizes")
    if sizes_n != {n}:
        raise ValueError(f"summaries are for n={sizes_n.pop()}, not n={n}")
    out: dict[str, object] = {}
    well = [s.rmse for s in summaries if s.support_size <= n]
    under = [s.rmse for s in summaries if s.support_size > n]
    if well:
        out["well"] = float(np.mean(well))
    if under:
        out["under"] = float(np.mean(under))
    gamma = support_risky_threshold(n)
    out["support_risky"] = tuple(
        sorted(s.support_size for s in summaries if gamma is not None and s.support_size > gamma)
    )
    return out


def _eval_setting(
    config: GridConfig, spec: FamilySpec, support_size: int, keep_trials: bool
) -> tuple[
    list[SettingSummary],
    dict[tuple[str, str, int, str], np.ndarray],
    list[TrialRecord],
    SettingFailure | None,
]:
    seed = config.master_seed
    pjson = spec.params_json
    trials = config.trials
    estimates = {tag: np.empty(trials) for tag in config.estimators}
    truths = np.empty(trials)
    try:
        fixed = None
        if spec.family != "dirichlet":
            fixed = make_distribution(spec.family, support_size, dict(spec.params))
        for t in range(trials):
            dist = fixed
            if dist is None:
                dist = make_distribution(
                    spec.family,
                    support_size,
                    dict(spec.params),
                    rng=derive_rng(seed, spec.family, pjson, support_size, t, "dist"),
                )
            truths[t] = true_entropy(dist)
            counts = sample(
                dist,
                config.n,
                derive_rng(seed, spec.family, pjson, support_size, t, "sample"),
            )
            for tag in config.estimators:
                estimates[tag][t] = ESTIMATORS[tag](counts).value
    except ValueError as exc:
        return [], {}, [], SettingFailure(spec.family, pjson, support_size, str(exc))

    summaries: list[SettingSummary] = []
    errors: dict[tuple[str, str, int, str], np.ndarray] = {}
    records: list[TrialRecord] = []
    for tag in config.estimators:
        stats = error_stats(estimates[tag], truths)
        err = estimates[tag] - truths
        if trials >= 2:
            ci_low, ci_high = bootstrap_bca(
                err,
                rmse_of_errors,
                reps=config.bootstrap_reps,
                level=config.confidence,
                rng=derive_rng(seed, spec.family, pjson, support_size, tag, "bootstrap"),
            )
        else:
            ci_low = ci_high = stats["rmse"]
        summaries.append(
            SettingSummary(
                family=spec.family,
                params=pjson,
                support_size=support_size,
                n=config.n,
                estimator=tag,
                rmse=stats["rmse"],
                bias=stats["bias"],
                variance=stats["variance"],
                ci_low=ci_low,
                ci_high=ci_high,
                trials=trials,
            )
        )
        errors[(spec.family, pjson, support_size, tag)] = err
        if keep_trials:
            for t in range(trials):
                records.append(
                    TrialRecord(
                        family=spec.family,
                        params=pjson,
                        support_size=support_size,
                        n=config.n,
                        trial=t,
                        estimator=tag,
                        estimate=float(estimates[tag][t]),
                        truth=float(truths[t]),
                    )
                )
    return summaries, errors, records, None


def run_grid(config: GridConfig, *, keep_trials: bool = False, threads: int = 1) -> GridResult:
    """Evaluate every configured estimator over the (family, support) grid.

    Settings run independently (optionally across ``threads`` workers)
    and merge in canonical family-major, support-ascending order, so the
    output does not depend on scheduling. A setting whose distribution
    cannot be built (an odd step support, say) becomes a failure entry
    and the rest of the grid still runs.
    """
    work = [(spec, k) for spec in config.families for k in config.support_sizes]

    def job(item: tuple[FamilySpec, int]):
        return _eval_setting(config, item[0], item[1], keep_trials)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(job, work))
    else:
        outcomes = [job(item) for item in work]

    summaries: list[SettingSummary] = []
    failures: list[SettingFailure] = []
    errors: dict[tuple[str, str, int, str], np.ndarray] = {}
    records: list[TrialRecord] = []
    for setting_summaries, setting_errors, setting_records, failure in outcomes:
        if failure is not None:
            failures.append(failure)
            continue
        summaries.extend(setting_summaries)
        errors.update(setting_errors)
        records.extend(setting_records)
    return GridResult(
        config=config,
        summaries=tuple(summaries),
        failures=tuple(failures),
        errors=errors,
        records=tuple(records) if keep_trials else None,
    )


@dataclass(frozen=True)
class Ballot:
    """One ranking of estimators, best (lowest RMSE) first, with ties.

    ``context`` identifies where the ranking came from as a
    (population id, sample size) pair; ``ranking`` is a tuple of tie
    groups, each a tuple of estimator tags.
    """

    context: tuple[str, int]
    ranking: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        tags = [t for group in self.ranking for t in group]
        if not tags:
            raise ValueError("empty ballot")
        if len(tags) != len(set(tags)):
            raise ValueError("an estimator appears more than once in a ballot")


def borda(ballots: Sequence[Ballot]) -> dict[str, float]:
    """Borda totals: points per ballot = number of estimators outranked.

    Tie groups share the points of the positions they straddle equally,
    so each ballot always hands out C(k, 2) points in total. An empty
    ballot list yields an empty map.
    """
    if not ballots:
        return {}
    universe = {t for group in ballots[0].ranking for t in group}
    points = {t: 0.0 for t in universe}
    for ballot in ballots:
        tags = [t for group in ballot.ranking for t in group]
        if set(tags) != universe:
            raise ValueError("ballots must rank the same estimator set")
        remaining = len(tags)
        for group in ballot.ranking:
            remaining -= len(group)
            shared = remaining + (len(group) - 1) / 2.0
            for tag in group:
                points[tag] += shared
    return points


@dataclass(frozen=True)
class SubsampleSummary:
    """Error statistics for one (population, sample size, estimator) cell."""

    population: str
    n: int
    estimator: str
    rmse: float
    bias: float
    variance: float
    ci_low: float
    ci_high: float
    trials: int
    truth: float


def _rank_with_ties(rmses: Mapping[str, float], order: Sequence[str]) -> tuple[tuple[str, ...], ...]:
    """Group tags into tie groups by exact RMSE, ascending."""
    groups: list[tuple[str, ...]] = []
    for tag in sorted(order, key=lambda t: rmses[t]):
        if groups and rmses[groups[-1][0]] == rmses[tag]:
            groups[-1] = groups[-1] + (tag,)
        else:
            groups.append((tag,))
    return tuple(groups)


def subsample_bench(
    population: SampleCounts,
    sample_sizes: Sequence[int],
    *,
    trials: int,
    estimators: Sequence[str],
    master_seed: int,
    population_id: str = "population",
    bootstrap_reps: int = 1000,
    confidence: float = 0.95,
) -> tuple[list[SubsampleSummary], list[Ballot]]:
    """Benchmark estimators on i.i.d. subsamples of a census population.

    The population's empirical prevalences act as the true distribution
    (so the truth is the plugin entropy of the full census) and samples
    of each requested size are drawn with replacement. Returns one
    summary per (size, estimator) and one RMSE-ranking ballot per size.
    """
    if not sample_sizes:
        raise ValueError("at least one sample size is required")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for tag in estimators:
        if tag not in ESTIMATORS:
            raise ValueError(
                f"unknown estimator {tag!r}; valid: {', '.join(sorted(ESTIMATORS))}"
            )
    truth = entropy_plugin(population).value
    dist = TrueDistribution(
        tuple(c / population.n for c in population.counts), "empirical"
    )
    summaries: list[SubsampleSummary] = []
    ballots: list[Ballot] = []
    for size in sample_sizes:
        if size < 1:
            raise ValueError("sample sizes must be >= 1")
        estimates = {tag: np.empty(trials) for tag in estimators}
        for t in range(trials):
            counts = sample(
                dist, size, derive_rng(master_seed, "subsample", population_id, size, t, "sample")
            )
            for tag in estimators:
                estimates[tag][t] = ESTIMATORS[tag](counts).value
        rmses: dict[str, float] = {}
        for tag in estimators:
            err = estimates[tag] - truth
            stats = error_stats(estimates[tag], np.full(trials, truth))
            if trials >= 2:
                ci_low, ci_high = bootstrap_bca(
                    err,
                    rmse_of_errors,
                    reps=bootstrap_reps,
                    level=confidence,
                    rng=derive_rng(
                        master_seed, "subsample", population_id, size, tag, "bootstrap"
                    ),
                )
            else:
                ci_low = ci_high = stats["rmse"]
            rmses[tag] = stats["rmse"]
            summaries.append(
                SubsampleSummary(
                    population=population_id,
                    n=size,
                    estimator=tag,
                    rmse=stats["rmse"],
                    bias=stats["bias"],
                    variance=stats["variance"],
                    ci_low=ci_low,
                    ci_high=ci_high,
                    trials=trials,
                    truth=truth,
                )
            )
        ballots.append(
            Ballot(context=(population_id, size), ranking=_rank_with_ties(rmses, estimators))
        )
    return summaries, ballots


def borda_pivot(
    ballots: Sequence[Ballot],
    *,
    reps: int = 1000,
    level: float = 0.95,
    rng: np.random.Generator,
) -> dict[str, PivotInterval]:
    """Pivot intervals for Borda totals, bootstrapping over populations.

    Each replicate resamples population ids with replacement and sums
    Borda points over the resampled populations' ballots. Needs ballots
    from at least two distinct populations.
    """
    by_population: dict[str, list[Ballot]] = {}
    for ballot in ballots:
        by_population.setdefault(ballot.context[0], []).append(ballot)
    populations = sorted(by_population)
    if len(populations) < 2:
        raise ValueError("need ballots from at least two populations")
    totals = borda(ballots)
    tags = sorted(totals)
    reps_idx = rng.integers(0, len(populations), size=(reps, len(populations)))
    boot = {tag: np.empty(reps) for tag in tags}
    for r in range(reps):
        resampled: list[Ballot] = []
        for i in reps_idx[r]:
            resampled.extend(by_population[populations[i]])
        replicate = borda(resampled)
        for tag in tags:
            boot[tag][r] = replicate[tag]
    alpha = 1.0 - level
    out: dict[str, PivotInterval] = {}
    for tag in tags:
        theta = totals[tag]
        arr = boot[tag]
        if np.all(arr == arr[0]):
            out[tag] = PivotInterval(theta, theta, 0.0)
            continue
        q_lo, q_hi = (
            float(np.quantile(arr, alpha / 2.0)),
            float(np.quantile(arr, 1.0 - alpha / 2.0)),
        )
        low, high = 2.0 * theta - q_hi, 2.0 * theta - q_lo
        out[tag] = PivotInterval(low, high, max(theta - low, high - theta))
    return out


def residual_modes(
    dist: TrueDistribution, counts: SampleCounts, label_indices: Sequence[int]
) -> dict[str, float]:
    """Missing-mass residuals of the three diagnostic modes for one sample.

    All residuals are against the expected missing mass
    sum_u p_u (1 - p_u)^n. "oracle-mu" evaluates the consistency map at
    the realized missing mass with the true unobserved-label count;
    "known-support" solves the fixed point with the true support size;
    "estimated-support" runs the full estimated-support solve.
    """
    n = counts.n
    expected = expected_missing_mass(dist, n)
    realized = realized_missing_mass(dist, counts, label_indices)
    true_unobserved = dist.support_size - len(counts.counts)
    oracle = mu(realized, true_unobserved, counts)
    known = solve_self_consistent(
        counts, SupportEstimate(float(dist.support_size), "true-support")
    ).m_star
    estimated = solve_with_estimated_support(counts).m_star
    return {
        "oracle-mu": oracle - expected,
        "known-support": known - expected,
        "estimated-support": estimated - expected,
    }


def oracle_residual_scenario(config: GridConfig) -> list[ResidualRecord]:
    """Per-trial missing-mass residuals over the configured grid.

    Reuses the grid's per-trial sample streams, so residuals line up
    with the samples run_grid would draw for the same config.
    """
    seed = config.master_seed
    records: list[ResidualRecord] = []
    for spec in config.families:
        pjson = spec.params_json
        for support_size in config.support_sizes:
            fixed = None
            if spec.family != "dirichlet":
                fixed = make_distribution(spec.family, support_size, dict(spec.params))
            for t in range(config.trials):
                dist = fixed
                if dist is None:
                    dist = make_distribution(
                        spec.family,
                        support_size,
                        dict(spec.params),
                        rng=derive_rng(seed, spec.family, pjson, support_size, t, "dist"),
                    )
                counts, indices = sample_with_indices(
                    dist,
                    config.n,
                    derive_rng(seed, spec.family, pjson, support_size, t, "sample"),
                )
                for mode, residual in residual_modes(dist, counts, indices).items():
                    records.append(
                        ResidualRecord(
                            family=spec.family,
                            params=pjson,
                            support_size=support_size,
                            n=config.n,
                            trial=t,
                            mode=mode,
                            residual=residual,
                        )
                    )
    return records

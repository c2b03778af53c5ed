"""Synthetic ground-truth label-prevalence distributions.

Eight families drive the benchmark: uniform, step (half the labels at
1/(2k), half at 3/(2k)), Zipf with shape 0.5/1/1.5, Dirichlet draws with
concentration 0.5/1, and a beta-binomial(2,2) shape. Each gives an exact
entropy and missing-mass oracle, and `sample` draws i.i.d. labels with
replacement, which is the sampling model of the whole benchmark.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import betabinom

from .sample import SampleCounts

FAMILIES = ("uniform", "step", "zipf", "dirichlet", "beta-binomial")


@dataclass(frozen=True)
class TrueDistribution:
    """A known prevalence vector with family metadata.

    ``probs`` must be strictly positive and sum to 1 within 1e-12.
    """

    probs: tuple[float, ...]
    family: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.probs) == 0:
            raise ValueError("empty distribution")
        if any(p <= 0.0 for p in self.probs):
            raise ValueError("all prevalences must be positive")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"prevalences sum to {total!r}, not 1")

    @property
    def support_size(self) -> int:
        return len(self.probs)


def _normalized(weights: np.ndarray) -> tuple[float, ...]:
    probs = np.asarray(weights, dtype=float)
    probs = probs / probs.sum()
    # fsum-exact renormalization so the invariant |sum - 1| <= 1e-12 holds
    # even after float division noise.
    probs[-1] += 1.0 - math.fsum(probs)
    return tuple(float(p) for p in probs)


def make_distribution(
    family: str,
    support_size: int,
    params: Mapping[str, float] | None = None,
    rng: np.random.Generator | None = None,
) -> TrueDistribution:
    """Construct one of the benchmark families.

    Parameters
    ----------
    family : str
        One of ``uniform``, ``step``, ``zipf``, ``dirichlet``,
        ``beta-binomial``.
    support_size : int
        Number of labels, at least 2. ``step`` needs an even value.
    params : mapping, optional
        ``alpha`` for zipf/dirichlet (required, positive); ``alpha`` and
        ``beta`` for beta-binomial (both default to the benchmark's 2.0).
    rng : numpy.random.Generator, optional
        Required for ``dirichlet``: every call draws a fresh prevalence
        vector, so per-trial streams give per-trial truths.
    """
    params = dict(params or {})
    k = int(support_size)
    if k < 2:
        raise ValueError("support_size must be at least 2")
    if family == "uniform":
        return TrueDistribution(_normalized(np.ones(k)), "uniform")
    if family == "step":
        if k % 2:
            raise ValueError("step distribution needs an even support size")
        half = k // 2
        lo, hi = 1.0 / (2.0 * k), 3.0 / (2.0 * k)
        return TrueDistribution(_normalized(np.array([lo] * half + [hi] * half)), "step")
    if family == "zipf":
        alpha = float(params.get("alpha", 0.0))
        if alpha <= 0.0:
            raise ValueError("zipf needs a positive alpha")
        ranks = np.arange(1, k + 1, dtype=float)
        return TrueDistribution(_normalized(ranks ** -alpha), "zipf", {"alpha": alpha})
    if family == "dirichlet":
        alpha = float(params.get("alpha", 0.0))
        if alpha <= 0.0:
            raise ValueError("dirichlet needs a positive alpha")
        if rng is None:
            raise ValueError("dirichlet needs an rng")
        draw = rng.dirichlet(np.full(k, alpha))
        while not np.all(draw > 0.0):  # pragma: no cover - underflow guard
            draw = rng.dirichlet(np.full(k, alpha))
        return TrueDistribution(_normalized(draw), "dirichlet", {"alpha": alpha})
    if family == "beta-binomial":
        alpha = float(params.get("alpha", 2.0))
        beta = float(params.get("beta", 2.0))
        if alpha <= 0.0 or beta <= 0.0:
            raise ValueError("beta-binomial needs positive alpha and beta")
        # k outcomes means k-1 trials: pmf over u = 0..k-1.
        pmf = betabinom.pmf(np.arange(k), k - 1, alpha, beta)
        return TrueDistribution(_normalized(pmf), "beta-binomial", {"alpha": alpha, "beta": beta})
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def true_entropy(dist: TrueDistribution) -> float:
    """Exact entropy -sum p ln p in nats."""
    return -math.fsum(p * math.log(p) for p in dist.probs if p < 1.0)


def sample(dist: TrueDistribution, n: int, rng: np.random.Generator) -> SampleCounts:
    """Draw ``n`` i.i.d. labels with replacement, tallied to `SampleCounts`."""
    counts, _ = sample_with_indices(dist, n, rng)
    return counts


def sample_with_indices(
    dist: TrueDistribution, n: int, rng: np.random.Generator
) -> tuple[SampleCounts, tuple[int, ...]]:
    """Like `sample`, also reporting which distribution index each entry is.

    The index map is what `realized_missing_mass` needs to know the
    observed prevalence mass. Entries follow the canonical order of the
    returned counts (descending count, ties by distribution index).
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    vec = rng.multinomial(n, np.asarray(dist.probs))
    observed = [(int(c), int(i)) for i, c in enumerate(vec) if c > 0]
    observed.sort(key=lambda pair: (-pair[0], pair[1]))
    counts = tuple(c for c, _ in observed)
    indices = tuple(i for _, i in observed)
    return SampleCounts(counts, int(n)), indices


def expected_missing_mass(dist: TrueDistribution, n: int) -> float:
    """Expected unobserved mass after n draws, ``sum_u p_u (1-p_u)^n``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return math.fsum(p * (1.0 - p) ** n for p in dist.probs)


def realized_missing_mass(
    dist: TrueDistribution, counts: SampleCounts, label_map: tuple[int, ...]
) -> float:
    """Unobserved prevalence mass of one particular sample.

    ``label_map[i]`` names the distribution index behind ``counts.counts[i]``;
    the result is ``1 - sum of observed prevalences``.
    """
    if len(label_map) != len(counts.counts):
        raise ValueError("label_map length does not match counts")
    if len(set(label_map)) != len(label_map):
        raise ValueError("label_map has duplicate indices")
    if any(i < 0 or i >= len(dist.probs) for i in label_map):
        raise ValueError("label_map index out of range")
    seen = math.fsum(dist.probs[i] for i in label_map)
    return min(max(1.0 - seen, 0.0), 1.0)

"""Count multisets and their frequency-of-frequencies fingerprints.

Every estimator in this package is a function of the sample's count
multiset alone: which label carried which count never matters, only how
many labels were seen once, twice, and so on. `SampleCounts` is therefore
the canonical sample representation, and `Fingerprint` the derived
frequency-of-frequencies view that support estimators consume.
"""
from __future__ import annotations

from collections import Counter
from collections.abc import Hashable, Mapping, Sequence
from dataclasses import dataclass


@dataclass(frozen=True)
class SampleCounts:
    """Occurrence counts of the distinct labels in one sample.

    Parameters
    ----------
    counts : tuple of int
        One positive entry per distinct observed label. Order carries no
        statistical meaning; `counts_from_labels` produces a canonical
        (descending, first-appearance-stable) order so serialized output
        is byte-stable.
    n : int
        Sample size; must equal ``sum(counts)``.
    """

    counts: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if len(self.counts) == 0:
            raise ValueError("empty sample")
        if any(not isinstance(c, int) or c < 1 for c in self.counts):
            raise ValueError("counts must be positive integers")
        if self.n != sum(self.counts):
            raise ValueError(f"n={self.n} does not match sum(counts)={sum(self.counts)}")

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "SampleCounts":
        """Build from a bare count sequence, computing ``n``."""
        tup = tuple(int(c) for c in counts)
        return cls(tup, sum(tup))

    @property
    def observed(self) -> int:
        """Number of distinct observed labels."""
        return len(self.counts)


@dataclass(frozen=True)
class Fingerprint:
    """Frequency of frequencies: ``phi[i]`` labels were seen exactly i times.

    Only occupied occurrence counts are stored; absent keys mean zero, and
    ``fp[i]`` indexing applies that convention.
    """

    phi: Mapping[int, int]

    def __getitem__(self, i: int) -> int:
        return self.phi.get(i, 0)

    @property
    def observed(self) -> int:
        """Total number of distinct labels, ``sum_i phi[i]``."""
        return sum(self.phi.values())

    @property
    def n(self) -> int:
        """Sample size recovered as ``sum_i i * phi[i]``."""
        return sum(i * c for i, c in self.phi.items())


def counts_from_labels(labels: Sequence[Hashable]) -> SampleCounts:
    """Tally a label sequence into canonical `SampleCounts`.

    The result is ordered by descending count with ties broken by first
    appearance in ``labels`` (Python's sort is stable and `Counter`
    preserves first-insertion order), so equal inputs always serialize
    identically.

    Raises
    ------
    ValueError
        If ``labels`` is empty.
    """
    if len(labels) == 0:
        raise ValueError("empty sample")
    tally = Counter(labels)
    ordered = tuple(sorted(tally.values(), reverse=True))
    return SampleCounts(ordered, len(labels))


def fingerprint(counts: SampleCounts) -> Fingerprint:
    """Frequency of frequencies of a sample.

    ``phi[i]`` is the number of distinct labels observed exactly ``i``
    times, so ``sum_i i*phi[i] == n`` and ``sum_i phi[i]`` equals the
    observed support.
    """
    return Fingerprint(dict(Counter(counts.counts)))


def observed_support(counts: SampleCounts) -> int:
    """Number of distinct labels observed in the sample."""
    return len(counts.counts)

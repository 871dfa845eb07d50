"""Query-frequency and inter-event burst detection.

Both burst rules are relative to the series' own maximum, so rescaling all
counts (or all gaps) by a positive constant never changes which points are
burst candidates.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyGroupError, SinglePointError
from .records import DnsQueryRecord


@dataclass(frozen=True)
class BurstConfig:
    """Relative burst threshold; the default keeps 80% of the maximum."""

    threshold_fraction: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold_fraction < 1.0:
            raise ValueError("threshold_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class QueryFrequencySeries:
    """Distinct query timestamps and the query count at each."""

    time_points: tuple[int, ...]
    counts: tuple[int, ...]


@dataclass(frozen=True)
class InterEventSeries:
    """Gaps between consecutive time points, in ms."""

    gaps: tuple[int, ...]


@dataclass(frozen=True)
class BurstFeatures:
    freq_burst_count: int
    freq_burst_max_size: int
    freq_burst_mean_size: float
    interevent_burst_count: int
    interevent_burst_max_size: int


def frequency_series(records: Sequence[DnsQueryRecord]) -> QueryFrequencySeries:
    """Collapse one domain's records to (timestamp, query count) pairs."""
    if not records:
        raise EmptyGroupError("frequency_series over empty group")
    counter = Counter(rec.timestamp for rec in records)
    points = tuple(sorted(counter))
    return QueryFrequencySeries(points, tuple(counter[t] for t in points))


def detect_frequency_bursts(
    series: QueryFrequencySeries, cfg: BurstConfig = BurstConfig()
) -> tuple[int, int, float]:
    """(count, max size, mean size) of query-frequency burst candidates.

    A time point is a candidate iff its count reaches the threshold
    fraction of the series maximum; the maximum itself always qualifies.
    """
    if not series.counts:
        raise EmptyGroupError("empty frequency series")
    peak = max(series.counts)
    threshold = cfg.threshold_fraction * peak
    candidates = [c for c in series.counts if c >= threshold]
    return len(candidates), max(candidates), sum(candidates) / len(candidates)


def interevent_series(series: QueryFrequencySeries) -> InterEventSeries:
    """Consecutive time-point differences; needs at least two points."""
    points = series.time_points
    if len(points) < 2:
        raise SinglePointError("inter-event series needs >= 2 time points")
    return InterEventSeries(
        tuple(points[i + 1] - points[i] for i in range(len(points) - 1))
    )


def detect_interevent_bursts(
    series: InterEventSeries, cfg: BurstConfig = BurstConfig()
) -> tuple[int, int]:
    """(count, max size) of inter-event bursts.

    A gap is small iff it is at most (1 - threshold) of the maximum gap; a
    burst is a maximal run of consecutive small gaps and its size is the
    number of queries the run spans (run length + 1). Empty input gives
    zeros.
    """
    gaps = series.gaps
    if not gaps:
        return 0, 0
    cutoff = (1.0 - cfg.threshold_fraction) * max(gaps)
    count = 0
    longest = 0
    run = 0
    for gap in gaps:
        if gap <= cutoff:
            run += 1
            if run == 1:
                count += 1
            longest = max(longest, run)
        else:
            run = 0
    return count, (longest + 1 if longest else 0)


def burst_features(
    records: Sequence[DnsQueryRecord], cfg: BurstConfig = BurstConfig()
) -> BurstFeatures:
    """All burst features for one domain's records within one segment."""
    series = frequency_series(records)
    f_count, f_max, f_mean = detect_frequency_bursts(series, cfg)
    try:
        gaps = interevent_series(series)
    except SinglePointError:
        i_count, i_max = 0, 0
    else:
        i_count, i_max = detect_interevent_bursts(gaps, cfg)
    return BurstFeatures(f_count, f_max, f_mean, i_count, i_max)

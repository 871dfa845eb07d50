"""Non-temporal features: string-based lexical counts and per-group query
aggregates.

Both are pure functions; query aggregates are order-invariant over the
record group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import EmptyGroupError, NonAsciiDomainError
from .records import DnsQueryRecord

VOWELS = frozenset("aeiou")
CONSONANTS = frozenset("bcdfghjklmnpqrstvwxyz")
DIGITS = frozenset("0123456789")

#: Categorical record fields aggregated as (unique count, unique ratio).
#: The first five are single-valued per record, the rest multi-valued.
SCALAR_FIELDS = ("query_type", "response_type", "response_name", "country", "ip_prefix")
MULTI_FIELDS = ("cname", "dname", "mx", "ns", "txt", "ipv4", "ipv6")
CATEGORICAL_FIELDS = (
    "query_type",
    "response_type",
    "response_name",
    "country",
    "ip_prefix",
    "cname",
    "dname",
    "mx",
    "ns",
    "txt",
    "ipv4",
    "ipv6",
)


@dataclass(frozen=True, slots=True)
class LexicalFeatures:
    """Character-level counts over the full DN string, dots included."""

    length: int
    digit_count: int
    unique_digit_count: int
    char_count: int
    unique_char_count: int
    symbol_count: int
    vowel_count: int
    consonant_count: int
    unique_alphanumeric_count: int
    unique_alnum_to_length_ratio: float


def lexical_features(domain: str) -> LexicalFeatures:
    """Count characters of a cleaned (lowercase ASCII) domain name.

    Dots and hyphens count as symbols; vowels are aeiou; anything not a
    lowercase letter or digit is a symbol.
    """
    if not domain:
        raise EmptyGroupError("empty domain string")
    if not domain.isascii():
        raise NonAsciiDomainError(domain)

    digits = 0
    letters = 0
    vowels = 0
    seen_digits: set[str] = set()
    seen_letters: set[str] = set()
    for ch in domain:
        if ch in DIGITS:
            digits += 1
            seen_digits.add(ch)
        elif ch in CONSONANTS or ch in VOWELS:
            letters += 1
            seen_letters.add(ch)
            if ch in VOWELS:
                vowels += 1
    length = len(domain)
    unique_alnum = len(seen_digits) + len(seen_letters)
    return LexicalFeatures(
        length=length,
        digit_count=digits,
        unique_digit_count=len(seen_digits),
        char_count=letters,
        unique_char_count=len(seen_letters),
        symbol_count=length - digits - letters,
        vowel_count=vowels,
        consonant_count=letters - vowels,
        unique_alphanumeric_count=unique_alnum,
        unique_alnum_to_length_ratio=unique_alnum / length,
    )


@dataclass(frozen=True)
class QueryFeatures:
    """Aggregates over one domain's records within one segment.

    ``unique_ratios`` divides each field's unique-value count by the group's
    record count for single-valued fields and by the field's total value
    count for multi-valued fields, so every ratio stays within [0, 1].
    ``rtt_present`` flags whether any record carried an RTT; it is kept out
    of the regular feature vector.
    """

    unique_counts: Mapping[str, int]
    unique_ratios: Mapping[str, float]
    ttl_unique_count: int
    ttl_min: float
    ttl_max: float
    ttl_mean: float
    ttl_std: float
    rtt_unique_count: int
    rtt_min: float
    rtt_max: float
    rtt_mean: float
    rtt_std: float
    rtt_present: bool
    unique_ip_total: int
    unique_ipv4_count: int
    unique_ipv6_count: int


def _stats(values: Sequence[float]) -> tuple[float, float, float, float]:
    """(min, max, mean, population std) of a nonempty sequence."""
    lo = min(values)
    hi = max(values)
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return lo, hi, mean, math.sqrt(var)


def query_features(records: Sequence[DnsQueryRecord]) -> QueryFeatures:
    """Aggregate DNS-query features for one domain in one segment."""
    if not records:
        raise EmptyGroupError("query_features over empty group")
    n = len(records)

    unique_counts: dict[str, int] = {}
    unique_ratios: dict[str, float] = {}
    for name in SCALAR_FIELDS:
        seen = {v for v in (getattr(r, name) for r in records) if v}
        unique_counts[name] = len(seen)
        unique_ratios[name] = len(seen) / n
    for name in MULTI_FIELDS:
        seen = set()
        total = 0
        for r in records:
            values = getattr(r, name)
            seen |= values
            total += len(values)
        unique_counts[name] = len(seen)
        unique_ratios[name] = len(seen) / total if total else 0.0

    ttls = [r.ttl for r in records]
    ttl_min, ttl_max, ttl_mean, ttl_std = _stats(ttls)

    rtts = [r.rtt for r in records if r.rtt is not None]
    if rtts:
        rtt_min, rtt_max, rtt_mean, rtt_std = _stats(rtts)
    else:
        rtt_min = rtt_max = rtt_mean = rtt_std = 0.0

    ipv4 = unique_counts["ipv4"]
    ipv6 = unique_counts["ipv6"]
    return QueryFeatures(
        unique_counts=unique_counts,
        unique_ratios=unique_ratios,
        ttl_unique_count=len(set(ttls)),
        ttl_min=float(ttl_min),
        ttl_max=float(ttl_max),
        ttl_mean=ttl_mean,
        ttl_std=ttl_std,
        rtt_unique_count=len(set(rtts)),
        rtt_min=float(rtt_min),
        rtt_max=float(rtt_max),
        rtt_mean=rtt_mean,
        rtt_std=rtt_std,
        rtt_present=bool(rtts),
        unique_ip_total=ipv4 + ipv6,
        unique_ipv4_count=ipv4,
        unique_ipv6_count=ipv6,
    )

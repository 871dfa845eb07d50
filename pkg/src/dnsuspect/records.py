"""Record, label, granularity and segment types plus the text wire format.

Input files are delimiter-separated text with a header row. Multi-valued
cells (IP sets, NS sets, ...) pack their values with ``|``. The segment
writer emits the same format, so segment files can be re-ingested.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import IO, Iterable, Mapping, Sequence


class Label(Enum):
    """Ground-truth class of a domain."""

    BENIGN = "B"
    MALICIOUS = "M"
    MALICIOUS_BLOCKCHAIN = "MBC"

    @property
    def is_malicious(self) -> bool:
        return self is not Label.BENIGN

    @classmethod
    def parse(cls, text: str) -> "Label":
        return cls(text.strip().upper())


#: The retained record fields, in wire order. ``domain`` maps to the query
#: name column; ``tld`` is derived during cleaning and never read from input.
RETAINED_FIELDS = (
    "domain",
    "query_type",
    "response_type",
    "response_name",
    "timestamp",
    "ttl",
    "rtt",
    "ipv4",
    "ipv6",
    "country",
    "ip_prefix",
    "cname",
    "dname",
    "mx",
    "ns",
    "txt",
)

SET_FIELDS = ("ipv4", "ipv6", "cname", "dname", "mx", "ns", "txt")
SET_SEPARATOR = "|"

#: Default column mapping: each retained field reads the same-named column.
DEFAULT_SCHEMA: dict[str, str] = {name: name for name in RETAINED_FIELDS}


@dataclass(slots=True)
class DnsQueryRecord:
    """One passive-DNS observation.

    Instances produced by ``parse_records`` are raw candidates: ``domain``
    holds whatever the source held and ``tld`` is empty until ``clean``
    normalizes the name and fills the registered domain. After cleaning,
    ``domain`` is lowercase with no scheme and no leading ``www.``,
    ``tld`` is nonempty and ``timestamp`` (ms since epoch) is positive.
    """

    domain: str
    timestamp: int | None
    query_type: str = ""
    response_type: str = ""
    response_name: str = ""
    ttl: int = 0
    rtt: float | None = None
    ipv4: frozenset[str] = frozenset()
    ipv6: frozenset[str] = frozenset()
    country: str | None = None
    ip_prefix: str | None = None
    cname: frozenset[str] = frozenset()
    dname: frozenset[str] = frozenset()
    mx: frozenset[str] = frozenset()
    ns: frozenset[str] = frozenset()
    txt: frozenset[str] = frozenset()
    tld: str = ""


@dataclass(frozen=True)
class ParseError:
    """A malformed input row: collected, never fatal."""

    row: int
    reason: str
    detail: str = ""


TWO_HOURS_MS = 7_200_000


@dataclass(frozen=True)
class Granularity:
    """Temporal granularity: fixed-width windows ("2H") or the whole span."""

    kind: str
    window_ms: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("2H", "ALL"):
            raise ValueError(f"unknown granularity kind: {self.kind!r}")
        if self.kind == "2H" and (self.window_ms is None or self.window_ms <= 0):
            raise ValueError("2H granularity needs a positive window")

    @staticmethod
    def two_hour() -> "Granularity":
        return Granularity("2H", TWO_HOURS_MS)

    @staticmethod
    def whole_span() -> "Granularity":
        return Granularity("ALL", None)

    @staticmethod
    def parse(text: str) -> "Granularity":
        text = text.strip().upper()
        if text == "2H":
            return Granularity.two_hour()
        if text == "ALL":
            return Granularity.whole_span()
        raise ValueError(f"unknown granularity: {text!r}")


@dataclass
class Segment:
    """A contiguous time window of records; half-open interval [start, end)."""

    index: int
    start_ms: int
    end_ms: int
    records: list[DnsQueryRecord] = field(default_factory=list)

    def file_name(self) -> str:
        return f"seg-{self.index}-{self.start_ms}.csv"


def _format_cell(name: str, value: object) -> str:
    if value is None:
        return ""
    if name in SET_FIELDS:
        return SET_SEPARATOR.join(sorted(value))  # type: ignore[arg-type]
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records(
    fh: IO[str], records: Iterable[DnsQueryRecord], delimiter: str = ","
) -> int:
    """Write records in the input wire format; returns the row count."""
    writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
    writer.writerow(RETAINED_FIELDS)
    n = 0
    for rec in records:
        writer.writerow(
            [_format_cell(name, getattr(rec, name)) for name in RETAINED_FIELDS]
        )
        n += 1
    return n


def record_field_names() -> tuple[str, ...]:
    return tuple(f.name for f in fields(DnsQueryRecord))


def resolve_schema(overrides: Mapping[str, str] | None = None) -> dict[str, str]:
    """Merge user column-name overrides into the default schema."""
    schema = dict(DEFAULT_SCHEMA)
    if overrides:
        unknown = set(overrides) - set(RETAINED_FIELDS)
        if unknown:
            raise ValueError(f"schema overrides for unknown fields: {sorted(unknown)}")
        schema.update(overrides)
    return schema


def write_labels(fh: IO[str], labels: Mapping[str, Label]) -> None:
    for domain in sorted(labels):
        fh.write(f"{domain}\t{labels[domain].value}\n")


def read_labels(fh: IO[str]) -> dict[str, Label]:
    out: dict[str, Label] = {}
    for line in fh:
        line = line.rstrip("\n")
        if not line:
            continue
        domain, _, value = line.partition("\t")
        out[domain] = Label.parse(value)
    return out

"""Parsing, cleaning, labeling and temporal segmentation of raw traffic.

Cleaning drops exactly the records whose registered domain (TLD) or
timestamp is missing; everything else is normalized, never dropped.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .errors import EmptyInputError, MissingColumnError, UnreadableSourceError
from .records import (
    DnsQueryRecord,
    Granularity,
    Label,
    ParseError,
    Segment,
    SET_FIELDS,
    SET_SEPARATOR,
    resolve_schema,
)
from .suffixes import registered_domain

_SCHEME_RE = re.compile(r"^[a-z][a-z0-9+.-]*://")


@dataclass(frozen=True)
class BlocklistSource:
    """One blocklist file tagged by what it lists."""

    path: Path
    kind: str  # "blockchain" or "malicious"

    def __post_init__(self) -> None:
        if self.kind not in ("blockchain", "malicious"):
            raise ValueError(f"unknown blocklist kind: {self.kind!r}")


def _parse_set(cell: str) -> frozenset[str]:
    if not cell:
        return frozenset()
    return frozenset(v for v in cell.split(SET_SEPARATOR) if v)


def parse_records(
    source: IO[str] | Iterable[str],
    schema: Mapping[str, str] | None = None,
    delimiter: str = ",",
) -> tuple[list[DnsQueryRecord], list[ParseError]]:
    """Parse delimiter-separated text into raw record candidates.

    Row-level problems become ``ParseError`` entries (row numbers count data
    rows from 1); only a schema column missing from the header is fatal.
    Optional fields that fail to parse (rtt, country) become absent instead
    of erroring, mirroring the cleaning rule that only TLD or timestamp
    absence may cost a record.
    """
    columns = resolve_schema(schema)
    reader = csv.reader(source, delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyInputError("input has no header row") from None
    index: dict[str, int] = {}
    for fieldname, column in columns.items():
        try:
            index[fieldname] = header.index(column)
        except ValueError:
            raise MissingColumnError(
                f"column {column!r} (field {fieldname!r}) not in header"
            ) from None

    records: list[DnsQueryRecord] = []
    errors: list[ParseError] = []
    width = len(header)
    for rownum, row in enumerate(reader, start=1):
        if len(row) != width:
            errors.append(
                ParseError(rownum, "BadFieldCount", f"{len(row)} != {width}")
            )
            continue

        cell = lambda name: row[index[name]].strip()  # noqa: E731

        ts_text = cell("timestamp")
        timestamp: int | None
        if not ts_text:
            timestamp = None
        else:
            try:
                timestamp = int(ts_text)
            except ValueError:
                errors.append(ParseError(rownum, "BadTimestamp", ts_text))
                continue
            if timestamp <= 0:
                errors.append(ParseError(rownum, "BadTimestamp", ts_text))
                continue

        ttl_text = cell("ttl")
        if not ttl_text:
            ttl = 0
        else:
            try:
                ttl = int(ttl_text)
            except ValueError:
                errors.append(ParseError(rownum, "BadTtl", ttl_text))
                continue
            if ttl < 0:
                errors.append(ParseError(rownum, "BadTtl", ttl_text))
                continue

        rtt_text = cell("rtt")
        rtt: float | None = None
        if rtt_text:
            try:
                rtt = float(rtt_text)
            except ValueError:
                rtt = None
            else:
                if rtt < 0:
                    rtt = None

        records.append(
            DnsQueryRecord(
                domain=cell("domain"),
                timestamp=timestamp,
                query_type=cell("query_type"),
                response_type=cell("response_type"),
                response_name=cell("response_name"),
                ttl=ttl,
                rtt=rtt,
                ipv4=_parse_set(cell("ipv4")),
                ipv6=_parse_set(cell("ipv6")),
                country=cell("country") or None,
                ip_prefix=cell("ip_prefix") or None,
                cname=_parse_set(cell("cname")),
                dname=_parse_set(cell("dname")),
                mx=_parse_set(cell("mx")),
                ns=_parse_set(cell("ns")),
                txt=_parse_set(cell("txt")),
            )
        )
    return records, errors


def normalize_domain(raw: str) -> str:
    """Lowercase, strip scheme / path / leading ``www.`` / trailing dots."""
    name = raw.strip().lower()
    name = _SCHEME_RE.sub("", name)
    name, _, _ = name.partition("/")
    while name.startswith("www."):
        name = name[4:]
    return name.strip(".")


def clean(records: Iterable[DnsQueryRecord]) -> list[DnsQueryRecord]:
    """Normalize candidates and drop those missing a TLD or timestamp."""
    out: list[DnsQueryRecord] = []
    for rec in records:
        if rec.timestamp is None or rec.timestamp <= 0:
            continue
        domain = normalize_domain(rec.domain)
        if not domain:
            continue
        tld = registered_domain(domain)
        if not tld:
            continue
        rec.domain = domain
        rec.tld = tld
        out.append(rec)
    return out


def _load_blocklist(source: BlocklistSource) -> set[str]:
    try:
        text = Path(source.path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UnreadableSourceError(f"{source.path}: {exc}") from exc
    entries: set[str] = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tld = registered_domain(normalize_domain(line))
        if tld:
            entries.add(tld)
    return entries


def label_domains(
    domains: Iterable[str], sources: Sequence[BlocklistSource]
) -> dict[str, Label]:
    """Label each DN by blocklist membership of its registered domain.

    A blockchain-tagged hit dominates a plain malicious hit; otherwise any
    hit labels the DN malicious; otherwise benign. Source order is
    irrelevant beyond that rule.
    """
    blockchain: set[str] = set()
    malicious: set[str] = set()
    for source in sources:
        entries = _load_blocklist(source)
        if source.kind == "blockchain":
            blockchain |= entries
        else:
            malicious |= entries

    labels: dict[str, Label] = {}
    for domain in domains:
        tld = registered_domain(domain) or domain
        if tld in blockchain:
            labels[domain] = Label.MALICIOUS_BLOCKCHAIN
        elif tld in malicious:
            labels[domain] = Label.MALICIOUS
        else:
            labels[domain] = Label.BENIGN
    return labels


def segment(records: Sequence[DnsQueryRecord], granularity: Granularity) -> list[Segment]:
    """Partition cleaned records into disjoint, ordered time segments.

    2H windows are aligned to the first timestamp floored to the window
    size; empty windows inside the span are not emitted. ALL yields a
    single segment covering everything.
    """
    if not records:
        raise EmptyInputError("no records to segment")
    timestamps = [rec.timestamp for rec in records]
    if any(ts is None for ts in timestamps):
        raise ValueError("segment() requires cleaned records")
    lo = min(timestamps)  # type: ignore[type-var]
    hi = max(timestamps)  # type: ignore[type-var]

    if granularity.kind == "ALL":
        return [Segment(0, lo, hi + 1, list(records))]

    window = granularity.window_ms
    assert window is not None
    base = (lo // window) * window
    buckets: dict[int, list[DnsQueryRecord]] = {}
    for rec in records:
        idx = (rec.timestamp - base) // window  # type: ignore[operator]
        buckets.setdefault(idx, []).append(rec)
    return [
        Segment(idx, base + idx * window, base + (idx + 1) * window, buckets[idx])
        for idx in sorted(buckets)
    ]

"""Registered-domain extraction against a bundled public-suffix snapshot.

The snapshot is static so that builds are deterministic; there is no network
refresh. A domain whose trailing labels match no known suffix has no
registered domain and is treated as missing its TLD.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

_SUFFIXES: frozenset[str] | None = None


def _load() -> frozenset[str]:
    global _SUFFIXES
    if _SUFFIXES is None:
        text = (
            resources.files("dnsuspect.data")
            .joinpath("public_suffixes.txt")
            .read_text(encoding="utf-8")
        )
        entries = set()
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                entries.add(line)
        _SUFFIXES = frozenset(entries)
    return _SUFFIXES


@lru_cache(maxsize=65536)
def registered_domain(domain: str) -> str:
    """Return the registered domain of a normalized DN, or "" if none.

    The registered domain is the longest known public suffix plus the label
    immediately before it: ``a.b.example.co.uk`` -> ``example.co.uk``. A bare
    suffix or an unknown TLD yields "".
    """
    if not domain:
        return ""
    suffixes = _load()
    labels = domain.split(".")
    if "" in labels:
        return ""
    for i in range(len(labels)):
        if ".".join(labels[i:]) in suffixes:
            if i == 0:
                return ""
            return ".".join(labels[i - 1 :])
    return ""

"""General and access statistics over parsed log records."""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .classification import (
    DEFAULT_CONFIG,
    ClassifierConfig,
    RequestClass,
    browser_family,
    classify_resource,
    is_successful,
    status_label,
)
from .errors import DomainError
from .log_parser import LogRecord, format_day


def success_ratio(hits: int, incomplete: int) -> Fraction:
    """Fraction of a key's hits that succeeded, as an exact rational.

    This is the "% OF TOTAL" column of the access and co-relation tables.
    """
    if hits < 1:
        raise DomainError("success ratio needs at least one hit")
    if not 0 <= incomplete <= hits:
        raise DomainError(f"incomplete={incomplete} outside 0..{hits}")
    return Fraction(hits - incomplete, hits)


@dataclass(frozen=True)
class GeneralStats:
    total_hits: int = 0
    successful_hits: int = 0
    incomplete_hits: int = 0
    page_views: int = 0
    image_views: int = 0
    file_downloads: int = 0
    other_assets: int = 0
    visitors: int = 0


@dataclass(frozen=True)
class DailyRow:
    date: str
    hits: int
    successful: int
    incomplete: int


@dataclass(frozen=True)
class AccessRow:
    key: str
    hits: int
    incomplete: int

    @property
    def success_ratio(self) -> Fraction:
        return success_ratio(self.hits, self.incomplete)


class KeyBy(str, enum.Enum):
    IP = "ip"
    URL = "url"


def _successful(record: LogRecord) -> bool:
    return is_successful(record.status)


def general_stats(records: Iterable[LogRecord],
                  config: ClassifierConfig = DEFAULT_CONFIG) -> GeneralStats:
    total = 0
    classes: Counter[RequestClass] = Counter()
    ips = set()
    for r in records:
        total += 1
        ips.add(r.ip)
        if _successful(r):
            classes[classify_resource(r.url, config)] += 1
    successful = sum(classes.values())
    return GeneralStats(
        total_hits=total,
        successful_hits=successful,
        incomplete_hits=total - successful,
        page_views=classes[RequestClass.PAGE_VIEW],
        image_views=classes[RequestClass.IMAGE_VIEW],
        file_downloads=classes[RequestClass.FILE_DOWNLOAD],
        other_assets=classes[RequestClass.OTHER_ASSET],
        visitors=len(ips),
    )


def per_day(records: Iterable[LogRecord]) -> tuple[list[DailyRow], int]:
    """Hits per local calendar day and the floored average over those days."""
    hits: Counter = Counter()
    ok: Counter = Counter()
    for r in records:
        d = r.day
        hits[d] += 1
        if _successful(r):
            ok[d] += 1
    rows = [DailyRow(format_day(d), hits[d], ok[d], hits[d] - ok[d]) for d in sorted(hits)]
    average = sum(hits.values()) // len(rows) if rows else 0
    return rows, average


def browser_stats(records: Iterable[LogRecord]) -> list[tuple[str, int]]:
    counts = Counter(browser_family(r.user_agent) for r in records)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def error_report(records: Iterable[LogRecord]) -> list[tuple[str, int]]:
    counts = Counter(status_label(r.status) for r in records if not _successful(r))
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def access_stats(records: Iterable[LogRecord], key_by: KeyBy | str = KeyBy.IP) -> list[AccessRow]:
    """One row per distinct ip (or url), sorted by key as text."""
    key_by = KeyBy(key_by)
    attr = "ip" if key_by is KeyBy.IP else "url"
    tally: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for r in records:
        slot = tally[getattr(r, attr)]
        slot[0] += 1
        if not _successful(r):
            slot[1] += 1
    return [AccessRow(key, h, inc) for key, (h, inc) in sorted(tally.items())]

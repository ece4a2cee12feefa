"""Common and Combined Log Format parsing.

Lines that do not match the grammar are skipped and counted by reason,
never fatal: production access logs routinely contain truncated or
garbled lines.
"""

from __future__ import annotations

import gzip
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
          "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
_MONTH_NUMBER = {name: i for i, name in enumerate(MONTHS, start=1)}

_QUOTED = r'"((?:[^"\\]|\\.)*)"'
_LINE_RE = re.compile(
    r"^(\S+)[ \t]+(\S+)[ \t]+(\S+)[ \t]+"
    r"\[([^\]]*)\][ \t]+"
    + _QUOTED +
    r"[ \t]+(\S+)[ \t]+(\S+)"
    r"(?:[ \t]+" + _QUOTED + r"[ \t]+" + _QUOTED + r")?"
    r"[ \t]*$"
)
_TIME_RE = re.compile(
    r"^(\d{2})/([A-Z][a-z]{2})/(\d{4}):(\d{2}):(\d{2}):(\d{2}) ([+-])(\d{2})(\d{2})$"
)
_METHOD_RE = re.compile(r"^[!#$%&'*+.^_`|~0-9A-Za-z-]+$")
_COMMON_METHODS = frozenset({"GET", "POST", "HEAD", "PUT", "DELETE", "OPTIONS", "PATCH"})


class MalformedLine(ValueError):
    """A log line that does not follow the CLF/Combined grammar."""

    def __init__(self, reason: str, line_number: int | None = None):
        self.reason = reason
        self.line_number = line_number
        where = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{where}{reason}")


@dataclass(frozen=True, slots=True)
class LogRecord:
    """One parsed access-log line.

    ``timestamp`` keeps the UTC offset that was logged, so ``local_date``
    reflects the server's calendar day rather than the UTC day.
    """

    ip: str
    identity: str | None
    authuser: str | None
    timestamp: datetime
    method: str
    url: str
    protocol: str | None
    status: int
    bytes: int | None
    referrer: str | None = None
    user_agent: str | None = None
    line_number: int = 1

    @property
    def day(self) -> date:
        return self.timestamp.date()

    @property
    def local_date(self) -> str:
        return format_day(self.timestamp.date())

    @property
    def utc(self) -> datetime:
        return self.timestamp.astimezone(timezone.utc)


@dataclass
class ParseStats:
    total_lines: int = 0
    parsed: int = 0
    skipped: int = 0
    skip_reasons: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total_lines": self.total_lines,
            "parsed": self.parsed,
            "skipped": self.skipped,
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
        }


def format_day(d: date) -> str:
    """Render a date as ``dd/Mon/yyyy`` independent of the process locale."""
    return f"{d.day:02d}/{MONTHS[d.month - 1]}/{d.year:04d}"


@lru_cache(maxsize=64)
def _tz(sign: str, hours: int, minutes: int) -> timezone:
    offset = timedelta(hours=hours, minutes=minutes)
    return timezone(-offset if sign == "-" else offset)


def parse_timestamp(text: str) -> datetime:
    m = _TIME_RE.match(text)
    if m is None:
        raise MalformedLine("bad-date")
    day, mon, year, hh, mm, ss, sign, oh, om = m.groups()
    month = _MONTH_NUMBER.get(mon)
    if month is None or int(om) >= 60:
        raise MalformedLine("bad-date")
    try:
        return datetime(int(year), month, int(day), int(hh), int(mm), int(ss),
                        tzinfo=_tz(sign, int(oh), int(om)))
    except ValueError:
        raise MalformedLine("bad-date") from None


def format_timestamp(ts: datetime) -> str:
    offset = ts.utcoffset() or timedelta(0)
    sign = "-" if offset < timedelta(0) else "+"
    minutes = abs(int(offset.total_seconds())) // 60
    return (f"{format_day(ts.date())}:{ts.hour:02d}:{ts.minute:02d}:{ts.second:02d} "
            f"{sign}{minutes // 60:02d}{minutes % 60:02d}")


def _valid_target(url: str) -> bool:
    return url.startswith("/") or url == "*" or "://" in url


def _dash(value: str) -> str | None:
    return None if value == "-" else value


def _reason_for_mismatch(line: str) -> str:
    if "[" not in line or "]" not in line:
        return "missing-brackets"
    if line.count('"') < 2:
        return "missing-quotes"
    return "bad-structure"


def parse_line(line: str, line_number: int = 1) -> LogRecord:
    """Parse one physical line (without its newline) into a ``LogRecord``.

    Raises ``MalformedLine`` carrying a short reason label.
    """
    if not line.strip():
        raise MalformedLine("blank", line_number)
    m = _LINE_RE.match(line)
    if m is None:
        raise MalformedLine(_reason_for_mismatch(line), line_number)
    ip, identity, authuser, ts_text, request, status_text, bytes_text, referrer, agent = m.groups()

    if not (status_text.isascii() and status_text.isdigit()):
        raise MalformedLine("bad-status", line_number)
    status = int(status_text)
    if not 100 <= status <= 599:
        raise MalformedLine("status-out-of-range", line_number)

    if bytes_text == "-":
        size = None
    elif bytes_text.isascii() and bytes_text.isdigit():
        size = int(bytes_text)
    else:
        raise MalformedLine("bad-bytes", line_number)

    parts = request.split()
    if (len(parts) not in (2, 3)
            or (parts[0] not in _COMMON_METHODS and not _METHOD_RE.match(parts[0]))
            or not _valid_target(parts[1])):
        raise MalformedLine("bad-request", line_number)

    try:
        timestamp = parse_timestamp(ts_text)
    except MalformedLine:
        raise MalformedLine("bad-date", line_number) from None

    return LogRecord(
        ip=ip,
        identity=_dash(identity),
        authuser=_dash(authuser),
        timestamp=timestamp,
        method=parts[0],
        url=parts[1],
        protocol=parts[2] if len(parts) == 3 else None,
        status=status,
        bytes=size,
        referrer=None if referrer is None else _dash(referrer),
        user_agent=None if agent is None else _dash(agent),
        line_number=line_number,
    )


def format_line(record: LogRecord) -> str:
    """Serialize a record back to a canonical log line.

    Combined format is emitted when a referrer or user-agent is present,
    plain CLF otherwise.
    """
    request = f"{record.method} {record.url}"
    if record.protocol:
        request += f" {record.protocol}"
    line = (f'{record.ip} {record.identity or "-"} {record.authuser or "-"} '
            f'[{format_timestamp(record.timestamp)}] "{request}" {record.status} '
            f'{"-" if record.bytes is None else record.bytes}')
    if record.referrer is not None or record.user_agent is not None:
        line += f' "{record.referrer or "-"}" "{record.user_agent or "-"}"'
    return line


def parse_log(lines: Iterable[str]) -> tuple[list[LogRecord], ParseStats]:
    """Parse a stream of lines; malformed lines are counted, not raised.

    Line numbers start at 1 and continue across the whole stream, so
    several files chained together keep a single increasing numbering.
    """
    records: list[LogRecord] = []
    reasons: Counter[str] = Counter()
    total = 0
    for total, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        try:
            records.append(parse_line(line, total))
        except MalformedLine as exc:
            reasons[exc.reason] += 1
            log.debug("skipping %s", exc)
    skipped = sum(reasons.values())
    return records, ParseStats(total, total - skipped, skipped, dict(reasons))


def read_lines(path: str | Path) -> Iterator[str]:
    """Yield text lines from a plain or gzip-compressed log file.

    Compression is detected from the gzip magic bytes, not the file name.
    Undecodable bytes are replaced rather than raised.
    """
    path = Path(path)
    with path.open("rb") as fh:
        compressed = fh.read(2) == b"\x1f\x8b"
    opener = gzip.open if compressed else open
    with opener(path, "rt", encoding="utf-8", errors="replace", newline="") as fh:
        yield from fh


def extract_path(url: str) -> str:
    """Directory component of a request target, with trailing slash.

    >>> extract_path("/atten_files/arrow.gif")
    '/atten_files/'
    >>> extract_path("/combined.pdf?v=2")
    '/'
    """
    target = url.split("?", 1)[0]
    cut = target.rfind("/")
    if cut < 0:
        return "/"
    return target[: cut + 1]

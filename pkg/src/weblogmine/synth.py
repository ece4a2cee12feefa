"""Synthetic access logs for tests and benchmarks.

Each visitor settles in one site section and keeps returning to a handful
of its files, so per-visitor url baskets stay small and overlap the way
they do on real sites. Visitor activity is heavy-tailed.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone
from itertools import accumulate
from typing import Iterable, TextIO

from .log_parser import LogRecord, format_line

EXTENSIONS = ["html", "htm", "gif", "jpg", "png", "js", "css", "pdf", "zip", "php"]
USER_AGENTS = [
    "Mozilla/4.0 (compatible; MSIE 6.0; Windows NT 5.1)",
    "Mozilla/5.0 (X11; U; Linux i686; en-US) Gecko/2008092416 Firefox/3.0.3",
    "Opera/9.62 (Windows NT 5.1; U; en)",
    "curl/7.19.7",
    "Wget/1.11.4",
]
STATUSES = [200] * 60 + [304] * 12 + [404] * 14 + [206] * 3 + [301] * 3 + [403] * 3 + [500] * 5
OFFSETS = [timezone(timedelta(hours=5, minutes=30)), timezone.utc, timezone(timedelta(hours=-7))]


def _site(rng: random.Random, sections: int, files: int) -> tuple[list[str], list[list[str]]]:
    front = ["/", "/index.html", "/combined.pdf"]
    dirs = []
    for d in range(sections):
        names = [f"/sec{d}_files/f{i}.{rng.choice(EXTENSIONS)}" for i in range(files)]
        dirs.append(names)
    return front, dirs


def _ip(rng: random.Random) -> str:
    if rng.random() < 0.05:
        return f"host-{rng.randrange(1000)}.example.net"
    return ".".join(str(rng.randrange(1, 255)) for _ in range(4))


def _interest_size(rng: random.Random, cap: int) -> int:
    size = 1
    while size < cap and rng.random() < 0.65:
        size += 1
    return size


def generate_records(n: int, seed: int = 0, *, visitors: int | None = None, days: int = 2,
                     sections: int = 30, files_per_section: int = 20, max_interest: int = 8,
                     start: datetime | None = None) -> list[LogRecord]:
    rng = random.Random(seed)
    visitors = visitors or max(1, n // 50)
    front, dirs = _site(rng, sections, files_per_section)
    ips = list(dict.fromkeys(_ip(rng) for _ in range(visitors)))
    file_weights = [1.0 / (i + 1) for i in range(files_per_section)]
    interests = {}
    for ip in ips:
        section = dirs[rng.randrange(sections)]
        interests[ip] = sorted({rng.choices(section, file_weights)[0]
                                for _ in range(_interest_size(rng, max_interest))})
    activity = list(accumulate(1.0 / (rank + 1) ** 0.8 for rank in range(len(ips))))
    tz = rng.choice(OFFSETS)
    start = start or datetime(2008, 11, 27, tzinfo=tz)
    step = timedelta(days=days) / max(n, 1)

    records = []
    for i in range(n):
        ip = rng.choices(ips, cum_weights=activity)[0]
        if rng.random() < 0.15:
            url = rng.choice(front)
        else:
            url = rng.choice(interests[ip])
        if rng.random() < 0.03:
            url += f"?id={rng.randrange(100)}"
        combined = rng.random() < 0.8
        ts = (start + step * i).replace(microsecond=0)
        records.append(LogRecord(
            ip=ip,
            identity=None,
            authuser="frank" if rng.random() < 0.02 else None,
            timestamp=ts,
            method=rng.choice(["GET"] * 8 + ["POST", "HEAD"]),
            url=url,
            protocol=rng.choice(["HTTP/1.1", "HTTP/1.1", "HTTP/1.0", None]),
            status=rng.choice(STATUSES),
            bytes=None if rng.random() < 0.1 else rng.randrange(50_000),
            referrer=(rng.choice([None, "http://www.example.edu/", "http://www.google.com/search?q=x"])
                      if combined else None),
            user_agent=rng.choice(USER_AGENTS + [None]) if combined else None,
            line_number=i + 1,
        ))
    return records


def write_log(records: Iterable[LogRecord], fh: TextIO) -> None:
    for r in records:
        fh.write(format_line(r) + "\n")

"""Command-line entry point: parse, classify, aggregate, mine, render."""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from itertools import chain
from pathlib import Path
from typing import Iterator, Sequence

from . import __version__
from .classification import DEFAULT_CONFIG, ClassifierConfig, parse_extensions
from .errors import UsageError
from .log_parser import parse_log, read_lines
from .mining import (
    TABLE_NAMES,
    TransactionScheme,
    apriori,
    as_fraction,
    build_transactions,
    custom_apriori,
    generate_rules,
)
from .reporting import FORMATS, ReportDocument, render_document
from .statistics import KeyBy, access_stats, browser_stats, error_report, general_stats, per_day

log = logging.getLogger("weblogmine")

SECTIONS = ("general", "access", "corelations", "rules")
CONFIG_SECTION = "weblogmine"


@dataclass
class RunConfig:
    inputs: list[Path]
    format: str = "text"
    output: Path | None = None
    min_support: int = 3
    min_hits: int = 3
    min_confidence: Fraction = Fraction(1, 2)
    sections: tuple[str, ...] = SECTIONS
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    top_n: int | None = None
    generated_at: str | None = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="weblogmine",
        description="Analyze web server access logs (CLF/Combined): general and access "
                    "statistics, ip/url/path co-relations and association rules.",
    )
    p.add_argument("--input", "-i", nargs="+", action="extend", type=Path, metavar="PATH",
                   help="log file(s), plain or gzip; concatenated in the order given")
    p.add_argument("--format", "-f", choices=FORMATS, help="output format (default: text)")
    p.add_argument("--output", "-o", type=Path, help="write the report here instead of stdout")
    p.add_argument("--config", type=Path, help=f"INI file with a [{CONFIG_SECTION}] section")
    p.add_argument("--min-support", type=int, help="classic Apriori minimum support count (default: 3)")
    p.add_argument("--min-hits", type=int,
                   help="co-relation minimum successful hits per group (default: 3)")
    p.add_argument("--min-confidence", help="minimum rule confidence in (0, 1] (default: 0.5)")
    p.add_argument("--sections", help="comma list of general,access,corelations,rules or all")
    p.add_argument("--page-ext", help="comma list of page extensions")
    p.add_argument("--image-ext", help="comma list of image extensions")
    p.add_argument("--download-ext", help="comma list of download extensions")
    p.add_argument("--top-n", type=int, help="keep at most N rows per table (highest hits first)")
    p.add_argument("--generated-at", metavar="ISO8601",
                   help="timestamp recorded in report metadata (default: now, UTC)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _read_config_file(path: Path) -> dict[str, str]:
    cp = configparser.ConfigParser()
    try:
        with path.open(encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise UsageError(f"bad config file {path}: {exc}") from None
    return dict(cp[CONFIG_SECTION]) if cp.has_section(CONFIG_SECTION) else {}


def _int_at_least_one(name: str, value) -> int:
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise UsageError(f"{name} must be an integer, got {value!r}") from None
    if n < 1:
        raise UsageError(f"{name} must be at least 1, got {n}")
    return n


def _confidence(value) -> Fraction:
    try:
        c = as_fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--min-confidence must be a number, got {value!r}") from None
    if not 0 < c <= 1:
        raise UsageError(f"--min-confidence must lie in (0, 1], got {value}")
    return c


def _sections(value: str) -> tuple[str, ...]:
    names = [s.strip() for s in value.split(",") if s.strip()]
    if not names:
        raise UsageError("--sections is empty")
    unknown = sorted(set(names) - set(SECTIONS) - {"all"})
    if unknown:
        raise UsageError(f"unknown section(s): {', '.join(unknown)}")
    if "all" in names:
        return SECTIONS
    return tuple(s for s in SECTIONS if s in names)


def _classifier(lists: dict[str, tuple[str, frozenset[str]]]) -> ClassifierConfig:
    kinds = list(lists)
    for i, a in enumerate(kinds):
        for b in kinds[i + 1:]:
            shared = lists[a][1] & lists[b][1]
            if shared:
                raise UsageError(f"{lists[a][0]} and {lists[b][0]} both list: {', '.join(sorted(shared))}")
    return ClassifierConfig(lists["page"][1], lists["image"][1], lists["download"][1])


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    """Build a :class:`RunConfig`; flags override the config file, which overrides defaults.

    Raises :class:`UsageError` on any invalid or conflicting setting.
    """
    ns = build_parser().parse_args(argv)
    file_opts = _read_config_file(ns.config) if ns.config else {}

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return file_opts.get(key, default)

    if not ns.input:
        raise UsageError("--input is required")
    fmt = pick(ns.format, "format", "text")
    if fmt not in FORMATS:
        raise UsageError(f"unknown format {fmt!r}")
    top_n = pick(ns.top_n, "top_n", None)

    lists = {}
    defaults = {"page": DEFAULT_CONFIG.page_extensions, "image": DEFAULT_CONFIG.image_extensions,
                "download": DEFAULT_CONFIG.download_extensions}
    for kind in ("page", "image", "download"):
        flag = getattr(ns, f"{kind}_ext")
        if flag is not None:
            lists[kind] = (f"--{kind}-ext", parse_extensions(flag))
        elif f"{kind}_extensions" in file_opts:
            lists[kind] = (f"{kind}_extensions (config)", parse_extensions(file_opts[f"{kind}_extensions"]))
        else:
            lists[kind] = (f"default {kind} extensions", defaults[kind])

    return RunConfig(
        inputs=list(ns.input),
        format=fmt,
        output=ns.output or (Path(file_opts["output"]) if "output" in file_opts else None),
        min_support=_int_at_least_one("--min-support", pick(ns.min_support, "min_support", 3)),
        min_hits=_int_at_least_one("--min-hits", pick(ns.min_hits, "min_hits", 3)),
        min_confidence=_confidence(pick(ns.min_confidence, "min_confidence", "0.5")),
        sections=_sections(pick(ns.sections, "sections", "all")),
        classifier=_classifier(lists),
        top_n=None if top_n is None else _int_at_least_one("--top-n", top_n),
        generated_at=ns.generated_at,
    )


class InputError(Exception):
    def __init__(self, path: Path, cause: OSError):
        self.path = path
        super().__init__(f"cannot read {path}: {cause.strerror or cause}")


def _read_inputs(paths: Sequence[Path]) -> Iterator[str]:
    for path in paths:
        try:
            yield from read_lines(path)
        except OSError as exc:
            raise InputError(path, exc) from exc


def _top_rows(rows: list, n: int | None) -> list:
    if n is None or len(rows) <= n:
        return rows
    keep = set(sorted(range(len(rows)), key=lambda i: (-rows[i].hits, i))[:n])
    return [r for i, r in enumerate(rows) if i in keep]


def _top_rules(rules: list, n: int | None) -> list:
    if n is None or len(rules) <= n:
        return rules
    keep = set(sorted(range(len(rules)), key=lambda i: (-rules[i].confidence, -rules[i].support, i))[:n])
    return [r for i, r in enumerate(rules) if i in keep]


def build_report(config: RunConfig) -> ReportDocument:
    records, stats = parse_log(_read_inputs(config.inputs))
    if stats.skipped:
        log.warning("skipped %d malformed line(s) of %d", stats.skipped, stats.total_lines)
    top = config.top_n
    doc = ReportDocument(metadata={
        "inputs": [str(p) for p in config.inputs],
        "thresholds": {"min_support": config.min_support, "min_hits": config.min_hits,
                       "min_confidence": float(config.min_confidence)},
        "classifier": {"page_extensions": sorted(config.classifier.page_extensions),
                       "image_extensions": sorted(config.classifier.image_extensions),
                       "download_extensions": sorted(config.classifier.download_extensions)},
        "transaction_scheme": TransactionScheme.PER_IP.value,
        "top_n": top,
        "sections": list(config.sections),
        "parse": stats.to_dict(),
        "tool_version": __version__,
        "generated_at": config.generated_at
        or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    })
    if "general" in config.sections:
        doc.general = general_stats(records, config.classifier)
        doc.per_day, doc.average_hits_per_day = per_day(records)
        doc.browsers = browser_stats(records)[:top]
        doc.errors = error_report(records)[:top]
    if "access" in config.sections:
        doc.access_ip = _top_rows(access_stats(records, KeyBy.IP), top)
        doc.access_url = _top_rows(access_stats(records, KeyBy.URL), top)
    if "corelations" in config.sections:
        tables = custom_apriori(records, config.min_hits)
        for name in TABLE_NAMES:
            setattr(tables, name, _top_rows(getattr(tables, name), top))
        doc.corelations = tables
    if "rules" in config.sections:
        transactions, dictionary = build_transactions(records, TransactionScheme.PER_IP)
        levels = apriori([t.items for t in transactions], config.min_support)
        rules = generate_rules(levels, config.min_confidence)
        doc.rules = [dictionary.decode_rule(r) for r in _top_rules(rules, top)]
    return doc


def run(config: RunConfig) -> int:
    try:
        doc = build_report(config)
    except InputError as exc:
        print(f"weblogmine: error: {exc}", file=sys.stderr)
        return 1
    text = render_document(doc, config.format)
    try:
        if config.output is None:
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            with config.output.open("w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"weblogmine: error: cannot write {config.output or 'stdout'}: {exc.strerror or exc}",
              file=sys.stderr)
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="weblogmine: %(message)s")
    try:
        config = parse_args(argv)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"weblogmine: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return exc.code if isinstance(exc.code, int) else 0
    return run(config)


if __name__ == "__main__":
    sys.exit(main())

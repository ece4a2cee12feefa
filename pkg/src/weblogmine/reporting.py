"""Text, CSV and JSON rendering of statistics and mining results."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import UsageError
from .mining import TABLE_NAMES, AssociationRule, CoRelationRow, CoRelationTables, Item
from .statistics import AccessRow, DailyRow, GeneralStats

SCHEMA_VERSION = 1
FORMATS = ("text", "csv", "json")

GENERAL_LABELS = [
    ("TOTALNO OF HITS", "total_hits"),
    ("TOTALNO OF VISITORS", "visitors"),
    ("TOTALNO OF SUCCESSFUL HITS", "successful_hits"),
    ("TOTALNO OF INCOMPLETE HITS", "incomplete_hits"),
    ("PAGE VIEWS", "page_views"),
    ("IMAGE VIEWS", "image_views"),
    ("FILE DOWNLOADS", "file_downloads"),
    ("OTHER ASSETS", "other_assets"),
]

TABLE_TITLES = {
    "access_ip": ("POPULAR VISITS", ["IPADDRESS"]),
    "access_url": ("POPULAR VISITS BY URL", ["URL"]),
    "ip_url": ("POPULAR URL", None),
    "url_path": ("CO-RELATION URL->PATH", None),
    "ip_path": ("CO-RELATION IPADD->PATH", None),
    "ip_url_path": ("CO-RELATION IPADD->URL->PATH", None),
}


def _check_format(fmt: str) -> None:
    if fmt not in FORMATS:
        raise UsageError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")


def format_ratio(value) -> str:
    """Exact ratio to at most 8 significant digits, half-even, zeros trimmed.

    >>> format_ratio(Fraction(13, 20)), format_ratio(Fraction(27, 31)), format_ratio(1)
    ('0.65', '0.87096774', '1')
    """
    value = Fraction(value)
    if value == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = 8
        ctx.rounding = ROUND_HALF_EVEN
        d = Decimal(value.numerator) / Decimal(value.denominator)
    text = format(d, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


# -- dict conversion -------------------------------------------------------

def _access_row_dict(row: AccessRow) -> dict:
    return {"key": row.key, "hits": row.hits, "incomplete": row.incomplete,
            "success_ratio": float(row.success_ratio)}


def _corelation_row_dict(row: CoRelationRow) -> dict:
    out = {name: getattr(row, name) for name in ("ip", "url", "path") if getattr(row, name) is not None}
    out.update(hits=row.hits, incomplete=row.incomplete, success_ratio=float(row.success_ratio))
    return out


def _rule_dict(rule: AssociationRule) -> dict:
    return {"antecedent": [str(i) for i in rule.antecedent],
            "consequent": [str(i) for i in rule.consequent],
            "support": rule.support,
            "antecedent_support": rule.antecedent_support,
            "confidence": float(rule.confidence)}


def _row_dict(row) -> dict:
    return _access_row_dict(row) if isinstance(row, AccessRow) else _corelation_row_dict(row)


def _per_day_dict(rows: Sequence[DailyRow], average: int) -> dict:
    return {"rows": [asdict(r) for r in rows], "average_hits_per_day": average}


def _general_sections(stats, per_day, browsers, errors) -> dict:
    rows, average = per_day
    return {
        "general": asdict(stats),
        "per_day": _per_day_dict(rows, average),
        "browsers": [{"browser": b, "count": n} for b, n in browsers],
        "errors": [{"label": label, "count": n} for label, n in errors],
    }


def _item_from_text(text: str):
    try:
        return Item.parse(text)
    except (KeyError, ValueError):
        return int(text) if text.lstrip("-").isdigit() else text


def _is_flat(value) -> bool:
    if type(value) is not dict:
        return False
    for v in value.values():
        t = type(v)
        if t is dict or (t is list and v and type(v[0]) in (dict, list)):
            return False
    return True


def dump_json(value, level: int = 0) -> str:
    """Indented JSON in which flat objects (table rows) stay on one line.

    Encoding rows with the C encoder keeps large reports fast.
    """
    if not isinstance(value, (dict, list)) or not value or _is_flat(value):
        return json.dumps(value, ensure_ascii=False)
    pad = "  " * (level + 1)
    if isinstance(value, dict):
        body = ",\n".join(f"{pad}{json.dumps(k)}: {dump_json(v, level + 1)}" for k, v in value.items())
        return "{\n" + body + "\n" + "  " * level + "}"
    body = ",\n".join(pad + dump_json(v, level + 1) for v in value)
    return "[\n" + body + "\n" + "  " * level + "]"


# -- text / csv primitives -------------------------------------------------

def _text_block(title: str, rows: Iterable[Sequence]) -> str:
    lines = [title] + ["\t".join(str(c) for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def _csv_block(title: str, rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(f"# {title}\r\n")
    csv.writer(buf).writerows(rows)
    return buf.getvalue()


def _block(fmt: str, title: str, rows: Iterable[Sequence]) -> str:
    return _text_block(title, rows) if fmt == "text" else _csv_block(title, rows)


def _key_cells(row) -> list[str]:
    return [row.key] if isinstance(row, AccessRow) else list(row.key)


def _table_rows(rows: Sequence, key_headers: Sequence[str] | None) -> list[list[str]]:
    if key_headers is None:
        if rows and isinstance(rows[0], CoRelationRow):
            names = {"ip": "IPADDRESS", "url": "URL", "path": "PATH"}
            key_headers = [names[n] for n in ("ip", "url", "path") if getattr(rows[0], n) is not None]
        else:
            key_headers = ["KEY"]
    # single-key tables are access statistics, which label the column "INCOMPLETE HITS"
    incomplete = "INCOMPLETE HITS" if len(key_headers) == 1 else "INCOMPLETE"
    header = list(key_headers) + ["HITS", incomplete, "% OF TOTAL"]
    body = [_key_cells(r) + [str(r.hits), str(r.incomplete), format_ratio(r.success_ratio)]
            for r in rows]
    return [header] + body


# -- public renderers ------------------------------------------------------

def render_general(stats: GeneralStats, per_day: tuple[Sequence[DailyRow], int],
                   browsers: Sequence[tuple[str, int]], errors: Sequence[tuple[str, int]],
                   fmt: str = "text") -> str:
    _check_format(fmt)
    if fmt == "json":
        return dump_json(_general_sections(stats, per_day, browsers, errors)) + "\n"
    rows, average = per_day
    day_rows = [["DAY", "HITS", "SUCCESSFUL", "INCOMPLETE"]] + [
        [r.date, r.hits, r.successful, r.incomplete] for r in rows]
    general = [[label, getattr(stats, name)] for label, name in GENERAL_LABELS]
    browser_rows = [["BROWSER", "COUNT"]] + [list(b) for b in browsers]
    error_rows = [list(e) for e in errors]
    if fmt == "text":
        blocks = [
            _text_block("GENERAL STATISTICS", general),
            _text_block("PER DAY ANALYSIS", day_rows + [["AVERAGE HITS PER DAY", average]]),
            _text_block("POPULAR BROWSERS", browser_rows),
            _text_block("ERROR REPORTS FOR PAGE ACCESS", error_rows),
        ]
        return "\n".join(blocks)
    return "".join([
        _csv_block("GENERAL STATISTICS", [["METRIC", "VALUE"]] + general),
        _csv_block("PER DAY ANALYSIS", day_rows),
        _csv_block("AVERAGE HITS PER DAY", [["AVERAGE HITS PER DAY"], [average]]),
        _csv_block("POPULAR BROWSERS", browser_rows),
        _csv_block("ERROR REPORTS FOR PAGE ACCESS", [["ERROR", "COUNT"]] + error_rows),
    ])


def render_table(rows: Sequence[AccessRow] | Sequence[CoRelationRow], title: str,
                 fmt: str = "text", key_headers: Sequence[str] | None = None) -> str:
    """Render access or co-relation rows under ``title``.

    ``key_headers`` names the key column(s); co-relation rows infer theirs
    from which of ip/url/path they carry.
    """
    _check_format(fmt)
    if fmt == "json":
        return dump_json({"title": title, "rows": [_row_dict(r) for r in rows]}) + "\n"
    return _block(fmt, title, _table_rows(list(rows), key_headers))


def _rule_side(items) -> str:
    return "{" + ", ".join(str(i) for i in items) + "}"


def render_rules(rules: Sequence[AssociationRule], fmt: str = "text") -> str:
    _check_format(fmt)
    if fmt == "json":
        return dump_json([_rule_dict(r) for r in rules]) + "\n"
    if fmt == "csv":
        if not rules:
            return ""
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["ANTECEDENT", "CONSEQUENT", "SUPPORT", "CONFIDENCE"])
        for r in rules:
            writer.writerow([" ".join(str(i) for i in r.antecedent),
                             " ".join(str(i) for i in r.consequent),
                             r.support, format_ratio(r.confidence)])
        return buf.getvalue()
    return "".join(
        f"{_rule_side(r.antecedent)} => {_rule_side(r.consequent)}  "
        f"support={r.support} confidence={format_ratio(r.confidence)}\n"
        for r in rules)


# -- whole document --------------------------------------------------------

@dataclass
class ReportDocument:
    """Everything one run produced. Sections left as ``None`` were not requested."""

    metadata: dict = field(default_factory=dict)
    general: GeneralStats | None = None
    per_day: list[DailyRow] | None = None
    average_hits_per_day: int | None = None
    browsers: list[tuple[str, int]] | None = None
    errors: list[tuple[str, int]] | None = None
    access_ip: list[AccessRow] | None = None
    access_url: list[AccessRow] | None = None
    corelations: CoRelationTables | None = None
    rules: list[AssociationRule] | None = None

    def to_dict(self) -> dict:
        out: dict = {"schema_version": SCHEMA_VERSION}
        if self.general is not None:
            out.update(_general_sections(self.general, (self.per_day or [], self.average_hits_per_day or 0),
                                         self.browsers or [], self.errors or []))
        if self.access_ip is not None:
            out["access_ip"] = [_access_row_dict(r) for r in self.access_ip]
        if self.access_url is not None:
            out["access_url"] = [_access_row_dict(r) for r in self.access_url]
        if self.corelations is not None:
            out["corelations"] = {name: [_corelation_row_dict(r) for r in rows]
                                  for name, rows in self.corelations.tables().items()}
        if self.rules is not None:
            out["rules"] = [_rule_dict(r) for r in self.rules]
        out["metadata"] = self.metadata
        return out

    def to_json(self) -> str:
        return dump_json(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ReportDocument":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {data.get('schema_version')!r}")
        doc = cls(metadata=data.get("metadata", {}))
        if "general" in data:
            doc.general = GeneralStats(**data["general"])
            doc.per_day = [DailyRow(**r) for r in data["per_day"]["rows"]]
            doc.average_hits_per_day = data["per_day"]["average_hits_per_day"]
            doc.browsers = [(b["browser"], b["count"]) for b in data["browsers"]]
            doc.errors = [(e["label"], e["count"]) for e in data["errors"]]
        for name in ("access_ip", "access_url"):
            if name in data:
                setattr(doc, name, [AccessRow(r["key"], r["hits"], r["incomplete"]) for r in data[name]])
        if "corelations" in data:
            doc.corelations = CoRelationTables(**{
                name: [CoRelationRow(r.get("ip"), r.get("url"), r.get("path"), r["hits"], r["incomplete"])
                       for r in data["corelations"][name]]
                for name in TABLE_NAMES})
        if "rules" in data:
            doc.rules = [AssociationRule(tuple(_item_from_text(i) for i in r["antecedent"]),
                                         tuple(_item_from_text(i) for i in r["consequent"]),
                                         r["support"], r["antecedent_support"])
                         for r in data["rules"]]
        return doc

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text))


def render_document(doc: ReportDocument, fmt: str = "text") -> str:
    _check_format(fmt)
    if fmt == "json":
        return doc.to_json()
    parts = []
    if doc.general is not None:
        parts.append(render_general(doc.general, (doc.per_day or [], doc.average_hits_per_day or 0),
                                    doc.browsers or [], doc.errors or [], fmt))
    for name in ("access_ip", "access_url"):
        rows = getattr(doc, name)
        if rows is not None:
            title, headers = TABLE_TITLES[name]
            parts.append(render_table(rows, title, fmt, headers))
    if doc.corelations is not None:
        for name, rows in doc.corelations.tables().items():
            title, _ = TABLE_TITLES[name]
            headers = [{"ip": "IPADDRESS", "url": "URL", "path": "PATH"}[p] for p in name.split("_")]
            parts.append(render_table(rows, title, fmt, headers))
    if doc.rules is not None:
        body = render_rules(doc.rules, fmt)
        parts.append(f"ASSOCIATION RULES\n{body}" if fmt == "text" else f"# ASSOCIATION RULES\r\n{body}")
    return ("\n" if fmt == "text" else "").join(parts)


_COUNT = {"type": "integer", "minimum": 0}
_RATIO = {"type": "number", "minimum": 0, "maximum": 1}
_ACCESS_ROW = {
    "type": "object",
    "required": ["key", "hits", "incomplete", "success_ratio"],
    "properties": {"key": {"type": "string"}, "hits": {"type": "integer", "minimum": 1},
                   "incomplete": _COUNT, "success_ratio": _RATIO},
    "additionalProperties": False,
}
_CORELATION_ROW = {
    "type": "object",
    "required": ["hits", "incomplete", "success_ratio"],
    "properties": {"ip": {"type": "string"}, "url": {"type": "string"}, "path": {"type": "string"},
                   "hits": {"type": "integer", "minimum": 1}, "incomplete": _COUNT,
                   "success_ratio": _RATIO},
    "additionalProperties": False,
}
_COUNTED = {"type": "array", "items": {"type": "object", "required": ["count"]}}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "metadata"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "general": {
            "type": "object",
            "required": [name for _, name in GENERAL_LABELS],
            "properties": {name: _COUNT for _, name in GENERAL_LABELS},
        },
        "per_day": {
            "type": "object",
            "required": ["rows", "average_hits_per_day"],
            "properties": {
                "rows": {"type": "array", "items": {
                    "type": "object",
                    "required": ["date", "hits", "successful", "incomplete"],
                    "properties": {"date": {"type": "string", "pattern": r"^\d{2}/[A-Z][a-z]{2}/\d{4}$"},
                                   "hits": _COUNT, "successful": _COUNT, "incomplete": _COUNT}}},
                "average_hits_per_day": _COUNT,
            },
        },
        "browsers": _COUNTED,
        "errors": _COUNTED,
        "access_ip": {"type": "array", "items": _ACCESS_ROW},
        "access_url": {"type": "array", "items": _ACCESS_ROW},
        "corelations": {
            "type": "object",
            "required": list(TABLE_NAMES),
            "properties": {name: {"type": "array", "items": _CORELATION_ROW} for name in TABLE_NAMES},
        },
        "rules": {"type": "array", "items": {
            "type": "object",
            "required": ["antecedent", "consequent", "support", "antecedent_support", "confidence"],
            "properties": {"antecedent": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                           "consequent": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                           "support": {"type": "integer", "minimum": 1},
                           "antecedent_support": {"type": "integer", "minimum": 1},
                           "confidence": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}}}},
        "metadata": {
            "type": "object",
            "required": ["inputs", "thresholds", "tool_version", "generated_at", "parse", "sections"],
        },
    },
}

"""Frequent itemset mining over access logs.

Two miners live here:

* :func:`apriori` is the textbook level-wise algorithm over integer-encoded
  transactions (join + prune in :func:`apriori_gen`, then a counting scan).
* :func:`custom_apriori` groups records directly by ip, url and path and
  grows co-relations level by level (singletons, pairs, the ip/url/path
  triple), keeping only groups with enough successful co-occurrences.

:func:`generate_rules` derives single-consequent association rules from the
classic miner's supports.
"""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, groupby
from operator import itemgetter
from math import comb
from typing import Collection, Iterable, Mapping, NamedTuple, Sequence

from .classification import is_successful
from .errors import DomainError, InternalError
from .log_parser import LogRecord, extract_path
from .statistics import success_ratio

Itemset = tuple  # strictly increasing tuple of item ids (or Items)


class Attribute(enum.IntEnum):
    IP = 0
    URL = 1
    PATH = 2

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {a: a.name.lower() for a in Attribute}


@dataclass(frozen=True, order=True)
class Item:
    attribute: Attribute
    value: str

    def __post_init__(self):
        if not self.value:
            raise DomainError("item value must be non-empty")

    def __str__(self):
        return f"{_LABELS[self.attribute]}:{self.value}"

    @classmethod
    def parse(cls, text: str) -> "Item":
        label, _, value = text.partition(":")
        return cls(Attribute[label.upper()], value)


class ItemDictionary:
    """Bijection between :class:`Item` values and dense integer ids.

    Ids are assigned in item order, so sorting ids sorts the items.
    """

    def __init__(self, items: Iterable[Item] = ()):
        self._items = sorted(set(items))
        self._ids = {item: i for i, item in enumerate(self._items)}

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def id_of(self, item: Item) -> int:
        return self._ids[item]

    def item_of(self, item_id: int) -> Item:
        return self._items[item_id]

    def decode(self, itemset: Iterable[int]) -> tuple[Item, ...]:
        return tuple(self._items[i] for i in itemset)

    def decode_rule(self, rule: "AssociationRule") -> "AssociationRule":
        return AssociationRule(self.decode(rule.antecedent), self.decode(rule.consequent),
                               rule.support, rule.antecedent_support)


class Transaction(NamedTuple):
    id: int
    items: tuple[int, ...]


class ItemsetSupport(NamedTuple):
    itemset: tuple[int, ...]
    support: int


class TransactionScheme(str, enum.Enum):
    PER_IP = "per_ip"
    # One basket per successful request holding its ip, url and path items.
    PER_REQUEST = "per_request"


def _is_successful(record: LogRecord) -> bool:
    return is_successful(record.status)


def build_transactions(
    records: Iterable[LogRecord],
    scheme: TransactionScheme | str = TransactionScheme.PER_IP,
) -> tuple[list[Transaction], ItemDictionary]:
    """Encode records as integer baskets.

    ``per_ip`` yields one basket per ip holding the urls it fetched
    successfully; ips with no successful request produce no basket.
    """
    scheme = TransactionScheme(scheme)
    baskets: list[set[Item]]
    if scheme is TransactionScheme.PER_IP:
        by_ip: dict[str, set[Item]] = defaultdict(set)
        for r in records:
            if _is_successful(r):
                by_ip[r.ip].add(Item(Attribute.URL, r.url))
        baskets = [by_ip[ip] for ip in sorted(by_ip)]
    else:
        baskets = [
            {Item(Attribute.IP, r.ip), Item(Attribute.URL, r.url),
             Item(Attribute.PATH, extract_path(r.url))}
            for r in records if _is_successful(r)
        ]
    dictionary = ItemDictionary(item for basket in baskets for item in basket)
    transactions = [
        Transaction(tid, tuple(sorted(dictionary.id_of(item) for item in basket)))
        for tid, basket in enumerate(baskets)
    ]
    return transactions, dictionary


def has_infrequent_subset(candidate: Sequence, frequent_prev: Collection) -> bool:
    """True when some (k-1)-subset of ``candidate`` is missing from ``frequent_prev``.

    The empty set is always frequent, so 1-itemsets never have one.
    """
    if len(candidate) <= 1:
        return False
    candidate = tuple(candidate)
    return any(candidate[:i] + candidate[i + 1:] not in frequent_prev
               for i in range(len(candidate)))


def apriori_gen(frequent_prev: Iterable[Sequence]) -> list[tuple]:
    """Candidate k-itemsets from the frequent (k-1)-itemsets.

    Join: two itemsets agreeing on all but their last item are merged.
    Prune: a merged candidate with an infrequent (k-1)-subset is dropped.
    Output is sorted and duplicate-free.
    """
    prev = sorted({tuple(s) for s in frequent_prev})
    if not prev:
        return []
    lengths = {len(s) for s in prev}
    if len(lengths) != 1 or 0 in lengths:
        raise DomainError(f"itemsets of mixed or zero length: {sorted(lengths)}")
    for s in prev:
        if any(a >= b for a, b in zip(s, s[1:])):
            raise DomainError(f"itemset {s} is not strictly sorted")
    prev_set = set(prev)
    out = []
    for prefix, group in groupby(prev, key=lambda s: s[:-1]):
        tails = [s[-1] for s in group]
        for i, a in enumerate(tails):
            for b in tails[i + 1:]:
                candidate = prefix + (a, b)
                if not has_infrequent_subset(candidate, prev_set):
                    out.append(candidate)
    return out


def _count_candidates(baskets: list[tuple[int, ...]], candidates: list[tuple], k: int) -> Counter:
    wanted = set(candidates)
    relevant = {i for c in candidates for i in c}
    counts: Counter = Counter()
    for basket in baskets:
        items = [i for i in basket if i in relevant]
        if len(items) < k:
            continue
        if comb(len(items), k) <= len(wanted):
            for c in combinations(items, k):
                if c in wanted:
                    counts[c] += 1
        else:
            present = set(items)
            for c in candidates:
                if present.issuperset(c):
                    counts[c] += 1
    return counts


def apriori(
    transactions: Iterable[Iterable[int]],
    min_support: int,
    *,
    max_length: int | None = None,
) -> list[list[ItemsetSupport]]:
    """Level-wise frequent itemset mining.

    Returns one list per level (``result[0]`` holds the 1-itemsets), each
    sorted by itemset. Supports are exact transaction counts.
    """
    if min_support < 1:
        raise DomainError("min_support must be at least 1")
    baskets = [b for b in (tuple(sorted(set(t))) for t in transactions) if b]
    item_counts = Counter(i for b in baskets for i in b)
    level = [ItemsetSupport((i,), c) for i, c in sorted(item_counts.items()) if c >= min_support]
    levels: list[list[ItemsetSupport]] = []
    k = 1
    while level:
        levels.append(level)
        if max_length is not None and k >= max_length:
            break
        k += 1
        candidates = apriori_gen(s.itemset for s in level)
        counts = _count_candidates(baskets, candidates, k)
        level = [ItemsetSupport(c, counts[c]) for c in candidates if counts[c] >= min_support]
    return levels


def support_map(frequent) -> dict[tuple, int]:
    """Flatten levels (or a flat list) of :class:`ItemsetSupport` into a dict."""
    if isinstance(frequent, Mapping):
        return {tuple(k): v for k, v in frequent.items()}
    out = {}
    for entry in frequent:
        group = [entry] if isinstance(entry, ItemsetSupport) else entry
        for s in group:
            out[tuple(s.itemset)] = s.support
    return out


class AssociationRule(NamedTuple):
    antecedent: tuple
    consequent: tuple
    support: int
    antecedent_support: int

    @property
    def confidence(self) -> Fraction:
        return Fraction(self.support, self.antecedent_support)


def as_fraction(value) -> Fraction:
    # Decimal text of a float, so 0.8 means 4/5 rather than its binary neighbour.
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def candidate_rules(frequent) -> list[AssociationRule]:
    """Every rule ``L - {I} => {I}`` over frequent itemsets of size >= 2, unfiltered."""
    supports = support_map(frequent)
    rules = []
    for itemset, supp in supports.items():
        if len(itemset) < 2:
            continue
        for i, item in enumerate(itemset):
            antecedent = itemset[:i] + itemset[i + 1:]
            if antecedent not in supports:
                raise InternalError(f"no support recorded for subset {antecedent} of {itemset}")
            rules.append(AssociationRule(antecedent, (item,), supp, supports[antecedent]))
    # tuple order is (antecedent, consequent, ...), and that pair is unique
    rules.sort()
    return rules


def generate_rules(frequent, min_confidence=0.5) -> list[AssociationRule]:
    threshold = as_fraction(min_confidence)
    if not 0 < threshold <= 1:
        raise DomainError("min_confidence must lie in (0, 1]")
    num, den = threshold.numerator, threshold.denominator
    # support/antecedent >= num/den, in integers
    return [r for r in candidate_rules(frequent) if r.support * den >= num * r.antecedent_support]


@dataclass(frozen=True)
class CoRelationRow:
    ip: str | None
    url: str | None
    path: str | None
    hits: int
    incomplete: int

    @property
    def success_ratio(self) -> Fraction:
        return success_ratio(self.hits, self.incomplete)

    @property
    def key(self) -> tuple[str, ...]:
        return tuple(v for v in (self.ip, self.url, self.path) if v is not None)


TABLE_NAMES = ("ip_url", "url_path", "ip_path", "ip_url_path")


@dataclass
class CoRelationTables:
    ip_url: list[CoRelationRow] = field(default_factory=list)
    url_path: list[CoRelationRow] = field(default_factory=list)
    ip_path: list[CoRelationRow] = field(default_factory=list)
    ip_url_path: list[CoRelationRow] = field(default_factory=list)
    # Level-1 survivors keyed by attribute label; not part of the report.
    singletons: dict[str, list[CoRelationRow]] = field(default_factory=dict, compare=False)

    def tables(self) -> dict[str, list[CoRelationRow]]:
        return {name: getattr(self, name) for name in TABLE_NAMES}


_PAIRS = {"ip_url": (Attribute.IP, Attribute.URL),
          "url_path": (Attribute.URL, Attribute.PATH),
          "ip_path": (Attribute.IP, Attribute.PATH)}


def _row(attrs: Sequence[Attribute], values: Sequence[str], hits: int, incomplete: int) -> CoRelationRow:
    slots: list[str | None] = [None, None, None]
    for a, v in zip(attrs, values):
        slots[a] = v
    return CoRelationRow(slots[0], slots[1], slots[2], hits, incomplete)


def _tally(rows, attrs, admit=None) -> dict[tuple, list[int]]:
    tally: dict[tuple, list[int]] = {}
    # itemgetter over one index returns a scalar, hence the trailing 3
    key_of = itemgetter(*attrs, 3)
    for row in rows:
        *key, failed = key_of(row)
        key = tuple(key)
        if admit is None or admit(key):
            slot = tally.get(key)
            if slot is None:
                tally[key] = [1, failed]
            else:
                slot[0] += 1
                slot[1] += failed
    return tally


def custom_apriori(records: Iterable[LogRecord], min_hits: int = 3) -> CoRelationTables:
    """Grouped Apriori over (ip, url, path).

    Level 1 keeps attribute values with at least ``min_hits`` total hits.
    Level 2 joins surviving values that co-occur in a record and keeps a
    pair only if at least ``min_hits`` of its co-occurrences succeeded;
    failed requests still count towards the pair's hits and incomplete
    columns. Level 3 builds ip/url/path triples whose three pairs all
    survived, under the same rule.
    """
    if min_hits < 1:
        raise DomainError("min_hits must be at least 1")
    # (ip, url, path, incomplete_flag)
    rows = [(r.ip, r.url, extract_path(r.url), 0 if _is_successful(r) else 1) for r in records]

    out = CoRelationTables()
    survivors: dict[Attribute, set[str]] = {}
    for attr in Attribute:
        tally = _tally(rows, (attr,))
        kept = {k: v for k, v in tally.items() if v[0] >= min_hits}
        survivors[attr] = {k[0] for k in kept}
        out.singletons[attr.label] = [_row((attr,), k, h, inc) for k, (h, inc) in sorted(kept.items())]

    kept_pairs: dict[str, set[tuple]] = {}
    for name, (a, b) in _PAIRS.items():
        tally = _tally(rows, (a, b),
                       lambda key, a=a, b=b: key[0] in survivors[a] and key[1] in survivors[b])
        kept = {k: v for k, v in tally.items() if v[0] - v[1] >= min_hits}
        kept_pairs[name] = set(kept)
        setattr(out, name, [_row((a, b), k, h, inc) for k, (h, inc) in sorted(kept.items())])

    def triple_admitted(key):
        ip, url, path = key
        return ((ip, url) in kept_pairs["ip_url"] and (url, path) in kept_pairs["url_path"]
                and (ip, path) in kept_pairs["ip_path"])

    triples = _tally(rows, (Attribute.IP, Attribute.URL, Attribute.PATH), triple_admitted)
    out.ip_url_path = [_row(tuple(Attribute), k, h, inc)
                       for k, (h, inc) in sorted(triples.items()) if h - inc >= min_hits]
    return out

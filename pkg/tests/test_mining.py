import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logfixtures import rec
from oracles import brute_force_frequent, direct_support, literal_ip_url, naive_frequent
from weblogmine.errors import DomainError, InternalError
from weblogmine.log_parser import extract_path
from weblogmine.mining import (
    AssociationRule,
    Attribute,
    Item,
    ItemDictionary,
    ItemsetSupport,
    apriori,
    apriori_gen,
    build_transactions,
    candidate_rules,
    custom_apriori,
    generate_rules,
    has_infrequent_subset,
    support_map,
)
from weblogmine.synth import generate_records

# Six baskets reproducing every support printed in the textbook column of
# the algorithm comparison table.
TEXTBOOK_DB = [{1, 2, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}, {2, 3, 4}, {2, 4}, {2, 3}]


def random_db(seed):
    rng = random.Random(seed)
    n_items = rng.randint(1, 15)
    n_tx = rng.randint(0, 50)
    db = [set(rng.sample(range(n_items), rng.randint(1, n_items))) for _ in range(n_tx)]
    return db, rng.randint(1, 5)


# -- oracle self-checks ------------------------------------------------------

def test_oracle_agrees_with_definition_on_small_dbs():
    for seed in range(30):
        rng = random.Random(seed)
        db = [set(rng.sample(range(6), rng.randint(1, 6))) for _ in range(rng.randint(0, 12))]
        ms = rng.randint(1, 3)
        bf = brute_force_frequent(db, ms)
        assert bf == naive_frequent(db, ms)
        assert all(direct_support(db, s) == n for s, n in bf.items())


# -- Item / dictionary -------------------------------------------------------

def test_items_are_ordered_by_attribute_then_value():
    items = [Item(Attribute.PATH, "/"), Item(Attribute.URL, "/b"), Item(Attribute.IP, "z"),
             Item(Attribute.URL, "/a")]
    assert [str(i) for i in sorted(items)] == ["ip:z", "url:/a", "url:/b", "path:/"]
    assert Item.parse("url:/a:b") == Item(Attribute.URL, "/a:b")
    with pytest.raises(DomainError):
        Item(Attribute.IP, "")


def test_item_dictionary_is_a_bijection():
    items = [Item(Attribute.URL, f"/{c}") for c in "dcba"] * 2
    d = ItemDictionary(items)
    assert len(d) == 4
    for i in range(4):
        assert d.id_of(d.item_of(i)) == i
    assert [d.item_of(i).value for i in range(4)] == ["/a", "/b", "/c", "/d"]


# -- build_transactions -------------------------------------------------------

def test_build_transactions_dedupes_urls():
    txs, d = build_transactions([rec("A", "/x"), rec("A", "/x"), rec("A", "/y")])
    assert len(txs) == 1
    assert {str(i) for i in d.decode(txs[0].items)} == {"url:/x", "url:/y"}


def test_build_transactions_skips_failed_requests():
    txs, d = build_transactions([rec("A", "/x", 404), rec("B", "/y", 500)])
    assert txs == [] and len(d) == 0


def test_build_transactions_fixture_of_five_ips():
    visits = {
        "1.1.1.1": ["/", "/a.html", "/a.html"],
        "2.2.2.2": ["/b.gif"],
        "3.3.3.3": ["/", "/b.gif", "/c.pdf"],
        "4.4.4.4": ["/c.pdf"],
        "5.5.5.5": ["/a.html", "/zz"],
    }
    records = [rec(ip, url) for ip, urls in visits.items() for url in urls]
    records += [rec("5.5.5.5", "/only-failed", 404), rec("6.6.6.6", "/", 404)]
    txs, d = build_transactions(records)
    got = [{d.item_of(i).value for i in t.items} for t in txs]
    assert got == [set(v) for v in visits.values()]


def test_per_request_scheme():
    txs, d = build_transactions([rec("A", "/d/f.gif"), rec("A", "/x", 404)], "per_request")
    assert len(txs) == 1
    assert [str(i) for i in d.decode(txs[0].items)] == ["ip:A", "url:/d/f.gif", "path:/d/"]


# -- apriori_gen / has_infrequent_subset --------------------------------------

def test_apriori_gen_pairs_from_singletons():
    assert apriori_gen([(1,), (2,), (3,), (4,)]) == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]


def test_apriori_gen_join_and_prune():
    L2 = [(1, 2), (1, 4), (2, 4), (2, 3), (3, 4)]
    c3 = apriori_gen(L2)
    assert c3 == [(1, 2, 4), (2, 3, 4)]
    assert (1, 2, 3) not in c3


def test_apriori_gen_prunes_joined_candidate():
    # {1,2} and {1,3} join to {1,2,3}, but {2,3} is missing
    assert apriori_gen([(1, 2), (1, 3)]) == []


def test_apriori_gen_edge_cases():
    assert apriori_gen([]) == []
    with pytest.raises(DomainError):
        apriori_gen([(1,), (1, 2)])
    with pytest.raises(DomainError):
        apriori_gen([(2, 1)])


def test_has_infrequent_subset():
    L2 = {(1, 2), (1, 4), (2, 4)}
    assert has_infrequent_subset((1, 2, 4), L2) is False
    assert has_infrequent_subset((1, 2, 3), L2) is True
    assert has_infrequent_subset((7,), set()) is False


def _brute_gen(prev, k):
    items = sorted({i for s in prev for i in s})
    from itertools import combinations
    prev = set(prev)
    return [c for c in combinations(items, k)
            if all(c[:i] + c[i + 1:] in prev for i in range(k))]


@given(st.sets(st.frozensets(st.integers(0, 7), min_size=2, max_size=2), max_size=20))
def test_apriori_gen_matches_subset_oracle(pairs):
    prev = sorted(tuple(sorted(p)) for p in pairs)
    assert apriori_gen(prev) == _brute_gen(prev, 3)


# -- apriori --------------------------------------------------------------------

def test_apriori_textbook_database():
    levels = apriori(TEXTBOOK_DB, 3)
    assert levels[0] == [ItemsetSupport((1,), 3), ItemsetSupport((2,), 6),
                         ItemsetSupport((3,), 4), ItemsetSupport((4,), 5)]
    L2 = dict(levels[1])
    assert L2[(1, 2)] == 3 and L2[(1, 4)] == 3
    assert (1, 3) not in L2
    assert direct_support(TEXTBOOK_DB, (1, 3)) == 2
    assert levels[2] == [ItemsetSupport((1, 2, 4), 3), ItemsetSupport((2, 3, 4), 3)]
    assert len(levels) == 3
    assert support_map(levels) == brute_force_frequent(TEXTBOOK_DB, 3)


def test_apriori_empty_and_domain():
    assert apriori([], 1) == []
    assert apriori([[], []], 1) == []
    with pytest.raises(DomainError):
        apriori(TEXTBOOK_DB, 0)


def test_apriori_min_support_one_is_everything_observed():
    for seed in range(10):
        db, _ = random_db(seed)
        assert support_map(apriori(db, 1)) == brute_force_frequent(db, 1)


def test_apriori_max_length():
    levels = apriori(TEXTBOOK_DB, 3, max_length=2)
    assert len(levels) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_apriori_matches_oracle_and_closure(seed):
    db, ms = random_db(seed)
    found = support_map(apriori(db, ms))
    assert found == brute_force_frequent(db, ms)
    for itemset, supp in found.items():
        for i in range(len(itemset)):
            sub = itemset[:i] + itemset[i + 1:]
            if sub:
                assert found[sub] >= supp


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_raising_min_support_never_adds(seed):
    db, ms = random_db(seed)
    lower = support_map(apriori(db, ms))
    higher = support_map(apriori(db, ms + 1))
    assert higher.items() <= lower.items()


# -- rules ------------------------------------------------------------------------

def test_rules_from_textbook_database():
    levels = apriori(TEXTBOOK_DB, 3)
    rules = {(r.antecedent, r.consequent): r for r in generate_rules(levels, 0.8)}
    assert rules[((1, 2), (4,))].confidence == 1
    assert rules[((1, 2), (4,))].support == 3
    assert ((2,), (3,)) not in rules
    every = {(r.antecedent, r.consequent): r for r in candidate_rules(levels)}
    assert every[((2,), (3,))].confidence == Fraction(4, 6)


def test_rule_at_confidence_one_boundary():
    rules = generate_rules({(1,): 4, (2,): 5, (1, 2): 4}, 1.0)
    assert rules == [AssociationRule((1,), (2,), 4, 4)]
    assert rules[0].confidence == 1


def test_float_threshold_uses_decimal_value():
    supports = {(1,): 5, (2,): 9, (1, 2): 4}
    assert [r.antecedent for r in generate_rules(supports, 0.8)] == [(1,)]


def test_rules_require_closure():
    with pytest.raises(InternalError):
        generate_rules({(1, 2): 3, (1,): 3}, 0.5)


@pytest.mark.parametrize("bad", [0, -0.1, 1.5])
def test_rules_confidence_domain(bad):
    with pytest.raises(DomainError):
        generate_rules({(1,): 1}, bad)


def test_rules_sorted_and_single_consequent():
    rules = candidate_rules(apriori(TEXTBOOK_DB, 2))
    keys = [(r.antecedent, r.consequent) for r in rules]
    assert keys == sorted(keys)
    assert all(len(r.consequent) == 1 and not set(r.antecedent) & set(r.consequent) for r in rules)


# -- custom apriori -------------------------------------------------------------

def test_custom_apriori_published_rows():
    ip = "119.235.49.2"
    records = ([rec(ip, "/")] * 6 + [rec(ip, "/", 404)] * 5
               + [rec(ip, "/index_files/best.jpg")] * 5 + [rec(ip, "/index_files/best.jpg", 404)] * 7)
    tables = custom_apriori(records, 3)
    rows = {r.key: r for r in tables.ip_url}
    assert (rows[(ip, "/")].hits, rows[(ip, "/")].incomplete) == (11, 5)
    assert abs(float(rows[(ip, "/")].success_ratio) - 0.54545456) < 1e-6
    best = rows[(ip, "/index_files/best.jpg")]
    assert (best.hits, best.incomplete) == (12, 7)
    assert abs(float(best.success_ratio) - 0.41666666) < 1e-6


def test_custom_apriori_single_record_closure():
    t = custom_apriori([rec("A", "/d/f.gif")], 1)
    assert [(r.ip, r.url, r.path, r.hits, r.incomplete) for r in t.ip_url] == [("A", "/d/f.gif", None, 1, 0)]
    assert [(r.url, r.path) for r in t.url_path] == [("/d/f.gif", "/d/")]
    assert [(r.ip, r.path) for r in t.ip_path] == [("A", "/d/")]
    assert [r.key + (r.hits, r.incomplete) for r in t.ip_url_path] == [("A", "/d/f.gif", "/d/", 1, 0)]
    assert all(r.success_ratio == 1 for rows in t.tables().values() for r in rows)


def test_custom_apriori_empty_and_domain():
    t = custom_apriori([], 3)
    assert all(rows == [] for rows in t.tables().values())
    with pytest.raises(DomainError):
        custom_apriori([], 0)


def test_custom_apriori_prunes_all_failed_groups():
    records = [rec("A", "/x", 404)] * 10 + [rec("A", "/y")] * 3
    t = custom_apriori(records, 3)
    assert [r.key for r in t.ip_url] == [("A", "/y")]


def test_custom_apriori_matches_literal_pseudocode_walk():
    records = generate_records(800, seed=21, visitors=25, sections=4, files_per_section=5)
    successful = literal_ip_url(records)
    for min_hits in (1, 2, 3, 5):
        t = custom_apriori(records, min_hits)
        assert {r.key: r.hits - r.incomplete for r in t.ip_url} == {
            k: v for k, v in successful.items() if v >= min_hits}


def test_custom_apriori_cross_checks_classic_apriori():
    records = generate_records(1500, seed=8, visitors=40, sections=5, files_per_section=6)
    min_hits = 3
    txs, d = build_transactions(records, "per_request")
    supports = support_map(apriori([t.items for t in txs], min_hits, max_length=3))
    classic = {}
    for itemset, supp in supports.items():
        items = d.decode(itemset)
        attrs = tuple(i.attribute for i in items)
        if attrs == (Attribute.IP, Attribute.URL):
            classic[(items[0].value, items[1].value)] = supp
    t = custom_apriori(records, min_hits)
    assert {r.key: r.hits - r.incomplete for r in t.ip_url} == classic
    triples = {tuple(i.value for i in d.decode(s)): n for s, n in supports.items() if len(s) == 3
               and tuple(i.attribute for i in d.decode(s)) == tuple(Attribute)}
    assert {r.key: r.hits - r.incomplete for r in t.ip_url_path} == triples


def test_custom_apriori_rows_sorted_and_paths_consistent():
    t = custom_apriori(generate_records(2000, seed=3, visitors=30, sections=5), 2)
    for rows in t.tables().values():
        assert [r.key for r in rows] == sorted(r.key for r in rows)
    for r in t.url_path + t.ip_url_path:
        assert r.path == extract_path(r.url)

import math
import random

import pytest
from hypothesis import given, strategies as st

from linksig.corpus import OfflineFetcher
from linksig.lexsig import (
    EmptyPoolError,
    LexicalSignature,
    SignatureConfig,
    compute_signature,
    default_stopwords,
    inverse_document_frequency,
    load_stopwords,
    signature_from_pool,
    term_frequency,
    tokenize,
    truncate,
)
from linksig.neighborhood import OfflineBacklinks, build_neighborhood
from linksig.uri import canonicalize

from oracles import TableDf, make_corpus, pass_all, random_case, tfidf_order

T = "http://example.com/target"


@pytest.mark.parametrize("text, tokens", [
    ("Time and Time again!", ["time", "and", "time", "again"]),
    ("", []),
    ("A1 42 x", ["a1"]),
    ("e-mail: foo_bar@Example.COM", ["mail", "foo", "bar", "example", "com"]),
    ("Ünïcode façade", ["ünïcode", "façade"]),
])
def test_tokenize(text, tokens):
    assert tokenize(text) == tokens


def test_term_frequency():
    assert term_frequency("climate", ["climate", "climate", "data"]) == 2
    assert term_frequency("absent", ["climate"]) == 0
    contexts = [["annual", "report"], ["report", "card"], ["the", "report"]]
    assert term_frequency("report", [t for c in contexts for t in c]) == 3


@pytest.mark.parametrize("df, expected", [(10, 2.0), (1000, 0.0), (0, 3.0), (1, 3.0), (5000, 0.0)])
def test_idf(df, expected):
    assert inverse_document_frequency("t", TableDf({"t": df}), 1000) == pytest.approx(expected, abs=1e-12)


def test_idf_needs_positive_total():
    with pytest.raises(ValueError):
        inverse_document_frequency("t", TableDf({}), 0)


def _anchor_hood(anchors, depth=1):
    pages = {f"http://b{i}.org/": f'<p>lead words <a href="{T}">{a}</a> tail words</p>'
             for i, a in enumerate(anchors)}
    corpus = make_corpus(pages, [(u, T) for u in pages])
    return build_neighborhood(T, depth, 10, OfflineBacklinks(corpus), OfflineFetcher(corpus), pass_all)


WORKED_DF = TableDf({"smithsonian": 1, "behring": 1, "americans": 2, "exhibit": 3, "time": 500})
WORKED_ANCHORS = ["smithsonian time", "behring time", "time americans", "time exhibit"]


def test_worked_example():
    hood = _anchor_hood(WORKED_ANCHORS)
    sig = compute_signature(T, hood, SignatureConfig(radius="anchor", size=3), WORKED_DF, 1000)
    pool = ["smithsonian", "time", "behring", "time", "time", "americans", "time", "exhibit"]
    expected = tfidf_order(pool, WORKED_DF.df, 1000, default_stopwords())
    assert sig.tokens == expected == ["behring", "smithsonian", "americans", "exhibit", "time"]
    values = dict(sig.terms)
    assert values["smithsonian"] == pytest.approx(3.0)
    assert values["americans"] == pytest.approx(math.log10(500))
    assert values["exhibit"] == pytest.approx(math.log10(1000 / 3))
    assert values["time"] == pytest.approx(4 * math.log10(2))
    assert truncate(sig, 3).tokens == ["behring", "smithsonian", "americans"]


def test_single_token():
    sig = compute_signature(T, _anchor_hood(["zephyr"]), SignatureConfig(), TableDf({}), 1000)
    assert sig.tokens == ["zephyr"] and len(sig) == 1


def test_all_stopwords():
    with pytest.raises(EmptyPoolError):
        compute_signature(T, _anchor_hood(["the and of", "it is"]), SignatureConfig(), TableDf({}), 1000)


def test_no_passing_pages():
    hood = _anchor_hood(["zephyr"])
    hood.verdicts.clear()
    with pytest.raises(EmptyPoolError):
        compute_signature(T, hood, SignatureConfig(), TableDf({}), 1000)


def test_depth_two_pools_both_levels():
    l1 = {"http://b0.org/": f'<a href="{T}">alpha</a>'}
    l2 = {"http://c0.org/": '<a href="http://b0.org/">beta</a>'}
    corpus = make_corpus({**l1, **l2}, [("http://b0.org/", T), ("http://c0.org/", "http://b0.org/")])
    hood = build_neighborhood(T, 2, 10, OfflineBacklinks(corpus), OfflineFetcher(corpus), pass_all)
    one = compute_signature(T, hood, SignatureConfig(depth=1), TableDf({}), 1000)
    two = compute_signature(T, hood, SignatureConfig(depth=2), TableDf({}), 1000)
    assert one.tokens == ["alpha"]
    assert two.tokens == ["alpha", "beta"]


def test_stopwords_file(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# custom\nAlpha\n\nbeta\n")
    assert load_stopwords(path) == {"alpha", "beta"}
    terms = signature_from_pool(["alpha", "beta", "gamma", "the"], TableDf({}), 100, load_stopwords(path))
    assert [t for t, _ in terms] == ["gamma", "the"]
    assert len(default_stopwords()) >= 100


def _sig(n):
    terms = tuple((f"t{i:02d}", float(n - i)) for i in range(n))
    return LexicalSignature(canonicalize(T), SignatureConfig(size=min(n, 10)), terms)


def test_truncate():
    assert truncate(_sig(10), 4).tokens == ["t00", "t01", "t02", "t03"]
    assert truncate(_sig(10), 4).config.size == 4
    assert truncate(_sig(10), 10).terms == _sig(10).terms
    with pytest.raises(ValueError):
        truncate(_sig(3), 5)


@pytest.mark.parametrize("kw", [dict(depth=3), dict(rank_limit=50), dict(radius="near"), dict(size=0), dict(size=11)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SignatureConfig(**kw)


@pytest.mark.parametrize("seed", range(25))
def test_oracle_equivalence(seed):
    corpus, target, pool, df, total = random_case(random.Random(seed))
    hood = build_neighborhood(target, 1, 100, OfflineBacklinks(corpus), OfflineFetcher(corpus), pass_all)
    cfg = SignatureConfig(rank_limit=100, radius="page", size=10)
    stop = default_stopwords()
    try:
        got = compute_signature(target, hood, cfg, TableDf(df), total).tokens
    except EmptyPoolError:
        got = []
    assert got == tfidf_order(pool, df.get, total, stop)


@given(st.lists(st.sampled_from(["aa", "bb", "cc", "dd", "ee"]), min_size=1, max_size=40),
       st.integers(1, 10 ** 6))
def test_uniform_df_reduces_to_tf(pool, total):
    ranked = signature_from_pool(pool, TableDf({t: 1 for t in pool}), total + 1, stopwords=())
    tfs = [pool.count(t) for t, _ in ranked]
    assert tfs == sorted(tfs, reverse=True)
    values = [v for _, v in ranked]
    assert values == sorted(values, reverse=True)
    assert len({t for t, _ in ranked}) == len(ranked)

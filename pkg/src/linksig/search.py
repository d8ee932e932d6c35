"""Querying with a signature and scoring where the target turns up."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence
from urllib.parse import quote

import httpx

from .corpus import DfCache, OfflineCorpus, OfflineDf, OfflineFetcher, ProviderUnavailable, CachedDf
from .filters import FilterChain
from .lexsig import (
    DfSource,
    EmptyPoolError,
    LexicalSignature,
    SignatureConfig,
    compute_signature,
    truncate,
)
from .neighborhood import BacklinkProvider, LinkNeighborhood, OfflineBacklinks, build_neighborhood
from .uri import CanonicalUri, MalformedURIError, UriLike, canonicalize, uri_equal

log = logging.getLogger(__name__)

MAX_INSPECTED = 1000
BUCKETS = ("1", "2-10", "11-100", "101-1000", ">1000")


class MultipleRelevantError(ValueError):
    pass


class SearchProvider(Protocol):
    name: str

    def search(self, query: str) -> list[str]: ...


@dataclass
class ResultSet:
    query_terms: list[str]
    results: list[CanonicalUri]
    provider: str

    def position(self, target: UriLike) -> Optional[int]:
        t = canonicalize(target)
        for i, uri in enumerate(self.results, 1):
            if uri_equal(uri, t):
                return i
        return None


@dataclass
class RediscoveryResult:
    target: CanonicalUri
    config: SignatureConfig
    found_rank: Optional[int]
    ndcg: float
    bucket: str
    signature: list[str] = field(default_factory=list)
    diagnostic: str = ""


# --------------------------------------------------------------------------
# scoring


def dcg_star(found_rank: Optional[int]) -> float:
    """1 / log2(1 + rank); 0 when the target was not found."""
    if found_rank is None:
        return 0.0
    if found_rank < 1:
        raise ValueError("rank must be >= 1")
    return 1.0 / math.log2(1 + found_rank)


def dcg(relevances: Sequence[float]) -> float:
    return sum((2 ** rel - 1) / math.log2(1 + i) for i, rel in enumerate(relevances, 1))


def ndcg(relevances: Sequence[int]) -> float:
    """nDCG for a binary list with at most one relevant entry."""
    if sum(1 for r in relevances if r) > 1:
        raise MultipleRelevantError("more than one relevant result")
    ideal = dcg(sorted(relevances, reverse=True))
    if ideal == 0:
        return 0.0
    return dcg(relevances) / ideal


def bucket(found_rank: Optional[int]) -> str:
    if found_rank is None or found_rank > 1000:
        return ">1000"
    if found_rank == 1:
        return "1"
    if found_rank <= 10:
        return "2-10"
    if found_rank <= 100:
        return "11-100"
    return "101-1000"


# --------------------------------------------------------------------------
# search backends


def offline_rank(query_terms: Sequence[str], corpus: OfflineCorpus) -> list[CanonicalUri]:
    """Rank corpus pages by sum of count(term) * log10(|D| / max(df, 1)).

    Zero-score pages are dropped; ties go to the lexicographically
    smaller URI.
    """
    counts, _ = corpus.index
    weights = {t: math.log10(corpus.total_documents / max(corpus.document_frequency(t), 1)) for t in query_terms}
    scored = []
    for uri, c in counts.items():
        score = sum(c.get(t, 0) * weights[t] for t in query_terms)
        if score > 0:
            scored.append((-score, uri.serialize(), uri))
    scored.sort()
    return [uri for _, _, uri in scored]


class OfflineSearch:
    name = "offline"

    def __init__(self, corpus: OfflineCorpus):
        self.corpus = corpus

    def search(self, query: str) -> list[str]:
        return [u.serialize() for u in offline_rank(query.split(), self.corpus)]


class HttpJsonSearch:
    """Search via a JSON endpoint; *template* gets ``{query}`` substituted.

    The endpoint returns a list of URIs, or ``{"results": [...]}``.
    """

    name = "http"

    def __init__(self, template: str, client: Optional[httpx.Client] = None):
        self.template = template
        self.client = client or httpx.Client(timeout=30.0)

    def search(self, query: str) -> list[str]:
        try:
            resp = self.client.get(self.template.format(query=quote(query)))
            resp.raise_for_status()
            data = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise ProviderUnavailable(str(exc)) from exc
        if isinstance(data, dict):
            data = data.get("results", [])
        return [item["url"] if isinstance(item, dict) else str(item) for item in data]


def search(terms: Sequence[str], provider: SearchProvider) -> ResultSet:
    if not 1 <= len(terms) <= 10:
        raise ValueError("a query needs 1 to 10 terms")
    query = " ".join(terms)
    try:
        raw = provider.search(query)
    except ProviderUnavailable:
        raise
    except Exception as exc:
        raise ProviderUnavailable(f"search failed for {query!r}: {exc}") from exc
    results = []
    for item in raw[:MAX_INSPECTED]:
        try:
            results.append(canonicalize(item))
        except MalformedURIError:
            log.debug("dropping malformed result %r", item)
    return ResultSet(list(terms), results, getattr(provider, "name", type(provider).__name__))


# --------------------------------------------------------------------------
# the full chain


@dataclass
class Pipeline:
    """Everything a rediscovery needs besides the target and configuration."""

    backlinks: BacklinkProvider
    fetcher: object
    search: SearchProvider
    df: DfSource
    d_total: float
    stopwords: Optional[frozenset[str]] = None
    filter_fn: Optional[object] = None
    parallelism: int = 1

    @classmethod
    def offline(cls, corpus: OfflineCorpus, df_cache: Optional[DfCache] = None, **kw) -> "Pipeline":
        fetcher = OfflineFetcher(corpus)
        kw.setdefault("filter_fn", FilterChain(fetcher=fetcher))
        return cls(
            backlinks=OfflineBacklinks(corpus),
            fetcher=fetcher,
            search=OfflineSearch(corpus),
            df=CachedDf(OfflineDf(corpus), df_cache),
            d_total=corpus.total_documents,
            **kw,
        )

    def neighborhood(self, target: UriLike, depth: int, rank_limit: int) -> LinkNeighborhood:
        return build_neighborhood(
            target, depth, rank_limit, self.backlinks, self.fetcher,
            filter_fn=self.filter_fn, parallelism=self.parallelism,
        )

    def signature(self, target: UriLike, config: SignatureConfig,
                  hood: Optional[LinkNeighborhood] = None) -> LexicalSignature:
        hood = hood or self.neighborhood(target, config.depth, config.rank_limit)
        return compute_signature(target, hood, config, self.df, self.d_total, self.stopwords)


def score_signature(target: UriLike, signature: LexicalSignature, config: SignatureConfig,
                    provider: SearchProvider) -> RediscoveryResult:
    target = canonicalize(target)
    # a pool with fewer distinct terms than requested queries with all of them
    short = truncate(signature, min(config.size, len(signature)))
    results = search(short.tokens, provider)
    rank = results.position(target)
    return RediscoveryResult(target, config, rank, dcg_star(rank), bucket(rank), short.tokens)


def failed_result(target: UriLike, config: SignatureConfig, reason: str) -> RediscoveryResult:
    return RediscoveryResult(canonicalize(target), config, None, 0.0, ">1000", [], reason)


def rediscover(target: UriLike, config: SignatureConfig, pipeline: Pipeline) -> RediscoveryResult:
    """Neighborhood, signature, query, score. Failures score zero instead of raising."""
    try:
        signature = pipeline.signature(target, config)
        return score_signature(target, signature, config, pipeline.search)
    except (EmptyPoolError, ProviderUnavailable, ValueError) as exc:
        log.info("rediscovery of %s with %s failed: %s", target, config.label(), exc)
        return failed_result(target, config, f"{type(exc).__name__}: {exc}")

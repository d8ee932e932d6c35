"""Backlink neighborhoods of depth one or two around a target URI."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol
from urllib.parse import quote

import httpx

from .corpus import Fetcher, OfflineCorpus, PageRecord, ProviderUnavailable, fetch_many
from .filters import FilterChain, FilterFn, FilterVerdict
from .uri import CanonicalUri, MalformedURIError, UriLike, canonicalize

RANK_LIMITS = (10, 100, 1000)


class BacklinkProvider(Protocol):
    def backlinks(self, uri: CanonicalUri) -> list[str]: ...


class OfflineBacklinks:
    """Reverse edge lookup; manifest order is the backlink rank."""

    def __init__(self, corpus: OfflineCorpus):
        self.corpus = corpus
        self.calls = 0

    def backlinks(self, uri: CanonicalUri) -> list[str]:
        self.calls += 1
        return [s.serialize() for s in self.corpus.inlinks(uri)]


class HttpJsonBacklinks:
    """Backlinks from a JSON endpoint returning a list of URIs.

    *template* gets ``{uri}`` substituted (percent-encoded).
    """

    def __init__(self, template: str, client: Optional[httpx.Client] = None):
        self.template = template
        self.client = client or httpx.Client(timeout=30.0)

    def backlinks(self, uri: CanonicalUri) -> list[str]:
        try:
            resp = self.client.get(self.template.format(uri=quote(uri.serialize(), safe="")))
            resp.raise_for_status()
            data = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise ProviderUnavailable(str(exc)) from exc
        if isinstance(data, dict):
            data = data.get("backlinks", [])
        return [str(u) for u in data]


@dataclass(frozen=True)
class BacklinkEdge:
    source: CanonicalUri
    target: CanonicalUri
    rank: int
    level: int


@dataclass
class LinkNeighborhood:
    target: CanonicalUri
    depth: int
    rank_limit: int
    edges: list[BacklinkEdge] = field(default_factory=list)
    pages: dict[CanonicalUri, PageRecord] = field(default_factory=dict)
    verdicts: dict[CanonicalUri, FilterVerdict] = field(default_factory=dict)

    def level(self, n: int) -> list[BacklinkEdge]:
        return [e for e in self.edges if e.level == n]

    def passing(self, uri: CanonicalUri) -> bool:
        verdict = self.verdicts.get(uri)
        return verdict is not None and verdict.passed


def _check_limit(limit: int) -> None:
    if limit not in RANK_LIMITS:
        raise ValueError(f"rank limit must be one of {RANK_LIMITS}, got {limit}")


def get_backlinks(uri: UriLike, limit: int, provider: BacklinkProvider) -> list[CanonicalUri]:
    """Up to *limit* canonical, de-duplicated backlinks in provider order."""
    _check_limit(limit)
    cu = canonicalize(uri)
    try:
        raw = provider.backlinks(cu)
    except ProviderUnavailable:
        raise
    except Exception as exc:
        raise ProviderUnavailable(f"backlink provider failed for {cu}: {exc}") from exc
    out: list[CanonicalUri] = []
    seen = set()
    for item in raw:
        try:
            link = canonicalize(item)
        except MalformedURIError:
            continue
        if link in seen:
            continue
        seen.add(link)
        out.append(link)
        if len(out) == limit:
            break
    return out


def build_neighborhood(
    target: UriLike,
    depth: int,
    limit: int,
    provider: BacklinkProvider,
    fetcher: Fetcher,
    filter_fn: Optional[FilterFn] = None,
    parallelism: int = 1,
) -> LinkNeighborhood:
    """Fetch and filter the level-1 (and for depth 2, level-2) backlinks.

    Rejected pages keep their rank slot and their edges; they only lose
    their say in term extraction. A URI reached several times is fetched
    and filtered once.
    """
    if depth not in (1, 2):
        raise ValueError("depth must be 1 or 2")
    _check_limit(limit)
    target = canonicalize(target)
    hood = LinkNeighborhood(target, depth, limit)
    filter_fn = filter_fn or FilterChain(fetcher=fetcher)

    def add_edges(dest: CanonicalUri, level: int) -> list[CanonicalUri]:
        added = []
        for rank, source in enumerate(get_backlinks(dest, limit, provider), 1):
            if source == target or source == dest:
                continue
            hood.edges.append(BacklinkEdge(source, dest, rank, level))
            added.append(source)
        return added

    def fetch_and_filter(uris: list[CanonicalUri]) -> None:
        todo = [u for u in dict.fromkeys(uris) if u not in hood.pages]
        hood.pages.update(fetch_many(todo, fetcher, parallelism))
        for u in todo:
            hood.verdicts[u] = filter_fn(hood.pages[u])

    level1 = add_edges(target, 1)
    fetch_and_filter(level1)
    if depth == 2:
        level2: list[CanonicalUri] = []
        for source in level1:
            level2 += add_edges(source, 2)
        fetch_and_filter(level2)
    return hood

"""Page fetching, DF caching and offline corpora.

The offline corpus is the deterministic stand-in for the live web: it
answers fetches, backlink queries, document-frequency lookups and search
queries from a directory of saved page bodies plus a manifest.
"""
from __future__ import annotations

import json
import logging
import os
import ssl
import threading
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol, Union
from urllib.parse import quote, urlsplit

import httpx

from .uri import CanonicalUri, UriLike, canonicalize

log = logging.getLogger(__name__)

DEFAULT_USER_AGENT = "linksig/0.1 (backlink lexical signature research; offline-first)"
DEFAULT_D_TOTAL = 5.0e10
MAX_BYTES = 150 * 1024 * 1024

FetchStatus = Union[int, str]
TIMEOUT = "timeout"
DNS_ERROR = "dns-error"
SSL_ERROR = "ssl-error"
CONNECTION_REFUSED = "connection-refused"
NO_OUTPUT = "no-output"
TOO_LARGE = "too-large"


class CorpusError(Exception):
    pass


class ManifestError(CorpusError):
    pass


class DuplicateUriError(CorpusError):
    pass


class DanglingEdgeError(CorpusError):
    pass


class ProviderUnavailable(Exception):
    pass


def is_success(status: FetchStatus) -> bool:
    return isinstance(status, int) and 200 <= status < 300


@dataclass
class PageRecord:
    uri: CanonicalUri
    fetch_status: FetchStatus
    headers: list[tuple[str, str]] = field(default_factory=list)
    body: bytes = b""
    fetched_at: float = 0.0
    attempt_count: int = 1

    @property
    def ok(self) -> bool:
        return is_success(self.fetch_status)

    def header(self, name: str) -> Optional[str]:
        name = name.lower()
        for key, value in self.headers:
            if key.lower() == name:
                return value
        return None


class Fetcher(Protocol):
    def __call__(self, uri: UriLike) -> PageRecord: ...


# --------------------------------------------------------------------------
# live fetching


@dataclass
class RetryPolicy:
    max_attempts: int = 5
    max_redirects: int = 10
    timeout: float = 30.0
    retry_delay: float = 1.0
    host_delay: float = 0.5
    max_bytes: int = MAX_BYTES
    user_agent: Optional[str] = None

    def agent(self) -> str:
        return self.user_agent or os.environ.get("LINKSIG_USER_AGENT") or DEFAULT_USER_AGENT


class HostThrottle:
    """Enforces a minimum gap between requests to the same host, across threads."""

    def __init__(self, delay: float):
        self.delay = delay
        self._next: dict[str, float] = {}
        self._lock = threading.Lock()

    def wait(self, uri: str) -> None:
        if self.delay <= 0:
            return
        host = urlsplit(uri).netloc
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next.get(host, 0.0))
            self._next[host] = slot + self.delay
        if slot > now:
            time.sleep(slot - now)


def _classify_error(exc: Exception) -> str:
    if isinstance(exc, httpx.TimeoutException):
        return TIMEOUT
    chain = []
    cur: Optional[BaseException] = exc
    while cur is not None and len(chain) < 10:
        chain.append(cur)
        cur = cur.__cause__ or cur.__context__
    for err in chain:
        if isinstance(err, ssl.SSLError):
            return SSL_ERROR
        if isinstance(err, ConnectionRefusedError):
            return CONNECTION_REFUSED
    text = " ".join(str(e) for e in chain).lower()
    if "ssl" in text or "certificate" in text:
        return SSL_ERROR
    if "name or service not known" in text or "getaddrinfo" in text or "nodename nor servname" in text \
            or "name resolution" in text:
        return DNS_ERROR
    if "connection refused" in text or "errno 111" in text:
        return CONNECTION_REFUSED
    return NO_OUTPUT


class LiveFetcher:
    """HTTP fetcher with bounded retries, redirect cap and per-host politeness.

    A non-2xx answer or a transport failure is retried until
    ``policy.max_attempts`` attempts have been made; the last outcome is
    returned, never raised.
    """

    def __init__(self, policy: Optional[RetryPolicy] = None, transport: Optional[httpx.BaseTransport] = None):
        self.policy = policy or RetryPolicy()
        self.throttle = HostThrottle(self.policy.host_delay)
        self.client = httpx.Client(
            follow_redirects=True,
            max_redirects=self.policy.max_redirects,
            timeout=self.policy.timeout,
            headers={"User-Agent": self.policy.agent()},
            transport=transport,
        )

    def close(self) -> None:
        self.client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _attempt(self, url: str) -> tuple[FetchStatus, list[tuple[str, str]], bytes]:
        self.throttle.wait(url)
        try:
            with self.client.stream("GET", url) as resp:
                headers = list(resp.headers.items())
                declared = resp.headers.get("content-length")
                if declared and declared.isdigit() and int(declared) > self.policy.max_bytes:
                    return TOO_LARGE, headers, b""
                chunks = []
                size = 0
                for chunk in resp.iter_bytes():
                    size += len(chunk)
                    if size > self.policy.max_bytes:
                        return TOO_LARGE, headers, b""
                    chunks.append(chunk)
                return resp.status_code, headers, b"".join(chunks)
        except httpx.TooManyRedirects:
            return NO_OUTPUT, [], b""
        except (httpx.HTTPError, OSError) as exc:
            return _classify_error(exc), [], b""

    def __call__(self, uri: UriLike) -> PageRecord:
        cu = canonicalize(uri)
        url = cu.serialize()
        status: FetchStatus = NO_OUTPUT
        headers: list[tuple[str, str]] = []
        body = b""
        attempts = 0
        for attempts in range(1, self.policy.max_attempts + 1):
            status, headers, body = self._attempt(url)
            if is_success(status) or status == TOO_LARGE:
                break
            if attempts < self.policy.max_attempts and self.policy.retry_delay > 0:
                time.sleep(self.policy.retry_delay)
        return PageRecord(cu, status, headers, body, time.time(), max(attempts, 1))


def fetch(uri: UriLike, policy: Optional[RetryPolicy] = None, transport: Optional[httpx.BaseTransport] = None) -> PageRecord:
    with LiveFetcher(policy, transport) as fetcher:
        return fetcher(uri)


def fetch_many(uris: Iterable[UriLike], fetcher: Fetcher, parallelism: int = 4) -> dict[CanonicalUri, PageRecord]:
    unique = list(dict.fromkeys(canonicalize(u) for u in uris))
    if parallelism <= 1 or len(unique) <= 1:
        return {u: fetcher(u) for u in unique}
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return dict(zip(unique, pool.map(fetcher, unique)))


# --------------------------------------------------------------------------
# document frequency


@dataclass(frozen=True)
class DfCacheEntry:
    term: str
    df: int
    recorded_at: float


class DfCache:
    """Term -> document frequency, optionally backed by an append-only file.

    File format is one ``term<TAB>df<TAB>unix-timestamp`` record per line;
    later lines win.
    """

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, DfCacheEntry] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    term, df, ts = line.split("\t")
                    self._entries[term] = DfCacheEntry(term, int(df), float(ts))
                except ValueError:
                    log.warning("skipping bad DF cache line %d in %s", lineno, self.path)

    def get(self, term: str) -> Optional[int]:
        entry = self._entries.get(term)
        return None if entry is None else entry.df

    def put(self, term: str, df: int) -> None:
        if df < 0:
            raise ValueError("df must be non-negative")
        if not term or term != term.lower() or any(c.isspace() for c in term):
            raise ValueError(f"bad DF cache term {term!r}")
        entry = DfCacheEntry(term, int(df), time.time())
        with self._lock:
            self._entries[term] = entry
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(f"{term}\t{entry.df}\t{int(entry.recorded_at)}\n")

    def __contains__(self, term: str) -> bool:
        return term in self._entries

    def __len__(self) -> int:
        return len(self._entries)


class DfProvider(Protocol):
    def df(self, term: str) -> int: ...


def df_lookup(term: str, provider: DfProvider, cache: DfCache) -> int:
    cached = cache.get(term)
    if cached is not None:
        return cached
    try:
        value = int(provider.df(term))
    except ProviderUnavailable:
        raise
    except Exception as exc:
        raise ProviderUnavailable(f"DF provider failed for {term!r}: {exc}") from exc
    cache.put(term, value)
    return value


class CachedDf:
    """Binds a provider and a cache into a single ``df(term)`` source."""

    def __init__(self, provider: DfProvider, cache: Optional[DfCache] = None):
        self.provider = provider
        self.cache = cache if cache is not None else DfCache()

    def df(self, term: str) -> int:
        return df_lookup(term, self.provider, self.cache)


class HttpJsonDf:
    """DF from a JSON endpoint; *template* gets ``{term}`` substituted.

    The endpoint must answer with an integer or ``{"df": <int>}``.
    """

    def __init__(self, template: str, client: Optional[httpx.Client] = None):
        self.template = template
        self.client = client or httpx.Client(timeout=30.0)

    def df(self, term: str) -> int:
        try:
            resp = self.client.get(self.template.format(term=quote(term)))
            resp.raise_for_status()
            data = resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise ProviderUnavailable(str(exc)) from exc
        return int(data["df"] if isinstance(data, dict) else data)


# --------------------------------------------------------------------------
# offline corpus


class OfflineCorpus:
    """Pages, link edges and |D| for offline runs. Immutable after construction."""

    def __init__(
        self,
        pages: Iterable[PageRecord],
        edges: Iterable[tuple[UriLike, UriLike]],
        total_documents: Optional[int] = None,
        targets: Iterable[UriLike] = (),
    ):
        self.pages: dict[CanonicalUri, PageRecord] = {}
        for page in pages:
            if page.uri in self.pages:
                raise DuplicateUriError(f"duplicate page {page.uri}")
            self.pages[page.uri] = page
        self.edges: tuple[tuple[CanonicalUri, CanonicalUri], ...] = tuple(
            (canonicalize(s), canonicalize(t)) for s, t in edges
        )
        for source, _ in self.edges:
            if source not in self.pages:
                raise DanglingEdgeError(f"edge source {source} is not a page")
        self.total_documents = int(total_documents if total_documents is not None else len(self.pages))
        if self.total_documents < max(1, len(self.pages)):
            raise ManifestError("total_documents must be >= number of pages and positive")
        self.targets: tuple[CanonicalUri, ...] = tuple(canonicalize(t) for t in targets)
        self._inlinks: dict[CanonicalUri, list[CanonicalUri]] = {}
        for source, target in self.edges:
            self._inlinks.setdefault(target, []).append(source)
        self._index_lock = threading.Lock()
        self._index: Optional[tuple[dict[CanonicalUri, Counter], Counter]] = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OfflineCorpus):
            return NotImplemented
        return (
            self.total_documents == other.total_documents
            and set(self.edges) == set(other.edges)
            and self.pages.keys() == other.pages.keys()
            and all(
                (p.body, p.fetch_status, p.headers) == (other.pages[u].body, other.pages[u].fetch_status, other.pages[u].headers)
                for u, p in self.pages.items()
            )
        )

    def __len__(self) -> int:
        return len(self.pages)

    def inlinks(self, uri: UriLike) -> list[CanonicalUri]:
        """Sources linking to *uri*, in manifest order."""
        return list(self._inlinks.get(canonicalize(uri), ()))

    # the text index backs both offline DF and offline search
    def _build_index(self) -> tuple[dict[CanonicalUri, Counter], Counter]:
        from .filters import detect_filetype
        from .render import render

        counts: dict[CanonicalUri, Counter] = {}
        df: Counter = Counter()
        for uri in sorted(self.pages):
            page = self.pages[uri]
            if not page.ok or detect_filetype(page) != "html":
                continue
            c = Counter(render(page.body).tokens)
            counts[uri] = c
            df.update(c.keys())
        return counts, df

    @property
    def index(self) -> tuple[dict[CanonicalUri, Counter], Counter]:
        if self._index is None:
            with self._index_lock:
                if self._index is None:
                    self._index = self._build_index()
        return self._index

    def term_counts(self, uri: UriLike) -> Counter:
        return self.index[0].get(canonicalize(uri), Counter())

    def document_frequency(self, term: str) -> int:
        return self.index[1].get(term, 0)


class OfflineFetcher:
    """Answers fetches from the corpus; unknown URIs come back as 404."""

    def __init__(self, corpus: OfflineCorpus, on_fetch: Optional[Callable[[CanonicalUri], None]] = None):
        self.corpus = corpus
        self.on_fetch = on_fetch

    def __call__(self, uri: UriLike) -> PageRecord:
        cu = canonicalize(uri)
        if self.on_fetch is not None:
            self.on_fetch(cu)
        page = self.corpus.pages.get(cu)
        if page is None:
            return PageRecord(cu, 404, [("Content-Type", "text/html")], b"", 0.0, 1)
        return page


class OfflineDf:
    def __init__(self, corpus: OfflineCorpus):
        self.corpus = corpus

    def df(self, term: str) -> int:
        return self.corpus.document_frequency(term)


def save_corpus(corpus: OfflineCorpus, path: Union[str, Path]) -> Path:
    path = Path(path)
    (path / "pages").mkdir(parents=True, exist_ok=True)
    entries = []
    for i, (uri, page) in enumerate(corpus.pages.items()):
        name = f"pages/{i:05d}.bin"
        (path / name).write_bytes(page.body)
        entries.append({
            "uri": uri.serialize(),
            "file": name,
            "status": page.fetch_status,
            "headers": [list(h) for h in page.headers],
        })
    manifest = {
        "total_documents": corpus.total_documents,
        "pages": entries,
        "edges": [[s.serialize(), t.serialize()] for s, t in corpus.edges],
    }
    if corpus.targets:
        manifest["targets"] = [t.serialize() for t in corpus.targets]
    (path / "manifest.json").write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    return path


def load_corpus(path: Union[str, Path]) -> OfflineCorpus:
    path = Path(path)
    try:
        manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
        entries = manifest["pages"]
        edges = manifest["edges"]
        total = manifest["total_documents"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ManifestError(f"cannot read manifest in {path}: {exc}") from exc

    pages = []
    seen = set()
    for entry in entries:
        try:
            uri = canonicalize(entry["uri"])
            body_path = path / entry["file"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"bad page entry {entry!r}: {exc}") from exc
        if uri in seen:
            raise DuplicateUriError(f"duplicate page {uri}")
        seen.add(uri)
        if not body_path.is_file():
            raise DanglingEdgeError(f"page file {entry['file']} for {uri} is missing")
        pages.append(PageRecord(
            uri,
            entry.get("status", 200),
            [tuple(h) for h in entry.get("headers", [])],
            body_path.read_bytes(),
            0.0,
            1,
        ))
    try:
        edge_pairs = [(s, t) for s, t in edges]
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"bad edge list: {exc}") from exc
    return OfflineCorpus(pages, edge_pairs, total, manifest.get("targets", ()))

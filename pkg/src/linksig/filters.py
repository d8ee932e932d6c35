"""Pre-processing filters deciding which backlink pages are usable.

Order is fixed: status, filetype, language, size, soft404. A page is
charged to the first filter that rejects it and later filters never run.
"""
from __future__ import annotations

import logging
import random
import string
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .corpus import Fetcher, PageRecord, is_success
from .langid import ENGLISH, LanguageClassifier, LanguageDistribution, default_classifier
from .render import render
from .tokens import tokenize
from .uri import CanonicalUri, UriLike, canonicalize

log = logging.getLogger(__name__)

STATUS = "status"
FILETYPE = "filetype"
LANGUAGE = "language"
SIZE = "size"
SOFT404 = "soft404"
FILTER_ORDER = (STATUS, FILETYPE, LANGUAGE, SIZE, SOFT404)

MIN_TOKENS = 50
LANGUAGE_SAMPLE_BYTES = 50 * 1024
ENGLISH_RATIO = 0.6
SOFT404_THRESHOLD = 0.9
PROBE_LENGTH = 20


@dataclass(frozen=True)
class FilterVerdict:
    page: CanonicalUri
    passed: bool
    rejected_by: Optional[str] = None
    detail: str = ""

    def __post_init__(self):
        if self.passed != (self.rejected_by is None):
            raise ValueError("rejected_by must be set exactly when the page failed")


# --------------------------------------------------------------------------
# filetype

_CONTENT_TYPES = {
    "text/html": "html",
    "application/xhtml+xml": "html",
    "application/pdf": "pdf",
    "application/x-pdf": "pdf",
    "application/msword": "ms-word",
    "application/vnd.openxmlformats-officedocument.wordprocessingml.document": "ms-word",
    "application/vnd.ms-powerpoint": "ms-powerpoint",
    "application/vnd.openxmlformats-officedocument.presentationml.presentation": "ms-powerpoint",
    "application/vnd.ms-excel": "excel",
    "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet": "excel",
    "application/rss+xml": "rss",
    "application/atom+xml": "atom",
    "application/rdf+xml": "rdf",
    "application/gzip": "gzip",
    "application/x-gzip": "gzip",
    "application/javascript": "code",
    "application/x-javascript": "code",
    "application/json": "code",
    "application/x-sh": "code",
    "application/x-httpd-php": "code",
    "text/javascript": "code",
    "text/css": "code",
    "text/plain": "text",
}
_GENERIC_TYPES = {"application/octet-stream", "application/unknown", "binary/octet-stream", ""}


def _sniff(body: bytes) -> str:
    if not body:
        return "binary"
    head = body[:4096]
    if head.startswith(b"%PDF-"):
        return "pdf"
    if head.startswith(b"\x1f\x8b"):
        return "gzip"
    if head.startswith(b"\xd0\xcf\x11\xe0\xa1\xb1\x1a\xe1"):
        if b"P\x00o\x00w\x00e\x00r\x00P\x00o\x00i\x00n\x00t" in body:
            return "ms-powerpoint"
        if b"W\x00o\x00r\x00k\x00b\x00o\x00o\x00k" in body:
            return "excel"
        return "ms-word"
    if head.startswith(b"PK\x03\x04"):
        if b"word/" in body:
            return "ms-word"
        if b"ppt/" in body:
            return "ms-powerpoint"
        if b"xl/" in body:
            return "excel"
        return "binary"
    if b"\x00" in head:
        return "binary"
    text = head.decode("utf-8", errors="replace").lstrip("﻿ \t\r\n").lower()
    if text.count("�") > len(text) // 10:
        return "binary"
    if "<rss" in text:
        return "rss"
    if "<feed" in text and "atom" in text:
        return "atom"
    if "<rdf:rdf" in text:
        return "rdf"
    if any(tag in text for tag in ("<!doctype html", "<html", "<head", "<body", "<title", "<p>", "<div", "<a ", "<br")):
        return "html"
    if text.startswith("#!") or text.startswith("<?php") or text.startswith("#include") \
            or "function " in text and "{" in text:
        return "code"
    return "text"


def detect_filetype(record: PageRecord) -> str:
    """Filetype tag: the server's Content-Type when it names one, else a content sniff."""
    declared = record.header("content-type")
    if declared is not None:
        mime = declared.split(";", 1)[0].strip().lower()
        if mime in _CONTENT_TYPES:
            return _CONTENT_TYPES[mime]
        if mime not in _GENERIC_TYPES:
            if mime.startswith("text/x-") or mime.startswith("application/x-"):
                return "code"
            if mime.startswith(("image/", "audio/", "video/", "font/")):
                return "binary"
    return _sniff(record.body)


# --------------------------------------------------------------------------
# language, size, similarity


def language_keep(dist: LanguageDistribution, ratio: float = ENGLISH_RATIO) -> bool:
    """Keep English pages, and pages where English is within 40% of the top guess."""
    if not dist.guesses:
        raise ValueError("empty language distribution")
    top_lang, top_p = dist.top
    if top_lang == ENGLISH:
        return True
    return dist.likelihood(ENGLISH) >= ratio * top_p


def size_keep(rendered_text: str) -> bool:
    return len(tokenize(rendered_text)) >= MIN_TOKENS


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


# --------------------------------------------------------------------------
# soft 404


def random_probe(rng: Optional[random.Random] = None, length: int = PROBE_LENGTH) -> str:
    rng = rng or random.SystemRandom()
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(length))


def probe_uris(uri: UriLike, token: str) -> tuple[CanonicalUri, CanonicalUri]:
    """(after-first-slash probe, after-last-slash probe) for *uri*."""
    cu = canonicalize(uri)
    path = cu.path or "/"
    first = "/" + token + path[1:]
    cut = path.rfind("/") + 1
    last = path[:cut] + token + path[cut:]
    return (
        CanonicalUri(cu.scheme, cu.host, cu.port, first, cu.query),
        CanonicalUri(cu.scheme, cu.host, cu.port, last, cu.query),
    )


def _page_words(record: PageRecord) -> set[str]:
    return set(render(record.body).tokens) if record.body else set()


def detect_soft404(
    uri: UriLike,
    fetcher: Fetcher,
    original: Optional[PageRecord] = None,
    rng: Optional[random.Random] = None,
    threshold: float = SOFT404_THRESHOLD,
) -> bool:
    """True when the URI answers 200 but looks like the site's error page.

    Two probes with a random string spliced into the path are fetched. A
    hard error on the first-slash probe means the site reports missing
    pages honestly. Otherwise the page is a soft 404 when it is more than
    *threshold* similar (Jaccard over unique words) to both probes.
    """
    cu = canonicalize(uri)
    if original is None:
        original = fetcher(cu)
    if not original.ok:
        if not isinstance(original.fetch_status, int):
            log.warning("soft-404 check for %s indeterminate: %s", cu, original.fetch_status)
        return False
    first_probe, last_probe = probe_uris(cu, random_probe(rng))
    first = fetcher(first_probe)
    if not first.ok:
        return False
    last = fetcher(last_probe)
    words = _page_words(original)
    return jaccard(words, _page_words(first)) > threshold and jaccard(words, _page_words(last)) > threshold


# --------------------------------------------------------------------------
# the chain


class FilterChain:
    """Runs the filters in order and stops at the first rejection.

    *skip* names filters to bypass (diagnostics only). Without a fetcher
    the soft-404 filter cannot probe and is passed.
    """

    def __init__(
        self,
        classifier: Optional[LanguageClassifier] = None,
        fetcher: Optional[Fetcher] = None,
        skip: Iterable[str] = (),
        rng: Optional[random.Random] = None,
    ):
        self.classifier = classifier or default_classifier()
        self.fetcher = fetcher
        self.skip = frozenset(skip)
        unknown = self.skip - set(FILTER_ORDER)
        if unknown:
            raise ValueError(f"unknown filters: {sorted(unknown)}")
        self.rng = rng

    def __call__(self, record: PageRecord) -> FilterVerdict:
        return run_filter_chain(record, self)


def run_filter_chain(record: PageRecord, chain: Optional[FilterChain] = None) -> FilterVerdict:
    chain = chain or FilterChain()
    uri = record.uri

    def reject(name: str, detail: str) -> FilterVerdict:
        return FilterVerdict(uri, False, name, detail)

    if STATUS not in chain.skip and not record.ok:
        return reject(STATUS, f"fetch status {record.fetch_status}")

    if FILETYPE not in chain.skip:
        kind = detect_filetype(record)
        if kind != "html":
            return reject(FILETYPE, f"filetype {kind}")

    if LANGUAGE not in chain.skip:
        sample = render(record.body[:LANGUAGE_SAMPLE_BYTES]).text
        dist = chain.classifier.classify(sample)
        if not language_keep(dist):
            lang, p = dist.top
            return reject(LANGUAGE, f"top guess {lang} ({p:.2f}), en {dist.likelihood(ENGLISH):.2f}")

    if SIZE not in chain.skip:
        text = render(record.body).text
        if not size_keep(text):
            return reject(SIZE, f"{len(tokenize(text))} tokens")

    if SOFT404 not in chain.skip and chain.fetcher is not None:
        if detect_soft404(uri, chain.fetcher, original=record, rng=chain.rng):
            return reject(SOFT404, "similar to both random-path probes")

    return FilterVerdict(uri, True, None, "")


FilterFn = Callable[[PageRecord], FilterVerdict]

"""Text rendering and anchor marking.

Links to the target are bracketed with the MD5 hex digest of the target's
canonical URI before rendering, so their position survives tag stripping.
The rendered token stream never contains the marker itself.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Optional, Union
from urllib.parse import urljoin

from .tokens import keep_word, split_words
from .uri import CanonicalUri, MalformedURIError, UriLike, canonicalize

ANCHOR = "anchor"
ANCHOR_5 = "anchor5"
ANCHOR_10 = "anchor10"
WHOLE_PAGE = "page"
RADII = (ANCHOR, ANCHOR_5, ANCHOR_10, WHOLE_PAGE)

_INLINE_TAGS = frozenset(
    "a abbr acronym b bdi bdo big cite code data del dfn em font i ins kbd "
    "label mark q s samp small span strike strong sub sup time tt u var".split()
)
_HIDDEN_TAGS = frozenset({"script", "style"})


class NoLinkFoundError(Exception):
    """The page has no usable anchor pointing at the target."""


def marker_for(target: UriLike) -> str:
    return hashlib.md5(canonicalize(target).serialize().encode("utf-8")).hexdigest()


def decode_body(body: Union[bytes, str]) -> str:
    if isinstance(body, str):
        return body
    try:
        return body.decode("utf-8")
    except UnicodeDecodeError as exc:
        # a multibyte character cut off by truncation is still UTF-8
        if exc.start >= len(body) - 3:
            return body.decode("utf-8", errors="ignore")
        return body.decode("cp1252", errors="replace")


def window_size(radius: str) -> Optional[int]:
    """Tokens taken on each side of an anchor; None means the whole page.

    Accepts the four standard tags plus ``anchorN`` for any N >= 0.
    """
    if radius == WHOLE_PAGE:
        return None
    if radius == ANCHOR:
        return 0
    m = re.fullmatch(r"anchor(\d+)", radius)
    if m is None:
        raise ValueError(f"unknown radius {radius!r}")
    return int(m.group(1))


# --------------------------------------------------------------------------
# marking


class _AnchorLocator(HTMLParser):
    def __init__(self, text: str, target: CanonicalUri, base: Optional[str]):
        super().__init__(convert_charrefs=True)
        self._line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
        self._text = text
        self.target = target.serialize()
        self.base = base or ""
        self.map_depth = 0
        self.open_start: Optional[int] = None
        self.spans: list[tuple[int, int]] = []

    def _offset(self) -> int:
        line, col = self.getpos()
        return self._line_starts[line - 1] + col

    def _matches(self, href: Optional[str]) -> bool:
        if not href:
            return False
        try:
            return canonicalize(urljoin(self.base, href.strip())).serialize() == self.target
        except (MalformedURIError, ValueError):
            return False

    def handle_starttag(self, tag, attrs):
        if tag == "base" and not self.spans and self.open_start is None:
            href = dict(attrs).get("href")
            if href:
                self.base = urljoin(self.base, href)
        elif tag == "map":
            self.map_depth += 1
        elif tag == "a":
            pos = self._offset()
            # browsers close an unterminated anchor when a new one opens
            if self.open_start is not None:
                self.spans.append((self.open_start, pos))
                self.open_start = None
            if self.map_depth == 0 and self._matches(dict(attrs).get("href")):
                self.open_start = pos

    def handle_endtag(self, tag):
        if tag == "map":
            self.map_depth = max(0, self.map_depth - 1)
        elif tag == "a" and self.open_start is not None:
            pos = self._offset()
            end = self._text.find(">", pos)
            end = len(self._text) if end < 0 else end + 1
            self.spans.append((self.open_start, end))
            self.open_start = None

    def finish(self) -> list[tuple[int, int]]:
        self.close()
        if self.open_start is not None:
            self.spans.append((self.open_start, len(self._text)))
            self.open_start = None
        return self.spans


def mark_links(html: Union[bytes, str], target: UriLike, base: Optional[UriLike] = None) -> bytes:
    """Wrap every ``<a>`` pointing at *target* with marker text.

    Relative hrefs resolve against *base* (the backlink page's own URI).
    Anchors inside ``<map>`` are ignored, and ``<area>`` is never an anchor,
    so a page linking only through an image map raises NoLinkFoundError.
    """
    text = decode_body(html)
    target = canonicalize(target)
    locator = _AnchorLocator(text, target, str(base) if base is not None else None)
    locator.feed(text)
    spans = locator.finish()
    if not spans:
        raise NoLinkFoundError(f"no anchor to {target} found")
    marker = f" {marker_for(target)} "
    parts = []
    prev = 0
    for start, end in spans:
        parts += [text[prev:start], marker, text[start:end], marker]
        prev = end
    parts.append(text[prev:])
    return "".join(parts).encode("utf-8")


# --------------------------------------------------------------------------
# rendering


class _TextRenderer(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.chunks: list[str] = []
        self.hidden = 0
        self.in_head = False
        self.in_title = False

    def handle_starttag(self, tag, attrs):
        if tag in _HIDDEN_TAGS:
            self.hidden += 1
        elif tag == "head":
            self.in_head = True
        elif tag == "body":
            self.in_head = False
        elif tag == "title":
            self.in_title = True
        if tag not in _INLINE_TAGS:
            self.chunks.append(" ")

    def handle_startendtag(self, tag, attrs):
        if tag not in _INLINE_TAGS:
            self.chunks.append(" ")

    def handle_endtag(self, tag):
        if tag in _HIDDEN_TAGS:
            self.hidden = max(0, self.hidden - 1)
        elif tag == "head":
            self.in_head = False
        elif tag == "title":
            self.in_title = False
        if tag not in _INLINE_TAGS:
            self.chunks.append(" ")

    def handle_data(self, data):
        if self.hidden:
            return
        if self.in_head and not self.in_title:
            return
        self.chunks.append(data)


def visible_text(html: Union[bytes, str]) -> str:
    """Human-visible text of an HTML document, whitespace collapsed."""
    renderer = _TextRenderer()
    renderer.feed(decode_body(html))
    renderer.close()
    return re.sub(r"\s+", " ", "".join(renderer.chunks)).strip()


@dataclass
class MarkedDocument:
    tokens: list[str]
    marker: Optional[str] = None
    anchor_spans: list[tuple[int, int]] = field(default_factory=list)
    text: str = ""


def render(marked_html: Union[bytes, str], marker: Optional[str] = None) -> MarkedDocument:
    """Render to tokens and locate marker-delimited anchor spans.

    Spans are half-open ``(start, end)`` token indices. Marker words are
    consumed here and never reach the token list.
    """
    text = visible_text(marked_html)
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    open_at: Optional[int] = None
    for word in split_words(text):
        if marker is not None and word == marker:
            if open_at is None:
                open_at = len(tokens)
            else:
                spans.append((open_at, len(tokens)))
                open_at = None
        elif keep_word(word):
            tokens.append(word)
    if open_at is not None:
        spans.append((open_at, len(tokens)))
    if marker is not None:
        text = re.sub(r"\s+", " ", text.replace(marker, " ")).strip()
    return MarkedDocument(tokens, marker, spans, text)


def render_for_target(html: Union[bytes, str], target: UriLike, base: Optional[UriLike] = None) -> MarkedDocument:
    return render(mark_links(html, target, base), marker_for(target))


def extract_radius(doc: MarkedDocument, radius: str) -> list[str]:
    """Tokens drawn from the document at the given radius.

    Windows around different anchors are merged by token position, so a
    token is taken at most once even when two windows overlap.
    """
    n = window_size(radius)
    if n is None:
        return list(doc.tokens)
    keep = [False] * len(doc.tokens)
    for start, end in doc.anchor_spans:
        for i in range(max(0, start - n), min(len(doc.tokens), end + n)):
            keep[i] = True
    return [tok for tok, k in zip(doc.tokens, keep) if k]


@dataclass
class AnchorContext:
    anchor_tokens: list[str]
    before_tokens: list[str]
    after_tokens: list[str]


def anchor_contexts(doc: MarkedDocument, n: int = 10) -> list[AnchorContext]:
    """Per-anchor view: anchor tokens with up to *n* neighbors on each side."""
    return [
        AnchorContext(
            doc.tokens[start:end],
            doc.tokens[max(0, start - n):start],
            doc.tokens[end:end + n],
        )
        for start, end in doc.anchor_spans
    ]

"""TFIDF lexical signatures from backlink text.

TF counts a term across the pooled backlink text, IDF is
``log10(d_total / max(df, 1))`` and the signature is the ten terms with the
highest TF x IDF, ties going to the higher TF and then the smaller token.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Protocol, Union

from .neighborhood import RANK_LIMITS, LinkNeighborhood
from .render import RADII, NoLinkFoundError, extract_radius, render_for_target, window_size
from .tokens import tokenize
from .uri import CanonicalUri, UriLike, canonicalize

SWEEP_SIZES = (1, 2, 3, 4, 5, 6, 7, 10)
STORED_TERMS = 10

__all__ = [
    "tokenize", "SignatureConfig", "LexicalSignature", "EmptyPoolError",
    "term_frequency", "inverse_document_frequency", "compute_signature",
    "signature_from_pool", "pool_tokens", "truncate", "load_stopwords",
    "default_stopwords",
]


class EmptyPoolError(ValueError):
    """No passing backlink page contributed a usable term."""


class DfSource(Protocol):
    def df(self, term: str) -> int: ...


@dataclass(frozen=True)
class SignatureConfig:
    depth: int = 1
    rank_limit: int = 10
    radius: str = "anchor"
    size: int = 4

    def __post_init__(self):
        if self.depth not in (1, 2):
            raise ValueError(f"depth must be 1 or 2, got {self.depth}")
        if self.rank_limit not in RANK_LIMITS:
            raise ValueError(f"rank_limit must be one of {RANK_LIMITS}, got {self.rank_limit}")
        window_size(self.radius)
        if not 1 <= self.size <= STORED_TERMS:
            raise ValueError(f"size must be within 1..{STORED_TERMS}, got {self.size}")

    def label(self) -> str:
        return f"{self.depth}-{self.radius}-{self.rank_limit}-{self.size}"


@dataclass(frozen=True)
class LexicalSignature:
    target: CanonicalUri
    config: SignatureConfig
    terms: tuple[tuple[str, float], ...]

    @property
    def tokens(self) -> list[str]:
        return [t for t, _ in self.terms]

    def __len__(self) -> int:
        return len(self.terms)


# --------------------------------------------------------------------------
# stop words


def load_stopwords(path: Union[str, Path]) -> frozenset[str]:
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    with resources.as_file(resources.files("linksig").joinpath("data/stopwords.txt")) as p:
        return load_stopwords(p)


# --------------------------------------------------------------------------
# TF, IDF


def term_frequency(term: str, texts: Iterable[str]) -> int:
    return sum(1 for t in texts if t == term)


def _idf(d_total: float, df: int, log_base: float = 10) -> float:
    ratio = d_total / max(df, 1)
    if ratio <= 1:
        return 0.0
    return math.log10(ratio) if log_base == 10 else math.log(ratio) / math.log(log_base)


def inverse_document_frequency(term: str, df_source: DfSource, d_total: float, log_base: float = 10) -> float:
    if d_total < 1:
        raise ValueError("d_total must be >= 1")
    return _idf(d_total, df_source.df(term), log_base)


@dataclass(frozen=True)
class _Scored:
    token: str
    tf: int
    df: int
    value: float
    ratio: Fraction


def _cmp(a: _Scored, b: _Scored) -> int:
    """Order: TFIDF descending, then TF descending, then token ascending.

    Near-equal floats are settled exactly by comparing ratio**tf, which is
    monotone in tf*log(ratio) for every log base.
    """
    if a.tf != b.tf or a.ratio != b.ratio:
        scale = max(abs(a.value), abs(b.value))
        if abs(a.value - b.value) > 1e-9 * scale:
            return -1 if a.value > b.value else 1
        lhs, rhs = a.ratio ** a.tf, b.ratio ** b.tf
        if lhs != rhs:
            return -1 if lhs > rhs else 1
    if a.tf != b.tf:
        return -1 if a.tf > b.tf else 1
    return (a.token > b.token) - (a.token < b.token)


def signature_from_pool(
    pool: Iterable[str],
    df_source: DfSource,
    d_total: float,
    stopwords: Optional[Iterable[str]] = None,
    log_base: float = 10,
    keep: int = STORED_TERMS,
) -> list[tuple[str, float]]:
    """Top-*keep* (term, tfidf) pairs from a pooled token multiset."""
    stop = default_stopwords() if stopwords is None else frozenset(stopwords)
    counts = Counter(t for t in pool if t not in stop)
    if not counts:
        raise EmptyPoolError("no terms left after stop word removal")
    exact_total = Fraction(d_total)
    scored = []
    for token, tf in counts.items():
        df = df_source.df(token)
        ratio = max(exact_total / max(df, 1), Fraction(1))
        scored.append(_Scored(token, tf, df, tf * _idf(d_total, df, log_base), ratio))
    scored.sort(key=cmp_to_key(_cmp))
    return [(s.token, s.value) for s in scored[:keep]]


def pool_tokens(hood: LinkNeighborhood, radius: str, depth: Optional[int] = None) -> list[str]:
    """Multiset union of the radius extraction over every usable edge.

    Each (source page, linked page) edge contributes once. Pages failing
    the filters or lacking a textual link to the linked page are skipped.
    """
    depth = hood.depth if depth is None else depth
    pool: list[str] = []
    seen = set()
    for edge in hood.edges:
        if edge.level > depth or (edge.source, edge.target) in seen:
            continue
        seen.add((edge.source, edge.target))
        if not hood.passing(edge.source):
            continue
        try:
            doc = render_for_target(hood.pages[edge.source].body, edge.target, base=edge.source)
        except NoLinkFoundError:
            continue
        pool += extract_radius(doc, radius)
    return pool


def compute_signature(
    target: UriLike,
    hood: LinkNeighborhood,
    config: SignatureConfig,
    df_source: DfSource,
    d_total: float,
    stopwords: Optional[Iterable[str]] = None,
    log_base: float = 10,
) -> LexicalSignature:
    """The stored ten-term signature; truncate() it to ``config.size``."""
    target = canonicalize(target)
    if hood.depth < config.depth:
        raise ValueError(f"neighborhood depth {hood.depth} < configured depth {config.depth}")
    pool = pool_tokens(hood, config.radius, config.depth)
    if not pool:
        raise EmptyPoolError(f"no backlink text for {target}")
    terms = signature_from_pool(pool, df_source, d_total, stopwords, log_base)
    return LexicalSignature(target, config, tuple(terms))


def truncate(signature: LexicalSignature, k: int) -> LexicalSignature:
    if k < 1:
        raise ValueError("k must be positive")
    if k > len(signature.terms):
        raise ValueError(f"signature has {len(signature.terms)} terms, cannot take {k}")
    config = signature.config
    if config.size != k:
        config = SignatureConfig(config.depth, config.rank_limit, config.radius, k)
    return LexicalSignature(signature.target, config, signature.terms[:k])

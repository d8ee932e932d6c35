"""Character-trigram language identification.

A small bundled model covering English and the non-English languages most
often seen on backlink pages. Anything with a ``classify(text)`` method
returning a LanguageDistribution can replace it.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Protocol

from .tokens import split_words

ENGLISH = "en"
# Sharpens per-trigram mean log-likelihood differences into a distribution.
SHARPNESS = 8.0
SMOOTHING = 0.5


@dataclass(frozen=True)
class LanguageDistribution:
    guesses: tuple[tuple[str, float], ...]

    def __post_init__(self):
        for _, p in self.guesses:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"likelihood out of range: {p}")
        if any(a[1] < b[1] for a, b in zip(self.guesses, self.guesses[1:])):
            raise ValueError("guesses must be sorted by descending likelihood")

    @property
    def top(self) -> tuple[str, float]:
        return self.guesses[0]

    def likelihood(self, lang: str) -> float:
        for code, p in self.guesses:
            if code == lang:
                return p
        return 0.0

    @classmethod
    def from_scores(cls, scores: dict[str, float]) -> "LanguageDistribution":
        ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0] != ENGLISH, kv[0]))
        return cls(tuple(ordered))


class LanguageClassifier(Protocol):
    def classify(self, text: str) -> LanguageDistribution: ...


def trigrams(text: str) -> Counter:
    grams: Counter = Counter()
    for word in split_words(text):
        if word.isdigit():
            continue
        padded = f"_{word}_"
        for i in range(len(padded) - 2):
            grams[padded[i:i + 3]] += 1
    return grams


def _load_samples() -> dict[str, str]:
    raw = resources.files("linksig").joinpath("data/lang_profiles.txt").read_text(encoding="utf-8")
    samples: dict[str, list[str]] = {}
    current = None
    for line in raw.splitlines():
        if line.startswith("## "):
            current = line[3:].strip()
            samples[current] = []
        elif current is not None:
            samples[current].append(line)
    return {lang: "\n".join(lines) for lang, lines in samples.items()}


class TrigramClassifier:
    def __init__(self, samples: dict[str, str], sharpness: float = SHARPNESS):
        self.sharpness = sharpness
        self.profiles = {lang: trigrams(text) for lang, text in samples.items()}
        vocab = set()
        for grams in self.profiles.values():
            vocab.update(grams)
        self._vocab_size = len(vocab) + 1
        self._totals = {lang: sum(g.values()) for lang, g in self.profiles.items()}

    def _logp(self, lang: str, gram: str) -> float:
        count = self.profiles[lang].get(gram, 0)
        return math.log((count + SMOOTHING) / (self._totals[lang] + SMOOTHING * self._vocab_size))

    def classify(self, text: str) -> LanguageDistribution:
        grams = trigrams(text)
        n = sum(grams.values())
        if n == 0:
            # nothing to judge; every language equally likely, English listed first
            return LanguageDistribution.from_scores({lang: 1.0 / len(self.profiles) for lang in self.profiles})
        mean_logp = {
            lang: sum(c * self._logp(lang, g) for g, c in grams.items()) / n
            for lang in self.profiles
        }
        best = max(mean_logp.values())
        weights = {lang: math.exp(self.sharpness * (lp - best)) for lang, lp in mean_logp.items()}
        total = sum(weights.values())
        return LanguageDistribution.from_scores({lang: w / total for lang, w in weights.items()})


@lru_cache(maxsize=1)
def default_classifier() -> TrigramClassifier:
    return TrigramClassifier(_load_samples())

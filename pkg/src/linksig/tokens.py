from __future__ import annotations

import re

_WORD_RE = re.compile(r"[^\W_]+")


def split_words(text: str) -> list[str]:
    """Lowercased alphanumeric runs, unfiltered."""
    return _WORD_RE.findall(text.lower())


def keep_word(word: str) -> bool:
    return len(word) >= 2 and not word.isdigit()


def tokenize(text: str) -> list[str]:
    """Split on non-alphanumerics, lowercase, drop 1-char and all-digit words.

    Multiplicity and order are preserved.
    """
    return [w for w in split_words(text) if keep_word(w)]

"""Deterministic synthetic web corpora for offline runs.

Each designated target has a handful of backlink pages whose anchor text
carries words found nowhere else in the corpus except the target page
itself, plus second-level pages linking to those backlinks. A few extra
backlinks per target are deliberately defective (wrong language, PDF,
error status, image-map only) so the filters have something to do.

With ``noise=True`` every good backlink also carries rare page-specific
words far away from its anchor, which pollutes whole-page signatures
without touching anchor text.
"""
from __future__ import annotations

import random
from html import escape
from typing import Optional

from .corpus import OfflineCorpus, PageRecord
from .lexsig import default_stopwords
from .uri import canonicalize

FILLER = [
    "Our volunteers spent the whole summer cleaning the trails near the river and planting new trees along the banks.",
    "The library opens early on weekdays and offers free classes for adults who want to learn computer skills.",
    "Many readers wrote to us asking for more information about the history of the old railway station.",
    "This season the garden club is growing tomatoes, beans and several kinds of flowers behind the school.",
    "We collected photographs, letters and newspaper articles that describe daily life in the valley a century ago.",
    "Students from the university helped the museum staff catalog thousands of objects stored in the basement.",
    "The weather was perfect for the annual festival, and families came from every town in the county.",
    "If you have questions about membership, please send a message to the office and we will reply quickly.",
    "Local farmers bring fresh vegetables, bread and cheese to the market square every Saturday morning.",
    "The committee published a short report describing the budget, the new projects and the plans for next year.",
    "Children enjoyed the science workshop where they built small bridges from paper and measured their strength.",
    "Several neighbors organized a meeting to discuss traffic safety on the main road near the playground.",
    "The choir practiced every evening for the concert and sold all the tickets within two days.",
    "Visitors can walk through the restored mill and watch how flour was made using the power of water.",
    "The newsletter includes recipes, book reviews, interviews with members and a calendar of upcoming events.",
    "Heavy rain flooded the lower fields last spring, so the council agreed to repair the old drainage ditches.",
    "Thank you to everyone who donated books, toys and clothes for the winter charity drive.",
    "Teachers and parents worked together to paint the classrooms and fix the broken windows before school started.",
    "The hiking group meets at the north gate of the park and usually walks for about three hours.",
    "A new exhibit about local artists opened this month and will stay in the gallery until the end of autumn.",
]

GERMAN = (
    "Unsere Freiwilligen haben den ganzen Sommer damit verbracht, die Wege am Fluss zu reinigen und neue Bäume "
    "zu pflanzen. Die Bibliothek öffnet an Werktagen früh und bietet kostenlose Kurse für Erwachsene an, die "
    "den Umgang mit dem Computer lernen möchten. Viele Leser haben uns geschrieben und nach weiteren "
    "Informationen über die Geschichte des alten Bahnhofs gefragt. Die Bauern bringen jeden Samstag frisches "
    "Gemüse, Brot und Käse auf den Marktplatz."
)

_ONSETS = ["b", "br", "d", "dr", "f", "g", "gl", "k", "kr", "l", "m", "n", "p", "pl", "qu", "r", "s", "st", "t", "tr", "v", "z", "zh"]
_VOWELS = ["a", "e", "i", "o", "u", "ae", "io", "ou"]
_CODAS = ["", "n", "r", "x", "sk", "th", "lt", "m"]


def _pseudo_word(rng: random.Random, syllables: int = 3) -> str:
    return "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(syllables)) + rng.choice(_CODAS)


class _WordMint:
    def __init__(self, rng: random.Random):
        self.rng = rng
        used = set(default_stopwords())
        for sentence in FILLER + [GERMAN]:
            used.update(w.strip(".,").lower() for w in sentence.split())
        self.used = used

    def __call__(self) -> str:
        while True:
            word = _pseudo_word(self.rng, self.rng.choice((2, 3)))
            if word not in self.used:
                self.used.add(word)
                return word


def _filler(rng: random.Random, n: int) -> str:
    return " ".join(rng.sample(FILLER, n))


def _html(title: str, *paragraphs: str) -> bytes:
    body = "\n".join(f"<p>{p}</p>" for p in paragraphs)
    return (
        "<!DOCTYPE html>\n<html><head><title>" + escape(title) + "</title>"
        "<style>p { margin: 1em; }</style><script>var tracker = 'x';</script></head>\n"
        "<body>\n" + body + "\n</body></html>\n"
    ).encode("utf-8")


def _link(href: str, text: str) -> str:
    return f'<a href="{escape(href)}">{escape(text)}</a>'


HTML = [("Content-Type", "text/html; charset=utf-8")]


def synthetic_corpus(
    n_targets: int = 20,
    backlinks_per_target: int = 4,
    level2_per_backlink: int = 1,
    n_distractors: int = 10,
    noise: bool = False,
    defects: bool = True,
    seed: int = 2010,
) -> OfflineCorpus:
    rng = random.Random(seed)
    mint = _WordMint(rng)
    pages: list[PageRecord] = []
    edges: list[tuple[str, str]] = []
    targets: list[str] = []

    def add(uri: str, body: bytes, status=200, headers=None):
        pages.append(PageRecord(canonicalize(uri), status, list(headers or HTML), body))

    for t in range(n_targets):
        key = mint()
        topic = [mint() for _ in range(3)]
        target = f"http://site{t:02d}.example.org/articles/{key}.html"
        targets.append(target)
        # the target repeats its own vocabulary more than any backlink does
        words = " ".join([key] * 4 + topic * 3)
        add(target, _html(f"{key} {topic[0]}", _filler(rng, 3), words, _filler(rng, 2)))

        for b in range(backlinks_per_target):
            uri = f"http://blog{t:02d}{b}.example.net/posts/{t * 10 + b}.html"
            anchor = " ".join([key] + rng.sample(topic, 3))
            before = _filler(rng, 2)
            after = _filler(rng, 2)
            paras = [before + " Read about " + _link(target, anchor) + " today.", after]
            if noise:
                junk = [mint() for _ in range(3)]
                paras += [_filler(rng, 2), " ".join(junk * 3)]
            add(uri, _html(f"Post {t}-{b}", *paras))
            edges.append((uri, target))

            for c in range(level2_per_backlink):
                l2 = f"http://forum{t:02d}{b}{c}.example.com/thread/{t}/{b}/{c}"
                add(l2, _html("Forum thread", _filler(rng, 2) + " See " + _link(uri, "this post") + ".", _filler(rng, 2)))
                edges.append((l2, uri))

        if defects and t % 4 == 0:
            anchor = " ".join([key] + topic)
            bad = [
                (f"http://de{t:02d}.example.de/seite.html",
                 _html("Seite", GERMAN + " " + _link(target, anchor)), 200, HTML),
                (f"http://docs{t:02d}.example.net/report.pdf",
                 b"%PDF-1.4\n% " + anchor.encode() + b"\n%%EOF\n", 200, [("Content-Type", "application/pdf")]),
                (f"http://gone{t:02d}.example.net/old.html",
                 _html("Not Found", "The requested page was not found."), 404, HTML),
                (f"http://map{t:02d}.example.net/index.html",
                 _html("Map", _filler(rng, 3),
                       f'<map name="m"><area shape="rect" coords="0,0,9,9" href="{target}"></map>'),
                 200, HTML),
            ]
            for uri, body, status, headers in bad:
                add(uri, body, status, headers)
                edges.append((uri, target))

    for d in range(n_distractors):
        add(f"http://news{d:02d}.example.com/story/{d}.html", _html(f"Story {d}", _filler(rng, 4)))

    return OfflineCorpus(pages, edges, len(pages), targets)

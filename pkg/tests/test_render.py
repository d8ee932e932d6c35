import re

import pytest
from hypothesis import given, strategies as st

from linksig.render import (
    ANCHOR,
    ANCHOR_5,
    ANCHOR_10,
    RADII,
    WHOLE_PAGE,
    NoLinkFoundError,
    anchor_contexts,
    extract_radius,
    mark_links,
    marker_for,
    render,
    render_for_target,
    window_size,
)

T = "http://example.com/target"
M = marker_for(T)


def test_marker_shape():
    assert re.fullmatch(r"[0-9a-f]{32}", M)
    assert marker_for("HTTP://Example.com:80/target#x") == M


@pytest.mark.parametrize("html, tokens", [
    ("<p>Hello <b>world</b></p>", ["hello", "world"]),
    ("<script>var x=1;</script>visible", ["visible"]),
    ("<html><head><title>Title here</title><meta name=x content=y><style>p{}</style></head><body>Body</body></html>",
     ["title", "here", "body"]),
    ("<p>fish &amp; chips &eacute;t&eacute;</p>", ["fish", "chips", "été"]),
    ("<p>one<!-- hidden words --> two</p>", ["one", "two"]),
    ("<div>left</div><div>right</div>", ["left", "right"]),
    ("<p>unclosed <b>tags <i>everywhere", ["unclosed", "tags", "everywhere"]),
])
def test_render_tokens(html, tokens):
    assert render(html).tokens == tokens


def test_one_link_two_markers():
    marked = mark_links(f'<p>see <a href="{T}">the report</a> now</p>', T).decode()
    assert marked.count(M) == 2
    doc = render(marked, M)
    assert doc.tokens == ["see", "the", "report", "now"]
    assert doc.anchor_spans == [(1, 3)]


def test_image_map_only():
    html = f'<img usemap="#m"><map name="m"><area href="{T}" coords="0,0,1,1"></map><p>text</p>'
    with pytest.raises(NoLinkFoundError):
        mark_links(html, T)


def test_anchor_inside_map_ignored():
    html = f'<map name="m"><a href="{T}">map link</a></map><p><a href="{T}">real link</a></p>'
    doc = render_for_target(html, T)
    assert [doc.tokens[s:e] for s, e in doc.anchor_spans] == [["real", "link"]]


def test_three_links():
    html = "".join(f'<p>para {w} <a href="{T}">{w} link</a> end</p>' for w in ("aa", "bb", "cc"))
    doc = render_for_target(html, T)
    assert len(doc.anchor_spans) == 3
    assert [doc.tokens[s:e] for s, e in doc.anchor_spans] == [["aa", "link"], ["bb", "link"], ["cc", "link"]]


def test_relative_and_variant_hrefs():
    html = ('<a href="/target">one</a> <a href="http://EXAMPLE.com:80/target/#frag">two</a> '
            '<a href="/target?x=1">no</a> <a href="/other">no</a>')
    doc = render_for_target(html, T, base="http://example.com/blog/post")
    assert [doc.tokens[s:e] for s, e in doc.anchor_spans] == [["one"], ["two"]]


def test_no_link():
    with pytest.raises(NoLinkFoundError):
        mark_links('<a href="http://elsewhere.org/">x</a>', T)


def test_anchor_with_no_text():
    doc = render_for_target(f'<p>before <a href="{T}"><img src="x.png"></a> after</p>', T)
    assert doc.anchor_spans == [(1, 1)]
    assert extract_radius(doc, ANCHOR) == []
    assert extract_radius(doc, ANCHOR_5) == ["before", "after"]


FIXTURE = (
    "<p>one two three four five six archive of "
    f'<a href="{T}">climate data</a> portal seven eight nine ten eleven twelve thirteen</p>'
)


def test_radii():
    doc = render_for_target(FIXTURE, T)
    assert extract_radius(doc, ANCHOR) == ["climate", "data"]
    assert extract_radius(doc, ANCHOR_5) == [
        "four", "five", "six", "archive", "of", "climate", "data", "portal", "seven", "eight", "nine", "ten"]
    assert extract_radius(doc, ANCHOR_10) == doc.tokens
    assert extract_radius(doc, WHOLE_PAGE) == doc.tokens


def test_anchor_contexts():
    doc = render_for_target(FIXTURE, T)
    (ctx,) = anchor_contexts(doc)
    assert ctx.anchor_tokens == ["climate", "data"]
    assert ctx.before_tokens[-1] == "of" and len(ctx.before_tokens) == 8
    assert ctx.after_tokens[0] == "portal" and len(ctx.after_tokens) == 8
    assert len(anchor_contexts(doc, 5)[0].before_tokens) == 5


def test_overlapping_windows_counted_once():
    html = f'<p>alpha <a href="{T}">aa</a> mid <a href="{T}">bb</a> omega</p>'
    doc = render_for_target(html, T)
    assert extract_radius(doc, ANCHOR_5) == ["alpha", "aa", "mid", "bb", "omega"]


def test_window_size():
    assert [window_size(r) for r in RADII] == [0, 5, 10, None]
    assert window_size("anchor3") == 3
    with pytest.raises(ValueError):
        window_size("near")


def test_cp1252_and_truncated_utf8():
    assert render("café au lait".encode("cp1252")).tokens == ["café", "au", "lait"]
    # a multibyte character cut by truncation is dropped, the rest stays UTF-8
    assert render("<p>naïve été".encode("utf-8")[:-1]).tokens == ["naïve", "ét"]


_word = st.sampled_from(["alpha", "beta", "gamma", "delta", "river", "stone", "cloud", "paper", "x9"])


@st.composite
def documents(draw):
    parts = []
    for _ in range(draw(st.integers(1, 6))):
        parts.append("<p>" + " ".join(draw(st.lists(_word, max_size=15))) + "</p>")
        if draw(st.booleans()):
            parts.append(f'<a href="{T}">' + " ".join(draw(st.lists(_word, max_size=3))) + "</a>")
    parts.append(f'<a href="{T}">last</a>')
    if draw(st.booleans()):
        parts.append(f"<span>{M}</span>")  # a page that happens to contain the marker text
    return "".join(parts)


@given(documents())
def test_radius_monotone_and_marker_free(html):
    doc = render_for_target(html, T)
    bags = [extract_radius(doc, r) for r in RADII]
    for small, big in zip(bags, bags[1:]):
        rest = list(big)
        for tok in small:
            rest.remove(tok)  # raises if not a sub-multiset
    assert all(M not in bag for bag in bags)
    assert render_for_target(html, T) == doc

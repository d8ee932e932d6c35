"""
Anchor text and its neighbors
=============================

Mark the links to a target inside a page, then pull terms from growing
windows around them.
"""
from linksig import RADII, extract_radius, render_for_target

target = "http://example.com/climate"
html = b"""
<html><head><title>Weekly links</title><script>track()</script></head>
<body>
<p>This week we read a long report on glaciers, then found the
<a href="/climate">climate data portal</a> run by the national archive.
Elsewhere, a recipe for bread and a story about trains.</p>
<p>See also <a href="http://example.com/climate/#maps">their maps</a>.</p>
</body></html>
"""

# relative links resolve against the page's own address
doc = render_for_target(html, target, base="http://example.com/links.html")
print("spans:", doc.anchor_spans)

for radius in RADII:
    print(f"{radius:9s}", " ".join(extract_radius(doc, radius)))

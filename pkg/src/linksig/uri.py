"""URI canonicalization.

Every page and graph node is identified by its canonical form: lowercase
scheme and host, no ``:80`` on http, no fragment, no trailing slash.
Everything else (path case, query order, percent-encoding) is preserved.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

_URI_RE = re.compile(r"^([A-Za-z][A-Za-z0-9+.\-]*)://([^/?#]*)(.*)$", re.DOTALL)
_PORT_RE = re.compile(r"^(.*):(\d+)$")


class MalformedURIError(ValueError):
    pass


@dataclass(frozen=True, order=False)
class CanonicalUri:
    scheme: str
    host: str
    port: Optional[int] = None
    path: str = ""
    query: Optional[str] = None

    def serialize(self) -> str:
        out = f"{self.scheme}://{self.host}"
        if self.port is not None:
            out += f":{self.port}"
        out += self.path
        if self.query is not None:
            out += "?" + self.query
        return out

    def __str__(self) -> str:
        return self.serialize()

    def __lt__(self, other: "CanonicalUri") -> bool:
        return self.serialize() < other.serialize()


UriLike = Union[str, CanonicalUri]


def canonicalize(raw: UriLike) -> CanonicalUri:
    """Canonicalize an absolute URI.

    Rules, applied in order: downcase scheme and authority, drop ``:80``
    for http, drop the fragment, drop trailing slashes.
    """
    if isinstance(raw, CanonicalUri):
        return raw
    m = _URI_RE.match(raw.strip())
    if m is None:
        raise MalformedURIError(f"not an absolute URI: {raw!r}")
    scheme, authority, rest = m.group(1).lower(), m.group(2).lower(), m.group(3)
    port = None
    pm = _PORT_RE.match(authority)
    if pm:
        authority, port = pm.group(1), int(pm.group(2))
        if scheme == "http" and port == 80:
            port = None
    if not authority:
        raise MalformedURIError(f"URI has no host: {raw!r}")

    rest = rest.split("#", 1)[0]
    # all trailing slashes, not just one, or a second pass would change the result
    rest = rest.rstrip("/")
    if "?" in rest:
        path, query = rest.split("?", 1)
    else:
        path, query = rest, None
    return CanonicalUri(scheme, authority, port, path, query)


def canonical_str(raw: UriLike) -> str:
    return canonicalize(raw).serialize()


def uri_equal(a: CanonicalUri, b: CanonicalUri) -> bool:
    return a.serialize() == b.serialize()

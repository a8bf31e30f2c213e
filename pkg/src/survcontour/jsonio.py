"""Canonical JSON encoding shared by the CLI and the HTTP service.

One encoder everywhere keeps payloads byte-identical between a direct
library call, a CLI output file and a service response.
"""
from __future__ import annotations

import json


def dumps(payload) -> str:
    """Compact, NaN-free, insertion-ordered JSON."""
    return json.dumps(payload, separators=(",", ":"), allow_nan=False)


def dumps_bytes(payload) -> bytes:
    return dumps(payload).encode("utf-8")


def loads(text):
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    return json.loads(text)

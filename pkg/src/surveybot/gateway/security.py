"""Webhook credential checks: subscription handshake and payload signatures."""

from __future__ import annotations

import hashlib
import hmac
from typing import Mapping


def verify_subscription(query: Mapping[str, str], verify_token: str) -> str | None:
    """Webhook handshake: return the challenge to echo, or None to reject.

    Echo happens only when mode is "subscribe", the presented token equals
    the configured one, and a challenge is present.
    """
    if query.get("hub.mode") != "subscribe":
        return None
    presented = query.get("hub.verify_token")
    if presented is None or not hmac.compare_digest(presented, verify_token):
        return None
    challenge = query.get("hub.challenge")
    if not challenge:
        return None
    return challenge


def verify_signature(
    raw_body: bytes, signature_header: str | None, app_secret: str | bytes
) -> bool:
    """ACCEPT iff the header carries the body's HMAC-SHA1 under our secret.

    Header format is "sha1=" + lowercase hex digest; anything else is
    malformed and rejected. Comparison is constant-time.
    """
    if not signature_header or not signature_header.startswith("sha1="):
        return False
    if isinstance(app_secret, str):
        app_secret = app_secret.encode("utf-8")
    provided = signature_header[len("sha1=") :].strip().lower()
    expected = hmac.new(app_secret, raw_body, hashlib.sha1).hexdigest()
    return hmac.compare_digest(expected, provided)

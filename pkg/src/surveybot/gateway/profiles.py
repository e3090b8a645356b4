"""Respondent profile attributes and the providers that fetch them.

Profile data is best-effort decoration: a provider failure yields empty
attributes and the conversation proceeds. Absent attributes stay None and
are stored as nulls, never fabricated.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Protocol

import httpx

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProfileAttributes:
    first_name: str | None = None
    last_name: str | None = None
    locale: str | None = None
    hometown: str | None = None
    timezone: float | None = None
    birthday: str | None = None
    gender: str | None = None
    profile_pic: str | None = None


EMPTY_PROFILE = ProfileAttributes()


def parse_timezone(raw: object) -> float | None:
    """UTC offsets arrive as numbers or signed strings like "+2.0"."""
    if raw is None:
        return None
    if isinstance(raw, bool):
        return None
    if isinstance(raw, (int, float)):
        return float(raw)
    try:
        return float(str(raw).strip())
    except ValueError:
        return None


def profile_from_mapping(raw: dict) -> ProfileAttributes:
    known = {f.name for f in fields(ProfileAttributes)}
    kwargs = {k: v for k, v in raw.items() if k in known and v is not None}
    if "timezone" in kwargs:
        kwargs["timezone"] = parse_timezone(kwargs["timezone"])
    return ProfileAttributes(**kwargs)


class ProfileProvider(Protocol):
    def fetch_profile(self, user_id: str) -> ProfileAttributes: ...


class MockProfileProvider:
    """Fixture-backed provider for tests, the simulator, and the chat UI."""

    def __init__(
        self,
        fixtures: dict[str, ProfileAttributes] | None = None,
        default: ProfileAttributes = EMPTY_PROFILE,
    ) -> None:
        self.fixtures = dict(fixtures or {})
        self.default = default

    def fetch_profile(self, user_id: str) -> ProfileAttributes:
        return self.fixtures.get(user_id, self.default)

    @classmethod
    def from_file(cls, path: str | Path) -> "MockProfileProvider":
        """Load a {user_id: {attribute: value}} JSON fixture file."""
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        fixtures = {user_id: profile_from_mapping(entry) for user_id, entry in raw.items()}
        return cls(fixtures)


class GraphProfileProvider:
    """HTTP provider against a Graph-style user endpoint.

    Any transport or payload problem degrades to empty attributes; profile
    loss must never block the survey.
    """

    FIELDS = "first_name,last_name,locale,hometown,timezone,birthday,gender,profile_pic"

    def __init__(self, access_token: str, base_url: str, timeout: float = 5.0) -> None:
        self.access_token = access_token
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def fetch_profile(self, user_id: str) -> ProfileAttributes:
        try:
            response = httpx.get(
                f"{self.base_url}/{user_id}",
                params={"fields": self.FIELDS, "access_token": self.access_token},
                timeout=self.timeout,
            )
            response.raise_for_status()
            payload = response.json()
        except (httpx.HTTPError, ValueError) as exc:
            log.warning("profile fetch failed for %s: %s", user_id, exc)
            return EMPTY_PROFILE
        if not isinstance(payload, dict):
            log.warning("profile fetch for %s returned non-object payload", user_id)
            return EMPTY_PROFILE
        return profile_from_mapping(payload)

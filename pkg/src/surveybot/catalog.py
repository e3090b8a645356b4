"""Per-locale message catalogs with load-time completeness checking.

Each locale ships one ``key = value`` text file. All locales must expose the
identical key set with non-empty values; the engine only ever emits catalog
keys, so a complete catalog guarantees no mixed-language output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

SUPPORTED_LOCALES = ("pl", "uk", "en")


class CatalogError(Exception):
    """Raised for malformed catalog files or unknown keys."""


class UnknownKeyError(CatalogError):
    """Lookup of a key absent from a loaded catalog. Treated as fatal."""

    def __init__(self, key: str, locale: str):
        super().__init__(f"unknown catalog key {key!r} for locale {locale!r}")
        self.key = key
        self.locale = locale


def _unescape(value: str) -> str:
    return value.replace("\\n", "\n").replace("\\t", "\t")


def parse_catalog_text(text: str, source: str = "<string>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines skipped."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CatalogError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise CatalogError(f"{source}:{lineno}: empty key")
        if key in entries:
            raise CatalogError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = _unescape(value.strip())
    return entries


@dataclass
class Catalog:
    """Message catalog for one locale."""

    locale: str
    entries: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, path: Path, locale: str) -> "Catalog":
        return cls(locale=locale, entries=parse_catalog_text(path.read_text("utf-8"), str(path)))

    def resolve(self, key: str) -> str:
        """Return the text for ``key``; never falls back to another locale."""
        try:
            return self.entries[key]
        except KeyError:
            raise UnknownKeyError(key, self.locale) from None

    def render(self, key: str, **params) -> str:
        text = self.resolve(key)
        return text.format(**params) if params else text

    def keys(self) -> set[str]:
        return set(self.entries)


@dataclass
class Catalogs:
    """The bundle of all supported locales, validated together."""

    by_locale: dict[str, Catalog]

    @classmethod
    def load_dir(cls, directory: Path, locales=SUPPORTED_LOCALES) -> "Catalogs":
        loaded = {loc: Catalog.load(directory / f"catalog.{loc}.properties", loc) for loc in locales}
        return cls(by_locale=loaded)

    def get(self, locale: str) -> Catalog:
        try:
            return self.by_locale[locale]
        except KeyError:
            raise CatalogError(f"unsupported locale {locale!r}") from None

    def resolve(self, locale: str, key: str) -> str:
        return self.get(locale).resolve(key)

    def render(self, locale: str, key: str, **params) -> str:
        return self.get(locale).render(key, **params)

    def locales(self) -> list[str]:
        return list(self.by_locale)

    def has_key(self, locale: str, key: str) -> bool:
        cat = self.by_locale.get(locale)
        return cat is not None and key in cat.entries


def check_completeness(catalogs: Catalogs) -> list[tuple[str, str]]:
    """Return (locale, key) pairs missing or empty; empty list means complete.

    A key counts as missing for a locale when it is absent from that locale's
    file or its value is the empty string, measured against the union of all
    locales' key sets.
    """
    all_keys: set[str] = set()
    for cat in catalogs.by_locale.values():
        all_keys |= cat.keys()
    missing: list[tuple[str, str]] = []
    for locale, cat in catalogs.by_locale.items():
        for key in sorted(all_keys):
            if key not in cat.entries or cat.entries[key] == "":
                missing.append((locale, key))
    return missing

"""Flow and catalog loading with load-time validation.

A bad deployment should fail at startup with a precise location, not at
message time in front of a respondent. Error codes:

- SCHEMA_ERROR: wrong shape, type, or value in the flow file
- BAD_COUNT: a questionnaire has the wrong number of items
- MISSING_TRANSLATION: a referenced catalog key is absent or empty somewhere
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import yaml

from .catalog import Catalogs, check_completeness
from .questions import FlowDefinition, Instrument, Intent, QuestionKind, QuestionSpec
from .scoring import DEFAULT_TIPI_KEY, TRAITS, NormTable

DEFAULTS_DIR = Path(__file__).resolve().parent / "defaults"

EXPECTED_COUNTS = {"tipi": 10, "competency": 26, "sus": 10}

# Keys the engine emits unconditionally; question keys are checked separately.
REQUIRED_KEYS: tuple[str, ...] = (
    "greeting.trilingual",
    "language.prompt",
    "language.reprompt",
    "language.confirmed",
    "fallback.trilingual",
    "fallback.repeat",
    "survey.complete",
    "farewell.text",
    "reprompt.range",
    "reprompt.yes_no",
    "reprompt.number",
    "quickreply.yes",
    "quickreply.no",
    "tipi.intro",
    "comp.intro",
    "sus.intro",
    "employment.yes_words",
    "employment.no_words",
    "feedback.competency.intro",
    "feedback.competency.above",
    "feedback.competency.near",
    "feedback.competency.below",
    "feedback.tipi.intro",
) + tuple(
    f"feedback.tipi.{trait}.{band}"
    for trait in TRAITS
    for band in ("above", "near", "below")
)


class ConfigError(Exception):
    """Startup validation failure, located by a dotted path into the flow file."""

    def __init__(self, code: str, path: str, message: str) -> None:
        self.code = code
        self.path = path
        super().__init__(f"{code} at {path}: {message}")


@dataclass(frozen=True)
class BotConfig:
    flow: FlowDefinition
    catalogs: Catalogs
    intents: tuple[Intent, ...]
    norms: NormTable
    tipi_key: dict[str, tuple[int, int]]
    locales: tuple[str, ...]
    intent_threshold: float = 0.45
    send_delay_ms: int = 800
    chunk_limit: int = 400
    max_attempts: int = 3


def _require(mapping: Any, key: str, path: str) -> Any:
    if not isinstance(mapping, dict):
        raise ConfigError("SCHEMA_ERROR", path, f"expected a mapping, got {type(mapping).__name__}")
    if key not in mapping:
        raise ConfigError("SCHEMA_ERROR", f"{path}.{key}", "missing")
    return mapping[key]


def _as_int(value: Any, path: str, minimum: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError("SCHEMA_ERROR", path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError("SCHEMA_ERROR", path, f"must be >= {minimum}, got {value}")
    return value


def _as_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("SCHEMA_ERROR", path, f"expected a number, got {value!r}")
    return float(value)


def _as_key(value: Any, path: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise ConfigError("SCHEMA_ERROR", path, f"expected a catalog key, got {value!r}")
    return value.strip()


def _scale_bounds(raw: Any, path: str) -> tuple[int, int]:
    low = _as_int(_require(raw, "min", path), f"{path}.min")
    high = _as_int(_require(raw, "max", path), f"{path}.max")
    if not 1 <= low < high <= 7:
        raise ConfigError("SCHEMA_ERROR", path, f"bounds {low}..{high} outside 1..7")
    return low, high


def _gating(raw: Any, path: str) -> str | None:
    if raw is None:
        return None
    predicate = _as_key(raw, path)
    parts = [p.strip() for p in predicate.split("==")]
    if len(parts) != 2 or parts[0] != "employed" or parts[1] not in ("yes", "no"):
        raise ConfigError("SCHEMA_ERROR", path, f"unsupported predicate {predicate!r}")
    return f"{parts[0]} == {parts[1]}"


def _question_list(
    raw: Any, path: str, instrument: Instrument, prefix: str,
    bounds: tuple[int, int], reversed_positions: frozenset[int],
    gating: str | None = None,
) -> tuple[QuestionSpec, ...]:
    if not isinstance(raw, list):
        raise ConfigError("SCHEMA_ERROR", path, "expected a list of catalog keys")
    expected = EXPECTED_COUNTS[instrument.value]
    if len(raw) != expected:
        raise ConfigError("BAD_COUNT", path, f"expected {expected} questions, got {len(raw)}")
    questions = []
    for i, entry in enumerate(raw, start=1):
        text_key = _as_key(entry, f"{path}[{i - 1}]")
        questions.append(
            QuestionSpec(
                id=f"{prefix}.{i}",
                instrument=instrument,
                index=i,
                text_key=text_key,
                kind=QuestionKind.SCALE,
                scale_min=bounds[0],
                scale_max=bounds[1],
                reverse_scored=i in reversed_positions,
                gating=gating,
            )
        )
    return tuple(questions)


def _parse_tipi_key(raw: Any, reversed_positions: frozenset[int], path: str) -> dict[str, tuple[int, int]]:
    if raw is None:
        return dict(DEFAULT_TIPI_KEY)
    if not isinstance(raw, dict):
        raise ConfigError("SCHEMA_ERROR", path, "expected trait -> [direct, reversed] mapping")
    if set(raw) != set(TRAITS):
        raise ConfigError("SCHEMA_ERROR", path, f"traits must be exactly {sorted(TRAITS)}")
    key: dict[str, tuple[int, int]] = {}
    seen: set[int] = set()
    for trait, pair in raw.items():
        trait_path = f"{path}.{trait}"
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError("SCHEMA_ERROR", trait_path, "expected [direct, reversed]")
        direct = _as_int(pair[0], f"{trait_path}[0]", minimum=1)
        inverse = _as_int(pair[1], f"{trait_path}[1]", minimum=1)
        if direct > 10 or inverse > 10:
            raise ConfigError("SCHEMA_ERROR", trait_path, "positions must be within 1..10")
        if direct in reversed_positions:
            raise ConfigError("SCHEMA_ERROR", f"{trait_path}[0]", f"item {direct} is reverse scored")
        if inverse not in reversed_positions:
            raise ConfigError("SCHEMA_ERROR", f"{trait_path}[1]", f"item {inverse} is not reverse scored")
        key[trait] = (direct, inverse)
        seen.update(pair)
    if len(seen) != 10:
        raise ConfigError("SCHEMA_ERROR", path, "the ten items must each be used exactly once")
    return key


def _parse_meta(raw: Any, path: str) -> tuple[QuestionSpec, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("SCHEMA_ERROR", path, "expected a non-empty list")
    questions = []
    seen_ids: set[str] = set()
    for i, entry in enumerate(raw):
        entry_path = f"{path}[{i}]"
        short_id = _as_key(_require(entry, "id", entry_path), f"{entry_path}.id")
        if short_id in seen_ids:
            raise ConfigError("SCHEMA_ERROR", f"{entry_path}.id", f"duplicate id {short_id!r}")
        seen_ids.add(short_id)
        text_key = _as_key(_require(entry, "question", entry_path), f"{entry_path}.question")
        kind_raw = _require(entry, "kind", entry_path)
        try:
            kind = QuestionKind(kind_raw)
        except ValueError:
            raise ConfigError("SCHEMA_ERROR", f"{entry_path}.kind", f"unknown kind {kind_raw!r}")
        if kind is QuestionKind.YES_NO:
            low, high = 1, 2
        else:
            low = _as_int(_require(entry, "min", entry_path), f"{entry_path}.min")
            high = _as_int(_require(entry, "max", entry_path), f"{entry_path}.max")
            if kind is QuestionKind.SCALE and not 1 <= low < high <= 7:
                raise ConfigError("SCHEMA_ERROR", entry_path, f"bounds {low}..{high} outside 1..7")
            if low >= high:
                raise ConfigError("SCHEMA_ERROR", entry_path, f"empty range {low}..{high}")
        questions.append(
            QuestionSpec(
                id=f"meta.{short_id}",
                instrument=Instrument.META,
                index=i + 1,
                text_key=text_key,
                kind=kind,
                scale_min=low,
                scale_max=high,
            )
        )
    return tuple(questions)


KNOWN_HANDLERS = ("begin",)


def _parse_intents(raw: Any, locales: tuple[str, ...], path: str) -> tuple[Intent, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, dict):
        raise ConfigError("SCHEMA_ERROR", path, "expected intent -> definition mapping")
    intents = []
    for name, body in raw.items():
        intent_path = f"{path}.{name}"
        handler = body.get("handler", "begin") if isinstance(body, dict) else None
        per_locale = body.get("triggers") if isinstance(body, dict) else None
        if not isinstance(per_locale, dict):
            raise ConfigError("SCHEMA_ERROR", f"{intent_path}.triggers", "expected locale -> phrases")
        if handler not in KNOWN_HANDLERS:
            raise ConfigError("SCHEMA_ERROR", f"{intent_path}.handler", f"unknown handler {handler!r}")
        for locale in per_locale:
            if locale not in locales:
                raise ConfigError("SCHEMA_ERROR", f"{intent_path}.triggers.{locale}", "locale not declared")
        triggers: dict[str, tuple[str, ...]] = {}
        for locale in locales:
            # every locale needs at least one way to fire the intent
            phrases = per_locale.get(locale)
            if not isinstance(phrases, list) or not phrases:
                raise ConfigError(
                    "SCHEMA_ERROR", f"{intent_path}.triggers.{locale}", "expected a non-empty list"
                )
            cleaned = []
            for j, phrase in enumerate(phrases):
                if not isinstance(phrase, str) or not phrase.strip():
                    raise ConfigError(
                        "SCHEMA_ERROR", f"{intent_path}.triggers.{locale}[{j}]", f"bad phrase {phrase!r}"
                    )
                cleaned.append(phrase.strip().lower())
            triggers[locale] = tuple(cleaned)
        intents.append(Intent(name=name, triggers=triggers, handler=handler))
    return tuple(intents)


def _parse_norms(raw: Any, competency_count: int, path: str) -> NormTable:
    band_factor = _as_float(_require(raw, "band_factor", path), f"{path}.band_factor")
    if band_factor < 0:
        raise ConfigError("SCHEMA_ERROR", f"{path}.band_factor", "must be >= 0")
    traits_raw = _require(raw, "traits", path)
    if not isinstance(traits_raw, dict) or set(traits_raw) != set(TRAITS):
        raise ConfigError("SCHEMA_ERROR", f"{path}.traits", f"traits must be exactly {sorted(TRAITS)}")
    means: dict[str, float] = {}
    sds: dict[str, float] = {}
    for trait, entry in traits_raw.items():
        trait_path = f"{path}.traits.{trait}"
        means[trait] = _as_float(_require(entry, "mean", trait_path), f"{trait_path}.mean")
        sds[trait] = _as_float(_require(entry, "sd", trait_path), f"{trait_path}.sd")
        if sds[trait] <= 0:
            raise ConfigError("SCHEMA_ERROR", f"{trait_path}.sd", "must be > 0")
    comp_raw = _require(raw, "competency", path)
    default_mean = _as_float(
        _require(comp_raw, "default_mean", f"{path}.competency"), f"{path}.competency.default_mean"
    )
    overrides_raw = comp_raw.get("means") or {}
    if not isinstance(overrides_raw, dict):
        raise ConfigError("SCHEMA_ERROR", f"{path}.competency.means", "expected position -> mean")
    competency_means = [default_mean] * competency_count
    for position, value in overrides_raw.items():
        mean_path = f"{path}.competency.means.{position}"
        index = _as_int(position, mean_path, minimum=1)
        if index > competency_count:
            raise ConfigError("SCHEMA_ERROR", mean_path, f"position beyond {competency_count}")
        competency_means[index - 1] = _as_float(value, mean_path)
    return NormTable(
        trait_means=means,
        trait_sds=sds,
        competency_means=tuple(competency_means),
        band_factor=band_factor,
    )


def _check_translations(config_keys: list[str], catalogs: Catalogs) -> None:
    problems = check_completeness(catalogs)
    for locale in catalogs.locales():
        for key in config_keys:
            if not catalogs.has_key(locale, key):
                problems.append((locale, key))
    if problems:
        locale, key = sorted(set(problems))[0]
        raise ConfigError(
            "MISSING_TRANSLATION",
            f"catalog.{locale}",
            f"{len(set(problems))} missing or empty entries, first: {key!r}",
        )


def load_config(
    flow_path: str | Path | None = None,
    catalog_dir: str | Path | None = None,
) -> BotConfig:
    """Load and validate a flow file plus its catalog directory."""
    flow_path = Path(flow_path) if flow_path else DEFAULTS_DIR / "flow.yaml"
    catalog_dir = Path(catalog_dir) if catalog_dir else DEFAULTS_DIR

    try:
        raw = yaml.safe_load(flow_path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError("SCHEMA_ERROR", str(flow_path), f"not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("SCHEMA_ERROR", str(flow_path), "top level must be a mapping")

    locales_raw = _require(raw, "locales", "flow")
    if not isinstance(locales_raw, list) or not locales_raw:
        raise ConfigError("SCHEMA_ERROR", "flow.locales", "expected a non-empty list")
    locales = tuple(_as_key(loc, f"flow.locales[{i}]") for i, loc in enumerate(locales_raw))

    engine_raw = raw.get("engine") or {}
    threshold = _as_float(engine_raw.get("intent_threshold", 0.45), "flow.engine.intent_threshold")
    if not 0 < threshold <= 1:
        raise ConfigError("SCHEMA_ERROR", "flow.engine.intent_threshold", "must be in (0, 1]")
    send_delay_ms = _as_int(engine_raw.get("send_delay_ms", 800), "flow.engine.send_delay_ms", minimum=0)
    chunk_limit = _as_int(engine_raw.get("chunk_limit", 400), "flow.engine.chunk_limit", minimum=1)
    max_attempts = _as_int(engine_raw.get("max_attempts", 3), "flow.engine.max_attempts", minimum=1)

    intents = _parse_intents(raw.get("intents"), locales, "flow.intents")

    tipi_raw = _require(raw, "tipi", "flow")
    tipi_bounds = _scale_bounds(_require(tipi_raw, "scale", "flow.tipi"), "flow.tipi.scale")
    reversed_raw = _require(tipi_raw, "reversed", "flow.tipi")
    if not isinstance(reversed_raw, list):
        raise ConfigError("SCHEMA_ERROR", "flow.tipi.reversed", "expected a list of positions")
    reversed_positions = frozenset(
        _as_int(p, f"flow.tipi.reversed[{i}]", minimum=1) for i, p in enumerate(reversed_raw)
    )
    tipi_questions = _question_list(
        _require(tipi_raw, "questions", "flow.tipi"), "flow.tipi.questions",
        Instrument.TIPI, "tipi", tipi_bounds, reversed_positions,
    )
    tipi_key = _parse_tipi_key(tipi_raw.get("key"), reversed_positions, "flow.tipi.key")

    employment_raw = _require(raw, "employment", "flow")
    employment = QuestionSpec(
        id="employment",
        instrument=Instrument.META,
        index=1,
        text_key=_as_key(_require(employment_raw, "question", "flow.employment"), "flow.employment.question"),
        kind=QuestionKind.YES_NO,
        scale_min=1,
        scale_max=2,
    )

    comp_raw = _require(raw, "competency", "flow")
    comp_bounds = _scale_bounds(_require(comp_raw, "scale", "flow.competency"), "flow.competency.scale")
    comp_questions = _question_list(
        _require(comp_raw, "questions", "flow.competency"), "flow.competency.questions",
        Instrument.COMPETENCY, "comp", comp_bounds, frozenset(),
        gating=_gating(comp_raw.get("gating"), "flow.competency.gating"),
    )

    sus_raw = _require(raw, "sus", "flow")
    sus_bounds = _scale_bounds(_require(sus_raw, "scale", "flow.sus"), "flow.sus.scale")
    sus_questions = _question_list(
        _require(sus_raw, "questions", "flow.sus"), "flow.sus.questions",
        Instrument.SUS, "sus", sus_bounds, frozenset(),
    )

    meta_questions = _parse_meta(_require(raw, "meta", "flow"), "flow.meta")

    norms = _parse_norms(_require(raw, "norms", "flow"), len(comp_questions), "flow.norms")

    flow = FlowDefinition(
        tipi=tipi_questions,
        employment=employment,
        competency=comp_questions,
        sus=sus_questions,
        meta=meta_questions,
    )

    catalogs = Catalogs.load_dir(catalog_dir, locales)
    referenced = [q.text_key for q in flow.all_questions()]
    referenced += [f"comp.label.{q.index}" for q in comp_questions]
    referenced += list(REQUIRED_KEYS)
    _check_translations(referenced, catalogs)

    return BotConfig(
        flow=flow,
        catalogs=catalogs,
        intents=intents,
        norms=norms,
        tipi_key=tipi_key,
        locales=locales,
        intent_threshold=threshold,
        send_delay_ms=send_delay_ms,
        chunk_limit=chunk_limit,
        max_attempts=max_attempts,
    )


def load_default_config() -> BotConfig:
    return load_config()

"""Typed building blocks of the survey flow.

A flow is a fixed sequence of phases; the questionnaire phases carry ordered
question lists. Questions never store display text, only catalog keys, so a
single flow definition serves every locale.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping


class Instrument(enum.Enum):
    """Which questionnaire a question belongs to."""

    TIPI = "tipi"
    COMPETENCY = "competency"
    SUS = "sus"
    META = "meta"


class QuestionKind(enum.Enum):
    SCALE = "scale"      # closed numeric rating, bounds within 1..7
    YES_NO = "yes_no"    # word or 1/2 answer, stored as 1=yes 2=no
    NUMBER = "number"    # free integer with sanity bounds (age)


class Phase(enum.Enum):
    """Dialogue phases in traversal order."""

    GREETING = "greeting"
    LANGUAGE_SELECT = "language_select"
    TIPI = "tipi"
    EMPLOYMENT_GATE = "employment_gate"
    COMPETENCY = "competency"
    COMPETENCY_FEEDBACK = "competency_feedback"
    TIPI_FEEDBACK = "tipi_feedback"
    SUS = "sus"
    FAREWELL = "farewell"
    DONE = "done"


# COMPETENCY_FEEDBACK and TIPI_FEEDBACK are emission-only: the cursor passes
# through them without waiting for input, so they never appear as a resting
# phase of a live session.
PHASE_ORDER: tuple[Phase, ...] = (
    Phase.GREETING,
    Phase.LANGUAGE_SELECT,
    Phase.TIPI,
    Phase.EMPLOYMENT_GATE,
    Phase.COMPETENCY,
    Phase.COMPETENCY_FEEDBACK,
    Phase.TIPI_FEEDBACK,
    Phase.SUS,
    Phase.FAREWELL,
    Phase.DONE,
)


@dataclass(frozen=True)
class QuestionSpec:
    """One question: identity, answer contract, and catalog key.

    ``id`` doubles as the storage field lookup key, so it must be unique
    across the whole flow. ``gating`` names a predicate over session state
    ("employed == yes") that must hold for the question to be asked.
    """

    id: str
    instrument: Instrument
    index: int  # 1-based position within its instrument
    text_key: str
    kind: QuestionKind = QuestionKind.SCALE
    scale_min: int = 1
    scale_max: int = 7
    reverse_scored: bool = False
    gating: str | None = None

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"{self.id}: index must be >= 1")
        if self.scale_min >= self.scale_max:
            raise ValueError(f"{self.id}: empty answer range")
        if self.kind is QuestionKind.SCALE:
            # rating scales stay inside the 7-point envelope
            if self.scale_min < 1 or self.scale_max > 7:
                raise ValueError(
                    f"{self.id}: scale bounds {self.scale_min}..{self.scale_max} "
                    "outside 1..7"
                )


@dataclass(frozen=True)
class Intent:
    """A named intent: per-locale trigger phrases plus the transition it fires."""

    name: str
    triggers: Mapping[str, tuple[str, ...]]  # locale -> lowercased phrases
    handler: str = "begin"

    def phrases(self, locale: str | None = None) -> tuple[str, ...]:
        """Trigger phrases for one locale, or all locales when undecided."""
        if locale is not None:
            return self.triggers.get(locale, ())
        merged: list[str] = []
        for phrases in self.triggers.values():
            merged.extend(phrases)
        return tuple(merged)


FALLBACK = "FALLBACK"


@dataclass(frozen=True)
class FlowDefinition:
    """The full question inventory, in ask order."""

    tipi: tuple[QuestionSpec, ...]
    employment: QuestionSpec
    competency: tuple[QuestionSpec, ...]
    sus: tuple[QuestionSpec, ...]
    meta: tuple[QuestionSpec, ...]
    by_id: dict[str, QuestionSpec] = field(default_factory=dict)

    def __post_init__(self) -> None:
        index: dict[str, QuestionSpec] = {}
        for question in self.all_questions():
            if question.id in index:
                raise ValueError(f"duplicate question id {question.id!r}")
            index[question.id] = question
        object.__setattr__(self, "by_id", index)

    def all_questions(self) -> tuple[QuestionSpec, ...]:
        return (*self.tipi, self.employment, *self.competency, *self.sus, *self.meta)

    def questions_for(self, phase: Phase) -> tuple[QuestionSpec, ...]:
        if phase is Phase.TIPI:
            return self.tipi
        if phase is Phase.EMPLOYMENT_GATE:
            return (self.employment,)
        if phase is Phase.COMPETENCY:
            return self.competency
        if phase is Phase.SUS:
            return self.sus
        if phase is Phase.FAREWELL:
            return self.meta
        return ()

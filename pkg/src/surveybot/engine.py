"""Dialogue engine: one deterministic step per inbound message.

``DialogueEngine.advance`` is the only entry point. It mutates the session
it is given and returns the ordered outbound batch; it performs no I/O, so
the gateway decides when and how messages leave the process. Callers must
serialize calls per session (different sessions are independent).

Every outbound text is rendered from a catalog key, never embedded here;
the key and parameters travel with the message so consumers can audit that
no text bypassed the catalog.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field

from . import scoring
from .config import BotConfig
from .questions import (
    Intent,
    Phase,
    PHASE_ORDER,
    QuestionKind,
    QuestionSpec,
)

# Language names are proper nouns shown before any locale exists, the one
# message surface that cannot be localized; payloads follow the 1/2/3 order
# of the language prompt.
LANGUAGE_LABELS = {"pl": "Polski", "uk": "Українська", "en": "English"}

LANGUAGE_ALIASES = {
    "pl": ("pl", "polski", "polish", "po polsku", "polsku", "польська", "польська мова"),
    "uk": ("uk", "ua", "ukr", "українська", "українською", "ukrainian", "ukraiński"),
    "en": ("en", "eng", "english", "angielski", "англійська"),
}


@dataclass(frozen=True)
class QuickReply:
    label: str
    payload: int


@dataclass(frozen=True)
class OutboundMessage:
    """One localized message chunk, sequenced within its session."""

    recipient_id: str
    seq: int
    text: str
    key: str  # catalog key the text was rendered from
    params: tuple[tuple[str, str], ...] = ()
    quick_replies: tuple[QuickReply, ...] = ()
    chunk_index: int = 0
    chunk_count: int = 1


@dataclass
class Session:
    """Mutable per-respondent state. The engine is its only writer."""

    session_id: str
    external_user_id: str
    locale: str | None = None
    phase: Phase = Phase.GREETING
    question_index: int = 0
    attempts: int = 0
    answers: dict[str, int] = field(default_factory=dict)
    employed: bool | None = None
    outbound_seq: int = 0
    finalized: bool = False
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)


class ValidationError(Exception):
    """Rejected answer; carries the catalog key for the re-prompt."""

    def __init__(self, code: str, hint_key: str, params: dict[str, str]) -> None:
        self.code = code  # NON_NUMERIC | OUT_OF_RANGE
        self.hint_key = hint_key
        self.params = params
        super().__init__(f"{code} (reprompt {hint_key})")


def chunk_text(text: str, limit: int) -> list[str]:
    """Slice text into pieces of at most ``limit`` characters.

    Joining the result restores the input exactly; no characters are
    inserted or dropped.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if len(text) <= limit:
        return [text]
    return [text[i : i + limit] for i in range(0, len(text), limit)]


def _token_set(text: str) -> frozenset[str]:
    return frozenset(re.findall(r"\w+", text.lower(), re.UNICODE))


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def match_intent(
    utterance: str,
    intents: tuple[Intent, ...],
    locale: str | None,
    threshold: float,
) -> Intent | None:
    """Best intent by token-set overlap with any trigger phrase.

    Scores each intent as the max Jaccard similarity between the utterance
    token set and each trigger phrase's token set; returns None (fallback)
    when the best score is under the threshold. With no locale chosen yet,
    all locales' triggers compete.
    """
    tokens = _token_set(utterance)
    best: Intent | None = None
    best_score = 0.0
    for intent in intents:
        for phrase in intent.phrases(locale):
            score = jaccard(tokens, _token_set(phrase))
            if score > best_score:
                best, best_score = intent, score
    if best is not None and best_score >= threshold:
        return best
    return None


def _hint_for(spec: QuestionSpec, code: str) -> tuple[str, dict[str, str]]:
    if spec.kind is QuestionKind.YES_NO:
        return "reprompt.yes_no", {}
    if spec.kind is QuestionKind.NUMBER and code == "NON_NUMERIC":
        return "reprompt.number", {}
    return "reprompt.range", {"min": str(spec.scale_min), "max": str(spec.scale_max)}


def validate_answer(spec: QuestionSpec, text: str) -> int | ValidationError:
    """Parse a single integer token and check it against the question's range.

    The rejection is returned, not raised: it is an expected conversational
    outcome carrying the re-prompt key and valid range.
    """
    token = text.strip()
    try:
        value = int(token)
    except ValueError:
        hint_key, params = _hint_for(spec, "NON_NUMERIC")
        return ValidationError("NON_NUMERIC", hint_key, params)
    if not spec.scale_min <= value <= spec.scale_max:
        hint_key, params = _hint_for(spec, "OUT_OF_RANGE")
        return ValidationError("OUT_OF_RANGE", hint_key, params)
    return value


def parse_language(text: str, locales: tuple[str, ...]) -> str | None:
    """Accept a 1-based menu number or a language name in any language."""
    normalized = text.strip().lower().strip(".!?")
    if normalized.isdigit():
        choice = int(normalized)
        if 1 <= choice <= len(locales):
            return locales[choice - 1]
        return None
    for locale in locales:
        if normalized in LANGUAGE_ALIASES.get(locale, ()):
            return locale
    return None


@dataclass(frozen=True)
class _Draft:
    key: str
    params: dict[str, str] = field(default_factory=dict)
    quick_replies: tuple[QuickReply, ...] = ()


class DialogueEngine:
    def __init__(self, config: BotConfig) -> None:
        self.config = config

    # ---- public API -------------------------------------------------

    def advance(self, session: Session, inbound_text: str) -> list[OutboundMessage]:
        """Consume one inbound message, mutate the session, return the batch."""
        text = inbound_text.strip()
        if not text:
            return []
        session.updated_at = time.time()
        if session.phase is Phase.DONE:
            return self._emit(session, [_Draft("survey.complete")])
        if session.phase is Phase.GREETING:
            return self._greeting(session, text)
        if session.phase is Phase.LANGUAGE_SELECT:
            return self._language_select(session, text)
        return self._question_phase(session, text)

    def tipi_profile(self, session: Session) -> scoring.BigFiveProfile:
        answers = [session.answers[q.id] for q in self.config.flow.tipi]
        return scoring.score_tipi(answers, key=self.config.tipi_key)

    def sus_score(self, session: Session) -> scoring.SusScore:
        answers = [session.answers[q.id] for q in self.config.flow.sus]
        return scoring.score_sus(answers)

    # ---- phase handlers ----------------------------------------------

    def _greeting(self, session: Session, text: str) -> list[OutboundMessage]:
        intent = match_intent(
            text, self.config.intents, session.locale, self.config.intent_threshold
        )
        if intent is None or intent.handler != "begin":
            return self._emit(session, [_Draft("fallback.trilingual")])
        session.phase = Phase.LANGUAGE_SELECT
        return self._emit(
            session,
            [_Draft("greeting.trilingual"), _Draft("language.prompt", {}, self._language_quick_replies())],
        )

    def _language_select(self, session: Session, text: str) -> list[OutboundMessage]:
        locale = parse_language(text, self.config.locales)
        if locale is None:
            return self._emit(
                session, [_Draft("language.reprompt", {}, self._language_quick_replies())]
            )
        session.locale = locale
        drafts = [_Draft("language.confirmed")]
        drafts.extend(self._enter_phase(session, Phase.TIPI))
        return self._emit(session, drafts)

    def _question_phase(self, session: Session, text: str) -> list[OutboundMessage]:
        question = self._current_question(session)
        if question.kind is QuestionKind.YES_NO and session.locale:
            text = self._coerce_yes_no(text, session.locale)
        value = validate_answer(question, text)
        if isinstance(value, ValidationError):
            session.attempts += 1
            if session.attempts >= self.config.max_attempts:
                # bounded recovery: after repeated failures, re-ask in full
                session.attempts = 0
                return self._emit(session, [self._question_draft(session, question)])
            return self._emit(session, [_Draft(value.hint_key, value.params)])
        session.attempts = 0
        session.answers[question.id] = value
        if question.id == "employment":
            session.employed = value == 1
        return self._emit(session, self._after_answer(session))

    # ---- traversal ----------------------------------------------------

    def _current_question(self, session: Session) -> QuestionSpec:
        questions = self.config.flow.questions_for(session.phase)
        return questions[session.question_index]

    def _eligible(self, session: Session, question: QuestionSpec) -> bool:
        if question.gating is None:
            return True
        field_name, _, expected = question.gating.partition("==")
        assert field_name.strip() == "employed"  # only predicate the loader admits
        return session.employed is (expected.strip() == "yes")

    def _first_eligible(self, session: Session, start: int) -> int:
        questions = self.config.flow.questions_for(session.phase)
        index = start
        while index < len(questions) and not self._eligible(session, questions[index]):
            index += 1
        return index

    def _after_answer(self, session: Session) -> list[_Draft]:
        questions = self.config.flow.questions_for(session.phase)
        session.question_index = self._first_eligible(session, session.question_index + 1)
        if session.question_index < len(questions):
            return [self._question_draft(session, questions[session.question_index])]
        return self._enter_phase(session, self._next_phase(session.phase))

    def _next_phase(self, phase: Phase) -> Phase:
        return PHASE_ORDER[PHASE_ORDER.index(phase) + 1]

    def _enter_phase(self, session: Session, phase: Phase) -> list[_Draft]:
        session.phase = phase
        session.question_index = 0
        questions = self.config.flow.questions_for(phase)
        session.question_index = self._first_eligible(session, 0)
        has_question = session.question_index < len(questions)
        drafts: list[_Draft] = []
        if has_question or not questions:
            # a fully gated-out questionnaire emits neither intro nor questions
            drafts.extend(self._phase_statements(session, phase))
        if has_question:
            drafts.append(self._question_draft(session, questions[session.question_index]))
            return drafts
        if phase is Phase.DONE:
            return drafts
        drafts.extend(self._enter_phase(session, self._next_phase(phase)))
        return drafts

    def _phase_statements(self, session: Session, phase: Phase) -> list[_Draft]:
        if phase is Phase.TIPI:
            return [_Draft("tipi.intro")]
        if phase is Phase.COMPETENCY:
            return [_Draft("comp.intro")]
        if phase is Phase.SUS:
            return [_Draft("sus.intro")]
        if phase is Phase.COMPETENCY_FEEDBACK:
            if session.employed is not True:
                return []
            return self._competency_feedback(session)
        if phase is Phase.TIPI_FEEDBACK:
            return self._tipi_feedback(session)
        if phase is Phase.DONE:
            session.finalized = True
            return [_Draft("farewell.text")]
        return []

    # ---- feedback -----------------------------------------------------

    def _competency_feedback(self, session: Session) -> list[_Draft]:
        answers = [session.answers[q.id] for q in self.config.flow.competency]
        report = scoring.score_competency_fit(answers, self.config.norms)
        locale = self._render_locale(session)
        drafts = [_Draft("feedback.competency.intro")]
        for band in (scoring.Band.ABOVE, scoring.Band.NEAR, scoring.Band.BELOW):
            positions = report.positions(band)
            if not positions:
                continue
            labels = [
                self.config.catalogs.resolve(locale, f"comp.label.{p}") for p in positions
            ]
            drafts.append(
                _Draft(f"feedback.competency.{band.value}", {"items": ", ".join(labels)})
            )
        return drafts

    def _tipi_feedback(self, session: Session) -> list[_Draft]:
        profile = self.tipi_profile(session)
        drafts = [_Draft("feedback.tipi.intro")]
        drafts.extend(
            _Draft(key) for key in scoring.feedback_keys(profile, self.config.norms)
        )
        return drafts

    # ---- message construction ------------------------------------------

    def _language_quick_replies(self) -> tuple[QuickReply, ...]:
        return tuple(
            QuickReply(label=LANGUAGE_LABELS.get(locale, locale), payload=i)
            for i, locale in enumerate(self.config.locales, start=1)
        )

    def _question_draft(self, session: Session, question: QuestionSpec) -> _Draft:
        locale = self._render_locale(session)
        if question.kind is QuestionKind.YES_NO:
            quick = (
                QuickReply(self.config.catalogs.resolve(locale, "quickreply.yes"), 1),
                QuickReply(self.config.catalogs.resolve(locale, "quickreply.no"), 2),
            )
        elif question.kind is QuestionKind.SCALE:
            quick = tuple(
                QuickReply(str(v), v)
                for v in range(question.scale_min, question.scale_max + 1)
            )
        else:
            quick = ()
        return _Draft(question.text_key, {}, quick)

    def _coerce_yes_no(self, text: str, locale: str) -> str:
        normalized = text.strip().lower().strip(".!?")
        yes_words = self.config.catalogs.resolve(locale, "employment.yes_words").split("|")
        no_words = self.config.catalogs.resolve(locale, "employment.no_words").split("|")
        # no-words win ties: "nie pracuję" must not match via its "pracuję" token
        if normalized in no_words:
            return "2"
        if normalized in yes_words:
            return "1"
        return text

    def _render_locale(self, session: Session) -> str:
        return session.locale or self.config.locales[0]

    def _emit(self, session: Session, drafts: list[_Draft]) -> list[OutboundMessage]:
        locale = self._render_locale(session)
        messages: list[OutboundMessage] = []
        for draft in drafts:
            text = self.config.catalogs.render(locale, draft.key, **draft.params)
            chunks = chunk_text(text, self.config.chunk_limit)
            for index, chunk in enumerate(chunks):
                session.outbound_seq += 1
                last = index == len(chunks) - 1
                messages.append(
                    OutboundMessage(
                        recipient_id=session.external_user_id,
                        seq=session.outbound_seq,
                        text=chunk,
                        key=draft.key,
                        params=tuple(sorted(draft.params.items())),
                        quick_replies=draft.quick_replies if last else (),
                        chunk_index=index,
                        chunk_count=len(chunks),
                    )
                )
        return messages

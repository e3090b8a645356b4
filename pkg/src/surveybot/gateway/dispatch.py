"""Inbound event intake: dedupe, per-session serialization, persistence.

One dispatcher owns all live sessions. Events for the same sender are
processed under that sender's lock (engine calls never interleave within a
session); events for different senders proceed in parallel. Acknowledgement
is decoupled from delivery: batches go to the sender's queue and the HTTP
layer can return immediately.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass

from ..config import BotConfig
from ..engine import DialogueEngine, OutboundMessage, Session
from ..storage import RecordStore, StorageError
from .profiles import ProfileProvider
from .sender import BatchSender

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InboundEvent:
    sender_id: str
    recipient_page_id: str
    timestamp: int
    message_text: str = ""
    quick_reply_payload: str | None = None

    def answer_text(self) -> str:
        """The text the engine should consume; a button payload wins."""
        if self.quick_reply_payload:
            return self.quick_reply_payload
        return self.message_text


@dataclass
class TranscriptEntry:
    direction: str  # "inbound" | "outbound"
    text: str
    seq: int | None = None
    timestamp: float = 0.0


class Dispatcher:
    """Routes verified events through the engine and records the outcome."""

    def __init__(
        self,
        config: BotConfig,
        store: RecordStore,
        profile_provider: ProfileProvider,
        sender: BatchSender,
        dedupe_window_s: float = 600.0,
        clock=time.time,
    ) -> None:
        self.config = config
        self.engine = DialogueEngine(config)
        self.store = store
        self.profile_provider = profile_provider
        self.sender = sender
        self.dedupe_window_s = dedupe_window_s
        self.clock = clock
        self._sessions: dict[str, Session] = {}
        self._record_ids: dict[str, int] = {}
        self._transcripts: dict[str, list[TranscriptEntry]] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._seen_events: dict[tuple, float] = {}

    # ---- public API ---------------------------------------------------

    def handle_event(self, event: InboundEvent) -> str:
        """Process one verified event; returns ok | duplicate | ignored."""
        if not event.sender_id:
            return "ignored"
        text = event.answer_text()
        if not text.strip():
            return "ignored"
        lock = self._session_lock(event.sender_id)
        with lock:
            key = self._dedupe_key(event)
            if self._already_seen(key):
                return "duplicate"
            session = self._get_or_create_session(event.sender_id)
            answered_before = set(session.answers)
            locale_before = session.locale
            finalized_before = session.finalized
            try:
                messages = self.engine.advance(session, text)
                self._persist_progress(
                    session, answered_before, locale_before, finalized_before
                )
            except Exception:
                # let a redelivery retry this event
                self._seen_events.pop(key, None)
                raise
            self._record_transcript(event.sender_id, text, messages)
            if messages:
                self.sender.enqueue(event.sender_id, messages)
        return "ok"

    def session_for(self, sender_id: str) -> Session | None:
        with self._registry_lock:
            return self._sessions.get(sender_id)

    def record_id_for(self, sender_id: str) -> int | None:
        with self._registry_lock:
            return self._record_ids.get(sender_id)

    def transcript(self, sender_id: str) -> dict | None:
        with self._registry_lock:
            session = self._sessions.get(sender_id)
            entries = self._transcripts.get(sender_id)
        if session is None or entries is None:
            return None
        return {
            "session_id": session.session_id,
            "locale": session.locale,
            "phase": session.phase.value,
            "finalized": session.finalized,
            "entries": [
                {
                    "direction": entry.direction,
                    "text": entry.text,
                    "seq": entry.seq,
                    "timestamp": entry.timestamp,
                }
                for entry in entries
            ],
        }

    # ---- internals ------------------------------------------------------

    def _dedupe_key(self, event: InboundEvent) -> tuple:
        return (
            event.sender_id,
            event.timestamp,
            event.message_text,
            event.quick_reply_payload,
        )

    def _already_seen(self, key: tuple) -> bool:
        now = self.clock()
        cutoff = now - self.dedupe_window_s
        stale = [k for k, seen_at in self._seen_events.items() if seen_at < cutoff]
        for k in stale:
            del self._seen_events[k]
        if key in self._seen_events:
            return True
        self._seen_events[key] = now
        return False

    def _session_lock(self, sender_id: str) -> threading.Lock:
        with self._registry_lock:
            lock = self._locks.get(sender_id)
            if lock is None:
                lock = threading.Lock()
                self._locks[sender_id] = lock
            return lock

    def _get_or_create_session(self, sender_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(sender_id)
        if session is not None:
            return session
        attributes = self.profile_provider.fetch_profile(sender_id)
        record_id = self.store.active_record_id(sender_id)
        if record_id is None:
            record_id = self.store.create_record(sender_id, attributes)
        else:
            # a live record with no in-memory session: process restarted
            log.warning("resuming active record %s for %s", record_id, sender_id)
        session = Session(session_id=sender_id, external_user_id=sender_id)
        with self._registry_lock:
            self._sessions[sender_id] = session
            self._record_ids[sender_id] = record_id
            self._transcripts[sender_id] = []
        return session

    def _persist_progress(
        self,
        session: Session,
        answered_before: set[str],
        locale_before: str | None,
        finalized_before: bool,
    ) -> None:
        record_id = self.record_id_for(session.session_id)
        if record_id is None:
            raise StorageError("STORAGE", f"no record for session {session.session_id}")
        for question_id in session.answers.keys() - answered_before:
            try:
                self.store.save_answer(record_id, question_id, session.answers[question_id])
            except StorageError as exc:
                if exc.code != "FIELD_ALREADY_SET":
                    raise
                # replay against a resumed record keeps the original value
                log.warning("answer %s already stored on record %s", question_id, record_id)
        if session.locale and session.locale != locale_before:
            self.store.set_language(record_id, session.locale)
        if session.finalized and not finalized_before:
            self.store.save_scores(record_id, self.engine.tipi_profile(session))
            self.store.finalize_record(record_id)

    def _record_transcript(
        self, sender_id: str, text: str, messages: list[OutboundMessage]
    ) -> None:
        now = self.clock()
        with self._registry_lock:
            entries = self._transcripts.setdefault(sender_id, [])
            entries.append(TranscriptEntry(direction="inbound", text=text, timestamp=now))
            entries.extend(
                TranscriptEntry(
                    direction="outbound", text=message.text, seq=message.seq, timestamp=now
                )
                for message in messages
            )

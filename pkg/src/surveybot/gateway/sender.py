"""Ordered outbound delivery with pacing and bounded retries.

``send_batch`` is the synchronous core contract: strict seq order, a
configurable pause between messages of a batch, and per-message retries
with exponential backoff. ``BatchSender`` runs that core on one worker
thread per session so webhook handlers can acknowledge immediately; a
session whose batch exhausts its retries stops sending (messages pile up
as dead letters for the operator) rather than ever skipping or reordering.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

from ..engine import OutboundMessage

log = logging.getLogger(__name__)


class TransportError(Exception):
    """A delivery attempt failed; the message may be retried."""

    def __init__(self, message: str, undelivered: Sequence[OutboundMessage] = ()) -> None:
        super().__init__(message)
        self.undelivered = list(undelivered)


class Transport(Protocol):
    def deliver(self, message: OutboundMessage) -> None: ...


@dataclass
class LoggedDelivery:
    recipient_id: str
    seq: int
    text: str
    monotonic_at: float


class MemoryTransport:
    """In-process transport that logs deliveries; can fail on cue for tests."""

    def __init__(self) -> None:
        self.log: list[LoggedDelivery] = []
        self._lock = threading.Lock()
        self._failures: dict[tuple[str, int], int] = {}

    def fail_next(self, recipient_id: str, seq: int, times: int) -> None:
        """Make the next ``times`` delivery attempts for one message fail."""
        with self._lock:
            self._failures[(recipient_id, seq)] = times

    def deliver(self, message: OutboundMessage) -> None:
        with self._lock:
            key = (message.recipient_id, message.seq)
            remaining = self._failures.get(key, 0)
            if remaining > 0:
                self._failures[key] = remaining - 1
                raise TransportError(f"scripted failure for {key}")
            self.log.append(
                LoggedDelivery(
                    recipient_id=message.recipient_id,
                    seq=message.seq,
                    text=message.text,
                    monotonic_at=time.monotonic(),
                )
            )

    def deliveries_for(self, recipient_id: str) -> list[LoggedDelivery]:
        with self._lock:
            return [entry for entry in self.log if entry.recipient_id == recipient_id]


def send_batch(
    messages: Sequence[OutboundMessage],
    transport: Transport,
    delay_s: float,
    retries: int = 3,
    backoff_base_s: float = 0.05,
    sleep: Callable[[float], None] = time.sleep,
) -> None:
    """Deliver one session's batch in order.

    The first message goes out immediately; each later one waits ``delay_s``.
    A failing message is retried up to ``retries`` times with doubling
    backoff; the next message is never attempted before its predecessor
    succeeds. Raises TransportError once retries are exhausted, carrying
    the not-yet-delivered tail of the batch.
    """
    if messages and len({m.recipient_id for m in messages}) != 1:
        raise ValueError("batch must target a single recipient")
    for position, message in enumerate(messages):
        if position > 0 and delay_s > 0:
            sleep(delay_s)
        attempt = 0
        while True:
            try:
                transport.deliver(message)
                break
            except TransportError as exc:
                attempt += 1
                if attempt > retries:
                    raise TransportError(str(exc), messages[position:]) from exc
                sleep(backoff_base_s * 2 ** (attempt - 1))


@dataclass
class _SessionChannel:
    batches: "queue.Queue[list[OutboundMessage]]" = field(default_factory=queue.Queue)
    failed: bool = False
    dead_letters: list[OutboundMessage] = field(default_factory=list)


class BatchSender:
    """Per-session FIFO delivery workers over a shared transport."""

    def __init__(
        self,
        transport: Transport,
        delay_s: float,
        retries: int = 3,
        backoff_base_s: float = 0.05,
    ) -> None:
        self.transport = transport
        self.delay_s = delay_s
        self.retries = retries
        self.backoff_base_s = backoff_base_s
        self._channels: dict[str, _SessionChannel] = {}
        self._threads: dict[str, threading.Thread] = {}
        self._lock = threading.Lock()
        self._stopping = False

    def enqueue(self, session_id: str, messages: Sequence[OutboundMessage]) -> None:
        if not messages:
            return
        with self._lock:
            if self._stopping:
                raise RuntimeError("sender is stopped")
            channel = self._channels.get(session_id)
            if channel is None:
                channel = _SessionChannel()
                self._channels[session_id] = channel
                worker = threading.Thread(
                    target=self._drain,
                    args=(session_id, channel),
                    name=f"sender-{session_id}",
                    daemon=True,
                )
                self._threads[session_id] = worker
                worker.start()
            channel.batches.put(list(messages))

    def _drain(self, session_id: str, channel: _SessionChannel) -> None:
        while True:
            batch = channel.batches.get()
            try:
                if batch is None:
                    return
                if channel.failed:
                    # a dead session never sends again: ordering over delivery
                    channel.dead_letters.extend(batch)
                    continue
                try:
                    send_batch(
                        batch,
                        self.transport,
                        self.delay_s,
                        retries=self.retries,
                        backoff_base_s=self.backoff_base_s,
                    )
                except TransportError as exc:
                    channel.failed = True
                    channel.dead_letters.extend(exc.undelivered or batch)
                    log.error("delivery failed for session %s: %s", session_id, exc)
            finally:
                channel.batches.task_done()

    def failed_sessions(self) -> dict[str, list[OutboundMessage]]:
        """Sessions needing operator attention, with their undelivered backlog."""
        with self._lock:
            return {
                session_id: list(channel.dead_letters)
                for session_id, channel in self._channels.items()
                if channel.failed
            }

    def flush(self) -> None:
        """Block until every queued batch has been processed."""
        with self._lock:
            channels = list(self._channels.values())
        for channel in channels:
            channel.batches.join()

    def stop(self) -> None:
        with self._lock:
            self._stopping = True
            items = list(self._channels.items())
        for _, channel in items:
            channel.batches.put(None)  # type: ignore[arg-type]
        for thread in self._threads.values():
            thread.join(timeout=5)


class MessageLog:
    """Loopback transport: outbound messages retrievable by recipient and seq."""

    def __init__(self) -> None:
        self._by_recipient: dict[str, list[OutboundMessage]] = {}
        self._condition = threading.Condition()

    def deliver(self, message: OutboundMessage) -> None:
        with self._condition:
            self._by_recipient.setdefault(message.recipient_id, []).append(message)
            self._condition.notify_all()

    def messages_after(self, recipient_id: str, after_seq: int) -> list[OutboundMessage]:
        with self._condition:
            return [
                message
                for message in self._by_recipient.get(recipient_id, [])
                if message.seq > after_seq
            ]

    def wait_for(
        self, recipient_id: str, after_seq: int, timeout: float
    ) -> list[OutboundMessage]:
        """messages_after, blocking up to ``timeout`` for the first arrival."""
        deadline = time.monotonic() + timeout
        with self._condition:
            while True:
                found = [
                    message
                    for message in self._by_recipient.get(recipient_id, [])
                    if message.seq > after_seq
                ]
                if found:
                    return found
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return []
                self._condition.wait(remaining)

"""Terminal conversation client and scripted transcript runner.

Both speak the gateway's loopback channel, so they exercise the same code
path as the external webhook (minus signature verification).

Transcript files are line oriented and diffable:

    # comment
    @user auto            directive: simulated user id ("auto" -> random)
    @locale en            directive: metadata only, recorded in the result
    > hello               SEND the text as the user
    < Exact reply text    EXPECT the next outbound message verbatim
    < /pattern/           EXPECT the next outbound message to match a regex
    =                     EXPECT_BATCH_END: no further messages pending
    !finalized            assert the session reports finalized

Expected text uses \\n / \\t escapes so multi-line messages stay on one
script line.
"""

from __future__ import annotations

import re
import time
import uuid
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import httpx

SEND = "SEND"
EXPECT = "EXPECT"
BATCH_END = "EXPECT_BATCH_END"
FINALIZED = "FINALIZED"


class ScriptError(ValueError):
    """Raised for malformed transcript files."""


@dataclass(frozen=True)
class Step:
    kind: str
    line_no: int
    text: str = ""
    pattern: str | None = None

    def matches(self, actual: str) -> bool:
        if self.pattern is not None:
            return re.search(self.pattern, actual) is not None
        return actual == self.text


@dataclass
class TranscriptScript:
    steps: list[Step]
    user: str | None = None
    locale: str | None = None
    source: str = "<string>"


@dataclass
class ReceivedMessage:
    seq: int
    text: str
    quick_replies: list[dict]
    key: str = ""


@dataclass
class SimResult:
    status: str  # PASS | FAIL
    user_id: str
    reason: str | None = None  # TIMEOUT | MISMATCH | None
    step_index: int | None = None
    line_no: int | None = None
    expected: str | None = None
    actual: str | None = None
    log: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "PASS"


def escape_text(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\n", "\\n").replace("\t", "\\t")


def unescape_text(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            if nxt == "t":
                out.append("\t")
                i += 2
                continue
            if nxt == "\\":
                out.append("\\")
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def parse_script(text: str, source: str = "<string>") -> TranscriptScript:
    steps: list[Step] = []
    user: str | None = None
    locale: str | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("@user"):
            user = stripped[len("@user"):].strip() or None
            continue
        if stripped.startswith("@locale"):
            locale = stripped[len("@locale"):].strip() or None
            continue
        if stripped.startswith(">"):
            steps.append(Step(SEND, line_no, text=stripped[1:].strip()))
            continue
        if stripped.startswith("<"):
            body = stripped[1:].strip()
            if len(body) >= 2 and body.startswith("/") and body.endswith("/"):
                pattern = body[1:-1]
                try:
                    re.compile(pattern)
                except re.error as exc:
                    raise ScriptError(
                        f"{source}:{line_no}: bad pattern {pattern!r}: {exc}"
                    ) from exc
                steps.append(Step(EXPECT, line_no, pattern=pattern))
            else:
                steps.append(Step(EXPECT, line_no, text=unescape_text(body)))
            continue
        if stripped == "=":
            steps.append(Step(BATCH_END, line_no))
            continue
        if stripped == "!finalized":
            steps.append(Step(FINALIZED, line_no))
            continue
        raise ScriptError(f"{source}:{line_no}: unrecognized step {stripped!r}")
    if not steps or steps[0].kind != SEND:
        raise ScriptError(f"{source}: transcript must start with a SEND step")
    return TranscriptScript(steps=steps, user=user, locale=locale, source=source)


def load_script(path: str | Path) -> TranscriptScript:
    path = Path(path)
    return parse_script(path.read_text(encoding="utf-8"), source=str(path))


class LoopbackClient:
    """Minimal HTTP client for one simulated user."""

    def __init__(self, base_url: str, user_id: str, timeout: float = 30.0) -> None:
        self.base_url = base_url.rstrip("/")
        self.user_id = user_id
        self.last_seq = 0
        self._http = httpx.Client(timeout=timeout)
        self._counter = 0

    def close(self) -> None:
        self._http.close()

    def send(self, text: str) -> str:
        self._counter += 1
        response = self._http.post(
            f"{self.base_url}/local/messages",
            json={
                "sender_id": self.user_id,
                "text": text,
                # distinct timestamps keep intentional repeats out of dedupe
                "timestamp": int(time.time() * 1000) * 100 + self._counter,
            },
        )
        response.raise_for_status()
        return response.json().get("status", "")

    def poll(self, wait: float = 0.0) -> list[ReceivedMessage]:
        response = self._http.get(
            f"{self.base_url}/local/messages",
            params={
                "sender_id": self.user_id,
                "after": self.last_seq,
                "wait": wait,
            },
        )
        response.raise_for_status()
        payload = response.json()
        messages = [
            ReceivedMessage(
                seq=item["seq"],
                text=item["text"],
                quick_replies=item.get("quick_replies", []),
                key=item.get("key", ""),
            )
            for item in payload.get("messages", [])
        ]
        if messages:
            self.last_seq = max(self.last_seq, messages[-1].seq)
        return messages

    def drain(self, first_wait: float = 5.0, quiet: float = 0.3) -> list[ReceivedMessage]:
        """Collect a batch: wait for the first message, then until quiet."""
        collected = self.poll(wait=first_wait)
        while True:
            more = self.poll(wait=quiet)
            if not more:
                return collected
            collected.extend(more)

    def finalized(self) -> bool:
        response = self._http.get(
            f"{self.base_url}/local/messages",
            params={"sender_id": self.user_id, "after": self.last_seq},
        )
        response.raise_for_status()
        return bool(response.json().get("finalized"))


def _auto_user(script: TranscriptScript, override: str | None) -> str:
    if override:
        return override
    if script.user and script.user != "auto":
        return script.user
    return f"sim-{uuid.uuid4().hex[:12]}"


def run_script(
    script: TranscriptScript | str | Path,
    base_url: str,
    user: str | None = None,
    timeout: float = 10.0,
) -> SimResult:
    """Replay a transcript; PASS iff every expectation is met in order."""
    if not isinstance(script, TranscriptScript):
        script = load_script(script)
    user_id = _auto_user(script, user)
    client = LoopbackClient(base_url, user_id)
    pending: deque[ReceivedMessage] = deque()
    log: list[str] = []

    def fail(step: Step, index: int, reason: str, expected: str, actual: str) -> SimResult:
        return SimResult(
            status="FAIL",
            user_id=user_id,
            reason=reason,
            step_index=index,
            line_no=step.line_no,
            expected=expected,
            actual=actual,
            log=log,
        )

    def next_message(wait_s: float) -> ReceivedMessage | None:
        if pending:
            return pending.popleft()
        deadline = time.monotonic() + wait_s
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return None
            pending.extend(client.poll(wait=min(remaining, 5.0)))
            if pending:
                return pending.popleft()

    try:
        for index, step in enumerate(script.steps, start=1):
            if step.kind == SEND:
                client.send(step.text)
            elif step.kind == EXPECT:
                message = next_message(timeout)
                if message is None:
                    return fail(step, index, "TIMEOUT", _describe(step), "<no message>")
                log.append(message.text)
                if not step.matches(message.text):
                    return fail(step, index, "MISMATCH", _describe(step), message.text)
            elif step.kind == BATCH_END:
                message = next_message(0.3)
                if message is not None:
                    pending.appendleft(message)
                    return fail(
                        step, index, "MISMATCH", "<no further messages>", message.text
                    )
            elif step.kind == FINALIZED:
                deadline = time.monotonic() + timeout
                while not client.finalized():
                    if time.monotonic() > deadline:
                        return fail(
                            step, index, "TIMEOUT", "finalized session", "not finalized"
                        )
                    time.sleep(0.05)
        return SimResult(status="PASS", user_id=user_id, log=log)
    finally:
        client.close()


def _describe(step: Step) -> str:
    if step.pattern is not None:
        return f"/{step.pattern}/"
    return step.text


def run_load(
    script: TranscriptScript | str | Path,
    base_url: str,
    clients: int = 5,
    timeout: float = 15.0,
) -> list[SimResult]:
    """Run the same script as several concurrent users, one thread each."""
    if not isinstance(script, TranscriptScript):
        script = load_script(script)
    with ThreadPoolExecutor(max_workers=clients) as pool:
        futures = [
            pool.submit(run_script, script, base_url, f"load-{uuid.uuid4().hex[:10]}", timeout)
            for _ in range(clients)
        ]
        return [future.result() for future in futures]


LOCALE_DIGITS = {"pl": "1", "uk": "2", "en": "3"}


def interactive(base_url: str, user: str | None = None, locale_hint: str | None = None) -> int:
    """REPL: lines typed are sent as the simulated user; replies printed."""
    user_id = user or f"chat-{uuid.uuid4().hex[:8]}"
    client = LoopbackClient(base_url, user_id)
    print(f"connected to {base_url} as {user_id} (Ctrl-D to quit)")
    if locale_hint in LOCALE_DIGITS:
        print(f"hint: answer the language prompt with {LOCALE_DIGITS[locale_hint]} for {locale_hint}")
    try:
        while True:
            try:
                line = input("> ")
            except EOFError:
                print()
                return 0
            if not line.strip():
                continue
            try:
                client.send(line)
                for message in client.drain():
                    print(f"[{message.seq}] {message.text}")
                    if message.quick_replies:
                        options = "  ".join(
                            f"({item['payload']}) {item['label']}"
                            for item in message.quick_replies
                        )
                        print(f"      {options}")
            except httpx.HTTPError as exc:
                print(f"connection error: {exc}")
    finally:
        client.close()


def format_result(result: SimResult) -> str:
    if result.passed:
        return f"PASS user={result.user_id} messages={len(result.log)}"
    return (
        f"FAIL user={result.user_id} reason={result.reason} "
        f"step={result.step_index} line={result.line_no}\n"
        f"  expected: {escape_text(result.expected or '')}\n"
        f"  actual:   {escape_text(result.actual or '')}"
    )

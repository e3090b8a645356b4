"""HTTP surface: platform webhook, loopback channel, transcripts, static UI.

Two inbound paths share one dispatcher:

* POST /webhook      - platform envelope, HMAC-SHA1 signed
* POST /local/messages - loopback channel for the bundled web chat; no
  signature, bound to localhost deployments

Outbound messages always flow through the batch sender. For loopback
clients the transport is an in-process message log that GET
/local/messages polls (optionally long-polls) by sequence number.
"""

from __future__ import annotations

import logging
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from ..config import BotConfig, load_default_config
from ..storage import RecordStore, StorageError
from .dispatch import Dispatcher, InboundEvent
from .profiles import GraphProfileProvider, MockProfileProvider, ProfileProvider
from .security import verify_signature, verify_subscription
from .sender import BatchSender, MessageLog, Transport

log = logging.getLogger(__name__)


@dataclass
class GatewaySettings:
    verify_token: str = "change-me"
    app_secret: str = "change-me"
    page_token: str = ""
    db_path: str = ":memory:"
    send_delay_s: float | None = None  # None -> engine config default
    ui_dir: str | None = None
    profile_fixtures: str | None = None
    extra: dict = field(default_factory=dict)


def _build_profile_provider(settings: GatewaySettings) -> ProfileProvider:
    if settings.page_token:
        return GraphProfileProvider(settings.page_token)
    if settings.profile_fixtures:
        return MockProfileProvider.from_file(settings.profile_fixtures)
    return MockProfileProvider()


def create_app(
    config: BotConfig | None = None,
    settings: GatewaySettings | None = None,
    store: RecordStore | None = None,
    transport: Transport | None = None,
) -> FastAPI:
    config = config or load_default_config()
    settings = settings or GatewaySettings()
    store = store or RecordStore(settings.db_path)
    message_log = MessageLog()
    transport = transport or message_log
    delay_s = (
        settings.send_delay_s
        if settings.send_delay_s is not None
        else config.send_delay_ms / 1000.0
    )
    sender = BatchSender(transport, delay_s=delay_s)
    dispatcher = Dispatcher(config, store, _build_profile_provider(settings), sender)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        sender.stop()

    app = FastAPI(
        title="surveybot gateway", docs_url=None, redoc_url=None, lifespan=lifespan
    )
    app.state.config = config
    app.state.settings = settings
    app.state.store = store
    app.state.dispatcher = dispatcher
    app.state.sender = sender
    app.state.message_log = message_log

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/webhook")
    def webhook_handshake(request: Request) -> Response:
        challenge = verify_subscription(
            dict(request.query_params), settings.verify_token
        )
        if challenge is None:
            return PlainTextResponse("forbidden", status_code=403)
        return PlainTextResponse(challenge)

    @app.post("/webhook")
    async def webhook_receive(request: Request) -> Response:
        raw = await request.body()
        signature = request.headers.get("X-Hub-Signature", "")
        if not verify_signature(raw, signature, settings.app_secret):
            return PlainTextResponse("bad signature", status_code=403)
        try:
            payload = await request.json()
        except ValueError:
            return PlainTextResponse("bad payload", status_code=400)
        events = _parse_envelope(payload)
        try:
            for event in events:
                await run_in_threadpool(dispatcher.handle_event, event)
        except StorageError as exc:
            log.error("storage failure handling webhook: %s", exc)
            return PlainTextResponse("storage failure", status_code=500)
        return PlainTextResponse("ok")

    @app.post("/local/messages")
    async def local_send(request: Request) -> Response:
        try:
            payload = await request.json()
        except ValueError:
            return JSONResponse({"error": "bad payload"}, status_code=400)
        sender_id = str(payload.get("sender_id", "")).strip()
        if not sender_id:
            return JSONResponse({"error": "sender_id required"}, status_code=400)
        event = InboundEvent(
            sender_id=sender_id,
            recipient_page_id="local",
            timestamp=int(payload.get("timestamp", 0)),
            message_text=str(payload.get("text", "")),
            quick_reply_payload=(
                str(payload["quick_reply_payload"])
                if payload.get("quick_reply_payload") not in (None, "")
                else None
            ),
        )
        try:
            status = await run_in_threadpool(dispatcher.handle_event, event)
        except StorageError as exc:
            log.error("storage failure handling loopback message: %s", exc)
            return JSONResponse({"error": "storage failure"}, status_code=500)
        return JSONResponse({"status": status})

    @app.get("/local/messages")
    async def local_poll(
        sender_id: str, after: int = 0, wait: float = 0.0
    ) -> Response:
        if wait > 0:
            deliveries = await run_in_threadpool(
                message_log.wait_for, sender_id, after, min(wait, 25.0)
            )
        else:
            deliveries = message_log.messages_after(sender_id, after)
        session = dispatcher.session_for(sender_id)
        return JSONResponse(
            {
                "sender_id": sender_id,
                "finalized": bool(session.finalized) if session else False,
                "messages": [
                    {
                        "seq": message.seq,
                        "text": message.text,
                        "key": message.key,
                        "chunk_index": message.chunk_index,
                        "chunk_count": message.chunk_count,
                        "quick_replies": [
                            {"label": qr.label, "payload": qr.payload}
                            for qr in message.quick_replies
                        ],
                    }
                    for message in deliveries
                ],
            }
        )

    @app.get("/sessions/{sender_id}/transcript")
    def session_transcript(sender_id: str) -> Response:
        data = dispatcher.transcript(sender_id)
        if data is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        return JSONResponse(data)

    ui_dir = settings.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _parse_envelope(payload: dict) -> list[InboundEvent]:
    """Flatten a platform callback body into inbound events.

    Unknown or non-message entries (delivery receipts, postbacks without
    payloads) are skipped rather than rejected.
    """
    events: list[InboundEvent] = []
    if not isinstance(payload, dict) or payload.get("object") != "page":
        return events
    for entry in payload.get("entry", []) or []:
        if not isinstance(entry, dict):
            continue
        page_id = str(entry.get("id", ""))
        for item in entry.get("messaging", []) or []:
            if not isinstance(item, dict):
                continue
            sender = item.get("sender") or {}
            message = item.get("message") or {}
            if not isinstance(message, dict):
                continue
            quick_reply = message.get("quick_reply") or {}
            payload_value = quick_reply.get("payload") if isinstance(quick_reply, dict) else None
            text = message.get("text")
            if text is None and payload_value is None:
                continue
            events.append(
                InboundEvent(
                    sender_id=str(sender.get("id", "")),
                    recipient_page_id=page_id,
                    timestamp=int(item.get("timestamp", 0)),
                    message_text=str(text or ""),
                    quick_reply_payload=(
                        str(payload_value) if payload_value is not None else None
                    ),
                )
            )
    return events


class ServerHandle:
    """uvicorn in a background thread, for tests and the simulator."""

    def __init__(self, app: FastAPI, host: str = "127.0.0.1", port: int = 8080) -> None:
        import uvicorn

        self._config = uvicorn.Config(
            app, host=host, port=port, log_level="warning", lifespan="on"
        )
        self.server = uvicorn.Server(self._config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)
        self.host = host
        self.port = port

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def start(self, timeout: float = 10.0) -> None:
        import time as _time

        self.thread.start()
        deadline = _time.monotonic() + timeout
        while not self.server.started:
            if _time.monotonic() > deadline:
                raise RuntimeError("server did not start in time")
            if not self.thread.is_alive():
                raise RuntimeError("server thread exited during startup")
            _time.sleep(0.02)

    def stop(self, timeout: float = 10.0) -> None:
        self.server.should_exit = True
        self.thread.join(timeout)

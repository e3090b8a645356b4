import threading
import time

import pytest

from surveybot.engine import OutboundMessage
from surveybot.gateway.sender import (
    BatchSender,
    MemoryTransport,
    MessageLog,
    TransportError,
    send_batch,
)


def message(recipient, seq, text="m"):
    return OutboundMessage(recipient_id=recipient, seq=seq, text=f"{text}{seq}", key="k")


def batch(recipient, start, count):
    return [message(recipient, start + i) for i in range(count)]


# ---- send_batch -------------------------------------------------------------


def test_send_batch_preserves_order():
    transport = MemoryTransport()
    send_batch(batch("u", 1, 5), transport, delay_s=0.0)
    assert [d.seq for d in transport.deliveries_for("u")] == [1, 2, 3, 4, 5]


def test_send_batch_rejects_mixed_recipients():
    with pytest.raises(ValueError):
        send_batch([message("a", 1), message("b", 2)], MemoryTransport(), delay_s=0.0)


def test_send_batch_applies_delay_between_messages():
    transport = MemoryTransport()
    naps = []
    send_batch(batch("u", 1, 3), transport, delay_s=0.8, sleep=naps.append)
    assert naps == [0.8, 0.8]  # between messages only, not before the first


def test_send_batch_retries_with_backoff_then_succeeds():
    transport = MemoryTransport()
    transport.fail_next("u", 1, times=2)
    naps = []
    send_batch(batch("u", 1, 2), transport, delay_s=0.0, retries=3,
               backoff_base_s=0.05, sleep=naps.append)
    assert [d.seq for d in transport.deliveries_for("u")] == [1, 2]
    assert naps == [0.05, 0.1]  # doubling backoff for the two retries


def test_send_batch_exhausted_retries_raise():
    transport = MemoryTransport()
    transport.fail_next("u", 1, times=10)
    with pytest.raises(TransportError):
        send_batch(batch("u", 1, 1), transport, delay_s=0.0, retries=3,
                   backoff_base_s=0.0, sleep=lambda _: None)


# ---- BatchSender ------------------------------------------------------------


def test_sender_keeps_seq_order_across_batches():
    transport = MemoryTransport()
    sender = BatchSender(transport, delay_s=0.0)
    try:
        sender.enqueue("u", batch("u", 1, 3))
        sender.enqueue("u", batch("u", 4, 2))
        sender.flush()
        assert [d.seq for d in transport.deliveries_for("u")] == [1, 2, 3, 4, 5]
    finally:
        sender.stop()


def test_sender_sessions_do_not_block_each_other():
    transport = MemoryTransport()
    sender = BatchSender(transport, delay_s=0.0)
    try:
        for user in ("a", "b", "c"):
            sender.enqueue(user, batch(user, 1, 10))
        sender.flush()
        for user in ("a", "b", "c"):
            assert [d.seq for d in transport.deliveries_for(user)] == list(range(1, 11))
    finally:
        sender.stop()


def test_sender_failure_dead_letters_not_reorders():
    transport = MemoryTransport()
    transport.fail_next("u", 2, times=99)  # seq 2 permanently undeliverable
    sender = BatchSender(transport, delay_s=0.0, retries=2, backoff_base_s=0.0)
    try:
        sender.enqueue("u", batch("u", 1, 3))
        sender.enqueue("u", batch("u", 4, 2))
        sender.flush()
        delivered = [d.seq for d in transport.deliveries_for("u")]
        assert delivered == [1]  # nothing after the failed message went out
        backlog = sender.failed_sessions()
        assert [m.seq for m in backlog["u"]] == [2, 3, 4, 5]
    finally:
        sender.stop()


def test_sender_other_sessions_survive_one_failure():
    transport = MemoryTransport()
    transport.fail_next("bad", 1, times=99)
    sender = BatchSender(transport, delay_s=0.0, retries=1, backoff_base_s=0.0)
    try:
        sender.enqueue("bad", batch("bad", 1, 2))
        sender.enqueue("good", batch("good", 1, 2))
        sender.flush()
        assert [d.seq for d in transport.deliveries_for("good")] == [1, 2]
    finally:
        sender.stop()


def test_sender_real_delay_spacing():
    transport = MemoryTransport()
    sender = BatchSender(transport, delay_s=0.05)
    try:
        sender.enqueue("u", batch("u", 1, 3))
        sender.flush()
        times = [d.monotonic_at for d in transport.deliveries_for("u")]
        gaps = [b - a for a, b in zip(times, times[1:])]
        assert all(gap >= 0.045 for gap in gaps)
    finally:
        sender.stop()


# ---- MessageLog -------------------------------------------------------------


def test_message_log_filters_by_seq():
    log = MessageLog()
    for m in batch("u", 1, 4):
        log.deliver(m)
    assert [m.seq for m in log.messages_after("u", 2)] == [3, 4]
    assert log.messages_after("other", 0) == []


def test_message_log_wait_for_blocks_until_delivery():
    log = MessageLog()
    result = {}

    def waiter():
        result["messages"] = log.wait_for("u", 0, timeout=5.0)

    thread = threading.Thread(target=waiter)
    thread.start()
    time.sleep(0.05)
    log.deliver(message("u", 1))
    thread.join(timeout=5.0)
    assert not thread.is_alive()
    assert [m.seq for m in result["messages"]] == [1]


def test_message_log_wait_for_times_out():
    log = MessageLog()
    start = time.monotonic()
    assert log.wait_for("u", 0, timeout=0.1) == []
    assert time.monotonic() - start >= 0.09

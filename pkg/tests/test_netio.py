import json
import struct
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from impsy.core import ContinuousFrame, NetConfig
from impsy.netio import NetEmitter, OscSender, osc_encode


# --- independent OSC 1.0 decoder (oracle for the round-trip property) -------

def osc_decode(datagram: bytes):
    """Minimal reference decoder: address + ',f...' type tags + big-endian
    float32 args.  Written against the wire layout, not the encoder."""

    def take_string(buf, off):
        end = buf.index(b"\x00", off)
        s = buf[off:end].decode("utf-8")
        off = end + 1
        off += -off % 4
        return s, off

    address, off = take_string(datagram, 0)
    tags, off = take_string(datagram, off)
    assert tags.startswith(",")
    args = []
    for tag in tags[1:]:
        assert tag == "f"
        (value,) = struct.unpack(">f", datagram[off : off + 4])
        args.append(value)
        off += 4
    assert off == len(datagram)
    return address, args


class TestOscEncode:
    def test_frame_example_bytes(self):
        datagram = osc_encode("/impsy/frame", [0.5])
        expected = b"/impsy/frame\x00\x00\x00\x00" + b",f\x00\x00" + bytes.fromhex("3f000000")
        assert datagram == expected

    def test_address_without_slash_rejected(self):
        with pytest.raises(ValueError):
            osc_encode("impsy/frame", [0.5])

    def test_no_args(self):
        address, args = osc_decode(osc_encode("/ping", []))
        assert address == "/ping" and args == []

    @given(
        n=st.integers(0, 16),
        seed=st.integers(0, 10_000),
        name=st.from_regex(r"/[A-Za-z0-9/_]{1,24}", fullmatch=True),
    )
    @settings(max_examples=200, deadline=None)
    def test_encode_decode_identity(self, n, seed, name):
        values = np.random.default_rng(seed).uniform(-1e3, 1e3, n).astype(np.float32)
        address, args = osc_decode(osc_encode(name, values.tolist()))
        assert address == name
        assert np.allclose(args, values, rtol=0, atol=0)

    def test_word_alignment(self):
        for name in ("/a", "/ab", "/abc", "/abcd", "/abcde"):
            for n in range(5):
                assert len(osc_encode(name, [0.0] * n)) % 4 == 0


class TestNetEmitter:
    def test_no_sinks_is_a_noop(self):
        emitter = NetEmitter(NetConfig(osc_enabled=False, websocket_enabled=False), hub=None)
        emitter.enqueue_frame(ContinuousFrame((0.5,), 0.1), "ai", 1.0)
        assert emitter._queue.empty()

    def test_unreachable_udp_sink_never_blocks_the_caller(self):
        # blackhole address: UDP sendto just buffers/drops locally
        net = NetConfig(osc_enabled=True, osc_host="127.0.0.1", osc_port=1)
        emitter = NetEmitter(net, hub=None)
        emitter.start()
        frame = ContinuousFrame((0.5,) * 8, 0.1)
        costs = []
        for i in range(1000):
            t0 = time.perf_counter()
            emitter.enqueue_frame(frame, "ai", float(i))
            costs.append(time.perf_counter() - t0)
        emitter.stop()
        costs.sort()
        p99 = costs[int(len(costs) * 0.99)]
        assert p99 < 1e-3  # enqueue must stay under a millisecond

    def test_overflow_drops_oldest_and_counts(self):
        emitter = NetEmitter(NetConfig(osc_enabled=True), hub=None)
        # thread not started: queue fills up
        frame = ContinuousFrame((0.0,), 0.0)
        for i in range(NetEmitter.QUEUE_SIZE + 10):
            emitter.enqueue_frame(frame, "ai", float(i))
        assert emitter.overflow == 10
        assert emitter._queue.qsize() == NetEmitter.QUEUE_SIZE

    def test_osc_errors_counted_not_raised(self):
        sender = OscSender("256.1.1.1", 9)  # unresolvable
        sender.send("/impsy/frame", [0.1])
        assert sender.errors == 1
        sender.close()


class TestFramePayload:
    def test_schema_fields(self):
        captured = []

        class Hub:
            def publish(self, payload):
                captured.append(payload)

        emitter = NetEmitter(NetConfig(websocket_enabled=True), hub=Hub())
        emitter._emit(("frame", ContinuousFrame((0.25, 0.75), 0.5), "human", 12.5))
        payload = captured[0]
        assert payload["v"] == 1
        assert payload["source"] == "human"
        assert payload["values"] == [0.25, 0.75]
        assert payload["dt"] == 0.5
        assert payload["t"] == 12.5
        json.dumps(payload)  # must be JSON-serializable

    def test_lead_payload(self):
        captured = []

        class Hub:
            def publish(self, payload):
                captured.append(payload)

        emitter = NetEmitter(NetConfig(websocket_enabled=True), hub=Hub())
        emitter._emit(("lead", "ai", 3.0))
        assert captured[0]["lead"] == "ai"

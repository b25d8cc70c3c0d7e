"""Optional network emission: OSC datagrams and a WebSocket JSON feed.

Everything here is fire-and-forget.  The engine thread only ever pays
for a bounded-queue put; a dedicated emitter thread does the socket work,
UDP drops are tolerated, and a slow WebSocket client gets disconnected
rather than ever back-pressuring the loop.

Frame feed schema (version 1, clients must tolerate unknown fields)::

    {"v": 1, "t": <seconds>, "source": "human"|"ai",
     "values": [..D floats..], "dt": <seconds>}
"""

from __future__ import annotations

import asyncio
import json
import logging
import queue
import socket
import struct
import threading
from typing import Optional

from .core import ContinuousFrame, NetConfig

logger = logging.getLogger(__name__)

FEED_SCHEMA_VERSION = 1

OSC_FRAME_ADDRESS = "/impsy/frame"
OSC_LEAD_ADDRESS = "/impsy/lead"


def osc_encode(address: str, args) -> bytes:
    """OSC 1.0 message with float32 arguments.

    Address and type-tag strings are NUL-terminated and padded to 4-byte
    boundaries; floats are big-endian.
    """
    if not address.startswith("/"):
        raise ValueError(f"OSC address must start with '/': {address!r}")
    args = [float(a) for a in args]

    def pad(b: bytes) -> bytes:
        b += b"\x00"
        return b + b"\x00" * (-len(b) % 4)

    out = pad(address.encode("utf-8"))
    out += pad(b"," + b"f" * len(args))
    out += struct.pack(f">{len(args)}f", *args)
    return out


class OscSender:
    """UDP sink; errors are counted, never raised into the caller."""

    def __init__(self, host: str, port: int):
        self.target = (host, port)
        self.errors = 0
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.setblocking(False)

    def send(self, address: str, args) -> None:
        try:
            self._sock.sendto(osc_encode(address, args), self.target)
        except OSError:
            self.errors += 1

    def close(self) -> None:
        self._sock.close()


class WsHub:
    """Fan-out point between the emitter thread and async WebSocket handlers.

    Each client registers an asyncio queue; publish() is thread-safe and
    drops (then flags) clients whose queue is full instead of waiting.
    """

    CLIENT_QUEUE_SIZE = 64

    def __init__(self):
        self._lock = threading.Lock()
        self._clients: dict[asyncio.Queue, asyncio.AbstractEventLoop] = {}
        self.dropped = 0

    def register(self) -> asyncio.Queue:
        q: asyncio.Queue = asyncio.Queue(maxsize=self.CLIENT_QUEUE_SIZE)
        with self._lock:
            self._clients[q] = asyncio.get_running_loop()
        return q

    def unregister(self, q: asyncio.Queue) -> None:
        with self._lock:
            self._clients.pop(q, None)

    @property
    def client_count(self) -> int:
        with self._lock:
            return len(self._clients)

    def publish(self, payload: dict) -> None:
        text = json.dumps(payload)
        with self._lock:
            clients = list(self._clients.items())
        for q, loop in clients:
            def push(q=q):
                try:
                    q.put_nowait(text)
                except asyncio.QueueFull:
                    # client is too slow: make room and tell its handler to
                    # hang up (None is the disconnect signal)
                    self.dropped += 1
                    try:
                        q.get_nowait()
                    except asyncio.QueueEmpty:
                        pass
                    try:
                        q.put_nowait(None)
                    except asyncio.QueueFull:
                        pass
            try:
                loop.call_soon_threadsafe(push)
            except RuntimeError:
                # loop already closed; forget the client
                self.unregister(q)


class NetEmitter:
    """Dedicated emission thread behind a bounded queue.

    enqueue_* never block: on overflow the oldest item is dropped and
    counted, keeping the engine-side cost to a queue put.
    """

    QUEUE_SIZE = 256

    def __init__(self, net: NetConfig, hub: Optional[WsHub] = None):
        self.net = net
        self.hub = hub
        self.osc: Optional[OscSender] = None
        if net.osc_enabled:
            self.osc = OscSender(net.osc_host, net.osc_port)
        self._queue: queue.Queue = queue.Queue(maxsize=self.QUEUE_SIZE)
        self.overflow = 0
        self._thread: Optional[threading.Thread] = None

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, name="net-emitter", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._put(None)
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def _put(self, item) -> None:
        while True:
            try:
                self._queue.put_nowait(item)
                return
            except queue.Full:
                try:
                    self._queue.get_nowait()
                    self.overflow += 1
                except queue.Empty:
                    pass

    def enqueue_frame(self, frame: ContinuousFrame, source: str, t: float) -> None:
        if self.osc is None and self.hub is None:
            return
        self._put(("frame", frame, source, t))

    def enqueue_lead(self, lead: str, t: float) -> None:
        if self.osc is None and self.hub is None:
            return
        self._put(("lead", lead, t))

    def _run(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            try:
                self._emit(item)
            except Exception:
                logger.exception("network emission failed")

    def _emit(self, item) -> None:
        if item[0] == "frame":
            _, frame, source, t = item
            if self.osc is not None:
                self.osc.send(OSC_FRAME_ADDRESS, frame.values)
            if self.hub is not None and self.net.websocket_enabled:
                self.hub.publish({
                    "v": FEED_SCHEMA_VERSION,
                    "t": round(t, 6),
                    "source": source,
                    "values": [round(v, 6) for v in frame.values],
                    "dt": round(frame.dt, 6),
                })
        elif item[0] == "lead":
            _, lead, t = item
            if self.osc is not None:
                self.osc.send(OSC_LEAD_ADDRESS, [1.0 if lead == "ai" else 0.0])
            if self.hub is not None and self.net.websocket_enabled:
                self.hub.publish({
                    "v": FEED_SCHEMA_VERSION, "t": round(t, 6), "lead": lead,
                })

"""MIDI device abstraction: virtual loopback ports plus optional hardware.

The virtual hub is a first-class backend, not a test shim: it lets the
whole engine run with zero hardware, which is also how the integration
suite drives it.  Hardware I/O goes through python-rtmidi when that
package is installed; it is imported lazily so the core install stays
dependency-light.

Input timestamps are assigned at ingest, before any queueing, so
downstream latency never distorts dt computation.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from .codec import MidiMessage, StreamParser, serialize


@dataclass(frozen=True)
class TimedMidi:
    message: MidiMessage
    at: float  # monotonic seconds at ingest
    device: str = ""


class MidiNotFoundError(LookupError):
    """Selector matched no device; carries the names that do exist."""

    def __init__(self, selector: str, candidates):
        self.selector = selector
        self.candidates = list(candidates)
        names = ", ".join(self.candidates) or "(none)"
        super().__init__(f"no MIDI device matches {selector!r}; available: {names}")


def match_device(selector: str, names) -> Optional[str]:
    """Exact match first, substring fallback (first listed wins)."""
    names = list(names)
    for name in names:
        if name == selector:
            return name
    for name in names:
        if selector in name:
            return name
    return None


class _VirtualInput:
    """Engine-facing input stream over a virtual port (single consumer)."""

    def __init__(self, port: "VirtualPort"):
        self._port = port
        self.device = port.name

    def poll(self) -> list[TimedMidi]:
        return self._port._drain()

    @property
    def ended(self) -> bool:
        return self._port.disconnected and not self._port._has_pending()

    def close(self) -> None:
        pass


class _VirtualOutput:
    def __init__(self, port: "VirtualPort"):
        self._port = port
        self.device = port.name

    def send(self, message: MidiMessage) -> None:
        self._port._record(message)

    def close(self) -> None:
        pass


class VirtualPort:
    """One named loopback device.

    The test/peer side injects messages or raw bytes (they appear on the
    engine's input stream, timestamped at injection) and inspects what the
    engine wrote to the output side.
    """

    def __init__(self, name: str, clock: Callable[[], float]):
        self.name = name
        self._clock = clock
        self._lock = threading.Lock()
        self._queue: deque[TimedMidi] = deque()
        self._parser = StreamParser()
        self._last_at = float("-inf")
        self.disconnected = False
        self.sent: list[MidiMessage] = []
        self.sent_bytes = bytearray()

    def inject(self, payload, at: Optional[float] = None) -> None:
        """Deliver a MidiMessage or raw bytes into the engine-facing input."""
        if self.disconnected:
            raise RuntimeError(f"virtual port {self.name} is disconnected")
        stamp = self._clock() if at is None else float(at)
        if isinstance(payload, MidiMessage):
            messages = [payload]
        else:
            messages = self._parser.feed(bytes(payload))
        with self._lock:
            for message in messages:
                stamp = max(stamp, self._last_at)
                self._last_at = stamp
                self._queue.append(TimedMidi(message=message, at=stamp, device=self.name))

    def disconnect(self) -> None:
        self.disconnected = True

    def _drain(self) -> list[TimedMidi]:
        with self._lock:
            items = list(self._queue)
            self._queue.clear()
        return items

    def _has_pending(self) -> bool:
        with self._lock:
            return bool(self._queue)

    def _record(self, message: MidiMessage) -> None:
        if self.disconnected:
            raise RuntimeError(f"virtual port {self.name} is disconnected")
        with self._lock:
            self.sent.append(message)
            self.sent_bytes += serialize(message)


class VirtualMidiHub:
    """Registry of virtual loopback devices."""

    def __init__(self, clock: Callable[[], float] = time.monotonic):
        self._clock = clock
        self._ports: dict[str, VirtualPort] = {}

    def create_port(self, name: str) -> VirtualPort:
        if name in self._ports:
            return self._ports[name]
        port = VirtualPort(name, self._clock)
        self._ports[name] = port
        return port

    def list_devices(self) -> list[str]:
        return list(self._ports)

    def _resolve(self, selector: str) -> VirtualPort:
        name = match_device(selector, self._ports)
        if name is None:
            raise MidiNotFoundError(selector, self._ports)
        return self._ports[name]

    def open_input(self, selector: str) -> _VirtualInput:
        return _VirtualInput(self._resolve(selector))

    def open_output(self, selector: str) -> _VirtualOutput:
        return _VirtualOutput(self._resolve(selector))


class _RtMidiInput:
    def __init__(self, midi_in, name: str):
        self._midi_in = midi_in
        self.device = name
        self._lock = threading.Lock()
        self._queue: deque[TimedMidi] = deque()
        self._parser = StreamParser()
        self._ended = False
        midi_in.set_callback(self._on_bytes)

    def _on_bytes(self, event, _data=None) -> None:
        payload, _delta = event
        at = time.monotonic()
        for message in self._parser.feed(bytes(payload)):
            with self._lock:
                self._queue.append(TimedMidi(message=message, at=at, device=self.device))

    def poll(self) -> list[TimedMidi]:
        with self._lock:
            items = list(self._queue)
            self._queue.clear()
        return items

    @property
    def ended(self) -> bool:
        return self._ended

    def close(self) -> None:
        self._ended = True
        self._midi_in.close_port()


class _RtMidiOutput:
    def __init__(self, midi_out, name: str):
        self._midi_out = midi_out
        self.device = name
        self._lock = threading.Lock()

    def send(self, message: MidiMessage) -> None:
        with self._lock:
            self._midi_out.send_message(list(serialize(message)))

    def close(self) -> None:
        self._midi_out.close_port()


class RtMidiBackend:
    """Hardware MIDI via python-rtmidi (install separately)."""

    def __init__(self):
        try:
            import rtmidi  # type: ignore
        except ImportError as exc:
            raise RuntimeError(
                "hardware MIDI requires the python-rtmidi package; "
                "install it or run with the virtual backend"
            ) from exc
        self._rtmidi = rtmidi

    def list_devices(self) -> list[str]:
        probe = self._rtmidi.MidiIn()
        names = probe.get_ports()
        probe.delete()
        return names

    def open_input(self, selector: str):
        midi_in = self._rtmidi.MidiIn()
        ports = midi_in.get_ports()
        name = match_device(selector, ports)
        if name is None:
            midi_in.delete()
            raise MidiNotFoundError(selector, ports)
        midi_in.open_port(ports.index(name))
        midi_in.ignore_types(sysex=True, timing=False, active_sense=True)
        return _RtMidiInput(midi_in, name)

    def open_output(self, selector: str):
        midi_out = self._rtmidi.MidiOut()
        ports = midi_out.get_ports()
        name = match_device(selector, ports)
        if name is None:
            midi_out.delete()
            raise MidiNotFoundError(selector, ports)
        midi_out.open_port(ports.index(name))
        return _RtMidiOutput(midi_out, name)


def open_backend(kind: str = "virtual", hub: Optional[VirtualMidiHub] = None,
                 clock: Callable[[], float] = time.monotonic):
    if kind == "virtual":
        return hub if hub is not None else VirtualMidiHub(clock=clock)
    if kind == "rtmidi":
        return RtMidiBackend()
    raise ValueError(f"unknown MIDI backend {kind!r} (expected 'virtual' or 'rtmidi')")

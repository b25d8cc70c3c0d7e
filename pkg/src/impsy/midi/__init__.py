from .codec import MessageKind, MidiMessage, StreamParser, control_change, note_off, note_on, serialize
from .devices import (
    MidiNotFoundError,
    TimedMidi,
    VirtualMidiHub,
    match_device,
    open_backend,
)

__all__ = [
    "MessageKind",
    "MidiMessage",
    "MidiNotFoundError",
    "StreamParser",
    "TimedMidi",
    "VirtualMidiHub",
    "control_change",
    "match_device",
    "note_off",
    "note_on",
    "open_backend",
    "serialize",
]

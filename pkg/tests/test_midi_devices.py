import pytest

from impsy.midi.codec import control_change, note_on
from impsy.midi.devices import MidiNotFoundError, VirtualMidiHub, match_device


class FakeClock:
    def __init__(self, t=0.0):
        self.t = t

    def __call__(self):
        return self.t


class TestMatchDevice:
    def test_exact_beats_substring(self):
        names = ["synth", "synth mk2", "controller"]
        assert match_device("synth", names) == "synth"

    def test_substring_fallback(self):
        names = ["Roland S-1 MIDI 1", "X-Touch Mini"]
        assert match_device("S-1", names) == "Roland S-1 MIDI 1"

    def test_no_match(self):
        assert match_device("volca", ["synth"]) is None


class TestVirtualHub:
    def test_unknown_selector_lists_candidates(self):
        hub = VirtualMidiHub()
        hub.create_port("synth")
        with pytest.raises(MidiNotFoundError) as err:
            hub.open_input("volca")
        assert err.value.candidates == ["synth"]
        assert "synth" in str(err.value)

    def test_loopback_order_and_timestamps(self):
        clock = FakeClock()
        hub = VirtualMidiHub(clock=clock)
        port = hub.create_port("loop")
        stream = hub.open_input("loop")
        for i in range(100):
            clock.t = i * 0.01
            port.inject(control_change(0, 1, i % 128))
        events = stream.poll()
        assert len(events) == 100
        assert [e.message.data2 for e in events] == [i % 128 for i in range(100)]
        stamps = [e.at for e in events]
        assert stamps == sorted(stamps)
        assert all(e.device == "loop" for e in events)

    def test_timestamps_never_go_backwards(self):
        clock = FakeClock(5.0)
        hub = VirtualMidiHub(clock=clock)
        port = hub.create_port("loop")
        stream = hub.open_input("loop")
        port.inject(note_on(0, 60, 1))
        clock.t = 1.0  # clock regression must not produce descending stamps
        port.inject(note_on(0, 61, 1))
        stamps = [e.at for e in stream.poll()]
        assert stamps == sorted(stamps)

    def test_bytes_injection_goes_through_parser(self):
        hub = VirtualMidiHub(clock=FakeClock())
        port = hub.create_port("loop")
        stream = hub.open_input("loop")
        port.inject(bytes([0x90, 0x3C, 0x64, 0x3E, 0x64]))  # running status
        events = stream.poll()
        assert [e.message.data1 for e in events] == [0x3C, 0x3E]

    def test_output_records_messages_and_bytes(self):
        hub = VirtualMidiHub(clock=FakeClock())
        port = hub.create_port("synth")
        out = hub.open_output("synth")
        out.send(note_on(0, 60, 100))
        assert port.sent == [note_on(0, 60, 100)]
        assert bytes(port.sent_bytes) == bytes([0x90, 0x3C, 0x64])

    def test_disconnect_surfaces_as_stream_end(self):
        hub = VirtualMidiHub(clock=FakeClock())
        port = hub.create_port("loop")
        stream = hub.open_input("loop")
        port.inject(note_on(0, 60, 1))
        port.disconnect()
        assert not stream.ended  # one event still queued
        assert len(stream.poll()) == 1
        assert stream.ended
        with pytest.raises(RuntimeError):
            port.inject(note_on(0, 61, 1))

"""The real-time heart: lead state machine, dt scheduler, model tracking.

EngineCore is sans-IO and single-owner: time comes in through method
arguments (monotonic seconds), effects go out through the returned
emission lists and the log/frame/lead sinks.  That makes the whole
interaction protocol a pure function of (event trace, config, seed),
which is exactly how the scripted-trace tests drive it; the runtime
module wires it to real clocks, devices, and threads.

Generation is lazy - one model step per AI frame, taken only when the
pending slot is empty - so a human steal-back never wastes more than the
single frame in flight.
"""

from __future__ import annotations

import enum
import heapq
import logging
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from typing import Callable, Optional

import numpy as np

from .core import ContinuousFrame, EngineConfig, InteractionMode, RouteKind
from .mapping import OutboundRouter
from .mdrnn import model as mdrnn_model
from .mdrnn.model import MdrnnParams, MdrnnState
from .midi.codec import MidiMessage, note_off
from .sessionlog import LogRecord

logger = logging.getLogger(__name__)

# comparisons on sums of clock readings need a hair of slack, or exact
# grid-aligned schedules (0.05 + 0.1 vs 0.15) miss by one ulp and slip a tick
_TIME_EPS = 1e-9


class Lead(str, enum.Enum):
    HUMAN = "human"
    AI = "ai"


@dataclass(frozen=True)
class OutboundEvent:
    """One MIDI message due at a specific time on a specific device."""

    due: float
    device: str
    message: MidiMessage


@dataclass(frozen=True)
class _ScheduledFrame:
    due: float
    frame: ContinuousFrame
    entries: tuple  # (output index, RouteOut, MidiMessage)


class EngineCore:
    """Single-owner interaction engine; all methods from one thread."""

    def __init__(
        self,
        config: EngineConfig,
        params: MdrnnParams,
        model_name: str = "",
        rng: Optional[np.random.Generator] = None,
        log_sink: Optional[Callable[[LogRecord], None]] = None,
        frame_sink: Optional[Callable[[ContinuousFrame, str, float], None]] = None,
        lead_sink: Optional[Callable[[Lead, float], None]] = None,
    ):
        if params.D != config.dimension:
            raise ValueError(
                f"model dimension {params.D} does not match config dimension {config.dimension}"
            )
        self.config = config
        self.params = params
        self.model_name = model_name
        self.rng = rng if rng is not None else np.random.default_rng(config.rng_seed)
        self.log_sink = log_sink
        self.frame_sink = frame_sink
        self.lead_sink = lead_sink

        self.out_router = OutboundRouter(config)
        self.lead = Lead.HUMAN
        self.started_at: Optional[float] = None
        self._wall_epoch = datetime.now()
        self.last_human_at = 0.0
        self._last_effect_at = 0.0
        self._values: list[float] = [0.5] * config.dimension
        self.state: MdrnnState = mdrnn_model.initial_state(params)
        self._next_mixture = None
        self._pending: Optional[_ScheduledFrame] = None
        self._note_offs: list[tuple[float, int, str, MidiMessage]] = []  # heap by due
        self._off_seq = 0  # heap tie-breaker; messages are not orderable

        self.counts = {
            "human_events": 0, "ai_frames": 0, "midi_out": 0,
            "steal_backs": 0, "canceled_events": 0, "generation_failures": 0,
        }
        self._recent_human: list[float] = []
        self._recent_ai: list[float] = []

    # -- lifecycle ----------------------------------------------------------

    def start(self, now: float, wall_epoch: Optional[datetime] = None) -> None:
        """Arm the engine: the human-silence clock starts counting here."""
        self.started_at = now
        self._wall_epoch = wall_epoch if wall_epoch is not None else datetime.now()
        self.last_human_at = now
        self._last_effect_at = now
        self._values = [0.5] * self.config.dimension
        self.state = mdrnn_model.initial_state(self.params)
        self._next_mixture = None
        self._pending = None
        self._note_offs = []
        self.lead = Lead.AI if self.config.interaction.mode is InteractionMode.AI_ONLY \
            else Lead.HUMAN

    def _wall(self, at: float) -> datetime:
        return self._wall_epoch + timedelta(seconds=at - (self.started_at or 0.0))

    def _set_lead(self, lead: Lead, at: float) -> None:
        if lead is not self.lead:
            self.lead = lead
            if self.lead_sink is not None:
                self.lead_sink(lead, at)

    # -- model plumbing -----------------------------------------------------

    def _feed(self, frame: ContinuousFrame) -> None:
        """Condition the network on a realized frame (exactly once each)."""
        mix, new_state = mdrnn_model.forward_step(
            self.params, self.state, mdrnn_model.encode_frame(frame)
        )
        self.state = replace(new_state, last_frame=frame)
        self._next_mixture = mix

    def _log(self, source: str, frame: ContinuousFrame, at: float) -> None:
        if self.log_sink is not None:
            self.log_sink(LogRecord(at=self._wall(at), source=source, dims=frame.values))
        if self.frame_sink is not None:
            self.frame_sink(frame, source, at)

    # -- inbound ------------------------------------------------------------

    def on_human_event(self, dim: int, value: float, at: float) -> None:
        """A mapped human control event: condition, log, steal back."""
        if not 0 <= dim < self.config.dimension:
            raise ValueError(f"dim {dim} out of range 0..{self.config.dimension - 1}")
        self._values[dim] = min(1.0, max(0.0, float(value)))
        dt = min(max(at - self._last_effect_at, 0.0), self.config.dt_max)
        frame = ContinuousFrame(values=tuple(self._values), dt=dt)
        self._feed(frame)
        self._last_effect_at = at
        self.last_human_at = at
        self.counts["human_events"] += 1
        self._recent_human.append(at)
        self._log("human", frame, at)
        if self.config.interaction.mode is InteractionMode.CALL_AND_RESPONSE:
            if self._pending is not None:
                self.counts["canceled_events"] += len(self._pending.entries)
                self.counts["steal_backs"] += 1
                self._pending = None
            self._set_lead(Lead.HUMAN, at)

    # -- tick ---------------------------------------------------------------

    def tick(self, now: float) -> list[OutboundEvent]:
        """Advance the scheduler to ``now``; returns everything due."""
        emissions: list[OutboundEvent] = []

        if self._pending is not None and self._pending.due <= now + _TIME_EPS:
            scheduled = self._pending
            self._pending = None
            for index, route, message in scheduled.entries:
                emissions.append(OutboundEvent(scheduled.due, route.device, message))
                self.out_router.mark_emitted(index, message)
                if route.kind is RouteKind.NOTE_ON:
                    off = note_off(route.channel, message.data1, 0)
                    self._off_seq += 1
                    heapq.heappush(
                        self._note_offs,
                        (scheduled.due + self.config.gate_s, self._off_seq,
                         route.device, off),
                    )
            self._values = list(scheduled.frame.values)
            self._last_effect_at = scheduled.due
            self.counts["ai_frames"] += 1
            self._recent_ai.append(scheduled.due)
            self._log("ai", scheduled.frame, scheduled.due)

        while self._note_offs and self._note_offs[0][0] <= now + _TIME_EPS:
            due, _seq, device, message = heapq.heappop(self._note_offs)
            emissions.append(OutboundEvent(due, device, message))

        mode = self.config.interaction.mode
        if (
            mode is InteractionMode.CALL_AND_RESPONSE
            and self.lead is Lead.HUMAN
            and now - self.last_human_at >= self.config.interaction.switchover_s - _TIME_EPS
        ):
            self._set_lead(Lead.AI, now)

        if self.lead is Lead.AI and mode is not InteractionMode.HUMAN_ONLY \
                and self._pending is None:
            try:
                self._generate(now)
            except Exception:  # never kill the loop; re-arm next tick
                self.counts["generation_failures"] += 1
                logger.exception("frame generation failed; retrying next tick")

        emissions.sort(key=lambda e: e.due)
        self.counts["midi_out"] += len(emissions)
        return emissions

    def _generate(self, now: float) -> None:
        if self._next_mixture is None:
            self._feed(self.state.last_frame)
        vec = mdrnn_model.sample(
            self._next_mixture,
            pi_temp=self.config.sampling.pi_temp,
            sigma_temp=self.config.sampling.sigma_temp,
            rng=self.rng,
        )
        frame = mdrnn_model.vector_to_frame(vec, dt_max=self.config.dt_max)
        self._feed(frame)
        entries = tuple(self.out_router.route(frame))
        self._pending = _ScheduledFrame(due=now + frame.dt, frame=frame, entries=entries)

    # -- reconfiguration (tick boundary only) --------------------------------

    def apply_config(self, config: EngineConfig,
                     params: Optional[MdrnnParams] = None,
                     model_name: Optional[str] = None) -> None:
        if params is None and config.dimension != self.config.dimension:
            raise ValueError("dimension change requires new model params")
        mode_changed = config.interaction.mode is not self.config.interaction.mode
        self.config = config
        self.out_router.apply_config(config)
        if params is not None:
            self.apply_model(params, model_name or self.model_name)
        elif mode_changed and config.interaction.mode is InteractionMode.AI_ONLY:
            self.lead = Lead.AI
        elif mode_changed and config.interaction.mode is InteractionMode.HUMAN_ONLY:
            self.lead = Lead.HUMAN

    def apply_model(self, params: MdrnnParams, model_name: str = "") -> None:
        if params.D != self.config.dimension:
            raise ValueError(
                f"model dimension {params.D} does not match config dimension "
                f"{self.config.dimension}"
            )
        self.params = params
        self.model_name = model_name
        self.state = mdrnn_model.initial_state(params)
        self._next_mixture = None
        self._pending = None

    # -- introspection --------------------------------------------------------

    def snapshot(self, now: float) -> dict:
        cutoff = now - 1.0
        self._recent_human = [t for t in self._recent_human if t > cutoff]
        self._recent_ai = [t for t in self._recent_ai if t > cutoff]
        return {
            "lead": self.lead.value,
            "dimension": self.config.dimension,
            "model_name": self.model_name,
            "uptime_s": max(0.0, now - self.started_at) if self.started_at is not None else 0.0,
            "pending_events": len(self._pending.entries) if self._pending else 0,
            "interaction": {
                "mode": self.config.interaction.mode.value,
                "switchover_s": self.config.interaction.switchover_s,
            },
            "counters": dict(self.counts),
            "last_1s": {
                "human_events": len(self._recent_human),
                "ai_frames": len(self._recent_ai),
            },
        }

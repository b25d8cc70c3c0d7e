"""Wires the sans-IO engine core to real clocks, devices, and threads.

Thread layout: one engine thread owns the core state and ticks it at
tick_hz; MIDI ingest happens via stream polls inside that thread (the
virtual hub and rtmidi both deliver into lock-protected queues); session
logging and network emission run on their own writer threads behind
bounded queues.  The web service never touches engine state - it posts
snapshot/apply messages into the mailbox, which the engine drains at tick
boundaries.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from datetime import datetime
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .core import EngineConfig, save_config
from .engine import EngineCore
from .mapping import InboundRouter
from .mdrnn.model import MdrnnParams
from .mdrnn.weights import load_weights
from .midi.devices import VirtualMidiHub, open_backend
from .netio import NetEmitter, WsHub
from .sessionlog import LogRecord, LogWriter

logger = logging.getLogger(__name__)


class StartupError(RuntimeError):
    pass


class _QueuedLogWriter:
    """Bounded queue in front of the session writer; drops and counts on
    overflow so the engine thread never blocks on disk."""

    QUEUE_SIZE = 1024

    def __init__(self, writer: LogWriter):
        self.writer = writer
        self.overflow = 0
        self._queue: queue.Queue = queue.Queue(maxsize=self.QUEUE_SIZE)
        self._thread = threading.Thread(target=self._run, name="session-log", daemon=True)
        self._thread.start()

    def write(self, record: LogRecord) -> None:
        try:
            self._queue.put_nowait(record)
        except queue.Full:
            self.overflow += 1

    def close(self) -> None:
        self._queue.put(None)
        self._thread.join(timeout=2.0)
        self.writer.close()

    def _run(self) -> None:
        while True:
            record = self._queue.get()
            if record is None:
                return
            self.writer.write(record)


class EngineRuntime:
    """Owns the engine thread and everything it talks to."""

    def __init__(
        self,
        config: EngineConfig,
        config_path: Optional[Path] = None,
        backend: str = "virtual",
        hub: Optional[VirtualMidiHub] = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.config = config
        self.config_path = Path(config_path) if config_path is not None else None
        self.base_dir = self.config_path.resolve().parent if self.config_path else Path.cwd()
        self.clock = clock
        self.backend_kind = backend
        self.backend = open_backend(backend, hub=hub, clock=clock)

        model_path = self._resolve(config.model_file)
        if not model_path.exists():
            raise StartupError(f"model file not found: {model_path}")
        self.params: MdrnnParams = load_weights(model_path)
        self.model_name = model_path.name

        self.ws_hub = WsHub()
        self.net = NetEmitter(config.net, hub=self.ws_hub)
        self.log_writer = _QueuedLogWriter(
            LogWriter(self._resolve(config.log_dir), config.dimension)
        )
        self.in_router = InboundRouter(config)

        self.core = EngineCore(
            config,
            self.params,
            model_name=self.model_name,
            rng=np.random.default_rng(config.rng_seed),
            log_sink=self.log_writer.write,
            frame_sink=lambda frame, source, t: self.net.enqueue_frame(frame, source, t),
            lead_sink=lambda lead, t: self.net.enqueue_lead(lead.value, t),
        )

        self._inputs: dict[str, object] = {}
        self._outputs: dict[str, object] = {}
        self._passthrough = None
        self._open_devices(config)

        self._mailbox: queue.Queue = queue.Queue()
        self._stop = threading.Event()
        self._ready = threading.Event()
        self._thread: Optional[threading.Thread] = None
        self.started_wall: Optional[datetime] = None

    # -- device management ---------------------------------------------------

    def _resolve(self, path_str: str) -> Path:
        path = Path(path_str)
        return path if path.is_absolute() else self.base_dir / path

    def _open_devices(self, config: EngineConfig) -> None:
        selectors_in = {r.device for r in config.inputs}
        selectors_out = {r.device for r in config.outputs}
        if self.backend_kind == "virtual":
            # virtual mode materializes every referenced device
            extra = {config.passthrough_device} if config.passthrough_device else set()
            for name in selectors_in | selectors_out | extra:
                self.backend.create_port(name)
        for sel in selectors_in:
            if sel not in self._inputs:
                self._inputs[sel] = self.backend.open_input(sel)
        for sel in list(self._inputs):
            if sel not in selectors_in:
                self._inputs.pop(sel).close()
        for sel in selectors_out:
            if sel not in self._outputs:
                self._outputs[sel] = self.backend.open_output(sel)
        for sel in list(self._outputs):
            if sel not in selectors_out:
                self._outputs.pop(sel).close()
        if config.passthrough_device:
            self._passthrough = self.backend.open_output(config.passthrough_device)
        else:
            self._passthrough = None
        # map each outbound route's device selector to its opened port
        self._out_by_selector = dict(self._outputs)

    # -- lifecycle -------------------------------------------------------------

    def start(self, wait_ready: float = 5.0) -> None:
        self.started_wall = datetime.now()
        self.log_writer.writer.rotate(self.started_wall)
        self.net.start()
        self._thread = threading.Thread(target=self._loop, name="engine", daemon=True)
        self._thread.start()
        if not self._ready.wait(timeout=wait_ready):
            raise StartupError("engine thread failed to start in time")

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
        self.net.stop()
        self.log_writer.close()

    # -- service-facing API (thread-safe, message passing) ----------------------

    def _ask(self, kind: str, payload, timeout: float = 2.0):
        reply: queue.Queue = queue.Queue(maxsize=1)
        self._mailbox.put((kind, payload, reply))
        try:
            return reply.get(timeout=timeout)
        except queue.Empty:
            raise TimeoutError(f"engine did not answer {kind} request")

    def snapshot(self) -> dict:
        snap = self._ask("snapshot", None)
        snap.update({
            "state": "running" if self._thread and self._thread.is_alive() else "stopped",
            "model_file": self.config.model_file,
            "logging_disabled": self.log_writer.writer.disabled,
            "routing": {
                "matched": self.in_router.matched,
                "passed": self.in_router.passed,
                "dropped": self.in_router.dropped,
            },
        })
        return snap

    def apply_config(self, config: EngineConfig,
                     params: Optional[MdrnnParams] = None,
                     model_name: Optional[str] = None) -> None:
        ok, error = self._ask("config", (config, params, model_name))
        if not ok:
            raise ValueError(error)
        self.config = config
        if params is not None and model_name:
            self.model_name = model_name
        if self.config_path is not None:
            save_config(config, self.config_path)

    def apply_model(self, params: MdrnnParams, model_name: str) -> None:
        ok, error = self._ask("model", (params, model_name))
        if not ok:
            raise ValueError(error)
        self.model_name = model_name

    # -- engine thread -----------------------------------------------------------

    def _loop(self) -> None:
        core = self.core
        core.start(self.clock(), wall_epoch=self.started_wall)
        period = 1.0 / self.config.interaction.tick_hz
        next_t = self.clock()
        self._ready.set()
        while not self._stop.is_set():
            now = self.clock()
            wait = next_t - now
            if wait > 0:
                if self._stop.wait(timeout=wait):
                    break
            now = self.clock()
            self._drain_mailbox(now)
            self._poll_inputs()
            try:
                emissions = core.tick(now)
            except Exception:
                logger.exception("engine tick failed; continuing")
                emissions = []
            for event in emissions:
                port = self._port_for(event.device)
                if port is not None:
                    try:
                        port.send(event.message)
                    except Exception:
                        logger.exception("MIDI send failed on %s", event.device)
            period = 1.0 / self.config.interaction.tick_hz
            next_t += period
            if next_t < now - 1.0:  # fell far behind; resynchronize
                next_t = now

    def _port_for(self, selector: str):
        return self._out_by_selector.get(selector)

    def _drain_mailbox(self, now: float) -> None:
        while True:
            try:
                kind, payload, reply = self._mailbox.get_nowait()
            except queue.Empty:
                return
            try:
                if kind == "snapshot":
                    reply.put(self.core.snapshot(now))
                elif kind == "config":
                    config, params, model_name = payload
                    dimension_changed = config.dimension != self.core.config.dimension
                    self.core.apply_config(config, params=params, model_name=model_name)
                    self.in_router.apply_config(config)
                    self._open_devices(config)
                    self.net.net = config.net
                    if dimension_changed:
                        self.log_writer.writer.dimension = config.dimension
                        self.log_writer.writer.rotate(datetime.now())
                    reply.put((True, None))
                elif kind == "model":
                    params, model_name = payload
                    self.core.apply_model(params, model_name)
                    reply.put((True, None))
            except Exception as exc:
                logger.exception("mailbox %s request failed", kind)
                reply.put((False, str(exc)))

    def _poll_inputs(self) -> None:
        for stream in list(self._inputs.values()):
            if getattr(stream, "ended", False):
                continue
            for event in stream.poll():
                hit, forward = self.in_router.route(event)
                if hit is not None:
                    dim, value, at = hit
                    self.core.on_human_event(dim, value, at)
                elif forward and self._passthrough is not None:
                    try:
                        self._passthrough.send(event.message)
                    except Exception:
                        logger.exception("passthrough send failed")

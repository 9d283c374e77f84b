"""Soft-real-time wrapper around the closed loop with live telemetry.

One thread owns the simulation and advances it at wall-clock rate (catching
up after jitter); network ingress only deposits validated commands into a
bounded mailbox that the loop drains at tick boundaries, so live runs stay
replayable.  Telemetry fan-out reads immutable snapshot frames and can never
back-pressure the loop.

Wire format (newline-delimited JSON over ``/ws``):
  server -> client: {"type": "state", "t": ..., "x_o": ..., "y_o": ...,
                     "x_r": ..., "y_r": ..., "tau_est": ..., "E_in": ...,
                     "E_out": ..., "zeta": ..., "arch": "wave+pred",
                     "delay": 1.0}
  client -> server: {"type": "input", "throttle": 0.5}
                    {"type": "config", "delay": 1.0, "arch": "wave", "b": 7.5}
"""

from __future__ import annotations

import asyncio
import json
import logging
import math
import os
import queue
import threading
import time

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse

from .harness import Architecture, ClosedLoop, ExperimentConfig, TraceLog

log = logging.getLogger("teleopsim.service")


def _configure_logging() -> str:
    level = os.environ.get("TELEOPSIM_LOG", "info").lower()
    numeric = getattr(logging, level.upper(), None)
    if not isinstance(numeric, int):
        numeric = logging.INFO
        level = "info"
    logging.basicConfig(level=numeric)
    return level


class CommandRejected(ValueError):
    """Client message failed wire-schema validation."""


def _validate_command(msg: dict) -> dict:
    if not isinstance(msg, dict) or "type" not in msg:
        raise CommandRejected("message must be an object with a 'type' field")
    kind = msg["type"]
    if kind == "input":
        throttle = msg.get("throttle")
        if not isinstance(throttle, (int, float)) or not math.isfinite(throttle):
            raise CommandRejected("input.throttle must be a finite number")
        if not -1.0 <= throttle <= 1.0:
            raise CommandRejected(f"input.throttle out of range [-1, 1]: {throttle}")
        return {"type": "input", "throttle": float(throttle)}
    if kind == "config":
        out: dict = {"type": "config"}
        if "delay" in msg:
            delay = msg["delay"]
            if not isinstance(delay, (int, float)) or not math.isfinite(delay) or delay < 0:
                raise CommandRejected(f"config.delay must be >= 0, got {delay!r}")
            out["delay"] = float(delay)
        if "arch" in msg:
            try:
                out["arch"] = Architecture.parse(str(msg["arch"]))
            except ValueError as exc:
                raise CommandRejected(str(exc)) from exc
        if "b" in msg:
            b = msg["b"]
            if not isinstance(b, (int, float)) or not math.isfinite(b) or b <= 0:
                raise CommandRejected(f"config.b must be > 0, got {b!r}")
            out["b"] = float(b)
        if len(out) == 1:
            raise CommandRejected("config message carries no recognized field")
        return out
    raise CommandRejected(f"unknown message type {kind!r}")


class TeleopService:
    """Simulation session: one closed loop, a command mailbox, snapshot frames."""

    def __init__(self, cfg: ExperimentConfig, telemetry_hz: float = 30.0,
                 record: bool = False, mailbox_size: int = 256):
        cfg.validate()
        self.loop = ClosedLoop(cfg)
        self.telemetry_hz = telemetry_hz
        self._mailbox: queue.Queue = queue.Queue(maxsize=mailbox_size)
        self._throttle = 0.0
        self._frame = self._make_frame(None)
        self._thread: threading.Thread | None = None
        self._running = False
        self.record = record
        self.trace: TraceLog | None = TraceLog(cfg) if record else None
        self.command_log: list[tuple[int, dict]] = []

    # -- ingress ------------------------------------------------------------

    def submit(self, msg: dict) -> None:
        """Validate and enqueue a command; applied at the next tick boundary."""
        cmd = _validate_command(msg)
        try:
            self._mailbox.put_nowait(cmd)
        except queue.Full:
            raise CommandRejected("command mailbox full, message dropped") from None

    def submit_json(self, text: str) -> None:
        try:
            msg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CommandRejected(f"malformed JSON: {exc}") from exc
        self.submit(msg)

    # -- tick loop ------------------------------------------------------------

    def _drain_mailbox(self) -> None:
        while True:
            try:
                cmd = self._mailbox.get_nowait()
            except queue.Empty:
                return
            self.command_log.append((self.loop.k, cmd))
            if cmd["type"] == "input":
                self._throttle = cmd["throttle"]
            else:
                if "arch" in cmd:
                    self.loop.set_arch(cmd["arch"])
                if "b" in cmd:
                    self.loop.set_b(cmd["b"])
                if "delay" in cmd:
                    self.loop.set_delay(cmd["delay"])

    def step(self, n: int = 1) -> None:
        """Advance n ticks, draining the mailbox at each boundary."""
        for _ in range(n):
            self._drain_mailbox()
            row = self.loop.tick(self._throttle)
            if self.trace is not None:
                self.trace.append(row)
            self._frame = self._make_frame(row)

    def _make_frame(self, row) -> dict:
        cfg = self.loop.cfg
        if row is None:
            values = dict.fromkeys(
                ("t", "x_o", "y_o", "x_r", "y_r", "tau_est", "E_in", "E_out", "zeta"),
                0.0,
            )
        else:
            (t, x_o, y_o, x_r, y_r, _u_o, _v_o, _u_r, _v_r,
             tau_est, e_in, e_out, zeta, _flags) = row
            values = {
                "t": t, "x_o": x_o, "y_o": y_o, "x_r": x_r, "y_r": y_r,
                "tau_est": tau_est, "E_in": e_in, "E_out": e_out, "zeta": zeta,
            }
        return {"type": "state", **values,
                "arch": cfg.arch.value, "delay": cfg.delay}

    def snapshot(self) -> dict:
        """Latest telemetry frame; never blocks the loop."""
        return self._frame

    # -- pacing ---------------------------------------------------------------

    def start(self) -> None:
        """Advance the loop at wall-clock rate on a background thread."""
        if self._running:
            return
        self._running = True
        self._thread = threading.Thread(target=self._paced_run, daemon=True,
                                        name="teleopsim-loop")
        self._thread.start()

    def stop(self) -> None:
        self._running = False
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None

    def _paced_run(self) -> None:
        dt = self.loop.dt
        next_t = time.perf_counter()
        while self._running:
            now = time.perf_counter()
            if now < next_t:
                time.sleep(min(next_t - now, 0.005))
                continue
            behind = int((now - next_t) / dt) + 1
            n = min(behind, 2000)  # bound catch-up bursts
            self.step(n)
            next_t += n * dt


def create_app(service: TeleopService, static_dir: str | None = None) -> FastAPI:
    """FastAPI app exposing /ws, /health, and optionally a static console."""
    app = FastAPI(title="teleopsim")
    app.state.service = service

    @app.get("/health")
    async def health() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        interval = 1.0 / service.telemetry_hz

        async def send_frames():
            while True:
                await websocket.send_text(json.dumps(service.snapshot()))
                await asyncio.sleep(interval)

        sender = asyncio.create_task(send_frames())
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    service.submit_json(text)
                except CommandRejected as exc:
                    await websocket.send_text(
                        json.dumps({"type": "error", "message": str(exc)})
                    )
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()

    if static_dir and os.path.isdir(static_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app


def _default_static_dir() -> str | None:
    here = os.path.dirname(os.path.abspath(__file__))
    for candidate in (
        os.path.join(os.getcwd(), "frontend", "dist"),
        os.path.join(here, "..", "..", "frontend", "dist"),
    ):
        if os.path.isdir(candidate):
            return candidate
    return None


def serve(bind: str, cfg: ExperimentConfig, telemetry_hz: float = 30.0) -> None:
    """Run the paced loop and the HTTP/websocket front door (blocking)."""
    import uvicorn

    level = _configure_logging()
    host, _, port_text = bind.partition(":")
    if not host or not port_text:
        raise ValueError(f"bind must be host:port, got {bind!r}")
    service = TeleopService(cfg, telemetry_hz=telemetry_hz)
    app = create_app(service, static_dir=_default_static_dir())
    service.start()
    log.info("serving on %s (arch=%s, delay=%s)", bind, cfg.arch.value, cfg.delay)
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level=level)
    finally:
        service.stop()

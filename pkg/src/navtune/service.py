"""HTTP + WebSocket tuning service.

Endpoints:
  GET   /params    registry snapshot with descriptors and revision
  PATCH /params    atomic parameter patch ``{"values": {...}}``
  POST  /goal      replace the active goal ``{"x","y","theta"}``
  POST  /scenario  load a scenario from text, resetting world and registry
  GET   /state     full current state (costmap as a complete cell dump)
  POST  /control   ``{"action": "pause"|"resume"|"step"|"reset"|"speed"}``
  WS    /stream    per-cycle StateFrames as length-prefixed JSON text

Wire format on /stream: each message is ``<byte-length>:<json>`` where the
length counts the UTF-8 bytes of the JSON document.
"""

from __future__ import annotations

import asyncio
import json
import math
from collections import deque
from pathlib import Path as FsPath

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, FileResponse

from .executive import Navigator
from .params import ParameterRegistry, PatchError
from .world import Scenario, load_scenario

QUEUE_SOFT_LIMIT = 64


def encode_message(obj: dict) -> str:
    body = json.dumps(obj, separators=(",", ":"), ensure_ascii=False)
    return f"{len(body.encode('utf-8'))}:{body}"


def decode_message(text: str) -> dict:
    head, _, body = text.partition(":")
    n = int(head)
    raw = body.encode("utf-8")
    if len(raw) != n:
        raise ValueError(f"length prefix {n} != body length {len(raw)}")
    return json.loads(body)


def coalesce_frames(older: dict, newer: dict) -> dict:
    """Merge two consecutive frames so delta replay stays lossless."""
    out = dict(newer)
    oc, nc = older["costmap"], newer["costmap"]
    if not nc["keyframe"] and not oc["keyframe"]:
        merged = dict(nc)
        merged["delta"] = list(oc["delta"]) + list(nc["delta"])
        out["costmap"] = merged
    elif not nc["keyframe"] and oc["keyframe"]:
        cells = list(oc["cells"])
        for i, v in nc["delta"]:
            cells[i] = v
        merged = dict(nc)
        merged.pop("delta", None)
        merged["keyframe"] = True
        merged["cells"] = cells
        out["costmap"] = merged
    out["coalesced"] = True
    return out


class Subscriber:
    """Per-client frame buffer.

    When the buffer backs up past QUEUE_SOFT_LIMIT, the newest two frames are
    coalesced at the tail so replay order and losslessness are preserved.
    """

    def __init__(self):
        self.frames: deque = deque()
        self._event = asyncio.Event()

    def push(self, frame: dict) -> None:
        if len(self.frames) >= QUEUE_SOFT_LIMIT and self.frames:
            frame = coalesce_frames(self.frames.pop(), frame)
        self.frames.append(frame)
        self._event.set()

    async def get(self) -> dict:
        while not self.frames:
            self._event.clear()
            await self._event.wait()
        return self.frames.popleft()


class SimSession:
    """One scenario under simulation, broadcast to any number of clients."""

    def __init__(self, scenario: Scenario, base_dir: str = "."):
        self.base_dir = base_dir
        self.scenario = scenario
        self.registry = ParameterRegistry()
        self.nav = Navigator(scenario, self.registry)
        self.paused = False
        self.speed = 1.0
        self.pending_steps = 0
        self.subscribers: list[Subscriber] = []
        self._goal_counter = 0
        self._last_frame: dict | None = None

    def reset(self, scenario: Scenario | None = None) -> None:
        if scenario is not None:
            self.scenario = scenario
        self.registry = ParameterRegistry()
        self.nav = Navigator(self.scenario, self.registry)
        self._last_frame = None

    def post_goal(self, pose) -> int:
        nav = self.nav
        if not nav.static.in_bounds_world(pose[0], pose[1]):
            raise ValueError("goal pose outside the map")
        self._goal_counter += 1
        nav.goal_stack[:] = [
            type(nav.goal_stack[0])(tuple(pose), yaw_matters=True, label="goal")
        ]
        nav.path = None
        nav.nav_state = "Planning"
        nav._recovery_idx = 0
        nav._active_recovery = None
        nav._stuck_hist.clear()
        return self._goal_counter

    def step_once(self) -> dict | None:
        if self.nav.nav_state in ("Reached", "Aborted"):
            return None
        if self.nav.state.time >= self.scenario.time_limit - 1e-9:
            return None
        frame = self.nav.cycle()
        if frame is not None:
            self._last_frame = frame
            self.broadcast(frame)
        return frame

    def broadcast(self, frame: dict) -> None:
        for sub in self.subscribers:
            sub.push(frame)

    def snapshot_frame(self) -> dict | None:
        """Last broadcast frame with its costmap upgraded to a keyframe.

        Sent to late subscribers so their delta replay starts grounded.
        """
        if self._last_frame is None:
            return None
        enc = self.nav._encoder
        if enc._cells is None:
            return self._last_frame
        frame = dict(self._last_frame)
        cm = dict(frame["costmap"])
        cm.pop("delta", None)
        cm["keyframe"] = True
        cm["cells"] = enc._cells.tolist()
        frame["costmap"] = cm
        return frame

    def state_dump(self) -> dict:
        nav = self.nav
        _, local_cm = nav._sense_and_compose()
        return {
            "seq": nav._seq,
            "t": nav.state.time,
            "state": nav.nav_state,
            "robot": {
                "x": nav.state.pose[0],
                "y": nav.state.pose[1],
                "theta": nav.state.pose[2],
                "vx": nav.state.twist.vx,
                "omega": nav.state.twist.omega,
            },
            "goal": list(nav.active_goal.pose),
            "path": [[p[0], p[1]] for p in (nav.path.waypoints if nav.path else [])],
            "costmap": {
                "origin": [local_cm.origin[0], local_cm.origin[1]],
                "resolution": local_cm.resolution,
                "width": local_cm.width,
                "height": local_cm.height,
                "cells": local_cm.cells.ravel().tolist(),
            },
            "map": {
                "origin": [nav.static.origin[0], nav.static.origin[1]],
                "resolution": nav.static.resolution,
                "width": nav.static.width,
                "height": nav.static.height,
            },
            "param_revision": self.registry.revision,
            "paused": self.paused,
            "events": nav.events[-20:],
        }


def create_app(scenario: Scenario, base_dir: str = ".", static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="navtune")
    session = SimSession(scenario, base_dir)
    app.state.session = session

    async def _loop():
        while True:
            if session.pending_steps > 0:
                session.pending_steps -= 1
                session.step_once()
                await asyncio.sleep(0)
                continue
            if session.paused:
                await asyncio.sleep(0.02)
                continue
            dt = 1.0 / session.registry.get("dwa.controller_frequency")
            session.step_once()
            await asyncio.sleep(max(0.0, dt / max(session.speed, 1e-6)))

    @app.on_event("startup")
    async def _start():
        app.state.loop_task = asyncio.create_task(_loop())

    @app.on_event("shutdown")
    async def _stop():
        app.state.loop_task.cancel()

    @app.get("/params")
    def get_params():
        return {"revision": session.registry.revision, "params": session.registry.describe()}

    @app.patch("/params")
    async def patch_params(request: Request):
        body = await request.json()
        values = body.get("values", body)
        try:
            rev = session.registry.apply_patch(
                values, t=session.nav.state.time, patch_id=body.get("patch_id")
            )
        except PatchError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        return {"revision": rev}

    @app.post("/goal")
    async def post_goal(request: Request):
        body = await request.json()
        try:
            pose = (float(body["x"]), float(body["y"]), float(body.get("theta", 0.0)))
            goal_id = session.post_goal(pose)
        except (KeyError, ValueError) as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        return {"goal_id": goal_id}

    @app.post("/scenario")
    async def post_scenario(request: Request):
        body = await request.json()
        try:
            if "text" in body:
                sc = load_scenario(body["text"], base_dir=session.base_dir)
            elif "path" in body:
                p = FsPath(session.base_dir) / body["path"]
                sc = load_scenario(p.read_text(), base_dir=p.parent, name=p.stem)
            else:
                raise ValueError("need 'text' or 'path'")
        except (ValueError, OSError) as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        session.reset(sc)
        return {"ok": True, "revision": session.registry.revision}

    @app.get("/state")
    def get_state():
        return session.state_dump()

    @app.post("/control")
    async def post_control(request: Request):
        body = await request.json()
        action = body.get("action")
        if action == "pause":
            session.paused = True
        elif action == "resume":
            session.paused = False
        elif action == "step":
            session.paused = True
            session.pending_steps += int(body.get("count", 1))
        elif action == "reset":
            session.reset()
        elif action == "speed":
            value = float(body.get("value", 1.0))
            if not (math.isfinite(value) and value > 0):
                return JSONResponse({"error": "speed must be > 0"}, status_code=400)
            session.speed = value
        else:
            return JSONResponse({"error": f"unknown action {action!r}"}, status_code=400)
        return {"ok": True, "paused": session.paused, "speed": session.speed}

    @app.websocket("/stream")
    async def stream(ws: WebSocket):
        await ws.accept()
        sub = Subscriber()
        snap = session.snapshot_frame()
        if snap is not None:
            sub.push(snap)
        session.subscribers.append(sub)
        try:
            while True:
                frame = await sub.get()
                await ws.send_text(encode_message(frame))
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            if sub in session.subscribers:
                session.subscribers.remove(sub)

    if static_dir is not None:
        sd = FsPath(static_dir)

        @app.get("/")
        def index():
            return FileResponse(sd / "index.html")

        @app.get("/ui/{name:path}")
        def ui_asset(name: str):
            target = (sd / name).resolve()
            if not str(target).startswith(str(sd.resolve())) or not target.is_file():
                return JSONResponse({"error": "not found"}, status_code=404)
            return FileResponse(target)

    return app

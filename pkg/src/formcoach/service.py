"""Streaming session service.

A session ingests keypoint frames (same JSON schema as the file format),
recognizes the pose once enough frames exist for key-frame extraction,
then emits per-frame correction events from the class's forecaster. The
HTTP surface creates sessions and serves reports; a WebSocket per session
carries newline-delimited JSON frames in and feedback events out.

Flag arithmetic is shared byte-for-byte with the batch path (see
corrector._predict_frames), so a session's streamed flags always equal
the batch report over the same frames.
"""

# note: no future-annotations here; the websocket route needs its
# WebSocket annotation resolvable at runtime from create_app's scope

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corrector import flag_vector
from .dataio import landmark_parts
from .keyframe import DEFAULT_WINDOW, min_frames_for_keyframes
from .kinematics import (AngleBasis, Keypoint, KeypointFrame,
                         build_default_basis, correction_indices,
                         extract_features)
from .recognizer import classify
from .registry import ModelRegistry
from .sequence import PoseSequence


@dataclass
class Session:
    session_id: str
    state: str = "collecting"            # collecting | recognized | closed
    pose_class: str | None = None
    pose_probs: dict[str, float] = field(default_factory=dict)
    forced_class: str | None = None
    re_recognize_every: int | None = None
    times: list[float] = field(default_factory=list)
    angle_rows: list[np.ndarray] = field(default_factory=list)
    correction_events: list[dict] = field(default_factory=list)
    created_at: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class ServiceError(Exception):
    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


class SessionService:
    """Model-backed session engine, independent of the HTTP layer."""

    def __init__(self, registry: ModelRegistry,
                 basis: AngleBasis | None = None,
                 log_dir=None):
        self.registry = registry
        self.basis = basis or build_default_basis()
        self.corr_idx = correction_indices(self.basis)
        self.log_dir = Path(log_dir) if log_dir else None
        if self.log_dir:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # ------------------------------------------------------------ sessions

    def create_session(self, pose_class: str | None = None,
                       re_recognize_every: int | None = None) -> str:
        if self.registry.recognizer is None and pose_class is None:
            raise ServiceError("no recognizer loaded; sessions must name a "
                               "pose class", status=503)
        if not self.registry.correctors:
            raise ServiceError("model registry holds no correctors", status=503)
        if pose_class is not None and pose_class not in self.registry.correctors:
            raise ServiceError(f"unknown pose class {pose_class!r}; have "
                               f"{self.registry.classes}")
        session = Session(session_id=uuid.uuid4().hex,
                          forced_class=pose_class,
                          re_recognize_every=re_recognize_every)
        if pose_class is not None:
            session.state = "recognized"
            session.pose_class = pose_class
            session.pose_probs = {pose_class: 1.0}
        with self._registry_lock:
            self.sessions[session.session_id] = session
        self._log(session, {"kind": "session", "created": session.created_at,
                            "forced_class": pose_class})
        return session.session_id

    def _get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise ServiceError(f"unknown session {session_id!r}", status=404)

    def close_session(self, session_id: str) -> None:
        session = self._get(session_id)
        with session.lock:
            session.state = "closed"
        self._log(session, {"kind": "close"})

    # -------------------------------------------------------------- frames

    def push_frame(self, session_id: str, frame: KeypointFrame) -> list[dict]:
        session = self._get(session_id)
        with session.lock:
            return self._push_locked(session, frame)

    def _push_locked(self, session: Session, frame: KeypointFrame) -> list[dict]:
        if session.state == "closed":
            raise ServiceError("session is closed")
        if session.times and frame.t <= session.times[-1]:
            raise ServiceError(f"frame time {frame.t} not after "
                               f"{session.times[-1]}")
        try:
            row = extract_features(frame, self.basis).values
        except KeyError as exc:
            raise ServiceError(str(exc))
        if np.any(np.isnan(row)):
            raise ServiceError("frame has degenerate geometry (coincident "
                               "landmarks); rejected")
        self._log(session, {"kind": "frame", "t": frame.t,
                            "landmarks": {n: kp.position.tolist()
                                          for n, kp in frame.keypoints.items()}})
        session.times.append(frame.t)
        session.angle_rows.append(row)
        n = len(session.angle_rows) - 1  # this frame's index
        events = [{"type": "ack", "frame": n}]

        rec = self.registry.recognizer
        min_frames = (min_frames_for_keyframes(rec.config["k"],
                                               rec.config["window"])
                      if rec is not None else None)
        if session.state == "collecting" and min_frames is not None \
                and len(session.angle_rows) >= min_frames:
            self._recognize(session, events)
            # correction events for frames already past the context window
            model, profile = self._corrector(session.pose_class)
            context = model.config["context"]
            for t in range(context, n + 1):
                events.append(self._correction_event(session, model, profile, t))
        elif session.state == "recognized":
            if (session.re_recognize_every
                    and rec is not None
                    and min_frames is not None
                    and len(session.angle_rows) >= min_frames
                    and len(session.angle_rows) % session.re_recognize_every == 0):
                self._recognize(session, events)
            model, profile = self._corrector(session.pose_class)
            if n >= model.config["context"]:
                events.append(self._correction_event(session, model, profile, n))
        for event in events:
            self._log(session, {"kind": "event", "event": event})
        return events

    def _corrector(self, pose_class: str):
        try:
            return self.registry.corrector_for(pose_class)
        except KeyError as exc:
            raise ServiceError(str(exc.args[0]), status=409)

    def _recognize(self, session: Session, events: list[dict]) -> None:
        rec = self.registry.recognizer
        seq = PoseSequence(values=np.stack(session.angle_rows),
                           times=np.array(session.times),
                           basis_id=self.basis.basis_id)
        label, probs = classify(seq, rec)
        session.state = "recognized"
        session.pose_class = label
        session.pose_probs = {lab: float(p) for lab, p
                              in zip(rec.config["labels"], probs)}
        events.append({"type": "recognition",
                       "frame": len(session.angle_rows) - 1,
                       "pose": session.pose_probs})

    def _correction_event(self, session: Session, model, profile,
                          t: int) -> dict:
        # same projection and batch-of-one arithmetic as the report path
        context = model.config["context"]
        window = np.stack(session.angle_rows[t - context:t])[:, self.corr_idx] / np.pi
        pred = model.forward(window[None])[0]
        actual = session.angle_rows[t][self.corr_idx] / np.pi
        flagged, deviation, delta = flag_vector(pred, actual,
                                                profile.per_angle_std)
        names = model.config["angle_names"]
        flags = [{"angle": names[j],
                  "deviation": float(deviation[j]),
                  "delta": float(delta[j])}
                 for j in range(len(names)) if flagged[j]]
        event = {"type": "correction", "frame": t,
                 "pose": session.pose_probs, "flags": flags}
        session.correction_events.append(event)
        return event

    # -------------------------------------------------------------- report

    def get_report(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            out = {
                "session_id": session.session_id,
                "state": session.state,
                "frame_count": len(session.angle_rows),
                "pose_class": session.pose_class,
                "pose_probs": session.pose_probs,
                "correction": None,
            }
            if session.pose_class is not None and session.angle_rows:
                from .corrector import flag_and_correct
                model, profile = self._corrector(session.pose_class)
                seq = PoseSequence(
                    values=np.stack(session.angle_rows)[:, self.corr_idx],
                    times=np.array(session.times),
                    pose_class=session.pose_class)
                report = flag_and_correct(model, profile, seq)
                out["correction"] = report.to_dict()
            return out

    # ----------------------------------------------------------------- log

    def _log(self, session: Session, record: dict) -> None:
        if not self.log_dir:
            return
        path = self.log_dir / f"{session.session_id}.jsonl"
        with open(path, "a") as fh:
            fh.write(json.dumps({"session": session.session_id, **record},
                                sort_keys=True) + "\n")


def replay_log(path, registry: ModelRegistry) -> dict:
    """Rebuild a session report from its append-only frame log."""
    engine = SessionService(registry)
    forced = None
    frames = []
    for line in Path(path).read_text().splitlines():
        rec = json.loads(line)
        if rec["kind"] == "session":
            forced = rec.get("forced_class")
        elif rec["kind"] == "frame":
            frames.append(KeypointFrame(
                rec["t"],
                {n: Keypoint(n, np.asarray(p, dtype=float))
                 for n, p in rec["landmarks"].items()}))
    sid = engine.create_session(pose_class=forced)
    for frame in frames:
        engine.push_frame(sid, frame)
    return engine.get_report(sid)


# ------------------------------------------------------------------- HTTP

def parse_frame(doc: dict) -> KeypointFrame:
    try:
        vis = doc.get("visibility", {})
        keypoints = {}
        for name, p in doc["landmarks"].items():
            pos, v = landmark_parts(p, vis.get(name, 1.0))
            keypoints[name] = Keypoint(name, pos, v)
        return KeypointFrame(float(doc["t"]), keypoints)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ServiceError(f"malformed frame: {exc}")


def create_app(service: SessionService):
    from fastapi import FastAPI, HTTPException, WebSocket
    from fastapi.responses import JSONResponse

    app = FastAPI(title="formcoach", docs_url=None, redoc_url=None)

    def guard(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ServiceError as exc:
            raise HTTPException(status_code=exc.status, detail=str(exc))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok",
                "recognizer": service.registry.recognizer is not None,
                "classes": service.registry.classes}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict | None = None):
        body = body or {}
        sid = guard(service.create_session,
                    pose_class=body.get("pose_class"),
                    re_recognize_every=body.get("re_recognize_every"))
        return {"session_id": sid}

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str):
        return JSONResponse(guard(service.get_report, session_id))

    @app.post("/sessions/{session_id}/close")
    def close(session_id: str):
        guard(service.close_session, session_id)
        return {"closed": session_id}

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        await ws.accept()
        try:
            service._get(session_id)
        except ServiceError as exc:
            await ws.send_text(json.dumps({"type": "error", "message": str(exc)}))
            await ws.close()
            return
        while True:
            try:
                text = await ws.receive_text()
            except Exception:
                break
            for line in text.splitlines():
                line = line.strip()
                if not line:
                    continue
                try:
                    doc = json.loads(line)
                except json.JSONDecodeError as exc:
                    await ws.send_text(json.dumps(
                        {"type": "error", "message": f"bad json: {exc}"}))
                    continue
                if doc.get("type") == "close":
                    service.close_session(session_id)
                    await ws.close()
                    return
                try:
                    events = service.push_frame(session_id, parse_frame(doc))
                except ServiceError as exc:
                    await ws.send_text(json.dumps(
                        {"type": "error", "message": str(exc)}))
                    continue
                for event in events:
                    await ws.send_text(json.dumps(event))

    return app

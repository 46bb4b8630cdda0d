"""Long-running control service: sign jobs, pose streaming, quiz sessions.

One executor thread owns the backend and runs queued schedules; HTTP
handlers only enqueue commands and read immutable snapshots.  Live state
goes out on a single server-sent-events stream that any number of clients
may watch.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .atlas import LETTERS
from .defaults import Rig
from .executor import Backend, ScheduleRunner, SignEvent
from .motion import Schedule, Timing, compile_letters
from .sequencer import TrialOrder, shuffle_trials
from .study import (
    CellStats,
    Cohort,
    StudyRecord,
    cohort_breakdown,
    save_records,
    score,
    table_to_rows,
)
from .topology import Handedness, pose_to_names


class ServiceError(Exception):
    status_code = 400
    code = "error"


class EmptyAfterFilter(ServiceError):
    code = "empty_after_filter"


class SessionConflict(ServiceError):
    status_code = 409
    code = "session_conflict"


class BackendUnavailable(ServiceError):
    status_code = 503
    code = "backend_unavailable"


def filter_letters(text: str) -> Tuple[List[str], List[str]]:
    """Uppercase A-Z survive; everything else is dropped and reported."""
    letters, dropped = [], []
    for ch in text:
        up = ch.upper()
        if up in LETTERS:
            letters.append(up)
        elif not up.isspace():
            dropped.append(ch)
    return letters, dropped


@dataclass
class ServiceSettings:
    tick_ms: int = 20
    stream_hz: float = 30.0
    hold_ms: int = 600
    speed_scale: float = 1.25
    quiz_log: Optional[str] = None

    @property
    def timing(self) -> Timing:
        return Timing(self.hold_ms, self.speed_scale)


@dataclass
class Job:
    id: int
    letters: List[str]
    handedness: Handedness
    schedule: Schedule
    kind: str = "sign"          # "sign" | "quiz"
    quiz_position: Optional[int] = None
    stop_event: threading.Event = field(default_factory=threading.Event)
    cancelled: bool = False


@dataclass
class QuizSession:
    order: TrialOrder
    participant: str
    cohort: Cohort
    position: int = 0
    records: List[StudyRecord] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.order.items)

    @property
    def done(self) -> bool:
        return self.position >= self.total


class Broadcaster:
    """Fan-out of service events to any number of stream subscribers."""

    def __init__(self, maxsize: int = 512):
        self._subs: Dict[int, "queue.Queue[Tuple[str, dict]]"] = {}
        self._next = 0
        self._lock = threading.Lock()
        self._maxsize = maxsize

    def subscribe(self) -> Tuple[int, "queue.Queue[Tuple[str, dict]]"]:
        with self._lock:
            sid = self._next
            self._next += 1
            q: "queue.Queue[Tuple[str, dict]]" = queue.Queue(self._maxsize)
            self._subs[sid] = q
            return sid, q

    def unsubscribe(self, sid: int) -> None:
        with self._lock:
            self._subs.pop(sid, None)

    def publish(self, event: str, data: dict) -> None:
        with self._lock:
            subs = list(self._subs.values())
        for q in subs:
            try:
                q.put_nowait((event, data))
            except queue.Full:
                pass  # slow consumer loses events rather than stalling the hand


class HandService:
    """Owns the backend through a single executor thread."""

    def __init__(self, rig: Rig, backend: Backend,
                 settings: Optional[ServiceSettings] = None):
        self.rig = rig
        self.backend = backend
        self.settings = settings or ServiceSettings()
        self.runner = ScheduleRunner(backend, rig.topology, rig.channel_map,
                                     tick_ms=self.settings.tick_ms)
        self.broadcaster = Broadcaster()
        self._jobs: "queue.Queue[Job]" = queue.Queue()
        self._pending: List[Job] = []
        self._lock = threading.Lock()
        self._shutdown = threading.Event()
        self._next_job_id = 1
        self._current: Optional[Job] = None
        self._quiz: Optional[QuizSession] = None
        self._started_ms = time.monotonic() * 1000.0
        self._last_pose = rig.topology.neutral_pose()
        self._thread = threading.Thread(target=self._executor_loop,
                                        name="hand-executor", daemon=True)
        self._stream_thread = threading.Thread(target=self._stream_loop,
                                               name="pose-stream", daemon=True)

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> None:
        self.runner.command_neutral()
        self._thread.start()
        self._stream_thread.start()

    def shutdown(self) -> None:
        self._shutdown.set()
        with self._lock:
            current = self._current
        if current is not None:
            current.stop_event.set()
        self._thread.join(timeout=5)
        self._stream_thread.join(timeout=5)
        self.backend.close()

    def now_ms(self) -> float:
        return time.monotonic() * 1000.0 - self._started_ms

    # -- executor thread --------------------------------------------------------

    def _executor_loop(self) -> None:
        while not self._shutdown.is_set():
            try:
                job = self._jobs.get(timeout=0.05)
            except queue.Empty:
                continue
            with self._lock:
                if job in self._pending:
                    self._pending.remove(job)
                if job.cancelled:
                    continue
                self._current = job
            if self._shutdown.is_set():
                break
            self.broadcaster.publish("job", {"id": job.id, "state": "started",
                                             "t_ms": self.now_ms()})
            outcome = self.runner.run(
                job.schedule, job.handedness,
                on_sign=lambda e, j=job: self._on_sign(j, e),
                should_stop=lambda: job.stop_event.is_set() or self._shutdown.is_set())
            state = "done" if outcome.completed else "stopped"
            with self._lock:
                self._current = None
            self.broadcaster.publish("job", {"id": job.id, "state": state,
                                             "t_ms": self.now_ms()})

    def _on_sign(self, job: Job, event: SignEvent) -> None:
        self.broadcaster.publish("sign", {
            "kind": event.kind,
            "letter": event.letter,
            "hand": event.handedness.value,
            "sign_index": event.sign_index,
            "job_id": job.id,
            "t_ms": self.now_ms(),
        })

    def _stream_loop(self) -> None:
        period = 1.0 / self.settings.stream_hz
        while not self._shutdown.is_set():
            pose = self.backend.pose()
            if pose is not None:
                self._last_pose = pose
            self.broadcaster.publish("pose", {
                "t_ms": self.now_ms(),
                "angles": pose_to_names(self._last_pose),
            })
            time.sleep(period)

    # -- client API -------------------------------------------------------------

    def mode(self) -> str:
        with self._lock:
            if self._quiz is not None:
                return "quiz"
            if self._current is not None or self._pending:
                return "signing"
            return "idle"

    def status(self) -> dict:
        with self._lock:
            current = self._current
            pending = list(self._pending)
            quiz = self._quiz
        backend_name = getattr(self.backend, "describe", lambda: "unknown")()
        live = self.backend.pose()  # open-loop serial reports the last sample
        return {
            "mode": self.mode(),
            "backend": backend_name,
            "pose": pose_to_names(live if live is not None else self._last_pose),
            "queue": [{"id": j.id, "letters": j.letters} for j in pending],
            "current_job": None if current is None else
                {"id": current.id, "letters": current.letters,
                 "hand": current.handedness.value},
            "quiz": None if quiz is None else
                {"position": quiz.position, "total": quiz.total},
            "uptime_ms": self.now_ms(),
        }

    def _enqueue(self, letters: List[str], handedness: Handedness,
                 speed_scale: Optional[float], kind: str = "sign",
                 quiz_position: Optional[int] = None) -> Job:
        timing = Timing(self.settings.hold_ms,
                        speed_scale if speed_scale else self.settings.speed_scale)
        schedule = compile_letters(letters, handedness, self.rig.atlas,
                                   self.rig.servo_map, self.rig.topology, timing)
        with self._lock:
            job = Job(self._next_job_id, letters, handedness, schedule, kind,
                      quiz_position)
            self._next_job_id += 1
            self._pending.append(job)
        self._jobs.put(job)
        return job

    def submit_text(self, text: str, handedness: Handedness,
                    speed_scale: Optional[float] = None) -> Tuple[Job, List[str]]:
        with self._lock:
            if self._quiz is not None:
                raise SessionConflict("a quiz session is active")
        letters, dropped = filter_letters(text)
        if not letters:
            raise EmptyAfterFilter("no fingerspelling letters left after filtering")
        job = self._enqueue(letters, handedness, speed_scale)
        return job, dropped

    def stop(self) -> None:
        """Drain the running job at its next segment boundary, flush the
        queue, abort any quiz.  Idle already means neutral, so a stop with
        nothing running is a no-op."""
        with self._lock:
            for job in self._pending:
                job.cancelled = True
            self._pending.clear()
            current = self._current
            self._quiz = None
        if current is not None:
            current.stop_event.set()

    # -- quiz -------------------------------------------------------------------

    def quiz_start(self, seed: int, participant: str = "anonymous",
                   cohort: Cohort = Cohort.NOVICE) -> dict:
        with self._lock:
            if self._quiz is not None or self._current is not None or self._pending:
                raise SessionConflict("service is busy")
            self._quiz = QuizSession(shuffle_trials(seed), participant, cohort)
            session = self._quiz
        self._present_trial(session)
        self.broadcaster.publish("quiz", {"state": "started", "position": 0,
                                          "total": session.total,
                                          "t_ms": self.now_ms()})
        return {"seed": seed, "total": session.total, "position": 0}

    def _present_trial(self, session: QuizSession) -> None:
        letter, hand = session.order.items[session.position]
        self._enqueue([letter], hand, None, kind="quiz",
                      quiz_position=session.position)

    def quiz_answer(self, guess_letter: str, guess_hand: Handedness) -> dict:
        guess_letter = guess_letter.upper()
        if guess_letter not in LETTERS:
            raise ServiceError(f"guess must be a letter A-Z, got {guess_letter!r}")
        with self._lock:
            session = self._quiz
            if session is None or session.done:
                raise SessionConflict("no quiz trial awaiting an answer")
            letter, hand = session.order.items[session.position]
            session.records.append(StudyRecord(
                session.participant, session.cohort, session.position,
                letter, hand, guess_letter, guess_hand))
            session.position += 1
            done = session.done
        if not done:
            self._present_trial(session)
            self.broadcaster.publish("quiz", {"state": "trial",
                                              "position": session.position,
                                              "total": session.total,
                                              "t_ms": self.now_ms()})
            return {"done": False, "position": session.position,
                    "total": session.total}
        report = self._finish_quiz(session)
        return {"done": True, "position": session.position,
                "total": session.total, "report": report}

    def _finish_quiz(self, session: QuizSession) -> dict:
        table = score(session.records)
        cohorts = cohort_breakdown(session.records)
        if self.settings.quiz_log:
            save_records(session.records, self.settings.quiz_log, append=True)
        with self._lock:
            self._quiz = None
        report = {
            "seed": session.order.seed,
            "participant": session.participant,
            "cohort": session.cohort.value,
            "total_shown": table.total_shown,
            "total_correct": table.total_correct,
            "accuracy": table.accuracy,
            "rows": table_to_rows(table),
            "cohorts": {c.value: {"shown": s.shown, "correct": s.correct,
                                  "accuracy": s.accuracy}
                        for c, s in cohorts.items()},
        }
        self.broadcaster.publish("quiz", {"state": "done",
                                          "accuracy": table.accuracy,
                                          "t_ms": self.now_ms()})
        return report


# ---------------------------------------------------------------------------
# HTTP layer

def create_app(service: HandService, static_dir: Optional[str] = None):
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse, StreamingResponse

    app = FastAPI(title="hand control service", version="1.0")
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status_code,
                            content={"error": exc.code, "detail": str(exc)})

    def _parse_hand(value: str) -> Handedness:
        try:
            return Handedness(str(value).lower())
        except ValueError:
            raise ServiceError(f"handedness must be 'right' or 'left', got {value!r}")

    @app.get("/status")
    def get_status():
        return service.status()

    @app.post("/sign")
    def post_sign(body: dict):
        text = str(body.get("text", ""))
        handedness = _parse_hand(body.get("handedness", "right"))
        speed = body.get("speed_scale")
        if speed is not None:
            speed = float(speed)
            if speed < 1:
                raise ServiceError("speed_scale must be >= 1")
        job, dropped = service.submit_text(text, handedness, speed)
        return {"job_id": job.id, "letters": job.letters, "dropped": dropped}

    @app.post("/stop")
    def post_stop():
        service.stop()
        return {"stopped": True}

    @app.post("/quiz/start")
    def post_quiz_start(body: dict):
        seed = int(body.get("seed", 0))
        participant = str(body.get("participant", "anonymous"))
        try:
            cohort = Cohort(str(body.get("cohort", "novice")))
        except ValueError:
            raise ServiceError(f"unknown cohort {body.get('cohort')!r}")
        return service.quiz_start(seed, participant, cohort)

    @app.post("/quiz/answer")
    def post_quiz_answer(body: dict):
        letter = str(body.get("letter", ""))
        hand = _parse_hand(body.get("handedness", ""))
        return service.quiz_answer(letter, hand)

    @app.get("/stream")
    def get_stream(max_events: Optional[int] = None):
        """Server-sent events: pose, sign, job, quiz.  Unbounded unless the
        client asks for a finite snapshot via max_events."""
        import asyncio

        async def generate():
            sid, q = service.broadcaster.subscribe()
            sent = 0
            idle_polls = 0
            try:
                yield ": connected\n\n"
                while max_events is None or sent < max_events:
                    try:
                        event, data = q.get_nowait()
                    except queue.Empty:
                        idle_polls += 1
                        if idle_polls >= 50:  # ~1 s of silence
                            idle_polls = 0
                            yield ": keepalive\n\n"
                        await asyncio.sleep(0.02)
                        continue
                    idle_polls = 0
                    sent += 1
                    yield f"event: {event}\ndata: {json.dumps(data)}\n\n"
            finally:
                service.broadcaster.unsubscribe(sid)

        return StreamingResponse(generate(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache"})

    if static_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app

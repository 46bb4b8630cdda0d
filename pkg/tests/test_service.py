import json
import queue
import time

import pytest
from fastapi.testclient import TestClient

from aslhand.executor import EmulatorBackend
from aslhand.sequencer import shuffle_trials
from aslhand.service import (
    EmptyAfterFilter,
    HandService,
    ServiceSettings,
    create_app,
    filter_letters,
)
from aslhand.study import records_from_csv
from aslhand.topology import JOINTS, Handedness, pose_from_names, validate_pose


def make_service(rig, paced=False, **settings_kw):
    settings = ServiceSettings(tick_ms=5, stream_hz=100.0, hold_ms=30,
                               **settings_kw)
    backend = EmulatorBackend(rig.topology, rig.channel_map, paced=paced)
    service = HandService(rig, backend, settings)
    service.start()
    return service


@pytest.fixture
def service(rig):
    s = make_service(rig)
    yield s
    s.shutdown()


@pytest.fixture
def client(service):
    return TestClient(create_app(service))


def wait_idle(client, timeout_s=10.0):
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        status = client.get("/status").json()
        if status["mode"] == "idle":
            return status
        time.sleep(0.01)
    raise AssertionError("service never drained to idle")


def drain_events(q, want, timeout_s=10.0):
    """Pull broadcaster events until `want(events)` is satisfied."""
    events = []
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        try:
            events.append(q.get(timeout=0.05))
        except queue.Empty:
            pass
        if want(events):
            return events
    raise AssertionError(f"expected events never arrived (got {len(events)})")


def test_filter_letters():
    assert filter_letters("h3!i") == (["H", "I"], ["3", "!"])
    assert filter_letters("Hi there") == (["H", "I", "T", "H", "E", "R", "E"], [])
    assert filter_letters(" \t") == ([], [])


def test_fresh_status_is_idle_at_neutral(client, rig):
    status = client.get("/status").json()
    assert status["mode"] == "idle"
    assert status["queue"] == []
    assert status["current_job"] is None
    pose = pose_from_names(status["pose"])
    neutral = rig.topology.neutral_pose()
    for j in JOINTS:
        assert pose[j] == pytest.approx(neutral[j], abs=1e-9)


def test_sign_job_runs_to_completion(client, service, rig):
    sid, q = service.broadcaster.subscribe()
    try:
        r = client.post("/sign", json={"text": "HELLO", "handedness": "right"})
        assert r.status_code == 200
        body = r.json()
        assert body["letters"] == ["H", "E", "L", "L", "O"]
        assert body["dropped"] == []
        events = drain_events(
            q, lambda evs: any(e[0] == "job" and e[1]["state"] == "done"
                               for e in evs))
    finally:
        service.broadcaster.unsubscribe(sid)
    ends = [e[1] for e in events if e[0] == "sign" and e[1]["kind"] == "end"]
    assert [e["letter"] for e in ends] == ["H", "E", "L", "L", "O"]
    assert all(e["hand"] == "right" for e in ends)
    wait_idle(client)


def test_sign_filters_and_reports_dropped(client):
    r = client.post("/sign", json={"text": "h3!i"})
    assert r.status_code == 200
    assert r.json()["letters"] == ["H", "I"]
    assert r.json()["dropped"] == ["3", "!"]
    wait_idle(client)


def test_sign_empty_after_filter_is_400(client):
    r = client.post("/sign", json={"text": "123 !?"})
    assert r.status_code == 400
    assert r.json()["error"] == "empty_after_filter"


def test_sign_rejects_bad_handedness_and_speed(client):
    r = client.post("/sign", json={"text": "A", "handedness": "both"})
    assert r.status_code == 400
    r = client.post("/sign", json={"text": "A", "speed_scale": 0.1})
    assert r.status_code == 400


def test_jobs_queue_fifo(client, service):
    sid, q = service.broadcaster.subscribe()
    try:
        first = client.post("/sign", json={"text": "AB"}).json()["job_id"]
        second = client.post("/sign", json={"text": "CD"}).json()["job_id"]
        assert second == first + 1
        events = drain_events(
            q, lambda evs: sum(1 for e in evs
                               if e[0] == "job" and e[1]["state"] == "done") >= 2)
    finally:
        service.broadcaster.unsubscribe(sid)
    ends = [e[1]["letter"] for e in events
            if e[0] == "sign" and e[1]["kind"] == "end"]
    assert ends == ["A", "B", "C", "D"]
    done_ids = [e[1]["id"] for e in events
                if e[0] == "job" and e[1]["state"] == "done"]
    assert done_ids == [first, second]


def test_stream_endpoint_emits_poses(client, rig):
    poses = []
    with client.stream("GET", "/stream", params={"max_events": 8}) as response:
        assert response.headers["content-type"].startswith("text/event-stream")
        event = None
        for line in response.iter_lines():
            if line.startswith("event:"):
                event = line.split(":", 1)[1].strip()
            elif line.startswith("data:") and event == "pose":
                poses.append(json.loads(line.split(":", 1)[1]))
    assert len(poses) >= 5
    stamps = [p["t_ms"] for p in poses]
    assert stamps == sorted(stamps)
    for p in poses:
        pose = pose_from_names(p["angles"])
        assert validate_pose(pose, rig.topology) == []


def test_stop_mid_word_drains_to_neutral(rig):
    service = make_service(rig, paced=True)
    client = TestClient(create_app(service))
    try:
        sid, q = service.broadcaster.subscribe()
        client.post("/sign", json={"text": "HELLOHELLO"})
        client.post("/sign", json={"text": "AB"})  # queued behind, then flushed
        events = drain_events(q, lambda evs: any(e[0] == "sign" for e in evs),
                              timeout_s=10)
        r = client.post("/stop")
        assert r.json() == {"stopped": True}
        events += drain_events(
            q, lambda evs: any(e[0] == "job" and e[1]["state"] == "stopped"
                               for e in evs), timeout_s=10)
        service.broadcaster.unsubscribe(sid)
        status = wait_idle(client)
        assert status["queue"] == []
        # the streamed pose must land on neutral within two stream periods
        neutral = rig.topology.neutral_pose()
        deadline = time.monotonic() + 2.5 / service.settings.stream_hz
        while True:
            pose = pose_from_names(client.get("/status").json()["pose"])
            if all(pose[j] == pytest.approx(neutral[j], abs=1e-9)
                   for j in JOINTS):
                break
            assert time.monotonic() < deadline, "pose never settled on neutral"
            time.sleep(0.005)
        # the flushed job never started
        started = [e[1]["id"] for e in events
                   if e[0] == "job" and e[1]["state"] == "started"]
        assert len(started) == 1
    finally:
        service.shutdown()


def test_quiz_full_session_all_correct(rig, tmp_path):
    log = tmp_path / "quiz.csv"
    service = make_service(rig, quiz_log=str(log))
    client = TestClient(create_app(service))
    try:
        r = client.post("/quiz/start", json={"seed": 7, "participant": "p1",
                                             "cohort": "teacher"})
        assert r.status_code == 200
        assert r.json()["total"] == 52
        order = shuffle_trials(7)  # the client knows the seed, so it can ace it
        report = None
        for letter, hand in order.items:
            r = client.post("/quiz/answer",
                            json={"letter": letter, "handedness": hand.value})
            assert r.status_code == 200
            body = r.json()
            if body["done"]:
                report = body["report"]
        assert report is not None
        assert report["total_correct"] == 52
        assert report["accuracy"] == 100.00
        assert report["cohorts"]["teacher"]["shown"] == 52
        # the appended CSV log scores identically
        records = records_from_csv(log.read_text())
        assert [(rec.letter, rec.hand) for rec in records] == list(order.items)
        assert all(rec.correct for rec in records)
        wait_idle(client)
    finally:
        service.shutdown()


def test_quiz_scores_wrong_answers(rig):
    service = make_service(rig)
    client = TestClient(create_app(service))
    try:
        client.post("/quiz/start", json={"seed": 11})
        order = shuffle_trials(11)
        report = None
        for position, (letter, hand) in enumerate(order.items):
            guess = "A" if position < 2 and letter != "A" else letter
            if position < 2 and letter == "A":
                guess = "B"
            r = client.post("/quiz/answer",
                            json={"letter": guess, "handedness": hand.value})
            body = r.json()
            if body["done"]:
                report = body["report"]
        assert report["total_correct"] == 50
        assert report["accuracy"] == 96.15  # 50/52
    finally:
        service.shutdown()


def test_quiz_replay_same_seed_presents_same_order(rig):
    service = make_service(rig)
    client = TestClient(create_app(service))
    try:
        presented = []
        for _ in range(2):
            client.post("/quiz/start", json={"seed": 123})
            session_letters = []
            for letter, hand in shuffle_trials(123).items:
                session_letters.append((letter, hand))
                client.post("/quiz/answer",
                            json={"letter": letter, "handedness": hand.value})
            presented.append(session_letters)
            wait_idle(client)
        assert presented[0] == presented[1]
    finally:
        service.shutdown()


def test_quiz_conflicts(rig):
    service = make_service(rig, paced=True)
    client = TestClient(create_app(service))
    try:
        client.post("/sign", json={"text": "HELLO"})
        r = client.post("/quiz/start", json={"seed": 1})
        assert r.status_code == 409
        client.post("/stop")
        wait_idle(client)
        assert client.post("/quiz/start", json={"seed": 1}).status_code == 200
        r = client.post("/sign", json={"text": "HI"})
        assert r.status_code == 409
        r = client.post("/quiz/answer", json={"letter": "5", "handedness": "right"})
        assert r.status_code == 400
    finally:
        service.shutdown()


def test_quiz_answer_without_session_conflicts(client):
    r = client.post("/quiz/answer", json={"letter": "A", "handedness": "right"})
    assert r.status_code == 409

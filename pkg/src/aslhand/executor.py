"""Drives compiled schedules onto a backend, one frame batch per tick.

Exactly one executor owns the wire at a time.  The emulator backend runs on
a virtual clock (optionally paced against the wall clock so a UI can watch);
the serial backend talks to real firmware over a byte device.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Protocol

from . import wire
from .emulator import FirmwareEmulator
from .motion import Schedule, sample
from .pwm import ChannelMap, controller_init_frame, encode_pose
from .wire import frame_payload
from .topology import Handedness, Pose, Topology

DEFAULT_TICK_MS = 20


class BackendError(Exception):
    pass


class Backend(Protocol):
    def send(self, data: bytes) -> bytes: ...
    def advance(self, dt_ms: float) -> None: ...
    def pose(self) -> Optional[Pose]: ...
    def close(self) -> None: ...


class EmulatorBackend:
    """In-process firmware; time is virtual unless paced."""

    def __init__(self, topology: Topology, channel_map: ChannelMap,
                 paced: bool = False):
        self.emulator = FirmwareEmulator(topology, channel_map)
        self.paced = paced

    def send(self, data: bytes) -> bytes:
        return self.emulator.handle_bytes(data)

    def advance(self, dt_ms: float) -> None:
        if self.paced:
            time.sleep(dt_ms / 1000.0)
        self.emulator.step(dt_ms)

    def pose(self) -> Optional[Pose]:
        return self.emulator.pose()

    def close(self) -> None:
        pass

    def describe(self) -> str:
        return "emulator"


class SerialBackend:
    """Raw byte device (USB serial).  Real time; positions are open loop."""

    def __init__(self, device: str, read_timeout_s: float = 0.05):
        self.device = device
        self._fd = os.open(device, os.O_RDWR | os.O_NOCTTY)
        self._timeout = read_timeout_s
        self._configure()

    def _configure(self) -> None:
        try:
            import termios
            import tty
        except ImportError:  # non-POSIX host; leave the device as-is
            return
        try:
            tty.setraw(self._fd)
            attrs = termios.tcgetattr(self._fd)
            attrs[4] = attrs[5] = termios.B115200
            termios.tcsetattr(self._fd, termios.TCSANOW, attrs)
        except termios.error:
            pass  # pipes and PTYs used in tests reject termios control

    def send(self, data: bytes) -> bytes:
        os.write(self._fd, data)
        deadline = time.monotonic() + self._timeout
        out = bytearray()
        while time.monotonic() < deadline:
            try:
                chunk = os.read(self._fd, 4096)
            except BlockingIOError:
                chunk = b""
            if chunk:
                out.extend(chunk)
                break
            time.sleep(0.001)
        return bytes(out)

    def advance(self, dt_ms: float) -> None:
        time.sleep(dt_ms / 1000.0)

    def pose(self) -> Optional[Pose]:
        return None  # open-loop hardware: no feedback channel

    def close(self) -> None:
        os.close(self._fd)

    def describe(self) -> str:
        return f"serial:{self.device}"


@dataclass(frozen=True)
class SignEvent:
    kind: str  # "begin" | "end"
    letter: str
    handedness: Handedness
    sign_index: int
    t_ms: float


@dataclass
class RunOutcome:
    events: List[SignEvent] = field(default_factory=list)
    completed: bool = True
    elapsed_ms: float = 0.0
    final_pose: Optional[Pose] = None

    @property
    def completed_signs(self) -> int:
        return sum(1 for e in self.events if e.kind == "end")


class ScheduleRunner:
    """Streams one schedule's sampled poses to the backend tick by tick."""

    def __init__(self, backend: Backend, topology: Topology,
                 channel_map: ChannelMap, tick_ms: int = DEFAULT_TICK_MS):
        if tick_ms <= 0:
            raise ValueError("tick_ms must be positive")
        self.backend = backend
        self.topology = topology
        self.channel_map = channel_map
        self.tick_ms = tick_ms
        self._initialized = False

    def _command(self, opcode: int, payload: bytes = b"") -> None:
        response = self.backend.send(wire.encode_command(opcode, payload))
        if response:
            for event in wire.StreamDecoder().feed(response):
                if isinstance(event, wire.CrcFailure) or \
                        event.opcode == wire.Opcode.NAK:
                    raise BackendError(f"firmware rejected opcode {opcode:#04x}")

    def ensure_init(self) -> None:
        if not self._initialized:
            init = controller_init_frame(self.channel_map)
            self._command(wire.Opcode.SET_FRAME, frame_payload(init.writes))
            self._initialized = True

    def command_pose(self, pose: Pose, timestamp_ms: int = 0) -> None:
        self.ensure_init()
        frame = encode_pose(pose, self.topology, self.channel_map,
                            timestamp_ms=timestamp_ms)
        self._command(wire.Opcode.SET_FRAME, frame_payload(frame.writes))

    def command_neutral(self) -> None:
        self.ensure_init()
        self._command(wire.Opcode.SET_NEUTRAL)

    def run(self, schedule: Schedule, handedness: Handedness, *,
            on_sign: Optional[Callable[[SignEvent], None]] = None,
            on_tick: Optional[Callable[[float, Pose], None]] = None,
            should_stop: Optional[Callable[[], bool]] = None,
            settle_ms: float = 0.0) -> RunOutcome:
        """Execute the schedule.  Stop requests take effect at segment
        boundaries, after which the hand is sent back to neutral."""
        self.ensure_init()
        outcome = RunOutcome()
        t = 0.0
        active_sign: Optional[int] = None
        open_seg = None

        def emit(kind: str, seg) -> None:
            event = SignEvent(kind, seg.label, handedness, seg.sign_index, t)
            outcome.events.append(event)
            if on_sign:
                on_sign(event)

        for seg in schedule.segments:
            if seg.sign_index != active_sign and active_sign is not None:
                emit("end", open_seg)  # the previous sign completed
                active_sign = None
            if should_stop and should_stop():
                self._drain_to_neutral(on_tick, t)
                outcome.completed = False
                outcome.elapsed_ms = t
                outcome.final_pose = self.backend.pose()
                return outcome
            if seg.sign_index != active_sign:
                emit("begin", seg)
                active_sign = seg.sign_index
            if seg.sign_index is not None:
                open_seg = seg
            t = self._run_segment(seg, t, on_tick)
        if active_sign is not None:
            emit("end", open_seg)
        if settle_ms:
            self.backend.advance(settle_ms)
            t += settle_ms
        outcome.elapsed_ms = t
        outcome.final_pose = self.backend.pose()
        return outcome

    def _run_segment(self, seg, t: float,
                     on_tick: Optional[Callable[[float, Pose], None]]) -> float:
        remaining = seg.duration_ms
        # command the endpoint even for zero-length segments
        elapsed = 0
        while True:
            step = min(self.tick_ms, remaining - elapsed)
            pose = seg.end_pose if elapsed + step >= seg.duration_ms else \
                _lerp(seg, elapsed + step)
            self.command_pose(pose, timestamp_ms=int(t + elapsed + step))
            if step > 0:
                self.backend.advance(step)
            if on_tick:
                on_tick(t + elapsed + step, pose)
            elapsed += step
            if elapsed >= seg.duration_ms:
                return t + seg.duration_ms

    def _drain_to_neutral(self, on_tick, t: float) -> None:
        self.command_neutral()
        # give the slowest servo time to travel its whole range
        slowest_ms = max(
            (self.topology.limits[j].amplitude / spec.deg_per_ms
             for j, spec in self.channel_map.servos.items()), default=0.0)
        self.backend.advance(slowest_ms)
        if on_tick:
            pose = self.backend.pose()
            if pose is not None:
                on_tick(t + slowest_ms, pose)


def _lerp(seg, local_t: float) -> Pose:
    if seg.duration_ms <= 0:
        return dict(seg.end_pose)
    frac = local_t / seg.duration_ms
    return {j: seg.start_pose[j] + (seg.end_pose[j] - seg.start_pose[j]) * frac
            for j in seg.start_pose}

"""Compile letter sequences into time-parameterized, speed-limited schedules.

Transitions interpolate linearly in joint space.  Each transition must last
at least as long as the slowest involved servo needs at its rated speed;
durations round up to the next whole millisecond so quantization can never
break the speed limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import accumulate
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .atlas import LETTERS, SignAtlas
from .topology import (
    Axis,
    Handedness,
    JOINTS,
    JointId,
    OutOfRange,
    Part,
    Pose,
    Topology,
    pose_from_names,
    pose_to_names,
)


class MotionError(Exception):
    pass


class UnassignedJoint(MotionError):
    """A moving joint has no servo assigned."""


class UnknownLetter(MotionError):
    pass


@dataclass(frozen=True)
class ServoSpec:
    """One servo model's published ratings."""
    model: str
    sec_per_60deg: float
    torque: str  # opaque rating string; units vary by vendor sheet
    weight_g: float
    dims_mm: str

    def __post_init__(self):
        if self.sec_per_60deg <= 0:
            raise MotionError(f"{self.model}: sec_per_60deg must be positive")

    @property
    def us_per_60deg(self) -> int:
        return int(round(self.sec_per_60deg * 1e6))

    @property
    def deg_per_ms(self) -> float:
        return 60000.0 / self.us_per_60deg


SERVO_MODELS: Dict[str, ServoSpec] = {
    s.model: s for s in (
        ServoSpec("C02CLS", 0.060, "110 @ 4.2V", 2.2, "16.0x8.2x14.5"),
        ServoSpec("C037CLS", 0.060, "550 @ 5.0V", 3.8, "20x8.5x17"),
        ServoSpec("MG996R", 0.17, "11.0 kg-cm @ 6.0V", 55.0, "40.7x19.7x42.9"),
        ServoSpec("MG90S", 0.10, "2.0 kg-cm @ 4.8V", 13.6, "22.8x12.2x28.5"),
        ServoSpec("45KG", 0.10, "51 kg-cm @ 8.4V", 70.0, "40x20x54"),
    )
}

ServoMap = Mapping[JointId, ServoSpec]


def default_servo_map() -> Dict[JointId, ServoSpec]:
    """Stock assignment: per digit, proximal pair C037CLS and distal pair
    C02CLS; the thumb roll gets the MG90S; wrist axes MG996R; forearm 45KG."""
    assignment: Dict[JointId, ServoSpec] = {}
    for j in JOINTS:
        if j.part is Part.WRIST:
            model = "MG996R"
        elif j.part is Part.FOREARM:
            model = "45KG"
        elif j.axis in (Axis.FLEX2, Axis.FLEX3):
            model = "C02CLS"
        elif j.axis is Axis.PRON_SUP:
            model = "MG90S"
        else:  # flex1 and abduction carry the digit and need the torquier unit
            model = "C037CLS"
        assignment[j] = SERVO_MODELS[model]
    return assignment


class SegmentKind(str, Enum):
    TRANSITION = "transition"
    HOLD = "hold"


@dataclass(frozen=True)
class Segment:
    start_pose: Pose
    end_pose: Pose
    duration_ms: int
    kind: SegmentKind
    label: Optional[str] = None       # letter tag
    sign_index: Optional[int] = None  # ordinal of the sign within the schedule

    def __post_init__(self):
        if self.duration_ms < 0:
            raise MotionError("negative segment duration")
        if self.kind is SegmentKind.HOLD and self.start_pose != self.end_pose:
            raise MotionError("hold segments must not move")


@dataclass(frozen=True)
class Schedule:
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        for prev, cur in zip(self.segments, self.segments[1:]):
            if prev.end_pose != cur.start_pose:
                raise MotionError("schedule segments are not contiguous")

    @property
    def total_ms(self) -> int:
        return sum(s.duration_ms for s in self.segments)

    def boundaries(self) -> List[int]:
        """Cumulative end time of each segment."""
        return list(accumulate(s.duration_ms for s in self.segments))

    @property
    def start_pose(self) -> Pose:
        return self.segments[0].start_pose

    @property
    def end_pose(self) -> Pose:
        return self.segments[-1].end_pose

    def sign_count(self) -> int:
        return len({s.sign_index for s in self.segments
                    if s.sign_index is not None})


@dataclass(frozen=True)
class Timing:
    """Letter cadence knobs.  hold_ms applies to keyframes that do not carry
    their own hold; speed_scale >= 1 slows transitions below the rated
    maximum (1 = fastest feasible)."""
    hold_ms: int = 600
    speed_scale: float = 1.25

    def __post_init__(self):
        if self.hold_ms < 0:
            raise MotionError("hold_ms must be >= 0")
        if self.speed_scale < 1:
            raise MotionError("speed_scale must be >= 1")


def min_transition_ms(from_pose: Pose, to_pose: Pose, servo_map: ServoMap) -> int:
    """Smallest whole-millisecond duration every involved servo can honor.

    Per joint: |delta| / 60 deg * rated sec/60deg.  The slowest joint sets
    the duration; rounding is upward.  Angles are taken at the pipeline's
    0.1 degree resolution.
    """
    worst_us600 = 0  # max over joints of (tenths of a degree) * (us per 60 deg)
    for j in JOINTS:
        tenths = abs(round((to_pose[j] - from_pose[j]) * 10))
        if tenths == 0:
            continue
        servo = servo_map.get(j)
        if servo is None:
            raise UnassignedJoint(f"{j} moves but has no servo assigned")
        worst_us600 = max(worst_us600, tenths * servo.us_per_60deg)
    return -(-worst_us600 // 600_000)  # ceil division


def plan_transition(from_pose: Pose, to_pose: Pose, servo_map: ServoMap,
                    speed_scale: float = 1.0, *,
                    label: Optional[str] = None,
                    sign_index: Optional[int] = None) -> Segment:
    if speed_scale < 1:
        raise MotionError("speed_scale must be >= 1")
    duration = math.ceil(min_transition_ms(from_pose, to_pose, servo_map)
                         * speed_scale)
    return Segment(dict(from_pose), dict(to_pose), duration,
                   SegmentKind.TRANSITION, label, sign_index)


def hold(pose: Pose, duration_ms: int, *, label: Optional[str] = None,
         sign_index: Optional[int] = None) -> Segment:
    p = dict(pose)
    return Segment(p, p, duration_ms, SegmentKind.HOLD, label, sign_index)


def compile_letters(letters: Sequence[str], handedness: Handedness,
                    atlas: SignAtlas, servo_map: ServoMap, topology: Topology,
                    timing: Timing = Timing(), *,
                    first_sign_index: int = 0,
                    return_to_neutral: bool = True) -> Schedule:
    """Neutral -> each sign's keyframes (with holds) -> neutral.

    Dynamic signs expand to one transition + hold per keyframe.  Segments
    carry the letter tag and a per-sign ordinal so executors can emit
    per-sign events.
    """
    for letter in letters:
        if letter.upper() not in LETTERS:
            raise UnknownLetter(f"not a fingerspelling letter: {letter!r}")
    neutral = topology.neutral_pose()
    segments: List[Segment] = []
    current = neutral
    sign_index = first_sign_index
    for letter in letters:
        spec = atlas.lookup(letter.upper(), handedness)
        for kf in spec.keyframes:
            segments.append(plan_transition(
                current, kf.pose, servo_map, timing.speed_scale,
                label=spec.letter, sign_index=sign_index))
            hold_ms = kf.hold_ms if kf.hold_ms > 0 else timing.hold_ms
            segments.append(hold(kf.pose, hold_ms,
                                 label=spec.letter, sign_index=sign_index))
            current = kf.pose
        sign_index += 1
    if return_to_neutral or not segments:
        segments.append(plan_transition(current, neutral, servo_map,
                                        timing.speed_scale))
    return Schedule(tuple(segments))


def concat(schedules: Iterable[Schedule]) -> Schedule:
    segs: List[Segment] = []
    for s in schedules:
        segs.extend(s.segments)
    return Schedule(tuple(segs))


def sample(schedule: Schedule, t_ms: float) -> Pose:
    """Pose at time t, piecewise linear; exact keyframes at boundaries."""
    total = schedule.total_ms
    if not (0 <= t_ms <= total):
        raise OutOfRange(f"t={t_ms} outside [0, {total}]")
    start = 0
    for seg in schedule.segments:
        end = start + seg.duration_ms
        if t_ms < end or (t_ms == end == total):
            if t_ms <= start:
                return dict(seg.start_pose)
            if t_ms >= end:
                return dict(seg.end_pose)
            frac = (t_ms - start) / seg.duration_ms
            return {j: seg.start_pose[j] + (seg.end_pose[j] - seg.start_pose[j]) * frac
                    for j in JOINTS}
        start = end
    return dict(schedule.segments[-1].end_pose)  # t == total


# ---------------------------------------------------------------------------
# schedule export

def schedule_to_document(schedule: Schedule) -> dict:
    return {
        "format": "schedule/1",
        "total_ms": schedule.total_ms,
        "segments": [
            {
                "kind": seg.kind.value,
                "duration_ms": seg.duration_ms,
                "label": seg.label,
                "sign_index": seg.sign_index,
                "start": pose_to_names(seg.start_pose),
                "end": pose_to_names(seg.end_pose),
            }
            for seg in schedule.segments
        ],
    }


def schedule_from_document(doc: dict) -> Schedule:
    segs = tuple(
        Segment(
            pose_from_names(e["start"]),
            pose_from_names(e["end"]),
            int(e["duration_ms"]),
            SegmentKind(e["kind"]),
            e.get("label"),
            e.get("sign_index"),
        )
        for e in doc["segments"]
    )
    return Schedule(segs)

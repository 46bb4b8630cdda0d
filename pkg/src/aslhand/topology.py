"""24-joint hand topology: joint identities, range-of-motion limits, pose checks.

The hand has four fingers with 4 DOF each (three flexion joints plus
abduction/adduction), a 5-DOF thumb (three flexion joints, abduction,
pronation/supination), a 2-DOF wrist, and one forearm rotation: 24 joints
total, 23 of them inside the hand itself (the forearm servo is optional).

Ranges are normalized to [0, amplitude] degrees.  Neutral points and the
in-hand flags are data, editable through the topology JSON document; the
joint set itself is fixed.  Angles travel the pipeline at 0.1 degree
resolution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Tuple

TOPOLOGY_FORMAT = "hand-topology/1"
DEFAULT_TOPOLOGY_NAME = "ambidex24"


class Part(str, Enum):
    THUMB = "thumb"
    INDEX = "index"
    MIDDLE = "middle"
    RING = "ring"
    PINKY = "pinky"
    WRIST = "wrist"
    FOREARM = "forearm"


class Axis(str, Enum):
    FLEX1 = "flex1"  # proximal flexion
    FLEX2 = "flex2"
    FLEX3 = "flex3"  # distal flexion
    ABD_ADD = "abd"  # abduction/adduction (sideways splay)
    PRON_SUP = "pronsup"  # pronation/supination (roll)
    RADIAL_ULNAR = "radial"  # wrist sideways deviation
    FLEX_EXT = "flexext"  # wrist flexion/extension


class Handedness(str, Enum):
    RIGHT = "right"
    LEFT = "left"

    @property
    def other(self) -> "Handedness":
        return Handedness.LEFT if self is Handedness.RIGHT else Handedness.RIGHT


@dataclass(frozen=True, order=True)
class JointId:
    part: Part
    axis: Axis

    def __str__(self) -> str:
        return f"{self.part.value}.{self.axis.value}"

    @classmethod
    def parse(cls, name: str) -> "JointId":
        try:
            part_s, axis_s = name.split(".")
            joint = cls(Part(part_s), Axis(axis_s))
        except ValueError:
            raise UnknownJoint(f"not a joint id: {name!r}") from None
        if joint not in JOINT_SET:
            raise UnknownJoint(f"no such joint on this hand: {name!r}")
        return joint


def _build_joints() -> Tuple[JointId, ...]:
    joints: List[JointId] = []
    joints.extend(JointId(Part.THUMB, a) for a in
                  (Axis.FLEX1, Axis.FLEX2, Axis.FLEX3, Axis.ABD_ADD, Axis.PRON_SUP))
    for f in (Part.INDEX, Part.MIDDLE, Part.RING, Part.PINKY):
        joints.extend(JointId(f, a) for a in
                      (Axis.FLEX1, Axis.FLEX2, Axis.FLEX3, Axis.ABD_ADD))
    joints.append(JointId(Part.WRIST, Axis.RADIAL_ULNAR))
    joints.append(JointId(Part.WRIST, Axis.FLEX_EXT))
    joints.append(JointId(Part.FOREARM, Axis.PRON_SUP))
    return tuple(joints)


#: Canonical joint order: thumb, index, middle, ring, pinky (proximal to
#: distal within each digit), wrist, forearm.  Channel maps follow it.
JOINTS: Tuple[JointId, ...] = _build_joints()
JOINT_SET = frozenset(JOINTS)

FOREARM_ROLL = JointId(Part.FOREARM, Axis.PRON_SUP)
WRIST_RADIAL = JointId(Part.WRIST, Axis.RADIAL_ULNAR)
WRIST_FLEX = JointId(Part.WRIST, Axis.FLEX_EXT)

#: Axes that read the same on either hand.  Everything else is lateral and
#: reflects about its range midpoint when mirroring.
SYMMETRIC_AXES = frozenset({Axis.FLEX1, Axis.FLEX2, Axis.FLEX3, Axis.FLEX_EXT})

_AMPLITUDE: Dict[JointId, float] = {}
_NEUTRAL: Dict[JointId, float] = {}
for _j in JOINTS:
    if _j.axis in (Axis.FLEX1, Axis.FLEX2, Axis.FLEX3):
        _AMPLITUDE[_j] = 180.0  # all finger phalanges, thumb included
        _NEUTRAL[_j] = 0.0      # extended
    elif _j.axis is Axis.ABD_ADD:
        if _j.part is Part.THUMB:
            _AMPLITUDE[_j] = 195.0
        elif _j.part in (Part.INDEX, Part.PINKY):
            _AMPLITUDE[_j] = 100.0
        else:  # middle, ring
            _AMPLITUDE[_j] = 45.0
        _NEUTRAL[_j] = _AMPLITUDE[_j] / 2
    elif _j == JointId(Part.THUMB, Axis.PRON_SUP):
        _AMPLITUDE[_j] = 180.0
        _NEUTRAL[_j] = 90.0
    elif _j == WRIST_RADIAL:
        _AMPLITUDE[_j] = 145.0
        _NEUTRAL[_j] = 72.5
    elif _j == WRIST_FLEX:
        _AMPLITUDE[_j] = 190.0
        _NEUTRAL[_j] = 95.0
    elif _j == FOREARM_ROLL:
        _AMPLITUDE[_j] = 270.0
        _NEUTRAL[_j] = 135.0
    else:  # pragma: no cover
        raise AssertionError(_j)


class TopologyError(Exception):
    """Bad topology data."""


class UnknownJoint(TopologyError):
    pass


class MissingJoint(TopologyError):
    """A pose is missing one or more joint entries."""


class OutOfRange(ValueError):
    """A value fell outside its permitted interval."""


@dataclass(frozen=True)
class JointLimits:
    joint: JointId
    min_deg: float
    max_deg: float
    neutral_deg: float
    in_hand: bool = True

    def __post_init__(self):
        if not (self.min_deg <= self.neutral_deg <= self.max_deg):
            raise TopologyError(
                f"{self.joint}: neutral {self.neutral_deg} outside "
                f"[{self.min_deg}, {self.max_deg}]")

    @property
    def amplitude(self) -> float:
        return self.max_deg - self.min_deg

    @property
    def midpoint(self) -> float:
        return (self.min_deg + self.max_deg) / 2


#: A pose is a complete map of joint to angle in degrees.
Pose = Dict[JointId, float]


@dataclass(frozen=True)
class Topology:
    name: str
    limits: Mapping[JointId, JointLimits]

    def __post_init__(self):
        missing = JOINT_SET - set(self.limits)
        extra = set(self.limits) - JOINT_SET
        if missing or extra:
            raise TopologyError(
                f"topology must cover exactly the {len(JOINTS)} joints "
                f"(missing={sorted(map(str, missing))}, extra={sorted(map(str, extra))})")

    @property
    def joints(self) -> Tuple[JointId, ...]:
        return JOINTS

    @property
    def in_hand_joints(self) -> Tuple[JointId, ...]:
        return tuple(j for j in JOINTS if self.limits[j].in_hand)

    def neutral_pose(self) -> Pose:
        return {j: self.limits[j].neutral_deg for j in JOINTS}


@dataclass(frozen=True)
class RomViolation:
    joint: JointId
    value: float
    min_deg: float
    max_deg: float

    def __str__(self) -> str:
        return (f"{self.joint}={self.value:g} outside "
                f"[{self.min_deg:g}, {self.max_deg:g}]")


def default_topology(name: str = DEFAULT_TOPOLOGY_NAME) -> Topology:
    """The stock 24-joint topology with its published amplitudes."""
    limits = {
        j: JointLimits(j, 0.0, _AMPLITUDE[j], _NEUTRAL[j], in_hand=(j != FOREARM_ROLL))
        for j in JOINTS
    }
    return Topology(name, limits)


def _require_complete(pose: Mapping[JointId, float]) -> None:
    missing = JOINT_SET - set(pose)
    if missing:
        raise MissingJoint("pose missing " + ", ".join(sorted(map(str, missing))))


def validate_pose(pose: Pose, topology: Topology) -> List[RomViolation]:
    """Every out-of-range angle, in canonical joint order; empty when valid."""
    _require_complete(pose)
    out = []
    for j in JOINTS:
        lim = topology.limits[j]
        v = pose[j]
        if not (lim.min_deg <= v <= lim.max_deg):
            out.append(RomViolation(j, v, lim.min_deg, lim.max_deg))
    return out


def clamp_pose(pose: Pose, topology: Topology) -> Pose:
    """Clamp every angle into its range.  Idempotent."""
    _require_complete(pose)
    out: Pose = {}
    for j in JOINTS:
        lim = topology.limits[j]
        out[j] = min(max(pose[j], lim.min_deg), lim.max_deg)
    return out


def mirror_pose(pose: Pose, topology: Topology) -> Pose:
    """The contralateral pose: lateral axes reflect about their midpoint.

    Flexion axes and wrist flexion/extension carry over unchanged; the
    reflected values snap back to the 0.1 degree grid so that mirroring is
    an exact involution on pipeline poses.
    """
    _require_complete(pose)
    out: Pose = {}
    for j in JOINTS:
        if j.axis in SYMMETRIC_AXES:
            out[j] = pose[j]
        else:
            lim = topology.limits[j]
            out[j] = round(lim.min_deg + lim.max_deg - pose[j], 1)
    return out


# ---------------------------------------------------------------------------
# topology.json


def topology_to_document(topology: Topology) -> dict:
    return {
        "format": TOPOLOGY_FORMAT,
        "name": topology.name,
        "joints": [
            {
                "joint": str(j),
                "min_deg": topology.limits[j].min_deg,
                "max_deg": topology.limits[j].max_deg,
                "neutral_deg": topology.limits[j].neutral_deg,
                "in_hand": topology.limits[j].in_hand,
            }
            for j in JOINTS
        ],
    }


_JOINT_FIELDS = {"joint", "min_deg", "max_deg", "neutral_deg", "in_hand"}


def topology_from_document(doc: dict) -> Topology:
    """Parse and validate a topology document.  Unknown fields are rejected."""
    if not isinstance(doc, dict):
        raise TopologyError("topology document must be a JSON object")
    unknown = set(doc) - {"format", "name", "joints"}
    if unknown:
        raise TopologyError(f"unknown topology fields: {sorted(unknown)}")
    if doc.get("format") != TOPOLOGY_FORMAT:
        raise TopologyError(f"unsupported topology format: {doc.get('format')!r}")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise TopologyError("topology needs a non-empty name")
    entries = doc.get("joints")
    if not isinstance(entries, list):
        raise TopologyError("topology 'joints' must be a list")
    limits: Dict[JointId, JointLimits] = {}
    for entry in entries:
        if not isinstance(entry, dict):
            raise TopologyError("joint entries must be objects")
        unknown = set(entry) - _JOINT_FIELDS
        if unknown:
            raise TopologyError(f"unknown joint fields: {sorted(unknown)}")
        try:
            joint = JointId.parse(entry["joint"])
            lim = JointLimits(
                joint,
                float(entry["min_deg"]),
                float(entry["max_deg"]),
                float(entry["neutral_deg"]),
                in_hand=bool(entry.get("in_hand", True)),
            )
        except KeyError as e:
            raise TopologyError(f"joint entry missing {e.args[0]!r}") from None
        if joint in limits:
            raise TopologyError(f"duplicate joint {joint}")
        limits[joint] = lim
    return Topology(name, limits)


def load_topology(path: str) -> Topology:
    with open(path, "r", encoding="utf-8") as f:
        return topology_from_document(json.load(f))


def save_topology(topology: Topology, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(topology_to_document(topology), f, indent=2, sort_keys=True)
        f.write("\n")


def pose_to_names(pose: Pose) -> Dict[str, float]:
    """Pose keyed by joint-name strings, in canonical order (for JSON)."""
    _require_complete(pose)
    return {str(j): pose[j] for j in JOINTS}


def pose_from_names(angles: Mapping[str, float]) -> Pose:
    pose = {JointId.parse(k): float(v) for k, v in angles.items()}
    _require_complete(pose)
    return pose


def poses_equal(a: Pose, b: Pose, tol: float = 0.0) -> bool:
    return all(abs(a[j] - b[j]) <= tol for j in JOINTS)


def iter_parts(part: Part) -> Iterable[JointId]:
    return (j for j in JOINTS if j.part is part)

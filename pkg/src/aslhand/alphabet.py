"""Reference right-hand poses for the 26 fingerspelling letters.

Angle conventions (degrees, within each joint's [0, amplitude] range):

* flexion axes: 0 = fully extended, amplitude = fully curled
* finger abduction: 0 = deviated toward the thumb side, amplitude = toward
  the pinky side; neutral (mid-range) = aligned with the palm
* thumb abduction: 0 = tucked across the palm, 195 = abducted fully out
* thumb roll: below 90 = pad turned toward the fingers (opposition)
* wrist radial/ulnar: below mid = radial (thumb side)
* wrist flexion/extension: below mid = flexed (palm dips)
* forearm roll: mid = palm facing the viewer

The values are nominal, authored against public ASL handshape charts, and
are meant to be structurally correct (distinct, in-range, mirrorable), not
measured from hardware.  Left-hand signs are derived by mirroring.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from .atlas import ATLAS_FORMAT
from .topology import Axis, JointId, Part, Pose, default_topology, pose_to_names

ATLAS_VERSION = "1.0.0"
ATLAS_PROVENANCE = (
    "Authored from public ASL fingerspelling handshape charts; angles are "
    "nominal, not measured from hardware. J and Z trajectories are "
    "4-keyframe placeholders with 150 ms holds.")

DYNAMIC_HOLD_MS = 150

FingerShape = Tuple[float, float, float]  # flex1, flex2, flex3

# finger flexion fragments
STRAIGHT: FingerShape = (0, 0, 0)
FIST: FingerShape = (90, 100, 90)
FIST_TIGHT: FingerShape = (95, 105, 95)
CURL_TIP: FingerShape = (70, 110, 100)   # tip rolled toward the palm (E)
CURL_O: FingerShape = (55, 70, 45)       # rounded, tip meets the thumb (O, F)
CURL_TOUCH: FingerShape = (60, 70, 50)   # rounded onto the thumb pad (D)
CUP: FingerShape = (40, 50, 35)          # open arc (C)
DRAPE: FingerShape = (75, 85, 65)        # folded over the thumb (M, N)
CURL_SMALL: FingerShape = (85, 95, 80)   # curled but not clenched
HOOK: FingerShape = (15, 100, 95)        # knuckle up, tip hooked (X)

ThumbShape = Tuple[float, float, float, float, float]  # flex1..3, abd, roll


def _thumb(flex: FingerShape, abd: float, roll: float = 90) -> ThumbShape:
    return (*flex, abd, roll)


THUMB_BESIDE = _thumb((15, 10, 5), 80)          # upright against the fist (A)
THUMB_ACROSS_PALM = _thumb((40, 30, 20), 16, 70)
THUMB_ACROSS_FINGERS = _thumb((35, 25, 15), 30, 80)
THUMB_OPPOSED = _thumb((30, 35, 25), 55, 60)    # pad meets fingertips (O, D, F)
THUMB_CUP = _thumb((25, 30, 20), 60, 60)        # open C arc
THUMB_OUT = _thumb((0, 0, 0), 170)              # fully abducted (L, Y)
THUMB_TUCKED = _thumb((45, 40, 30), 25, 60)     # under the fingertips (E)
THUMB_POINTER = _thumb((10, 10, 5), 60)         # parallel with the index (G)
THUMB_BETWEEN = _thumb((20, 15, 10), 80, 70)    # rises between index/middle (K)

NEUTRAL_WRIST = (72.5, 95.0)  # radial/ulnar, flex/ext
NEUTRAL_FOREARM = 135.0
SIDE_FOREARM = 46.0           # palm turned a quarter in (G, H)
DOWN_WRIST = (72.5, 40.0)     # hand tipped down (P, Q)
DOWN_FOREARM = 100.0


def _digit(part: Part, flex: FingerShape, abd: Optional[float] = None) -> Pose:
    topo = _LIMITS
    out = {
        JointId(part, Axis.FLEX1): float(flex[0]),
        JointId(part, Axis.FLEX2): float(flex[1]),
        JointId(part, Axis.FLEX3): float(flex[2]),
    }
    abd_joint = JointId(part, Axis.ABD_ADD)
    out[abd_joint] = topo[abd_joint].neutral_deg if abd is None else float(abd)
    return out


_LIMITS = default_topology().limits


def hand_pose(
    thumb: ThumbShape,
    index: FingerShape,
    middle: FingerShape,
    ring: FingerShape,
    pinky: FingerShape,
    *,
    index_abd: Optional[float] = None,
    middle_abd: Optional[float] = None,
    ring_abd: Optional[float] = None,
    pinky_abd: Optional[float] = None,
    wrist: Tuple[float, float] = NEUTRAL_WRIST,
    forearm: float = NEUTRAL_FOREARM,
) -> Pose:
    """Assemble a full 24-joint pose from per-digit fragments."""
    pose: Pose = {}
    pose.update(_digit(Part.THUMB, thumb[:3], thumb[3]))
    pose[JointId(Part.THUMB, Axis.PRON_SUP)] = float(thumb[4])
    pose.update(_digit(Part.INDEX, index, index_abd))
    pose.update(_digit(Part.MIDDLE, middle, middle_abd))
    pose.update(_digit(Part.RING, ring, ring_abd))
    pose.update(_digit(Part.PINKY, pinky, pinky_abd))
    pose[JointId(Part.WRIST, Axis.RADIAL_ULNAR)] = float(wrist[0])
    pose[JointId(Part.WRIST, Axis.FLEX_EXT)] = float(wrist[1])
    pose[JointId(Part.FOREARM, Axis.PRON_SUP)] = float(forearm)
    return pose


def _fist_with(thumb: ThumbShape, **kw) -> Pose:
    return hand_pose(thumb, FIST, FIST, FIST, FIST, **kw)


# ---------------------------------------------------------------------------
# the letters (right hand)

_A = _fist_with(THUMB_BESIDE)
_B = hand_pose(THUMB_ACROSS_PALM, STRAIGHT, STRAIGHT, STRAIGHT, STRAIGHT)
_C = hand_pose(THUMB_CUP, CUP, CUP, CUP, CUP)
_D = hand_pose(THUMB_OPPOSED, STRAIGHT, CURL_TOUCH, CURL_TOUCH, CURL_TOUCH)
_E = hand_pose(THUMB_TUCKED, CURL_TIP, CURL_TIP, CURL_TIP, CURL_TIP)
_F = hand_pose(THUMB_OPPOSED, CURL_O, STRAIGHT, STRAIGHT, STRAIGHT,
               middle_abd=15, ring_abd=30, pinky_abd=65)
_G = hand_pose(THUMB_POINTER, STRAIGHT, FIST, FIST, FIST, forearm=SIDE_FOREARM)
_H = hand_pose(THUMB_ACROSS_FINGERS, STRAIGHT, STRAIGHT, FIST, FIST,
               index_abd=55, middle_abd=18, forearm=SIDE_FOREARM)
_I = hand_pose(THUMB_ACROSS_FINGERS, FIST, FIST, FIST, STRAIGHT)
_K = hand_pose(THUMB_BETWEEN, STRAIGHT, (30, 0, 0), FIST, FIST,
               index_abd=40, middle_abd=30)
_L = hand_pose(THUMB_OUT, STRAIGHT, FIST, FIST, FIST)
_M = hand_pose(_thumb((50, 35, 25), 12, 75), DRAPE, DRAPE, DRAPE, CURL_SMALL)
_N = hand_pose(_thumb((45, 35, 25), 22, 75), DRAPE, DRAPE, CURL_SMALL, CURL_SMALL)
_O = hand_pose(THUMB_OPPOSED, CURL_O, CURL_O, CURL_O, CURL_O)
_P = hand_pose(THUMB_BETWEEN, STRAIGHT, (35, 0, 0), FIST, FIST,
               index_abd=40, middle_abd=30, wrist=DOWN_WRIST, forearm=DOWN_FOREARM)
_Q = hand_pose(_thumb((15, 10, 5), 55, 75), STRAIGHT, FIST, FIST, FIST,
               wrist=DOWN_WRIST, forearm=DOWN_FOREARM)
_R = hand_pose(THUMB_ACROSS_FINGERS, (10, 5, 0), (0, 5, 0), FIST, FIST,
               index_abd=75, middle_abd=5)  # index crossed over middle
_S = _fist_with(_thumb((45, 35, 25), 20, 75))
_T = hand_pose(_thumb((30, 25, 15), 45, 80), (80, 95, 85), FIST_TIGHT,
               FIST_TIGHT, FIST_TIGHT)
_U = hand_pose(THUMB_ACROSS_FINGERS, STRAIGHT, STRAIGHT, FIST, FIST,
               index_abd=55, middle_abd=18)
_V = hand_pose(THUMB_ACROSS_FINGERS, STRAIGHT, STRAIGHT, FIST, FIST,
               index_abd=30, middle_abd=35)
_W = hand_pose(_thumb((30, 30, 20), 40, 70), STRAIGHT, STRAIGHT, STRAIGHT,
               CURL_SMALL, index_abd=35, ring_abd=35)
_X = hand_pose(THUMB_ACROSS_FINGERS, HOOK, FIST, FIST, FIST)
_Y = hand_pose(THUMB_OUT, FIST, FIST, FIST, STRAIGHT, pinky_abd=75)

# J: sign I, then the pinky sweeps a hook: wrist dips and deviates while the
# forearm rolls inward.
_J_FRAMES = [
    _I,
    hand_pose(THUMB_ACROSS_FINGERS, FIST, FIST, FIST, STRAIGHT,
              wrist=(95, 55)),
    hand_pose(THUMB_ACROSS_FINGERS, FIST, FIST, FIST, STRAIGHT,
              wrist=(110, 65), forearm=75),
    hand_pose(THUMB_ACROSS_FINGERS, FIST, FIST, FIST, STRAIGHT,
              wrist=(85, 90), forearm=60),
]

# Z: the index traces the three strokes of a Z with wrist sweeps.
_Z_BASE = dict(thumb=_thumb((35, 25, 15), 35, 80), index=STRAIGHT,
               middle=FIST, ring=FIST, pinky=FIST)


def _z_frame(radial: float, flexext: float) -> Pose:
    return hand_pose(_Z_BASE["thumb"], _Z_BASE["index"], _Z_BASE["middle"],
                     _Z_BASE["ring"], _Z_BASE["pinky"], wrist=(radial, flexext))


_Z_FRAMES = [
    _z_frame(40, 95),
    _z_frame(105, 95),
    _z_frame(40, 55),
    _z_frame(105, 55),
]

RIGHT_HAND_KEYFRAMES: Dict[str, List[Pose]] = {
    "A": [_A], "B": [_B], "C": [_C], "D": [_D], "E": [_E], "F": [_F],
    "G": [_G], "H": [_H], "I": [_I], "J": _J_FRAMES, "K": [_K], "L": [_L],
    "M": [_M], "N": [_N], "O": [_O], "P": [_P], "Q": [_Q], "R": [_R],
    "S": [_S], "T": [_T], "U": [_U], "V": [_V], "W": [_W], "X": [_X],
    "Y": [_Y], "Z": _Z_FRAMES,
}


def reference_document(topology_name: str = "ambidex24") -> dict:
    """The bundled atlas as a right-hand-only source document."""
    signs = []
    for letter, frames in sorted(RIGHT_HAND_KEYFRAMES.items()):
        dynamic = len(frames) > 1
        signs.append({
            "letter": letter,
            "handedness": "right",
            "dynamic": dynamic,
            "keyframes": [
                {"angles": pose_to_names(pose),
                 "hold_ms": DYNAMIC_HOLD_MS if dynamic else 0}
                for pose in frames
            ],
        })
    return {
        "format": ATLAS_FORMAT,
        "version": ATLAS_VERSION,
        "topology": topology_name,
        "provenance": ATLAS_PROVENANCE,
        "signs": signs,
    }

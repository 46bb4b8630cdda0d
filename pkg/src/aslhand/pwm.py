"""Joint-to-channel mapping and bit-exact 16-channel PWM controller frames.

Two controllers on one bus drive the 24 servos.  Angles map linearly to
pulse widths over each joint's calibrated range, pulses quantize to the
controller's 4096-tick period, and a pose becomes an ordered batch of
register writes: ON always 0, OFF the tick count, low byte then high byte
at register base 0x06 + 4 * channel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple

from .motion import SERVO_MODELS, ServoSpec
from .topology import JOINTS, JointId, JointLimits, OutOfRange, Pose, Topology

# controller register map
REG_MODE1 = 0x00
REG_MODE2 = 0x01
REG_LED0_ON_L = 0x06
REG_LED15_OFF_H = 0x45
REG_ALL_LED_ON_L = 0xFA
REG_PRESCALE = 0xFE

MODE1_RESTART = 0x80
MODE1_AUTO_INC = 0x20
MODE1_SLEEP = 0x10

OSC_HZ = 25_000_000
TICKS_PER_PERIOD = 4096
MIN_PWM_HZ = 24
MAX_PWM_HZ = 1526

DEFAULT_PWM_HZ = 50
DEFAULT_CONTROLLERS = (0x40, 0x41)
DEFAULT_PULSE_MIN_US = 500.0
DEFAULT_PULSE_MAX_US = 2500.0

CHANNELS_FORMAT = "hand-channels/1"


class ChannelMapError(Exception):
    pass


class UnsupportedFrequency(OutOfRange):
    pass


@dataclass(frozen=True)
class ChannelCalibration:
    pulse_at_min_us: float
    pulse_at_max_us: float
    inverted: bool = False


@dataclass(frozen=True)
class ChannelAssignment:
    controller: int  # 7-bit bus address
    channel: int     # 0..15

    def __post_init__(self):
        if not (0 <= self.controller <= 0x7F):
            raise ChannelMapError(f"controller address out of range: {self.controller:#x}")
        if not (0 <= self.channel <= 15):
            raise ChannelMapError(f"channel out of range: {self.channel}")


@dataclass(frozen=True)
class ChannelMap:
    entries: Mapping[JointId, ChannelAssignment]
    calibration: Mapping[JointId, ChannelCalibration]
    servos: Mapping[JointId, ServoSpec]
    pwm_hz: int = DEFAULT_PWM_HZ

    def __post_init__(self):
        missing = set(JOINTS) - set(self.entries)
        if missing:
            raise ChannelMapError(
                "unmapped joints: " + ", ".join(sorted(map(str, missing))))
        seen: Dict[Tuple[int, int], JointId] = {}
        for j, a in self.entries.items():
            key = (a.controller, a.channel)
            if key in seen:
                raise ChannelMapError(
                    f"{j} and {seen[key]} share controller {a.controller:#x} "
                    f"channel {a.channel}")
            seen[key] = j
        controllers = self.controllers
        if len(controllers) != 2:
            raise ChannelMapError(
                f"expected exactly 2 controllers, found {len(controllers)}")
        if len(self.entries) > 32:
            raise ChannelMapError("more than 32 channels mapped")
        for j in self.entries:
            if j not in self.calibration:
                raise ChannelMapError(f"{j} has no pulse calibration")
            if j not in self.servos:
                raise ChannelMapError(f"{j} has no servo model")

    @property
    def controllers(self) -> Tuple[int, ...]:
        return tuple(sorted({a.controller for a in self.entries.values()}))

    def joint_at(self, controller: int, channel: int) -> Optional[JointId]:
        for j, a in self.entries.items():
            if a.controller == controller and a.channel == channel:
                return j
        return None


def default_channel_map(servo_map: Mapping[JointId, ServoSpec],
                        pwm_hz: int = DEFAULT_PWM_HZ) -> ChannelMap:
    """Joints in canonical order fill controller 0x40 ch 0..15, then 0x41."""
    entries = {}
    calibration = {}
    for i, j in enumerate(JOINTS):
        entries[j] = ChannelAssignment(DEFAULT_CONTROLLERS[i // 16], i % 16)
        calibration[j] = ChannelCalibration(DEFAULT_PULSE_MIN_US,
                                            DEFAULT_PULSE_MAX_US)
    return ChannelMap(entries, calibration, dict(servo_map), pwm_hz)


# ---------------------------------------------------------------------------
# conversions

def angle_to_pulse_us(angle: float, limits: JointLimits,
                      cal: ChannelCalibration) -> float:
    """Linear map of [min_deg, max_deg] onto the calibrated pulse interval."""
    if not (limits.min_deg <= angle <= limits.max_deg):
        raise OutOfRange(
            f"{limits.joint}: angle {angle:g} outside "
            f"[{limits.min_deg:g}, {limits.max_deg:g}]")
    lo, hi = cal.pulse_at_min_us, cal.pulse_at_max_us
    if cal.inverted:
        lo, hi = hi, lo
    span = limits.max_deg - limits.min_deg
    frac = 0.0 if span == 0 else (angle - limits.min_deg) / span
    return lo + (hi - lo) * frac


def pulse_to_angle(pulse_us: float, limits: JointLimits,
                   cal: ChannelCalibration) -> float:
    """Inverse of angle_to_pulse_us, clamped into the joint's range."""
    lo, hi = cal.pulse_at_min_us, cal.pulse_at_max_us
    if cal.inverted:
        lo, hi = hi, lo
    frac = (pulse_us - lo) / (hi - lo)
    angle = limits.min_deg + (limits.max_deg - limits.min_deg) * frac
    return min(max(angle, limits.min_deg), limits.max_deg)


def pulse_to_ticks(pulse_us: float, pwm_hz: float) -> int:
    period_us = 1e6 / pwm_hz
    if not (0 <= pulse_us < period_us):
        raise OutOfRange(f"pulse {pulse_us:g} us outside [0, {period_us:g}) us")
    return math.floor(pulse_us / period_us * TICKS_PER_PERIOD)


def ticks_to_pulse_us(ticks: int, pwm_hz: float) -> float:
    period_us = 1e6 / pwm_hz
    return ticks / TICKS_PER_PERIOD * period_us


def prescale_for(pwm_hz: int, osc_hz: int = OSC_HZ) -> int:
    if not (MIN_PWM_HZ <= pwm_hz <= MAX_PWM_HZ):
        raise UnsupportedFrequency(
            f"{pwm_hz} Hz outside [{MIN_PWM_HZ}, {MAX_PWM_HZ}] Hz")
    value = round(osc_hz / (TICKS_PER_PERIOD * pwm_hz)) - 1
    return min(max(value, 3), 255)


def freq_for_prescale(prescale: int, osc_hz: int = OSC_HZ) -> float:
    return osc_hz / (TICKS_PER_PERIOD * (prescale + 1))


def effective_pwm_hz(nominal_hz: int, osc_hz: int = OSC_HZ) -> float:
    """The frequency the controller actually runs at for a nominal setting.

    The prescaler is an integer divider, so e.g. nominal 50 Hz really ticks
    at ~50.03 Hz; encoding against the achievable period keeps host ticks
    and firmware pulse widths within one tick of each other.
    """
    return freq_for_prescale(prescale_for(nominal_hz, osc_hz), osc_hz)


# ---------------------------------------------------------------------------
# frames

class RegWrite(NamedTuple):
    controller: int
    register: int
    value: int


def _check_write(w: RegWrite) -> None:
    ok_reg = (REG_LED0_ON_L <= w.register <= REG_LED15_OFF_H
              or w.register in (REG_MODE1, REG_MODE2, REG_PRESCALE))
    if not ok_reg:
        raise ChannelMapError(f"register {w.register:#04x} outside the "
                              "LED/MODE/PRESCALE window")
    if not (0 <= w.value <= 0xFF):
        raise ChannelMapError(f"value {w.value} is not a byte")


@dataclass(frozen=True)
class Frame:
    writes: Tuple[RegWrite, ...]
    timestamp_ms: int = 0

    def __post_init__(self):
        for w in self.writes:
            _check_write(w)


def channel_registers(channel: int) -> Tuple[int, int, int, int]:
    """(ON_L, ON_H, OFF_L, OFF_H) register addresses for a channel."""
    base = REG_LED0_ON_L + 4 * channel
    return base, base + 1, base + 2, base + 3


def encode_pose(pose: Pose, topology: Topology, channel_map: ChannelMap,
                pwm_hz: Optional[int] = None, timestamp_ms: int = 0) -> Frame:
    """Deterministic register batch for a pose.

    Writes are grouped per controller in ascending bus-address order, then
    ascending channel; ON registers are zero, OFF registers carry the tick
    count as a little-endian low/high pair.
    """
    hz = effective_pwm_hz(channel_map.pwm_hz if pwm_hz is None else pwm_hz)
    by_key: List[Tuple[int, int, int]] = []  # (controller, channel, ticks)
    for j in JOINTS:
        assignment = channel_map.entries[j]
        pulse = angle_to_pulse_us(pose[j], topology.limits[j],
                                  channel_map.calibration[j])
        by_key.append((assignment.controller, assignment.channel,
                       pulse_to_ticks(pulse, hz)))
    writes: List[RegWrite] = []
    for controller, channel, ticks in sorted(by_key):
        on_l, on_h, off_l, off_h = channel_registers(channel)
        writes.append(RegWrite(controller, on_l, 0))
        writes.append(RegWrite(controller, on_h, 0))
        writes.append(RegWrite(controller, off_l, ticks & 0xFF))
        writes.append(RegWrite(controller, off_h, (ticks >> 8) & 0x0F))
    return Frame(tuple(writes), timestamp_ms)


def controller_init_frame(channel_map: ChannelMap,
                          pwm_hz: Optional[int] = None) -> Frame:
    """Sleep, program the prescaler, wake with auto-increment, restart."""
    hz = channel_map.pwm_hz if pwm_hz is None else pwm_hz
    prescale = prescale_for(hz)
    writes: List[RegWrite] = []
    for controller in channel_map.controllers:
        writes.append(RegWrite(controller, REG_MODE1, MODE1_SLEEP))
        writes.append(RegWrite(controller, REG_PRESCALE, prescale))
        writes.append(RegWrite(controller, REG_MODE1, MODE1_AUTO_INC))
        writes.append(RegWrite(controller, REG_MODE1,
                               MODE1_RESTART | MODE1_AUTO_INC))
    return Frame(tuple(writes))


def frame_to_hex(frame: Frame) -> str:
    """One `controller register value` hex triplet per line; stable enough
    to diff against golden files."""
    return "\n".join(f"{w.controller:02X} {w.register:02X} {w.value:02X}"
                     for w in frame.writes)


# ---------------------------------------------------------------------------
# channels.json

_CHANNEL_FIELDS = {"joint", "controller", "channel", "pulse_min_us",
                   "pulse_max_us", "inverted", "servo"}


def channel_map_to_document(channel_map: ChannelMap) -> dict:
    channels = []
    for j in JOINTS:
        a = channel_map.entries[j]
        cal = channel_map.calibration[j]
        channels.append({
            "joint": str(j),
            "controller": f"0x{a.controller:02X}",
            "channel": a.channel,
            "pulse_min_us": cal.pulse_at_min_us,
            "pulse_max_us": cal.pulse_at_max_us,
            "inverted": cal.inverted,
            "servo": channel_map.servos[j].model,
        })
    return {
        "format": CHANNELS_FORMAT,
        "pwm_hz": channel_map.pwm_hz,
        "channels": channels,
    }


def channel_map_from_document(doc: dict) -> ChannelMap:
    if not isinstance(doc, dict):
        raise ChannelMapError("channel document must be a JSON object")
    unknown = set(doc) - {"format", "pwm_hz", "channels"}
    if unknown:
        raise ChannelMapError(f"unknown channel-map fields: {sorted(unknown)}")
    if doc.get("format") != CHANNELS_FORMAT:
        raise ChannelMapError(f"unsupported channel-map format: {doc.get('format')!r}")
    entries: Dict[JointId, ChannelAssignment] = {}
    calibration: Dict[JointId, ChannelCalibration] = {}
    servos: Dict[JointId, ServoSpec] = {}
    for entry in doc.get("channels", ()):
        unknown = set(entry) - _CHANNEL_FIELDS
        if unknown:
            raise ChannelMapError(f"unknown channel fields: {sorted(unknown)}")
        try:
            joint = JointId.parse(entry["joint"])
            controller = int(str(entry["controller"]), 0)
            entries[joint] = ChannelAssignment(controller, int(entry["channel"]))
            calibration[joint] = ChannelCalibration(
                float(entry["pulse_min_us"]), float(entry["pulse_max_us"]),
                bool(entry.get("inverted", False)))
            servos[joint] = SERVO_MODELS[str(entry["servo"])]
        except KeyError as e:
            raise ChannelMapError(f"channel entry missing or unknown {e.args[0]!r}") from None
    return ChannelMap(entries, calibration, servos, int(doc.get("pwm_hz", DEFAULT_PWM_HZ)))


def load_channel_map(path: str) -> ChannelMap:
    with open(path, "r", encoding="utf-8") as f:
        return channel_map_from_document(json.load(f))


def save_channel_map(channel_map: ChannelMap, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(channel_map_to_document(channel_map), f, indent=2, sort_keys=True)
        f.write("\n")

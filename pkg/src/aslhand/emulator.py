"""Byte-exact firmware emulator: two PWM controllers plus 24 slewing servos.

The emulator speaks the framed serial protocol, keeps real register state
per controller, and integrates servo motion under each model's rated speed
limit, so host code can be exercised end to end without hardware.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import wire
from .pwm import (
    ChannelMap,
    MODE1_SLEEP,
    REG_LED0_ON_L,
    REG_LED15_OFF_H,
    REG_MODE1,
    REG_MODE2,
    REG_PRESCALE,
    freq_for_prescale,
    pulse_to_angle,
    ticks_to_pulse_us,
)
from .topology import JOINTS, JointId, Pose, Topology

# controller power-on defaults
_DEFAULT_MODE1 = 0x11  # sleep + allcall
_DEFAULT_PRESCALE = 0x1E


@dataclass
class _Controller:
    mode1: int = _DEFAULT_MODE1
    mode2: int = 0x04
    prescale: int = _DEFAULT_PRESCALE
    led: Dict[int, int] = field(default_factory=dict)  # register -> byte

    def write(self, register: int, value: int) -> None:
        if register == REG_MODE1:
            self.mode1 = value
        elif register == REG_MODE2:
            self.mode2 = value
        elif register == REG_PRESCALE:
            # the real part latches the prescaler only while sleeping
            if self.mode1 & MODE1_SLEEP:
                self.prescale = value
        else:
            self.led[register] = value

    def channel_ticks(self, channel: int) -> Optional[int]:
        base = REG_LED0_ON_L + 4 * channel
        regs = [self.led.get(base + k) for k in range(4)]
        if all(r is None for r in regs):
            return None
        on = (regs[0] or 0) | (((regs[1] or 0) & 0x0F) << 8)
        off = (regs[2] or 0) | (((regs[3] or 0) & 0x0F) << 8)
        return (off - on) % 4096

    @property
    def pwm_hz(self) -> float:
        return freq_for_prescale(self.prescale)


@dataclass
class _Servo:
    joint: JointId
    current_deg: float
    target_deg: float
    max_deg_per_ms: float

    def step(self, dt_ms: float) -> None:
        delta = self.target_deg - self.current_deg
        limit = self.max_deg_per_ms * dt_ms
        if abs(delta) <= limit:
            self.current_deg = self.target_deg
        else:
            self.current_deg += limit if delta > 0 else -limit


class FirmwareEmulator:
    """Decodes wire commands, updates register state, slews servo positions."""

    def __init__(self, topology: Topology, channel_map: ChannelMap):
        self.topology = topology
        self.channel_map = channel_map
        self.controllers: Dict[int, _Controller] = {
            addr: _Controller() for addr in channel_map.controllers}
        neutral = topology.neutral_pose()
        self.servos: Dict[JointId, _Servo] = {
            j: _Servo(j, neutral[j], neutral[j],
                      channel_map.servos[j].deg_per_ms)
            for j in JOINTS
        }
        self._decoder = wire.StreamDecoder()
        self.time_ms = 0.0
        self.frames_applied = 0
        self.naks_sent = 0

    # -- wire side ----------------------------------------------------------

    def handle_bytes(self, data: bytes) -> bytes:
        """Feed raw host bytes; returns the firmware's response bytes."""
        out = bytearray()
        for event in self._decoder.feed(data):
            if isinstance(event, wire.CrcFailure):
                out.extend(wire.nak(wire.NAK_BAD_CRC))
                self.naks_sent += 1
            else:
                out.extend(self._execute(event))
        return bytes(out)

    def _execute(self, cmd: wire.WireCommand) -> bytes:
        if cmd.opcode == wire.Opcode.PING:
            return wire.ack_for(cmd.opcode, cmd.payload)
        if cmd.opcode == wire.Opcode.SET_FRAME:
            try:
                writes = wire.parse_frame_payload(cmd.payload)
                self._validate_writes(writes)
            except wire.MalformedPayload:
                self.naks_sent += 1
                return wire.nak(wire.NAK_MALFORMED)
            for controller, register, value in writes:
                self.controllers[controller].write(register, value)
            self._retarget()
            self.frames_applied += 1
            return wire.ack_for(cmd.opcode)
        if cmd.opcode == wire.Opcode.SET_NEUTRAL:
            neutral = self.topology.neutral_pose()
            for j, servo in self.servos.items():
                servo.target_deg = neutral[j]
            return wire.ack_for(cmd.opcode)
        if cmd.opcode == wire.Opcode.STOP:
            for servo in self.servos.values():
                servo.target_deg = servo.current_deg
            return wire.ack_for(cmd.opcode)
        self.naks_sent += 1
        return wire.nak(wire.NAK_UNKNOWN_OPCODE)

    def _validate_writes(self, writes: List[Tuple[int, int, int]]) -> None:
        for controller, register, value in writes:
            if controller not in self.controllers:
                raise wire.MalformedPayload(f"no controller at {controller:#04x}")
            ok = (REG_LED0_ON_L <= register <= REG_LED15_OFF_H
                  or register in (REG_MODE1, REG_MODE2, REG_PRESCALE))
            if not ok:
                raise wire.MalformedPayload(f"register {register:#04x} not writable")

    def _retarget(self) -> None:
        for j in JOINTS:
            assignment = self.channel_map.entries[j]
            controller = self.controllers[assignment.controller]
            ticks = controller.channel_ticks(assignment.channel)
            if ticks is None:
                continue  # channel never written; servo keeps its target
            pulse = ticks_to_pulse_us(ticks, controller.pwm_hz)
            self.servos[j].target_deg = pulse_to_angle(
                pulse, self.topology.limits[j], self.channel_map.calibration[j])

    # -- physics side --------------------------------------------------------

    def step(self, dt_ms: float) -> None:
        """Advance time; every servo slews toward its target at its rated
        speed at most."""
        if dt_ms < 0:
            raise ValueError("time runs forward only")
        for servo in self.servos.values():
            servo.step(dt_ms)
        self.time_ms += dt_ms

    def pose(self) -> Pose:
        return {j: s.current_deg for j, s in self.servos.items()}

    def targets(self) -> Pose:
        return {j: s.target_deg for j, s in self.servos.items()}

    def settled(self, tol_deg: float = 1e-9) -> bool:
        return all(abs(s.current_deg - s.target_deg) <= tol_deg
                   for s in self.servos.values())

"""Framed serial protocol between the host and the servo firmware.

Frame layout (see PROTOCOL.md for the normative byte table):

    SOF(0xA5) | opcode | length lo | length hi | payload... | crc hi | crc lo

The 16-bit checksum is CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no
reflection) computed over opcode + payload, transmitted big-endian.  A
frame whose checksum fails is answered with a Nak and has no effect.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import List, Tuple, Union

SOF = 0xA5
MAX_PAYLOAD = 768
HEADER_LEN = 4  # SOF + opcode + 2 length bytes
CRC_LEN = 2


class Opcode(IntEnum):
    SET_FRAME = 0x01
    SET_NEUTRAL = 0x02
    PING = 0x03
    STOP = 0x04
    ACK = 0x06
    NAK = 0x15


NAK_BAD_CRC = 0x01
NAK_UNKNOWN_OPCODE = 0x02
NAK_MALFORMED = 0x03


class WireError(Exception):
    pass


class CrcError(WireError):
    pass


class UnknownOpcode(WireError):
    pass


class MalformedPayload(WireError):
    pass


def crc16_ccitt_false(data: bytes) -> int:
    crc = 0xFFFF
    for b in data:
        crc ^= b << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ 0x1021) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
    return crc


@dataclass(frozen=True)
class WireCommand:
    opcode: int
    payload: bytes
    crc: int

    @classmethod
    def build(cls, opcode: int, payload: bytes = b"") -> "WireCommand":
        if len(payload) > MAX_PAYLOAD:
            raise MalformedPayload(f"payload of {len(payload)} exceeds {MAX_PAYLOAD}")
        return cls(opcode, bytes(payload), crc16_ccitt_false(bytes([opcode]) + payload))

    @property
    def crc_ok(self) -> bool:
        return self.crc == crc16_ccitt_false(bytes([self.opcode]) + self.payload)


def encode_command(opcode: int, payload: bytes = b"") -> bytes:
    cmd = WireCommand.build(opcode, payload)
    return bytes([SOF, cmd.opcode, len(cmd.payload) & 0xFF, len(cmd.payload) >> 8]) \
        + cmd.payload + cmd.crc.to_bytes(2, "big")


@dataclass(frozen=True)
class CrcFailure:
    """A complete frame arrived but its checksum did not validate."""
    raw: bytes


Event = Union[WireCommand, CrcFailure]


class StreamDecoder:
    """Incremental deframer; resynchronizes on the SOF byte after garbage."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> List[Event]:
        self._buf.extend(data)
        events: List[Event] = []
        while True:
            start = self._buf.find(bytes([SOF]))
            if start < 0:
                self._buf.clear()
                break
            if start:
                del self._buf[:start]
            if len(self._buf) < HEADER_LEN:
                break
            opcode = self._buf[1]
            length = self._buf[2] | (self._buf[3] << 8)
            if length > MAX_PAYLOAD:
                del self._buf[:1]  # not a real frame; resync
                continue
            total = HEADER_LEN + length + CRC_LEN
            if len(self._buf) < total:
                break
            raw = bytes(self._buf[:total])
            del self._buf[:total]
            payload = raw[HEADER_LEN:HEADER_LEN + length]
            got_crc = int.from_bytes(raw[-2:], "big")
            cmd = WireCommand(opcode, payload, got_crc)
            events.append(cmd if cmd.crc_ok else CrcFailure(raw))
        return events


def decode_exact(data: bytes) -> WireCommand:
    """Decode exactly one well-formed frame or raise."""
    events = StreamDecoder().feed(data)
    if len(events) != 1:
        raise WireError(f"expected exactly one frame, decoded {len(events)}")
    event = events[0]
    if isinstance(event, CrcFailure):
        raise CrcError("checksum mismatch")
    return event


# ---------------------------------------------------------------------------
# SetFrame payloads: repeated (controller, register, value) byte triplets.

def frame_payload(writes) -> bytes:
    out = bytearray()
    for w in writes:
        out.extend((w.controller, w.register, w.value))
    if len(out) > MAX_PAYLOAD:
        raise MalformedPayload(
            f"{len(writes)} register writes exceed the {MAX_PAYLOAD}-byte payload cap")
    return bytes(out)


def parse_frame_payload(payload: bytes) -> List[Tuple[int, int, int]]:
    if len(payload) % 3 != 0:
        raise MalformedPayload("register-write payload not a multiple of 3 bytes")
    return [(payload[i], payload[i + 1], payload[i + 2])
            for i in range(0, len(payload), 3)]


def ack_for(request_opcode: int, echo: bytes = b"") -> bytes:
    return encode_command(Opcode.ACK, bytes([request_opcode]) + echo)


def nak(reason: int) -> bytes:
    return encode_command(Opcode.NAK, bytes([reason]))

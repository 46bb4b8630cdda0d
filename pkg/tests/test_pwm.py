import random

import pytest

from aslhand.motion import default_servo_map
from aslhand.pwm import (
    ChannelCalibration,
    ChannelMapError,
    DEFAULT_CONTROLLERS,
    Frame,
    RegWrite,
    UnsupportedFrequency,
    angle_to_pulse_us,
    channel_map_from_document,
    channel_map_to_document,
    channel_registers,
    controller_init_frame,
    default_channel_map,
    encode_pose,
    load_channel_map,
    prescale_for,
    pulse_to_ticks,
    save_channel_map,
)
from aslhand.topology import JOINTS, JointId, OutOfRange, default_topology

CAL = ChannelCalibration(500.0, 2500.0)


def decode_frame(frame, topology, channel_map):
    """Independent brute-force decoder: read the write list back into angles
    using only the documented register layout and the documented period
    convention (ticks measure the prescaler-achievable period)."""
    regs = {}  # (controller, register) -> value
    for w in frame.writes:
        regs[(w.controller, w.register)] = w.value
    prescale = min(max(round(25e6 / (4096 * channel_map.pwm_hz)) - 1, 3), 255)
    period_us = 1e6 / (25e6 / (4096 * (prescale + 1)))
    pose = {}
    for j in JOINTS:
        a = channel_map.entries[j]
        on_l, on_h, off_l, off_h = channel_registers(a.channel)
        on = regs[(a.controller, on_l)] | (regs[(a.controller, on_h)] << 8)
        off = regs[(a.controller, off_l)] | (regs[(a.controller, off_h)] << 8)
        ticks = (off - on) % 4096
        pulse = ticks / 4096 * period_us
        cal = channel_map.calibration[j]
        lo, hi = cal.pulse_at_min_us, cal.pulse_at_max_us
        if cal.inverted:
            lo, hi = hi, lo
        lim = topology.limits[j]
        frac = (pulse - lo) / (hi - lo)
        pose[j] = lim.min_deg + (lim.max_deg - lim.min_deg) * frac
    return pose


def tick_tolerance_deg(joint, topology, channel_map):
    """Angle error equivalent to one tick on this joint's channel."""
    lim = topology.limits[joint]
    cal = channel_map.calibration[joint]
    prescale = min(max(round(25e6 / (4096 * channel_map.pwm_hz)) - 1, 3), 255)
    period_us = 1e6 / (25e6 / (4096 * (prescale + 1)))
    tick_us = period_us / 4096
    degs_per_us = lim.amplitude / abs(cal.pulse_at_max_us - cal.pulse_at_min_us)
    return tick_us * degs_per_us


def grid_pose(topology, rng):
    return {j: rng.randint(0, int(topology.limits[j].max_deg * 10)) / 10
            for j in JOINTS}


def test_angle_to_pulse_endpoints_and_midpoint(topology):
    lim = topology.limits[JointId.parse("index.flex1")]
    assert angle_to_pulse_us(lim.min_deg, lim, CAL) == 500
    assert angle_to_pulse_us(lim.max_deg, lim, CAL) == 2500
    assert angle_to_pulse_us(lim.midpoint, lim, CAL) == 1500


def test_angle_to_pulse_inverted(topology):
    lim = topology.limits[JointId.parse("index.flex1")]
    inv = ChannelCalibration(500.0, 2500.0, inverted=True)
    assert angle_to_pulse_us(lim.min_deg, lim, inv) == 2500
    assert angle_to_pulse_us(lim.max_deg, lim, inv) == 500
    # oracle: inverted must equal the mirror of the plain map
    rng = random.Random(5)
    for _ in range(50):
        angle = rng.uniform(lim.min_deg, lim.max_deg)
        plain = angle_to_pulse_us(angle, lim, CAL)
        assert angle_to_pulse_us(angle, lim, inv) == pytest.approx(3000 - plain)


def test_angle_to_pulse_out_of_range(topology):
    lim = topology.limits[JointId.parse("middle.abd")]
    with pytest.raises(OutOfRange):
        angle_to_pulse_us(45.1, lim, CAL)


def test_pulse_to_ticks_examples():
    assert pulse_to_ticks(1500, 50) == 307   # 1500/20000*4096 = 307.2
    assert pulse_to_ticks(0, 50) == 0
    assert pulse_to_ticks(2500, 50) == 512
    with pytest.raises(OutOfRange):
        pulse_to_ticks(20000, 50)  # pulse equals the period
    with pytest.raises(OutOfRange):
        pulse_to_ticks(-1, 50)


def test_prescale_examples():
    assert prescale_for(50) == 121
    assert prescale_for(200) == 30
    assert prescale_for(24) == 253
    with pytest.raises(UnsupportedFrequency):
        prescale_for(23)
    with pytest.raises(UnsupportedFrequency):
        prescale_for(1527)


def test_prescale_matches_formula_everywhere():
    for hz in range(24, 1527):
        expected = round(25e6 / (4096 * hz)) - 1
        expected = min(max(expected, 3), 255)
        assert prescale_for(hz) == expected, hz


def test_default_channel_map_layout(channel_map):
    assert channel_map.controllers == DEFAULT_CONTROLLERS
    seen = set()
    for i, j in enumerate(JOINTS):
        a = channel_map.entries[j]
        assert a.controller == DEFAULT_CONTROLLERS[i // 16]
        assert a.channel == i % 16
        assert (a.controller, a.channel) not in seen
        seen.add((a.controller, a.channel))
    assert len(seen) == 24


def test_channel_map_rejects_collisions(channel_map, servo_map):
    entries = dict(channel_map.entries)
    j0, j1 = JOINTS[0], JOINTS[1]
    entries[j1] = entries[j0]
    from aslhand.pwm import ChannelMap
    with pytest.raises(ChannelMapError, match="share"):
        ChannelMap(entries, dict(channel_map.calibration), dict(servo_map))


def test_encode_pose_shape(topology, channel_map):
    frame = encode_pose(topology.neutral_pose(), topology, channel_map)
    assert len(frame.writes) == 24 * 4
    by_controller = {}
    for w in frame.writes:
        by_controller.setdefault(w.controller, []).append(w.register)
    assert set(by_controller) == set(DEFAULT_CONTROLLERS)
    assert len(by_controller[0x40]) == 16 * 4
    assert len(by_controller[0x41]) == 8 * 4
    # ascending controller and register order, ON registers zero
    controllers = [w.controller for w in frame.writes]
    assert controllers == sorted(controllers)
    for controller, registers in by_controller.items():
        assert registers == sorted(registers)
    for w in frame.writes:
        base_off = (w.register - 0x06) % 4
        if base_off in (0, 1):
            assert w.value == 0


def test_encode_pose_deterministic(topology, channel_map):
    rng = random.Random(9)
    pose = grid_pose(topology, rng)
    assert encode_pose(pose, topology, channel_map) == \
        encode_pose(pose, topology, channel_map)


def test_single_joint_change_touches_one_off_pair(topology, channel_map):
    joint = JointId.parse("ring.flex1")
    a = topology.neutral_pose()
    b = dict(a)
    b[joint] = a[joint] + 97.3  # large enough to move both OFF bytes
    fa = encode_pose(a, topology, channel_map)
    fb = encode_pose(b, topology, channel_map)
    diffs = [(wa, wb) for wa, wb in zip(fa.writes, fb.writes) if wa != wb]
    assert len(diffs) == 2
    assignment = channel_map.entries[joint]
    _, _, off_l, off_h = channel_registers(assignment.channel)
    assert {wa.register for wa, _ in diffs} == {off_l, off_h}
    assert all(wa.controller == assignment.controller for wa, _ in diffs)


def test_round_trip_within_one_tick(topology, channel_map):
    rng = random.Random(23)
    for _ in range(50):
        pose = grid_pose(topology, rng)
        frame = encode_pose(pose, topology, channel_map)
        decoded = decode_frame(frame, topology, channel_map)
        for j in JOINTS:
            tol = tick_tolerance_deg(j, topology, channel_map)
            assert abs(decoded[j] - pose[j]) <= tol * (1 + 1e-9), str(j)


def test_neutral_round_trip(topology, channel_map):
    frame = encode_pose(topology.neutral_pose(), topology, channel_map)
    decoded = decode_frame(frame, topology, channel_map)
    neutral = topology.neutral_pose()
    for j in JOINTS:
        tol = tick_tolerance_deg(j, topology, channel_map)
        assert abs(decoded[j] - neutral[j]) <= tol


def test_init_frame_sequence(channel_map):
    frame = controller_init_frame(channel_map)
    per = len(frame.writes) // 2
    for idx, controller in enumerate(channel_map.controllers):
        writes = frame.writes[idx * per:(idx + 1) * per]
        assert [w.register for w in writes] == [0x00, 0xFE, 0x00, 0x00]
        assert writes[0].value & 0x10          # sleep first
        assert writes[1].value == prescale_for(channel_map.pwm_hz)
        assert not writes[2].value & 0x10      # then wake
        assert writes[3].value & 0x80          # then restart


def test_neutral_frame_matches_golden_hex(topology, channel_map):
    import pathlib
    golden = pathlib.Path(__file__).parent / "golden" / "neutral_frame.hex"
    frame = encode_pose(topology.neutral_pose(), topology, channel_map)
    from aslhand.pwm import frame_to_hex
    assert frame_to_hex(frame) + "\n" == golden.read_text()


def test_frame_rejects_bad_registers():
    with pytest.raises(ChannelMapError):
        Frame((RegWrite(0x40, 0x50, 0),))  # between LED window and PRESCALE
    with pytest.raises(ChannelMapError):
        Frame((RegWrite(0x40, 0x06, 300),))  # not a byte


def test_channels_document_round_trip(channel_map, tmp_path):
    doc = channel_map_to_document(channel_map)
    again = channel_map_from_document(doc)
    assert again == channel_map
    path = tmp_path / "channels.json"
    save_channel_map(channel_map, str(path))
    assert load_channel_map(str(path)) == channel_map


def test_channels_document_rejects_unknown_fields(channel_map):
    doc = channel_map_to_document(channel_map)
    doc["channels"][0]["oops"] = 1
    with pytest.raises(ChannelMapError, match="unknown channel fields"):
        channel_map_from_document(doc)
    doc = channel_map_to_document(channel_map)
    doc["mystery"] = {}
    with pytest.raises(ChannelMapError, match="unknown channel-map fields"):
        channel_map_from_document(doc)


def test_channels_document_requires_all_joints(channel_map):
    doc = channel_map_to_document(channel_map)
    doc["channels"] = doc["channels"][:-1]
    with pytest.raises(ChannelMapError, match="unmapped joints"):
        channel_map_from_document(doc)

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aslhand.topology import (
    Axis,
    JOINTS,
    JointId,
    MissingJoint,
    Part,
    SYMMETRIC_AXES,
    Topology,
    TopologyError,
    UnknownJoint,
    clamp_pose,
    default_topology,
    mirror_pose,
    topology_from_document,
    topology_to_document,
    validate_pose,
)

AMPLITUDES = {
    "forearm.pronsup": 270,
    "wrist.radial": 145,
    "wrist.flexext": 190,
    "thumb.abd": 195,
    "thumb.pronsup": 180,
    "index.abd": 100,
    "pinky.abd": 100,
    "middle.abd": 45,
    "ring.abd": 45,
}


def grid_pose(topology, rng):
    """A random valid pose on the 0.1 degree grid."""
    pose = {}
    for j in JOINTS:
        lim = topology.limits[j]
        pose[j] = rng.randint(int(lim.min_deg * 10), int(lim.max_deg * 10)) / 10
    return pose


def test_joint_counts():
    topo = default_topology()
    assert len(topo.joints) == 24
    assert len(set(topo.joints)) == 24
    assert len(topo.in_hand_joints) == 23
    assert JointId(Part.FOREARM, Axis.PRON_SUP) not in topo.in_hand_joints


def test_dof_split_per_digit():
    by_part = {}
    for j in JOINTS:
        by_part.setdefault(j.part, []).append(j.axis)
    for finger in (Part.INDEX, Part.MIDDLE, Part.RING, Part.PINKY):
        assert sorted(a.value for a in by_part[finger]) == \
            sorted([Axis.FLEX1.value, Axis.FLEX2.value, Axis.FLEX3.value,
                    Axis.ABD_ADD.value])
    assert len(by_part[Part.THUMB]) == 5
    assert Axis.PRON_SUP in by_part[Part.THUMB]
    assert sorted(a.value for a in by_part[Part.WRIST]) == \
        sorted([Axis.RADIAL_ULNAR.value, Axis.FLEX_EXT.value])
    assert by_part[Part.FOREARM] == [Axis.PRON_SUP]


def test_amplitudes_match_published_table():
    topo = default_topology()
    for j in JOINTS:
        lim = topo.limits[j]
        if j.axis in (Axis.FLEX1, Axis.FLEX2, Axis.FLEX3):
            expected = 180
        else:
            expected = AMPLITUDES[str(j)]
        assert lim.amplitude == expected, str(j)
        assert lim.min_deg == 0
        assert lim.min_deg <= lim.neutral_deg <= lim.max_deg


def test_joint_id_parse_round_trip():
    for j in JOINTS:
        assert JointId.parse(str(j)) == j
    with pytest.raises(UnknownJoint):
        JointId.parse("index.pronsup")  # valid words, impossible combination
    with pytest.raises(UnknownJoint):
        JointId.parse("nonsense")


def test_validate_neutral_is_clean(topology):
    assert validate_pose(topology.neutral_pose(), topology) == []


def test_validate_flags_out_of_range(topology):
    pose = topology.neutral_pose()
    joint = JointId(Part.MIDDLE, Axis.ABD_ADD)
    pose[joint] = 46.0
    violations = validate_pose(pose, topology)
    assert len(violations) == 1
    v = violations[0]
    assert v.joint == joint and v.value == 46.0
    assert (v.min_deg, v.max_deg) == (0.0, 45.0)


def test_validate_bounds_inclusive(topology):
    pose = topology.neutral_pose()
    pose[JointId(Part.FOREARM, Axis.PRON_SUP)] = 270.0
    assert validate_pose(pose, topology) == []
    pose[JointId(Part.FOREARM, Axis.PRON_SUP)] = 270.1
    assert len(validate_pose(pose, topology)) == 1


def test_missing_joint_raises(topology):
    pose = topology.neutral_pose()
    del pose[JointId(Part.THUMB, Axis.FLEX1)]
    with pytest.raises(MissingJoint):
        validate_pose(pose, topology)
    with pytest.raises(MissingJoint):
        clamp_pose(pose, topology)
    with pytest.raises(MissingJoint):
        mirror_pose(pose, topology)


def test_clamp_examples(topology):
    pose = topology.neutral_pose()
    pose[JointId(Part.MIDDLE, Axis.ABD_ADD)] = 46.0
    pose[JointId(Part.THUMB, Axis.ABD_ADD)] = -10.0
    clamped = clamp_pose(pose, topology)
    assert clamped[JointId(Part.MIDDLE, Axis.ABD_ADD)] == 45.0
    assert clamped[JointId(Part.THUMB, Axis.ABD_ADD)] == 0.0


def test_clamp_identity_on_valid(topology):
    pose = topology.neutral_pose()
    assert clamp_pose(pose, topology) == pose


def test_clamp_idempotent_and_valid(topology):
    rng = random.Random(7)
    for _ in range(200):
        pose = {j: rng.uniform(-400, 400) for j in JOINTS}
        once = clamp_pose(pose, topology)
        assert validate_pose(once, topology) == []
        assert clamp_pose(once, topology) == once


def test_mirror_example_wrist(topology):
    pose = topology.neutral_pose()
    pose[JointId(Part.WRIST, Axis.RADIAL_ULNAR)] = 0.0
    assert mirror_pose(pose, topology)[JointId(Part.WRIST, Axis.RADIAL_ULNAR)] == 145.0


def test_mirror_fixed_point_at_midpoints(topology):
    pose = topology.neutral_pose()
    for j in JOINTS:
        if j.axis not in SYMMETRIC_AXES:
            pose[j] = topology.limits[j].midpoint
    assert mirror_pose(pose, topology) == pose


def test_mirror_involution_and_validity(topology):
    rng = random.Random(11)
    for _ in range(500):
        pose = grid_pose(topology, rng)
        mirrored = mirror_pose(pose, topology)
        assert validate_pose(mirrored, topology) == []
        for j in JOINTS:
            if j.axis in SYMMETRIC_AXES:
                assert mirrored[j] == pose[j]
        assert mirror_pose(mirrored, topology) == pose


@settings(max_examples=100)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_mirror_involution_property(seed):
    topo = default_topology()
    pose = grid_pose(topo, random.Random(seed))
    assert mirror_pose(mirror_pose(pose, topo), topo) == pose


def test_document_round_trip():
    topo = default_topology()
    doc = topology_to_document(topo)
    again = topology_from_document(doc)
    assert again == topo
    assert doc["format"] == "hand-topology/1"
    assert len(doc["joints"]) == 24


def test_document_rejects_unknown_fields():
    doc = topology_to_document(default_topology())
    doc["extra"] = 1
    with pytest.raises(TopologyError, match="unknown topology fields"):
        topology_from_document(doc)
    doc = topology_to_document(default_topology())
    doc["joints"][0]["surprise"] = True
    with pytest.raises(TopologyError, match="unknown joint fields"):
        topology_from_document(doc)


def test_document_rejects_bad_format_and_coverage():
    doc = topology_to_document(default_topology())
    doc["format"] = "hand-topology/999"
    with pytest.raises(TopologyError, match="format"):
        topology_from_document(doc)
    doc = topology_to_document(default_topology())
    doc["joints"] = doc["joints"][:-1]
    with pytest.raises(TopologyError, match="cover exactly"):
        topology_from_document(doc)
    doc = topology_to_document(default_topology())
    doc["joints"].append(dict(doc["joints"][0]))
    with pytest.raises(TopologyError, match="duplicate"):
        topology_from_document(doc)


def test_neutral_must_sit_inside_range():
    doc = topology_to_document(default_topology())
    doc["joints"][0]["neutral_deg"] = 999
    with pytest.raises(TopologyError, match="neutral"):
        topology_from_document(doc)

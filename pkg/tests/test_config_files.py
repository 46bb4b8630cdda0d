"""The checked-in config documents must stay in lockstep with the stock
in-code defaults (regenerate with `aslhand export ... -o config/...`)."""

import pathlib

from aslhand.atlas import load_atlas
from aslhand.defaults import reference_atlas
from aslhand.motion import default_servo_map
from aslhand.pwm import default_channel_map, load_channel_map
from aslhand.topology import default_topology, load_topology

CONFIG = pathlib.Path(__file__).resolve().parent.parent / "config"


def test_topology_file_matches_defaults():
    assert load_topology(str(CONFIG / "topology.json")) == default_topology()


def test_channels_file_matches_defaults():
    assert load_channel_map(str(CONFIG / "channels.json")) == \
        default_channel_map(default_servo_map())


def test_atlas_file_matches_defaults():
    topo = default_topology()
    assert load_atlas(str(CONFIG / "atlas.json"), topo) == reference_atlas(topo)

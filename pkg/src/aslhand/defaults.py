"""Stock wiring: default topology, reference atlas, servo and channel maps."""

from __future__ import annotations

from typing import Dict, Optional

from .alphabet import reference_document
from .atlas import SignAtlas, derive_left
from .motion import ServoSpec, default_servo_map
from .pwm import ChannelMap, default_channel_map
from .topology import JointId, Topology, default_topology


def reference_atlas(topology: Optional[Topology] = None) -> SignAtlas:
    """The bundled 52-sign atlas (right-hand authored, left derived)."""
    topo = topology or default_topology()
    return derive_left(reference_document(topo.name), topo)


class Rig:
    """A fully-wired hand configuration, from files or stock defaults."""

    def __init__(self, topology: Optional[Topology] = None,
                 atlas: Optional[SignAtlas] = None,
                 channel_map: Optional[ChannelMap] = None,
                 servo_map: Optional[Dict[JointId, ServoSpec]] = None):
        self.topology = topology or default_topology()
        self.servo_map = servo_map or default_servo_map()
        self.atlas = atlas or reference_atlas(self.topology)
        self.channel_map = channel_map or default_channel_map(self.servo_map)

    @classmethod
    def from_files(cls, topology_path: Optional[str] = None,
                   atlas_path: Optional[str] = None,
                   channels_path: Optional[str] = None) -> "Rig":
        from .atlas import load_atlas
        from .pwm import load_channel_map
        from .topology import load_topology

        topology = load_topology(topology_path) if topology_path else default_topology()
        channel_map = load_channel_map(channels_path) if channels_path else None
        servo_map = dict(channel_map.servos) if channel_map else None
        atlas = load_atlas(atlas_path, topology) if atlas_path else None
        return cls(topology, atlas, channel_map, servo_map)

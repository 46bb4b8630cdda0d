"""The 52-sign library: 26 letters in right- and left-hand configurations.

Signs are keyframed poses.  Static letters hold a single keyframe; J and Z
are dynamic and traverse several.  Left-hand signs are derived by mirroring
the right-hand ones unless the source document carries an explicit left
override.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from .topology import (
    Handedness,
    Pose,
    Topology,
    mirror_pose,
    pose_from_names,
    pose_to_names,
    validate_pose,
)

ATLAS_FORMAT = "sign-atlas/1"
LETTERS = tuple(string.ascii_uppercase)
DYNAMIC_LETTERS = frozenset({"J", "Z"})


class AtlasError(Exception):
    """Bad atlas data."""


class SchemaError(AtlasError):
    pass


class CoverageError(AtlasError):
    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__("atlas missing signs: " +
                         ", ".join(f"({l}, {h.value})" for l, h in self.missing))


class RomError(AtlasError):
    def __init__(self, letter, handedness, frame_index, violations):
        self.letter = letter
        self.handedness = handedness
        self.frame_index = frame_index
        self.violations = violations
        super().__init__(
            f"({letter}, {handedness.value}) keyframe {frame_index}: " +
            "; ".join(map(str, violations)))


class DynamicsError(AtlasError):
    pass


@dataclass(frozen=True)
class Keyframe:
    pose: Pose
    hold_ms: int = 0  # 0 means: hold for the caller's letter cadence

    def __post_init__(self):
        if self.hold_ms < 0:
            raise SchemaError(f"negative hold_ms: {self.hold_ms}")


@dataclass(frozen=True)
class SignSpec:
    letter: str
    handedness: Handedness
    dynamic: bool
    keyframes: Tuple[Keyframe, ...]


@dataclass(frozen=True)
class SignAtlas:
    version: str
    topology: str
    provenance: str
    signs: Mapping[Tuple[str, Handedness], SignSpec]

    def lookup(self, letter: str, handedness: Handedness) -> SignSpec:
        """Total on a validated atlas; raises KeyError otherwise."""
        return self.signs[(letter.upper(), handedness)]

    def __len__(self) -> int:
        return len(self.signs)


def _check_sign(spec: SignSpec, topology: Topology) -> None:
    if spec.letter not in LETTERS:
        raise SchemaError(f"not a letter: {spec.letter!r}")
    if not spec.keyframes:
        raise DynamicsError(f"({spec.letter}, {spec.handedness.value}) has no keyframes")
    should_be_dynamic = spec.letter in DYNAMIC_LETTERS
    if spec.dynamic != should_be_dynamic:
        raise DynamicsError(
            f"({spec.letter}, {spec.handedness.value}) dynamic={spec.dynamic}, "
            f"but {'only ' if not should_be_dynamic else ''}J and Z are dynamic")
    if should_be_dynamic and len(spec.keyframes) < 2:
        raise DynamicsError(
            f"({spec.letter}, {spec.handedness.value}) is dynamic and needs "
            f">= 2 keyframes, has {len(spec.keyframes)}")
    if not should_be_dynamic and len(spec.keyframes) != 1:
        raise DynamicsError(
            f"({spec.letter}, {spec.handedness.value}) is static and needs "
            f"exactly 1 keyframe, has {len(spec.keyframes)}")
    for i, kf in enumerate(spec.keyframes):
        violations = validate_pose(kf.pose, topology)
        if violations:
            raise RomError(spec.letter, spec.handedness, i, violations)


def _check_coverage(signs: Mapping[Tuple[str, Handedness], SignSpec]) -> None:
    missing = [(l, h) for l in LETTERS for h in (Handedness.RIGHT, Handedness.LEFT)
               if (l, h) not in signs]
    if missing:
        raise CoverageError(missing)


def validate_atlas(atlas: SignAtlas, topology: Topology) -> None:
    if atlas.topology != topology.name:
        raise SchemaError(
            f"atlas targets topology {atlas.topology!r}, got {topology.name!r}")
    _check_coverage(atlas.signs)
    for spec in atlas.signs.values():
        _check_sign(spec, topology)


# ---------------------------------------------------------------------------
# documents

_TOP_FIELDS = {"format", "version", "topology", "provenance", "signs"}
_SIGN_FIELDS = {"letter", "handedness", "dynamic", "keyframes"}
_KEYFRAME_FIELDS = {"angles", "hold_ms"}


def _parse_sign(entry: dict) -> SignSpec:
    if not isinstance(entry, dict):
        raise SchemaError("sign entries must be objects")
    unknown = set(entry) - _SIGN_FIELDS
    if unknown:
        raise SchemaError(f"unknown sign fields: {sorted(unknown)}")
    try:
        letter = str(entry["letter"]).upper()
        handedness = Handedness(entry["handedness"])
        dynamic = bool(entry["dynamic"])
        raw_frames = entry["keyframes"]
    except KeyError as e:
        raise SchemaError(f"sign entry missing {e.args[0]!r}") from None
    except ValueError as e:
        raise SchemaError(str(e)) from None
    if not isinstance(raw_frames, list):
        raise SchemaError("keyframes must be a list")
    frames: List[Keyframe] = []
    for raw in raw_frames:
        if not isinstance(raw, dict):
            raise SchemaError("keyframes must be objects")
        unknown = set(raw) - _KEYFRAME_FIELDS
        if unknown:
            raise SchemaError(f"unknown keyframe fields: {sorted(unknown)}")
        try:
            pose = pose_from_names(raw["angles"])
        except KeyError:
            raise SchemaError("keyframe missing 'angles'") from None
        frames.append(Keyframe(pose, int(raw.get("hold_ms", 0))))
    return SignSpec(letter, handedness, dynamic, tuple(frames))


def atlas_from_document(doc: dict, topology: Topology) -> SignAtlas:
    """Parse and fully validate an atlas document (all 52 signs present)."""
    signs = _parse_document(doc)
    atlas = SignAtlas(
        version=str(doc["version"]),
        topology=str(doc["topology"]),
        provenance=str(doc.get("provenance", "")),
        signs=signs,
    )
    validate_atlas(atlas, topology)
    return atlas


def _parse_document(doc: dict) -> Dict[Tuple[str, Handedness], SignSpec]:
    if not isinstance(doc, dict):
        raise SchemaError("atlas document must be a JSON object")
    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        raise SchemaError(f"unknown atlas fields: {sorted(unknown)}")
    if doc.get("format") != ATLAS_FORMAT:
        raise SchemaError(f"unsupported atlas format: {doc.get('format')!r}")
    for field in ("version", "topology"):
        if not doc.get(field):
            raise SchemaError(f"atlas needs a non-empty {field!r}")
    if not isinstance(doc.get("signs"), list):
        raise SchemaError("atlas 'signs' must be a list")
    signs: Dict[Tuple[str, Handedness], SignSpec] = {}
    for entry in doc["signs"]:
        spec = _parse_sign(entry)
        key = (spec.letter, spec.handedness)
        if key in signs:
            raise SchemaError(f"duplicate sign ({spec.letter}, {spec.handedness.value})")
        signs[key] = spec
    return signs


def derive_left(doc: dict, topology: Topology) -> SignAtlas:
    """Build the full 52-sign atlas from a right-hand-only document.

    The document must cover all 26 right-hand signs.  Left-hand signs are the
    mirror of the right-hand ones (same hold times); explicit left entries in
    the document win over derivation.
    """
    signs = _parse_document(doc)
    missing = [(l, Handedness.RIGHT) for l in LETTERS
               if (l, Handedness.RIGHT) not in signs]
    if missing:
        raise CoverageError(missing)
    full: Dict[Tuple[str, Handedness], SignSpec] = {}
    for letter in LETTERS:
        right = signs[(letter, Handedness.RIGHT)]
        full[(letter, Handedness.RIGHT)] = right
        override = signs.get((letter, Handedness.LEFT))
        if override is not None:
            full[(letter, Handedness.LEFT)] = override
        else:
            mirrored = tuple(
                Keyframe(mirror_pose(kf.pose, topology), kf.hold_ms)
                for kf in right.keyframes)
            full[(letter, Handedness.LEFT)] = SignSpec(
                letter, Handedness.LEFT, right.dynamic, mirrored)
    atlas = SignAtlas(
        version=str(doc["version"]),
        topology=str(doc["topology"]),
        provenance=str(doc.get("provenance", "")),
        signs=full,
    )
    validate_atlas(atlas, topology)
    return atlas


def atlas_to_document(atlas: SignAtlas) -> dict:
    """Canonical serialization: letters sorted, right before left, keys sorted."""
    entries = []
    for letter in LETTERS:
        for handedness in (Handedness.RIGHT, Handedness.LEFT):
            spec = atlas.signs[(letter, handedness)]
            entries.append({
                "letter": spec.letter,
                "handedness": spec.handedness.value,
                "dynamic": spec.dynamic,
                "keyframes": [
                    {"angles": pose_to_names(kf.pose), "hold_ms": kf.hold_ms}
                    for kf in spec.keyframes
                ],
            })
    return {
        "format": ATLAS_FORMAT,
        "version": atlas.version,
        "topology": atlas.topology,
        "provenance": atlas.provenance,
        "signs": entries,
    }


def load_atlas(path: str, topology: Topology) -> SignAtlas:
    """Strict file load: the document must already cover all 52 signs.

    Right-hand-only sources go through derive_left instead.
    """
    with open(path, "r", encoding="utf-8") as f:
        return atlas_from_document(json.load(f), topology)


def save_atlas(atlas: SignAtlas, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(atlas_to_document(atlas), f, indent=2, sort_keys=True)
        f.write("\n")

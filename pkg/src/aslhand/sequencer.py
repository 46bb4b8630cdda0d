"""Execution flows: the two-handed alphabet demo and randomized trial orders.

Trial orders are reproducible: a 64-bit SplitMix64 generator seeds a
Fisher-Yates shuffle of the 52 (letter, handedness) pairs, so a recorded
seed replays the exact presentation order of a validation session.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from .atlas import LETTERS, SignAtlas
from .executor import RunOutcome, ScheduleRunner, SignEvent
from .motion import Schedule, ServoMap, Timing, compile_letters, concat
from .topology import Handedness, Topology

MASK64 = (1 << 64) - 1


class SplitMix64:
    """Deterministic 64-bit generator (SplitMix64)."""

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + self.GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next_u64() % n


@dataclass(frozen=True)
class DemoPlan:
    """Neutral -> right-hand A..Z -> neutral -> left-hand A..Z -> neutral."""
    phases: Tuple[Tuple[Handedness, Tuple[str, ...]], ...]


def build_demo_plan() -> DemoPlan:
    return DemoPlan((
        (Handedness.RIGHT, LETTERS),
        (Handedness.LEFT, LETTERS),
    ))


@dataclass(frozen=True)
class TrialOrder:
    seed: int
    items: Tuple[Tuple[str, Handedness], ...]


def all_pairs() -> Tuple[Tuple[str, Handedness], ...]:
    """Canonical pre-shuffle order: right-hand A..Z, then left-hand A..Z."""
    return tuple((l, h) for h in (Handedness.RIGHT, Handedness.LEFT)
                 for l in LETTERS)


def shuffle_trials(seed: int) -> TrialOrder:
    """Fisher-Yates permutation of the 52 pairs, driven by SplitMix64."""
    rng = SplitMix64(seed)
    items = list(all_pairs())
    for i in range(len(items) - 1, 0, -1):
        j = rng.below(i + 1)
        items[i], items[j] = items[j], items[i]
    return TrialOrder(seed, tuple(items))


def compile_demo(atlas: SignAtlas, servo_map: ServoMap, topology: Topology,
                 timing: Timing = Timing()) -> Schedule:
    """The full demo as one contiguous schedule (52 signs, neutral between
    phases); sign ordinals run 0..25 right then 26..51 left."""
    plan = build_demo_plan()
    parts = []
    base = 0
    for handedness, letters in plan.phases:
        parts.append(compile_letters(letters, handedness, atlas, servo_map,
                                     topology, timing, first_sign_index=base))
        base += len(letters)
    return concat(parts)


@dataclass
class RunReport:
    events: List[SignEvent] = field(default_factory=list)
    completed: bool = True
    final_pose: Optional[dict] = None

    @property
    def completed_signs(self) -> int:
        return sum(1 for e in self.events if e.kind == "end")


class PlanRunner:
    """Compiles and executes plans or trial orders on one backend."""

    def __init__(self, runner: ScheduleRunner, atlas: SignAtlas,
                 servo_map: ServoMap, topology: Topology,
                 timing: Timing = Timing()):
        self.runner = runner
        self.atlas = atlas
        self.servo_map = servo_map
        self.topology = topology
        self.timing = timing
        self._stop_requested = False

    def request_stop(self) -> None:
        self._stop_requested = True

    def _should_stop(self) -> bool:
        return self._stop_requested

    def run_demo(self, on_sign: Optional[Callable[[SignEvent], None]] = None,
                 on_tick=None) -> RunReport:
        plan = build_demo_plan()
        report = RunReport()
        base = 0
        for handedness, letters in plan.phases:
            if self._stop_requested:
                break
            schedule = compile_letters(letters, handedness, self.atlas,
                                       self.servo_map, self.topology,
                                       self.timing, first_sign_index=base)
            outcome = self.runner.run(schedule, handedness, on_sign=on_sign,
                                      on_tick=on_tick,
                                      should_stop=self._should_stop)
            report.events.extend(outcome.events)
            report.final_pose = outcome.final_pose
            if not outcome.completed:
                report.completed = False
                return report
            base += len(letters)
        report.completed = not self._stop_requested
        return report

    def run_trials(self, order: TrialOrder,
                   on_sign: Optional[Callable[[SignEvent], None]] = None,
                   on_tick=None,
                   between: Optional[Callable[[int, str, Handedness], None]] = None,
                   ) -> RunReport:
        """Sign each trial in order, returning to neutral between trials.
        `between` runs after each completed trial (e.g. to collect a guess)."""
        report = RunReport()
        for position, (letter, handedness) in enumerate(order.items):
            if self._stop_requested:
                report.completed = False
                break
            schedule = compile_letters([letter], handedness, self.atlas,
                                       self.servo_map, self.topology,
                                       self.timing, first_sign_index=position)
            outcome = self.runner.run(schedule, handedness, on_sign=on_sign,
                                      on_tick=on_tick,
                                      should_stop=self._should_stop)
            report.events.extend(outcome.events)
            report.final_pose = outcome.final_pose
            if not outcome.completed:
                report.completed = False
                break
            if between:
                between(position, letter, handedness)
        return report

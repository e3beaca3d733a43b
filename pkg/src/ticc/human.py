"""Simulated shopping partners for closed-loop experiments.

The partner knows her own shopping list and her own true per-item
skill, and maintains an evolving count model of the robot's skill from
the outcomes she observes (demonstrated failures included; that is the
channel the robot can teach through). Policies are deterministic so
that seeded episodes replay exactly.

Policies:

* ``rational``: myopic division of labor with announcements. At the
  start of each round she flags, one signal apiece and neediest first,
  every missing item she has no realistic chance of getting herself
  but the robot seems capable of, and repeats the pass once late in
  the round for anything still missing; between passes she picks the
  needed item she is best at, breaking ties toward items the robot
  looks worst at. When only hopeless items remain she keeps signaling,
  cycling through them.
* ``greedy``: pick the needed item with the highest own skill,
  ignoring the robot entirely. Never signals.
* ``scripted``: replay a fixed action sequence indexed by step,
  padding with no-ops.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .capability import CapabilityCounts, perfect_prior, update_counts
from .domain import NOOP_ACTION, Action, Outcome, WorldState

RATIONAL = "rational"
GREEDY = "greedy"
SCRIPTED = "scripted"

POLICIES = (RATIONAL, GREEDY, SCRIPTED)


@dataclass
class HumanAgent:
    """Stateful simulated partner; one instance persists across rounds."""

    policy: str
    true_capability: tuple[float, ...]
    shopping_list: tuple[int, ...]
    robot_counts: CapabilityCounts | None = None
    signal_threshold: float = 0.1
    reminder_step: int = 5
    script: tuple[Action, ...] = ()
    _announced: set = field(default_factory=set)

    def __post_init__(self) -> None:
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if len(self.true_capability) != len(self.shopping_list):
            raise ValueError("capability and list cover different item sets")
        if self.robot_counts is None:
            self.robot_counts = perfect_prior(len(self.true_capability))

    @property
    def num_items(self) -> int:
        return len(self.true_capability)

    def set_shopping_list(self, shopping_list: tuple[int, ...]) -> None:
        """Swap in a new round's list; the robot model carries over."""
        if len(shopping_list) != self.num_items:
            raise ValueError("list covers a different item set")
        self.shopping_list = shopping_list
        self._announced.clear()

    def observe_robot(self, action: Action, outcome: Outcome) -> None:
        """Fold the robot's revealed outcome into her model of it."""
        self.robot_counts = update_counts(self.robot_counts, action, outcome)

    def act(
        self,
        world: WorldState,
        robot_last: tuple[Action, Outcome] | None = None,
    ) -> Action:
        """Choose this step's action. Deterministic given agent state."""
        if self.policy == SCRIPTED:
            if world.step < len(self.script):
                return self.script[world.step]
            return NOOP_ACTION

        bag = list(world.bag)
        if robot_last is not None and robot_last[1].success:
            bag[robot_last[1].item] += 1  # the robot moved first this step
        needed = [i for i in range(self.num_items) if self.shopping_list[i] > bag[i]]
        if not needed:
            return NOOP_ACTION

        own = self.true_capability
        if self.policy == GREEDY:
            return Action("pick", max(needed, key=lambda i: (own[i], -i)))

        robot = self.robot_counts.expected_success_probs()

        def neediest(items):
            return max(items, key=lambda i: (self.shopping_list[i] - bag[i], -i))

        shaky = [i for i in needed if own[i] <= self.signal_threshold and robot[i] > own[i]]
        phase = 1 if world.step >= self.reminder_step else 0
        unannounced = [i for i in shaky if (i, phase) not in self._announced]
        if unannounced:
            # flag each item she is unlikely to get herself before
            # settling into her own share of the work, with a second
            # pass late in the round for anything still missing
            j = neediest(unannounced)
            self._announced.add((j, phase))
            return Action("signal", j)

        feasible = [i for i in needed if own[i] >= self.signal_threshold]
        if feasible:
            choice = max(feasible, key=lambda i: (own[i], -robot[i], -i))
            return Action("pick", choice)
        hopeless = [i for i in shaky if own[i] < self.signal_threshold]
        if hopeless:
            # nothing she can move herself; keep waving at the partner,
            # cycling through the stragglers
            return Action("signal", hopeless[world.step % len(hopeless)])
        return Action("pick", neediest(needed))

"""World model for the turn-based collaborative shopping task.

Two agents (a robot and a human) alternate within a time-step to collect
grocery items into a shared bag. Each agent action either targets an item
type (pick / signal) or does nothing. Action outcomes are explicit: a pick
may succeed or fail depending on the acting agent's per-item capability,
a signal is a deliberate, world-neutral failure, and a no-op has no
outcome. The episode ends after a fixed number of steps and is scored by
how well the bag matches a hidden shopping list.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

PICK = "pick"
NOOP = "noop"
SIGNAL = "signal"

#: How much one surplus item subtracts from the matched-item score.
EXCESS_PENALTY = 0.5


@dataclass(frozen=True, slots=True)
class Action:
    """One agent move: pick an item, signal inability for an item, or no-op."""

    kind: str
    item: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (PICK, NOOP, SIGNAL):
            raise ValueError(f"unknown action kind: {self.kind!r}")
        if self.kind == NOOP:
            if self.item is not None:
                raise ValueError("no-op carries no item")
        elif self.item is None or self.item < 0:
            raise ValueError(f"{self.kind} requires a non-negative item index")


@dataclass(frozen=True, slots=True)
class Outcome:
    """Resolved effect of one action: which item, and whether it landed.

    ``item is None and success is None`` encodes the no-op outcome.
    Signals always resolve to a failure on the signalled item.
    """

    item: int | None
    success: bool | None

    def __post_init__(self) -> None:
        if (self.item is None) != (self.success is None):
            raise ValueError("item and success must both be set or both be None")


NOOP_ACTION = Action(NOOP)
NOOP_OUTCOME = Outcome(None, None)


@dataclass(frozen=True, slots=True)
class Observation:
    """Everything the robot observes in one step after committing its action."""

    robot_outcome: Outcome
    human_action: Action
    human_outcome: Outcome


@dataclass(frozen=True, slots=True)
class WorldState:
    """Observable world: bag contents per item type plus the step counter."""

    bag: tuple[int, ...]
    step: int = 0

    @property
    def num_items(self) -> int:
        return len(self.bag)


def initial_state(num_items: int) -> WorldState:
    return WorldState(bag=(0,) * num_items, step=0)


def action_space(num_items: int) -> tuple[Action, ...]:
    """Ordered action set shared by both agents: picks, no-op, signals.

    The ordering (Pick 0..n-1, NoOp, Signal 0..n-1) is part of the
    contract; planners and serializers index into it.
    """
    picks = tuple(Action(PICK, i) for i in range(num_items))
    signals = tuple(Action(SIGNAL, i) for i in range(num_items))
    return picks + (NOOP_ACTION,) + signals


def legal_actions(state: WorldState, horizon: int) -> tuple[Action, ...]:
    """All actions available in ``state``; raises on terminal states."""
    if state.step >= horizon:
        raise ValueError(f"no legal actions at terminal step {state.step}")
    return action_space(state.num_items)


def action_index(action: Action, num_items: int) -> int:
    """Position of ``action`` inside :func:`action_space`."""
    if action.kind == PICK:
        return action.item
    if action.kind == NOOP:
        return num_items
    return num_items + 1 + action.item


def action_from_index(index: int, num_items: int) -> Action:
    if not 0 <= index <= 2 * num_items:
        raise ValueError(f"action index {index} out of range for {num_items} items")
    if index < num_items:
        return Action(PICK, index)
    if index == num_items:
        return NOOP_ACTION
    return Action(SIGNAL, index - num_items - 1)


def world_transition(
    state: WorldState, robot_outcome: Outcome, human_outcome: Outcome
) -> WorldState:
    """Apply both agents' resolved outcomes and advance the clock.

    Only successful picks change the bag; failures, signals and no-ops
    are world-neutral. Both agents may land the same item type in one
    step, in which case the bag gains two.
    """
    bag = list(state.bag)
    for outcome in (robot_outcome, human_outcome):
        if outcome.success:
            bag[outcome.item] += 1
    return WorldState(bag=tuple(bag), step=state.step + 1)


def task_reward(bag: tuple[int, ...], required: tuple[int, ...]) -> float:
    """Normalized match between the bag and a shopping list.

    Matched items count fully, each surplus item costs
    ``EXCESS_PENALTY``, and the total is normalized by the list size so
    a perfect bag scores 1. Over-collection can push the score negative.
    """
    if len(bag) != len(required):
        raise ValueError("bag and list describe different item sets")
    total = sum(required)
    if total <= 0:
        raise ValueError("shopping list must request at least one item")
    matched = sum(min(b, r) for b, r in zip(bag, required))
    excess = sum(max(b - r, 0) for b, r in zip(bag, required))
    return (matched - EXCESS_PENALTY * excess) / total


def sample_outcome(
    action: Action, success_probs: tuple[float, ...], rng: random.Random
) -> Outcome:
    """Resolve an action against per-item success probabilities.

    Picks draw a Bernoulli with the item's probability (one rng draw,
    even for probabilities of exactly 0 or 1, so seeded streams stay
    aligned across configurations). Signals always fail; no-ops resolve
    to the empty outcome. No draw is consumed for signals or no-ops.
    """
    if action.kind == NOOP:
        return NOOP_OUTCOME
    if action.kind == SIGNAL:
        return Outcome(action.item, False)
    return Outcome(action.item, rng.random() < success_probs[action.item])

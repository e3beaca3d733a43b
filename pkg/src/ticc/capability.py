"""Per-item capability models tracked as success/failure counts.

Each agent's skill at picking each item type is modeled by a pair of
outcome counts, the Beta/Dirichlet sufficient statistic: the expected
success probability is the normalized success count, and observing one
more outcome adds one to the matching cell. A count pair of (1, 0) is
the optimistic prior that encodes "assumed perfectly capable".

The module also provides the overlap measure used both as the belief
accuracy metric and as the per-step calibration reward: for each item,
the overlap between two success distributions is the shared probability
mass min(p, q) + min(1-p, 1-q), which equals one minus their total
variation distance. A vector-valued capability is scored by the mean
overlap across items.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .domain import NOOP, Action, Outcome
from .domain import sample_outcome as _sample_with_probs

#: prior pseudo-counts encoding assumed-perfect capability
PERFECT_PRIOR = (1.0, 0.0)


@dataclass(frozen=True, slots=True)
class CapabilityCounts:
    """Immutable per-item (successes, failures) pseudo-count pairs."""

    counts: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        for s, f in self.counts:
            if s < 0 or f < 0 or s + f <= 0:
                raise ValueError(f"invalid count pair ({s}, {f})")

    @property
    def num_items(self) -> int:
        return len(self.counts)

    def expected_success(self, item: int) -> float:
        s, f = self.counts[item]
        return s / (s + f)

    def expected_success_probs(self) -> tuple[float, ...]:
        return tuple(s / (s + f) for s, f in self.counts)


def perfect_prior(num_items: int) -> CapabilityCounts:
    return CapabilityCounts(tuple(PERFECT_PRIOR for _ in range(num_items)))


def update_counts(
    counts: CapabilityCounts, action: Action, outcome: Outcome
) -> CapabilityCounts:
    """Add one observed outcome to the matching count cell.

    Picks and signals both count: a signalled failure is information
    about capability exactly like an attempted pick that failed. No-ops
    carry no outcome and leave the counts untouched.
    """
    if action.kind == NOOP:
        if outcome.item is not None:
            raise ValueError("no-op cannot carry an item outcome")
        return counts
    if outcome.item != action.item:
        raise ValueError(
            f"outcome item {outcome.item} does not match action item {action.item}"
        )
    s, f = counts.counts[action.item]
    updated = (s + 1.0, f) if outcome.success else (s, f + 1.0)
    new = list(counts.counts)
    new[action.item] = updated
    return CapabilityCounts(tuple(new))


def sample_outcome(
    counts: CapabilityCounts, action: Action, rng: random.Random
) -> Outcome:
    """Resolve an action using the counts' expected success probabilities."""
    return _sample_with_probs(action, counts.expected_success_probs(), rng)


def overlap(p: float, q: float) -> float:
    """Shared mass of two Bernoulli success distributions; 1 - |p - q|."""
    return min(p, q) + min(1.0 - p, 1.0 - q)


def capability_accuracy(
    counts: CapabilityCounts, truth: tuple[float, ...]
) -> float:
    """Mean per-item overlap between believed and true success rates."""
    if counts.num_items != len(truth):
        raise ValueError("capability vectors describe different item sets")
    probs = counts.expected_success_probs()
    return sum(overlap(p, t) for p, t in zip(probs, truth)) / len(truth)


def calibration_reward(
    counts: CapabilityCounts, truth: tuple[float, ...], weight: float
) -> float:
    """Per-step bonus for the partner holding an accurate capability model."""
    return weight * capability_accuracy(counts, truth)

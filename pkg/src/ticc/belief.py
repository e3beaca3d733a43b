"""Particle belief over the augmented planning state.

The planner's uncertainty has four components: the observable world,
the hidden index of the shopping list the human is working from (the
intent), and two capability-count models (the robot's model of the
human and the human's model of the robot). After every real step the
world and both count models are deterministic functions of the observed
actions and outcomes, so all particles share them; only the intent
varies across particles. The intent is filtered by rejection: each
particle survives with probability proportional to how likely its
intent makes the human action that was just observed, and the bag is
then refilled by resampling the survivors.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

from .capability import CapabilityCounts, perfect_prior, update_counts
from .domain import Action, Observation, WorldState, initial_state, world_transition


class DegenerateUpdateWarning(UserWarning):
    """Raised when an observation rejects every particle."""


@dataclass(frozen=True, slots=True)
class AugmentedState:
    """One belief particle: world, hidden intent, and both count models."""

    world: WorldState
    intent: int
    human_counts: CapabilityCounts
    robot_counts: CapabilityCounts


@dataclass(slots=True)
class Belief:
    """Uniformly weighted particle bag over :class:`AugmentedState`."""

    particles: list[AugmentedState]
    num_intents: int

    def __post_init__(self) -> None:
        if not self.particles:
            raise ValueError("belief requires at least one particle")
        first = self.particles[0]
        for p in self.particles:
            if (
                p.world != first.world
                or p.human_counts != first.human_counts
                or p.robot_counts != first.robot_counts
            ):
                raise ValueError("particles may differ only in intent")
            if not 0 <= p.intent < self.num_intents:
                raise ValueError(f"intent {p.intent} out of range")

    # components shared by construction across all particles
    @property
    def world(self) -> WorldState:
        return self.particles[0].world

    @property
    def human_counts(self) -> CapabilityCounts:
        return self.particles[0].human_counts

    @property
    def robot_counts(self) -> CapabilityCounts:
        return self.particles[0].robot_counts

    def intent_marginal(self) -> tuple[float, ...]:
        counts = [0] * self.num_intents
        for p in self.particles:
            counts[p.intent] += 1
        n = len(self.particles)
        return tuple(c / n for c in counts)

    def intent_likelihood(self, true_intent: int) -> float:
        """Posterior mass currently on the given intent."""
        return self.intent_marginal()[true_intent]


def init_belief(
    num_items: int,
    num_intents: int,
    num_particles: int,
    human_counts: CapabilityCounts | None = None,
    robot_counts: CapabilityCounts | None = None,
    world: WorldState | None = None,
) -> Belief:
    """Fresh belief: uniform stratified intents, shared counts and world.

    Intents are assigned round-robin so that when the particle count is
    a multiple of the intent count every intent holds exactly the same
    number of particles.
    """
    if num_particles < num_intents:
        raise ValueError("need at least one particle per intent")
    world = world if world is not None else initial_state(num_items)
    human_counts = human_counts if human_counts is not None else perfect_prior(num_items)
    robot_counts = robot_counts if robot_counts is not None else perfect_prior(num_items)
    particles = [
        AugmentedState(world, i % num_intents, human_counts, robot_counts)
        for i in range(num_particles)
    ]
    return Belief(particles=particles, num_intents=num_intents)


def belief_update(
    belief: Belief,
    robot_action: Action,
    observation: Observation,
    intent_weights: Sequence[float],
    rng: random.Random,
    track_capabilities: bool = True,
) -> Belief:
    """Condition the belief on one observed step.

    The world and both count models advance deterministically (count
    tracking can be disabled for planners that do not model capability).
    Intents are filtered by rejection against ``intent_weights``, the
    model probability of the observed human action under each intent,
    and the particle bag is topped back up to size by resampling the
    survivors. A weight vector that rejects nothing (all weights equal)
    therefore leaves the intent multiset exactly as it was. If every
    particle is rejected the intents are redrawn uniformly and a
    :class:`DegenerateUpdateWarning` is emitted; the deterministic
    components still advance.
    """
    if len(intent_weights) != belief.num_intents:
        raise ValueError("need one weight per candidate intent")
    if any(w < 0 for w in intent_weights):
        raise ValueError("intent weights must be non-negative")

    new_world = world_transition(
        belief.world, observation.robot_outcome, observation.human_outcome
    )
    human_counts = belief.human_counts
    robot_counts = belief.robot_counts
    if track_capabilities:
        human_counts = update_counts(
            human_counts, observation.human_action, observation.human_outcome
        )
        robot_counts = update_counts(
            robot_counts, robot_action, observation.robot_outcome
        )

    n = len(belief.particles)
    peak = max(intent_weights)
    survivors: list[int] = []
    if peak > 0.0:
        for p in belief.particles:
            if rng.random() < intent_weights[p.intent] / peak:
                survivors.append(p.intent)
    if len(survivors) == n:
        intents = survivors
    elif survivors:
        intents = survivors + rng.choices(survivors, k=n - len(survivors))
    else:
        warnings.warn(
            "observation rejected every particle; redrawing intents uniformly",
            DegenerateUpdateWarning,
            stacklevel=2,
        )
        intents = [rng.randrange(belief.num_intents) for _ in range(n)]

    particles = [
        AugmentedState(new_world, intent, human_counts, robot_counts)
        for intent in intents
    ]
    return Belief(particles=particles, num_intents=belief.num_intents)

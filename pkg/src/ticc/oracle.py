"""Exact finite-horizon evaluation of small shopping instances.

This module exhaustively expands the turn-based game tree and is the
reference against which the Monte-Carlo planner is validated. It mirrors
the planner's internal model step for step:

* the robot maximizes expected return over its action set;
* the human, when present, responds to the robot's chosen action (but
  not its outcome) with a softmax over her own continuation values, at
  a configurable temperature (0 selects the argmax, lowest item index
  breaking ties);
* robot outcomes are drawn from the robot's true per-item success
  rates, which are stationary; human outcomes are drawn from the
  expectation of an evolving success/failure count pair per item, which
  the recursion tracks exactly;
* the human's model of the robot is tracked the same way, and when the
  calibration weight is positive every transition accrues
  weight * mean-overlap(updated model, true robot capability), evaluated
  on the post-transition counts;
* the terminal value after the final step is the task reward averaged
  uniformly over the candidate shopping lists.

Intended for micro-instances only: the state space must stay small
enough to enumerate (a few items, horizon <= 4). Multiple candidate
lists are only supported with the human absent, because an observing
human would otherwise couple list inference into the recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .capability import PERFECT_PRIOR, overlap
from .domain import (
    NOOP,
    NOOP_OUTCOME,
    SIGNAL,
    Action,
    Outcome,
    WorldState,
    action_space,
    task_reward,
    world_transition,
)

CountPairs = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class OracleSpec:
    """A micro-instance of the shopping game, solvable exactly."""

    lists: tuple[tuple[int, ...], ...]
    robot_success: tuple[float, ...]
    horizon: int
    gamma: float = 1.0
    epsilon: float = 0.0
    human_present: bool = True
    human_counts: CountPairs | None = None
    human_temp: float = 1.0
    calibration_weight: float = 0.0
    calibration_target: tuple[float, ...] | None = None
    robot_counts: CountPairs | None = None

    def __post_init__(self) -> None:
        n = len(self.robot_success)
        if any(len(lst) != n for lst in self.lists):
            raise ValueError("every list must cover the same item set")
        if self.human_present and len(self.lists) != 1:
            raise ValueError("multiple candidate lists require an absent human")

    @property
    def num_items(self) -> int:
        return len(self.robot_success)

    def initial_human_counts(self) -> CountPairs | None:
        if not self.human_present:
            return None
        if self.human_counts is not None:
            return self.human_counts
        return tuple(PERFECT_PRIOR for _ in range(self.num_items))

    def initial_robot_counts(self) -> CountPairs | None:
        if self.calibration_weight == 0.0:
            return None
        if self.robot_counts is not None:
            return self.robot_counts
        return tuple(PERFECT_PRIOR for _ in range(self.num_items))


def _outcome_branches(
    action: Action, success_probs: tuple[float, ...] | None, counts: CountPairs | None
) -> list[tuple[Outcome, float]]:
    """Enumerate (outcome, probability) branches for one action."""
    if action.kind == NOOP:
        return [(NOOP_OUTCOME, 1.0)]
    if action.kind == SIGNAL:
        return [(Outcome(action.item, False), 1.0)]
    if success_probs is not None:
        p = success_probs[action.item]
    else:
        s, f = counts[action.item]
        p = s / (s + f)
    branches = []
    if p > 0.0:
        branches.append((Outcome(action.item, True), p))
    if p < 1.0:
        branches.append((Outcome(action.item, False), 1.0 - p))
    return branches


def _bump(counts: CountPairs, outcome: Outcome) -> CountPairs:
    if outcome.item is None:
        return counts
    s, f = counts[outcome.item]
    pair = (s + 1.0, f) if outcome.success else (s, f + 1.0)
    return counts[: outcome.item] + (pair,) + counts[outcome.item + 1 :]


def _mean_overlap(counts: CountPairs, target: tuple[float, ...]) -> float:
    probs = [s / (s + f) for s, f in counts]
    return sum(overlap(p, t) for p, t in zip(probs, target)) / len(target)


class OracleSolver:
    """Memoized exhaustive solver for one :class:`OracleSpec`."""

    def __init__(self, spec: OracleSpec):
        self.spec = spec
        self.actions = action_space(spec.num_items)
        self.target = spec.calibration_target or spec.robot_success
        self._memo: dict = {}

    # -- public API ---------------------------------------------------

    def root_value(self, bag: tuple[int, ...] | None = None) -> float:
        bag = bag or (0,) * self.spec.num_items
        return self._state_value(
            bag, 0, 0, self.spec.initial_human_counts(), self.spec.initial_robot_counts()
        )

    def root_q_values(self, bag: tuple[int, ...] | None = None) -> dict[Action, float]:
        bag = bag or (0,) * self.spec.num_items
        psi = self.spec.initial_human_counts()
        phi = self.spec.initial_robot_counts()
        return {a: self._q_robot(bag, 0, 0, psi, phi, a) for a in self.actions}

    def optimal_root_actions(
        self, bag: tuple[int, ...] | None = None, tol: float = 1e-9
    ) -> set[Action]:
        q = self.root_q_values(bag)
        best = max(q.values())
        return {a for a, v in q.items() if v >= best - tol}

    # -- recursion ----------------------------------------------------

    def _terminal_value(self, bag: tuple[int, ...]) -> float:
        vals = [task_reward(bag, lst) for lst in self.spec.lists]
        return sum(vals) / len(vals)

    def _state_value(self, bag, step, depth, psi, phi) -> float:
        spec = self.spec
        if step >= spec.horizon:
            return self._terminal_value(bag)
        if spec.epsilon > 0.0 and spec.gamma**depth < spec.epsilon:
            return 0.0
        key = (bag, step, depth, psi, phi)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        value = max(self._q_robot(bag, step, depth, psi, phi, a) for a in self.actions)
        self._memo[key] = value
        return value

    def _q_robot(self, bag, step, depth, psi, phi, robot_action: Action) -> float:
        spec = self.spec
        robot_branches = _outcome_branches(robot_action, spec.robot_success, None)
        if not spec.human_present:
            return sum(
                p
                * self._after(
                    bag, step, depth, psi, phi, robot_action, r_out, NOOP_OUTCOME
                )
                for r_out, p in robot_branches
            )
        # the human responds to the robot's action before outcomes resolve
        q_human = []
        for human_action in self.actions:
            human_branches = _outcome_branches(human_action, None, psi)
            q = 0.0
            for r_out, rp in robot_branches:
                for h_out, hp in human_branches:
                    q += rp * hp * self._after(
                        bag, step, depth, psi, phi, robot_action, r_out, h_out
                    )
            q_human.append(q)
        weights = _response_weights(q_human, spec.human_temp)
        return sum(w * q for w, q in zip(weights, q_human))

    def _after(self, bag, step, depth, psi, phi, robot_action, r_out, h_out) -> float:
        spec = self.spec
        state = world_transition(WorldState(bag=bag, step=step), r_out, h_out)
        new_psi = _bump(psi, h_out) if psi is not None else None
        reward = 0.0
        new_phi = phi
        if phi is not None:
            new_phi = _bump(phi, r_out)
            reward = spec.calibration_weight * _mean_overlap(new_phi, self.target)
        cont = self._state_value(state.bag, state.step, depth + 1, new_psi, new_phi)
        return reward + spec.gamma * cont


def _response_weights(q_values: list[float], temp: float) -> list[float]:
    """Softmax response distribution; temperature 0 is a strict argmax."""
    if temp <= 0.0:
        best = max(q_values)
        idx = q_values.index(best)  # lowest index wins ties
        return [1.0 if i == idx else 0.0 for i in range(len(q_values))]
    peak = max(q_values)
    exps = [math.exp((q - peak) / temp) for q in q_values]
    total = sum(exps)
    return [e / total for e in exps]

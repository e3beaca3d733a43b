"""Online tree-search planner for the collaborative shopping task.

Two modes share one engine. In ``ticc`` mode the robot simulates with
its true per-item success rates, evolves both capability-count models
inside the lookahead, and collects a calibration bonus for keeping the
partner's model of it accurate. In ``std`` mode the internal model
assumes every pick succeeds, capability counts stay frozen, and the
calibration bonus is disabled; intent inference over the partner's
shopping list works identically in both modes.

The search itself runs in the compiled kernel (see ``_kernel``); this
module owns configuration, seeding, the root-statistics snapshot used
for intent likelihoods, root-parallel merging, and tree reuse between
consecutive decisions.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernel
from .belief import Belief
from .domain import Action, Observation, Outcome, action_index, action_space

MODE_TICC = "ticc"
MODE_STD = "std"


@dataclass(frozen=True)
class PlannerConfig:
    """Knobs for one planner instance.

    ``num_workers`` > 1 runs that many independent searches per decision
    and merges their root statistics by visit-weighted averaging; the
    workers never share tree nodes. ``solo_robot`` pins the partner to
    no-ops inside the lookahead, for single-agent test instances.
    ``intent_temp`` sets the softmax temperature used only when scoring
    an observed partner action for intent re-weighting; left unset, the
    sampler temperature ``human_temp`` applies there too.
    ``intent_burn_in`` withholds that scoring for the first few
    decisions after construction: early in a round the per-intent
    statistics barely differ, so the sharpened softmax would amplify
    estimation noise into posterior jitter.
    """

    num_samples: int = 10_000
    ucb_c: float = 1.0
    gamma: float = 0.95
    epsilon: float = 0.01
    human_temp: float = 1.0
    intent_temp: float | None = None
    intent_burn_in: int = 0
    calibration_weight: float = 0.05
    mode: str = MODE_TICC
    num_workers: int = 1
    solo_robot: bool = False
    trace_path: str | None = None

    def __post_init__(self) -> None:
        if self.num_samples < 1:
            raise ValueError("num_samples must be at least 1")
        if self.ucb_c < 0:
            raise ValueError("ucb_c must be non-negative")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.human_temp < 0:
            raise ValueError("human_temp must be non-negative")
        if self.intent_temp is not None and self.intent_temp <= 0:
            raise ValueError("intent_temp must be positive when set")
        if self.intent_burn_in < 0:
            raise ValueError("intent_burn_in must be non-negative")
        if self.calibration_weight < 0:
            raise ValueError("calibration_weight must be non-negative")
        if self.mode not in (MODE_TICC, MODE_STD):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.num_workers < 1:
            raise ValueError("num_workers must be at least 1")


@dataclass
class RootSnapshot:
    """Root statistics captured at the end of a search.

    ``intent_bag`` counts the particles appended to the root bag per
    intent; the human arrays are indexed [intent, robot action, human
    action] and mirror the in-tree partner statistics.
    """

    visits: int
    action_visits: np.ndarray
    action_values: np.ndarray
    intent_bag: np.ndarray
    human_visits: np.ndarray
    human_action_visits: np.ndarray
    human_action_values: np.ndarray


def human_action_probs(
    total: int,
    action_visits: np.ndarray,
    action_values: np.ndarray,
    ucb_c: float,
    temp: float,
) -> np.ndarray:
    """Distribution the in-tree partner model samples actions from.

    Matches the kernel draw exactly: with no visits the draw is uniform;
    while unvisited actions remain they are drawn uniformly among
    themselves; otherwise a softmax over UCB1-augmented values, with
    temperature zero degenerating to the lowest-index argmax.
    """
    num_actions = action_visits.shape[0]
    if total == 0:
        return np.full(num_actions, 1.0 / num_actions)
    unvisited = action_visits == 0
    if unvisited.any():
        return unvisited / unvisited.sum()
    scores = action_values + ucb_c * np.sqrt(math.log(total) / action_visits)
    if temp <= 0.0:
        probs = np.zeros(num_actions)
        probs[int(np.argmax(scores))] = 1.0
        return probs
    scaled = (scores - scores.max()) / temp
    weights = np.exp(scaled)
    return weights / weights.sum()


def intent_action_probs(
    total: int,
    action_visits: np.ndarray,
    action_values: np.ndarray,
    temp: float,
) -> np.ndarray:
    """Partner action model used for intent re-weighting.

    Softmax over the learned per-intent action values, without the
    exploration bonus the in-tree sampler adds. The bonus exists to
    drive tree growth and deliberately evens out the sampling
    distribution, so scoring real observations with it would wash out
    exactly the evidence the filter needs. Intents with no statistics
    score every action uniformly; unvisited actions keep their zero
    value estimate.
    """
    num_actions = action_visits.shape[0]
    if total == 0:
        return np.full(num_actions, 1.0 / num_actions)
    scores = action_values
    if temp <= 0.0:
        probs = np.zeros(num_actions)
        probs[int(np.argmax(scores))] = 1.0
        return probs
    scaled = (scores - scores.max()) / temp
    weights = np.exp(scaled)
    return weights / weights.sum()


def _outcome_code(outcome: Outcome) -> int:
    if outcome.item is None:
        return _kernel.OUT_NONE
    return _kernel.OUT_SUCCESS if outcome.success else _kernel.OUT_FAIL


class Planner:
    """One robot's search state across the decisions of a round."""

    def __init__(
        self,
        num_items: int,
        horizon: int,
        lists: Sequence[Sequence[int]],
        robot_truth: Sequence[float],
        config: PlannerConfig,
        seed: int,
    ):
        self.config = config
        self.num_items = num_items
        self.horizon = horizon
        self._actions = action_space(num_items)
        self.num_actions = len(self._actions)
        self._lists = np.asarray(lists, np.int64)
        if self._lists.ndim != 2 or self._lists.shape[1] != num_items:
            raise ValueError("candidate lists must be shaped [num_intents, num_items]")
        self.num_intents = self._lists.shape[0]
        self._robot_truth = np.asarray(robot_truth, np.float64)
        if self._robot_truth.shape != (num_items,):
            raise ValueError("robot_truth must have one success rate per item")
        self._rng = random.Random(seed)
        self._search_count = 0
        self._snapshot: RootSnapshot | None = None
        self._arena: _kernel.TreeArena | None = None
        if config.num_workers == 1:
            self._arena = _kernel.TreeArena(self.num_actions, self.num_intents)

    @property
    def last_snapshot(self) -> RootSnapshot | None:
        return self._snapshot

    def reset(self) -> None:
        """Drop the tree; used between rounds."""
        self._snapshot = None
        if self.config.num_workers == 1:
            self._arena = _kernel.TreeArena(self.num_actions, self.num_intents)

    def search(self, belief: Belief) -> Action:
        """Pick the robot action for the current belief.

        Runs the configured number of sampled lookaheads, then returns
        the root action with the highest mean value, breaking exact ties
        uniformly at random.
        """
        cfg = self.config
        if belief.num_intents != self.num_intents:
            raise ValueError("belief intent count does not match the planner's lists")
        world = belief.world
        if world.step >= self.horizon:
            raise ValueError("cannot search from a terminal state")

        root_bag = np.asarray(world.bag, np.int64)
        psi0 = np.asarray(belief.human_counts.counts, np.float64)
        phi0 = np.asarray(belief.robot_counts.counts, np.float64)
        intents = np.asarray([p.intent for p in belief.particles], np.int64)

        workers = cfg.num_workers
        if workers == 1:
            arenas = [self._arena]
            shares = [cfg.num_samples]
        else:
            arenas = [
                _kernel.TreeArena(self.num_actions, self.num_intents)
                for _ in range(workers)
            ]
            base = cfg.num_samples // workers
            shares = [base] * workers
            shares[0] += cfg.num_samples - base * workers
        seeds = [self._rng.randrange(1, 2**31 - 1) for _ in arenas]

        trace_records: list[dict] = []
        for w, (arena, share, kseed) in enumerate(zip(arenas, shares, seeds)):
            if share == 0:
                continue
            traces = self._run_search(arena, kseed, share, world.step,
                                      root_bag, intents, psi0, phi0)
            if traces is not None:
                depth, act, ret, values = traces
                for i in range(share):
                    trace_records.append({
                        "search": self._search_count,
                        "worker": w,
                        "iteration": i,
                        "depth": int(depth[i]),
                        "root_action": int(act[i]),
                        "return": float(ret[i]),
                        "root_values": [float(v) for v in values[i]],
                    })

        self._snapshot = self._merge_snapshots(
            [self._snapshot_from(a) for a in arenas if a is not None]
        )
        action = self._select_from_snapshot(self._snapshot)
        self._search_count += 1
        if cfg.trace_path is not None:
            self._dump_trace(trace_records, action)
        return action

    def intent_likelihoods(self, robot_action: Action, human_action: Action) -> tuple[float, ...]:
        """P(observed partner action | intent, executed robot action).

        Read from the last search's root statistics; used by the belief
        filter before the tree is advanced. Intents whose statistics are
        empty fall back to a uniform action model.
        """
        snap = self._snapshot
        if snap is None:
            raise RuntimeError("intent_likelihoods requires a completed search")
        if human_action.kind != "pick":
            # signals and no-ops leave the bag alone, so their per-intent
            # value statistics differ only by simulation noise; scoring
            # them would jitter the posterior without adding evidence
            return tuple(1.0 / self.num_intents for _ in range(self.num_intents))
        if self._search_count <= self.config.intent_burn_in:
            # within the burn-in, picks are treated the same way: the
            # candidate lists overlap too much for the fresh statistics
            # to separate them yet
            return tuple(1.0 / self.num_intents for _ in range(self.num_intents))
        ar = action_index(robot_action, self.num_items)
        ah = action_index(human_action, self.num_items)
        temp = self.config.intent_temp
        if temp is None:
            temp = self.config.human_temp
        out = []
        for theta in range(self.num_intents):
            probs = intent_action_probs(
                int(snap.human_visits[theta, ar]),
                snap.human_action_visits[theta, ar],
                snap.human_action_values[theta, ar],
                temp,
            )
            out.append(float(probs[ah]))
        return tuple(out)

    def advance(self, robot_action: Action, observation: Observation) -> None:
        """Move the tree root along the executed, observed edge.

        A never-simulated edge falls back to a fresh empty root. With
        root-parallel workers the tree is rebuilt every decision, so
        this only invalidates the snapshot.
        """
        self._snapshot = None
        if self._arena is None:
            return
        arena = self._arena
        ar = action_index(robot_action, self.num_items)
        ah = action_index(observation.human_action, self.num_items)
        key = _kernel.pack_edge(
            arena.root,
            ar,
            _outcome_code(observation.robot_outcome),
            ah,
            _outcome_code(observation.human_outcome),
        )
        if key in arena.child_map:
            arena.root = int(arena.child_map[key])
        else:
            arena.root = arena.new_node()

    def root_values(self) -> dict[Action, tuple[int, float]]:
        """Visits and mean value per root action from the last search."""
        snap = self._snapshot
        if snap is None:
            raise RuntimeError("root_values requires a completed search")
        return {
            self._actions[a]: (int(snap.action_visits[a]), float(snap.action_values[a]))
            for a in range(self.num_actions)
        }

    # internal helpers

    def _run_search(self, arena, kseed, share, step, root_bag, intents, psi0, phi0):
        cfg = self.config
        std_mode = cfg.mode == MODE_STD
        calib = 0.0 if std_mode else cfg.calibration_weight
        tracing = cfg.trace_path is not None
        if tracing:
            t_depth = np.zeros(share, np.int64)
            t_action = np.zeros(share, np.int64)
            t_return = np.zeros(share, np.float64)
            t_values = np.zeros((share, self.num_actions), np.float64)
        else:
            t_depth = np.zeros(0, np.int64)
            t_action = np.zeros(0, np.int64)
            t_return = np.zeros(0, np.float64)
            t_values = np.zeros((0, self.num_actions), np.float64)

        done = 0
        while done < share:
            done = _kernel.run_iterations(
                kseed, done, share,
                arena.root, step, root_bag, intents, psi0, phi0,
                self._lists, self._robot_truth, self.horizon,
                cfg.gamma, cfg.epsilon, cfg.ucb_c, cfg.human_temp, calib,
                std_mode, cfg.solo_robot,
                arena.node_n, arena.node_na, arena.node_va, arena.node_bag,
                arena.row_n, arena.row_nah, arena.row_vah,
                arena.row_map, arena.child_map, arena.counts,
                t_depth, t_action, t_return, t_values,
            )
            if done < share:
                arena.ensure_capacity(self.horizon - step)
        return (t_depth, t_action, t_return, t_values) if tracing else None

    def _snapshot_from(self, arena) -> RootSnapshot:
        r = arena.root
        m, a = self.num_intents, self.num_actions
        hv = np.zeros((m, a), np.int64)
        hav = np.zeros((m, a, a), np.int64)
        hvv = np.zeros((m, a, a), np.float64)
        for theta in range(m):
            for ar in range(a):
                key = _kernel.pack_row(r, theta, ar)
                if key in arena.row_map:
                    row = int(arena.row_map[key])
                    hv[theta, ar] = arena.row_n[row]
                    hav[theta, ar] = arena.row_nah[row]
                    hvv[theta, ar] = arena.row_vah[row]
        return RootSnapshot(
            visits=int(arena.node_n[r]),
            action_visits=arena.node_na[r].copy(),
            action_values=arena.node_va[r].copy(),
            intent_bag=arena.node_bag[r].copy(),
            human_visits=hv,
            human_action_visits=hav,
            human_action_values=hvv,
        )

    def _merge_snapshots(self, snaps: list[RootSnapshot]) -> RootSnapshot:
        if len(snaps) == 1:
            return snaps[0]
        na = sum(s.action_visits for s in snaps)
        va = np.zeros_like(snaps[0].action_values)
        nonzero = na > 0
        weighted = sum(s.action_visits * s.action_values for s in snaps)
        va[nonzero] = weighted[nonzero] / na[nonzero]
        hav = sum(s.human_action_visits for s in snaps)
        hvv = np.zeros_like(snaps[0].human_action_values)
        hnz = hav > 0
        hweighted = sum(s.human_action_visits * s.human_action_values for s in snaps)
        hvv[hnz] = hweighted[hnz] / hav[hnz]
        return RootSnapshot(
            visits=sum(s.visits for s in snaps),
            action_visits=na,
            action_values=va,
            intent_bag=sum(s.intent_bag for s in snaps),
            human_visits=sum(s.human_visits for s in snaps),
            human_action_visits=hav,
            human_action_values=hvv,
        )

    def _select_from_snapshot(self, snap: RootSnapshot) -> Action:
        visited = np.flatnonzero(snap.action_visits > 0)
        if visited.size == 0:
            return self._actions[self._rng.randrange(self.num_actions)]
        values = snap.action_values[visited]
        best = values.max()
        tied = [int(i) for i, v in zip(visited, values) if v == best]
        choice = tied[0] if len(tied) == 1 else self._rng.choice(tied)
        return self._actions[choice]

    def _dump_trace(self, records: list[dict], action: Action) -> None:
        snap = self._snapshot
        with open(self.config.trace_path, "a") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
            fh.write(json.dumps({
                "search": self._search_count - 1,
                "selected": action_index(action, self.num_items),
                "root_visits": [int(v) for v in snap.action_visits],
                "root_values": [float(v) for v in snap.action_values],
            }) + "\n")

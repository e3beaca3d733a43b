"""Single-round execution shared by the batch harness and the service.

A round is a fixed number of steps; each step is one robot decision
followed by one partner decision. The engine owns the round's random
stream, the planner, and the belief, and exposes the two half-steps
separately so a live client can supply the partner action over HTTP
while the harness supplies it from the simulated partner. Both paths
consume the random stream identically, which is what makes a scripted
service session reproduce a harness round bit for bit.

Stream discipline: the per-round generator is seeded from the string
``"{master_seed}:{run}:{round}"`` and is drawn from in a fixed order:
the round's hidden list index, the planner seed, then per step the
robot outcome, the partner outcome, and the belief resampling draws.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field

from .belief import Belief, belief_update, init_belief
from .capability import CapabilityCounts, capability_accuracy, perfect_prior
from .domain import (
    Action,
    Observation,
    Outcome,
    WorldState,
    sample_outcome,
    task_reward,
)
from .fixtures import ExperimentConfig
from .human import HumanAgent
from .planner import MODE_TICC, Planner, PlannerConfig


@dataclass
class PersistentState:
    """Capability counts that survive across a run's rounds."""

    psi: CapabilityCounts
    phi: CapabilityCounts

    @classmethod
    def initial(cls, num_items: int) -> "PersistentState":
        return cls(psi=perfect_prior(num_items), phi=perfect_prior(num_items))


@dataclass(frozen=True)
class StepRecord:
    """One completed step: both actions, both outcomes, resulting state."""

    step: int
    robot_action: Action
    robot_outcome: Outcome
    human_action: Action
    human_outcome: Outcome
    bag: tuple[int, ...]
    theta_likelihood: float


@dataclass
class EpisodeLog:
    """Full record of one round plus its end-of-round metrics."""

    run_index: int
    round_index: int
    stage: str
    theta: int
    steps: list[StepRecord]
    task_reward: float
    psi_correctness: float
    phi_correctness: float

    @property
    def final_bag(self) -> tuple[int, ...]:
        return self.steps[-1].bag if self.steps else ()

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "EpisodeLog":
        raw = json.loads(text)
        raw["steps"] = [
            StepRecord(
                step=s["step"],
                robot_action=Action(**s["robot_action"]),
                robot_outcome=Outcome(**s["robot_outcome"]),
                human_action=Action(**s["human_action"]),
                human_outcome=Outcome(**s["human_outcome"]),
                bag=tuple(s["bag"]),
                theta_likelihood=s["theta_likelihood"],
            )
            for s in raw["steps"]
        ]
        return cls(**raw)


class RoundEngine:
    """Drives one round; the caller supplies partner actions."""

    def __init__(
        self,
        config: ExperimentConfig,
        state: PersistentState,
        run_index: int,
        round_index: int,
    ):
        self.config = config
        self.run_index = run_index
        self.round_index = round_index
        self.rng = random.Random(f"{config.master_seed}:{run_index}:{round_index}")
        self.theta = self.rng.randrange(config.num_intents)
        planner_seed = self.rng.randrange(2**31 - 1)
        self.planner = Planner(
            num_items=config.num_item_types,
            horizon=config.horizon,
            lists=config.shopping_lists,
            robot_truth=config.robot_capability,
            config=PlannerConfig(
                num_samples=config.num_search_samples,
                ucb_c=config.ucb_c,
                gamma=config.gamma,
                epsilon=config.epsilon,
                human_temp=config.human_temp,
                intent_temp=config.intent_temp,
                intent_burn_in=config.intent_burn_in,
                calibration_weight=config.calibration_weight,
                mode=config.mode,
            ),
            seed=planner_seed,
        )
        self.belief = init_belief(
            num_items=config.num_item_types,
            num_intents=config.num_intents,
            num_particles=config.num_particles,
            human_counts=state.psi,
            robot_counts=state.phi,
        )
        self.step_index = 0
        self.records: list[StepRecord] = []
        self._pending: tuple[Action, Outcome] | None = None

    @property
    def world(self) -> WorldState:
        return self.belief.world

    @property
    def done(self) -> bool:
        return self.step_index >= self.config.horizon

    @property
    def awaiting_human(self) -> bool:
        return self._pending is not None

    @property
    def pending_robot(self) -> tuple[Action, Outcome] | None:
        return self._pending

    def robot_step(self) -> tuple[Action, Outcome]:
        """Search, act, and resolve the robot's true outcome."""
        if self.done:
            raise RuntimeError("round is over")
        if self._pending is not None:
            raise RuntimeError("waiting for the partner's action")
        action = self.planner.search(self.belief)
        outcome = sample_outcome(action, self.config.robot_capability, self.rng)
        self._pending = (action, outcome)
        return action, outcome

    def human_step(self, human_action: Action) -> Outcome:
        """Resolve the partner's action and absorb the full step."""
        if self._pending is None:
            raise RuntimeError("the robot has not moved yet")
        robot_action, robot_outcome = self._pending
        human_outcome = sample_outcome(
            human_action, self.config.human_capability, self.rng
        )
        weights = self.planner.intent_likelihoods(robot_action, human_action)
        observation = Observation(robot_outcome, human_action, human_outcome)
        self.planner.advance(robot_action, observation)
        self.belief = belief_update(
            self.belief,
            robot_action,
            observation,
            weights,
            self.rng,
            track_capabilities=self.config.mode == MODE_TICC,
        )
        self.records.append(
            StepRecord(
                step=self.step_index,
                robot_action=robot_action,
                robot_outcome=robot_outcome,
                human_action=human_action,
                human_outcome=human_outcome,
                bag=self.belief.world.bag,
                theta_likelihood=self.belief.intent_likelihood(self.theta),
            )
        )
        self._pending = None
        self.step_index += 1
        return human_outcome

    def finish(self, state: PersistentState) -> EpisodeLog:
        """Close the round: metrics out, capability counts carried over."""
        if not self.done:
            raise RuntimeError("round still has steps left")
        cfg = self.config
        reward = task_reward(self.belief.world.bag, cfg.shopping_lists[self.theta])
        log = EpisodeLog(
            run_index=self.run_index,
            round_index=self.round_index,
            stage=cfg.stage_of(self.round_index),
            theta=self.theta,
            steps=list(self.records),
            task_reward=reward,
            psi_correctness=capability_accuracy(
                self.belief.human_counts, cfg.human_capability
            ),
            phi_correctness=capability_accuracy(
                self.belief.robot_counts, cfg.robot_capability
            ),
        )
        state.psi = self.belief.human_counts
        state.phi = self.belief.robot_counts
        return log


def make_human(config: ExperimentConfig) -> HumanAgent:
    """The simulated partner for one run; persists across its rounds."""
    return HumanAgent(
        policy=config.human_policy,
        true_capability=config.human_capability,
        shopping_list=config.shopping_lists[0],
        signal_threshold=config.signal_threshold,
        script=tuple(config.human_script),
    )


def run_round(
    config: ExperimentConfig,
    state: PersistentState,
    human: HumanAgent,
    run_index: int,
    round_index: int,
) -> EpisodeLog:
    """One closed-loop round with the simulated partner."""
    engine = RoundEngine(config, state, run_index, round_index)
    human.set_shopping_list(config.shopping_lists[engine.theta])
    while not engine.done:
        robot_action, robot_outcome = engine.robot_step()
        human.observe_robot(robot_action, robot_outcome)
        action = human.act(engine.world, robot_last=(robot_action, robot_outcome))
        engine.human_step(action)
    return engine.finish(state)

"""Scenario fixtures and experiment configuration.

The shipped JSON files carry the benchmark tables: candidate shopping
lists and true per-item success rates for both agents. Configs are
built from a named fixture plus overrides, so every quantity in a run
is traceable to a data file or an explicit argument.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from importlib import resources

from ..planner import MODE_STD, MODE_TICC

_FIXTURE_NAMES = (
    "setup1",
    "setup2_items2",
    "setup2_items3",
    "setup2_items4",
    "setup2_items5",
    "human_study",
    "teaching",
)

WORKERS_ENV = "TICC_WORKERS"


def fixture_names() -> tuple[str, ...]:
    return _FIXTURE_NAMES


def load_fixture(name: str) -> dict:
    """Raw fixture payload by name; KeyError lists the known names."""
    if name not in _FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(_FIXTURE_NAMES)}")
    path = resources.files("ticc.fixtures").joinpath(f"{name}.json")
    return json.loads(path.read_text())


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a batch of runs.

    ``master_seed`` plus the run and round indices fully determine all
    randomness. ``num_workers`` of None defers to the TICC_WORKERS
    environment variable (default 1).
    """

    name: str
    shopping_lists: tuple[tuple[int, ...], ...]
    human_capability: tuple[float, ...]
    robot_capability: tuple[float, ...]
    horizon: int = 10
    num_search_samples: int = 10_000
    learning_rounds: int = 5
    evaluation_rounds: int = 5
    num_runs: int = 50
    mode: str = MODE_TICC
    master_seed: int = 0
    num_particles: int = 1_000
    ucb_c: float = 1.0
    gamma: float = 0.95
    epsilon: float = 0.01
    human_temp: float = 1.0
    intent_temp: float | None = 0.03
    intent_burn_in: int = 3
    calibration_weight: float = 0.05
    human_policy: str = "rational"
    signal_threshold: float = 0.1
    human_script: tuple = field(default=())
    num_workers: int | None = None

    def __post_init__(self) -> None:
        n = len(self.robot_capability)
        if len(self.human_capability) != n:
            raise ValueError("capability vectors must cover the same items")
        if not self.shopping_lists:
            raise ValueError("at least one shopping list is required")
        if any(len(lst) != n for lst in self.shopping_lists):
            raise ValueError("every shopping list must cover every item type")
        if any(sum(lst) <= 0 for lst in self.shopping_lists):
            raise ValueError("every shopping list must need something")
        if not all(0.0 <= p <= 1.0 for p in self.human_capability + self.robot_capability):
            raise ValueError("capabilities are probabilities")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if self.learning_rounds < 0 or self.evaluation_rounds < 0:
            raise ValueError("round counts must be non-negative")
        if self.num_runs < 1:
            raise ValueError("num_runs must be positive")
        if self.mode not in (MODE_TICC, MODE_STD):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.num_particles < self.num_intents:
            raise ValueError("need at least one particle per candidate list")
        if self.human_policy not in ("rational", "greedy", "scripted"):
            raise ValueError(f"unknown human policy {self.human_policy!r}")

    @property
    def num_item_types(self) -> int:
        return len(self.robot_capability)

    @property
    def num_intents(self) -> int:
        return len(self.shopping_lists)

    @property
    def total_rounds(self) -> int:
        return self.learning_rounds + self.evaluation_rounds

    def stage_of(self, round_index: int) -> str:
        return "learning" if round_index < self.learning_rounds else "evaluation"

    def effective_workers(self) -> int:
        if self.num_workers is not None:
            return max(1, self.num_workers)
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            return max(1, int(raw))
        except ValueError:
            return 1

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


_TUPLE_FIELDS = {"shopping_lists", "human_capability", "robot_capability"}


def config_from_fixture(fixture: str, **overrides) -> ExperimentConfig:
    """Build a config from a named fixture; overrides win field-wise."""
    data = load_fixture(fixture)
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs = {k: v for k, v in data.items() if k in known}
    kwargs.update(overrides)
    kwargs["shopping_lists"] = tuple(tuple(lst) for lst in kwargs["shopping_lists"])
    kwargs["human_capability"] = tuple(kwargs["human_capability"])
    kwargs["robot_capability"] = tuple(kwargs["robot_capability"])
    return ExperimentConfig(**kwargs)


def config_for_list_prefix(num_lists: int, **overrides) -> ExperimentConfig:
    """The list-count scenario family: the first n lists of setup1."""
    base = load_fixture("setup1")
    if not 1 <= num_lists <= len(base["shopping_lists"]):
        raise ValueError(f"num_lists must be in 1..{len(base['shopping_lists'])}")
    lists = tuple(tuple(lst) for lst in base["shopping_lists"][:num_lists])
    return config_from_fixture(
        "setup1", **{"name": f"setup3_lists{num_lists}", "shopping_lists": lists, **overrides}
    )

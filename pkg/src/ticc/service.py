"""HTTP interaction service: a live partner plays the human role.

One session wraps the same round engine the batch harness uses, with
capability beliefs persisting across rounds. The robot plans and acts
on request; the human submits actions whose true outcomes are sampled
server-side from the scenario's capability table. The list the human
is shopping for is disclosed only in the human-facing view.

Phases walk RobotTurn -> HumanTurn -> (RobotTurn | RoundOver); a
robot-step request in RoundOver opens the next round, and the session
ends in Done after the final round. Invalid requests are rejected
without touching session state.
"""

from __future__ import annotations

import json
import random
import threading
import uuid

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .domain import Action
from .engine import PersistentState, RoundEngine
from .experiments import config_to_payload
from .fixtures import ExperimentConfig, config_from_fixture, fixture_names
from .planner import MODE_STD, MODE_TICC

LIVE_SEARCH_SAMPLES = 10_000

PHASE_ROBOT = "RobotTurn"
PHASE_HUMAN = "HumanTurn"
PHASE_ROUND_OVER = "RoundOver"
PHASE_DONE = "Done"


class ServiceError(Exception):
    """API error carrying the wire shape: HTTP status, code, message."""

    def __init__(self, status: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class Session:
    """Single-writer state for one live pairing."""

    def __init__(self, session_id: str, config: ExperimentConfig) -> None:
        self.session_id = session_id
        self.config = config
        self.state = PersistentState.initial(config.num_item_types)
        self.round_index = 0
        self.engine = RoundEngine(config, self.state, 0, 0)
        self.phase = PHASE_ROBOT
        self.completed: list = []
        self.last_robot: tuple | None = None
        self.last_human: tuple | None = None
        self.lock = threading.Lock()

    def view(self, role: str) -> dict:
        config = self.config
        engine = self.engine
        if engine is not None:
            bag = list(engine.world.bag)
            step = engine.world.step
            theta_marginal = list(engine.belief.intent_marginal())
            psi = engine.belief.human_counts.expected_success_probs()
            phi = engine.belief.robot_counts.expected_success_probs()
        else:
            bag = list(self.completed[-1].final_bag) if self.completed else []
            step = config.horizon if self.completed else 0
            theta_marginal = [1.0 / config.num_intents] * config.num_intents
            psi = self.state.psi.expected_success_probs()
            phi = self.state.phi.expected_success_probs()
        payload = {
            "session_id": self.session_id,
            "scenario": config.name,
            "mode": config.mode,
            "phase": self.phase,
            "round": min(self.round_index, config.total_rounds - 1),
            "total_rounds": config.total_rounds,
            "step": step,
            "horizon": config.horizon,
            "bag": bag,
            "theta_marginal": theta_marginal,
            "psi_expectation": list(psi),
            "phi_expectation": list(phi),
            "true_human_capability": list(config.human_capability),
            "true_robot_capability": list(config.robot_capability),
            "reward_ledger": [
                {"round": log.round_index, "task_reward": log.task_reward}
                for log in self.completed
            ],
            "last_robot_action": _action_payload(self.last_robot),
            "last_human_action": _action_payload(self.last_human),
        }
        if role == "human" and engine is not None:
            payload["shopping_list"] = list(config.shopping_lists[engine.theta])
        return payload


def _action_payload(pair: tuple | None) -> dict | None:
    if pair is None:
        return None
    action, outcome = pair
    return {
        "action": {"kind": action.kind, "item": action.item},
        "outcome": {"item": outcome.item, "success": outcome.success},
    }


async def _json_body(request: Request) -> dict:
    raw = await request.body()
    if not raw:
        return {}
    try:
        body = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ServiceError(422, "invalid_json", f"request body is not JSON: {exc}")
    if not isinstance(body, dict):
        raise ServiceError(422, "invalid_json", "request body must be a JSON object")
    return body


def _parse_action(body: dict, num_items: int) -> Action:
    kind = body.get("action_kind")
    item = body.get("item")
    if kind not in ("pick", "signal", "noop"):
        raise ServiceError(422, "invalid_action",
                           f"action_kind must be pick, signal, or noop, got {kind!r}")
    if kind == "noop":
        if item is not None:
            raise ServiceError(422, "invalid_action", "noop takes no item")
        return Action("noop")
    if not isinstance(item, int) or isinstance(item, bool):
        raise ServiceError(422, "invalid_action", f"{kind} requires an integer item")
    if not 0 <= item < num_items:
        raise ServiceError(422, "invalid_action",
                           f"item must be in 0..{num_items - 1}, got {item}")
    return Action(kind, item)


class SessionStore:
    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def add(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.session_id] = session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, "unknown_session",
                               f"no session {session_id!r}")
        return session


def create_app(ui_dir: str | None = None) -> FastAPI:
    """Build the app; ``ui_dir`` optionally serves a built web client.

    CORS is wide open: the service holds no credentials and is meant
    for local play, where the client often runs on a different port.
    """
    app = FastAPI(title="collaborative shopping service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore()

    @app.exception_handler(ServiceError)
    async def service_error_handler(_request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.post("/sessions")
    async def create_session(request: Request) -> JSONResponse:
        body = await _json_body(request)
        scenario = body.get("scenario", "human_study")
        if scenario not in fixture_names():
            raise ServiceError(404, "unknown_scenario",
                               f"unknown scenario {scenario!r}; known: "
                               f"{', '.join(fixture_names())}")
        mode = body.get("mode", MODE_TICC)
        if mode not in (MODE_TICC, MODE_STD):
            raise ServiceError(422, "invalid_mode",
                               f"mode must be {MODE_TICC} or {MODE_STD}")
        samples = body.get("samples", LIVE_SEARCH_SAMPLES)
        if not isinstance(samples, int) or samples < 1:
            raise ServiceError(422, "invalid_samples",
                               "samples must be a positive integer")
        seed = body.get("seed")
        if seed is None:
            seed = random.randrange(2**31 - 1)
        if not isinstance(seed, int):
            raise ServiceError(422, "invalid_seed", "seed must be an integer")
        config = config_from_fixture(
            scenario,
            mode=mode,
            num_search_samples=samples,
            master_seed=seed,
            num_runs=1,
        )
        session = Session(uuid.uuid4().hex, config)
        store.add(session)
        return JSONResponse(status_code=201, content={
            "session_id": session.session_id,
            "view": session.view("human"),
        })

    @app.get("/sessions/{session_id}/view")
    def get_view(session_id: str, role: str = "spectator") -> dict:
        if role not in ("human", "spectator"):
            raise ServiceError(422, "invalid_role",
                               "role must be human or spectator")
        session = store.get(session_id)
        with session.lock:
            return session.view(role)

    @app.post("/sessions/{session_id}/robot-step")
    def robot_step(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            if session.phase not in (PHASE_ROBOT, PHASE_ROUND_OVER):
                raise ServiceError(409, "wrong_phase",
                                   f"robot-step requires {PHASE_ROBOT} or "
                                   f"{PHASE_ROUND_OVER}, session is {session.phase}")
            if session.phase == PHASE_ROUND_OVER:
                session.engine = RoundEngine(
                    session.config, session.state, 0, session.round_index
                )
                session.last_robot = None
                session.last_human = None
            action, outcome = session.engine.robot_step()
            session.last_robot = (action, outcome)
            session.phase = PHASE_HUMAN
            return {
                "action": {"kind": action.kind, "item": action.item},
                "outcome": {"item": outcome.item, "success": outcome.success},
                "view": session.view("human"),
            }

    @app.post("/sessions/{session_id}/human-step")
    async def human_step(session_id: str, request: Request) -> dict:
        session = store.get(session_id)
        body = await _json_body(request)
        action = _parse_action(body, session.config.num_item_types)
        with session.lock:
            if session.phase != PHASE_HUMAN:
                raise ServiceError(409, "wrong_phase",
                                   f"human-step requires {PHASE_HUMAN}, "
                                   f"session is {session.phase}")
            outcome = session.engine.human_step(action)
            session.last_human = (action, outcome)
            task_reward = None
            if session.engine.done:
                log = session.engine.finish(session.state)
                session.completed.append(log)
                task_reward = log.task_reward
                session.engine = None
                session.round_index += 1
                if session.round_index >= session.config.total_rounds:
                    session.phase = PHASE_DONE
                else:
                    session.phase = PHASE_ROUND_OVER
            else:
                session.phase = PHASE_ROBOT
            return {
                "outcome": {"item": outcome.item, "success": outcome.success},
                "round_over": task_reward is not None,
                "task_reward": task_reward,
                "view": session.view("human"),
            }

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str) -> dict:
        session = store.get(session_id)
        with session.lock:
            return {
                "session_id": session.session_id,
                "config": config_to_payload(session.config),
                "completed_rounds": [
                    json.loads(log.to_json()) for log in session.completed
                ],
            }

    if ui_dir is not None:
        # registered last so the API routes above keep precedence
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app

"""Interaction service: phase machine, views, errors, harness parity."""

import json

import pytest
from fastapi.testclient import TestClient

from ticc.domain import Action
from ticc.experiments import run_single
from ticc.fixtures import config_from_fixture
from ticc.service import create_app


@pytest.fixture()
def client():
    with TestClient(create_app()) as c:
        yield c


def create(client, **body):
    payload = {"scenario": "human_study", "samples": 300, "seed": 11}
    payload.update(body)
    resp = client.post("/sessions", json=payload)
    assert resp.status_code == 201, resp.text
    data = resp.json()
    return data["session_id"], data["view"]


class TestCreateSession:
    def test_live_fixture_shape(self, client):
        _sid, view = create(client)
        assert view["phase"] == "RobotTurn"
        assert view["round"] == 0
        assert view["horizon"] == 6
        assert len(view["bag"]) == 4
        assert len(view["shopping_list"]) == 4

    def test_duplicate_creates_get_distinct_ids(self, client):
        a, _ = create(client)
        b, _ = create(client)
        assert a != b

    def test_unknown_scenario_lists_known_ones(self, client):
        resp = client.post("/sessions", json={"scenario": "mall"})
        assert resp.status_code == 404
        data = resp.json()
        assert data["code"] == "unknown_scenario"
        assert "setup1" in data["message"]

    def test_bad_mode_rejected(self, client):
        resp = client.post("/sessions", json={"scenario": "setup1", "mode": "turbo"})
        assert resp.status_code == 422
        assert resp.json()["code"] == "invalid_mode"

    def test_cross_origin_browsers_are_allowed(self, client):
        # the browser client usually runs on a different port
        resp = client.post("/sessions", json={},
                           headers={"Origin": "http://localhost:5173"})
        assert resp.status_code == 201
        assert resp.headers["access-control-allow-origin"] == "*"

    def test_static_client_mount_is_optional(self, tmp_path):
        (tmp_path / "index.html").write_text("<title>shop</title>")
        with TestClient(create_app(ui_dir=str(tmp_path))) as ui_client:
            page = ui_client.get("/")
            assert page.status_code == 200
            assert "shop" in page.text
            # API routes keep precedence over the static mount
            resp = ui_client.post("/sessions", json={})
            assert resp.status_code == 201


class TestViews:
    def test_spectator_never_sees_the_list(self, client):
        sid, _ = create(client)
        spect = client.get(f"/sessions/{sid}/view").json()
        assert "shopping_list" not in spect
        human = client.get(f"/sessions/{sid}/view", params={"role": "human"}).json()
        assert "shopping_list" in human

    def test_marginal_sums_to_one_and_expectations_bounded(self, client):
        sid, _ = create(client)
        view = client.get(f"/sessions/{sid}/view", params={"role": "human"}).json()
        assert sum(view["theta_marginal"]) == pytest.approx(1.0, abs=1e-9)
        for p in view["psi_expectation"] + view["phi_expectation"]:
            assert 0.0 <= p <= 1.0

    def test_unknown_session_is_404(self, client):
        resp = client.get("/sessions/nope/view")
        assert resp.status_code == 404
        assert resp.json()["code"] == "unknown_session"

    def test_bad_role_rejected(self, client):
        sid, _ = create(client)
        resp = client.get(f"/sessions/{sid}/view", params={"role": "robot"})
        assert resp.status_code == 422


class TestPhaseMachine:
    def test_robot_step_then_human_turn(self, client):
        sid, _ = create(client)
        resp = client.post(f"/sessions/{sid}/robot-step")
        assert resp.status_code == 200
        data = resp.json()
        assert data["action"]["kind"] in ("pick", "signal", "noop")
        assert data["view"]["phase"] == "HumanTurn"

    def test_double_robot_step_conflicts_without_state_change(self, client):
        sid, _ = create(client)
        client.post(f"/sessions/{sid}/robot-step")
        before = client.get(f"/sessions/{sid}/view", params={"role": "human"}).json()
        resp = client.post(f"/sessions/{sid}/robot-step")
        assert resp.status_code == 409
        assert resp.json()["code"] == "wrong_phase"
        after = client.get(f"/sessions/{sid}/view", params={"role": "human"}).json()
        assert before == after

    def test_human_step_out_of_turn_conflicts(self, client):
        sid, _ = create(client)
        resp = client.post(f"/sessions/{sid}/human-step",
                           json={"action_kind": "noop", "item": None})
        assert resp.status_code == 409

    def test_round_over_after_horizon_then_next_round(self, client):
        sid, view = create(client)
        horizon = view["horizon"]
        for step in range(horizon):
            client.post(f"/sessions/{sid}/robot-step")
            resp = client.post(f"/sessions/{sid}/human-step",
                               json={"action_kind": "noop", "item": None})
        data = resp.json()
        assert data["round_over"] is True
        assert data["task_reward"] is not None
        assert data["view"]["phase"] == "RoundOver"
        assert len(data["view"]["reward_ledger"]) == 1
        resp = client.post(f"/sessions/{sid}/robot-step")
        assert resp.status_code == 200
        assert resp.json()["view"]["phase"] == "HumanTurn"
        assert resp.json()["view"]["round"] == 1

    def test_session_finishes_in_done(self, client):
        sid, view = create(client)
        for _ in range(view["total_rounds"]):
            for _ in range(view["horizon"]):
                client.post(f"/sessions/{sid}/robot-step")
                resp = client.post(f"/sessions/{sid}/human-step",
                                   json={"action_kind": "noop", "item": None})
        assert resp.json()["view"]["phase"] == "Done"
        resp = client.post(f"/sessions/{sid}/robot-step")
        assert resp.status_code == 409


class TestHumanActions:
    def advance_to_human_turn(self, client, sid):
        client.post(f"/sessions/{sid}/robot-step")

    def test_action_validation(self, client):
        sid, _ = create(client)
        self.advance_to_human_turn(client, sid)
        bad_bodies = [
            {"action_kind": "grab", "item": 0},
            {"action_kind": "pick"},
            {"action_kind": "pick", "item": 9},
            {"action_kind": "pick", "item": "one"},
            {"action_kind": "noop", "item": 2},
        ]
        for body in bad_bodies:
            resp = client.post(f"/sessions/{sid}/human-step", json=body)
            assert resp.status_code == 422, body
            assert resp.json()["code"] == "invalid_action"

    def test_pick_on_zero_capability_item_always_fails(self, client):
        # the live fixture gives the human no skill at all on item 2
        sid, _ = create(client)
        for _ in range(4):
            self.advance_to_human_turn(client, sid)
            resp = client.post(f"/sessions/{sid}/human-step",
                               json={"action_kind": "pick", "item": 2})
            assert resp.json()["outcome"]["success"] is False

    def test_signal_counts_as_failure_outcome(self, client):
        sid, _ = create(client)
        self.advance_to_human_turn(client, sid)
        resp = client.post(f"/sessions/{sid}/human-step",
                           json={"action_kind": "signal", "item": 1})
        out = resp.json()["outcome"]
        assert out == {"item": 1, "success": False}


SCRIPT = (
    Action("pick", 1),
    Action("pick", 3),
    Action("signal", 2),
    Action("pick", 0),
    Action("noop"),
    Action("pick", 3),
)


class TestHarnessParity:
    def test_scripted_session_matches_harness_logs(self, client):
        config = config_from_fixture(
            "human_study",
            num_search_samples=300,
            master_seed=123,
            num_runs=1,
            human_policy="scripted",
            human_script=SCRIPT,
        )
        reference = run_single(config, 0)
        assert reference.error is None

        sid, view = create(client, samples=300, seed=123)
        for _ in range(view["total_rounds"]):
            for step in range(view["horizon"]):
                client.post(f"/sessions/{sid}/robot-step")
                action = SCRIPT[step]
                client.post(f"/sessions/{sid}/human-step",
                            json={"action_kind": action.kind, "item": action.item})
        archive = client.get(f"/sessions/{sid}/log").json()
        served = archive["completed_rounds"]
        expected = [json.loads(log.to_json()) for log in reference.logs]
        assert served == expected

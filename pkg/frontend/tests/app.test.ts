// @vitest-environment jsdom
import { beforeEach, describe, expect, it, vi } from "vitest";

import { App } from "../src/app.js";
import { ApiError, Client } from "../src/api.js";
import type { HumanStepReply, RobotStepReply, View } from "../src/api.js";
import { makeView } from "./fixtures.js";

let root: HTMLElement;
let toasts: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<div id="board"></div><div id="toasts"></div>';
  root = document.getElementById("board") as HTMLElement;
  toasts = document.getElementById("toasts") as HTMLElement;
  window.location.hash = "";
});

function humanReply(view: View): HumanStepReply {
  return { outcome: { item: 0, success: true }, round_over: false, task_reward: null, view };
}

function robotReply(view: View): RobotStepReply {
  return {
    action: { kind: "pick", item: 0 },
    outcome: { item: 0, success: true },
    view,
  };
}

/** Client double whose per-method behavior each test scripts. */
function stubClient(overrides: Partial<Record<keyof Client, unknown>>): Client {
  const stub = {
    createSession: vi.fn(),
    view: vi.fn(),
    robotStep: vi.fn(),
    humanStep: vi.fn(),
    log: vi.fn(),
    ...overrides,
  };
  return stub as unknown as Client;
}

describe("session bootstrap", () => {
  it("start creates a session, records the hash, and renders", async () => {
    const view = makeView();
    const client = stubClient({
      createSession: vi.fn().mockResolvedValue({ session_id: view.session_id, view }),
    });
    const app = new App(root, toasts, client);
    await app.start("human_study", 11);
    expect(window.location.hash).toContain(view.session_id);
    expect(root.querySelector(".board")).not.toBeNull();
  });

  it("resume rebuilds the board from the server view alone", async () => {
    const view = makeView({ step: 3, bag: [2, 1, 0, 0] });
    const client = stubClient({ view: vi.fn().mockResolvedValue(view) });
    const app = new App(root, toasts, client);
    await app.resume(view.session_id);
    expect(root.textContent).toContain("step 3 / 6");
    expect(app.currentView()).toEqual(view);
  });

  it("parses the session id out of the location hash", () => {
    expect(App.sessionFromHash("#sid=deadbeef01")).toBe("deadbeef01");
    expect(App.sessionFromHash("")).toBeNull();
  });
});

describe("action submission", () => {
  it("a double click sends a single request", async () => {
    const view = makeView();
    let release: (value: HumanStepReply) => void = () => {};
    const gate = new Promise<HumanStepReply>((resolve) => {
      release = resolve;
    });
    const humanStep = vi.fn().mockReturnValue(gate);
    const client = stubClient({
      view: vi.fn().mockResolvedValue(view),
      humanStep,
    });
    const app = new App(root, toasts, client);
    await app.resume(view.session_id);

    const pick = root.querySelector<HTMLButtonElement>(
      'button[data-kind="pick"][data-item="0"]',
    ) as HTMLButtonElement;
    pick.click();
    pick.click();
    release(humanReply(makeView({ step: 2 })));
    await app.idle();
    expect(humanStep).toHaveBeenCalledTimes(1);
  });

  it("ignores clicks outside HumanTurn", async () => {
    const view = makeView({ phase: "RoundOver", shopping_list: undefined });
    const humanStep = vi.fn();
    const client = stubClient({
      view: vi.fn().mockResolvedValue(view),
      humanStep,
    });
    const app = new App(root, toasts, client);
    await app.resume(view.session_id);
    await app.submitAction("pick", 0);
    expect(humanStep).not.toHaveBeenCalled();
  });

  it("a server rejection surfaces as a dismissible toast, board unchanged", async () => {
    const view = makeView();
    const client = stubClient({
      view: vi.fn().mockResolvedValue(view),
      humanStep: vi.fn().mockRejectedValue(
        new ApiError(409, "wrong_phase", "not your turn"),
      ),
    });
    const app = new App(root, toasts, client);
    await app.resume(view.session_id);
    const before = root.innerHTML;

    await app.submitAction("pick", 0);
    const toast = toasts.querySelector(".toast");
    expect(toast?.textContent).toContain("wrong_phase");
    expect(root.innerHTML).toBe(before);

    (toast?.querySelector(".toast-dismiss") as HTMLButtonElement).click();
    expect(toasts.querySelector(".toast")).toBeNull();
  });
});

describe("robot turns", () => {
  it("automatically requests the robot step after the human acts", async () => {
    const midRobot = makeView({ phase: "RobotTurn" });
    const backToHuman = makeView({ step: 2 });
    const robotStep = vi.fn().mockResolvedValue(robotReply(backToHuman));
    const client = stubClient({
      view: vi.fn().mockResolvedValue(makeView()),
      humanStep: vi.fn().mockResolvedValue(humanReply(midRobot)),
      robotStep,
    });
    const app = new App(root, toasts, client);
    await app.resume("abc123");
    await app.submitAction("noop", null);
    await app.idle();
    expect(robotStep).toHaveBeenCalledTimes(1);
    expect(app.currentView()?.phase).toBe("HumanTurn");
  });

  it("the next-round button opens the following round", async () => {
    const over = makeView({
      phase: "RoundOver",
      shopping_list: undefined,
      reward_ledger: [{ round: 0, task_reward: 1.0 }],
    });
    const nextRound = makeView({ round: 1 });
    const robotStep = vi.fn().mockResolvedValue(robotReply(nextRound));
    const client = stubClient({
      view: vi.fn().mockResolvedValue(over),
      robotStep,
    });
    const app = new App(root, toasts, client);
    await app.resume("abc123");

    const next = root.querySelector<HTMLButtonElement>(
      "button[data-role=next-round]",
    ) as HTMLButtonElement;
    next.click();
    await app.idle();
    expect(robotStep).toHaveBeenCalledTimes(1);
    expect(app.currentView()?.round).toBe(1);
  });
});

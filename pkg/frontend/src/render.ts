/** Pure DOM construction from a server view.
 *
 * renderBoard is a function of the view alone: rendering the same view
 * twice produces byte-identical markup, which is what makes a page
 * refresh reconstruct the exact same board from a fresh fetch. Nothing
 * in here mutates or derives game state.
 */

import type { LastAction, View } from "./api.js";
import { viewProblem } from "./view.js";

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function pct(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

function actionLabel(last: LastAction): string {
  const { action, outcome } = last;
  if (action.kind === "noop") return "waited";
  if (action.kind === "signal") {
    return `indicates it cannot pick item ${action.item}`;
  }
  const result = outcome.success ? "succeeded" : "failed";
  return `tried to pick item ${action.item} and ${result}`;
}

function barRow(
  label: string,
  value: number,
  truth: number | null,
  kind: string,
): HTMLElement {
  const row = el("div", "bar-row");
  row.appendChild(el("span", "bar-label", label));
  const track = el("div", "bar-track");
  const fill = el("div", `bar-fill ${kind}`);
  fill.style.width = pct(value);
  fill.dataset.value = String(value);
  track.appendChild(fill);
  if (truth !== null) {
    const marker = el("div", "bar-truth");
    marker.style.left = pct(truth);
    marker.dataset.value = String(truth);
    marker.title = `true rate ${pct(truth)}`;
    track.appendChild(marker);
  }
  row.appendChild(track);
  row.appendChild(el("span", "bar-value", pct(value)));
  return row;
}

function beliefPanel(
  title: string,
  heading: string,
  values: number[],
  truths: number[] | null,
  kind: string,
): HTMLElement {
  const panel = el("section", `panel belief-panel ${kind}-panel`);
  panel.appendChild(el("h3", "panel-title", title));
  panel.appendChild(el("p", "panel-hint", heading));
  values.forEach((value, item) => {
    panel.appendChild(
      barRow(`item ${item}`, value, truths ? truths[item] ?? null : null, kind),
    );
  });
  return panel;
}

function thetaPanel(view: View): HTMLElement {
  const panel = el("section", "panel belief-panel theta-panel");
  panel.appendChild(el("h3", "panel-title", "Which list is it?"));
  panel.appendChild(
    el("p", "panel-hint", "Robot's belief over the candidate shopping lists"),
  );
  view.theta_marginal.forEach((mass, index) => {
    panel.appendChild(barRow(`list ${index}`, mass, null, "theta"));
  });
  return panel;
}

function itemTile(view: View, item: number, humanTurn: boolean): HTMLElement {
  const tile = el("div", "item-tile");
  tile.dataset.item = String(item);
  tile.appendChild(el("h4", "item-name", `Item ${item}`));
  const bagCount = view.bag[item] ?? 0;
  const counts = el("div", "item-counts");
  if (view.shopping_list) {
    const needed = view.shopping_list[item] ?? 0;
    counts.textContent = `${bagCount} of ${needed} collected`;
    if (bagCount >= needed) tile.classList.add("item-done");
  } else {
    counts.textContent = `${bagCount} collected`;
  }
  tile.appendChild(counts);

  const pick = el("button", "action pick-action", "Pick") as HTMLButtonElement;
  pick.dataset.kind = "pick";
  pick.dataset.item = String(item);
  pick.disabled = !humanTurn;
  const signal = el(
    "button",
    "action signal-action",
    "Signal can't do",
  ) as HTMLButtonElement;
  signal.dataset.kind = "signal";
  signal.dataset.item = String(item);
  signal.disabled = !humanTurn;
  const actions = el("div", "item-actions");
  actions.appendChild(pick);
  actions.appendChild(signal);
  tile.appendChild(actions);
  return tile;
}

function robotBanner(view: View): HTMLElement {
  const last = view.last_robot_action;
  if (last === null) {
    return el("div", "robot-banner robot-idle", "Robot has not acted yet this round");
  }
  const isSignal = last.action.kind === "signal";
  const banner = el(
    "div",
    isSignal ? "robot-banner signal-banner" : "robot-banner",
  );
  banner.appendChild(el("strong", "banner-lead", "Robot"));
  banner.appendChild(el("span", "banner-text", ` ${actionLabel(last)}`));
  if (!isSignal && last.action.kind === "pick") {
    banner.classList.add(last.outcome.success ? "outcome-success" : "outcome-failure");
  }
  return banner;
}

function ledgerPanel(view: View): HTMLElement {
  const panel = el("section", "panel ledger-panel");
  panel.appendChild(el("h3", "panel-title", "Rounds"));
  const list = el("ol", "ledger-list");
  for (const entry of view.reward_ledger) {
    list.appendChild(
      el("li", "ledger-entry", `round ${entry.round + 1}: reward ${entry.task_reward.toFixed(3)}`),
    );
  }
  panel.appendChild(list);
  return panel;
}

function rewardModal(view: View): HTMLElement {
  const overlay = el("div", "modal-overlay");
  const modal = el("div", "reward-modal");
  // between rounds the view's round counter already points at the next
  // round, so the finished round's number comes from the ledger
  const finished = view.reward_ledger[view.reward_ledger.length - 1];
  const finishedLabel = finished ? finished.round + 1 : view.round + 1;
  const title = view.phase === "Done" ? "Session complete" : `Round ${finishedLabel} done`;
  modal.appendChild(el("h2", "modal-title", title));
  if (finished) {
    modal.appendChild(
      el("p", "modal-reward", `Task reward: ${finished.task_reward.toFixed(3)}`),
    );
  }
  const table = el("ul", "modal-ledger");
  for (const entry of view.reward_ledger) {
    table.appendChild(
      el("li", "modal-ledger-entry", `round ${entry.round + 1}: ${entry.task_reward.toFixed(3)}`),
    );
  }
  modal.appendChild(table);
  if (view.phase !== "Done") {
    const next = el("button", "next-round", "Start next round") as HTMLButtonElement;
    next.dataset.role = "next-round";
    modal.appendChild(next);
  } else {
    modal.appendChild(
      el("p", "modal-debrief", "Debrief: true capabilities are now overlaid on the belief bars."),
    );
  }
  overlay.appendChild(modal);
  return overlay;
}

/** Render the complete board for a view into the given root element. */
export function renderBoard(root: HTMLElement, view: unknown): void {
  const problem = viewProblem(view);
  root.textContent = "";
  if (problem !== null) {
    const panel = el("div", "error-panel");
    panel.appendChild(el("h2", "error-title", "Cannot display the board"));
    panel.appendChild(el("p", "error-detail", problem));
    root.appendChild(panel);
    return;
  }
  const v = view as View;
  const humanTurn = v.phase === "HumanTurn";
  const debrief = v.phase === "Done";

  const header = el("header", "status-bar");
  header.appendChild(el("span", "status scenario", v.scenario));
  header.appendChild(el("span", "status mode", v.mode));
  header.appendChild(
    el("span", "status round", `round ${Math.min(v.round + 1, v.total_rounds)} / ${v.total_rounds}`),
  );
  header.appendChild(el("span", "status step", `step ${v.step} / ${v.horizon}`));
  const phase = el("span", `status phase phase-${v.phase.toLowerCase()}`, v.phase);
  phase.dataset.phase = v.phase;
  header.appendChild(phase);
  root.appendChild(header);

  root.appendChild(robotBanner(v));

  const board = el("section", "board");
  for (let item = 0; item < v.bag.length; item += 1) {
    board.appendChild(itemTile(v, item, humanTurn));
  }
  const noop = el("button", "action noop-action", "Wait this turn") as HTMLButtonElement;
  noop.dataset.kind = "noop";
  noop.disabled = !humanTurn;
  board.appendChild(noop);
  root.appendChild(board);

  const beliefs = el("section", "beliefs");
  beliefs.appendChild(thetaPanel(v));
  beliefs.appendChild(
    beliefPanel(
      "Robot's model of you",
      "Estimated chance each of your picks lands",
      v.psi_expectation,
      debrief ? v.true_human_capability : null,
      "psi",
    ),
  );
  beliefs.appendChild(
    beliefPanel(
      "Your modeled view of the robot",
      "What the robot thinks you expect of it",
      v.phi_expectation,
      debrief ? v.true_robot_capability : null,
      "phi",
    ),
  );
  root.appendChild(beliefs);

  root.appendChild(ledgerPanel(v));

  if (v.phase === "RoundOver" || v.phase === "Done") {
    root.appendChild(rewardModal(v));
  }
}

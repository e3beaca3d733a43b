/** Browser entry point: boot or resume a session against the service. */

import { App } from "./app.js";
import { Client } from "./api.js";

function requireElement(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id} in index.html`);
  return node;
}

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "";
const app = new App(
  requireElement("board"),
  requireElement("toasts"),
  new Client(base),
  { pollMs: 2000 },
);

const existing = App.sessionFromHash(window.location.hash);
if (existing !== null) {
  void app.resume(existing);
} else {
  const scenario = params.get("scenario") ?? undefined;
  const seedParam = params.get("seed");
  const seed = seedParam === null ? undefined : Number(seedParam);
  void app.start(scenario, seed);
}

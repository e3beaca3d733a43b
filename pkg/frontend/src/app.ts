/** Controller: wires the rendered board to the service client.
 *
 * Single render loop, at most one in-flight mutation. The server is
 * the only source of truth; every user gesture turns into exactly one
 * request, and the board re-renders from the view the reply carries.
 * The robot acts through the same channel: whenever the session sits
 * in RobotTurn the controller requests one robot step.
 */

import { ApiError, Client } from "./api.js";
import type { ActionKind, View } from "./api.js";
import { renderBoard } from "./render.js";

export interface AppOptions {
  /** Polling interval for spectator refreshes; 0 disables polling. */
  pollMs?: number;
  /** Called after every render, handy for tests. */
  onRender?: (view: View) => void;
}

export class App {
  private view: View | null = null;
  private inflight = false;
  private chain: Promise<void> = Promise.resolve();
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly toasts: HTMLElement,
    private readonly client: Client,
    private readonly options: AppOptions = {},
  ) {
    this.root.addEventListener("click", (event) => this.onClick(event));
  }

  /** Resolves once every queued request has settled. */
  idle(): Promise<void> {
    return this.chain;
  }

  currentView(): View | null {
    return this.view;
  }

  /** Create a fresh session and keep its id in the URL hash. */
  start(scenario?: string, seed?: number, samples?: number): Promise<void> {
    return this.enqueue(async () => {
      const reply = await this.client.createSession({ scenario, seed, samples });
      window.location.hash = `sid=${reply.session_id}`;
      this.show(reply.view);
    });
  }

  /** Rebuild the board for an existing session, e.g. after a refresh. */
  resume(sessionId: string): Promise<void> {
    return this.enqueue(async () => {
      const view = await this.client.view(sessionId, "human");
      this.show(view);
    });
  }

  /** Session id recorded in the URL hash, if any. */
  static sessionFromHash(hash: string): string | null {
    const match = /sid=([0-9a-f]+)/.exec(hash);
    return match ? match[1] ?? null : null;
  }

  private onClick(event: Event): void {
    const target = event.target;
    if (!(target instanceof HTMLButtonElement) || target.disabled) return;
    if (target.dataset.role === "next-round") {
      this.advanceRobot();
      return;
    }
    const kind = target.dataset.kind as ActionKind | undefined;
    if (!kind) return;
    const item = target.dataset.item !== undefined ? Number(target.dataset.item) : null;
    this.submitAction(kind, item);
  }

  /** POST the human's action; locked while a request is in flight. */
  submitAction(kind: ActionKind, item: number | null): Promise<void> {
    if (this.inflight || this.view === null || this.view.phase !== "HumanTurn") {
      return this.chain;
    }
    return this.enqueue(async () => {
      if (this.view === null) return;
      const sessionId = this.view.session_id;
      try {
        const reply = await this.client.humanStep(sessionId, kind, item);
        this.show(reply.view);
      } catch (error) {
        this.toast(error);
      }
    });
  }

  private advanceRobot(): Promise<void> {
    if (this.inflight || this.view === null) return this.chain;
    const phase = this.view.phase;
    if (phase !== "RobotTurn" && phase !== "RoundOver") return this.chain;
    return this.enqueue(async () => {
      if (this.view === null) return;
      try {
        const reply = await this.client.robotStep(this.view.session_id);
        this.show(reply.view);
      } catch (error) {
        this.toast(error);
      }
    });
  }

  private enqueue(task: () => Promise<void>): Promise<void> {
    this.inflight = true;
    const step = this.chain.then(task).finally(() => {
      this.inflight = false;
    });
    this.chain = step.then(() => this.afterSettle());
    return this.chain;
  }

  private async afterSettle(): Promise<void> {
    // the robot moves by itself; humans click
    if (this.view !== null && this.view.phase === "RobotTurn" && !this.inflight) {
      this.inflight = true;
      try {
        const reply = await this.client.robotStep(this.view.session_id);
        this.show(reply.view);
      } catch (error) {
        this.toast(error);
      } finally {
        this.inflight = false;
      }
    }
  }

  private show(view: View): void {
    this.view = view;
    renderBoard(this.root, view);
    this.options.onRender?.(view);
    this.managePolling();
  }

  private managePolling(): void {
    const wanted = (this.options.pollMs ?? 0) > 0 && this.view?.phase !== "Done";
    if (wanted && this.timer === null) {
      this.timer = setInterval(() => this.poll(), this.options.pollMs);
    } else if (!wanted && this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private poll(): void {
    if (this.inflight || this.view === null) return;
    const sessionId = this.view.session_id;
    this.enqueue(async () => {
      try {
        const view = await this.client.view(sessionId, "human");
        this.show(view);
      } catch {
        // transient; the next tick retries
      }
    });
  }

  private toast(error: unknown): void {
    const note = document.createElement("div");
    note.className = "toast";
    const message =
      error instanceof ApiError
        ? `${error.code}: ${error.message}`
        : String(error);
    const text = document.createElement("span");
    text.textContent = message;
    note.appendChild(text);
    const dismiss = document.createElement("button");
    dismiss.className = "toast-dismiss";
    dismiss.textContent = "dismiss";
    dismiss.addEventListener("click", () => note.remove());
    note.appendChild(dismiss);
    this.toasts.appendChild(note);
  }
}

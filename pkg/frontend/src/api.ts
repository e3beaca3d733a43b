/** Typed client for the interaction service HTTP API.
 *
 * Field names mirror the server's wire format one to one; the UI layer
 * never invents or derives game state, it only displays what these
 * payloads carry.
 */

export type ActionKind = "pick" | "signal" | "noop";
export type Phase = "RobotTurn" | "HumanTurn" | "RoundOver" | "Done";

export interface ActionPayload {
  kind: ActionKind;
  item: number | null;
}

export interface OutcomePayload {
  item: number | null;
  success: boolean | null;
}

export interface LastAction {
  action: ActionPayload;
  outcome: OutcomePayload;
}

export interface RewardEntry {
  round: number;
  task_reward: number;
}

export interface View {
  session_id: string;
  scenario: string;
  mode: string;
  phase: Phase;
  round: number;
  total_rounds: number;
  step: number;
  horizon: number;
  bag: number[];
  theta_marginal: number[];
  psi_expectation: number[];
  phi_expectation: number[];
  true_human_capability: number[];
  true_robot_capability: number[];
  reward_ledger: RewardEntry[];
  last_robot_action: LastAction | null;
  last_human_action: LastAction | null;
  shopping_list?: number[];
}

export interface RobotStepReply {
  action: ActionPayload;
  outcome: OutcomePayload;
  view: View;
}

export interface HumanStepReply {
  outcome: OutcomePayload;
  round_over: boolean;
  task_reward: number | null;
  view: View;
}

export interface CreateReply {
  session_id: string;
  view: View;
}

export interface SessionOptions {
  scenario?: string;
  mode?: string;
  samples?: number;
  seed?: number;
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let code = "unknown_error";
  let message = `request failed with status ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.code === "string") code = body.code;
    if (body && typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiError(response.status, code, message);
}

export class Client {
  constructor(private readonly base: string = "") {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  async createSession(options: SessionOptions = {}): Promise<CreateReply> {
    const response = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(options),
    });
    return unwrap<CreateReply>(response);
  }

  async view(sessionId: string, role: "human" | "spectator" = "human"): Promise<View> {
    const response = await fetch(
      this.url(`/sessions/${sessionId}/view?role=${role}`),
    );
    return unwrap<View>(response);
  }

  async robotStep(sessionId: string): Promise<RobotStepReply> {
    const response = await fetch(this.url(`/sessions/${sessionId}/robot-step`), {
      method: "POST",
    });
    return unwrap<RobotStepReply>(response);
  }

  async humanStep(
    sessionId: string,
    kind: ActionKind,
    item: number | null,
  ): Promise<HumanStepReply> {
    const body: Record<string, unknown> = { action_kind: kind };
    if (item !== null) body.item = item;
    const response = await fetch(this.url(`/sessions/${sessionId}/human-step`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return unwrap<HumanStepReply>(response);
  }

  async log(sessionId: string): Promise<unknown> {
    const response = await fetch(this.url(`/sessions/${sessionId}/log`));
    return unwrap<unknown>(response);
  }
}

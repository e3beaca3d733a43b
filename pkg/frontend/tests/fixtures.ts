import type { View } from "../src/api.js";

/** A plausible mid-round view; tests override what they probe. */
export function makeView(overrides: Partial<View> = {}): View {
  return {
    session_id: "abc123",
    scenario: "human_study",
    mode: "ticc",
    phase: "HumanTurn",
    round: 0,
    total_rounds: 5,
    step: 1,
    horizon: 6,
    bag: [1, 0, 0, 0],
    theta_marginal: [0.25, 0.25, 0.25, 0.125, 0.125],
    psi_expectation: [1.0, 1.0, 1.0, 1.0],
    phi_expectation: [1.0, 1.0, 1.0, 1.0],
    true_human_capability: [0.5, 1.0, 0.0, 1.0],
    true_robot_capability: [0.8, 0.0, 1.0, 1.0],
    reward_ledger: [],
    last_robot_action: {
      action: { kind: "pick", item: 0 },
      outcome: { item: 0, success: true },
    },
    last_human_action: null,
    shopping_list: [2, 3, 1, 0],
    ...overrides,
  };
}

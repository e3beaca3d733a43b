/** Structural validation of server view payloads.
 *
 * The board renders only from a view that passes these checks; a
 * malformed payload produces an error panel instead of a partially
 * drawn board.
 */

import type { View } from "./api.js";

const PHASES = new Set(["RobotTurn", "HumanTurn", "RoundOver", "Done"]);

function isNumberArray(value: unknown, length?: number): value is number[] {
  if (!Array.isArray(value)) return false;
  if (length !== undefined && value.length !== length) return false;
  return value.every((x) => typeof x === "number" && Number.isFinite(x));
}

/** Returns null for a well-formed view, else a description of the fault. */
export function viewProblem(raw: unknown): string | null {
  if (typeof raw !== "object" || raw === null) {
    return "view is not an object";
  }
  const v = raw as Partial<View>;
  if (typeof v.session_id !== "string") return "missing session_id";
  if (typeof v.phase !== "string" || !PHASES.has(v.phase)) {
    return `unknown phase ${JSON.stringify(v.phase)}`;
  }
  if (!isNumberArray(v.bag)) return "bag is not a number vector";
  const items = v.bag.length;
  if (items === 0) return "bag is empty";
  if (!isNumberArray(v.theta_marginal)) return "theta_marginal is not a number vector";
  if (!isNumberArray(v.psi_expectation, items)) {
    return "psi_expectation does not match the item count";
  }
  if (!isNumberArray(v.phi_expectation, items)) {
    return "phi_expectation does not match the item count";
  }
  if (!isNumberArray(v.true_human_capability, items)) {
    return "true_human_capability does not match the item count";
  }
  if (!isNumberArray(v.true_robot_capability, items)) {
    return "true_robot_capability does not match the item count";
  }
  const marginalTotal = v.theta_marginal.reduce((a, b) => a + b, 0);
  if (Math.abs(marginalTotal - 1) > 1e-6) {
    return `theta_marginal sums to ${marginalTotal}, expected 1`;
  }
  if (typeof v.round !== "number" || typeof v.total_rounds !== "number") {
    return "missing round counters";
  }
  if (typeof v.step !== "number" || typeof v.horizon !== "number") {
    return "missing step counters";
  }
  if (!Array.isArray(v.reward_ledger)) return "missing reward_ledger";
  if (v.shopping_list !== undefined && !isNumberArray(v.shopping_list, items)) {
    return "shopping_list does not match the item count";
  }
  return null;
}

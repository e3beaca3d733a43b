"""Flat-array Monte-Carlo tree search kernel.

The search tree lives in preallocated numpy arrays indexed by node id,
with numba typed dictionaries mapping packed edge / statistic keys to
array rows, so the whole sampling loop compiles to machine code. The
Python-facing planner wraps this module; nothing here depends on the
rest of the package.

Layout per tree node:

* ``node_n``        : visit count N(h)
* ``node_na/va``    : per robot action, visit count and running mean value
* ``node_bag``      : per intent, how many simulated particles passed
                      through (the particle bag in compressed form; the
                      full augmented states are reconstructible because
                      world and capability counts are path-determined)

Per (node, intent, robot action), allocated on first touch:

* ``row_n``         : visits of this intent/action pair
* ``row_nah/vah``   : per human action, visit count and running mean

Edges are keyed by (robot action, robot outcome, human action, human
outcome), so distinct stochastic outcomes get distinct subtrees.

One simulation iteration descends the tree by UCB1 over robot actions,
samples the human action from a softmax over her UCB1-augmented
per-intent statistics, samples both outcomes (the robot from its true
skill, the human from the current belief expectation), accrues the
calibration bonus on the post-transition counts, expands one new node,
estimates its value with a uniform-random rollout, and backs the
discounted return up the visited path.

In ``std`` mode the internal model assumes every pick succeeds and
tracks no capability counts, and the calibration bonus is off; the
tree machinery is otherwise identical, which keeps seeded draw streams
aligned between modes.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from numba import types as nbt
from numba.typed import Dict

# outcome codes used in edge keys
OUT_FAIL = 0
OUT_SUCCESS = 1
OUT_NONE = 2

KEY_TYPE = nbt.int64
_PATH_SLACK = 2


class TreeArena:
    """Growable array storage for one search tree."""

    def __init__(self, num_actions: int, num_intents: int, cap_nodes: int = 4096):
        cap_rows = 4 * cap_nodes
        self.num_actions = num_actions
        self.num_intents = num_intents
        self.node_n = np.zeros(cap_nodes, np.int64)
        self.node_na = np.zeros((cap_nodes, num_actions), np.int64)
        self.node_va = np.zeros((cap_nodes, num_actions), np.float64)
        self.node_bag = np.zeros((cap_nodes, num_intents), np.int64)
        self.row_n = np.zeros(cap_rows, np.int64)
        self.row_nah = np.zeros((cap_rows, num_actions), np.int64)
        self.row_vah = np.zeros((cap_rows, num_actions), np.float64)
        self.row_map = Dict.empty(KEY_TYPE, KEY_TYPE)
        self.child_map = Dict.empty(KEY_TYPE, KEY_TYPE)
        self.counts = np.zeros(2, np.int64)  # allocated nodes, allocated rows
        self.counts[0] = 1  # node 0 is the initial root
        self.root = 0

    def ensure_capacity(self, horizon_left: int) -> None:
        need_nodes = int(self.counts[0]) + _PATH_SLACK
        if need_nodes > self.node_n.shape[0]:
            self._grow_nodes(max(need_nodes, 2 * self.node_n.shape[0]))
        need_rows = int(self.counts[1]) + horizon_left + _PATH_SLACK
        if need_rows > self.row_n.shape[0]:
            self._grow_rows(max(need_rows, 2 * self.row_n.shape[0]))

    def new_node(self) -> int:
        self.ensure_capacity(0)
        idx = int(self.counts[0])
        self.counts[0] += 1
        return idx

    def _grow_nodes(self, cap: int) -> None:
        old = self.node_n.shape[0]
        self.node_n = _grown(self.node_n, cap)
        self.node_na = _grown(self.node_na, cap)
        self.node_va = _grown(self.node_va, cap)
        self.node_bag = _grown(self.node_bag, cap)
        assert self.node_n.shape[0] >= cap > old

    def _grow_rows(self, cap: int) -> None:
        self.row_n = _grown(self.row_n, cap)
        self.row_nah = _grown(self.row_nah, cap)
        self.row_vah = _grown(self.row_vah, cap)


def _grown(arr: np.ndarray, cap: int) -> np.ndarray:
    shape = (cap,) + arr.shape[1:]
    out = np.zeros(shape, arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def pack_row(node: int, theta: int, ar: int) -> int:
    return (node * 64 + theta) * 64 + ar


@njit(cache=True)
def pack_edge(node: int, ar: int, r_out: int, ah: int, h_out: int) -> int:
    return (((node * 64 + ar) * 4 + r_out) * 64 + ah) * 4 + h_out


@njit(cache=True)
def _task_reward(bag, required):
    total = 0.0
    matched = 0.0
    excess = 0.0
    for i in range(bag.shape[0]):
        total += required[i]
        if bag[i] < required[i]:
            matched += bag[i]
        else:
            matched += required[i]
            excess += bag[i] - required[i]
    return (matched - 0.5 * excess) / total


@njit(cache=True)
def _mean_overlap(phi, target):
    n = phi.shape[0]
    acc = 0.0
    for i in range(n):
        p = phi[i, 0] / (phi[i, 0] + phi[i, 1])
        t = target[i]
        lo = p if p < t else t
        hi = (1.0 - p) if p > t else (1.0 - t)
        acc += lo + hi
    return acc / n


@njit(cache=True)
def _resolve_outcome(action, n_items, probs, std_mode):
    """Outcome code for one action; picks consume one uniform draw."""
    if action == n_items:
        return OUT_NONE
    if action > n_items:
        return OUT_FAIL
    p = 1.0 if std_mode else probs[action]
    if np.random.random() < p:
        return OUT_SUCCESS
    return OUT_FAIL


@njit(cache=True)
def _resolve_human_outcome(action, n_items, psi, std_mode):
    if action == n_items:
        return OUT_NONE
    if action > n_items:
        return OUT_FAIL
    p = 1.0 if std_mode else psi[action, 0] / (psi[action, 0] + psi[action, 1])
    if np.random.random() < p:
        return OUT_SUCCESS
    return OUT_FAIL


@njit(cache=True)
def _select_robot(node, node_n, node_na, node_va, ucb_c, num_actions):
    """UCB1 with unvisited-first; all ties break uniformly at random."""
    unvisited = 0
    for a in range(num_actions):
        if node_na[node, a] == 0:
            unvisited += 1
    if unvisited > 0:
        k = np.random.randint(0, unvisited)
        for a in range(num_actions):
            if node_na[node, a] == 0:
                if k == 0:
                    return a
                k -= 1
    log_n = np.log(float(node_n[node]))
    best = -1e300
    ties = 0
    for a in range(num_actions):
        u = node_va[node, a] + ucb_c * np.sqrt(log_n / node_na[node, a])
        if u > best:
            best = u
            ties = 1
        elif u == best:
            ties += 1
    k = 0 if ties == 1 else np.random.randint(0, ties)
    for a in range(num_actions):
        u = node_va[node, a] + ucb_c * np.sqrt(log_n / node_na[node, a])
        if u == best:
            if k == 0:
                return a
            k -= 1
    return num_actions - 1  # unreachable


@njit(cache=True)
def _sample_human(row, row_n, row_nah, row_vah, ucb_c, temp, num_actions, scores):
    """Draw the partner's action from her per-intent statistics.

    Unvisited actions are sampled first, uniformly; once all are visited
    the draw is a softmax over UCB1 scores (argmax with lowest-index
    ties at temperature 0).
    """
    total = row_n[row]
    if total == 0:
        return np.random.randint(0, num_actions)
    unvisited = 0
    for a in range(num_actions):
        if row_nah[row, a] == 0:
            unvisited += 1
    if unvisited > 0:
        k = np.random.randint(0, unvisited)
        for a in range(num_actions):
            if row_nah[row, a] == 0:
                if k == 0:
                    return a
                k -= 1
    log_n = np.log(float(total))
    peak = -1e300
    for a in range(num_actions):
        scores[a] = row_vah[row, a] + ucb_c * np.sqrt(log_n / row_nah[row, a])
        if scores[a] > peak:
            peak = scores[a]
    if temp <= 0.0:
        for a in range(num_actions):
            if scores[a] == peak:
                return a
    z = 0.0
    for a in range(num_actions):
        scores[a] = np.exp((scores[a] - peak) / temp)
        z += scores[a]
    x = np.random.random() * z
    acc = 0.0
    for a in range(num_actions):
        acc += scores[a]
        if x < acc:
            return a
    return num_actions - 1  # guards against accumulated float error


@njit(cache=True)
def _rollout(
    bag, psi, phi, theta, step, disc,
    lists, robot_truth, horizon,
    gamma, epsilon, calib_weight, std_mode, solo,
    n_items, num_actions,
):
    """Uniform-random playout; returns the discounted return from here."""
    ret = 0.0
    mult = 1.0
    g = disc
    while True:
        if step >= horizon:
            ret += mult * _task_reward(bag, lists[theta])
            return ret
        if epsilon > 0.0 and g < epsilon:
            return ret
        ar = np.random.randint(0, num_actions)
        ah = n_items if solo else np.random.randint(0, num_actions)
        r_out = _resolve_outcome(ar, n_items, robot_truth, std_mode)
        h_out = _resolve_human_outcome(ah, n_items, psi, std_mode)
        if r_out == OUT_SUCCESS:
            bag[ar] += 1
        if h_out == OUT_SUCCESS:
            bag[ah] += 1
        if not std_mode:
            if r_out != OUT_NONE:
                item = ar if ar < n_items else ar - n_items - 1
                phi[item, 1 - r_out] += 1.0
            if h_out != OUT_NONE:
                item = ah if ah < n_items else ah - n_items - 1
                psi[item, 1 - h_out] += 1.0
            if calib_weight > 0.0:
                ret += mult * calib_weight * _mean_overlap(phi, robot_truth)
        mult *= gamma
        g *= gamma
        step += 1


@njit(cache=True)
def seed_rng(seed):
    """Seed the kernel's generator (it is process-global, like numpy's)."""
    np.random.seed(seed)


@njit(cache=True)
def estimate_uniform_value(
    seed, episodes,
    bag0, psi0, phi0, theta, step,
    lists, robot_truth, horizon,
    gamma, epsilon, calib_weight, std_mode, solo,
):
    """Monte-Carlo value of the uniform-random policy from one state."""
    np.random.seed(seed)
    n_items = bag0.shape[0]
    bag = np.empty(n_items, np.int64)
    psi = np.empty((n_items, 2), np.float64)
    phi = np.empty((n_items, 2), np.float64)
    acc = 0.0
    for _ in range(episodes):
        for i in range(n_items):
            bag[i] = bag0[i]
            psi[i, 0] = psi0[i, 0]
            psi[i, 1] = psi0[i, 1]
            phi[i, 0] = phi0[i, 0]
            phi[i, 1] = phi0[i, 1]
        acc += _rollout(
            bag, psi, phi, theta, step, 1.0,
            lists, robot_truth, horizon,
            gamma, epsilon, calib_weight, std_mode, solo,
            n_items, 2 * n_items + 1,
        )
    return acc / episodes


@njit(cache=True)
def run_iterations(
    seed, start_iter, max_iter,
    root, root_step, root_bag, particle_intents, psi0, phi0,
    lists, robot_truth, horizon,
    gamma, epsilon, ucb_c, human_temp, calib_weight,
    std_mode, solo,
    node_n, node_na, node_va, node_bag,
    row_n, row_nah, row_vah,
    row_map, child_map, counts,
    trace_depth, trace_action, trace_return, trace_values,
):
    """Run search iterations ``start_iter..max_iter``; resumable.

    Returns the number of completed iterations. A return value below
    ``max_iter`` means the arena ran out of capacity; the caller should
    grow it and call again with ``start_iter`` set to the return value
    (the generator state carries over within the process, so the
    resumed stream continues exactly).
    """
    n_items = root_bag.shape[0]
    num_actions = 2 * n_items + 1
    n_particles = particle_intents.shape[0]
    horizon_left = horizon - root_step

    bag = np.empty(n_items, np.int64)
    psi = np.empty((n_items, 2), np.float64)
    phi = np.empty((n_items, 2), np.float64)
    scores = np.empty(num_actions, np.float64)
    path_node = np.empty(horizon_left + 1, np.int64)
    path_ar = np.empty(horizon_left + 1, np.int64)
    path_ah = np.empty(horizon_left + 1, np.int64)
    path_reward = np.empty(horizon_left + 1, np.float64)

    if start_iter == 0:
        np.random.seed(seed)

    it = start_iter
    while it < max_iter:
        # capacity guard: one new node, at most one new row per level
        if counts[0] + _PATH_SLACK > node_n.shape[0]:
            return it
        if counts[1] + horizon_left + _PATH_SLACK > row_n.shape[0]:
            return it

        theta = particle_intents[np.random.randint(0, n_particles)]
        for i in range(n_items):
            bag[i] = root_bag[i]
            psi[i, 0] = psi0[i, 0]
            psi[i, 1] = psi0[i, 1]
            phi[i, 0] = phi0[i, 0]
            phi[i, 1] = phi0[i, 1]

        node = root
        step = root_step
        disc = 1.0
        path_len = 0
        leaf = 0.0
        while True:
            if step >= horizon:
                leaf = _task_reward(bag, lists[theta])
                break
            if epsilon > 0.0 and disc < epsilon:
                leaf = 0.0
                break

            ar = _select_robot(node, node_n, node_na, node_va, ucb_c, num_actions)
            rkey = pack_row(node, theta, ar)
            if rkey in row_map:
                row = row_map[rkey]
            else:
                row = counts[1]
                counts[1] += 1
                row_map[rkey] = row
            if solo:
                ah = n_items
            else:
                ah = _sample_human(
                    row, row_n, row_nah, row_vah, ucb_c, human_temp, num_actions, scores
                )
            r_out = _resolve_outcome(ar, n_items, robot_truth, std_mode)
            h_out = _resolve_human_outcome(ah, n_items, psi, std_mode)

            path_node[path_len] = node
            path_ar[path_len] = ar
            path_ah[path_len] = ah

            if r_out == OUT_SUCCESS:
                bag[ar] += 1
            if h_out == OUT_SUCCESS:
                bag[ah] += 1
            reward = 0.0
            if not std_mode:
                if r_out != OUT_NONE:
                    item = ar if ar < n_items else ar - n_items - 1
                    phi[item, 1 - r_out] += 1.0
                if h_out != OUT_NONE:
                    item = ah if ah < n_items else ah - n_items - 1
                    psi[item, 1 - h_out] += 1.0
                if calib_weight > 0.0:
                    reward = calib_weight * _mean_overlap(phi, robot_truth)
            path_reward[path_len] = reward
            path_len += 1
            step += 1
            disc *= gamma

            ekey = pack_edge(node, ar, r_out, ah, h_out)
            if ekey in child_map:
                node = child_map[ekey]
            else:
                child = counts[0]
                counts[0] += 1
                child_map[ekey] = child
                leaf = _rollout(
                    bag, psi, phi, theta, step, disc,
                    lists, robot_truth, horizon,
                    gamma, epsilon, calib_weight, std_mode, solo,
                    n_items, num_actions,
                )
                break

        ret = leaf
        for k in range(path_len - 1, -1, -1):
            ret = path_reward[k] + gamma * ret
            v = path_node[k]
            a = path_ar[k]
            h = path_ah[k]
            node_n[v] += 1
            node_na[v, a] += 1
            node_va[v, a] += (ret - node_va[v, a]) / node_na[v, a]
            rw = row_map[pack_row(v, theta, a)]
            row_n[rw] += 1
            row_nah[rw, h] += 1
            row_vah[rw, h] += (ret - row_vah[rw, h]) / row_nah[rw, h]
            node_bag[v, theta] += 1

        if trace_depth.shape[0] > 0:
            trace_depth[it] = path_len
            trace_action[it] = path_ar[0]
            trace_return[it] = ret
            for a in range(num_actions):
                trace_values[it, a] = node_va[root, a]
        it += 1
    return it
